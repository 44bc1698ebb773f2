"""Shared randomness: the seeded tape of marking thresholds and exact dyadic
marking arithmetic.

Every comparison the algorithm makes has the form ``rho <= 2**-e * 2**s``.
For an integer ``rho`` in ``[1, 2**B]`` that is equivalent to
``e - s <= level`` where ``level = B - bitlen(rho - 1)``, so the simulators
work with small integer levels instead of B-bit numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numba
import numpy as np

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TAG_RHO = 0x52484F5441504531
_TAG_PRIORITY = 0x5052494F52495459

DEFAULT_DELTA = 0.005
DEFAULT_CT = 8


class ParamError(ValueError):
    pass


def ceil_log2(x: int) -> int:
    """Smallest k with 2**k >= x, for integer x >= 1."""
    if x < 1:
        raise ParamError(f"ceil_log2 needs x >= 1, got {x}")
    return (x - 1).bit_length()


def sleep_constant(delta: float) -> int:
    return math.ceil(20 * math.log2(1.0 / delta))


@dataclass(frozen=True)
class Params:
    """Every constant of the algorithm in one validated record.

    Build with :meth:`Params.build`; the constructor only checks invariants.
    """

    delta_max_degree: int
    T: int
    delta_const: float
    K: int
    C_delta: float
    bits: int
    master_seed: int
    T_multiplier: int

    def __post_init__(self):
        if self.delta_max_degree < 0:
            raise ParamError("delta_max_degree must be >= 0")
        if not 0.0 < self.delta_const <= 0.01:
            raise ParamError(f"delta_const must lie in (0, 0.01], got {self.delta_const}")
        if self.T_multiplier < 1:
            raise ParamError("T_multiplier must be >= 1")
        if self.T != self.T_multiplier * rounds_unit(self.delta_max_degree):
            raise ParamError("T must equal T_multiplier * ceil(log2(max(delta,1)+1))")
        if self.K < 0:
            raise ParamError("K must be >= 0")
        if self.C_delta != math.log2(1.0 / self.delta_const):
            raise ParamError("C_delta must equal log2(1/delta_const)")
        if self.bits != rounds_unit(self.delta_max_degree) + 1 + self.T:
            raise ParamError("bits must equal ceil(log2(max(delta,1)+1)) + 1 + T")
        if not 0 <= self.master_seed <= M64:
            raise ParamError("master_seed must be an unsigned 64-bit integer")

    @classmethod
    def build(cls, delta_max_degree: int, *, ct: int = DEFAULT_CT, delta: float = DEFAULT_DELTA,
              seed: int = 0, k_override: int | None = None) -> "Params":
        unit = rounds_unit(delta_max_degree)
        T = ct * unit
        K = sleep_constant(delta) if k_override is None else int(k_override)
        return cls(
            delta_max_degree=int(delta_max_degree),
            T=T,
            delta_const=float(delta),
            K=K,
            C_delta=math.log2(1.0 / delta),
            bits=unit + 1 + T,
            master_seed=int(seed) & M64,
            T_multiplier=int(ct),
        )

    @property
    def initial_exponent(self) -> int:
        return initial_exponent(self.delta_max_degree)

    @property
    def k_overridden(self) -> bool:
        return self.K != sleep_constant(self.delta_const)

    def with_seed(self, seed: int) -> "Params":
        d = asdict(self)
        d["master_seed"] = int(seed) & M64
        return Params(**d)

    def to_json(self) -> str:
        d = asdict(self)
        d["master_seed"] = str(self.master_seed)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Params":
        d = json.loads(text)
        expected = set(cls.__dataclass_fields__)
        if set(d) != expected:
            raise ParamError(f"Params JSON must have exactly the fields {sorted(expected)}")
        d["master_seed"] = int(d["master_seed"])
        return cls(**d)


def rounds_unit(delta_max_degree: int) -> int:
    """ceil(log2(D + 1)) with D clamped to at least 1."""
    return ceil_log2(max(int(delta_max_degree), 1) + 1)


def initial_exponent(delta_max_degree: int) -> int:
    """Exponent e of the first-round marking probability 2**-e."""
    if delta_max_degree < 1:
        raise ParamError(f"initial_exponent needs a maximum degree >= 1, got {delta_max_degree}")
    return ceil_log2(delta_max_degree) + 1


def start_exponent(delta_max_degree: int) -> int:
    # edgeless graphs behave as if the maximum degree were 1
    return initial_exponent(max(int(delta_max_degree), 1))


# hashing ------------------------------------------------------------------

def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M64
    return x ^ (x >> 31)


def _rho_word(seed: int, v: int, t: int, j: int) -> int:
    h = splitmix64(seed ^ _TAG_RHO)
    h = splitmix64(h ^ v)
    return splitmix64(h ^ ((t << 20) | j))


def rho(params: Params, v: int, t: int) -> int:
    """The B-bit tape value for vertex ``v`` in round ``t``, in ``[1, 2**B]``."""
    if not 1 <= t <= params.T:
        raise ParamError(f"round {t} outside [1, {params.T}]")
    v, t = int(v), int(t)
    if v < 0:
        raise ParamError("vertex ids are non-negative")
    B = params.bits
    words = -(-B // 64)
    acc = 0
    for j in range(words):
        acc = (acc << 64) | _rho_word(params.master_seed, v, t, j)
    x = acc >> (64 * words - B)
    return x if x else 1 << B


def level_of(value: int, bits: int) -> int:
    """Largest k <= bits with ``value <= 2**(bits - k)``."""
    return bits - (value - 1).bit_length()


def is_marked(r: int, e: int, params: Params) -> bool:
    """Exact marking test ``r / 2**B <= 2**-e``."""
    if e > params.bits:
        return False
    return r <= 1 << (params.bits - e)


def priority(seed: int, v: int) -> int:
    """64-bit random-order key for the greedy baseline."""
    return splitmix64(splitmix64(int(seed) ^ _TAG_PRIORITY) ^ int(v))


# vectorized tape ------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def _nb_splitmix(x):
    x = x + numba.uint64(_GOLDEN)
    x = (x ^ (x >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
    return x ^ (x >> numba.uint64(31))


@numba.njit(cache=True)
def _nb_bitlen(x):
    n = 0
    while x:
        x >>= numba.uint64(1)
        n += 1
    return n


@numba.njit(cache=True)
def _nb_popcount(x):
    n = 0
    while x:
        x &= x - numba.uint64(1)
        n += 1
    return n


@numba.njit(cache=True)
def _nb_level_rows(seed, vertices, T, B, out):
    words = (B + 63) // 64
    shift = 64 * words - B
    buf = np.empty(words, dtype=np.uint64)
    base = _nb_splitmix(seed ^ numba.uint64(_TAG_RHO))
    for i in range(vertices.shape[0]):
        hv = _nb_splitmix(base ^ numba.uint64(vertices[i]))
        for t in range(1, T + 1):
            for j in range(words):
                buf[j] = _nb_splitmix(hv ^ ((numba.uint64(t) << numba.uint64(20)) | numba.uint64(j)))
            if shift:
                buf[words - 1] = (buf[words - 1] >> numba.uint64(shift)) << numba.uint64(shift)
            # bit length and popcount of the top-B-bit value x
            blen = 0
            ones = 0
            for j in range(words):
                w = buf[j]
                if w and blen == 0:
                    blen = 64 * (words - j - 1) + _nb_bitlen(w) - shift
                ones += _nb_popcount(w)
            if blen == 0:
                out[i, t] = 0  # x == 0 stands for rho = 2**B
            else:
                out[i, t] = B - blen + (1 if ones == 1 else 0)


def level_table(params: Params, vertices) -> np.ndarray:
    """Levels for every listed vertex and round; column 0 is unused."""
    verts = np.ascontiguousarray(vertices, dtype=np.int64)
    out = np.zeros((verts.size, params.T + 1), dtype=np.int16)
    _nb_level_rows(np.uint64(params.master_seed), verts, params.T, params.bits, out)
    return out


class Tape:
    """Lazily computed, cached per-vertex level rows for one parameter set."""

    def __init__(self, params: Params, n: int | None = None):
        self.params = params
        self._rows: dict[int, list[int]] = {}
        self._table = None
        if n is not None:
            self._table = level_table(params, np.arange(n))

    def row(self, v: int) -> list[int]:
        r = self._rows.get(v)
        if r is None:
            if self._table is not None:
                r = self._table[v].tolist()
            else:
                r = level_table(self.params, [v])[0].tolist()
            self._rows[v] = r
        return r
