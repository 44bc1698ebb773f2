"""Round classification and the per-round event frequencies it feeds.

Masses ``d_t(v)`` are sums of ``2**-e`` and are kept exactly as integers
scaled by ``2**B``. Only neighbours still taking part in round ``t`` (active
and past the dead check) contribute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numba
import numpy as np

from .reference import Outcome

INACTIVE, SLEEPING, LIGHT, MODERATE, HEAVY = range(5)
CLASS_NAMES = ("inactive", "sleeping", "light", "moderate", "heavy")
FLAG_NAMES = ("good1", "good2", "wrong_down", "wrong_up", "mistaken")


@numba.njit(cache=True)
def _masses(indptr, indices, expo, weight_mask, B, T, out):
    n = indptr.shape[0] - 1
    for v in range(n):
        for t in range(1, T + 1):
            s = 0
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if weight_mask[u, t]:
                    s += np.int64(1) << np.int64(B - expo[u, t])
            out[v, t] = s


@numba.njit(cache=True)
def _neighbor_joined(indptr, indices, join_round, T, out):
    n = indptr.shape[0] - 1
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            r = join_round[indices[k]]
            if r > 0:
                out[v, r] = True


def _mass_table(out: Outcome, mask: np.ndarray, exact_int64: bool) -> np.ndarray:
    g, T, B = out.graph, out.params.T, out.params.bits
    if exact_int64:
        res = np.zeros((g.n, T + 1), dtype=np.int64)
        _masses(g.indptr, g.indices, out.exponent, mask, B, T, res)
        return res
    res = np.zeros((g.n, T + 1), dtype=object)
    res[:] = 0
    adj = g.adjacency
    for v in range(g.n):
        for t in range(1, T + 1):
            res[v, t] = sum(1 << (B - int(out.exponent[u, t])) for u in adj[v] if mask[u, t])
    return res


class RoundClassRecord:
    """Classification of every (vertex, round) of one run.

    ``mass[v, t]`` and ``heavy_or_sleeping_mass[v, t]`` are scaled by
    ``2**bits``; ``cls`` holds the class codes above.
    """

    def __init__(self, out: Outcome):
        p = out.params
        g, T, B = out.graph, p.T, p.bits
        self.params = p
        self.scale = 1 << B
        self.exact_int64 = B + math.ceil(math.log2(max(g.max_degree, 1) + 1)) + 1 <= 62
        alive = out.alive
        self.alive = alive
        self.mass = _mass_table(out, alive, self.exact_int64)

        delta = Fraction(p.delta_const)
        c_delta = Fraction(p.C_delta)
        self.light_max = math.floor(delta * self.scale)  # d <= delta
        self.delta_min = math.ceil(delta * self.scale)  # d >= delta
        self.heavy_min = math.ceil(c_delta * self.scale)  # d >= C_delta

        sleeping = out.sleeping & alive
        awake = alive & ~sleeping
        cls = np.full((g.n, T + 1), INACTIVE, dtype=np.int8)
        cls[sleeping] = SLEEPING
        cls[awake & (self.mass <= self.light_max)] = LIGHT
        cls[awake & (self.mass > self.light_max) & (self.mass < self.heavy_min)] = MODERATE
        cls[awake & (self.mass >= self.heavy_min)] = HEAVY
        cls[:, 0] = INACTIVE
        self.cls = cls

        hs = (cls == HEAVY) | (cls == SLEEPING)
        self.heavy_or_sleeping_mass = _mass_table(out, hs, self.exact_int64)

        e_now = out.exponent[:, : T + 1]
        e_next = out.exponent[:, 1: T + 2]
        self.halved = alive & (e_next > e_now)
        self.joined_now = np.zeros((g.n, T + 1), dtype=bool)
        jr = out.join_round
        has = jr > 0
        self.joined_now[np.flatnonzero(has), jr[has]] = True
        self.neighbor_joined = np.zeros((g.n, T + 1), dtype=bool)
        _neighbor_joined(g.indptr, g.indices, jr, T, self.neighbor_joined)

        self.good1 = ((cls == LIGHT) | (cls == MODERATE)) & (e_now == 1)
        big = alive & (self.mass >= self.delta_min)
        # 20 * hs_mass <= 19 * d, written to stay in integers
        self.good2 = big & (self.heavy_or_sleeping_mass * 20 <= self.mass * 19)
        self.mistaken = self._mistaken(out) & alive
        intact = alive & ~self.mistaken
        self.intact = intact
        self.wrong_down = intact & (cls == LIGHT) & self.halved
        wrong_up = np.zeros((g.n, T + 1), dtype=bool)
        grew = self.mass[:, 2:] * 10 > self.mass[:, 1:-1] * 7
        wrong_up[:, 1:T] = (intact & big & ~self.good2)[:, 1:T] & grew
        self.wrong_up = wrong_up

    def _mistaken(self, out: Outcome) -> np.ndarray:
        T = self.params.T
        m = np.zeros((out.n, T + 1), dtype=bool)
        for v, declared, target, r, last, extent in out.declarations.tolist():
            if declared == 0:
                if extent >= 1:
                    m[v, target: last + 1] = True
            elif self.mass[v, r] <= (1 << (4 * extent)) * self.scale:
                m[v, r + 1: last + 1] = True
        return m

    def class_name(self, v: int, t: int) -> str:
        return CLASS_NAMES[self.cls[v, t]]

    def flags(self, v: int, t: int) -> list[str]:
        arrs = (self.good1, self.good2, self.wrong_down, self.wrong_up, self.mistaken)
        return [name for name, a in zip(FLAG_NAMES, arrs) if a[v, t]]

    def flag_string(self, v: int, t: int) -> str:
        return "|".join(self.flags(v, t))

    def tallies(self) -> dict[str, int]:
        out = {name: int((self.cls[:, 1:] == code).sum()) for code, name in enumerate(CLASS_NAMES) if code}
        for name in FLAG_NAMES:
            out[name] = int(getattr(self, name)[:, 1:].sum())
        return out


def classify_rounds(outcome: Outcome) -> RoundClassRecord:
    return RoundClassRecord(outcome)


@dataclass(frozen=True)
class RateCheck:
    name: str
    successes: int
    trials: int
    bound: float
    upper: bool  # True: rate must be <= bound + 3 sigma

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def sigma(self) -> float:
        if not self.trials:
            return 0.0
        p = self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def passed(self) -> bool:
        if not self.trials:
            return True
        if self.upper:
            return self.rate <= self.bound + 3 * self.sigma
        return self.rate >= self.bound - 3 * self.sigma

    def to_dict(self) -> dict:
        return {"name": self.name, "successes": self.successes, "trials": self.trials, "rate": self.rate,
                "sigma": self.sigma, "bound": self.bound, "direction": "<=" if self.upper else ">=",
                "passed": self.passed}


class EventTally:
    """Accumulates event counts over many runs; order of ``add`` calls is irrelevant."""

    KEYS = ("mistaken", "wrong_down", "heavy_halving", "good1_join", "good2_neighbor_join", "wrong_up")

    def __init__(self, delta: float):
        self.delta = delta
        self.counts = {k: [0, 0] for k in self.KEYS}

    def _bump(self, key, hit, pool):
        self.counts[key][0] += int((hit & pool).sum())
        self.counts[key][1] += int(pool.sum())

    def add(self, rec: RoundClassRecord):
        live = rec.alive.copy()
        live[:, 0] = False
        intact = rec.intact & live
        self._bump("mistaken", rec.mistaken, live)
        self._bump("wrong_down", rec.halved, intact & (rec.cls == LIGHT))
        self._bump("heavy_halving", rec.halved, intact & (rec.cls == HEAVY))
        self._bump("good1_join", rec.joined_now, intact & rec.good1)
        self._bump("good2_neighbor_join", rec.neighbor_joined, intact & rec.good2)
        T = rec.params.T
        pool = intact & (rec.mass >= rec.delta_min) & ~rec.good2
        pool[:, T] = False
        self._bump("wrong_up", rec.wrong_up, pool)
        return self

    def checks(self) -> list[RateCheck]:
        d = self.delta
        c = self.counts
        return [
            RateCheck("mistaken", *c["mistaken"], d**5, True),
            RateCheck("wrong_down", *c["wrong_down"], 2 * d, True),
            RateCheck("heavy_halving", *c["heavy_halving"], 1 - d, False),
            RateCheck("good1_join", *c["good1_join"], d**2 / 3, False),
            RateCheck("good2_neighbor_join", *c["good2_neighbor_join"], d**3 / 50, False),
        ]

    def wrong_up_check(self) -> RateCheck:
        return RateCheck("wrong_up", *self.counts["wrong_up"], 10 * self.delta, True)
