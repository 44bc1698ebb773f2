"""Small value types shared by the simulators, the LCA and the harness."""

from __future__ import annotations

import enum
from dataclasses import dataclass


@dataclass(frozen=True)
class NodeRoundState:
    """What one vertex knows at the end of round ``t``.

    ``exponent`` is the exponent used for marking in round ``t`` and
    ``next_exponent`` the one carried into round ``t + 1``. For ``t = 0``
    both equal the starting exponent and all flags are false.
    """

    exponent: int
    next_exponent: int
    marked: bool
    sleeping: bool
    dead: bool
    joined: bool
    last_processed: int


class Status(enum.Enum):
    IN_MIS = "in_mis"
    DOMINATED = "dominated"
    RESIDUAL = "residual"


@dataclass(frozen=True)
class Phase1Status:
    kind: Status
    by: int | None = None  # the dominating neighbour for DOMINATED

    def __post_init__(self):
        if (self.kind is Status.DOMINATED) != (self.by is not None):
            raise ValueError("exactly the dominated status carries a dominator")

    @classmethod
    def in_mis(cls):
        return cls(Status.IN_MIS)

    @classmethod
    def dominated(cls, by: int):
        return cls(Status.DOMINATED, int(by))

    @classmethod
    def residual(cls):
        return cls(Status.RESIDUAL)

    def __str__(self):
        if self.kind is Status.DOMINATED:
            return f"dominated({self.by})"
        return self.kind.value


@dataclass(frozen=True)
class Verdict:
    passed: bool
    reason: str = ""

    def __bool__(self):
        return self.passed

    @property
    def label(self) -> str:
        return "Pass" if self.passed else "Fail"

    def to_dict(self) -> dict:
        return {"verdict": self.label, "reason": self.reason}


PASS = Verdict(True)


def fail(reason: str) -> Verdict:
    return Verdict(False, reason)
