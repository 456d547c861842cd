"""Per-iteration run records shared by all methods."""
from dataclasses import dataclass, field, fields
from enum import Enum

import numpy as np


class Status(str, Enum):
    GRAD_TOL = "GradTol"
    BUDGET = "Budget"
    STOP_HOOK = "StopHook"
    UNBOUNDED = "UnboundedOptimal"
    FAILED = "Failed"

    def __str__(self):
        return self.value


@dataclass
class TraceRecord:
    iter: int
    kind: str  # "serious", "null" or "final"; baselines use "serious"
    L: float
    tau: float
    Delta: float
    f: float
    gnorm: float
    oracle_calls: int
    wall_time: float
    epoch: int = 0


@dataclass
class RunTrace:
    records: list = field(default_factory=list)
    status: Status = None

    def append(self, rec):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def extend(self, other):
        self.records.extend(other.records)

    def as_dict(self):
        names = [f.name for f in fields(TraceRecord)]
        return {n: self.column(n) for n in names}


def certificate_bound(rec):
    """``L / tau`` for records carrying a certificate, ``inf`` for null steps."""
    if rec.kind == "null" or rec.tau <= 0:
        return np.inf
    return rec.L / rec.tau
