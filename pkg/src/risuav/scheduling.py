"""TDMA user scheduling: offline sample-average assignment and online per-slot pick.

The offline problem is a per-slot decoupled LP whose relaxation has an
integral optimum, so the exact solution is a per-slot argmax over the
nonnegative rate table (ties broken by lowest user index).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig


@dataclass
class ScheduleMatrix:
    """Binary assignment a[k, n] with at most one served user per slot."""

    a: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.int8)
        if self.a.ndim != 2:
            raise ConfigError("schedule matrix must be K x N")
        if not np.isin(self.a, (0, 1)).all():
            raise ConfigError("schedule entries must be binary")
        if (self.a.sum(axis=0) > 1).any():
            raise ConfigError("schedule serves more than one user in a slot")

    @property
    def K(self) -> int:
        return self.a.shape[0]

    @property
    def N(self) -> int:
        return self.a.shape[1]

    def user_for_slot(self, n: int):
        col = self.a[:, n]
        hits = np.flatnonzero(col)
        return int(hits[0]) if hits.size else None

    def users(self) -> list:
        return [self.user_for_slot(n) for n in range(self.N)]


def offline_schedule(rate_table: np.ndarray, allow_idle: bool = False) -> ScheduleMatrix:
    """Maximize sum_{k,n} a_k[n] * rate[k][n] under the TDMA constraints.

    Per-slot argmax attains the LP-relaxation optimum exactly.  With
    allow_idle, slots whose best rate is 0 stay unassigned.
    """
    table = np.asarray(rate_table, dtype=float)
    if table.ndim != 2:
        raise ConfigError("rate_table must be K x N")
    if (table < 0).any():
        raise ConfigError("rate_table entries must be >= 0")
    K, N = table.shape
    a = np.zeros((K, N), dtype=np.int8)
    best = table.argmax(axis=0)  # ties resolve to the lowest index
    for n in range(N):
        if allow_idle and table[best[n], n] <= 0.0:
            continue
        a[best[n], n] = 1
    return ScheduleMatrix(a=a)


def online_schedule(effective_channels, scenario: ScenarioConfig):
    """Pick the user maximizing log2(1 + P/sigma^2 ||h_k||^2), i.e. the
    largest effective-channel norm.  Returns (user index, degenerate flag);
    all-zero channels fall back to user 0 with the flag set."""
    h = np.asarray(effective_channels)
    norms = np.linalg.norm(h, axis=1)
    if norms.max() == 0.0:
        return 0, True
    return int(norms.argmax()), False
