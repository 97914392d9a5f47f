"""Dynamical side-checks: recurrence, distality, and word complexity.

These are cheap probes used to cross-examine the counting results: systems
with slow orbit growth should show short return times (every point comes
back near itself quickly), tower levels should keep their height gaps
forever (distality), and symbolic systems expose their complexity directly
through distinct-block counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .systems import SymbolicWord, SystemHandle

__all__ = [
    "return_time",
    "RecurrenceReport",
    "uniform_recurrence_check",
    "distality_gap",
    "word_complexity",
]


def return_time(system: SystemHandle, x: Any, eps: float, m_max: int) -> int | None:
    """Least n in [1, m_max] with f^n(x) strictly within eps of x, else None."""
    if m_max < 1:
        raise ValueError(f"step bound must be >= 1, got {m_max}")
    if not eps > 0.0:
        raise ValueError(f"scale must be positive, got {eps}")
    cur = x
    for n in range(1, m_max + 1):
        cur = system.step(cur)
        if system.metric(cur, x) < eps:
            return n
    return None


@dataclass(frozen=True, slots=True)
class RecurrenceReport:
    """Return times of a sample under one (eps, step-bound) probe.

    ``times`` pairs each sample point with its first return step, or None
    when no return happened within the bound; ``all_within`` summarizes.
    """

    eps: float
    m_bound: int
    times: tuple[tuple[Any, int | None], ...]
    all_within: bool


def uniform_recurrence_check(system: SystemHandle, sample, eps: float,
                             m: int) -> RecurrenceReport:
    """Probe every sample point for an eps-return within m steps.

    A miss is not a contradiction by itself, but a missing point feeds the
    separated-family construction: its backward orbit to depth m is an
    (m, eps)-separated family (see the constructions module), which is how
    slow recurrence certifies fast orbit growth.
    """
    times = tuple((x, return_time(system, x, eps, m)) for x in sample)
    return RecurrenceReport(
        eps=eps,
        m_bound=m,
        times=times,
        all_within=all(t is not None for _, t in times),
    )


def distality_gap(system: SystemHandle, x: Any, y: Any, window: int) -> float:
    """Min orbit distance over iterates |n| <= window; upper-bounds the
    infimum over all time, and is reported only as such.

    Needs the inverse map for the backward half. Coincident points are
    rejected: their gap is identically zero and says nothing about
    distality.
    """
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    gap = system.metric(x, y)
    if gap == 0.0:
        raise ValueError("points coincide; the distality gap is trivially 0")
    if window >= 1 and system.inverse is None:
        raise ValueError(f"system {system.name} has no inverse map")
    fx, fy = x, y
    bx, by = x, y
    for _ in range(window):
        fx, fy = system.step(fx), system.step(fy)
        bx, by = system.inverse(bx), system.inverse(by)
        gap = min(gap, system.metric(fx, fy), system.metric(bx, by))
    return gap


def word_complexity(word: SymbolicWord, n: int) -> int:
    """Number of distinct length-n blocks in the word's materialized range.

    Counts observed blocks only; a range of at least 10n is a sound default
    for the aperiodic words built here (their blocks recur with bounded
    gaps), and callers report the range alongside the count so any
    undercount is attributable.

    Distinctness is resolved by rank doubling: round t assigns every start
    an integer rank identifying its length-2^t block, and two overlapping
    ranks identify a block of any length in between. Each merge is one
    ``np.unique`` compression, so the cost is O(log n) sorts of the start
    positions rather than a hash of every block.
    """
    if n < 1:
        raise ValueError(f"block length must be >= 1, got {n}")
    m = word.end - word.start
    if m < n:
        raise ValueError(
            f"materialized range [{word.start}, {word.end}) shorter than block length {n}")
    rank = np.unique(np.asarray(word.symbols, dtype=np.int64),
                     return_inverse=True)[1]
    span = 1
    while span * 2 <= n:
        width = rank.size - span
        code = rank[:width] * np.int64(rank.size) + rank[span:]
        rank = np.unique(code, return_inverse=True)[1]
        span *= 2
    if span == n:
        return int(np.unique(rank).size)
    width = m - n + 1
    code = rank[:width] * np.int64(rank.size) + rank[n - span:n - span + width]
    return int(np.unique(code).size)
