"""Bowen orbit distances and finite (n, eps) counting.

The orbit distance over a window of length n is the max of the plain metric
along the first n iterates (steps 0 through n-1). On top of it sit:

* greedy separated-set extraction (a maximal family with pairwise orbit
  distance >= eps, hence a lower bound on the separation number);
* greedy covering (an upper bound on the spanning number of the sample);
* verifiers for externally constructed witness sets, which also report
  whether the strict form of each inequality held;
* an exact maximum-separated-set search for tiny samples, used to audit the
  greedy lower-bound quality in tests.

All bulk routines are chunked so no full pairwise matrix is materialized,
and they dispatch to a system's vectorized kernel when one is declared and
the scale sits inside the kernel's exact range (``exact_cap``). Outside
that range they fall back to pointwise evaluation, which is always exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .systems import SystemHandle

__all__ = [
    "bowen_dist",
    "pair_bowen",
    "bowen_block",
    "CountRecord",
    "BOUND_SEPARATED_LOWER",
    "BOUND_SPANNING_UPPER",
    "BOUND_EXACT",
    "greedy_separated",
    "greedy_spanning",
    "SeparationCheck",
    "SpanningCheck",
    "verify_separated",
    "verify_spanning",
    "max_separated_exact",
]

DEFAULT_CHUNK = 2048

BOUND_SEPARATED_LOWER = "separated-lower-bound"
BOUND_SPANNING_UPPER = "spanning-upper-bound"
BOUND_EXACT = "exact"


def bowen_dist(system: SystemHandle, x: Any, y: Any, n: int,
               stop_at: float | None = None) -> float:
    """Reference orbit distance: max metric over iterates 0..n-1.

    Steps both points explicitly, ignoring any fast kernel; this is the
    ground truth the kernels are tested against. With ``stop_at`` the loop
    exits once the running max reaches it, returning that partial max (a
    lower bound on the full value, sufficient for threshold decisions).
    """
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    best = 0.0
    cx, cy = x, y
    for k in range(n):
        if k:
            cx = system.step(cx)
            cy = system.step(cy)
        d = system.metric(cx, cy)
        if d > best:
            best = d
            if stop_at is not None and best >= stop_at:
                break
    return best


def pair_bowen(system: SystemHandle, x: Any, y: Any, n: int,
               stop_at: float | None = None) -> float:
    """Orbit distance via the cheapest exact route available."""
    if system.orbit_dist is not None:
        return system.orbit_dist(x, y, n)
    return bowen_dist(system, x, y, n, stop_at=stop_at)


def _kernel_ok(system: SystemHandle, eps: float) -> bool:
    return system.orbit_cdist is not None and eps <= system.exact_cap


def bowen_block(system: SystemHandle, pa: Sequence, pb: Sequence, n: int,
                stop_at: float | None = None,
                use_kernel: bool = True) -> np.ndarray:
    """Pairwise orbit distances between two point lists.

    Kernel path when allowed, else pointwise. ``stop_at`` is a shortcut
    threshold for both paths: entries reported below it are exact, entries
    at or above it may be partial maxima or kernel lower bounds, so pass it
    only when the caller merely compares against that same threshold.
    """
    if use_kernel and system.orbit_cdist is not None:
        return np.asarray(system.orbit_cdist(pa, pb, n, stop_at),
                          dtype=np.float64)
    out = np.empty((len(pa), len(pb)), dtype=np.float64)
    for i, p in enumerate(pa):
        for j, q in enumerate(pb):
            out[i, j] = pair_bowen(system, p, q, n, stop_at=stop_at)
    return out


@dataclass(frozen=True, slots=True)
class CountRecord:
    """One measurement: window length, scale, count, and what the count means.

    ``bound`` is one of the module constants: a separated family certifies a
    lower bound on the separation number, a covering family an upper bound on
    the spanning number of its sample, and closed-form or exhaustive counts
    are exact.
    """

    n: int
    eps: float
    count: int
    method: str
    bound: str

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"window must be >= 1, got {self.n}")
        if not self.eps > 0.0:
            raise ValueError(f"scale must be positive, got {self.eps}")
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")


# ---------------------------------------------------------------------------
# greedy families

def greedy_separated(system: SystemHandle, sample: Sequence, n: int, eps: float,
                     chunk: int = DEFAULT_CHUNK) -> list:
    """A maximal eps-separated subfamily, greedily in sample order.

    A point is kept iff its orbit distance to every earlier kept point is
    >= eps; every rejected point therefore sits within eps of some kept one,
    so the result both certifies a separation lower bound and covers the
    sample. The chunked evaluation reproduces the sequential rule exactly.
    """
    if eps <= 0.0:
        raise ValueError(f"scale must be positive, got {eps}")
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    kernel = _kernel_ok(system, eps)
    kept: list = []
    for lo in range(0, len(sample), chunk):
        block = list(sample[lo:lo + chunk])
        alive = np.ones(len(block), dtype=bool)
        if kept:
            mins = np.full(len(block), np.inf)
            for clo in range(0, len(kept), chunk):
                d = bowen_block(system, block, kept[clo:clo + chunk], n,
                                stop_at=eps, use_kernel=kernel)
                np.minimum(mins, d.min(axis=1), out=mins)
            alive &= mins >= eps
        for i in range(len(block)):
            if not alive[i]:
                continue
            kept.append(block[i])
            rest = alive[i + 1:]
            if rest.any():
                row = bowen_block(system, [block[i]], block[i + 1:], n,
                                  stop_at=eps, use_kernel=kernel)[0]
                rest &= row >= eps
    return kept


def greedy_spanning(system: SystemHandle, sample: Sequence, n: int, eps: float,
                    chunk: int = DEFAULT_CHUNK) -> list:
    """A covering subfamily of the sample, largest-gain-first.

    Each round picks the sample point whose closed orbit eps-ball covers the
    most still-uncovered sample points (first index winning ties) until all
    are covered. The result size is an upper bound on the minimal cover of
    the sample at this scale.
    """
    if eps <= 0.0:
        raise ValueError(f"scale must be positive, got {eps}")
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    kernel = system.orbit_cdist is not None and eps < system.exact_cap
    # coverage tests only compare against eps; values equal to eps count as
    # covered, so the cap sits one ulp above to keep those entries exact
    cap = float(np.nextafter(eps, np.inf))
    m = len(sample)
    uncovered = np.ones(m, dtype=bool)
    chosen: list = []
    while uncovered.any():
        unc_idx = np.nonzero(uncovered)[0]
        unc_pts = [sample[i] for i in unc_idx]
        best_i = -1
        best_gain = 0
        for lo in range(0, m, chunk):
            cand = list(sample[lo:lo + chunk])
            gains = np.zeros(len(cand), dtype=np.int64)
            for clo in range(0, len(unc_pts), chunk):
                d = bowen_block(system, cand, unc_pts[clo:clo + chunk], n,
                                stop_at=cap, use_kernel=kernel)
                gains += (d <= eps).sum(axis=1)
            gi = int(np.argmax(gains))
            if int(gains[gi]) > best_gain:
                best_gain = int(gains[gi])
                best_i = lo + gi
        if best_i < 0:
            # an uncovered point failed to cover itself: metric is broken
            raise RuntimeError("covering made no progress; metric violates d(x,x)=0")
        chosen.append(sample[best_i])
        for clo in range(0, len(unc_pts), chunk):
            d = bowen_block(system, [sample[best_i]], unc_pts[clo:clo + chunk], n,
                            stop_at=cap, use_kernel=kernel)[0]
            uncovered[unc_idx[clo:clo + chunk][d <= eps]] = False
    return chosen


# ---------------------------------------------------------------------------
# witness verification

@dataclass(frozen=True, slots=True)
class SeparationCheck:
    """Outcome of an all-pairs separation audit.

    ``ok`` certifies the non-strict inequality (every pair >= eps);
    ``all_strict`` additionally reports whether every pair exceeded eps,
    since the analytic constructions promise the strict form.
    """

    ok: bool
    all_strict: bool
    n: int
    eps: float
    pairs: int
    min_value: float
    min_pair: tuple[int, int] | None

    def __str__(self) -> str:
        if self.ok:
            verdict = "ok (strict)" if self.all_strict else "ok (tight pair)"
        else:
            verdict = f"violated at pair {self.min_pair}"
        return (f"separation >= {self.eps!r} over {self.pairs} pairs: "
                f"{verdict}, min {self.min_value!r}")


@dataclass(frozen=True, slots=True)
class SpanningCheck:
    """Outcome of a covering audit of sample points by a center family.

    ``ok`` means every sample point is within eps of some center (closed
    balls); ``all_strict`` reports whether a strictly closer center existed
    for every point.
    """

    ok: bool
    all_strict: bool
    n: int
    eps: float
    sample_size: int
    centers: int
    uncovered_count: int
    first_uncovered: int | None

    def __str__(self) -> str:
        if self.ok:
            verdict = "ok (strict)" if self.all_strict else "ok (boundary hit)"
        else:
            verdict = (f"{self.uncovered_count} uncovered, first at sample "
                       f"index {self.first_uncovered}")
        return (f"covering <= {self.eps!r} of {self.sample_size} points by "
                f"{self.centers} centers: {verdict}")


def verify_separated(system: SystemHandle, points: Sequence, n: int, eps: float,
                     chunk: int = DEFAULT_CHUNK) -> SeparationCheck:
    """Audit that every pair of ``points`` has orbit distance >= eps.

    Exact distances throughout (no early exit); reports the worst pair and
    whether strict separation held everywhere.
    """
    if eps <= 0.0:
        raise ValueError(f"scale must be positive, got {eps}")
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    kernel = _kernel_ok(system, eps)
    pts = list(points)
    m = len(pts)
    min_value = np.inf
    min_pair: tuple[int, int] | None = None
    for lo in range(0, m, chunk):
        rows = pts[lo:lo + chunk]
        for clo in range(lo, m, chunk):
            d = bowen_block(system, rows, pts[clo:clo + chunk], n,
                            use_kernel=kernel)
            # keep strictly-upper-triangular entries of the global matrix
            gi = lo + np.arange(d.shape[0])[:, None]
            gj = clo + np.arange(d.shape[1])[None, :]
            d = np.where(gi < gj, d, np.inf)
            flat = int(np.argmin(d))
            i, j = divmod(flat, d.shape[1])
            if d[i, j] < min_value:
                min_value = float(d[i, j])
                min_pair = (lo + i, clo + j)
    if min_pair is None:
        return SeparationCheck(True, True, n, eps, 0, np.inf, None)
    return SeparationCheck(
        ok=min_value >= eps,
        all_strict=min_value > eps,
        n=n,
        eps=eps,
        pairs=m * (m - 1) // 2,
        min_value=min_value,
        min_pair=min_pair,
    )


def verify_spanning(system: SystemHandle, centers: Sequence, sample: Sequence,
                    n: int, eps: float,
                    chunk: int = DEFAULT_CHUNK) -> SpanningCheck:
    """Audit that every sample point is within eps of some center.

    A sample point leaves the scan as soon as a strictly closer center is
    found, so cost stays near one center pass when the cover is comfortable;
    points covered only at exactly eps are flagged via ``all_strict``.
    """
    if eps <= 0.0:
        raise ValueError(f"scale must be positive, got {eps}")
    if n < 1:
        raise ValueError(f"window must be >= 1, got {n}")
    kernel = system.orbit_cdist is not None and eps < system.exact_cap
    # distances beyond eps never matter here, but the settled-vs-boundary
    # split needs values equal to eps reported exactly, hence the open cap
    cap = float(np.nextafter(eps, np.inf))
    ctr = list(centers)
    m = len(sample)
    uncovered_count = 0
    boundary_count = 0
    first_uncovered: int | None = None
    for lo in range(0, m, chunk):
        block = list(sample[lo:lo + chunk])
        open_idx = np.arange(len(block))
        open_min = np.full(len(block), np.inf)
        for clo in range(0, len(ctr), chunk):
            if open_idx.size == 0:
                break
            d = bowen_block(system, [block[i] for i in open_idx],
                            ctr[clo:clo + chunk], n, stop_at=cap,
                            use_kernel=kernel)
            np.minimum(open_min, d.min(axis=1), out=open_min)
            settled = open_min < eps
            open_idx = open_idx[~settled]
            open_min = open_min[~settled]
        if open_idx.size:
            weak = open_min <= eps
            boundary_count += int(weak.sum())
            misses = open_idx[~weak]
            if misses.size:
                uncovered_count += int(misses.size)
                if first_uncovered is None:
                    first_uncovered = lo + int(misses[0])
    return SpanningCheck(
        ok=uncovered_count == 0,
        all_strict=uncovered_count == 0 and boundary_count == 0,
        n=n,
        eps=eps,
        sample_size=m,
        centers=len(ctr),
        uncovered_count=uncovered_count,
        first_uncovered=first_uncovered,
    )


def max_separated_exact(system: SystemHandle, points: Sequence, n: int,
                        eps: float, limit: int = 20) -> int:
    """Exact maximum size of an eps-separated subfamily (tiny inputs only).

    Branch and bound over the separation graph; cost is exponential, hence
    the hard ``limit``. Serves as the quality oracle for the greedy bound.
    """
    m = len(points)
    if m > limit:
        raise ValueError(f"exact search limited to {limit} points, got {m}")
    if m == 0:
        return 0
    d = bowen_block(system, list(points), list(points), n,
                    use_kernel=_kernel_ok(system, eps))
    adj = d >= eps
    np.fill_diagonal(adj, False)

    best = 0

    def grow(chosen: int, candidates: list[int]) -> None:
        nonlocal best
        if chosen + len(candidates) <= best:
            return
        if not candidates:
            best = max(best, chosen)
            return
        head, *rest = candidates
        grow(chosen + 1, [j for j in rest if adj[head, j]])
        grow(chosen, rest)

    grow(0, list(range(m)))
    return best
