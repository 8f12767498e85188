"""Largest subsets of a point cloud lying on one L-Lipschitz graph.

A set of points lies on the graph of a function with Lipschitz constant L
exactly when it is a chain in the cone order

    p <= q  iff  q.x >= p.x  and  |q.y - p.y| <= L * (q.x - p.x).

The shear (x, y) -> (L*x + y, L*x - y) turns this order into coordinatewise
dominance, so the longest chain is a longest non-decreasing subsequence and
patience sorting finds it in O(n log n). The quadratic DP and the exhaustive
search work directly on the cone order and serve as oracles for it.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .pointcloud import Point, PointCloud

BRUTEFORCE_MAX_N = 20


class CapacityError(ValueError):
    """Input too large for the exhaustive solver."""


@dataclass(frozen=True)
class LipClass:
    L: float

    def __post_init__(self):
        L = float(self.L)
        if not (math.isfinite(L) and L > 0):
            raise ValueError(f"Lipschitz constant must be positive and finite, got {self.L!r}")
        object.__setattr__(self, "L", L)


LipLike = Union[LipClass, float, int]


def as_lipclass(cls: LipLike) -> LipClass:
    return cls if isinstance(cls, LipClass) else LipClass(cls)


class TransformedPoint(NamedTuple):
    u: float
    v: float

    def inverse(self, cls: LipLike) -> Point:
        L = as_lipclass(cls).L
        return Point((self.u + self.v) / (2 * L), (self.u - self.v) / 2)


@dataclass(frozen=True)
class ChainResult:
    value: int
    witness: Optional[tuple[int, ...]] = None


@dataclass(frozen=True)
class WitnessReport:
    passed: bool
    chain_ok: bool
    max_slope: float
    n_points: int
    # breakpoints of the piecewise-linear certificate, sorted by x
    knots: tuple[Point, ...] = ()

    def summary(self) -> str:
        return (f"witness check: {'pass' if self.passed else 'FAIL'} "
                f"points={self.n_points} max_slope={self.max_slope!r}")


def cone_leq(p: Sequence[float], q: Sequence[float], cls: LipLike) -> bool:
    L = as_lipclass(cls).L
    return q[0] >= p[0] and abs(q[1] - p[1]) <= L * (q[0] - p[0])


def _shear(xy: np.ndarray, L: float) -> tuple[np.ndarray, np.ndarray]:
    lx = L * xy[:, 0]
    return lx + xy[:, 1], lx - xy[:, 1]


def shear_transform(cloud: PointCloud, cls: LipLike) -> list[TransformedPoint]:
    u, v = _shear(cloud.xy, as_lipclass(cls).L)
    return [TransformedPoint(a, b) for a, b in zip(u.tolist(), v.tolist())]


def _chain_order(xy: np.ndarray, indices) -> tuple[int, ...]:
    # order chain members along the graph: by x, then y (only duplicates tie on x)
    return tuple(sorted(indices, key=lambda i: (xy[i, 0], xy[i, 1], i)))


def longest_chain_bruteforce(cloud: PointCloud, cls: LipLike) -> ChainResult:
    """Exhaustive search over all 2^n subsets; for verification only."""
    L = as_lipclass(cls).L
    n = cloud.n
    if n > BRUTEFORCE_MAX_N:
        raise CapacityError(f"brute force is limited to n <= {BRUTEFORCE_MAX_N}, got n = {n}")
    if n == 0:
        return ChainResult(0, None)

    pts = cloud.xy.tolist()
    comparable = [0] * n
    for i in range(n):
        for j in range(n):
            if cone_leq(pts[i], pts[j], L) or cone_leq(pts[j], pts[i], L):
                comparable[i] |= 1 << j

    # is_chain[mask]: every pair in mask is comparable. Built from mask minus its lowest bit.
    size = 1 << n
    is_chain = bytearray(size)
    is_chain[0] = 1
    best_mask, best_count = 0, 0
    for mask in range(1, size):
        low = mask & -mask
        rest = mask ^ low
        if is_chain[rest] and mask & ~comparable[low.bit_length() - 1] == 0:
            is_chain[mask] = 1
            count = mask.bit_count()
            if count > best_count:
                best_mask, best_count = mask, count

    members = [i for i in range(n) if best_mask >> i & 1]
    return ChainResult(best_count, _chain_order(cloud.xy, members))


def longest_chain_dp(cloud: PointCloud, cls: LipLike) -> ChainResult:
    """O(n^2) longest path over the cone order, vectorised per row."""
    L = as_lipclass(cls).L
    n = cloud.n
    if n == 0:
        return ChainResult(0, None)

    order = np.lexsort((cloud.y, cloud.x))
    xs = cloud.x[order]
    ys = cloud.y[order]
    length = np.ones(n, dtype=np.int64)
    pred = np.full(n, -1, dtype=np.int64)
    for i in range(1, n):
        px, py = xs[:i], ys[:i]
        ok = (xs[i] >= px) & (np.abs(ys[i] - py) <= L * (xs[i] - px))
        if ok.any():
            cand = np.where(ok, length[:i], 0)
            j = int(cand.argmax())
            length[i] = cand[j] + 1
            pred[i] = j

    end = int(length.argmax())
    chain = []
    while end >= 0:
        chain.append(int(order[end]))
        end = int(pred[end])
    chain.reverse()
    return ChainResult(int(length.max()), tuple(chain))


def _patience_lengths(values: list) -> tuple[int, list[int]]:
    """Longest non-decreasing subsequence: total length and, per element, the
    length of the longest one ending there."""
    tops: list = []
    ending = [0] * len(values)
    for k, val in enumerate(values):
        pile = bisect_right(tops, val)
        if pile == len(tops):
            tops.append(val)
        else:
            tops[pile] = val
        ending[k] = pile + 1
    return len(tops), ending


def longest_chain_fast(cloud: PointCloud, cls: LipLike, witness: bool = True) -> ChainResult:
    """O(n log n) solver: shear, sort by (u, v), patience-sort the v sequence.

    The witness is the lexicographically first optimal chain with respect to
    the (u, v)-sorted order. Pass ``witness=False`` to skip the extra pass.
    """
    L = as_lipclass(cls).L
    n = cloud.n
    if n == 0:
        return ChainResult(0, None)

    u, v = _shear(cloud.xy, L)
    order = np.lexsort((v, u))
    vs = v[order].tolist()

    if not witness:
        tops: list = []
        for val in vs:
            pile = bisect_right(tops, val)
            if pile == len(tops):
                tops.append(val)
            else:
                tops[pile] = val
        return ChainResult(len(tops), None)

    # from_here[k]: longest non-decreasing run of vs starting at k
    # (= longest non-decreasing run of the negated, reversed sequence ending there)
    best, rev = _patience_lengths([-val for val in reversed(vs)])
    from_here = rev[::-1]

    chain = []
    need, last = best, -math.inf
    for k in range(n):
        if from_here[k] == need and vs[k] >= last:
            chain.append(int(order[k]))
            last = vs[k]
            need -= 1
            if need == 0:
                break
    return ChainResult(best, tuple(chain))


SOLVERS = {
    "fast": longest_chain_fast,
    "dp": longest_chain_dp,
    "brute": longest_chain_bruteforce,
}


def validate_witness(cloud: PointCloud, cls: LipLike, witness: Sequence[int]) -> WitnessReport:
    """Certify a claimed chain by building an explicit L-Lipschitz function through it.

    The function interpolates the witness points linearly in x and is constant
    beyond them, so its Lipschitz constant is the largest segment slope.
    Slopes may exceed L by at most 4 ulp of L to absorb rounding in the
    division; the cone-order check between consecutive points is exact.
    """
    L = as_lipclass(cls).L
    idx = [int(i) for i in witness]
    for i in idx:
        if not 0 <= i < cloud.n:
            raise ValueError(f"witness index {i} out of range for cloud of {cloud.n} points")
    if len(set(idx)) != len(idx):
        raise ValueError("witness contains repeated indices")

    pts = [cloud[i] for i in idx]
    chain_ok = all(cone_leq(p, q, L) for p, q in zip(pts, pts[1:]))

    knots = sorted(set(pts))
    max_slope = 0.0
    for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
        slope = math.inf if x1 == x0 else abs(y1 - y0) / (x1 - x0)
        max_slope = max(max_slope, slope)
    slopes_ok = max_slope <= L + 4 * math.ulp(L)

    return WitnessReport(
        passed=chain_ok and slopes_ok,
        chain_ok=chain_ok,
        max_slope=max_slope,
        n_points=len(idx),
        knots=tuple(knots),
    )


def lipschitz_interpolant(knots: Sequence[Point]):
    """Piecewise-linear function through ``knots`` (sorted by x, distinct x),
    constant outside their range."""
    kx = np.array([p[0] for p in knots], dtype=np.float64)
    ky = np.array([p[1] for p in knots], dtype=np.float64)
    if kx.size == 0:
        raise ValueError("need at least one knot")
    return lambda x: np.interp(x, kx, ky)
