"""Winding numbers of discretized loops and winding spectra of soups."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .errors import DomainError, PointOnPathError
from .geometry import as_point
from .sampler import (EXCURSION_FACTOR, MAX_DEPTH, REACH_TOL, TARGET_RESOLUTION, Loop,
                      LoopSoup)

#: point-on-path threshold, relative to the domain radius
EPS_ON_PATH = 1e-9
RESIDUE_BOUND = 0.01
#: candidates with |root - x| >= SCREEN_SIGMA * sqrt(T) are skipped; a bridge of
#: duration T leaves the disc of radius a*sqrt(T) around its root with
#: probability <= 4 exp(-a^2), i.e. < 1e-15 at a = 6
SCREEN_SIGMA = 6.0


class WindingResult(NamedTuple):
    winding: int
    residue: float
    min_distance: float
    ill_conditioned: int


def winding_details(loop: Loop, x, *, refine: bool = True, eps: float = EPS_ON_PATH,
                    target_resolution: float = TARGET_RESOLUTION, max_depth: int = MAX_DEPTH,
                    factor: float = EXCURSION_FACTOR) -> WindingResult:
    """Signed turning angle around ``x`` divided by 2π, with diagnostics.

    Plain polygons are used as given. Loops with a refinement key are Brownian:
    segments near ``x`` are bisected (as in ``sampler.refine_near``) and each
    terminal segment still near ``x`` contributes its sampled winding sheet,
    so the result is the winding of the Brownian loop itself.
    """
    x = as_point(x)
    if refine and loop.key is not None:
        ang, n_ill, mind, _ = K.refined_angle(loop.vertices, loop.brownian_clock, loop.nodes,
                                              np.uint64(loop.key), x, float(target_resolution),
                                              float(eps), int(max_depth), float(factor))
    else:
        ang, mind = K.polygon_angle(loop.vertices, x)
        n_ill = int(mind <= eps)
    turns = ang / (2 * math.pi)
    n = int(round(turns))
    return WindingResult(n, turns - n, float(mind), int(n_ill))


def winding_number(loop: Loop, x, **kw) -> int:
    """Number of counterclockwise turns of the loop around ``x``.

    Raises PointOnPathError when ``x`` is within ``eps`` of the (refined) path.
    """
    res = winding_details(loop, x, **kw)
    if res.ill_conditioned:
        raise PointOnPathError(f"point {x} lies on the path (distance {res.min_distance:.3g})")
    if abs(res.residue) >= RESIDUE_BOUND:
        raise PointOnPathError(f"winding residue {res.residue:.3g} exceeds {RESIDUE_BOUND}")
    return res.winding


@dataclass
class WindingSpectrum:
    point: complex
    exclusion_scale: float
    counts: dict = field(default_factory=dict)
    excluded_ill_conditioned: int = 0

    def __post_init__(self):
        self.counts = {int(k): int(v) for k, v in self.counts.items() if k != 0 and v > 0}

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class WindingRecords:
    """Loops of a soup with nonzero winding around query points.

    One row per (point, loop) pair with nonzero winding among accepted loops:
    the winding number and the loop's resolved reach max |j_x| along the path.
    The loop is excluded from B(x, δ) (and counts in W_x) iff reach >= δ(1 - margin).
    """

    points: np.ndarray
    point_index: np.ndarray
    loop_index: np.ndarray
    winding: np.ndarray
    reach: np.ndarray
    ill_conditioned: np.ndarray
    pairs_examined: int

    def for_point(self, p: int):
        sel = self.point_index == p
        return self.winding[sel], self.reach[sel]

    def spectrum(self, p: int, delta: float, margin: float = 0.0) -> WindingSpectrum:
        w, r = self.for_point(p)
        counts = Counter(w[r >= delta * (1.0 - margin)].tolist())
        return WindingSpectrum(complex(self.points[p]), delta, counts, int(self.ill_conditioned[p]))

    def winding_sums(self, deltas, margin: float = 0.0) -> np.ndarray:
        """Σ n_x(l) over excluded loops, shape (n_points, n_deltas)."""
        deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
        out = np.zeros((len(self.points), len(deltas)))
        for j, d in enumerate(deltas):
            sel = self.reach >= d * (1.0 - margin)
            out[:, j] = np.bincount(self.point_index[sel], weights=self.winding[sel],
                                    minlength=len(self.points))
        return out


def _pairs_in_bbox(offsets, verts, times, pair_loop, pair_point, points, factor):
    boxes = K.padded_bboxes(offsets, verts, times, float(factor))
    b = boxes[pair_loop]
    z = points[pair_point]
    return (b[:, 0] <= z.real) & (z.real <= b[:, 1]) & (b[:, 2] <= z.imag) & (z.imag <= b[:, 3])


def winding_records(soup: LoopSoup, points, *, prefilter: bool = True,
                    screen_sigma: float | None = SCREEN_SIGMA, eps: float | None = None,
                    target_resolution: float = TARGET_RESOLUTION, max_depth: int = MAX_DEPTH,
                    factor: float = EXCURSION_FACTOR, reach_cuts=None) -> WindingRecords:
    """Winding numbers and reaches of soup loops around a set of points.

    Pipeline: duration screen (optional) -> padded bounding-box prefilter
    (exact) -> refined winding -> domain acceptance and resolved reach for
    loops with nonzero winding. Ill-conditioned pairs are dropped and tallied
    per point. With ``reach_cuts`` given, reaches are resolved only up to the
    bracket between consecutive cuts, which is all that containment tests
    against those exact thresholds need; otherwise to REACH_TOL.
    """
    R = soup.config.domain.radius
    pts = np.atleast_1d(np.asarray(points, dtype=np.complex128))
    if np.any(np.abs(pts) >= R):
        raise DomainError("query points must lie inside the domain")
    if eps is None:
        eps = EPS_ON_PATH * R
    n_loops = len(soup.roots)
    if screen_sigma is None:
        pair_loop = np.repeat(np.arange(n_loops), len(pts))
        pair_point = np.tile(np.arange(len(pts)), n_loops)
    else:
        pair_loop, pair_point = K.screen_pairs(soup.roots, soup.durations, pts, float(screen_sigma))
    ill = np.zeros(len(pts), dtype=np.int64)
    empty = np.zeros(0, dtype=np.int64)
    if len(pair_loop) == 0:
        return WindingRecords(pts, empty, empty, empty, np.zeros(0), ill, 0)

    used, local = np.unique(pair_loop, return_inverse=True)
    offsets, verts, times, nodes, keys = soup.path_arrays(used)
    if prefilter:
        keep = _pairs_in_bbox(offsets, verts, times, local, pair_point, pts, factor)
        local, pair_point = local[keep], pair_point[keep]
    examined = len(local)
    ang, n_ill = K.pair_angles(offsets, verts, times, nodes, keys, local, pair_point, pts,
                               float(target_resolution), float(eps), int(max_depth), float(factor))
    wind = np.rint(ang / (2 * math.pi)).astype(np.int64)
    bad = n_ill > 0
    np.add.at(ill, pair_point[bad], 1)
    sel = (wind != 0) & ~bad
    local, pair_point, wind = local[sel], pair_point[sel], wind[sel]
    if len(local):
        ok = soup.inside(used[local])
        local, pair_point, wind = local[ok], pair_point[ok], wind[ok]
    cuts = np.zeros(0) if reach_cuts is None else np.unique(np.asarray(reach_cuts, dtype=float))
    reach = K.pair_reach(offsets, verts, times, nodes, keys, local, pair_point, pts, float(R),
                         REACH_TOL, cuts, int(max_depth), float(factor))
    return WindingRecords(pts, pair_point, used[local], wind, reach, ill, examined)


def spatial_prefilter(soup: LoopSoup, x) -> list[int]:
    """Indices into ``soup.loops`` whose padded bounding box contains ``x``.

    The padding is EXCURSION_FACTOR * sqrt(max coarse dt): refinement and sheet
    sampling never touch a segment farther than that from x, so every
    filtered-out loop has winding exactly 0 under ``winding_number``.
    """
    x = as_point(x)
    acc = soup.accepted_indices
    if len(acc) == 0:
        return []
    offsets, verts, times, _, _ = soup.path_arrays(acc)
    boxes = K.padded_bboxes(offsets, verts, times, float(EXCURSION_FACTOR))
    hit = (boxes[:, 0] <= x.real) & (x.real <= boxes[:, 1]) & (boxes[:, 2] <= x.imag) & (x.imag <= boxes[:, 3])
    return np.flatnonzero(hit).tolist()


def winding_spectrum(soup: LoopSoup, x, delta: float, margin: float = 0.0, **kw) -> WindingSpectrum:
    """Counts of nonzero winding numbers around ``x`` among loops not contained in B(x, δ).

    Containment is decided on the resolved path maximum of |j_x| against
    δ(1 - margin).
    """
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    x = as_point(x)
    kw.setdefault("reach_cuts", [delta * (1.0 - margin)])
    rec = winding_records(soup, [x], **kw)
    return rec.spectrum(0, delta, margin)
