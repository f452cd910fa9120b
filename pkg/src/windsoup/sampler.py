"""Brownian bridges and Poisson loop soups on disc domains.

Conventions: planar Brownian motion with transition density
p_t(x, y) = exp(-|x - y|^2 / 2t) / (2 pi t). The loop measure
mu = ∫∫ (1/t) p_t(x, x) P^{bridge}_{x,t} dt dA(x) then has root-duration
intensity dA(x) dt / (2 pi t^2), which is what ``sample_soup`` realizes on
D x [t_min, t_max] before rejecting loops that leave the domain.

Loops carry a 64-bit key. Their coarse vertices and every later bisection
midpoint are deterministic functions of that key and of dyadic node indices
(see ``_kernels``), so soups can be stored as (root, duration, key) triples and
paths built on demand. Coarse step counts are powers of two, which makes the
path at 2n steps a refinement of the path at n steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .errors import DomainError, PointOnPathError
from .geometry import UNIT_DISC, DiscDomain, as_point

#: bisect a segment while the query point is closer than this many sqrt(dt)
EXCURSION_FACTOR = 4.0
TARGET_RESOLUTION = 1e-6
MAX_DEPTH = K.MAX_DEPTH
#: absolute tolerance on resolved maxima of |j_x|
REACH_TOL = 1e-7
MIN_STEPS = 16
MAX_STEPS = 1 << K.MAX_LEVEL
DEFAULT_STEPS_PER_UNIT_TIME = 2048
DEFAULT_T_MAX = 20.0

SPLIT_FUNCTION = "numpy.random.PCG64(numpy.random.SeedSequence(entropy=seed, spawn_key=(replica_id,)))"


def replica_rng(seed: int, replica_id: int) -> np.random.Generator:
    """Private stream for one replica; independent of how replicas are scheduled."""
    if replica_id < 0:
        raise DomainError("replica_id must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=(int(replica_id),))
    return np.random.Generator(np.random.PCG64(ss))


def _draw_keys(rng: np.random.Generator, size=None):
    return rng.integers(0, np.iinfo(np.uint64).max, size=size, dtype=np.uint64, endpoint=True)


def _default_nodes(n_vertices: int) -> np.ndarray:
    """Node ids n2 + j for the segments of a coarse path (n2 = next power of two)."""
    n = n_vertices - 1
    n2 = 1 << max(0, (n - 1).bit_length())
    nodes = np.zeros(n_vertices, dtype=np.uint64)
    nodes[:-1] = n2 + np.arange(n, dtype=np.uint64)
    return nodes


@dataclass(eq=False)
class Loop:
    """A rooted discretized loop; ``vertices[0] == vertices[-1] == root``.

    Keyed loops are Brownian: ``nodes[j]`` names the dyadic interval behind
    segment j and ``clock`` holds the Brownian times of the vertices, which
    drive refinement. ``clock`` defaults to ``times`` and survives
    reparametrization, so a time change never alters the refined path.
    """

    root: complex
    duration: float
    vertices: np.ndarray
    times: np.ndarray
    key: int | None = None
    nodes: np.ndarray | None = None
    clock: np.ndarray | None = None

    def __post_init__(self):
        self.root = as_point(self.root)
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.complex128)
        self.times = np.ascontiguousarray(self.times, dtype=np.float64)
        if self.vertices.shape != self.times.shape or self.vertices.ndim != 1:
            raise DomainError("vertices and times must be matching 1-d arrays")
        if len(self.vertices) < 2:
            raise DomainError("a loop needs at least two vertices")
        if self.vertices[0] != self.root or self.vertices[-1] != self.root:
            raise DomainError("loop must start and end at its root")
        if self.times[0] != 0.0 or self.times[-1] != self.duration or np.any(np.diff(self.times) <= 0):
            raise DomainError("times must increase strictly from 0 to duration")
        if self.key is not None:
            self.key = int(self.key)
            if self.nodes is None:
                self.nodes = _default_nodes(len(self.vertices))
            self.nodes = np.ascontiguousarray(self.nodes, dtype=np.uint64)
            if self.nodes.shape != self.vertices.shape:
                raise DomainError("nodes must match vertices")
        if self.clock is not None:
            self.clock = np.ascontiguousarray(self.clock, dtype=np.float64)
            if self.clock.shape != self.times.shape or np.any(np.diff(self.clock) <= 0):
                raise DomainError("clock must increase strictly along the vertices")

    def __len__(self):
        return len(self.vertices)

    @property
    def brownian_clock(self) -> np.ndarray:
        return self.times if self.clock is None else self.clock

    @classmethod
    def from_polygon(cls, vertices, duration: float = 1.0) -> "Loop":
        """Closed polygon with uniformly spaced times and no refinement key."""
        v = np.asarray([as_point(z) for z in vertices], dtype=complex)
        if v[0] != v[-1]:
            v = np.append(v, v[0])
        return cls(v[0], duration, v, np.linspace(0.0, duration, len(v)))

    def reparametrized(self, times) -> "Loop":
        """Same vertex sequence visited on a new time grid."""
        times = np.asarray(times, dtype=float)
        return Loop(self.root, float(times[-1]), self.vertices.copy(), times, self.key,
                    None if self.nodes is None else self.nodes.copy(), self.brownian_clock.copy())

    def transformed(self, fn) -> "Loop":
        """Apply a map to every vertex (keeps times; drops the key)."""
        v = np.asarray(fn(self.vertices), dtype=complex)
        return Loop(v[0], self.duration, v, self.times.copy())


@dataclass(frozen=True)
class SoupConfig:
    alpha: float
    domain: DiscDomain = UNIT_DISC
    t_min: float = 1e-3
    t_max: float = DEFAULT_T_MAX
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME
    seed: int = 0
    replica_id: int = 0

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be non-negative, got {self.alpha}")
        if not 0 < self.t_min < self.t_max < math.inf:
            raise DomainError(f"need 0 < t_min < t_max, got {self.t_min}, {self.t_max}")
        if self.steps_per_unit_time < 2:
            raise DomainError("steps_per_unit_time must be at least 2")
        if self.replica_id < 0:
            raise DomainError("replica_id must be non-negative")

    def rng(self) -> np.random.Generator:
        return replica_rng(self.seed, self.replica_id)

    @property
    def intensity_mass(self) -> float:
        return total_intensity(self.domain, self.t_min, self.t_max)


def total_intensity(domain: DiscDomain, t_min: float, t_max: float) -> float:
    """mu-mass of root-duration pairs in D x [t_min, t_max] (before confinement)."""
    return domain.area * (1.0 / t_min - 1.0 / t_max) / (2.0 * math.pi)


def coarse_level(duration, steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME):
    """log2 of the coarse step count: max(16, ceil(spt * T)) rounded up to a power of two."""
    d = np.asarray(duration, dtype=float)
    steps = np.maximum(MIN_STEPS, np.ceil(steps_per_unit_time * d))
    if np.any(steps > MAX_STEPS):
        raise DomainError("loop too long for the coarse step budget")
    # ceil(log2(s)) is the bit length of s - 1
    level = np.frexp(steps - 1)[1].astype(np.int64)
    return int(level) if level.ndim == 0 else level


def steps_for_duration(duration, steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME):
    level = coarse_level(duration, steps_per_unit_time)
    return 1 << level if isinstance(level, int) else np.left_shift(1, level)


def duration_quantile(t_min: float, t_max: float, u):
    """Inverse CDF of the density proportional to t^-2 on [t_min, t_max]."""
    u = np.asarray(u, dtype=float)
    out = 1.0 / (1.0 / t_min - u * (1.0 / t_min - 1.0 / t_max))
    return float(out) if out.ndim == 0 else out


def sample_root_and_duration(config: SoupConfig, rng: np.random.Generator, size=None):
    """Root uniform on the disc, duration with density ∝ t^-2 on [t_min, t_max]."""
    n = 1 if size is None else int(size)
    u = rng.random((3, n))
    roots = config.domain.radius * np.sqrt(u[0]) * np.exp(2j * np.pi * u[1])
    durations = duration_quantile(config.t_min, config.t_max, u[2])
    durations = np.atleast_1d(durations)
    if size is None:
        return complex(roots[0]), float(durations[0])
    return roots, durations


def _bridge_arrays(root: complex, duration: float, level: int, key: int):
    m = (1 << level) + 1
    verts = np.empty(m, np.complex128)
    times = np.empty(m, np.float64)
    nodes = np.empty(m, np.uint64)
    K.fill_bridge(complex(root), float(duration), int(level), np.uint64(key), verts, times, nodes)
    return verts, times, nodes


def sample_bridge(x, t: float, n_steps: int, rng: np.random.Generator) -> Loop:
    """Planar Brownian bridge x -> x of duration t at ``n_steps + 1`` equally spaced times.

    Power-of-two step counts use the nested dyadic construction; other counts
    take Gaussian increments from ``rng`` and pin the endpoint, with the key
    reserved for later bisections.
    """
    if not t > 0:
        raise DomainError("bridge duration must be positive")
    if not 2 <= n_steps <= MAX_STEPS:
        raise DomainError(f"n_steps must lie in [2, {MAX_STEPS}]")
    x = as_point(x)
    key = int(_draw_keys(rng))
    if n_steps & (n_steps - 1) == 0:
        verts, times, nodes = _bridge_arrays(x, t, n_steps.bit_length() - 1, key)
        return Loop(x, float(t), verts, times, key, nodes)
    dt = t / n_steps
    w = np.concatenate([[0j], np.cumsum(rng.normal(0.0, math.sqrt(dt), (n_steps, 2)) @ [1, 1j])])
    verts = x + w - np.linspace(0.0, 1.0, n_steps + 1) * w[-1]
    verts[0] = verts[-1] = x
    return Loop(x, float(t), verts, np.linspace(0.0, t, n_steps + 1), key)


def refine_near(loop: Loop, x, target_resolution: float = TARGET_RESOLUTION,
                rng: np.random.Generator | None = None, *, max_depth: int = MAX_DEPTH,
                factor: float = EXCURSION_FACTOR) -> Loop:
    """Insert conditional Brownian-bridge midpoints into segments passing near ``x``.

    A segment of duration dt is bisected while x is within ``factor * sqrt(dt)``
    of it and sqrt(dt) >= target_resolution. Midpoints are drawn from the exact
    conditional law, so the refined loop has the same law as the original.
    The result keeps the key and records the node of every segment, so
    refining it again (or computing windings on it) reproduces the same path.
    """
    if not target_resolution > 0:
        raise DomainError("target_resolution must be positive")
    if not 0 <= max_depth <= MAX_DEPTH:
        raise DomainError(f"max_depth must lie in [0, {MAX_DEPTH}]")
    x = as_point(x)
    key = loop.key
    if key is None:
        if rng is None:
            raise DomainError("loop has no refinement key; pass an rng")
        key = int(_draw_keys(rng))
    nodes = loop.nodes if loop.nodes is not None else _default_nodes(len(loop.vertices))
    clock = loop.brownian_clock
    if max_depth == 0:
        return Loop(loop.root, loop.duration, loop.vertices.copy(), loop.times.copy(), key,
                    nodes.copy(), None if loop.clock is None else clock.copy())
    verts, new_clock, new_nodes, unresolved = K.refine_path(
        loop.vertices, clock, nodes, np.uint64(key), x, float(target_resolution), int(max_depth),
        float(factor))
    if unresolved and np.min(np.abs(verts - x)) < target_resolution:
        raise PointOnPathError(f"point {x} stays within {target_resolution} of the path at max depth")
    if loop.clock is None:
        return Loop(loop.root, loop.duration, verts, new_clock, key, new_nodes)
    # display times follow the loop's own parametrization, interpolated in Brownian time
    times = np.interp(new_clock, clock, loop.times)
    times[-1] = loop.duration
    return Loop(loop.root, loop.duration, verts, times, key, new_nodes, new_clock)


def loop_reach(loop: Loop, domain: DiscDomain, x=0j, *, tol: float = REACH_TOL,
               max_depth: int = MAX_DEPTH, factor: float = EXCURSION_FACTOR) -> float:
    """max over the loop of |j_x|, resolved by bisection when the loop has a key."""
    x = as_point(x)
    if not abs(x) < domain.radius:
        raise DomainError("x must lie inside the domain")
    if loop.key is None:
        r = domain.radius
        v = loop.vertices
        return float(np.max(np.abs(r * (v - x) / (r * r - np.conj(x) * v))))
    return float(K.resolved_max(loop.vertices, loop.brownian_clock, loop.nodes, np.uint64(loop.key),
                                x, float(domain.radius), tol, np.zeros(0), int(max_depth),
                                float(factor)))


@dataclass(eq=False)
class LoopSoup:
    """A realization of the loop soup, stored as candidate (root, duration, key) triples.

    Candidates whose refined path leaves the domain are rejected; ``loops``
    lists the accepted ones. Acceptance is evaluated lazily and cached.
    """

    config: SoupConfig
    roots: np.ndarray
    durations: np.ndarray
    keys: np.ndarray
    candidates_drawn: int
    _inside: np.ndarray = field(default=None, repr=False)
    _loops: list | None = field(default=None, repr=False)

    def __post_init__(self):
        if self._inside is None:
            self._inside = np.full(len(self.roots), -1, dtype=np.int8)

    @property
    def n_steps(self) -> np.ndarray:
        return steps_for_duration(self.durations, self.config.steps_per_unit_time)

    def path_arrays(self, indices):
        """CSR layout (offsets, vertices, times, nodes, keys) for the given candidates."""
        idx = np.asarray(indices, dtype=np.int64)
        levels = np.atleast_1d(coarse_level(self.durations[idx], self.config.steps_per_unit_time))
        offsets = np.zeros(len(idx) + 1, dtype=np.int64)
        np.cumsum(np.left_shift(1, levels) + 1, out=offsets[1:])
        verts = np.empty(offsets[-1], np.complex128)
        times = np.empty(offsets[-1], np.float64)
        nodes = np.empty(offsets[-1], np.uint64)
        keys = self.keys[idx]
        K.fill_bridges(self.roots[idx], self.durations[idx], levels, keys, offsets, verts, times,
                       nodes)
        return offsets, verts, times, nodes, keys

    def inside(self, indices) -> np.ndarray:
        """Acceptance flags for candidates (refined path strictly inside the domain)."""
        idx = np.asarray(indices, dtype=np.int64)
        todo = idx[self._inside[idx] < 0]
        todo = np.unique(todo)
        for chunk in np.array_split(todo, max(1, len(todo) // 20000)):
            if len(chunk) == 0:
                continue
            offsets, verts, times, nodes, keys = self.path_arrays(chunk)
            ok = K.loops_inside(offsets, verts, times, nodes, keys, float(self.config.domain.radius),
                                REACH_TOL, MAX_DEPTH, EXCURSION_FACTOR)
            self._inside[chunk] = ok
        return self._inside[idx].astype(bool)

    @property
    def accepted_indices(self) -> np.ndarray:
        all_idx = np.arange(len(self.roots))
        return all_idx[self.inside(all_idx)]

    @property
    def accepted(self) -> int:
        return len(self.accepted_indices)

    def loop(self, i: int) -> Loop:
        level = coarse_level(self.durations[i], self.config.steps_per_unit_time)
        verts, times, nodes = _bridge_arrays(self.roots[i], self.durations[i], level, int(self.keys[i]))
        return Loop(complex(self.roots[i]), float(self.durations[i]), verts, times,
                    int(self.keys[i]), nodes)

    @property
    def loops(self) -> list[Loop]:
        if self._loops is None:
            self._loops = [self.loop(i) for i in self.accepted_indices]
        return self._loops

    def subset(self, mask, config: SoupConfig | None = None) -> "LoopSoup":
        """Soup restricted to candidates selected by ``mask`` (cached flags kept)."""
        mask = np.asarray(mask, dtype=bool)
        return LoopSoup(config or self.config, self.roots[mask], self.durations[mask],
                        self.keys[mask], self.candidates_drawn, self._inside[mask].copy())


def sample_soup(config: SoupConfig, rng: np.random.Generator | None = None) -> LoopSoup:
    """Poisson loop soup of intensity alpha * mu, truncated to durations in [t_min, t_max].

    N ~ Poisson(alpha * M) candidates are drawn from the normalized root-duration
    intensity; candidates leaving the domain are rejected (Poisson thinning).
    """
    if rng is None:
        rng = config.rng()
    n = int(rng.poisson(config.alpha * config.intensity_mass)) if config.alpha > 0 else 0
    roots, durations = sample_root_and_duration(config, rng, size=n)
    keys = _draw_keys(rng, size=n)
    return LoopSoup(config, roots, durations, keys, n)


def restrict_to_domain(soup: LoopSoup, domain: DiscDomain) -> LoopSoup:
    """Loops of the soup that stay in a smaller concentric disc (a soup on that disc)."""
    if domain.radius > soup.config.domain.radius:
        raise DomainError("can only restrict to a smaller disc")
    keep = np.abs(soup.roots) < domain.radius
    sub = LoopSoup(replace(soup.config, domain=domain), soup.roots[keep], soup.durations[keep],
                   soup.keys[keep], soup.candidates_drawn)
    return sub


def filter_durations(soup: LoopSoup, t_min: float) -> LoopSoup:
    """Drop loops shorter than ``t_min`` (the soup a larger cutoff would have produced)."""
    if not soup.config.t_min <= t_min < soup.config.t_max:
        raise DomainError("new cutoff must lie in [t_min, t_max)")
    keep = soup.durations >= t_min
    return soup.subset(keep, replace(soup.config, t_min=t_min))
