"""The winding field W_x, its renormalized martingale Z_{n,x} and field integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, PrecisionError
from .geometry import UNIT_DISC, DiscDomain, as_point

TWO_PI = 2.0 * math.pi


def a_exponent(beta: float) -> float:
    """a(β) = β(2π − β)/(4π²) for β in [0, 2π)."""
    beta = float(beta)
    if not 0.0 <= beta < TWO_PI:
        raise DomainError(f"beta must lie in [0, 2π), got {beta}")
    return beta * (TWO_PI - beta) / (4.0 * math.pi**2)


@dataclass(frozen=True)
class BetaField:
    """β as a function of the point: a constant, or a radial step
    (``values[0]`` inside ``radius``, ``values[1]`` outside)."""

    kind: str = "constant"
    values: tuple = (0.0,)
    radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in self.values:
            a_exponent(v)
        if self.kind == "constant":
            if len(self.values) != 1:
                raise DomainError("constant beta field takes one value")
        elif self.kind == "radial":
            if len(self.values) != 2 or self.radius is None or not self.radius > 0:
                raise DomainError("radial beta field takes two values and a positive radius")
        else:
            raise DomainError(f"unknown beta field kind {self.kind!r}")

    @classmethod
    def constant(cls, beta: float) -> "BetaField":
        return cls("constant", (beta,))

    @classmethod
    def radial(cls, inner: float, outer: float, radius: float) -> "BetaField":
        return cls("radial", (inner, outer), radius)

    def __call__(self, points) -> np.ndarray:
        z = np.asarray(points, dtype=complex)
        if self.kind == "constant":
            return np.full(z.shape, self.values[0])
        return np.where(np.abs(z) < self.radius, self.values[0], self.values[1])


@dataclass(frozen=True)
class DeltaSchedule:
    scales: tuple

    def __post_init__(self):
        s = tuple(float(v) for v in self.scales)
        object.__setattr__(self, "scales", s)
        if len(s) == 0:
            raise DomainError("schedule needs at least one scale")
        if not all(0.0 < v < 1.0 for v in s):
            raise DomainError("scales must lie in (0, 1)")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise DomainError("scales must be strictly decreasing")

    @classmethod
    def geometric(cls, first: float = 0.5, levels: int = 8, ratio: float = 2**-0.5) -> "DeltaSchedule":
        return cls(tuple(first * ratio**n for n in range(levels)))

    def __len__(self):
        return len(self.scales)

    def __iter__(self):
        return iter(self.scales)

    def __getitem__(self, n):
        return self.scales[n]

    @property
    def t_min(self) -> float:
        """Duration cutoff δ_min²/100 that keeps truncation bias negligible."""
        return self.scales[-1] ** 2 / 100.0


def _indicator(s):
    return lambda z: (np.abs(z) < s).astype(float)


def _bump(s):
    def h(z):
        q = np.abs(z) ** 2 / (s * s)
        out = np.zeros(np.shape(z))
        inside = q < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside]))
        return out
    return h


@dataclass(frozen=True)
class TestFunction:
    """Bounded h supported in the centered disc of radius ``support_radius``."""

    func: Callable
    support_radius: float
    name: str = "custom"

    __test__ = False  # not a pytest class

    @classmethod
    def indicator(cls, radius: float = 0.5) -> "TestFunction":
        return cls(_indicator(radius), radius, f"indicator({radius})")

    @classmethod
    def bump(cls, radius: float = 0.5) -> "TestFunction":
        return cls(_bump(radius), radius, f"bump({radius})")

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls(lambda z: np.zeros(np.shape(z)), 0.1, "zero")

    def grid(self, grid_n: int, domain: DiscDomain = UNIT_DISC, supersample: int = 4):
        """Cell centers and cell integrals ∫_cell h dA over a grid_n × grid_n grid
        on [−s, s]², keeping the cells where h does not vanish. Cell integrals are
        midpoint sums over ``supersample``² sub-cells."""
        if grid_n < 8:
            raise DomainError("grid_n must be at least 8")
        s = float(self.support_radius)
        h = 2.0 * s / grid_n
        if not s + h / math.sqrt(2.0) < domain.radius:
            raise DomainError("support of h must stay inside the domain")
        c = -s + h * (np.arange(grid_n) + 0.5)
        centers = (c[None, :] + 1j * c[:, None]).ravel()
        sub = h * ((np.arange(supersample) + 0.5) / supersample - 0.5)
        offs = (sub[None, :] + 1j * sub[:, None]).ravel()
        vals = np.asarray(self.func(centers[:, None] + offs[None, :]), dtype=float)
        weights = vals.mean(axis=1) * h * h
        keep = weights != 0
        return centers[keep], weights[keep]


@dataclass
class MartingaleTrace:
    point: complex
    beta: float
    alpha: float
    schedule: DeltaSchedule
    z_values: np.ndarray = field(repr=False)

    @property
    def ratios(self) -> np.ndarray:
        """Increments Z_{n+1}/Z_n."""
        return self.z_values[1:] / self.z_values[:-1]


@dataclass(frozen=True)
class FieldEstimate:
    value: complex
    stderr: float
    n_grid: int
    n_replicas: int

    def __post_init__(self):
        if not self.stderr >= 0:
            raise DomainError("stderr must be non-negative")


def _records(soup, points, deltas, margin, **kw):
    from .winding import winding_records

    kw.setdefault("reach_cuts", np.asarray(deltas, dtype=float) * (1.0 - margin))
    return winding_records(soup, points, **kw)


def w_values(soup, points, betas, deltas, margin: float = 0.0, **kw) -> np.ndarray:
    """W_x^{β_x, δ} for every point and scale, shape (n_points, n_deltas).

    One pass over the soup: windings around all points, then Σ n_x(l) over
    loops not contained in B(x, δ) for each δ.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    betas = np.broadcast_to(np.asarray(betas, dtype=float), pts.shape)
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if np.any((deltas <= 0) | (deltas >= 1)):
        raise DomainError("delta must lie in (0, 1)")
    for b in np.unique(betas):
        a_exponent(b)
    rec = _records(soup, pts, deltas, margin, **kw)
    sums = rec.winding_sums(deltas, margin)
    return np.exp(1j * betas[:, None] * sums)


def w_at(soup, x, beta: float, delta: float, margin: float = 0.0, **kw) -> complex:
    """W_x = ∏ e^{iβ n_x(l)} over soup loops not contained in B(x, δ)."""
    x = as_point(x)
    if not abs(x) < soup.config.domain.radius:
        raise DomainError("x must lie inside the domain")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    a_exponent(beta)
    if beta == 0 or len(soup.roots) == 0:
        return 1 + 0j
    return complex(w_values(soup, [x], [beta], [delta], margin, **kw)[0, 0])


def martingale_trace(soup, x, beta: float, alpha: float, schedule: DeltaSchedule,
                     margin: float = 0.0, **kw) -> MartingaleTrace:
    """Z_n = δ_n^{−α a(β)} W_x^{β, δ_n} along the schedule."""
    if not math.isclose(alpha, soup.config.alpha, rel_tol=0, abs_tol=1e-12):
        raise DomainError("alpha must match the soup's intensity")
    x = as_point(x)
    a = a_exponent(beta)
    d = np.asarray(schedule.scales)
    if beta == 0:
        w = np.ones(len(d), dtype=complex)
    else:
        w = w_values(soup, [x], [beta], d, margin, **kw)[0]
    return MartingaleTrace(x, float(beta), float(alpha), schedule, d ** (-alpha * a) * w)


def field_integrals(soup, h: TestFunction, betafield: BetaField, alpha: float, deltas,
                    grid_n: int = 32, supersample: int = 4, margin: float = 0.0,
                    **kw) -> np.ndarray:
    """∫ h(x) δ^{−α a(β_x)} W_x^{β_x, δ} dA(x) for each δ, on one shared soup."""
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    pts, wts = h.grid(grid_n, soup.config.domain, supersample)
    if len(pts) == 0:
        return np.zeros(len(deltas), dtype=complex)
    betas = betafield(pts)
    a = np.array([a_exponent(b) for b in betas])
    renorm = deltas[None, :] ** (-alpha * a[:, None])
    if np.all(betas == 0):
        w = np.ones((len(pts), len(deltas)), dtype=complex)
    else:
        w = w_values(soup, pts, betas, deltas, margin, **kw)
    return (wts[:, None] * renorm * w).sum(axis=0)


def field_integral(soup, h: TestFunction, betafield: BetaField, alpha: float, delta: float,
                   grid_n: int = 32, **kw) -> complex:
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    return complex(field_integrals(soup, h, betafield, alpha, [delta], grid_n, **kw)[0])


def moment_estimate(values, p: int) -> tuple[float, float]:
    """Empirical E|v|^{2p} over replicas with its jackknife stderr."""
    from .stats import jackknife

    if int(p) != p or p < 1:
        raise DomainError("p must be a positive integer")
    v = np.asarray(values)
    if v.ndim != 1 or len(v) < 100:
        raise PrecisionError("need at least 100 replicas")
    m = np.abs(v) ** (2 * int(p))
    if np.all(m == m[0]):
        # leave-out means of identical values differ only by roundoff
        return float(m[0]), 0.0
    est, err = jackknife(m, np.mean, groups=200)
    return float(est), float(err)
