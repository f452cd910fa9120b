"""Disc domains, Moebius uniformizers and pullback balls.

Points of the plane are plain Python/numpy complex numbers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PlanePoint = complex

#: vertex-proxy safety margin for containment, as a fraction of the ball scale
DEFAULT_MARGIN = 0.05


def as_point(z) -> complex:
    """Coerce a complex number or an (re, im) pair to ``complex``."""
    if isinstance(z, (tuple, list)):
        z = complex(z[0], z[1])
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise DomainError(f"non-finite point {z!r}")
    return z


@dataclass(frozen=True)
class DiscDomain:
    radius: float = 1.0

    def __post_init__(self):
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise DomainError(f"disc radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return np.pi * self.radius**2

    def contains(self, z) -> bool:
        return abs(complex(z)) < self.radius


UNIT_DISC = DiscDomain(1.0)


@dataclass(frozen=True)
class PullbackBall:
    center: complex
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not 0.0 < self.scale < 1.0:
            raise DomainError(f"ball scale must lie in (0, 1), got {self.scale}")

    def euclidean(self, domain: DiscDomain = UNIT_DISC) -> tuple[complex, float]:
        """Center and radius of the ball as an ordinary Euclidean disc."""
        return pullback_disc(domain, self.center, self.scale)


def _check_center(domain: DiscDomain, x: complex) -> None:
    if not abs(x) < domain.radius:
        raise DomainError(f"point {x} is not inside the open disc of radius {domain.radius}")


def uniformizer(domain: DiscDomain, x, z):
    """Conformal map of the domain onto the unit disc sending ``x`` to 0.

    ``z`` may be a scalar or an array; z ↦ (w − a)/(1 − ā w) with w = z/R, a = x/R.
    """
    x = as_point(x)
    _check_center(domain, x)
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz) > domain.radius * (1 + 1e-12)):
        raise DomainError("z lies outside the closed domain")
    a = x / domain.radius
    w = zz / domain.radius
    out = (w - a) / (1.0 - np.conj(a) * w)
    return complex(out) if out.ndim == 0 else out


def pullback_disc(domain: DiscDomain, x, scale: float) -> tuple[complex, float]:
    """Euclidean center and radius of the preimage of D_scale under j_x."""
    x = as_point(x)
    _check_center(domain, x)
    a = x / domain.radius
    s2 = scale * scale
    den = 1.0 - s2 * abs(a) ** 2
    center = a * (1.0 - s2) / den
    radius = scale * (1.0 - abs(a) ** 2) / den
    return center * domain.radius, radius * domain.radius


def in_pullback_ball(ball: PullbackBall, domain: DiscDomain, z) -> bool:
    return bool(abs(uniformizer(domain, ball.center, as_point(z))) < ball.scale)


def loop_contained_in_ball(loop, ball: PullbackBall, domain: DiscDomain,
                           margin: float = DEFAULT_MARGIN, *, resolve: bool = False) -> bool:
    """Whether a discretized loop lies inside B(x, δ).

    The default test is the vertex proxy: every vertex must satisfy
    |j_x(v)| < δ(1 − margin). With ``resolve=True`` the loop's maximum of
    |j_x| is resolved by bisecting its Brownian segments (the loop must carry
    a refinement key) and compared against the same shrunken scale.
    """
    if margin < 0:
        raise DomainError("margin must be non-negative")
    if len(loop.vertices) < 2:
        raise DomainError("loop needs at least two vertices")
    limit = ball.scale * (1.0 - margin)
    if resolve:
        from .sampler import loop_reach

        return loop_reach(loop, domain, ball.center) < limit
    verts = np.asarray(loop.vertices, dtype=complex)
    if np.any(np.abs(verts) >= domain.radius):
        return False
    return bool(np.all(np.abs(uniformizer(domain, ball.center, verts)) < limit))
