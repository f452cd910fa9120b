"""Closed forms and quadrature oracles for rooted winding laws.

Throughout, ``pmf(n, r)`` is the mass M_1(n_0 = n) of a unit-duration loop
rooted at distance r from the origin under the bridge measure weighted by the
heat-kernel diagonal, so that sum_n pmf(n, r) = p_1(z, z) = 1/(2π). With
z = r² the probability of winding n is

    P(n) = 2 e^{-z} ∫_0^∞ I_u(z) cos(2πnu) du                          (Fourier)
         = e^{-z} ∫_0^∞ e^{-z cosh t} [(2n-1)/(t² + (2n-1)²π²)
                                        - (2n+1)/(t² + (2n+1)²π²)] dt   (contour)

for n != 0, and pmf = P/(2π).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import _kernels as K
from .errors import DomainError, NumericalError
from .field import a_exponent

QUAD_EPSABS = 1e-13
#: cosh-kernel tails are cut where the integrand drops below this
TAIL_CUT = 1e-16
P1_DIAGONAL = 1.0 / (2.0 * math.pi)


def bessel_i(order: float, x: float) -> float:
    """Modified Bessel function of the first kind I_order(x), real order >= 0."""
    order = float(order)
    x = float(x)
    if not (math.isfinite(order) and math.isfinite(x)):
        raise DomainError("order and argument must be finite")
    if order < 0 or x < 0:
        raise DomainError("order and argument must be non-negative")
    val = float(special.iv(order, x))
    if math.isinf(val):
        raise OverflowError(f"I_{order}({x}) overflows double precision")
    return val


def bessel_i_quadrature(order: float, x: float) -> float:
    """I_ν(x) from its integral representation (independent oracle for ``bessel_i``).

    I_ν(x) = (1/π)∫_0^π e^{x cos θ} cos νθ dθ − (sin νπ/π)∫_0^∞ e^{−x cosh t − νt} dt.
    """
    a = integrate.quad(lambda th: math.exp(x * math.cos(th)) * math.cos(order * th), 0.0, math.pi,
                       epsabs=1e-14, epsrel=1e-13, limit=200)[0] / math.pi
    if math.sin(order * math.pi) == 0.0:
        return a
    b = integrate.quad(lambda t: math.exp(-x * math.cosh(t) - order * t) if t < 700.0 else 0.0, 0.0, np.inf,
                       epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return a - math.sin(order * math.pi) / math.pi * b


def _check_nr(n: int, r: float) -> tuple[int, float]:
    if int(n) != n or n == 0:
        raise DomainError("winding index must be a nonzero integer")
    if not (r > 0 and math.isfinite(r)):
        raise DomainError("r must be positive")
    return int(n), float(r)


def _contour_bracket(n: int, t):
    a = 2 * n - 1
    b = 2 * n + 1
    return a / (t * t + (a * math.pi) ** 2) - b / (t * t + (b * math.pi) ** 2)


def _contour_cut(z: float) -> float:
    # exp(-z(1 + cosh t)) < TAIL_CUT beyond this t
    return math.acosh(max(1.0, -math.log(TAIL_CUT) / z))


def winding_pmf_contour(n: int, r: float) -> float:
    """pmf(n, r) by quadrature of the contour representation (absolute accuracy ~1e-12)."""
    n, r = _check_nr(n, r)
    z = r * r
    val, err = integrate.quad(lambda t: math.exp(-z * (1.0 + math.cosh(t))) * _contour_bracket(n, t),
                              0.0, _contour_cut(z), epsabs=QUAD_EPSABS, epsrel=1e-12, limit=400)
    if not err < 1e-10:
        raise NumericalError(f"contour quadrature did not converge (n={n}, r={r}, err={err:.2g})")
    return val * P1_DIAGONAL


def _fourier_cut(z: float) -> float:
    """Order beyond which e^{-z} I_u(z) < TAIL_CUT (I_u decays super-exponentially in u)."""
    u = max(4.0, 2.0 * z)
    while special.ive(u, z) > TAIL_CUT:
        u *= 1.5
    return u


def winding_pmf_fourier(n: int, r: float) -> float:
    """pmf(n, r) by cosine-weighted quadrature of the Fourier representation."""
    n, r = _check_nr(n, r)
    z = r * r
    cut = _fourier_cut(z)
    val, err = integrate.quad(lambda u: special.ive(u, z), 0.0, cut, weight="cos",
                              wvar=2.0 * math.pi * n, epsabs=QUAD_EPSABS, limit=400)
    if not err < 1e-8:
        raise NumericalError(f"Fourier quadrature did not converge (n={n}, r={r}, err={err:.2g})")
    return 2.0 * val * P1_DIAGONAL


def winding_mass_zero(r: float) -> float:
    """M_1(n_0 = 0) at distance r: p_1(z, z) minus all nonzero-winding mass."""
    if not (r > 0 and math.isfinite(r)):
        raise DomainError("r must be positive")
    z = r * r
    val = integrate.quad(lambda t: math.exp(-z * (1.0 + math.cosh(t))) * 2.0 / (t * t + math.pi**2),
                         0.0, _contour_cut(z), epsabs=QUAD_EPSABS, epsrel=1e-12, limit=400)[0]
    return (1.0 - val) * P1_DIAGONAL


def bridge_sheet_pmf(m: int, a: complex, b: complex, dt: float) -> float:
    """Probability that a planar bridge a -> b of duration dt sweeps arg(b/a) + 2πm around 0."""
    a, b = complex(a), complex(b)
    if a == 0 or b == 0 or not dt > 0:
        raise DomainError("endpoints must avoid the origin and dt must be positive")
    return float(K.sheet_prob(int(m), abs(a) * abs(b) / dt, K.turning_angle(a, b)))


def lemma1_value(k: int) -> float:
    """The stated value 1/(2π²k²) of ∫_C dA(z) P_1(n_0 = k)."""
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    return 1.0 / (2.0 * math.pi**2 * k * k)


def rooted_winding_area(k: int) -> float:
    """∫_C dA(z) M_1(n_0 = k) = 1/(4π²k²), the value the radial integral produces.

    Integrating the contour form in r leaves π/(2π) ∫ bracket/(1 + cosh t) dt,
    and the bracket integral equals 1/(2π²k²) (see ``contour_bracket_integral``).
    """
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    return 1.0 / (4.0 * math.pi**2 * k * k)


def contour_bracket_integral(k: int) -> float:
    """∫_0^∞ bracket_k(t)/(1 + cosh t) dt by quadrature; equals 1/(2π²k²)."""
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    k = int(k)
    return integrate.quad(lambda t: _contour_bracket(k, t) / (1.0 + math.cosh(t)), 0.0,
                          _contour_cut(1.0) + 40.0, epsabs=1e-15, epsrel=1e-13, limit=400)[0]


def lemma1_radial_integral(k: int, method: str = "contour") -> float:
    """2π ∫_0^∞ r pmf(k, r) dr by nested quadrature."""
    pmf = {"contour": winding_pmf_contour, "fourier": winding_pmf_fourier}.get(method)
    if pmf is None:
        raise DomainError(f"unknown representation {method!r}")
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    # pmf <= e^{-2 r^2}/(2π) so r = 4.5 leaves < 1e-17; the r -> 0 end is integrable
    val = integrate.quad(lambda r: r * pmf(k, r), 0.0, 4.5, epsabs=1e-12, epsrel=1e-11,
                         points=[0.1, 0.5, 1.0, 2.0], limit=200)[0]
    return 2.0 * math.pi * val


def lemma2_mean(alpha: float, R: float, delta: float, k: int) -> float:
    """α log(R/δ)/(2π²k²): expected number of soup loops in D_R not inside D_δ with winding k."""
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise DomainError("alpha must be non-negative")
    if not (0 < delta <= R):
        raise DomainError("need 0 < delta <= R")
    if int(k) != k or k == 0:
        raise DomainError("k must be a nonzero integer")
    return alpha * math.log(R / delta) / (2.0 * math.pi**2 * k * k)


def fourier_identity_partial(beta: float, N: int) -> float:
    """Σ_{k=1}^N (1 − cos kβ)/(π²k²)."""
    if N < 1:
        raise DomainError("N must be >= 1")
    total = 0.0
    for lo in range(1, N + 1, 1 << 20):
        k = np.arange(lo, min(N, lo + (1 << 20) - 1) + 1, dtype=float)
        total += float(np.sum((1.0 - np.cos(k * beta)) / (k * k)))
    return total / math.pi**2


def expected_w(alpha: float, beta: float, delta: float) -> float:
    """δ^{α a(β)}."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    return delta ** (alpha * a_exponent(beta))


def expected_w_series(alpha: float, beta: float, delta: float, N: int) -> float:
    """exp(α log δ Σ_{k≤N}(1 − cos kβ)/(π²k²)), the truncated Poisson computation."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    a_exponent(beta)
    return math.exp(alpha * math.log(delta) * fourier_identity_partial(beta, N))


@dataclass
class WindingPmfTable:
    r_values: np.ndarray
    n_values: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        if self.pmf.shape != (len(self.r_values), len(self.n_values)):
            raise DomainError("pmf must have shape (len(r_values), len(n_values))")


def pmf_table(r_values, n_values, method: str = "contour") -> WindingPmfTable:
    pmf = {"contour": winding_pmf_contour, "fourier": winding_pmf_fourier}.get(method)
    if pmf is None:
        raise DomainError(f"unknown representation {method!r}")
    r = np.asarray(r_values, dtype=float)
    n = np.asarray(n_values, dtype=int)
    tab = np.array([[pmf(int(k), float(rr)) for k in n] for rr in r]).reshape(len(r), len(n))
    return WindingPmfTable(r, n, tab)
