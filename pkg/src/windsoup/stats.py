"""Estimators and tests used by the verification experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, PrecisionError


@dataclass(frozen=True)
class EstimateWithError:
    mean: complex | float
    stderr: float
    n: int

    def __post_init__(self):
        if not self.stderr >= 0:
            raise DomainError("stderr must be non-negative")
        if self.n < 1:
            raise DomainError("n must be positive")

    def z_score(self, reference) -> float:
        """(mean − reference)/stderr; the modulus of the difference for complex means."""
        diff = self.mean - reference
        diff = abs(diff) if isinstance(diff, complex) else float(diff)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


def mc_mean_ci(samples) -> EstimateWithError:
    """Sample mean with stderr = sd/√n (sd with denominator n).

    For complex samples the stderr is that of the complex mean, √(E|x − m|²/n).
    """
    x = np.asarray(samples)
    if x.ndim != 1 or len(x) < 2:
        raise PrecisionError("need at least two samples")
    m = x.mean()
    sd = math.sqrt(float(np.mean(np.abs(x - m) ** 2)))
    mean = complex(m) if np.iscomplexobj(x) else float(m)
    return EstimateWithError(mean, sd / math.sqrt(len(x)), len(x))


class PoissonFit(NamedTuple):
    z_mean: float
    z_var: float
    sample_mean: float
    sample_var: float
    n: int


def poisson_fit_test(counts, mean: float) -> PoissonFit:
    """Standardized deviations of sample mean and sample variance from Poisson(mean).

    Var(s²) uses the Poisson central moments σ² = μ and μ₄ = μ + 3μ².
    """
    c = np.asarray(counts, dtype=float)
    if not mean > 0:
        raise DomainError("hypothesized mean must be positive")
    n = len(c)
    if n < 100:
        raise PrecisionError("need at least 100 counts")
    if np.any(c < 0) or np.any(c != np.floor(c)):
        raise DomainError("counts must be non-negative integers")
    xbar = c.mean()
    s2 = c.var(ddof=1)
    mu4 = mean + 3.0 * mean * mean
    var_s2 = mu4 / n - mean * mean * (n - 3) / (n * (n - 1))
    z_mean = (xbar - mean) / math.sqrt(mean / n)
    z_var = (s2 - mean) / math.sqrt(var_s2)
    return PoissonFit(float(z_mean), float(z_var), float(xbar), float(s2), n)


def loglog_slope_fit(pairs) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(scale), with its stderr."""
    p = np.asarray(pairs, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
        raise PrecisionError("need at least three (scale, value) pairs")
    if np.any(p <= 0):
        raise DomainError("scales and values must be positive")
    x = np.log(p[:, 0])
    y = np.log(p[:, 1])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise PrecisionError("scales must not all coincide")
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = len(p) - 2
    s2 = float(resid @ resid) / dof
    return slope, math.sqrt(s2 / sxx)


def independence_corr(x, y) -> tuple[float, float]:
    """Pearson correlation and its Fisher-z statistic atanh(r)√(n − 3)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("x and y must be 1-d arrays of equal length")
    n = len(x)
    if n < 100:
        raise PrecisionError("need at least 100 pairs")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0 or sy == 0:
        raise PrecisionError("zero-variance input")
    r = float(np.clip(xc @ yc / (sx * sy), -1.0, 1.0))
    z = math.copysign(math.inf, r) if abs(r) == 1.0 else math.atanh(r) * math.sqrt(n - 3)
    return r, z


def jackknife(samples, statistic: Callable[[np.ndarray], float | np.ndarray],
              groups: int | None = None):
    """Delete-a-group jackknife estimate and stderr of ``statistic``.

    ``samples`` is indexed by replica along axis 0. With ``groups`` the
    replicas are split into that many contiguous blocks.
    """
    x = np.asarray(samples)
    n = len(x)
    if n < 2:
        raise PrecisionError("need at least two replicas")
    g = n if groups is None else int(min(groups, n))
    if g < 2:
        raise PrecisionError("need at least two jackknife groups")
    edges = np.linspace(0, n, g + 1).astype(int)
    full = np.asarray(statistic(x))
    loo = np.array([statistic(np.concatenate([x[:edges[i]], x[edges[i + 1]:]])) for i in range(g)])
    mean_loo = loo.mean(axis=0)
    var = (g - 1) / g * np.sum(np.abs(loo - mean_loo) ** 2, axis=0)
    return full, np.sqrt(var)


def trend_slope(values) -> float:
    """Least-squares slope of a sequence against its index."""
    v = np.asarray(values, dtype=float)
    i = np.arange(len(v), dtype=float)
    ic = i - i.mean()
    return float(ic @ (v - v.mean()) / (ic @ ic))


def variance_trend(replicate_values, groups: int | None = 100) -> tuple[float, float, np.ndarray]:
    """Slope across levels of the replica variance, with a jackknife stderr.

    ``replicate_values`` has shape (replicas, levels); complex values use E|v − m|².
    Returns (slope, stderr, variances).
    """
    v = np.asarray(replicate_values)
    if v.ndim != 2 or v.shape[1] < 3:
        raise PrecisionError("need a (replicas, levels >= 3) array")

    def stat(block):
        var = np.mean(np.abs(block - block.mean(axis=0)) ** 2, axis=0)
        return np.append(var, trend_slope(var))

    est, err = jackknife(v, stat, groups)
    return float(est[-1]), float(err[-1]), est[:-1]
