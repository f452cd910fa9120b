"""Monte Carlo and exact numerics for winding fields of Brownian loop soups."""
from __future__ import annotations

from .errors import DomainError, NumericalError, PointOnPathError, PrecisionError
from .geometry import (DiscDomain, PullbackBall, UNIT_DISC, in_pullback_ball,
                       loop_contained_in_ball, pullback_disc, uniformizer)
from .sampler import (Loop, LoopSoup, SoupConfig, refine_near, sample_bridge,
                      sample_root_and_duration, sample_soup)
from .winding import WindingSpectrum, spatial_prefilter, winding_number, winding_spectrum
from .field import (BetaField, DeltaSchedule, FieldEstimate, MartingaleTrace, TestFunction,
                    a_exponent, field_integral, martingale_trace, moment_estimate, w_at)

__version__ = "0.1.0"
