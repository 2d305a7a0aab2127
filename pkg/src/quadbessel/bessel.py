"""One-dimensional Bessel and squared-Bessel reference processes.

These provide exact marginal oracles for validating the quadrant integrator
(the decoupled coordinates are Bessel processes of dimension 2*alpha + 1 and
2*delta + 1), the closed-form law of the first hitting time of zero in the
reflecting regime, and the change-of-dimension path density.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .stats import regularized_upper_gamma


class BoundaryClass(enum.Enum):
    POLAR = "Polar"
    INSTANTANEOUSLY_REFLECTING = "InstantaneouslyReflecting"


@dataclass(frozen=True)
class BesselSpec:
    """A Bessel process of dimension > 1 started at a nonnegative point."""

    dimension: float
    start: float = 1.0

    def __post_init__(self):
        if not self.dimension > 1:
            raise ValueError(f"dimension must be > 1, got {self.dimension}")
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")

    @property
    def boundary(self) -> BoundaryClass:
        return boundary_class(self.dimension)


def boundary_class(d: float) -> BoundaryClass:
    """Boundary behaviour of the origin: polar for d >= 2, reflecting for 1 < d < 2."""
    if not d > 1:
        raise ValueError(f"dimension must be > 1, got {d}")
    if d >= 2.0:
        return BoundaryClass.POLAR
    return BoundaryClass.INSTANTANEOUSLY_REFLECTING


def besq_exact_transition(x0, d: float, t: float, rng: np.random.Generator, size=None):
    """Exact draw of a squared Bessel process of dimension d at time t from x0.

    Uses the Poisson-mixed gamma representation: N ~ Poisson(x0 / (2t)),
    value = 2t * Gamma(d/2 + N).  Works for any real d > 0 and vectorizes
    over x0.  Mean is x0 + d*t, variance 2*d*t^2 + 4*x0*t.
    """
    if not d > 0:
        raise ValueError(f"dimension must be > 0, got {d}")
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 < 0):
        raise ValueError("x0 must be nonnegative")
    if size is not None:
        x0 = np.broadcast_to(x0, size)
    n = rng.poisson(x0 / (2.0 * t))
    out = 2.0 * t * rng.standard_gamma(d / 2.0 + n)
    return float(out) if np.ndim(out) == 0 else out


def bessel_hitting_zero_cdf(r: float, d: float, T):
    """P(tau_0 <= T) for a Bessel process of dimension d in (1, 2) from r > 0.

    The hitting time satisfies tau_0 = r^2 / (2G) with G ~ Gamma(1 - d/2, 1),
    so the CDF is the regularized upper incomplete gamma Q(1 - d/2, r^2/(2T)).
    Monotone increasing in T, tends to 1 as T -> infinity.
    """
    if not (1.0 < d < 2.0):
        raise ValueError(f"dimension must lie in (1, 2), got {d}")
    if not r > 0:
        raise ValueError(f"start must be > 0, got {r}")
    nu = 1.0 - d / 2.0
    T = np.asarray(T, dtype=float)
    if np.any(T < 0):
        raise ValueError("T must be nonnegative")
    out = np.where(T > 0, regularized_upper_gamma(nu, r * r / (2.0 * np.maximum(T, 1e-300))), 0.0)
    return float(out) if out.ndim == 0 else out


def bessel_density_weight(values, dt: float, d: float, r: float) -> float:
    """Likelihood ratio of the dimension-d Bessel law against dimension 2.

    For a strictly positive discretized path R started at r the weight is

        (R_T / r)^((d-2)/2) * exp(-((d-2)^2 / 8) * integral ds / R_s^2)

    with the time integral evaluated by the trapezoid rule on the grid.
    Under the dimension-2 law the weight has expectation one.
    """
    if not d >= 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not r > 0:
        raise ValueError(f"start must be > 0, got {r}")
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("path must be a 1-d array with at least two points")
    if np.any(v <= 0):
        raise ValueError("path values must be strictly positive")
    if d == 2.0:
        return 1.0
    inv_sq = 1.0 / (v * v)
    integral = dt * (np.sum(inv_sq) - 0.5 * (inv_sq[0] + inv_sq[-1]))
    nu = 0.5 * (d - 2.0)
    return float((v[-1] / r) ** nu * math.exp(-0.5 * nu * nu * integral))
