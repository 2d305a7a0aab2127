"""Parameter set for the obliquely repelled planar Bessel diffusion.

The process lives in the closed quadrant and solves

    dX = dB + (alpha/X + beta/Y  - theta) dt
    dY = dC + (gamma/X + delta/Y - eta)   dt

where (B, C) is a planar Brownian motion with correlation rho.  The own
coefficients alpha, delta must be strictly positive; the cross coefficients
beta, gamma and the correlation are free, the constant drifts theta, eta are
nonnegative (zero for the undrifted system).
"""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass(frozen=True)
class O2BPParams:
    """Coefficients of the oblique two-dimensional Bessel process (O2BP)."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    rho: float = 0.0
    theta: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "rho", "theta", "eta"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or v != v:
                raise ValueError(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.theta < 0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    @property
    def interaction_determinant(self) -> float:
        """Determinant alpha*delta - beta*gamma of the interaction matrix."""
        return self.alpha * self.delta - self.beta * self.gamma

    @property
    def drifted(self) -> bool:
        return self.theta != 0.0 or self.eta != 0.0

    def without_drift(self) -> "O2BPParams":
        """Same interaction coefficients with the constant drifts removed."""
        return O2BPParams(self.alpha, self.beta, self.gamma, self.delta, self.rho)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "O2BPParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameter fields: {sorted(unknown)}")
        return cls(**d)
