"""Numerical tolerances shared by the engines, the CLI and the tests."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

__all__ = ["Tolerances", "DEFAULT_TOLERANCES"]


@dataclass(frozen=True)
class Tolerances:
    eigen_rel: float = 1e-8  # collocation vs closed form, relative
    residual: float = 1e-9  # ODE residual, relative to operator scale
    pairing: float = 1e-6  # |Q psi|^2 / |psi|^2 against lambda, relative
    identity: float = 1e-10  # Jacobi reduction identity
    annihilation: float = 1e-10  # zero-mode supercharge residuals
    chern2: float = 1e-6
    chern3: float = 1e-5
    b_field: float = 1e-9
    signature: float = 1e-8
    k_cancel: float = 1e-4
    exponent: float = 0.05  # log-log slopes
    r2: float = 0.99  # log-divergence fit quality

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value}")

    def scaled(self, **overrides) -> "Tolerances":
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
