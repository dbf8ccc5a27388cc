"""Shared numerical settings, overridable from the command line."""

from __future__ import annotations

from dataclasses import dataclass, replace

FORMATS = ("table", "json", "csv")


@dataclass(frozen=True)
class Config:
    grid_size: int = 4096
    quad_tol: float = 1e-10
    pass_tol: float = 1e-8
    quad_pass_tol: float = 1e-6  # quadrature-backed pairs carry quadrature noise
    output_format: str = "table"
    seed: int = 0
    curvature_eps: float = 1e-12
    sweep_points: int = 1000
    range_samples: int = 10_000

    def __post_init__(self):
        for name in ("grid_size", "sweep_points", "range_samples"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")
        for name in ("quad_tol", "pass_tol", "quad_pass_tol", "curvature_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.output_format not in FORMATS:
            raise ValueError(f"output_format must be one of {', '.join(FORMATS)}")

    def updated(self, **changes) -> "Config":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT = Config()
