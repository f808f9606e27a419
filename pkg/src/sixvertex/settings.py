"""Numeric settings shared by every stage of the toolkit."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

SETTINGS_ENV = "SIXVERTEX_SETTINGS"


@dataclass(frozen=True)
class NumericSettings:
    """Grid size and tolerances.

    Relative tolerances are scaled by the magnitude of the quantity they
    guard; absolute ones are noted.
    """

    grid_size: int = 512
    # sign changes / zeros
    zero_tol: float = 1e-9
    zero_floor: float = 1e-12  # absolute, used when no scale is supplied
    cluster_tol: float = 1e-6
    deriv_tol: float = 1e-6
    bisect_tol: float = 1e-10
    # integration
    ode_rtol: float = 1e-11
    ode_atol: float = 1e-13
    # certificates
    monodromy_tol: float = 1e-7
    nullspace_tol: float = 1e-9
    gram_cond_max: float = 1e10
    extremal_points: int = 16
    disconjugacy_samples: int = 64
    band_fraction: float = 0.25
    # geometry
    degenerate_tol: float = 1e-7
    lift_residual_tol: float = 1e-6
    contact_delta: float = 1e-2  # fraction of total affine length
    contact_levels: int = 10
    contact_floor: float = 1e-13
    contact_cap: int = 10
    contact_slope_tol: float = 0.35
    crossing_delta: float = 1e-3  # fraction of total affine length

    def replace(self, **changes) -> "NumericSettings":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_SETTINGS = NumericSettings()


def load_settings(path: str | os.PathLike | None = None, **overrides) -> NumericSettings:
    """Read a YAML mapping of overrides; falls back to ``$SIXVERTEX_SETTINGS``."""
    if path is None:
        path = os.environ.get(SETTINGS_ENV) or None
    values: dict = {}
    if path is not None:
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ValueError(f"settings file {path} must contain a mapping")
        values.update(data)
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name: f.type for f in fields(NumericSettings)}
    unknown = set(values) - set(known)
    if unknown:
        raise ValueError(f"unknown settings: {sorted(unknown)}")
    cast = {}
    for key, value in values.items():
        default = getattr(DEFAULT_SETTINGS, key)
        cast[key] = type(default)(value)
    return DEFAULT_SETTINGS.replace(**cast)
