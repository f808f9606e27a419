"""Curve and ODE spec files (YAML, validated against the bundled JSON schemas)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .curves import ClosedCurve
from .errors import SpecError
from .periodic import PeriodicFunction
from .sturm import LinearPeriodicODE


def load_schema(name: str) -> dict:
    text = resources.files("sixvertex").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def _read(path, schema: str) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    try:
        jsonschema.validate(data, load_schema(schema))
    except jsonschema.ValidationError as exc:
        raise SpecError(f"{path}: {exc.message}") from exc
    return data


def _check_grid(grid_size: int, harmonics: int, path) -> None:
    if grid_size & (grid_size - 1):
        raise SpecError(f"{path}: grid_size {grid_size} is not a power of two")
    if grid_size < 4 * harmonics:
        raise SpecError(f"{path}: grid_size {grid_size} < 4 x {harmonics} harmonics")


@dataclass(frozen=True)
class CurveSpec:
    name: str
    fourier_x: list
    fourier_y: list
    grid_size: int = 512

    def curve(self) -> ClosedCurve:
        return ClosedCurve.from_fourier(self.fourier_x, self.fourier_y, self.grid_size)

    def as_dict(self) -> dict:
        return dict(name=self.name, grid_size=self.grid_size,
                    fourier_x=self.fourier_x, fourier_y=self.fourier_y)


def load_curve_spec(path, grid_size: int | None = None) -> CurveSpec:
    data = _read(path, "curve_spec")
    n = grid_size or data.get("grid_size", 512)
    harmonics = max(len(data["fourier_x"]), len(data["fourier_y"])) - 1
    _check_grid(n, max(harmonics, 1), path)
    return CurveSpec(data["name"], data["fourier_x"], data["fourier_y"], n)


@dataclass(frozen=True)
class ODESpec:
    name: str
    order: int
    coefficients: list
    grid_size: int = 512
    g: list | None = None

    def ode(self) -> LinearPeriodicODE:
        funcs = []
        for c in self.coefficients:
            if isinstance(c, (int, float)):
                funcs.append(PeriodicFunction.constant(c, self.grid_size))
            else:
                funcs.append(PeriodicFunction.from_coeffs(c, self.grid_size))
        return LinearPeriodicODE(tuple(funcs))

    def g_function(self) -> PeriodicFunction | None:
        if self.g is None:
            return None
        return PeriodicFunction.from_coeffs(self.g, self.grid_size)


def load_ode_spec(path, grid_size: int | None = None) -> ODESpec:
    data = _read(path, "ode_spec")
    if len(data["coefficients"]) != data["order"]:
        raise SpecError(f"{path}: order {data['order']} needs {data['order']} coefficients, "
                        f"got {len(data['coefficients'])}")
    n = grid_size or data.get("grid_size", 512)
    lengths = [len(c) for c in data["coefficients"] if isinstance(c, list)]
    if data.get("g"):
        lengths.append(len(data["g"]))
    _check_grid(n, max(max(lengths, default=1) - 1, 1), path)
    return ODESpec(data["name"], data["order"], data["coefficients"], n, data.get("g"))

