"""Spectra of leaky curves: thresholds, bands and bound states."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Union

from ._core import (
    ConfigError,
    DomainError,
    ModelError,
    NumericalError,
    bessel_k0,
    bessel_k1,
    k_ratio,
)
from . import _core

__all__ = [
    "ConfigError",
    "DomainError",
    "ModelError",
    "NumericalError",
    "bessel_k0",
    "bessel_k1",
    "k_ratio",
    "run",
    "find_threshold",
    "line_mu_max",
    "band_structure",
    "square_array_band_bottom",
]

Config = Union[Mapping[str, Any], str, Path]


def _text(obj: Config) -> str:
    if isinstance(obj, Path):
        return obj.read_text()
    if isinstance(obj, str):
        return obj
    return json.dumps(obj)


def run(command: str, config: Config) -> dict:
    """Run a subcommand; JSON outputs come back parsed, CSV outputs as text."""
    raw = _core.run(command, _text(config))
    files = {
        name: json.loads(body) if name.endswith(".json") else body
        for name, body in raw["files"].items()
    }
    return {"summary": raw["summary"], "config_hash": raw["config_hash"], "files": files}


def find_threshold(curve: Config, alpha: float, n_cell: int = 32) -> dict:
    return _core.find_threshold(_text(curve), alpha, n_cell)


def line_mu_max(curve: Config, alpha: float, kappa: float, window_W: float, n: int) -> float:
    return _core.line_mu_max(_text(curve), alpha, kappa, window_W, n)


def band_structure(curve: Config, alpha: float, n_theta: int = 17, bands: int = 2, n_cell: int = 32) -> dict:
    return _core.band_structure(_text(curve), alpha, n_theta, bands, n_cell)


square_array_band_bottom = _core.square_array_band_bottom
