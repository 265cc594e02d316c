"""Fatou-component connectivity for singularly perturbed rational maps."""
from __future__ import annotations

__version__ = "0.1.0"

from .mapcore import (  # noqa: E402
    INF,
    Indeterminate,
    InvalidParams,
    MapParams,
    critical_numerator_poly,
    derivative,
    eval_perturbed,
    eval_unperturbed,
    zeros_poly,
)

__all__ = [
    "__version__",
    "INF",
    "Indeterminate",
    "InvalidParams",
    "MapParams",
    "critical_numerator_poly",
    "derivative",
    "eval_perturbed",
    "eval_unperturbed",
    "zeros_poly",
]
