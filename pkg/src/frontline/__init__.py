"""Frontlines and map control for team-based games from per-frame unit positions."""

from .core import (Bounds, ConvergenceError, DegenerateGeometryError, Frame, FrontlineError,
                   ParseError, Timeline, UnitSnapshot, WeightLookupMap, lookup_bilinear,
                   parse_timeline, parse_weight_map, serialize_grid, serialize_timeline)
from .field import (FrontlineSet, Polyline, ScalarField, area_fractions, clip_back_facing,
                    evaluate_grid, extract_isolines, frontlines)
from .kernels import (KernelSpec, gamma_scale, kernel_eval, pair_weight,
                      weighted_kernel_eval)
from .svm import SvmModel, TrainingSet, decision, decision_values, fit, fit_one_vs_rest, gradient
from .timeline import (AreaSeries, FrameResult, FrontlineConfig, WeightMode, area_series,
                       compute_weights, key_moment, process_frame, process_timeline)

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "ConvergenceError",
    "DegenerateGeometryError",
    "Frame",
    "FrontlineError",
    "ParseError",
    "Timeline",
    "UnitSnapshot",
    "WeightLookupMap",
    "lookup_bilinear",
    "parse_timeline",
    "parse_weight_map",
    "serialize_grid",
    "serialize_timeline",
    "FrontlineSet",
    "Polyline",
    "ScalarField",
    "area_fractions",
    "clip_back_facing",
    "evaluate_grid",
    "extract_isolines",
    "frontlines",
    "KernelSpec",
    "gamma_scale",
    "kernel_eval",
    "pair_weight",
    "weighted_kernel_eval",
    "SvmModel",
    "TrainingSet",
    "decision",
    "decision_values",
    "fit",
    "fit_one_vs_rest",
    "gradient",
    "AreaSeries",
    "FrameResult",
    "FrontlineConfig",
    "WeightMode",
    "area_series",
    "compute_weights",
    "key_moment",
    "process_frame",
    "process_timeline",
]
