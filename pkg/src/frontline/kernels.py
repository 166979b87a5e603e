"""Kernel functions and data-driven gamma scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .core import WEIGHT_FLOOR, DegenerateGeometryError, WeightLookupMap

KINDS = ("linear", "polynomial", "rbf", "weighted_rbf")
SCALE = "scale"


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: Union[float, str] = SCALE
    degree: int = 3
    coef0: float = 0.0
    weight_map: Optional[WeightLookupMap] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if isinstance(self.gamma, str):
            if self.gamma != SCALE:
                raise ValueError(f"gamma must be a positive number or {SCALE!r}")
        elif not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("degree must be a positive integer")
        if self.kind == "weighted_rbf" and self.weight_map is None:
            raise ValueError("weighted_rbf needs a weight map")

    @property
    def resolved(self) -> bool:
        return not isinstance(self.gamma, str)

    def resolve(self, points) -> "KernelSpec":
        """Return a copy with the ``scale`` sentinel replaced by ``gamma_scale(points)``."""
        if self.resolved:
            return self
        return replace(self, gamma=gamma_scale(points))


def gamma_scale(points) -> float:
    """1 / (2 * Var) with the variance pooled over both coordinate axes.

    Scaling all points by ``s`` scales the result by ``1 / s**2``, which keeps
    RBF similarities independent of the map's units.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise DegenerateGeometryError("gamma scaling needs at least two points")
    var = float(np.var(pts.ravel()))
    if not var > 0 or np.all(pts == pts[0]):
        raise DegenerateGeometryError("all points coincide; cannot scale gamma")
    return 1.0 / (2.0 * var)


def _sqdist(x, y):
    dx = x[..., 0] - y[..., 0]
    dy = x[..., 1] - y[..., 1]
    return dx * dx + dy * dy


def _dot(x, y):
    return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1]


def pair_weight(wmap: WeightLookupMap, x, x2):
    """Symmetric pair weight: floored mean of the map values at both endpoints."""
    a = wmap.interpolate(np.asarray(x, dtype=float))
    b = wmap.interpolate(np.asarray(x2, dtype=float))
    return np.maximum(WEIGHT_FLOOR, 0.5 * (a + b))


def kernel_values(spec: KernelSpec, x, x2, w_pair=None):
    """Elementwise kernel between broadcastable point arrays of shape ``(..., 2)``."""
    if not spec.resolved:
        raise ValueError("kernel gamma must be resolved before evaluation")
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    g = spec.gamma
    if spec.kind == "linear":
        return _dot(x, x2)
    if spec.kind == "polynomial":
        return (g * _dot(x, x2) + spec.coef0) ** spec.degree
    if spec.kind == "rbf":
        return np.exp(-g * _sqdist(x, x2))
    if w_pair is None:
        w_pair = pair_weight(spec.weight_map, x, x2)
    return np.exp(-g * w_pair * _sqdist(x, x2))


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    return float(kernel_values(spec, x, x2))


def weighted_kernel_eval(spec: KernelSpec, x, x2, w_pair: float) -> float:
    """RBF with the squared distance scaled by an explicit pair weight."""
    if not (math.isfinite(w_pair) and w_pair > 0):
        raise ValueError(f"pair weight must be positive and finite, got {w_pair}")
    if not spec.resolved:
        raise ValueError("kernel gamma must be resolved before evaluation")
    return float(np.exp(-spec.gamma * w_pair * _sqdist(np.asarray(x, float), np.asarray(x2, float))))


def kernel_matrix(spec: KernelSpec, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    return kernel_values(spec, a[:, None, :], b[None, :, :])


def kernel_gradient(spec: KernelSpec, centers, x) -> np.ndarray:
    """d/dx K(center_i, x) for every center, shape ``(n_centers, 2)``.

    For weighted_rbf the pair weight's own dependence on ``x`` (through the
    bilinear map) is included, so the result is exact inside map cells.
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    x = np.asarray(x, dtype=float)
    g = spec.gamma
    if spec.kind == "linear":
        return c.copy()
    if spec.kind == "polynomial":
        base = g * _dot(c, x) + spec.coef0
        return (spec.degree * g * base ** (spec.degree - 1))[:, None] * c
    d = x - c
    sq = _sqdist(x, c)
    if spec.kind == "rbf":
        k = np.exp(-g * sq)
        return (-2.0 * g * k)[:, None] * d
    wm = spec.weight_map
    raw = 0.5 * (wm.interpolate(c) + wm.interpolate(x))
    w = np.maximum(WEIGHT_FLOOR, raw)
    k = np.exp(-g * w * sq)
    dw = np.where(raw > WEIGHT_FLOOR, 1.0, 0.0)[:, None] * (0.5 * wm.interpolate_gradient(x))
    return (-g * k)[:, None] * (2.0 * w[:, None] * d + sq[:, None] * dw)
