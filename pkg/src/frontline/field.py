"""Decision-function grids, isoline extraction, back-facing clipping, area control."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import Bounds, Grid
from .svm import SvmModel, decision_values, gradients

DEFAULT_GRID = (256, 256)
DEFAULT_LEVELS = (0.75,)
LIGHT_VEHICLE_LEVELS = (1.25,)
DEFAULT_AREA_SAMPLES = 1024
CLIP_POLICIES = ("distance", "gradient", "none")

KEPT, FADED, CLIPPED = "kept", "faded", "clipped"
# A vertex is back-facing only when its descent direction points more than
# 120 degrees away from the centre line; flank vertices of a loop count as facing.
FACING_COS = -0.5


class ScalarField(Grid):
    """Decision function sampled on grid nodes (an influence map)."""


@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray
    closed: bool
    level: float
    team_side: int = 0
    retention: str = KEPT
    fade_alpha: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) < 2:
            raise ValueError("polyline needs at least two vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1, axis=0)
        return v[:-1], v[1:]


@dataclass(frozen=True)
class FrontlineSet:
    center: tuple[Polyline, ...]
    offsets: tuple[Polyline, ...]
    field: ScalarField

    def visible_offsets(self) -> list[Polyline]:
        return [p for p in self.offsets if p.retention != CLIPPED]


def evaluate_grid(model: SvmModel, bounds: Bounds, nx: int, ny: int) -> ScalarField:
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 nodes per axis")
    dx = bounds.width / (nx - 1)
    dy = bounds.height / (ny - 1)
    xs = bounds.min_x + np.arange(nx) * dx
    ys = bounds.min_y + np.arange(ny) * dy
    gx, gy = np.meshgrid(xs, ys)
    vals = decision_values(model, np.column_stack([gx.ravel(), gy.ravel()]))
    return ScalarField(bounds, vals.reshape(ny, nx))


# Marching squares. Corner bits: 1 bottom-left, 2 bottom-right, 4 top-right,
# 8 top-left. Edges: B(ottom), R(ight), T(op), L(eft).
_SEGMENTS = {
    1: (("B", "L"),), 2: (("B", "R"),), 3: (("L", "R"),), 4: (("R", "T"),),
    6: (("B", "T"),), 7: (("L", "T"),), 8: (("L", "T"),), 9: (("B", "T"),),
    11: (("R", "T"),), 12: (("L", "R"),), 13: (("B", "R"),), 14: (("B", "L"),),
}
# saddles, keyed by (case, centre above level)
_SADDLES = {
    (5, True): (("B", "R"), ("T", "L")), (5, False): (("B", "L"), ("R", "T")),
    (10, True): (("B", "L"), ("R", "T")), (10, False): (("B", "R"), ("T", "L")),
}


def _edge_key(edge: str, i: int, j: int) -> tuple:
    if edge == "B":
        return ("h", i, j)
    if edge == "T":
        return ("h", i, j + 1)
    if edge == "L":
        return ("v", i, j)
    return ("v", i + 1, j)


def _crossings(values, level, keys) -> np.ndarray:
    """Grid-index coordinates of the level crossing on each edge in ``keys``."""
    horiz = np.array([k[0] == "h" for k in keys])
    i = np.array([k[1] for k in keys])
    j = np.array([k[2] for k in keys])
    v0 = values[j, i]
    v1 = np.where(horiz, values[j, np.minimum(i + 1, values.shape[1] - 1)],
                  values[np.minimum(j + 1, values.shape[0] - 1), i])
    t = (level - v0) / (v1 - v0)
    return np.column_stack([np.where(horiz, i + t, i), np.where(horiz, j, j + t)])


def _chains(segments: list[tuple]) -> list[tuple[list, bool]]:
    adj: dict = {}
    for s, (a, b) in enumerate(segments):
        adj.setdefault(a, []).append(s)
        adj.setdefault(b, []).append(s)
    used = [False] * len(segments)

    def walk(start_key, s):
        keys = [start_key]
        cur = start_key
        while s is not None:
            used[s] = True
            a, b = segments[s]
            cur = b if a == cur else a
            keys.append(cur)
            s = next((t for t in adj[cur] if not used[t]), None)
        return keys

    chains = []
    for s, (a, b) in enumerate(segments):
        if used[s]:
            continue
        if len(adj[a]) == 1:
            chains.append((walk(a, s), False))
        elif len(adj[b]) == 1:
            chains.append((walk(b, s), False))
    for s, (a, _) in enumerate(segments):
        if not used[s]:
            keys = walk(a, s)
            closed = keys[0] == keys[-1]
            chains.append((keys[:-1] if closed else keys, closed))
    return chains


def extract_isolines(field: Grid, level: float, team_side: int = 0) -> list[Polyline]:
    """Contours of the bilinear surface at ``level`` via marching squares.

    Nodes strictly above the level are inside; saddle cells are resolved by
    the mean of their four corners.
    """
    vals = field.values
    above = vals > level
    case = (above[:-1, :-1] * 1 + above[:-1, 1:] * 2
            + above[1:, 1:] * 4 + above[1:, :-1] * 8)
    segments = []
    for j, i in zip(*np.nonzero((case != 0) & (case != 15))):
        c = int(case[j, i])
        if c in (5, 10):
            centre = 0.25 * (vals[j, i] + vals[j, i + 1] + vals[j + 1, i] + vals[j + 1, i + 1])
            pairs = _SADDLES[(c, bool(centre > level))]
        else:
            pairs = _SEGMENTS[c]
        for e0, e1 in pairs:
            segments.append((_edge_key(e0, i, j), _edge_key(e1, i, j)))

    b = field.bounds
    dx, dy = field.spacing
    lines = []
    for keys, closed in _chains(segments):
        idx = _crossings(vals, level, keys)
        pts = np.column_stack([b.min_x + idx[:, 0] * dx, b.min_y + idx[:, 1] * dy])
        # crossings exactly on a node show up once per incident edge
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if closed and len(pts) > 1 and np.all(pts[0] == pts[-1]):
            pts = pts[:-1]
        if len(pts) < 2:
            continue
        lines.append(Polyline(pts, closed and len(pts) > 2, float(level), team_side))
    return lines


def _nearest_on_polylines(points: np.ndarray, lines: Sequence[Polyline]):
    """Distance from each point to the centre lines, and the nearest location.

    The nearest vertex comes from a KD-tree; the exact foot point is then
    taken on the (up to two) segments incident to that vertex.
    """
    verts = np.concatenate([ln.vertices for ln in lines])
    prev_idx, next_idx = [], []
    offset = 0
    for ln in lines:
        n = len(ln.vertices)
        idx = np.arange(offset, offset + n)
        if ln.closed:
            prev_idx.append(np.roll(idx, 1))
            next_idx.append(np.roll(idx, -1))
        else:
            prev_idx.append(np.concatenate([[idx[0]], idx[:-1]]))
            next_idx.append(np.concatenate([idx[1:], [idx[-1]]]))
        offset += n
    prev_idx = np.concatenate(prev_idx)
    next_idx = np.concatenate(next_idx)

    _, k = cKDTree(verts).query(points)
    best_d = np.full(len(points), np.inf)
    best_p = verts[k].copy()
    for other in (prev_idx[k], next_idx[k]):
        a, b = verts[k], verts[other]
        d = b - a
        dd = (d * d).sum(1)
        t = np.clip(((points - a) * d).sum(1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        proj = a + t[:, None] * d
        dist = np.sqrt(((points - proj) ** 2).sum(1))
        better = dist < best_d
        best_d[better] = dist[better]
        best_p[better] = proj[better]
    return best_d, best_p


def clip_back_facing(fs: FrontlineSet, model: SvmModel, policy: str = "distance",
                     threshold: float = 2.0) -> FrontlineSet:
    """Flag offset components that sit behind their team rather than ahead of it.

    ``distance`` clips a component whose closest vertex is farther from every
    centre line than ``threshold`` times the median centre-vertex distance to
    the nearest support vector. ``gradient`` fades a component by the fraction
    of its vertices whose descent direction (toward f = 0) heads for the
    nearest centre line, and clips it when that fraction is below 0.5.
    """
    if policy not in CLIP_POLICIES:
        raise ValueError(f"unknown clip policy {policy!r}")
    if not threshold > 0:
        raise ValueError("clip threshold must be positive")
    if policy == "none" or not fs.center or not fs.offsets:
        return fs

    out = []
    if policy == "distance":
        centre_pts = np.concatenate([c.vertices for c in fs.center])
        sv = model.support_vectors
        to_sv = np.sqrt(((centre_pts[:, None, :] - sv[None, :, :]) ** 2).sum(-1)).min(1)
        limit = threshold * float(np.median(to_sv))
        for p in fs.offsets:
            dist, _ = _nearest_on_polylines(p.vertices, fs.center)
            if dist.min() > limit:
                out.append(replace(p, retention=CLIPPED, fade_alpha=0.0))
            else:
                out.append(replace(p, retention=KEPT, fade_alpha=1.0))
    else:
        for p in fs.offsets:
            _, near = _nearest_on_polylines(p.vertices, fs.center)
            side = 1.0 if p.level > 0 else -1.0
            descent = -side * gradients(model, p.vertices)
            to_centre = near - p.vertices
            norm = np.linalg.norm(descent, axis=1) * np.linalg.norm(to_centre, axis=1)
            cos = np.where(norm > 0, (descent * to_centre).sum(1) / np.where(norm > 0, norm, 1.0), 1.0)
            facing = cos > FACING_COS
            frac = float(facing.mean())
            if frac < 0.5:
                out.append(replace(p, retention=CLIPPED, fade_alpha=frac))
            elif frac < 1.0:
                out.append(replace(p, retention=FADED, fade_alpha=frac))
            else:
                out.append(replace(p, retention=KEPT, fade_alpha=1.0))
    return replace(fs, offsets=tuple(out))


def frontlines(model: SvmModel, bounds: Bounds, levels: Sequence[float] = DEFAULT_LEVELS,
               grid: tuple[int, int] = DEFAULT_GRID, clip: str = "distance",
               clip_threshold: float = 2.0) -> FrontlineSet:
    """Centre line plus ``+-level`` offsets for each level, clipped per ``clip``."""
    field = evaluate_grid(model, bounds, *grid)
    centre = tuple(extract_isolines(field, 0.0, 0))
    offsets = []
    for lv in levels:
        if not lv > 0:
            raise ValueError("offset levels must be positive")
        offsets.extend(extract_isolines(field, lv, 1))
        offsets.extend(extract_isolines(field, -lv, -1))
    fs = FrontlineSet(centre, tuple(offsets), field)
    return clip_back_facing(fs, model, clip, clip_threshold)


def area_sample_points(bounds: Bounds, n_samples: int = DEFAULT_AREA_SAMPLES) -> np.ndarray:
    k = math.isqrt(n_samples) if n_samples > 0 else 0
    if n_samples <= 0 or k * k != n_samples:
        raise ValueError(f"area samples {n_samples} is not a perfect square")
    xs = bounds.min_x + (np.arange(k) + 0.5) * (bounds.width / k)
    ys = bounds.min_y + (np.arange(k) + 0.5) * (bounds.height / k)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def area_fractions(model: SvmModel, bounds: Bounds,
                   n_samples: int = DEFAULT_AREA_SAMPLES) -> tuple[float, float]:
    """Share of cell-centre samples with f > 0 (ties count for the minus side)."""
    pts = area_sample_points(bounds, n_samples)
    plus = int(np.count_nonzero(decision_values(model, pts) > 0)) / n_samples
    return plus, 1.0 - plus
