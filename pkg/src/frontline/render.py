"""SVG output: single-frame frontlines, ghost-line overlays, area charts."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .core import Bounds, UnitSnapshot
from .field import CLIPPED, FrontlineSet, Polyline
from .timeline import AreaSeries, FrameResult

KERNEL_COLORS = {
    "linear": "#ffffff",
    "polynomial": "#e53935",
    "rbf": "#1e88e5",
    "weighted_rbf": "#fb8c00",
}
CENTER_DASH = "8,5"
OFFSET_DASH = "1.5,3.5"


@dataclass(frozen=True)
class RenderStyle:
    team_colors: tuple[str, ...] = ("#43a047", "#1e88e5", "#fdd835", "#8e24aa", "#00acc1")
    center_color: Optional[str] = None  # None: color by kernel kind
    ghost_base_alpha: float = 0.9
    canvas_px: tuple[int, int] = (800, 800)
    show_units: bool = True
    show_influence: bool = False
    background_color: str = "#263238"
    stroke_width: float = 2.0
    marker_px: float = 7.0
    influence_cells: int = 64

    def __post_init__(self):
        if not (0 < self.ghost_base_alpha <= 1):
            raise ValueError("ghost_base_alpha must be in (0, 1]")
        if min(self.canvas_px) < 64:
            raise ValueError("canvas must be at least 64 px on each side")
        if len(self.team_colors) < 2:
            raise ValueError("need at least two team colors")

    def team_color(self, rank: int) -> str:
        return self.team_colors[rank % len(self.team_colors)]


class CanvasTransform:
    """Affine map from map coordinates to pixels; y is flipped."""

    def __init__(self, bounds: Bounds, width: int, height: int):
        self.bounds = bounds
        self.width = width
        self.height = height
        self.sx = width / bounds.width
        self.sy = height / bounds.height

    def to_px(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        px = (pts[..., 0] - self.bounds.min_x) * self.sx
        py = self.height - (pts[..., 1] - self.bounds.min_y) * self.sy
        return np.stack([px, py], axis=-1)

    def to_map(self, px) -> np.ndarray:
        px = np.asarray(px, dtype=float)
        x = self.bounds.min_x + px[..., 0] / self.sx
        y = self.bounds.min_y + (self.height - px[..., 1]) / self.sy
        return np.stack([x, y], axis=-1)


def _n(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _path_d(tr: CanvasTransform, line: Polyline) -> str:
    px = tr.to_px(line.vertices)
    d = "M" + " L".join(f"{_n(x)},{_n(y)}" for x, y in px)
    return d + " Z" if line.closed else d


class SvgDocument:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def add(self, element: str):
        self.parts.append(element)

    def render(self) -> str:
        head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        return "\n".join([head, *self.parts, "</svg>"]) + "\n"


def _team_rank(teams: Sequence[int], team: int) -> int:
    return list(teams).index(team) if team in teams else len(teams)


def _influence(doc: SvgDocument, tr: CanvasTransform, fs: FrontlineSet, style: RenderStyle,
               colors: tuple[str, str]):
    f = fs.field
    n = style.influence_cells
    b = f.bounds
    xs = b.min_x + (np.arange(n) + 0.5) * (b.width / n)
    ys = b.min_y + (np.arange(n) + 0.5) * (b.height / n)
    gx, gy = np.meshgrid(xs, ys)
    vals = f.interpolate(np.stack([gx, gy], axis=-1))
    cw, ch = tr.width / n, tr.height / n
    doc.add('<g class="influence">')
    for j in range(n):
        for i in range(n):
            v = vals[j, i]
            op = min(1.0, abs(v) / 1.5) * 0.45
            if op < 0.01:
                continue
            color = colors[0] if v > 0 else colors[1]
            y = tr.height - (j + 1) * ch
            doc.add(f'<rect x="{_n(i * cw)}" y="{_n(y)}" width="{_n(cw)}" height="{_n(ch)}" '
                    f'fill="{color}" fill-opacity="{op:.3f}"/>')
    doc.add("</g>")


def _offset_paths(doc, tr, fs: FrontlineSet, style, colors, alpha=1.0):
    for p in fs.offsets:
        if p.retention == CLIPPED:
            continue
        color = colors[0] if p.team_side > 0 else colors[1]
        op = p.fade_alpha * alpha
        doc.add(f'<path class="offset" d="{_path_d(tr, p)}" fill="none" stroke="{color}" '
                f'stroke-width="{style.stroke_width:g}" stroke-dasharray="{OFFSET_DASH}" '
                f'stroke-linecap="round" stroke-opacity="{op:.3f}"/>')


def _center_paths(doc, tr, lines: Sequence[Polyline], color: str, style):
    for p in lines:
        doc.add(f'<path class="center" d="{_path_d(tr, p)}" fill="none" stroke="{color}" '
                f'stroke-width="{style.stroke_width * 1.25:g}" stroke-dasharray="{CENTER_DASH}"/>')


def _unit_marker(tr: CanvasTransform, u: UnitSnapshot, color: str, r: float) -> str:
    x, y = tr.to_px(u.pos)
    uid = quoteattr(u.id)
    if not u.alive:
        return (f'<path class="unit dead" data-id={uid} d="M{_n(x - r)},{_n(y - r)} '
                f'L{_n(x + r)},{_n(y + r)} M{_n(x - r)},{_n(y + r)} L{_n(x + r)},{_n(y - r)}" '
                f'stroke="{color}" stroke-width="2" fill="none"/>')
    if u.unit_class == "light":
        h = r * 1.15
        pts = f"{_n(x)},{_n(y - h)} {_n(x + h)},{_n(y + h * 0.8)} {_n(x - h)},{_n(y + h * 0.8)}"
        return (f'<polygon class="unit light" data-id={uid} points="{pts}" fill="{color}" '
                f'stroke="#000000" stroke-width="1"/>')
    if u.unit_class == "heavy":
        return (f'<rect class="unit heavy" data-id={uid} x="{_n(x - r)}" y="{_n(y - r)}" '
                f'width="{_n(2 * r)}" height="{_n(2 * r)}" fill="{color}" '
                f'stroke="#000000" stroke-width="1"/>')
    return (f'<circle class="unit" data-id={uid} cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" '
            f'fill="{color}" stroke="#000000" stroke-width="1"/>')


def _units(doc, tr, fr: FrameResult, style):
    doc.add('<g class="units">')
    teams = fr.teams
    for u in fr.frame.units:
        doc.add(_unit_marker(tr, u, style.team_color(_team_rank(teams, u.team)), style.marker_px))
    doc.add("</g>")


def _center_color(fr: FrameResult, style: RenderStyle) -> str:
    if style.center_color:
        return style.center_color
    model = fr.model if fr.model is not None else fr.per_team[0].model
    return KERNEL_COLORS[model.kernel.kind]


def _frame_layers(doc, tr, fr: FrameResult, style, with_units=True, with_offsets=True):
    if fr.per_team:
        for rank, tf in enumerate(fr.per_team):
            color = style.team_color(rank)
            if with_offsets:
                fs = tf.frontlines
                # per-team model: positive side is the team itself
                only_team = FrontlineSet(fs.center, tuple(p for p in fs.offsets if p.team_side > 0),
                                         fs.field)
                _offset_paths(doc, tr, only_team, style, (color, color))
            _center_paths(doc, tr, tf.frontlines.center, color, style)
    else:
        colors = (style.team_color(0), style.team_color(1))
        if with_offsets:
            _offset_paths(doc, tr, fr.frontlines, style, colors)
        _center_paths(doc, tr, fr.frontlines.center, _center_color(fr, style), style)
    if with_units and style.show_units:
        _units(doc, tr, fr, style)


def _bounds_of(fr: FrameResult) -> Bounds:
    fs = fr.frontlines if fr.frontlines is not None else fr.per_team[0].frontlines
    return fs.field.bounds


def _start(style: RenderStyle, background: Optional[str], tr: CanvasTransform) -> SvgDocument:
    w, h = style.canvas_px
    doc = SvgDocument(w, h)
    doc.add(f'<rect class="backdrop" x="0" y="0" width="{w}" height="{h}" '
            f'fill="{style.background_color}"/>')
    if background:
        doc.add(f'<image class="background" x="0" y="0" width="{w}" height="{h}" '
                f'xlink:href={quoteattr(background)} preserveAspectRatio="none"/>')
    return doc


def render_frame(fr: FrameResult, style: RenderStyle = RenderStyle(),
                 background: Optional[str] = None) -> str:
    """One frame: background, influence ramp, offsets, centre line, units."""
    if not fr.ok:
        raise ValueError(f"frame t={fr.t:g} has no frontline: {fr.reason}")
    tr = CanvasTransform(_bounds_of(fr), *style.canvas_px)
    doc = _start(style, background, tr)
    if style.show_influence and fr.frontlines is not None:
        _influence(doc, tr, fr.frontlines, style, (style.team_color(0), style.team_color(1)))
    _frame_layers(doc, tr, fr, style)
    return doc.render()


def select_ghost_frames(results: Sequence[FrameResult], interval: float = 2.0) -> list[FrameResult]:
    """Nearest ok frame to each tick ``t0 + k*interval``; duplicates dropped.

    At least two ticks are placed (start and one interval later) so a span
    shorter than the interval still shows its first and last frame.
    """
    if not interval > 0:
        raise ValueError("ghost interval must be positive")
    ok = [r for r in results if r.ok]
    if not ok:
        raise ValueError("no frames with a frontline to draw")
    times = [r.t for r in ok]
    t0 = times[0]
    span = times[-1] - t0
    n_ticks = max(1, math.floor(span / interval + 1e-9)) + 1
    chosen: list[int] = []
    for k in range(n_ticks):
        tick = t0 + k * interval
        i = bisect.bisect_left(times, tick)
        if i == len(times):
            i -= 1
        elif i > 0 and tick - times[i - 1] <= times[i] - tick:
            i -= 1
        if not chosen or chosen[-1] != i:
            chosen.append(i)
    return [ok[i] for i in chosen]


def ghost_opacities(n: int, base_alpha: float) -> list[float]:
    if n == 1:
        return [base_alpha]
    return [base_alpha * (0.15 + 0.85 * k / (n - 1)) for k in range(n)]


def render_ghost(results: Sequence[FrameResult], interval: float = 2.0,
                 style: RenderStyle = RenderStyle(), background: Optional[str] = None) -> str:
    """Centre lines of frames spaced ``interval`` apart, older ones fainter."""
    layers = select_ghost_frames(results, interval)
    newest = layers[-1]
    tr = CanvasTransform(_bounds_of(newest), *style.canvas_px)
    doc = _start(style, background, tr)
    for fr, op in zip(layers, ghost_opacities(len(layers), style.ghost_base_alpha)):
        doc.add(f'<g class="ghost" data-t="{fr.t:g}" opacity="{op:.4f}">')
        _frame_layers(doc, tr, fr, style, with_units=False, with_offsets=False)
        doc.add("</g>")
    doc.add(f'<g class="newest" data-t="{newest.t:g}">')
    if newest.frontlines is not None:
        _offset_paths(doc, tr, newest.frontlines, style, (style.team_color(0), style.team_color(1)))
    if style.show_units:
        _units(doc, tr, newest, style)
    doc.add("</g>")
    return doc.render()


def render_area_chart(series: AreaSeries, style: RenderStyle = RenderStyle()) -> str:
    """Team area fractions over time; the key moment gets a dot on both lines."""
    if not series.entries:
        raise ValueError("empty area series")
    w, h = style.canvas_px
    left, right, top, bottom = 56.0, 16.0, 16.0, 40.0
    pw, ph = w - left - right, h - top - bottom
    data = np.array(series.entries, dtype=float)
    t0, t1 = data[0, 0], data[-1, 0]
    tspan = t1 - t0 if t1 > t0 else 1.0

    def px(t, f):
        return left + (t - t0) / tspan * pw, top + (1.0 - f) * ph

    doc = SvgDocument(w, h)
    doc.add(f'<rect class="backdrop" x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>')
    doc.add('<g class="axes" stroke="#444444" stroke-width="1" fill="none">')
    doc.add(f'<path d="M{_n(left)},{_n(top)} L{_n(left)},{_n(top + ph)} L{_n(left + pw)},{_n(top + ph)}"/>')
    for f in (0.0, 0.5, 1.0):
        _, y = px(t0, f)
        doc.add(f'<path d="M{_n(left - 4)},{_n(y)} L{_n(left)},{_n(y)}"/>')
    doc.add("</g>")
    doc.add('<g class="labels" font-family="sans-serif" font-size="11" fill="#222222">')
    for f in (0.0, 0.5, 1.0):
        _, y = px(t0, f)
        doc.add(f'<text x="{_n(left - 8)}" y="{_n(y + 4)}" text-anchor="end">{f:.1f}</text>')
    for t in (t0, t1):
        x, _ = px(t, 0.0)
        doc.add(f'<text x="{_n(x)}" y="{_n(top + ph + 16)}" text-anchor="middle">'
                f'{escape(f"{t:g}")} s</text>')
    doc.add("</g>")
    for col, name in ((1, "team0"), (2, "team1")):
        color = style.team_color(col - 1)
        pts = [px(t, f) for t, f in zip(data[:, 0], data[:, col])]
        if len(pts) == 1:
            x, y = pts[0]
            doc.add(f'<circle class="point {name}" cx="{_n(x)}" cy="{_n(y)}" r="3" fill="{color}"/>')
        else:
            d = "M" + " L".join(f"{_n(x)},{_n(y)}" for x, y in pts)
            doc.add(f'<path class="series {name}" d="{d}" fill="none" stroke="{color}" '
                    f'stroke-width="2"/>')
    if series.key_moment is not None:
        k = int(np.flatnonzero(data[:, 0] == series.key_moment)[0])
        for col, name in ((1, "team0"), (2, "team1")):
            x, y = px(data[k, 0], data[k, col])
            doc.add(f'<circle class="key-moment {name}" data-t="{series.key_moment:g}" '
                    f'cx="{_n(x)}" cy="{_n(y)}" r="5" fill="{style.team_color(col - 1)}" '
                    f'stroke="#000000" stroke-width="1"/>')
    return doc.render()
