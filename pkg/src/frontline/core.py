"""Domain types, telemetry and weight-map file formats, bilinear grid lookup."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Union

import numpy as np

#: Floor applied to weights so that no unit ends up with a zero box bound.
WEIGHT_FLOOR = 1e-3


class FrontlineError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(FrontlineError, ValueError):
    """Malformed telemetry or grid input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} at line {line}"
        super().__init__(message)


class DegenerateGeometryError(FrontlineError, ValueError):
    """Input points do not span a usable region (e.g. all coincident)."""


class ConvergenceError(FrontlineError, RuntimeError):
    """The dual solver ran out of its iteration budget."""

    def __init__(self, message: str, violation: float):
        self.violation = violation
        super().__init__(message)


@dataclass(frozen=True)
class Bounds:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        vals = (self.min_x, self.min_y, self.max_x, self.max_y)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("bounds must be finite")
        if not (self.max_x > self.min_x and self.max_y > self.min_y):
            raise ValueError(f"degenerate bounds {vals}")

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)


@dataclass(frozen=True)
class UnitSnapshot:
    id: str
    team: int
    pos: tuple[float, float]
    health_fraction: float = 1.0
    alive: bool = True
    unit_class: str = ""

    def __post_init__(self):
        if not (0.0 <= self.health_fraction <= 1.0):
            raise ValueError(
                f"unit {self.id!r}: health_fraction {self.health_fraction} outside [0, 1]")
        if not all(math.isfinite(c) for c in self.pos):
            raise ValueError(f"unit {self.id!r}: non-finite position {self.pos}")
        if self.team < 0:
            raise ValueError(f"unit {self.id!r}: negative team index {self.team}")


@dataclass(frozen=True)
class Frame:
    t: float
    units: tuple[UnitSnapshot, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"invalid frame timestamp {self.t}")
        if not self.units:
            raise ValueError(f"frame at t={self.t} has no units")
        seen = set()
        for u in self.units:
            if u.id in seen:
                raise ValueError(f"duplicate unit id {u.id!r} in frame t={self.t}")
            seen.add(u.id)

    @property
    def living(self) -> tuple[UnitSnapshot, ...]:
        return tuple(u for u in self.units if u.alive)


@dataclass(frozen=True)
class Timeline:
    frames: tuple[Frame, ...]
    map_bounds: Bounds

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        for a, b in zip(self.frames, self.frames[1:]):
            if not b.t > a.t:
                raise ValueError(f"non-increasing timestamp {b.t} after {a.t}")

    @property
    def span(self) -> float:
        if not self.frames:
            return 0.0
        return self.frames[-1].t - self.frames[0].t


class Grid:
    """Regular grid of values over a rectangle; node (i, j) sits at
    ``min_x + i*dx, min_y + j*dy`` and nodes span the bounds inclusively.

    ``values`` has shape ``(ny, nx)``; row 0 is the ``min_y`` edge.
    """

    def __init__(self, bounds: Bounds, values):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise ValueError(f"grid must be at least 2x2, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.setflags(write=False)
        self.bounds = bounds
        self.values = values

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> tuple[float, float]:
        return self.bounds.width / (self.nx - 1), self.bounds.height / (self.ny - 1)

    def node(self, i: int, j: int) -> tuple[float, float]:
        b = self.bounds
        return (b.min_x + i * (b.width / (self.nx - 1)), b.min_y + j * (b.height / (self.ny - 1)))

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        b = self.bounds
        xs = b.min_x + np.arange(self.nx) * (b.width / (self.nx - 1))
        ys = b.min_y + np.arange(self.ny) * (b.height / (self.ny - 1))
        return xs, ys

    def _cell_coords(self, pts):
        b = self.bounds
        u = (pts[..., 0] - b.min_x) / b.width * (self.nx - 1)
        v = (pts[..., 1] - b.min_y) / b.height * (self.ny - 1)
        u = np.clip(u, 0.0, self.nx - 1)
        v = np.clip(v, 0.0, self.ny - 1)
        i0 = np.minimum(np.floor(u).astype(int), self.nx - 2)
        j0 = np.minimum(np.floor(v).astype(int), self.ny - 2)
        return i0, j0, u - i0, v - j0

    def interpolate(self, pts) -> np.ndarray:
        """Bilinear interpolation at ``pts`` (shape ``(..., 2)``), clamped to bounds."""
        pts = np.asarray(pts, dtype=float)
        i0, j0, fx, fy = self._cell_coords(pts)
        g = self.values
        v00 = g[j0, i0]
        v10 = g[j0, i0 + 1]
        v01 = g[j0 + 1, i0]
        v11 = g[j0 + 1, i0 + 1]
        return ((1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10
                + (1 - fx) * fy * v01 + fx * fy * v11)

    def interpolate_gradient(self, pts) -> np.ndarray:
        """Gradient of the bilinear surface inside the containing cell.

        Components along an axis where the query is clamped are zero. On
        cell edges the one-sided value from the cell chosen by
        ``interpolate`` is returned.
        """
        pts = np.asarray(pts, dtype=float)
        b = self.bounds
        i0, j0, fx, fy = self._cell_coords(pts)
        g = self.values
        v00 = g[j0, i0]
        v10 = g[j0, i0 + 1]
        v01 = g[j0 + 1, i0]
        v11 = g[j0 + 1, i0 + 1]
        dx, dy = self.spacing
        gx = ((1 - fy) * (v10 - v00) + fy * (v11 - v01)) / dx
        gy = ((1 - fx) * (v01 - v00) + fx * (v11 - v10)) / dy
        inside_x = (pts[..., 0] >= b.min_x) & (pts[..., 0] <= b.max_x)
        inside_y = (pts[..., 1] >= b.min_y) & (pts[..., 1] <= b.max_y)
        return np.stack([np.where(inside_x, gx, 0.0), np.where(inside_y, gy, 0.0)], axis=-1)


class WeightLookupMap(Grid):
    """Per-map grid of non-negative weights (e.g. average advance speed)."""

    def __init__(self, bounds: Bounds, values):
        super().__init__(bounds, values)
        if np.any(self.values < 0):
            raise ValueError("negative weight in lookup map")

    @classmethod
    def constant(cls, bounds: Bounds, value: float, nx: int = 2, ny: int = 2) -> "WeightLookupMap":
        return cls(bounds, np.full((ny, nx), float(value)))


def lookup_bilinear(grid: Grid, pos) -> float:
    """Bilinearly interpolated grid value at ``pos``; out-of-bounds queries clamp."""
    return float(grid.interpolate(np.asarray(pos, dtype=float)))


# --- text formats -----------------------------------------------------------

Source = Union[str, bytes, IO]


def _read_lines(source: Source) -> list[str]:
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    return text.splitlines()


def _parse_bounds(line: str, lineno: int) -> Bounds:
    parts = line.split()
    if len(parts) != 5 or parts[0] != "bounds":
        raise ParseError("expected 'bounds <min_x> <min_y> <max_x> <max_y>'", lineno)
    try:
        return Bounds(*(float(p) for p in parts[1:]))
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def _parse_unit(record: str, lineno: int) -> UnitSnapshot:
    fields = record.split(",")
    if len(fields) != 7:
        raise ParseError(f"unit record {record!r} needs 7 fields, got {len(fields)}", lineno)
    uid, team, x, y, health, alive, unit_class = fields
    try:
        team_i = int(team)
        pos = (float(x), float(y))
        health_f = float(health)
    except ValueError:
        raise ParseError(f"unit {uid!r}: bad numeric field", lineno) from None
    if alive not in ("0", "1"):
        raise ParseError(f"unit {uid!r}: alive flag must be 0 or 1", lineno)
    try:
        return UnitSnapshot(uid, team_i, pos, health_f, alive == "1", unit_class)
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None


def parse_timeline(source: Source) -> Timeline:
    """Read the line-delimited telemetry format.

    Line 1 is ``bounds <min_x> <min_y> <max_x> <max_y>``; every further
    non-blank line is ``frame <t> <unit>|<unit>|...`` with units encoded as
    ``id,team,x,y,health_fraction,alive,unit_class``.
    """
    lines = _read_lines(source)
    if not lines or not lines[0].startswith("bounds"):
        raise ParseError("missing map bounds header", 1)
    bounds = _parse_bounds(lines[0], 1)
    frames: list[Frame] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(None, 2)
        if len(parts) < 3 or parts[0] != "frame":
            raise ParseError("expected 'frame <t> <units>'", lineno)
        try:
            t = float(parts[1])
        except ValueError:
            raise ParseError(f"bad timestamp {parts[1]!r}", lineno) from None
        if not (math.isfinite(t) and t >= 0):
            raise ParseError(f"invalid timestamp {parts[1]!r}", lineno)
        if frames and not t > frames[-1].t:
            raise ParseError("non-increasing timestamp", lineno)
        units = [_parse_unit(r, lineno) for r in parts[2].strip().split("|")]
        ids = set()
        for u in units:
            if u.id in ids:
                raise ParseError(f"duplicate unit id {u.id!r}", lineno)
            ids.add(u.id)
        frames.append(Frame(t, tuple(units)))
    return Timeline(tuple(frames), bounds)


def _fmt(v: float) -> str:
    return repr(float(v))


def serialize_timeline(timeline: Timeline) -> str:
    b = timeline.map_bounds
    out = [f"bounds {_fmt(b.min_x)} {_fmt(b.min_y)} {_fmt(b.max_x)} {_fmt(b.max_y)}"]
    for fr in timeline.frames:
        recs = "|".join(
            f"{u.id},{u.team},{_fmt(u.pos[0])},{_fmt(u.pos[1])},{_fmt(u.health_fraction)},"
            f"{int(u.alive)},{u.unit_class}"
            for u in fr.units)
        out.append(f"frame {_fmt(fr.t)} {recs}")
    return "\n".join(out) + "\n"


def parse_grid_values(source: Source) -> tuple[Bounds, np.ndarray]:
    lines = [ln for ln in _read_lines(source)]
    if not lines:
        raise ParseError("empty grid file", 1)
    bounds = _parse_bounds(lines[0], 1)
    if len(lines) < 2:
        raise ParseError("missing 'grid <nx> <ny>' line", 2)
    parts = lines[1].split()
    if len(parts) != 3 or parts[0] != "grid":
        raise ParseError("expected 'grid <nx> <ny>'", 2)
    try:
        nx, ny = int(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError("grid dimensions must be integers", 2) from None
    if nx < 2 or ny < 2:
        raise ParseError("grid dimensions must be at least 2", 2)
    values: list[float] = []
    for lineno, line in enumerate(lines[2:], start=3):
        try:
            values.extend(float(v) for v in line.split())
        except ValueError:
            raise ParseError("bad grid value", lineno) from None
    if len(values) != nx * ny:
        raise ParseError(f"expected {nx * ny} values, got {len(values)}")
    arr = np.array(values, dtype=float).reshape(ny, nx)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite grid value")
    return bounds, arr


def parse_weight_map(source: Source) -> WeightLookupMap:
    bounds, arr = parse_grid_values(source)
    if np.any(arr < 0):
        raise ParseError("negative weight")
    return WeightLookupMap(bounds, arr)


def serialize_grid(grid: Grid) -> str:
    b = grid.bounds
    out = [f"bounds {_fmt(b.min_x)} {_fmt(b.min_y)} {_fmt(b.max_x)} {_fmt(b.max_y)}",
           f"grid {grid.nx} {grid.ny}"]
    for row in grid.values:
        out.append(" ".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def read_text(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def positions(units: Iterable[UnitSnapshot]) -> np.ndarray:
    return np.array([u.pos for u in units], dtype=float).reshape(-1, 2)
