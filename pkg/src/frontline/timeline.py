"""Per-frame pipeline over a match: weights, fits, frontlines, area over time."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import (WEIGHT_FLOOR, Bounds, Frame, FrontlineError, Timeline,
                   WeightLookupMap, positions)
from .field import (DEFAULT_AREA_SAMPLES, DEFAULT_GRID, DEFAULT_LEVELS, FrontlineSet,
                    area_fractions, frontlines)
from .kernels import KernelSpec
from .svm import DEFAULT_C, SvmModel, TrainingSet, check_geometry, fit, fit_one_vs_rest

WEIGHT_KINDS = ("uniform", "health", "map_lookup", "kernel_map")

OK = "ok"
NO_FRONTLINE = "no_frontline"


@dataclass(frozen=True)
class WeightMode:
    kind: str = "uniform"
    map: Optional[WeightLookupMap] = None

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight mode {self.kind!r}")
        if self.kind in ("map_lookup", "kernel_map") and self.map is None:
            raise ValueError(f"weight mode {self.kind!r} needs a lookup map")


@dataclass(frozen=True)
class FrontlineConfig:
    kernel: KernelSpec = field(default_factory=KernelSpec)
    C: float = DEFAULT_C
    levels: tuple[float, ...] = DEFAULT_LEVELS
    clip: str = "distance"
    clip_threshold: float = 2.0
    grid: tuple[int, int] = DEFAULT_GRID
    area_samples: int = DEFAULT_AREA_SAMPLES
    weights: WeightMode = field(default_factory=WeightMode)
    ovr: bool = False

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if any(not lv > 0 for lv in self.levels):
            raise ValueError("levels must be positive")
        k = math.isqrt(self.area_samples) if self.area_samples > 0 else 0
        if k * k != self.area_samples or k == 0:
            raise ValueError(f"area samples {self.area_samples} is not a perfect square")


@dataclass(frozen=True)
class TeamFrontline:
    team: int
    model: SvmModel
    frontlines: FrontlineSet


@dataclass(frozen=True)
class FrameResult:
    """Outcome for one frame.

    A binary ``ok`` result carries ``model``, ``frontlines`` and ``fractions``
    (ordered lower team index first). A one-vs-rest ``ok`` result carries
    ``per_team`` instead and no fractions.
    """
    t: float
    status: str
    frame: Frame
    teams: tuple[int, ...] = ()
    model: Optional[SvmModel] = None
    frontlines: Optional[FrontlineSet] = None
    fractions: Optional[tuple[float, float]] = None
    per_team: tuple[TeamFrontline, ...] = ()
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass(frozen=True)
class AreaSeries:
    entries: tuple[tuple[float, float, float], ...]
    key_moment: Optional[float] = None

    def to_text(self) -> str:
        rows = ["t,team0,team1"]
        rows += [f"{t:.6f},{a:.6f},{b:.6f}" for t, a, b in self.entries]
        if self.key_moment is not None:
            rows.append(f"# key_moment {self.key_moment:.6f}")
        return "\n".join(rows) + "\n"


def compute_weights(frame: Frame, mode: WeightMode) -> np.ndarray:
    """Sample weights for the frame's living units, in unit order."""
    living = frame.living
    if mode.kind in ("uniform", "kernel_map"):
        return np.ones(len(living))
    if mode.kind == "health":
        return np.maximum(WEIGHT_FLOOR, np.array([u.health_fraction for u in living]))
    return np.maximum(WEIGHT_FLOOR, mode.map.interpolate(positions(living)))


def _no_frontline(frame: Frame, reason: str, teams=()) -> FrameResult:
    return FrameResult(frame.t, NO_FRONTLINE, frame, tuple(teams), reason=reason)


def process_frame(frame: Frame, config: FrontlineConfig, bounds: Bounds) -> FrameResult:
    living = frame.living
    teams = tuple(sorted({u.team for u in living}))
    if len(teams) < 2:
        return _no_frontline(frame, "single team", teams)
    if len(teams) > 2 and not config.ovr:
        return _no_frontline(frame, f"{len(teams)} teams; enable one-vs-rest", teams)

    kernel = config.kernel
    if config.weights.kind == "kernel_map":
        kernel = replace(kernel, kind="weighted_rbf", weight_map=config.weights.map)
    x = positions(living)
    w = compute_weights(frame, config.weights)
    team_of = np.array([u.team for u in living])
    lines = dict(levels=config.levels, grid=config.grid, clip=config.clip,
                 clip_threshold=config.clip_threshold)
    try:
        check_geometry(x)
        if len(teams) > 2:
            models = fit_one_vs_rest(x, team_of, kernel, config.C, w)
            per_team = tuple(TeamFrontline(t, m, frontlines(m, bounds, **lines))
                             for t, m in zip(teams, models))
            return FrameResult(frame.t, OK, frame, teams, per_team=per_team)
        labels = np.where(team_of == teams[0], 1.0, -1.0)
        model = fit(TrainingSet(x, labels, w, config.C), kernel)
        fs = frontlines(model, bounds, **lines)
        fractions = area_fractions(model, bounds, config.area_samples)
    except (FrontlineError, ValueError) as exc:
        return _no_frontline(frame, str(exc), teams)
    return FrameResult(frame.t, OK, frame, teams, model, fs, fractions)


def process_timeline(timeline: Timeline, config: FrontlineConfig,
                     workers: int = 1) -> list[FrameResult]:
    """Process every frame independently; results come back in time order."""
    def run(fr):
        return process_frame(fr, config, timeline.map_bounds)

    if workers <= 1:
        return [run(fr) for fr in timeline.frames]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, timeline.frames))


def key_moment(entries: Sequence[tuple[float, float, float]], window: int = 1) -> float:
    """Time of the largest change in team-0 area over ``window`` consecutive entries.

    Returns the later timestamp of the winning pair; the earliest pair wins ties.
    """
    if len(entries) < 2:
        raise ValueError("key moment needs at least two entries")
    if window < 1:
        raise ValueError("window must be at least 1")
    window = min(window, len(entries) - 1)
    best, best_t = -1.0, entries[window][0]
    for k in range(window, len(entries)):
        d = abs(entries[k][1] - entries[k - window][1])
        if d > best:
            best, best_t = d, entries[k][0]
    return best_t


def series_from_results(results: Sequence[FrameResult], window: int = 1) -> AreaSeries:
    entries = tuple((r.t, r.fractions[0], r.fractions[1])
                    for r in results if r.ok and r.fractions is not None)
    km = key_moment(entries, window) if len(entries) >= 2 else None
    return AreaSeries(entries, km)


def area_series(timeline: Timeline, config: FrontlineConfig, window: int = 1,
                workers: int = 1) -> AreaSeries:
    return series_from_results(process_timeline(timeline, config, workers), window)
