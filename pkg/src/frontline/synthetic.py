"""Scripted synthetic match used as a demo input and end-to-end test fixture.

Two 15-unit teams start on opposite sides of a 1000x1000 map and advance
toward each other. At ``COLLAPSE_T`` team 1 loses its northern flank (a
third of its units) at once and the rest fall back; its survivors are picked off one by one until
the team is gone at ``ELIMINATED_T``.
"""

from __future__ import annotations

import sys
from importlib import resources

import numpy as np

from .core import Bounds, Frame, Timeline, UnitSnapshot, parse_timeline, serialize_timeline

N_FRAMES = 120
TEAM_SIZE = 15
COLLAPSE_T = 60.0
ELIMINATED_T = 100.0
BOUNDS = Bounds(0.0, 0.0, 1000.0, 1000.0)
CLASSES = ("heavy", "medium", "light")


def make_synthetic_match(seed: int = 7) -> Timeline:
    rng = np.random.default_rng(seed)
    ys = np.linspace(120.0, 880.0, TEAM_SIZE)
    start = {
        0: np.column_stack([rng.uniform(120, 220, TEAM_SIZE), ys + rng.uniform(-30, 30, TEAM_SIZE)]),
        1: np.column_stack([rng.uniform(780, 880, TEAM_SIZE), ys + rng.uniform(-30, 30, TEAM_SIZE)]),
    }
    hold = {0: rng.uniform(380, 430, TEAM_SIZE), 1: rng.uniform(570, 620, TEAM_SIZE)}
    classes = {team: [CLASSES[k % 3] for k in range(TEAM_SIZE)] for team in (0, 1)}
    phase = rng.uniform(0, 2 * np.pi, (2, TEAM_SIZE))

    # team 1 deaths: the northern flank at the collapse, then the rest (south
    # first) spread out until elimination
    death_t = np.full(TEAM_SIZE, np.inf)
    death_t[TEAM_SIZE - 5:] = COLLAPSE_T
    death_t[:TEAM_SIZE - 5] = np.linspace(COLLAPSE_T + 8, ELIMINATED_T, TEAM_SIZE - 5).round()
    death_0 = np.full(TEAM_SIZE, np.inf)
    death_0[rng.choice(TEAM_SIZE, 2, replace=False)] = (48.0, 83.0)

    frames = []
    for step in range(N_FRAMES):
        t = float(step)
        units = []
        for team in (0, 1):
            s0 = start[team]
            # advance to the hold line over 40 s
            a = min(t / 40.0, 1.0)
            x = s0[:, 0] + a * (hold[team] - s0[:, 0])
            if t > COLLAPSE_T:
                push = min((t - COLLAPSE_T) / 20.0, 1.0)
                x = x + 160.0 * push  # team 0 pushes, team 1 falls back
            y = s0[:, 1] + 12.0 * np.sin(0.15 * t + phase[team])
            x = x + 6.0 * np.cos(0.11 * t + phase[team])
            deaths = death_t if team == 1 else death_0
            for k in range(TEAM_SIZE):
                alive = t < deaths[k]
                pos = (float(np.clip(x[k], 0, 1000)), float(np.clip(y[k], 0, 1000)))
                if not alive:
                    # a wreck stays where the unit fell
                    pos = _frozen_pos(frames, f"{'ab'[team]}{k}", pos)
                health = 0.0 if not alive else round(max(0.05, 1.0 - 0.004 * t * (k % 4) / 3), 4)
                units.append(UnitSnapshot(f"{'ab'[team]}{k}", team, pos, health, alive,
                                          classes[team][k]))
        frames.append(Frame(t, tuple(units)))
    return Timeline(tuple(frames), BOUNDS)


def _frozen_pos(frames, uid, fallback):
    for fr in reversed(frames):
        for u in fr.units:
            if u.id == uid and u.alive:
                return u.pos
    return fallback


def bundled_match() -> Timeline:
    text = resources.files("frontline").joinpath("data/synthetic_match.txt").read_text("utf-8")
    return parse_timeline(text)


if __name__ == "__main__":
    sys.stdout.write(serialize_timeline(make_synthetic_match()))
