"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math
import re
import statistics
import time

import numpy as np
import pytest
from oracles import central_difference, oracle_decision, oracle_rbf_fit, pooled_gamma

from frontline.cli import run
from frontline.core import Bounds, serialize_timeline
from frontline.field import area_fractions, evaluate_grid, extract_isolines
from frontline.kernels import KernelSpec
from frontline.render import render_ghost
from frontline.svm import TrainingSet, decision, decision_values, fit, gradient
from frontline.synthetic import COLLAPSE_T, bundled_match
from frontline.timeline import FrontlineConfig, process_timeline, series_from_results

UNIT = Bounds(0.0, 0.0, 1.0, 1.0)
SYMMETRIC = Bounds(-2.0, -2.0, 2.0, 2.0)


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")
        return ok
    return emit


def _instance(rng, n_lo=4, n_hi=10):
    n = int(rng.integers(n_lo, n_hi + 1))
    x = rng.random((n, 2))
    y = np.array([1.0] * (n // 2) + [-1.0] * (n - n // 2))
    rng.shuffle(y)
    return x, y, rng.uniform(0.25, 1.0, n)


def test_c1_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    g = np.linspace(0.0, 1.0, 16)
    grid = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
    worst, mismatches = 0.0, 0
    start = time.perf_counter()
    for _ in range(200):
        x, y, w = _instance(rng)
        gamma = pooled_gamma(x)
        alpha_o, b_o, obj_o = oracle_rbf_fit(x, y, w, 10.0, gamma)
        m = fit(TrainingSet(x, y, w, 10.0), KernelSpec("rbf"))
        worst = max(worst, abs(m.dual_objective - obj_o) / abs(obj_o))
        f_o = oracle_decision(x, y, alpha_o, b_o, gamma, grid)
        f = decision_values(m, grid)
        sure = np.abs(f_o) >= 1e-6
        mismatches += int(np.sum(np.sign(f[sure]) != np.sign(f_o[sure])))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and mismatches == 0 and elapsed < 10.0
    assert report(1, ok, f"worst relative objective gap {worst:.2e}, sign mismatches "
                         f"{mismatches}, {elapsed:.2f} s for 200 instances")


def test_c2_two_point_closed_form(report):
    m = fit(TrainingSet([(-1.0, 0.0), (1.0, 0.0)], [1, -1], C=10.0), KernelSpec("rbf", gamma=1.0))
    expected = 1.0 / (1.0 - math.exp(-4.0))
    alpha_err = float(np.abs(m.alphas - expected).max())
    mid = abs(decision(m, (0.0, 0.0)))
    ok = len(m.alphas) == 2 and alpha_err <= 1e-6 and abs(m.bias) <= 1e-9 and mid <= 1e-9
    assert report(2, ok, f"alpha error {alpha_err:.1e}, |b| {abs(m.bias):.1e}, "
                         f"|f(midpoint)| {mid:.1e}")


def test_c3_invariance_suite(report):
    rng = np.random.default_rng(77)
    swap = trans = scale = 0.0
    for _ in range(50):
        x, y, w = _instance(rng)
        q = rng.random((64, 2))
        base = fit(TrainingSet(x, y, w), KernelSpec("rbf"))
        f = decision_values(base, q)
        mirrored = fit(TrainingSet(x, -y, w), KernelSpec("rbf"))
        swap = max(swap, float(np.abs(decision_values(mirrored, q) + f).max()))
        k = KernelSpec("rbf", gamma=base.kernel.gamma)
        t = rng.uniform(-1000, 1000, 2)
        moved = fit(TrainingSet(x + t, y, w), k)
        trans = max(trans, float(np.abs(decision_values(moved, q + t) - f).max()))
        s = float(np.exp(rng.uniform(-5, 5)))
        scaled = fit(TrainingSet(s * x, y, w), KernelSpec("rbf"))
        scale = max(scale, float(np.abs(decision_values(scaled, s * q) - f).max()))
    ok = max(swap, trans, scale) <= 1e-9
    assert report(3, ok, f"max deviation: label swap {swap:.1e}, translation {trans:.1e}, "
                         f"uniform scaling {scale:.1e} over 50 instances each")


def test_c4_gradient_check(report):
    rng = np.random.default_rng(4)
    h = 1e-4 * UNIT.width
    worst, checked = 0.0, 0
    for _ in range(20):
        x, y, w = _instance(rng, 6, 12)
        m = fit(TrainingSet(x, y, w), KernelSpec("rbf"))
        for q in rng.random((100, 2)):
            g = gradient(m, q)
            if np.linalg.norm(g) < 1e-8:
                continue
            fd = central_difference(lambda p: decision(m, p), q, h)
            worst = max(worst, float(np.linalg.norm(g - fd) / np.linalg.norm(g)))
            checked += 1
    ok = worst < 1e-4 and checked > 0
    assert report(4, ok, f"worst relative error {worst:.2e} over {checked} points")


def test_c5_contour_residual(report):
    rng = np.random.default_rng(5)
    worst, vertices = 0.0, 0
    for _ in range(20):
        x, y, w = _instance(rng, 6, 12)
        m = fit(TrainingSet(x, y, w), KernelSpec("rbf"))
        field = evaluate_grid(m, UNIT, 64, 64)
        spread = float(field.values.max() - field.values.min())
        for level in (0.0, 0.75, -0.75, 1.25, -1.25):
            for line in extract_isolines(field, level):
                r = np.abs(field.interpolate(line.vertices) - level) / spread
                worst = max(worst, float(r.max()))
                vertices += len(line.vertices)
    ok = worst <= 1e-6 and vertices > 0
    assert report(5, ok, f"worst residual {worst:.1e} x field range over {vertices} vertices")


@pytest.fixture(scope="module")
def fixture_results():
    return process_timeline(bundled_match(), FrontlineConfig())


def _crossing(m):
    lo, hi = -1.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if decision(m, (mid, 0.0)) > 0 else (lo, mid)
    return 0.5 * (lo + hi)


def test_c6_area_properties(report, fixture_results):
    sums_exact = all(r.fractions[0] + r.fractions[1] == 1.0 for r in fixture_results if r.ok)
    two = fit(TrainingSet([(-1.0, 0.0), (1.0, 0.0)], [1, -1], C=10.0), KernelSpec("rbf", gamma=1.0))
    symmetric = area_fractions(two, SYMMETRIC, 1024)
    # saturated regime: C*w1 below the free closed-form alpha caps both multipliers
    x = [(-1.0, 0.0), (1.0, 0.0)]
    crossings, oracle_ok = [], True
    for w1 in (1.0, 0.1, 0.095, 0.09, 0.085):
        m = fit(TrainingSet(x, [1, -1], [w1, 1.0], 10.0), KernelSpec("rbf", gamma=1.0))
        a_o, b_o, _ = oracle_rbf_fit(x, [1, -1], [w1, 1.0], 10.0, 1.0)
        oracle_ok &= bool(np.abs(m.alphas - a_o).max() <= 1e-8 and abs(m.bias - b_o) <= 1e-7)
        crossings.append(_crossing(m))
    monotone = all(b < a for a, b in zip(crossings, crossings[1:]))
    ok = sums_exact and symmetric == (0.5, 0.5) and monotone and oracle_ok
    assert report(6, ok, f"exact sums {sums_exact}, two-point {symmetric}, zero crossing "
                         f"{' > '.join(f'{c:+.4f}' for c in crossings)}, oracle agrees {oracle_ok}")


def test_c7_runtime(report):
    rng = np.random.default_rng(7)
    x = np.vstack([rng.normal((300, 500), 80, (15, 2)), rng.normal((700, 500), 80, (15, 2))])
    y = np.array([1.0] * 15 + [-1.0] * 15)
    bounds = Bounds(0, 0, 1000, 1000)
    times = []
    for _ in range(25):
        t0 = time.perf_counter()
        m = fit(TrainingSet(x, y, C=10.0), KernelSpec("rbf"))
        area_fractions(m, bounds, 1024)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times) * 1e3
    assert report(7, med < 20.0, f"median {med:.2f} ms (min {min(times) * 1e3:.2f} ms) "
                                 f"for a 30-unit fit plus 1024 samples")


def test_c8_end_to_end_fixture(report, fixture_results, tmp_path):
    series = series_from_results(fixture_results)
    ok_times = [r.t for r in fixture_results if r.ok]
    span = ok_times[-1] - ok_times[0]
    ghost = render_ghost(fixture_results, 2.0)
    layers = ghost.count('<g class="ghost"')
    expected_layers = math.floor(span / 2.0) + 1
    again = process_timeline(bundled_match(), FrontlineConfig())
    same_api = (render_ghost(again, 2.0) == ghost
                and series_from_results(again).to_text() == series.to_text())
    match = tmp_path / "match.txt"
    match.write_text(serialize_timeline(bundled_match()))
    blobs = []
    for k in range(2):
        prefix = str(tmp_path / f"r{k}")
        assert run(["ghost", "--in", str(match), "--out", prefix, "--grid", "64x64"]) == 0
        assert run(["series", "--in", str(match), "--out", prefix, "--grid", "8x8"]) == 0
        blobs.append(((tmp_path / f"r{k}_ghost.svgx").read_bytes(),
                      (tmp_path / f"r{k}_series.csv").read_bytes()))
    identical = same_api and blobs[0] == blobs[1]
    km_ok = abs(series.key_moment - COLLAPSE_T) <= 4.0
    ok = km_ok and layers == expected_layers and identical
    assert report(8, ok, f"key moment {series.key_moment:g} s (scripted {COLLAPSE_T:g}), "
                         f"ghost layers {layers} (expected {expected_layers}), "
                         f"byte-identical reruns {identical}")


def test_c9_kernel_comparison(report, tmp_path):
    match = tmp_path / "match.txt"
    match.write_text(serialize_timeline(bundled_match()))
    expected = {"linear": "#ffffff", "poly": "#e53935", "rbf": "#1e88e5"}
    found = {}
    for flag in expected:
        prefix = str(tmp_path / flag)
        assert run(["frame", "--in", str(match), "--at", "30", "--kernel", flag,
                    "--out", prefix, "--grid", "128x128"]) == 0
        doc = (tmp_path / f"{flag}_frame_30.svgx").read_text()
        found[flag] = sorted(set(re.findall(r'class="center"[^>]*stroke="(#[0-9a-f]{6})"', doc)))
    ok = all(found[k] == [v] for k, v in expected.items())
    assert report(9, ok, "centre strokes " + ", ".join(f"{k}={'/'.join(v) or 'none'}"
                                                      for k, v in found.items()))
