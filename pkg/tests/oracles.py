"""Independent reference computations used by the test-suite.

Nothing here imports the solver; kernels are re-derived from their closed
forms so the oracle cannot share a bug with the code under test.
"""

import numpy as np


def rbf_gram(x, gamma):
    x = np.asarray(x, dtype=float)
    d = x[:, None, :] - x[None, :, :]
    return np.exp(-gamma * (d ** 2).sum(-1))


def pooled_gamma(x):
    x = np.asarray(x, dtype=float)
    vals = x.ravel()
    return 1.0 / (2.0 * np.mean((vals - vals.mean()) ** 2))


def project(v, y, upper):
    """Euclidean projection onto {0 <= a <= upper, y'a = 0}.

    The projection is clip(v - lam*y, 0, upper) for the lam that zeroes
    y'a; that function of lam is piecewise linear and non-increasing, so we
    bracket the root among the breakpoints and interpolate.
    """
    bps = np.sort(np.concatenate([y * v, y * (v - upper)]))
    vals = np.clip(v[None, :] - bps[:, None] * y[None, :], 0.0, upper) @ y
    k = int(np.argmax(vals <= 0))
    if k == 0 or vals[k] == 0:
        lam = bps[k]
    else:
        flo, fhi = vals[k - 1], vals[k]
        lam = bps[k - 1] + (bps[k] - bps[k - 1]) * flo / (flo - fhi)
    return np.clip(v - lam * y, 0.0, upper)


def dual_objective(alpha, Q):
    return alpha.sum() - 0.5 * alpha @ Q @ alpha


def projected_gradient_ascent(K, y, upper, max_iter=100_000, tol=1e-13):
    """Accelerated projected gradient ascent on the box/equality constrained dual.

    Step size is 1/L with L the largest eigenvalue of Q. Momentum restarts
    whenever the objective decreases; iteration stops once the projected
    gradient step moves the iterate by less than ``tol`` (scaled by the box).
    """
    y = np.asarray(y, dtype=float)
    upper = np.asarray(upper, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    step = 1.0 / np.linalg.eigvalsh(Q).max()
    scale = upper.max()
    a = project(np.zeros(len(y)), y, upper)
    z = a
    t = 1.0
    prev = dual_objective(a, Q)
    restarted = False
    for _ in range(max_iter):
        a_next = project(z + step * (1.0 - Q @ z), y, upper)
        obj = dual_objective(a_next, Q)
        if obj < prev:
            if restarted:  # even a plain step cannot ascend: rounding floor
                break
            z, t, restarted = a, 1.0, True
            continue
        restarted = False
        moved = np.abs(a_next - a).max()
        t_next = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = a_next + ((t - 1) / t_next) * (a_next - a)
        a, t, prev = a_next, t_next, obj
        if moved <= tol * scale:
            plain = project(a + step * (1.0 - Q @ a), y, upper)
            if np.abs(plain - a).max() <= tol * scale:
                break
    return a, dual_objective(a, Q)


def oracle_bias(alpha, K, y, upper, eps=1e-7):
    g = K @ (alpha * y)
    free = (alpha > eps * upper) & (alpha < upper * (1 - eps))
    if free.any():
        return float(np.mean(y[free] - g[free]))
    r = y - g
    lo_mask = ((y > 0) & (alpha <= eps * upper)) | ((y < 0) & (alpha >= upper * (1 - eps)))
    hi_mask = ((y > 0) & (alpha >= upper * (1 - eps))) | ((y < 0) & (alpha <= eps * upper))
    lo = r[lo_mask].max(initial=-np.inf)
    hi = r[hi_mask].min(initial=np.inf)
    return float(0.5 * (lo + hi))


def oracle_rbf_fit(x, y, weights, C, gamma):
    """(alpha, bias, objective, gamma) of the weighted dual via projected ascent."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    upper = C * np.asarray(weights, dtype=float)
    K = rbf_gram(x, gamma)
    alpha, obj = projected_gradient_ascent(K, y, upper)
    b = oracle_bias(alpha, K, y, upper)
    return alpha, b, obj


def oracle_decision(x, y, alpha, b, gamma, q):
    q = np.asarray(q, dtype=float).reshape(-1, 2)
    d = q[:, None, :] - np.asarray(x)[None, :, :]
    return np.exp(-gamma * (d ** 2).sum(-1)) @ (alpha * y) + b


def central_difference(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g
