"""Weighted soft-margin SVM: SMO dual solver, decision function, gradient.

The dual being solved is

    max_a  sum(a) - 1/2 * sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t.   0 <= a_i <= C * w_i,   sum_i a_i y_i = 0

where ``w_i`` is a per-sample weight multiplying the regularization ``C``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ConvergenceError, DegenerateGeometryError
from .kernels import KernelSpec, kernel_gradient, kernel_matrix, kernel_values

log = logging.getLogger(__name__)

DEFAULT_C = 10.0
KKT_TOL = 1e-3
MAX_ITER = 10_000
_TAU = 1e-12


@dataclass(frozen=True)
class TrainingSet:
    samples: np.ndarray
    labels: np.ndarray
    sample_weights: Optional[np.ndarray] = None
    C: float = DEFAULT_C

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float).reshape(-1, 2)
        y = np.asarray(self.labels, dtype=float).ravel()
        w = (np.ones(len(x)) if self.sample_weights is None
             else np.asarray(self.sample_weights, dtype=float).ravel())
        if not (len(x) == len(y) == len(w)):
            raise ValueError("samples, labels and weights must have equal length")
        if len(x) < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if not (np.any(y > 0) and np.any(y < 0)):
            raise ValueError("both classes must be present")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("sample weights must be positive")
        if not (np.isfinite(self.C) and self.C > 0):
            raise ValueError("C must be positive")
        for name, arr in (("samples", x), ("labels", y), ("sample_weights", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def upper_bounds(self) -> np.ndarray:
        return self.C * self.sample_weights


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    sv_labels: np.ndarray
    alphas: np.ndarray
    bias: float
    kernel: KernelSpec
    dual_objective: float
    sv_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    n_iter: int = 0
    kkt_violation: float = 0.0

    @property
    def coef(self) -> np.ndarray:
        return self.alphas * self.sv_labels


def _kkt_violation(alpha, upper, y, g, b) -> float:
    yf = y * (g + b)
    at_zero = alpha <= 0
    at_upper = alpha >= upper
    free = ~(at_zero | at_upper)
    viol = np.zeros_like(alpha)
    viol[at_zero] = np.maximum(0.0, 1.0 - yf[at_zero])
    viol[at_upper] = np.maximum(0.0, yf[at_upper] - 1.0)
    viol[free] = np.abs(yf[free] - 1.0)
    return float(viol.max(initial=0.0))


def _bias(alpha, upper, y, g) -> float:
    free = (alpha > 0) & (alpha < upper)
    if np.any(free):
        return float(np.mean(y[free] - g[free]))
    r = y - g
    lower_side = ((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= upper))
    upper_side = ((y > 0) & (alpha >= upper)) | ((y < 0) & (alpha <= 0))
    lo = r[lower_side].max(initial=-np.inf)
    hi = r[upper_side].min(initial=np.inf)
    if np.isfinite(lo) and np.isfinite(hi):
        return float(0.5 * (lo + hi))
    return float(lo if np.isfinite(lo) else hi)


def _smo(K, y, upper, tol, max_iter):
    """Pairwise coordinate ascent with second-order working-pair selection."""
    n = len(y)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    for it in range(max_iter + 1):
        v = -y * G
        up = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < upper))
        if not (up.any() and low.any()):
            return alpha, it, 0.0
        i = int(np.argmax(np.where(up, v, -np.inf)))
        m = v[i]
        M = np.where(low, v, np.inf).min()
        if m - M < tol:
            return alpha, it, m - M
        if it == max_iter:
            break
        cand = low & (v < m)
        gap = m - v
        curv = diag[i] + diag - 2.0 * K[i]
        curv = np.where(curv > 0, curv, _TAU)
        gain = np.where(cand, -(gap * gap) / curv, np.inf)
        j = int(np.argmin(gain))

        ai, aj = alpha[i], alpha[j]
        Ci, Cj = upper[i], upper[j]
        if y[i] != y[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            new_i, new_j = ai + delta, aj + delta
            if diff > 0:
                if new_j < 0:
                    new_j, new_i = 0.0, diff
            elif new_i < 0:
                new_i, new_j = 0.0, -diff
            if diff > Ci - Cj:
                if new_i > Ci:
                    new_i, new_j = Ci, Ci - diff
            elif new_j > Cj:
                new_j, new_i = Cj, Cj + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            new_i, new_j = ai - delta, aj + delta
            if total > Ci:
                if new_i > Ci:
                    new_i, new_j = Ci, total - Ci
            elif new_j < 0:
                new_j, new_i = 0.0, total
            if total > Cj:
                if new_j > Cj:
                    new_j, new_i = Cj, total - Cj
            elif new_i < 0:
                new_i, new_j = 0.0, total
        alpha[i], alpha[j] = new_i, new_j
        G += Q[:, i] * (new_i - ai) + Q[:, j] * (new_j - aj)
    v = -y * G
    up = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < upper))
    gap = np.where(up, v, -np.inf).max() - np.where(low, v, np.inf).min()
    raise ConvergenceError(
        f"SMO did not converge in {max_iter} pair updates (violation {gap:.3g})", float(gap))


def _polish(K, y, upper, alpha, tol):
    """Re-solve the KKT system on SMO's active set to machine precision.

    Returns the refined multipliers, or None when the refined point leaves
    the box or breaks the KKT conditions on the bounded samples.
    """
    free = (alpha > 0) & (alpha < upper)
    if not free.any():
        return None
    F = np.flatnonzero(free)
    U = np.flatnonzero(alpha >= upper)
    Q = (y[:, None] * y[None, :]) * K
    nf = len(F)
    A = np.zeros((nf + 1, nf + 1))
    A[:nf, :nf] = Q[np.ix_(F, F)]
    A[:nf, nf] = y[F]
    A[nf, :nf] = y[F]
    rhs = np.ones(nf + 1)
    rhs[nf] = 0.0
    if len(U):
        rhs[:nf] -= Q[np.ix_(F, U)] @ upper[U]
        rhs[nf] = -y[U] @ upper[U]
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    aF = sol[:nf]
    if np.any(aF <= 0) or np.any(aF >= upper[F]):
        return None
    refined = np.zeros_like(alpha)
    refined[U] = upper[U]
    refined[F] = aF
    g = K @ (refined * y)
    if _kkt_violation(refined, upper, y, g, _bias(refined, upper, y, g)) > tol:
        return None
    return refined


def fit(ts: TrainingSet, kernel: KernelSpec, tol: float = KKT_TOL,
        max_iter: int = MAX_ITER) -> SvmModel:
    """Train on ``ts``; a ``scale`` gamma is resolved from the samples first."""
    x = ts.samples
    kernel = kernel.resolve(x)
    # The dual only sees y_i*y_j, so solve with the first label fixed at +1;
    # negating every label then negates f exactly.
    sign = ts.labels[0]
    y = ts.labels * sign
    upper = ts.upper_bounds
    K = kernel_matrix(kernel, x, x)
    alpha, n_iter, _ = _smo(K, y, upper, tol, max_iter)
    refined = _polish(K, y, upper, alpha, tol)
    if refined is not None:
        alpha = refined
    g = K @ (alpha * y)
    b = _bias(alpha, upper, y, g)
    violation = _kkt_violation(alpha, upper, y, g, b)
    if violation > tol:
        raise ConvergenceError(f"KKT violation {violation:.3g} exceeds {tol:g}", violation)
    Q = (y[:, None] * y[None, :]) * K
    objective = float(alpha.sum() - 0.5 * alpha @ Q @ alpha)
    sv = np.flatnonzero(alpha > 0)
    log.debug("fit: n=%d sv=%d iters=%d kkt=%.2e", len(x), len(sv), n_iter, violation)
    arrays = [x[sv].copy(), ts.labels[sv].copy(), alpha[sv].copy(), sv]
    for a in arrays:
        a.setflags(write=False)
    return SvmModel(
        support_vectors=arrays[0], sv_labels=arrays[1], alphas=arrays[2],
        bias=float(sign * b), kernel=kernel, dual_objective=objective,
        sv_indices=arrays[3], n_iter=n_iter, kkt_violation=violation)


def decision_values(model: SvmModel, points) -> np.ndarray:
    """f at every row of ``points``; each value is independent of batch size."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    acc = np.zeros(len(pts))
    for sv, c in zip(model.support_vectors, model.coef):
        acc += c * kernel_values(model.kernel, sv, pts)
    return acc + model.bias


def decision(model: SvmModel, x) -> float:
    return float(decision_values(model, x)[0])


def gradient(model: SvmModel, x) -> np.ndarray:
    """Analytic gradient of the decision function at a single point."""
    x = np.asarray(x, dtype=float).reshape(2)
    if len(model.alphas) == 0:
        return np.zeros(2)
    return model.coef @ kernel_gradient(model.kernel, model.support_vectors, x)


def gradients(model: SvmModel, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.array([gradient(model, p) for p in pts]).reshape(-1, 2)


def fit_one_vs_rest(samples, teams: Sequence[int], kernel: KernelSpec,
                    C: float = DEFAULT_C, weights=None) -> list[SvmModel]:
    """One model per team (ascending index), its samples +1 against all others."""
    x = np.asarray(samples, dtype=float).reshape(-1, 2)
    teams = np.asarray(teams)
    order = sorted(set(teams.tolist()))
    if len(order) < 3:
        raise ValueError(
            f"one-vs-rest needs at least 3 teams, got {len(order)}; use fit() for two teams")
    kernel = kernel.resolve(x)
    models = []
    for team in order:
        labels = np.where(teams == team, 1.0, -1.0)
        models.append(fit(TrainingSet(x, labels, weights, C), kernel))
    return models


def check_geometry(samples) -> None:
    pts = np.asarray(samples, dtype=float).reshape(-1, 2)
    if len(pts) < 2 or np.all(pts == pts[0]):
        raise DegenerateGeometryError("all samples coincide")
