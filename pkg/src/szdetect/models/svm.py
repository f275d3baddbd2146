"""Soft-margin RBF SVM trained by sequential minimal optimization.

The solver follows the maximal-violating-pair scheme with second-order working
set selection (Fan, Chen & Lin 2005) on the dual

    min_a  1/2 a^T Q a - e^T a,   y^T a = 0,   0 <= a_i <= C * w_{y_i},

with ``Q_ij = y_i y_j K(x_i, x_j)``. Per-class weights enter only through the
per-sample box bounds.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .base import ClassWeights, TrainConfig, TrainingError, check_dimension, check_training_data, labels_from_scores

log = logging.getLogger(__name__)

_TAU = 1e-12
_FULL_KERNEL_LIMIT = 3000


def rbf_kernel(x, y, gamma: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    d = x - y
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_kernel_matrix(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    gamma: float
    mean: np.ndarray | None = None
    scale: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    algorithm = "SVM"

    def __post_init__(self):
        self.support_vectors = np.atleast_2d(np.asarray(self.support_vectors, dtype=np.float64))
        self.dual_coef = np.asarray(self.dual_coef, dtype=np.float64).ravel()
        if len(self.dual_coef) != len(self.support_vectors) or len(self.dual_coef) < 1:
            raise ValueError("need at least one support vector and one coefficient per vector")

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def _transform(self, X):
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale

    def decision_function(self, X, block: int = 256) -> np.ndarray:
        """``sum_i coef_i K(sv_i, x) + b``.

        Unoptimized einsum reduces each output element in a fixed order (no
        BLAS), so every score is bit-identical however the batch is split.
        """
        X = self._transform(check_dimension(X, self.n_features))
        out = np.empty(len(X))
        sv = self.support_vectors
        sv_sq = np.einsum("ij,ij->i", sv, sv)
        for i in range(0, len(X), block):
            x = X[i:i + block]
            sq = np.einsum("ij,ij->i", x, x)[:, None] + sv_sq[None, :] - 2.0 * np.einsum("ij,kj->ik", x, sv)
            np.maximum(sq, 0.0, out=sq)
            out[i:i + block] = np.einsum("ik,k->i", np.exp(-self.gamma * sq), self.dual_coef) + self.bias
        return out

    def predict(self, X):
        scores = self.decision_function(X)
        return labels_from_scores(scores), scores


class SvmConvergenceError(TrainingError):
    def __init__(self, message: str, model: SvmModel | None, kkt_gap: float, iterations: int):
        super().__init__(message)
        self.model = model
        self.kkt_gap = kkt_gap
        self.iterations = iterations


class _KernelRows:
    """Row access to the training kernel; full matrix for small N, LRU cache otherwise."""

    def __init__(self, X: np.ndarray, gamma: float, cache_rows: int = 2048):
        self.X = X
        self.gamma = gamma
        self.full = rbf_kernel_matrix(X, X, gamma) if len(X) <= _FULL_KERNEL_LIMIT else None
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.cache_rows = cache_rows

    def __getitem__(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        row = self.cache.get(i)
        if row is None:
            row = rbf_kernel_matrix(self.X[i:i + 1], self.X, self.gamma)[0]
            self.cache[i] = row
            if len(self.cache) > self.cache_rows:
                self.cache.popitem(last=False)
        else:
            self.cache.move_to_end(i)
        return row


def default_gamma(X: np.ndarray) -> float:
    var = float(np.var(X))
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def _fit_scaler(X: np.ndarray):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def smo(K: _KernelRows, y: np.ndarray, upper: np.ndarray, tol: float, max_iter: int):
    """Run SMO; returns (alpha, rho, kkt_gap, iterations, objective_history, converged)."""
    n = len(y)
    ys = np.where(y == 1, 1.0, -1.0)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.ones(n)  # RBF: K(x, x) = 1
    history = [0.0]
    gap = np.inf
    it = 0
    converged = False
    while it < max_iter:
        yg = -ys * grad
        up = ((ys > 0) & (alpha < upper)) | ((ys < 0) & (alpha > 0))
        low = ((ys > 0) & (alpha > 0)) | ((ys < 0) & (alpha < upper))
        if not up.any() or not low.any():
            gap = 0.0
            converged = True
            break
        cand = np.where(up, yg, -np.inf)
        i = int(np.argmax(cand))
        m_val = cand[i]
        M_val = np.min(np.where(low, yg, np.inf))
        gap = m_val - M_val
        if gap < tol:
            converged = True
            break

        Ki = K[i]
        b = m_val - yg
        mask = low & (b > 0)
        a = diag[i] + diag - 2.0 * Ki
        a = np.where(a > 0, a, _TAU)
        obj = np.where(mask, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        Kj = K[j]

        Ci, Cj = upper[i], upper[j]
        ai_old, aj_old = alpha[i], alpha[j]
        ai, aj = ai_old, aj_old
        if ys[i] != ys[j]:
            quad = diag[i] + diag[j] + 2.0 * (ys[i] * ys[j] * Ki[j])
            quad = quad if quad > 0 else _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai, aj = Ci, Ci - diff
            elif aj > Cj:
                aj, ai = Cj, Cj + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * (ys[i] * ys[j] * Ki[j])
            quad = quad if quad > 0 else _TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > Ci:
                if ai > Ci:
                    ai, aj = Ci, total - Ci
            elif aj < 0:
                aj, ai = 0.0, total
            if total > Cj:
                if aj > Cj:
                    aj, ai = Cj, total - Cj
            elif ai < 0:
                ai, aj = 0.0, total

        dai, daj = ai - ai_old, aj - aj_old
        alpha[i], alpha[j] = ai, aj
        # Q_i = y_i * y * K_i
        grad += ys * (ys[i] * dai * Ki + ys[j] * daj * Kj)
        it += 1
        if it % n == 0:
            history.append(_dual_objective(alpha, grad))

    history.append(_dual_objective(alpha, grad))
    return alpha, _rho(alpha, grad, ys, upper), float(gap), it, history, converged


def _dual_objective(alpha, grad) -> float:
    # e^T a - 1/2 a^T Q a, using grad = Q a - e
    return float(0.5 * np.dot(alpha, 1.0 - grad))


def _rho(alpha, grad, ys, upper) -> float:
    yg = ys * grad
    at_upper = alpha >= upper
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return float(yg[free].mean())
    ub_mask = (at_upper & (ys < 0)) | (at_lower & (ys > 0))
    lb_mask = (at_upper & (ys > 0)) | (at_lower & (ys < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    if np.isfinite(ub) and np.isfinite(lb):
        return float((ub + lb) / 2)
    return float(ub if np.isfinite(ub) else lb)


def train_svm(X, y, cfg: TrainConfig = TrainConfig(algorithm="SVM"), weights: ClassWeights | None = None) -> SvmModel:
    X, y = check_training_data(X, y)
    weights = weights or ClassWeights(1.0, 1.0)
    mean = scale = None
    Xt = X
    if cfg.standardize:
        mean, scale = _fit_scaler(X)
        Xt = (X - mean) / scale
    gamma = cfg.gamma if cfg.gamma is not None else default_gamma(Xt)
    upper = cfg.C * weights.per_sample(y)
    max_iter = cfg.svm_max_iter or max(100_000, 100 * len(y))

    alpha, rho, gap, iters, history, converged = smo(_KernelRows(Xt, gamma), y, upper, cfg.svm_tol, max_iter)
    sv = alpha > 0
    if not sv.any():
        raise TrainingError("SMO produced no support vectors")
    ys = np.where(y == 1, 1.0, -1.0)
    model = SvmModel(
        support_vectors=Xt[sv],
        dual_coef=(alpha * ys)[sv],
        bias=-rho,
        gamma=gamma,
        mean=mean,
        scale=scale,
        diagnostics={"kkt_gap": gap, "iterations": iters, "objective": history, "converged": converged},
    )
    log.debug("SMO finished after %d iterations, gap %.3g, %d SVs", iters, gap, int(sv.sum()))
    if not converged:
        raise SvmConvergenceError(
            f"SMO did not converge in {iters} iterations (KKT gap {gap:.3g} > {cfg.svm_tol})",
            model, gap, iters,
        )
    return model
