"""Finite-difference harnesses for the gradient and the Hessian product.

These only ever evaluate the loss (for the gradient check) or the gradient
(for the Hessian check), so they stay independent of the closed forms they
validate.
"""
from __future__ import annotations

import numpy as np

from .core import Dataset
from .hessian import HessianOperator
from .loss_grad import gradient, loss
from .softmax import softmax

GRAD_TOL = 1e-6
HESS_TOL = 1e-5


def fd_gradient(w, data: Dataset, h: float = 1e-5) -> np.ndarray:
    """Entrywise central differences of the loss."""
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    for i in range(w.shape[0]):
        for j in range(w.shape[1]):
            wp = w.copy()
            wm = w.copy()
            wp[i, j] += h
            wm[i, j] -= h
            out[i, j] = (loss(wp, data) - loss(wm, data)) / (2.0 * h)
    return out


def fd_hessian_apply(w, data: Dataset, u, eps: float = 1e-5) -> np.ndarray:
    """Central difference of the gradient along the direction ``u``."""
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    return (gradient(w + eps * u, data) - gradient(w - eps * u, data)) / (2.0 * eps)


def entrywise_rel_err(a, b, floor_frac: float = 1e-3) -> float:
    """Max entrywise |a-b| relative to |b|, floored at floor_frac * max|b|.

    The floor keeps accidental near-zero reference entries from inflating the
    ratio beyond what the absolute finite-difference error warrants.
    """
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(b), floor_frac * np.max(np.abs(b)) + 1e-300)
    return float(np.max(np.abs(np.asarray(a) - b) / scale))


def norm_rel_err(a, b) -> float:
    denom = float(np.linalg.norm(b))
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / max(denom, 1e-300)


def random_instance(rng: np.random.Generator, c: int, d: int, n: int):
    """Standard-normal weights and features, softmax-stochastic soft targets."""
    w = rng.standard_normal((c, d))
    x = rng.standard_normal((d, n))
    t = softmax(rng.standard_normal((c, n)))
    return w, Dataset(x, t)


def gradient_check_suite(
    seed: int = 0,
    c_max: int = 5,
    d_max: int = 7,
    n_max: int = 10,
    instances: int = 20,
    corrupt: bool = False,
) -> dict:
    """Run the gradient and Hessian-product finite-difference suites.

    Returns the worst relative errors seen.  ``corrupt`` perturbs the
    analytic gradient before comparison (negative-control hook used to prove
    the harness actually detects wrong gradients).
    """
    rng = np.random.default_rng(seed)
    grad_worst = 0.0
    hess_worst = 0.0
    for _ in range(instances):
        c = int(rng.integers(2, c_max + 1))
        d = int(rng.integers(2, d_max + 1))
        n = int(rng.integers(1, n_max + 1))
        w, data = random_instance(rng, c, d, n)

        g = gradient(w, data)
        if corrupt:
            g = g + 1e-3 * max(1.0, float(np.max(np.abs(g))))
        grad_worst = max(grad_worst, entrywise_rel_err(g, fd_gradient(w, data)))

        op = HessianOperator(data, w)
        u = rng.standard_normal((c, d))
        hess_worst = max(
            hess_worst, norm_rel_err(op.apply(u), fd_hessian_apply(w, data, u))
        )
    return {
        "instances": instances,
        "grad_max_rel_err": grad_worst,
        "grad_threshold": GRAD_TOL,
        "hess_max_rel_err": hess_worst,
        "hess_threshold": HESS_TOL,
        "passed": bool(grad_worst <= GRAD_TOL and hess_worst <= HESS_TOL),
    }
