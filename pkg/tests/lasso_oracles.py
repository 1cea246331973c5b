"""Independent LASSO reference: projected gradient on the split ``b = u - v``."""

import numpy as np


def standardize(x):
    xc = x - x.mean(axis=0)
    return xc / np.sqrt((xc**2).mean(axis=0))


def lasso_objective(x, y, b, lam):
    r = y - x @ b
    return float(r @ r) / (2 * len(y)) + lam * float(np.abs(b).sum())


def projected_gradient(x, y, lam, iters=20_000):
    """Minimize (1/2n)|y - X(u - v)|^2 + lam 1'(u + v) over u, v >= 0."""
    n, m = x.shape
    step = n / np.linalg.eigvalsh(x.T @ x).max() / 2
    u = np.zeros(m)
    v = np.zeros(m)
    for _ in range(iters):
        g = -x.T @ (y - x @ (u - v)) / n
        u = np.maximum(u - step * (g + lam), 0.0)
        v = np.maximum(v - step * (-g + lam), 0.0)
    return u - v
