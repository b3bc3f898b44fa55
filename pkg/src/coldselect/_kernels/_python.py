"""Pure numpy kernels; the fallback when the compiled core is unavailable.

Same contracts as ``_core`` (the Cython module). The two backends may
differ in the last floating-point bits because reduction orders differ;
everything downstream of a fixed projection is backend-independent.
"""

import numpy as np

LN2 = float(np.log(2.0))

BACKEND_NAME = "python"


def pairwise_sq_dists(x):
    """Squared Euclidean distances between rows: symmetric, zero diagonal."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    xc = x - x.mean(axis=0)  # centering improves conditioning, not the metric
    sq_norms = np.einsum("ij,ij->i", xc, xc)
    d = sq_norms[:, None] + sq_norms[None, :] - 2.0 * (xc @ xc.T)
    d = 0.5 * (d + d.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def conditional_affinities(sq_dists, target_log2_perp, tol, max_iter):
    """Per-row bandwidth search so row entropy hits the target (in bits).

    Returns (P, fail_row): P holds conditional rows (zero diagonal, each
    summing to 1); fail_row is the first row whose search did not converge,
    or -1. Rows whose off-diagonal distances are all equal are forced
    uniform (entropy is flat in the bandwidth there).
    """
    d = np.ascontiguousarray(sq_dists, dtype=np.float64)
    n = d.shape[0]
    p = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        row = np.delete(d[i], i)
        d_min = row.min()
        d_max = row.max()
        if d_max - d_min <= 1e-12 * max(1.0, d_max):
            vals = np.full(n - 1, 1.0 / (n - 1))
            p[i, :i] = vals[:i]
            p[i, i + 1:] = vals[i:]
            continue
        shifted = row - d_min
        beta = 1.0
        beta_lo = 0.0
        beta_hi = np.inf
        ok = False
        for _ in range(max_iter):
            w = np.exp(-beta * shifted)
            s = w.sum()
            h_bits = (np.log(s) + beta * float(shifted @ w) / s) / LN2
            diff = h_bits - target_log2_perp
            if abs(diff) <= tol:
                ok = True
                break
            if diff > 0.0:  # entropy too high: narrow the kernel
                beta_lo = beta
                beta = beta * 2.0 if np.isinf(beta_hi) else 0.5 * (beta + beta_hi)
            else:
                beta_hi = beta
                beta = 0.5 * (beta + beta_lo)
        if not ok:
            return p, i
        vals = w / s
        p[i, :i] = vals[:i]
        p[i, i + 1:] = vals[i:]
    return p, -1


def tsne_grad_kl(p, y, exaggeration):
    """Gradient of KL(exaggeration*P || Q) at coords y, plus the true KL.

    Q is the normalized student-t affinity of y. The returned KL is always
    computed against the unexaggerated P so optimization traces stay
    comparable across the exaggeration switch.
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = y[:, 0][:, None] - y[:, 0][None, :]
    dy = y[:, 1][:, None] - y[:, 1][None, :]
    num = 1.0 / (1.0 + dx * dx + dy * dy)
    np.fill_diagonal(num, 0.0)
    z = num.sum()
    q = num / z
    w = (exaggeration * p - q) * num
    row = w.sum(axis=1)
    grad = 4.0 * (row[:, None] * y - w @ y)
    mask = p > 0.0
    kl = float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))
    return grad, kl
