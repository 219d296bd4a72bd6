"""Pure numpy twin of the compiled kernel."""
import numpy as np


def minplus_select(tx, j0, parent, out_cost, out_j):
    """out_cost[k] = min_t tx[t] + parent[k - j0 - t] over indices >= 1."""
    K = parent.shape[0] - 1
    J = tx.shape[0]
    out_cost[0] = np.inf
    out_j[0] = -1
    if K < 1:
        return
    if J == 0:
        out_cost[1:] = np.inf
        out_j[1:] = -1
        return
    k = np.arange(1, K + 1)[:, None]
    idx = k - j0 - np.arange(J)[None, :]
    valid = idx >= 1
    vals = np.where(valid, tx[None, :] + parent[np.where(valid, idx, 0)], np.inf)
    arg = np.argmin(vals, axis=1)
    best = vals[np.arange(K), arg]
    out_cost[1:] = best
    out_j[1:] = np.where(np.isfinite(best), j0 + arg, -1)
