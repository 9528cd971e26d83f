"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Operation order matches the compiled code line for line so that both
backends produce bit-identical floats.
"""

import math

import numpy as np

KIND_FRACTION = 0
KIND_TABLE = 1


def simulate(kind, q, table_theta, table_power, table_step, arrivals, horizon,
             B, s, c, eps, burn_in):
    """Run one trajectory; return ``(sum of post-burn-in distortions, violation slot or -1)``."""
    if len(arrivals) < horizon - 1:
        raise ValueError("need at least horizon - 1 arrivals")
    arrivals = np.asarray(arrivals, dtype=np.float64).tolist()
    tt = np.asarray(table_theta, dtype=np.float64).tolist()
    tp = np.asarray(table_power, dtype=np.float64).tolist()
    last = len(tt) - 1
    root = math.sqrt(eps * c)
    tol = 1e-9 * B
    b = B
    consumed = 0.0
    total = 0.0
    for t in range(horizon):
        if t > 0:
            b = b - consumed
            if b < 0.0:
                b = 0.0
            b = b + arrivals[t - 1]
            if b > B:
                b = B
        if kind == KIND_FRACTION:
            budget = q * b
            if eps == 0.0:
                theta = 1.0
                g = budget
            else:
                theta = budget / (eps + root)
                if theta > 1.0:
                    theta = 1.0
                g = budget - eps
                if g < root:
                    g = root
            consumed = budget
        else:
            i = int(math.floor(b / table_step + 1e-9))
            if i > last:
                i = last
            theta = tt[i]
            g = tp[i]
            consumed = theta * (eps + g)
            if consumed > b + tol:
                return total, t
        d = (1.0 - theta) * s + theta * (s / (1.0 + g / c))
        if t >= burn_in:
            total = total + d
    return total, -1


def bellman(cost, w):
    """Min-plus backup ``V[i] = min_{j<=i} cost[j] + w[i-j]``; ties go to the smallest j."""
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = cost.shape[0]
    out = np.empty(n)
    arg = np.empty(n, dtype=np.int64)
    for i in range(n):
        vals = cost[: i + 1] + w[i::-1]
        j = int(np.argmin(vals))
        out[i] = vals[j]
        arg[i] = j
    return out, arg
