import numpy as np
import pytest
from scipy.special import ndtri

from volkit.numerics import rng_stream


@pytest.fixture
def rng():
    return rng_stream(20240915, 0)


def brute_force_transform(v, t_floor=1e-10, variant=0, n_base=400_000):
    """Independent W_n evaluation: every integral by dense trapezoid on a
    graded grid, quantiles from scipy, 3x3 solves from numpy.  Shares no
    closed forms or quadrature code with the implementation under test."""
    v = np.asarray(v, float)
    n = len(v)
    sqn = np.sqrt(n)
    hi = 1 - 1e-10
    g = np.concatenate([
        np.linspace(t_floor, hi, n_base),
        t_floor + np.logspace(-10, -1, 4000),
        hi - np.logspace(-10, -1, 4000),
        v,
    ])
    g = np.unique(np.clip(g, t_floor, hi))
    z = ndtri(g)
    if variant == 0:
        gd = np.stack([np.ones_like(z), -z, z * z], axis=1)
    else:
        gd = np.stack([np.ones_like(z), -z, 1 - z * z], axis=1)

    def right_cumtrapz(f):
        seg = 0.5 * (f[1:] + f[:-1]) * np.diff(g)
        out = np.zeros_like(f)
        out[:-1] = seg[::-1].cumsum()[::-1]
        return out

    tail = np.stack([right_cumtrapz(gd[:, i]) for i in range(3)], axis=1)
    cmat = np.empty((len(g), 3, 3))
    for i in range(3):
        for j in range(i, 3):
            cmat[:, i, j] = cmat[:, j, i] = right_cumtrapz(gd[:, i] * gd[:, j])
    zv = ndtri(v)
    if variant == 0:
        gv = np.stack([np.ones_like(zv), -zv, zv * zv], axis=1)
    else:
        gv = np.stack([np.ones_like(zv), -zv, 1 - zv * zv], axis=1)
    suffix = np.zeros((n + 1, 3))
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + gv[i]
    w = np.empty(n)
    total = 0.0
    prev = t_floor
    for j in range(n):
        ia = np.searchsorted(g, prev)
        ib = np.searchsorted(g, v[j])
        sl = slice(ia, ib + 1)
        q = suffix[j] / sqn - sqn * tail[sl]
        y = np.linalg.solve(cmat[sl], q[:, :, None])[:, :, 0]
        psi = np.einsum("ij,ij->i", gd[sl], y)
        total += np.trapezoid(psi, g[sl])
        w[j] = (j + 1 - n * v[j]) / sqn - total
        prev = v[j]
    return w
