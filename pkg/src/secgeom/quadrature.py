"""Shared quadrature helpers.

Fixed-order Gauss-Legendre panels for the radial inner-product rules and
a vectorized adaptive cell integrator used for test-function integrals.
All routines work on plain numpy arrays; nothing here knows about models.
"""

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gl_nodes(a, b, n):
    """Nodes and weights for integral over [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def panel_nodes(edges, n):
    """Composite Gauss-Legendre over consecutive panels given by edges."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gl_nodes(a, b, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def geometric_edges(a, b, first_width):
    """Panel edges from a to b, widths doubling from first_width."""
    edges = [a]
    width = first_width
    while edges[-1] + width < b:
        edges.append(edges[-1] + width)
        width *= 2.0
    edges.append(b)
    return np.array(edges)


class AdaptiveError(RuntimeError):
    """Raised when cell refinement hits its budget; carries the bound."""

    def __init__(self, message, value, err_bound):
        super().__init__(message)
        self.value = value
        self.err_bound = err_bound


def _cell_estimates(f, cells, order):
    """Tensor GL estimate per cell for integral of f(a, b) da db.

    cells: (m, 4) array of (a0, a1, b0, b1). Returns (m,) estimates.
    f must accept broadcastable arrays (a, b) and return real values
    already including any jacobian in (a, b) coordinates.
    """
    x, w = gauss_legendre(order)
    a0, a1, b0, b1 = cells.T
    ha = 0.5 * (a1 - a0)
    hb = 0.5 * (b1 - b0)
    # nodes: (m, order) each direction
    na = a0[:, None] + ha[:, None] * (x[None, :] + 1.0)
    nb = b0[:, None] + hb[:, None] * (x[None, :] + 1.0)
    vals = f(na[:, :, None], nb[:, None, :])
    est = np.einsum("i,j,mij->m", w, w, vals)
    return est * ha * hb


def adaptive_cells(f, a_range, b_range, *, abs_tol, base=(8, 8), order=4,
                   max_cells=400_000, min_frac=1e-6):
    """Adaptive 2-D integration of f over a_range x b_range.

    Splits cells whose coarse/fine discrepancy exceeds a per-area share
    of abs_tol.  Cells narrower than min_frac of the domain are accepted
    regardless (integrable singularities, e.g. log at a root, would
    otherwise refine forever: discrepancy and budget shrink at the same
    rate).  Returns (value, error_bound).  Raises AdaptiveError when the
    cell budget is exhausted before the tolerance is met.
    """
    a_edges = np.linspace(a_range[0], a_range[1], base[0] + 1)
    b_edges = np.linspace(b_range[0], b_range[1], base[1] + 1)
    cells = np.array([
        (a_edges[i], a_edges[i + 1], b_edges[j], b_edges[j + 1])
        for i in range(base[0]) for j in range(base[1])
    ])
    total_area = (a_range[1] - a_range[0]) * (b_range[1] - b_range[0])
    min_width = min_frac * (a_range[1] - a_range[0])

    value = 0.0
    err_acc = 0.0
    n_done = 0
    while len(cells):
        if n_done + len(cells) > max_cells:
            raise AdaptiveError("cell budget exhausted", value, math.inf)
        coarse = _cell_estimates(f, cells, order)
        # children: split both directions
        a0, a1, b0, b1 = cells.T
        am = 0.5 * (a0 + a1)
        bm = 0.5 * (b0 + b1)
        children = np.concatenate([
            np.stack([a0, am, b0, bm], axis=1),
            np.stack([am, a1, b0, bm], axis=1),
            np.stack([a0, am, bm, b1], axis=1),
            np.stack([am, a1, bm, b1], axis=1),
        ])
        fine = _cell_estimates(f, children, order)
        fine_sum = fine[:len(cells)] + fine[len(cells):2 * len(cells)] \
            + fine[2 * len(cells):3 * len(cells)] + fine[3 * len(cells):]
        err = np.abs(fine_sum - coarse)
        area = (a1 - a0) * (b1 - b0)
        budget = abs_tol * area / total_area
        ok = (err <= np.maximum(budget, 1e-300)) | (a1 - a0 <= min_width)
        value += float(np.sum(fine_sum[ok]))
        err_acc += float(np.sum(err[ok]))
        n_done += int(np.sum(ok))
        bad = ~ok
        idx = np.where(bad)[0]
        cells = children[np.concatenate([idx, idx + len(bad),
                                         idx + 2 * len(bad),
                                         idx + 3 * len(bad)])] \
            if len(idx) else np.empty((0, 4))
    return value, err_acc


def integrate_polar(g, r_range, theta_range=(0.0, 2.0 * math.pi), *,
                    center=0.0 + 0.0j, abs_tol=1e-10, base=(8, 16),
                    max_cells=400_000):
    """Integrate g(z) dA over an annular sector around `center`.

    g gets complex chart points and must be vectorized; the polar
    jacobian is applied here.
    """
    def f(r, t):
        z = center + r * np.exp(1j * t)
        return g(z) * r

    return adaptive_cells(f, r_range, theta_range, abs_tol=abs_tol,
                          base=base, max_cells=max_cells)


def integrate_cartesian(g, x_range, y_range, *, abs_tol=1e-10,
                        base=(8, 8), max_cells=400_000):
    """Integrate g(z) dA over a rectangle; g vectorized over complex z."""
    def f(x, y):
        return g(x + 1j * y)

    return adaptive_cells(f, x_range, y_range, abs_tol=abs_tol,
                          base=base, max_cells=max_cells)
