"""Conservative finite-difference form of the radial Euler-Lagrange system.

Unknowns are interleaved as x = (u_0, v_0, u_1, v_1, ...); row 2i is the u-line at node i and row 2i+1 the v-line.
Both lines couple only to neighbouring nodes, so the Jacobian is banded with two sub- and two super-diagonals.
"""
from dataclasses import dataclass

import numpy as np

from profile_solver.mesh import MeshGeometry

BANDS = (2, 2)


@dataclass(frozen=True, slots=True)
class RadialStencil:
    """ (1/r)(r f')' at interior node i is lower[i] f_{i-1} + diag[i] f_i + upper[i] f_{i+1}. """
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray


def radial_stencil(geometry: MeshGeometry) -> RadialStencil:
    r, h, r_half = geometry.r, geometry.h, geometry.r_half
    denominator = r[1:-1] * 0.5 * (h[1:] + h[:-1])
    lower = r_half[:-1] / h[:-1] / denominator
    upper = r_half[1:] / h[1:] / denominator
    return RadialStencil(lower=lower, diag=-(lower + upper), upper=upper)


def apply_stencil(stencil: RadialStencil, values: np.ndarray) -> np.ndarray:
    """ Discrete (1/r)(r f')' at interior nodes; works along the first axis of `values`. """
    lower = stencil.lower.reshape((-1,) + (1,) * (values.ndim - 1))
    diag = stencil.diag.reshape(lower.shape)
    upper = stencil.upper.reshape(lower.shape)
    return lower * values[:-2] + diag * values[1:-1] + upper * values[2:]


def forcing_u(u, v, t: float):
    return u * (-t + 2.0 * v + 6.0 * v * v + 2.0 * u * u)


def forcing_v(u, v, t: float):
    return v * (-t - v + 6.0 * v * v + 2.0 * u * u) + u * u / 3.0


def forcing_jacobian(u, v, t: float):
    """ Partial derivatives (dGu/du, dGu/dv, dGv/du, dGv/dv) of the right-hand sides. """
    return (
        -t + 2.0 * v + 6.0 * v * v + 6.0 * u * u,
        u * (2.0 + 12.0 * v),
        4.0 * u * v + 2.0 * u / 3.0,
        -t - 2.0 * v + 18.0 * v * v + 2.0 * u * u,
    )


def residual(u: np.ndarray, v: np.ndarray, t: float, k: int, s: float, geometry: MeshGeometry) -> np.ndarray:
    """ Per-node residuals, shape (N+1, 2): column 0 the u-line, column 1 the v-line.
    Node 0 holds u_0 = 0 and the regularised v-equation 4 (v_1 - v_0) / h_0^2 = Gv(0, v_0);
    node N holds the far-field Dirichlet values.
    """
    r = geometry.r
    stencil = radial_stencil(geometry)
    result = np.empty((len(r), 2))
    ui, vi, ri = u[1:-1], v[1:-1], r[1:-1]
    result[1:-1, 0] = apply_stencil(stencil, u) - k * k * ui / (ri * ri) - forcing_u(ui, vi, t)
    result[1:-1, 1] = apply_stencil(stencil, v) - forcing_v(ui, vi, t)
    h0 = geometry.h[0]
    result[0, 0] = u[0]
    result[0, 1] = 4.0 * (v[1] - v[0]) / (h0 * h0) - forcing_v(0.0, v[0], t)
    result[-1, 0] = u[-1] - 0.5 * s
    result[-1, 1] = v[-1] + s / 6.0
    return result


def banded_jacobian(u: np.ndarray, v: np.ndarray, t: float, k: int, geometry: MeshGeometry) -> np.ndarray:
    """ Jacobian of the interleaved residual in the (l, u) = (2, 2) storage of scipy.linalg.solve_banded. """
    size = 2 * len(u)
    ab = np.zeros((5, size))
    rows, cols, values = [], [], []

    def put(row, col, value):
        rows.append(np.atleast_1d(row))
        cols.append(np.atleast_1d(col))
        values.append(np.broadcast_to(value, np.atleast_1d(row).shape))

    r = geometry.r
    stencil = radial_stencil(geometry)
    nodes = np.arange(1, len(r) - 1)
    ui, vi, ri = u[1:-1], v[1:-1], r[1:-1]
    guu, guv, gvu, gvv = forcing_jacobian(ui, vi, t)
    row_u, row_v = 2 * nodes, 2 * nodes + 1
    put(row_u, row_u - 2, stencil.lower)
    put(row_u, row_u, stencil.diag - k * k / (ri * ri) - guu)
    put(row_u, row_u + 1, -guv)
    put(row_u, row_u + 2, stencil.upper)
    put(row_v, row_v - 2, stencil.lower)
    put(row_v, row_v - 1, -gvu)
    put(row_v, row_v, stencil.diag - gvv)
    put(row_v, row_v + 2, stencil.upper)

    h0 = geometry.h[0]
    put(0, 0, 1.0)
    put(1, 1, -4.0 / (h0 * h0) - forcing_jacobian(0.0, v[0], t)[3])
    put(1, 3, 4.0 / (h0 * h0))
    put(size - 2, size - 2, 1.0)
    put(size - 1, size - 1, 1.0)

    rows, cols, values = np.concatenate(rows), np.concatenate(cols), np.concatenate(values)
    ab[BANDS[1] + rows - cols, cols] = values
    return ab
