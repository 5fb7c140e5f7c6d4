"""Finite-difference weights on nonuniform grids."""
from math import factorial

import numpy as np


STENCIL_WIDTH = 5


def stencil_starts(size: int, width: int = STENCIL_WIDTH) -> np.ndarray:
    """ Index of the first stencil node for every grid node.
    Centred where possible, shifted inwards (one-sided) near both ends.
    """
    if size < width:
        raise ValueError(f"Grid of {size} nodes is too small for a {width}-point stencil.")
    half = width // 2
    return np.clip(np.arange(size) - half, 0, size - width)


def derivative_weights(x: np.ndarray, order: int = 1, width: int = STENCIL_WIDTH):
    """ Weights of the `order`-th derivative for every node of the grid x.
    The weights solve the Taylor moment conditions on each stencil, so they are exact for polynomials of degree < width.
    Args:
        x: strictly increasing node positions.
        order: derivative order, smaller than width.
        width: number of stencil points.
    Returns:
        (starts, weights) with weights of shape (len(x), width); node i uses x[starts[i]:starts[i]+width].
    """
    if order >= width:
        raise ValueError(f"A {width}-point stencil cannot approximate derivative order {order}.")
    size = len(x)
    starts = stencil_starts(size, width)
    columns = starts[:, None] + np.arange(width)[None, :]
    offsets = x[columns] - x[:, None]
    # Scale by the local spacing to keep the moment matrices well conditioned
    scale = np.max(np.abs(offsets), axis=1)
    scaled = offsets / scale[:, None]
    powers = np.arange(width)
    moments = scaled[:, None, :] ** powers[None, :, None] / np.array([factorial(p) for p in powers])[None, :, None]
    rhs = np.zeros((size, width))
    rhs[:, order] = 1.0
    weights = np.linalg.solve(moments, rhs[..., None])[..., 0]
    return starts, weights / scale[:, None] ** order


def derivative(x: np.ndarray, values: np.ndarray, order: int = 1) -> np.ndarray:
    """ Fourth-order accurate derivative of nodal values (central inside, one-sided at the ends). """
    starts, weights = derivative_weights(x, order)
    columns = starts[:, None] + np.arange(weights.shape[1])[None, :]
    return np.sum(weights * values[columns], axis=1)
