"""Nodal coefficients of the second variation along a radial profile."""
from dataclasses import dataclass

import numpy as np

from profile_solver.profile import Profile
from qtensor.core import SQRT3


@dataclass(frozen=True, slots=True)
class Potentials:
    """ Potential coefficients of the frame components.
    w0: 18v^2 + 2u^2 - t - 2v
    w1: 6v^2 + 6u^2 - t + 2v
    w2: 6v^2 + 2u^2 - t + 2v
    b: 6v^2 + 2u^2 - t - v, shared by w3 and w4
    cross: (2u/sqrt(3))(1 + 6v), half the w0 w1 coupling
    """
    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    b: np.ndarray
    cross: np.ndarray


def potentials(profile: Profile) -> Potentials:
    u, v, t = np.asarray(profile.u), np.asarray(profile.v), profile.params.t
    return Potentials(
        w0=18.0 * v * v + 2.0 * u * u - t - 2.0 * v,
        w1=6.0 * v * v + 6.0 * u * u - t + 2.0 * v,
        w2=6.0 * v * v + 2.0 * u * u - t + 2.0 * v,
        b=6.0 * v * v + 2.0 * u * u - t - v,
        cross=2.0 * u / SQRT3 * (1.0 + 6.0 * v),
    )
