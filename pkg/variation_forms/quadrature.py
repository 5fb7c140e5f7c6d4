"""Radial quadrature rules shared by the forms, the polar oracle and the pencils.

The block rule integrates  sum_f |f'|^2 + f^T C f / r^2 + f^T P f  against r dr as
    sum_i r_{i+1/2} |f_{i+1} - f_i|^2 / h_i + sum_{i>=1} (w_i / r_i^2) f_i^T C f_i + sum_i w_i f_i^T P_i f_i
with control-volume weights w_i. The identity rule is the composite trapezoid with central differences.
"""
import numpy as np
from scipy.integrate import trapezoid

from profile_solver.mesh import MeshGeometry

BLOCK_RULE = 'cv-radial'
TRAPEZOID_RULE = 'trapezoid-r'


def gradient_weights(geometry: MeshGeometry) -> np.ndarray:
    return geometry.r_half / geometry.h


def centrifugal_weights(geometry: MeshGeometry) -> np.ndarray:
    """ w_i / r_i^2, zero at the origin node. """
    r = geometry.r
    weights = np.zeros_like(r)
    weights[1:] = geometry.weights[1:] / (r[1:] * r[1:])
    return weights


def block_quadratic(geometry: MeshGeometry, centrifugal: np.ndarray, potential: np.ndarray, fields: np.ndarray
                    ) -> float:
    """ Block rule applied to fields of shape (N+1, F). """
    jumps = np.diff(fields, axis=0)
    gradient = np.sum(gradient_weights(geometry) * np.sum(jumps * jumps, axis=1))
    angular = np.sum(centrifugal_weights(geometry) * np.einsum('ia,ab,ib->i', fields, centrifugal, fields))
    bulk = np.sum(geometry.weights * np.einsum('ia,iab,ib->i', fields, potential, fields))
    return float(gradient + angular + bulk)


def radial_derivative(r: np.ndarray, values: np.ndarray) -> np.ndarray:
    """ Second-order central differences (one-sided second order at the ends). """
    return np.gradient(values, r, edge_order=2)


def integrate_r(r: np.ndarray, integrand: np.ndarray) -> float:
    """ Composite trapezoid of integrand * r dr. """
    return float(trapezoid(integrand * r, r))
