import math

import numpy as np
import pytest

from common.lab_exceptions import ConstraintError, DomainError
from qtensor.core import (
    F2, SQRT2, SQRT6, BulkParams, DirectorState, QTensorCoords, SymTraceless3, bulk_density, coords_of,
    eigen_params, f1_matrix, far_field_density, frame, frame_matrices, q_of_profile, radial_bulk_density,
    reconstruct, s_plus, tensor_of, trace_forms, trace_forms_oracle,
)


def _random_tensor(rng) -> SymTraceless3:
    a = rng.normal(size=(3, 3))
    a = a + a.T
    a[2, 2] = -a[0, 0] - a[1, 1]
    return SymTraceless3(a)


@pytest.mark.parametrize('t, expected', [(1.0 / 3.0, 1.0), (1.0, 1.5), (1e-12, 0.5)])
def test_s_plus_values(t, expected):
    assert s_plus(t) == pytest.approx(expected, abs=1e-11)


@pytest.mark.parametrize('t', [0.0, -1.0, math.inf, math.nan])
def test_s_plus_rejects_bad_t(t):
    with pytest.raises(DomainError):
        s_plus(t)


def test_bulk_params_validation():
    with pytest.raises(DomainError):
        BulkParams(0.5, 0)
    with pytest.raises(DomainError):
        BulkParams(-0.1, 1)
    assert BulkParams(1.0, -1).s_plus == pytest.approx(1.5)


def test_sym_traceless_constraints():
    with pytest.raises(ConstraintError):
        SymTraceless3(np.eye(3))
    with pytest.raises(ConstraintError):
        SymTraceless3(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    with pytest.raises(ConstraintError):
        SymTraceless3(np.zeros((2, 2)))


def test_frame_rejects_zero_winding():
    with pytest.raises(DomainError):
        frame(0, 0.3)


def test_frame_entries_at_zero_angle():
    basis = frame(1, 0.0)
    expected = np.diag([1.0, -1.0, 0.0]) / SQRT2
    np.testing.assert_allclose(basis.matrices[1].entries, expected, atol=1e-15)
    np.testing.assert_allclose(basis.matrices[0].entries, F2 / SQRT6, atol=1e-15)


def test_frame_entries_at_quarter_turn():
    e1 = frame(1, math.pi / 2).matrices[1].entries
    assert e1[0, 1] == pytest.approx(1 / SQRT2)
    assert e1[1, 0] == pytest.approx(1 / SQRT2)
    np.testing.assert_allclose(np.diag(e1), 0.0, atol=1e-15)


@pytest.mark.parametrize('k', [-2, -1, 1, 2, 3])
def test_frame_is_orthonormal(k):
    rng = np.random.default_rng(k + 10)
    for phi in rng.uniform(0, 2 * math.pi, size=25):
        basis = frame_matrices(k, phi)
        gram = np.einsum('iab,jba->ij', basis, basis)
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-14)


def test_frame_angular_derivatives_rotate_e1_into_e2():
    k, phi, step = 2, 0.7, 1e-6
    derivative = (frame_matrices(k, phi + step) - frame_matrices(k, phi - step)) / (2 * step)
    basis = frame_matrices(k, phi)
    np.testing.assert_allclose(derivative[1], k * basis[2], atol=1e-8)
    np.testing.assert_allclose(derivative[2], -k * basis[1], atol=1e-8)


def test_q_of_profile_examples():
    np.testing.assert_array_equal(q_of_profile(0.0, 0.0, 1, 0.4).entries, np.zeros((3, 3)))
    np.testing.assert_allclose(q_of_profile(1.0, 0.0, 1, 0.0).entries, np.diag([1.0, -1.0, 0.0]))


@pytest.mark.parametrize('k, phi', [(1, 0.0), (1, 1.1), (2, 2.5), (-1, 0.3)])
def test_q_of_profile_far_field_is_uniaxial(k, phi):
    s = s_plus(0.5)
    q = q_of_profile(s / 2, -s / 6, k, phi)
    n = np.array([math.cos(k * phi / 2), math.sin(k * phi / 2), 0.0])
    np.testing.assert_allclose(q.entries, s * (np.outer(n, n) - np.eye(3) / 3), atol=1e-14)


def test_coords_examples():
    phi = 0.9
    e2 = SymTraceless3(frame_matrices(1, phi)[2])
    np.testing.assert_allclose(coords_of(e2, 1, phi).as_array(), [0, 0, 1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(coords_of(SymTraceless3(F2), 1, phi).as_array(), [SQRT6, 0, 0, 0, 0], atol=1e-14)


def test_coords_round_trip_and_trace_identities():
    rng = np.random.default_rng(1)
    for _ in range(200):
        k = int(rng.choice([-2, -1, 1, 2]))
        phi = rng.uniform(0, 2 * math.pi)
        tensor = _random_tensor(rng)
        coords = coords_of(tensor, k, phi)
        np.testing.assert_allclose(tensor_of(coords).entries, tensor.entries, atol=1e-13)
        w = coords.as_array()
        assert np.trace(f1_matrix(k, phi) @ tensor.entries) == pytest.approx(SQRT2 * w[1], abs=1e-13)
        assert tensor.norm2 == pytest.approx(float(w @ w), abs=1e-13)
        again = coords_of(tensor_of(coords), k, phi).as_array()
        np.testing.assert_allclose(again, w, atol=1e-13)


def test_trace_forms_examples():
    forms = trace_forms(0.3, -0.2, (1, 0, 0, 0, 0), 1, 0.4)
    assert forms.tr_f2v2 == pytest.approx(1.0)
    forms = trace_forms(0.3, -0.2, (0, 0, 0, 1, 0), 1, 0.0)
    assert forms.tr_f1v2 == pytest.approx(0.5)
    forms = trace_forms(0.3, -0.2, (0, 0, 0, 0, 0), 1, 0.0)
    assert (forms.tr_qv, forms.tr_f1v2, forms.tr_f2v2, forms.norm2) == (0, 0, 0, 0)


def test_trace_forms_match_matrix_products():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        k = int(rng.choice([-2, -1, 1, 2]))
        u, v = rng.normal(size=2)
        w = rng.normal(size=5)
        phi = rng.uniform(0, 2 * math.pi)
        closed, oracle = trace_forms(u, v, w, k, phi), trace_forms_oracle(u, v, w, k, phi)
        for name in ('tr_qv', 'tr_f1v2', 'tr_f2v2', 'norm2'):
            assert getattr(closed, name) == pytest.approx(getattr(oracle, name), abs=1e-12)


def test_eigen_params_isotropic_and_uniaxial():
    zero = eigen_params(SymTraceless3(np.zeros((3, 3))))
    assert zero.state is DirectorState.ISOTROPIC
    assert (zero.s, zero.b) == (0.0, 0.0)

    s = s_plus(0.5)
    e1 = np.array([1.0, 0.0, 0.0])
    uniaxial = eigen_params(SymTraceless3(s * (np.outer(e1, e1) - np.eye(3) / 3)))
    assert uniaxial.state is DirectorState.UNIAXIAL
    assert uniaxial.s == pytest.approx(s, abs=1e-14)
    assert uniaxial.b == 0.0
    assert abs(uniaxial.n @ e1) == pytest.approx(1.0)


def test_eigen_params_top_tie_gives_negative_order():
    e3 = np.array([0.0, 0.0, 1.0])
    decomposition = eigen_params(SymTraceless3(-0.6 * (np.outer(e3, e3) - np.eye(3) / 3)))
    assert decomposition.state is DirectorState.UNIAXIAL
    assert decomposition.s == pytest.approx(-0.6)
    assert abs(decomposition.n @ e3) == pytest.approx(1.0)


def test_eigen_params_biaxial_reconstruction():
    q = q_of_profile(0.31, -0.07, 1, 0.8)
    decomposition = eigen_params(q)
    assert decomposition.state is DirectorState.BIAXIAL
    assert decomposition.n @ decomposition.m == pytest.approx(0.0, abs=1e-14)
    np.testing.assert_allclose(reconstruct(decomposition), q.entries, atol=1e-12)


def test_bulk_density_reduces_to_ansatz_and_is_rotation_invariant():
    rng = np.random.default_rng(3)
    t = 0.5
    for _ in range(20):
        u, v = rng.normal(scale=0.5, size=2)
        q = q_of_profile(u, v, 1, rng.uniform(0, 6))
        assert bulk_density(q, t) == pytest.approx(radial_bulk_density(u, v, t), abs=1e-13)
        rotation, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        rotated = rotation @ q.entries @ rotation.T
        assert bulk_density(rotated, t) == pytest.approx(bulk_density(q, t), abs=1e-13)


@pytest.mark.parametrize('t', [0.05, 1.0 / 3.0, 1.0, 2.0])
def test_far_field_is_ansatz_minimum(t):
    s = s_plus(t)
    assert radial_bulk_density(s / 2, -s / 6, t) == pytest.approx(far_field_density(t), abs=1e-14)
    grid = np.linspace(-1.5 * s, 1.5 * s, 301)
    uu, vv = np.meshgrid(grid, grid)
    assert np.min(radial_bulk_density(uu, vv, t)) >= far_field_density(t) - 1e-12


def test_coords_dataclass_is_immutable():
    coords = QTensorCoords(w=(1.0, 0, 0, 0, 0), k=1, phi=0.0)
    with pytest.raises(Exception):
        coords.k = 2
