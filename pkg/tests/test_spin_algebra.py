import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from whichpath.spin_algebra import (
    AXES,
    IX,
    IY,
    InvalidStateError,
    NotUnitaryError,
    apply_unitary,
    basis_state,
    check_density,
    distance_up_to_diagonal_phase,
    distance_up_to_global_phase,
    is_density,
    kron,
    on_a,
    on_b,
    pure_density,
    rotation,
)

angles = st.floats(-4 * np.pi, 4 * np.pi, allow_nan=False)


def random_unitary(rng, n=4):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def brute_global_distance(u, v, steps=20000):
    # oracle: scan the phase circle, then polish around the best sample
    grid = np.linspace(0, 2 * np.pi, steps, endpoint=False)
    d = [np.max(np.abs(u - np.exp(1j * g) * v)) for g in grid]
    g0 = grid[int(np.argmin(d))]
    fine = np.linspace(g0 - 2 * np.pi / steps, g0 + 2 * np.pi / steps, 2001)
    return min(np.max(np.abs(u - np.exp(1j * g) * v)) for g in fine)


@given(angles, st.sampled_from(AXES))
def test_rotation_matches_matrix_exponential(angle, axis):
    sign = -1 if axis[0] == "-" else 1
    gen = sign * (IX if axis[1] == "x" else IY)
    assert np.allclose(rotation(axis, angle), sl.expm(-1j * angle * gen), atol=1e-12)


def test_rotation_rejects_z_axis():
    with pytest.raises(ValueError):
        rotation("+z", 1.0)


def test_kron_slot_order():
    # spin b flip moves |00> to |10>, index 2
    flip = np.array([[0, 1], [1, 0]])
    assert np.argmax(np.abs(on_b(flip) @ basis_state("00"))) == 2
    assert np.argmax(np.abs(on_a(flip) @ basis_state("00"))) == 1
    rng = np.random.default_rng(3)
    a, b = rng.standard_normal((2, 2, 2))
    assert np.array_equal(kron(a, b), np.kron(a, b))


def test_global_phase_distance_against_scan():
    rng = np.random.default_rng(0)
    for _ in range(5):
        u = random_unitary(rng)
        v = u * np.exp(0.7j) + 1e-3 * random_unitary(rng)
        v, _ = np.linalg.qr(v)
        fast = distance_up_to_global_phase(u, v)
        slow = brute_global_distance(u, v)
        # the heuristic phase is never better than the optimum
        assert fast >= slow - 1e-9
        assert fast < 3 * slow + 1e-9


def test_global_phase_distance_is_zero_for_phase_multiple():
    u = random_unitary(np.random.default_rng(1))
    assert distance_up_to_global_phase(np.exp(-2.1j) * u, u) < 1e-14


def test_diagonal_phase_distance_recovers_phases():
    rng = np.random.default_rng(2)
    v = random_unitary(rng)
    phases = np.array([0.3, -1.2, 2.9, 0.0])
    dist, got = distance_up_to_diagonal_phase(np.diag(np.exp(1j * phases)) @ v, v)
    assert dist < 1e-13
    assert np.allclose(np.exp(1j * got), np.exp(1j * phases), atol=1e-13)


def test_diagonal_phase_is_row_not_column():
    # U = V D (column phases) is generally not D' V
    v = random_unitary(np.random.default_rng(4))
    d = np.diag(np.exp(1j * np.array([0.0, 1.0, 2.0, 3.0])))
    dist, _ = distance_up_to_diagonal_phase(v @ d, v)
    assert dist > 1e-3


def test_distances_reject_non_unitary():
    with pytest.raises(NotUnitaryError):
        distance_up_to_global_phase(2 * np.eye(4), np.eye(4))
    with pytest.raises(NotUnitaryError):
        distance_up_to_diagonal_phase(np.eye(4), np.ones((4, 4)))


def test_permuted_target_is_far_under_both_distances():
    v = np.eye(4)[[1, 0, 2, 3]]
    assert distance_up_to_global_phase(np.eye(4), v) >= 1.0
    dist, _ = distance_up_to_diagonal_phase(np.eye(4), v)
    assert dist >= 1.0


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_apply_unitary_preserves_density(seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    rho = 0.6 * pure_density(psi / np.linalg.norm(psi)) + 0.1 * np.eye(4)
    out = apply_unitary(random_unitary(rng), rho)
    check_density(out)
    assert abs(np.trace(out) - 1) < 1e-12


def test_check_density_failures():
    with pytest.raises(InvalidStateError):
        check_density(np.eye(3) / 3)
    with pytest.raises(InvalidStateError):
        check_density(np.eye(4) / 2)
    bad = np.eye(4) / 4
    bad[0, 1] = 0.1
    with pytest.raises(InvalidStateError):
        check_density(bad)
    neg = np.diag([0.7, 0.5, -0.1, -0.1]).astype(complex)
    assert not is_density(neg)
    assert is_density(np.eye(4) / 4)


def test_basis_state_labels():
    assert np.argmax(np.abs(basis_state("10"))) == 2
    with pytest.raises(ValueError):
        basis_state("2")
