import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from whichpath.gates import readout_sequence
from whichpath.measurement import (
    LINES,
    READ_SIGN,
    coherences,
    coherences_from_lines,
    line_amplitudes,
    marginal_b,
    normalize_pseudo_pure,
    populations,
    populations_from_lines,
    transition,
)
from whichpath.spin_algebra import IY, basis_state, pure_density

I2 = np.eye(2)


def random_state(seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def read_oracle(rho, spin):
    # the published read pulse (pi/2)_y acts as exp(+i pi/2 Iy) in this
    # simulator's axis convention; applied only to the observed spin
    op = np.kron(IY, I2) if spin == "b" else np.kron(I2, IY)
    u = sl.expm(1j * np.pi / 2 * op)
    return u @ rho @ u.conj().T


def test_transition_indices():
    assert [transition(*k) for k in LINES] == [(0, 2), (1, 3), (0, 1), (2, 3)]
    with pytest.raises(ValueError):
        transition("c", 0)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_read_sign_rederived(seed):
    rho = random_state(seed)
    lines = line_amplitudes(rho, readout_sequence())
    for spin, m in LINES:
        lo, up = transition(spin, m)
        after = read_oracle(rho, spin)
        assert lines[(spin, m)] == pytest.approx(2 * after[lo, up], abs=1e-12)
    # with a diagonal state the real parts are population differences
    diag = np.diag(np.diag(rho))
    lines = line_amplitudes(diag, readout_sequence())
    for spin, m in LINES:
        lo, up = transition(spin, m)
        expect = READ_SIGN["re"] * (diag[lo, lo] - diag[up, up]).real
        assert lines[(spin, m)].real == pytest.approx(expect, abs=1e-12)


def test_imaginary_part_carries_signed_coherence():
    psi = (basis_state("00") + 1j * basis_state("01")) / np.sqrt(2)
    rho = 0.75 * np.eye(4) / 4 + 0.25 * pure_density(psi)
    c = coherences(rho)
    assert c.c0 == pytest.approx(-2 * rho[0, 1].imag)
    lines = line_amplitudes(rho, readout_sequence())
    assert lines[("a", 0)].imag == pytest.approx(READ_SIGN["im"] * c.c0, abs=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_populations_round_trip_through_lines(seed):
    rho = random_state(seed)
    a, b = 0.2475, 0.01
    ref = a * np.eye(4) + b * pure_density(basis_state("00"))
    state = a * np.eye(4) + b * rho
    ro = readout_sequence()
    pops = populations_from_lines(line_amplitudes(state, ro), line_amplitudes(ref, ro))
    assert np.allclose(pops.as_array(), populations(rho).as_array(), atol=1e-10)
    coh = coherences_from_lines(line_amplitudes(state, ro), line_amplitudes(ref, ro))
    direct = coherences(rho)
    assert (coh.c0, coh.c1) == pytest.approx((direct.c0, direct.c1), abs=1e-10)
    flipped = coherences_from_lines(line_amplitudes(state, ro), line_amplitudes(ref, ro), -1)
    assert flipped.c0 == pytest.approx(-coh.c0)


def test_zero_reference_rejected():
    ro = readout_sequence()
    flat = line_amplitudes(np.eye(4) / 4, ro)
    with pytest.raises(ValueError):
        populations_from_lines(flat, flat)
    with pytest.raises(ValueError):
        coherences_from_lines(flat, flat)


def test_normalization_and_marginals():
    rho = 0.2475 * np.eye(4) + 0.01 * pure_density(basis_state("10"))
    pure = normalize_pseudo_pure(rho, 0.2475, 0.01)
    assert np.allclose(pure, pure_density(basis_state("10")))
    assert marginal_b(populations(pure)) == pytest.approx((0.0, 1.0))
    with pytest.raises(ValueError):
        normalize_pseudo_pure(rho, 0.25, 0.0)
