import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given
from hypothesis import strategies as st

from whichpath.pulses import (
    Delay,
    GradientCrusher,
    NonUnitarySequence,
    PulseSequence,
    SpinSystem,
    TransitionPulse,
    compile_unitary,
    j_propagator,
    rf,
    rf_propagator,
    run_sequence,
    transition_propagator,
)
from whichpath.spin_algebra import IX, IY, IZ, basis_state, pure_density

I2 = np.eye(2)


def test_rf_on_both_spins_is_product_of_singles():
    both = rf_propagator("ab", "+x", 0.7)
    assert np.allclose(both, rf_propagator("a", "+x", 0.7) @ rf_propagator("b", "+x", 0.7))
    gen = np.kron(IX, I2) + np.kron(I2, IX)
    assert np.allclose(both, sl.expm(-0.7j * gen), atol=1e-12)


def test_j_propagator_against_expm():
    sysm = SpinSystem(j_coupling=180.0)
    t = 0.37e-3
    h = 2 * np.pi * 180.0 * np.kron(IZ, IZ)
    assert np.allclose(j_propagator(t, sysm), sl.expm(-1j * t * h), atol=1e-12)


def test_compile_is_reverse_order_product():
    a, b, c = rf("a", "+y", 0.3), Delay(1e-3), rf("b", "-x", 1.1)
    expect = rf_propagator("b", "-x", 1.1) @ j_propagator(1e-3) @ rf_propagator("a", "+y", 0.3)
    assert np.allclose(compile_unitary([a, b, c]), expect, atol=1e-14)
    # order matters for these non-commuting events
    assert not np.allclose(compile_unitary([c, b, a]), expect)


def test_run_sequence_matches_compiled():
    seq = PulseSequence([rf("a", "+y", 0.3), Delay(2e-3), rf("ab", "-x", 1.1)])
    rho = pure_density(basis_state("00"))
    u = compile_unitary(seq)
    record = []
    out = run_sequence(seq, rho, record=record)
    assert np.allclose(out, u @ rho @ u.conj().T, atol=1e-14)
    assert len(record) == 3
    assert np.array_equal(record[-1], out)


def test_crusher_kills_coherences_and_blocks_compilation():
    psi = np.full(4, 0.5)
    seq = PulseSequence([GradientCrusher()])
    out = run_sequence(seq, pure_density(psi))
    assert np.allclose(out, np.eye(4) / 4)
    with pytest.raises(NonUnitarySequence):
        compile_unitary(seq)
    assert seq.has_crusher


def test_transition_pulse_acts_only_on_pair():
    u = transition_propagator((1, 3), "+y", np.pi)
    assert np.allclose(np.abs(u @ basis_state("01")), np.abs(basis_state("11")))
    assert np.allclose(u @ basis_state("00"), basis_state("00"))
    gen = np.zeros((4, 4), complex)
    gen[np.ix_([1, 3], [1, 3])] = IY
    assert np.allclose(transition_propagator((1, 3), "+y", 0.8), sl.expm(-0.8j * gen), atol=1e-12)


def test_scaled_touches_flip_angles_only():
    seq = PulseSequence([rf("b", "+x", 1.0), Delay(1e-3), TransitionPulse((1, 3), 0.5), GradientCrusher()])
    s = seq.scaled(1.1)
    assert s.events[0].flip_angle == pytest.approx(1.1)
    assert s.events[1] == Delay(1e-3)
    assert s.events[2].flip_angle == pytest.approx(0.55)
    assert seq.scaled(1.0) is seq


events = st.one_of(
    st.builds(rf, st.sampled_from(["a", "b", "ab"]), st.sampled_from(["+x", "-x", "+y", "-y"]),
              st.floats(-10, 10, allow_nan=False)),
    st.builds(Delay, st.floats(0, 1, allow_nan=False)),
    st.just(GradientCrusher()),
    st.builds(TransitionPulse, st.sampled_from([(0, 1), (1, 3), (2, 3)]),
              st.floats(-10, 10, allow_nan=False), st.sampled_from(["+x", "-y"])),
)


@given(st.lists(events, max_size=8))
def test_text_round_trip(evs):
    seq = PulseSequence(evs)
    assert PulseSequence.from_text(seq.to_text()) == seq


def test_text_parse_errors_name_the_line():
    with pytest.raises(ValueError, match="line 2"):
        PulseSequence.from_text("crush\nrf q +x 1.0\n")
    assert len(PulseSequence.from_text("# comment only\n\ndelay 0.1  # trailing\n")) == 1


@pytest.mark.parametrize(
    "make",
    [
        lambda: rf("", "+x", 1.0),
        lambda: rf("c", "+x", 1.0),
        lambda: rf("a", "+z", 1.0),
        lambda: rf("a", "+x", float("nan")),
        lambda: Delay(-1.0),
        lambda: TransitionPulse((2, 2), 1.0),
        lambda: TransitionPulse((0, 4), 1.0),
        lambda: SpinSystem(j_coupling=0.0),
    ],
)
def test_invalid_events_rejected(make):
    with pytest.raises(ValueError):
        make()
