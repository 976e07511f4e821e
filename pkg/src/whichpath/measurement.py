"""Observables: populations, marginals, signed coherences, and spectral lines.

Coherence convention: ``C = -2 Im(rho[i, j])`` for the upper-triangular
element of the pair, so the marked scheme gives ``c0 = +1/2 sin(theta) sin(phi)``
and ``c1 = -1/2 sin(theta) sin(phi)``.

Spectral lines are labeled ``(observed spin, partner state)``. Line
``("b", m)`` is the 13C transition |0m> <-> |1m>; line ``("a", m)`` is the
1H transition |m0> <-> |m1>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pulses import PulseSequence, RfPulse, run_sequence

LINES = (("b", 0), ("b", 1), ("a", 0), ("a", 1))

# Line amplitude after a (pi/2)_y read pulse, in terms of pre-read quantities:
#   Re = READ_SIGN["re"] * (p_lower - p_upper),   Im = READ_SIGN["im"] * C
# Fixed once by direct simulation (tests/test_measurement.py re-derives it).
READ_SIGN = {"re": -1.0, "im": -1.0}

# below this a reference line is indistinguishable from no signal
MIN_REFERENCE = 1e-12


@dataclass(frozen=True)
class PopulationVector:
    p00: float
    p01: float
    p10: float
    p11: float

    def as_array(self):
        return np.array([self.p00, self.p01, self.p10, self.p11])


@dataclass(frozen=True)
class CoherencePair:
    c0: float  # |00>, |01>
    c1: float  # |10>, |11>


@dataclass(frozen=True)
class LineAmplitudeSet:
    """Complex amplitudes keyed by ``(spin, partner)``."""

    amplitudes: dict

    def __getitem__(self, key):
        return self.amplitudes[key]

    def for_spin(self, spin):
        return [self.amplitudes[(spin, m)] for m in (0, 1)]

    def as_array(self):
        return np.array([self.amplitudes[k] for k in LINES])


def transition(spin, partner):
    """Basis indices ``(lower, upper)`` of a single-quantum transition."""
    if spin == "b":
        return partner, 2 + partner
    if spin == "a":
        return 2 * partner, 2 * partner + 1
    raise ValueError(f"unknown spin {spin!r}")


def normalize_pseudo_pure(rho, A, B):
    """Map ``A E + B rho_pure``-type states back to the pure-state scale."""
    if not B > 0:
        raise ValueError("B must be positive to normalize")
    return (np.asarray(rho, dtype=complex) - A * np.eye(4)) / B


def populations(rho):
    d = np.diag(np.asarray(rho)).real
    return PopulationVector(*(float(x) for x in d))


def marginal_b(pops: PopulationVector):
    return pops.p00 + pops.p01, pops.p10 + pops.p11


def coherences(rho):
    rho = np.asarray(rho)
    return CoherencePair(float(-2 * rho[0, 1].imag), float(-2 * rho[2, 3].imag))


def _acquisition(readout, spin):
    # one acquisition per observed nucleus, using only the read pulses on it
    return PulseSequence(
        [e for e in readout if not (isinstance(e, RfPulse) and spin not in e.targets)]
    )


def line_amplitudes(rho, readout, system=None):
    """Post-read single-quantum line amplitudes.

    For each observed spin the read pulses addressing that spin are applied
    to ``rho`` (a separate acquisition per nucleus), and each line amplitude
    is twice the matrix element ``rho'[lower, upper]`` of its transition.
    """
    out = {}
    for spin in ("b", "a"):
        after = run_sequence(_acquisition(readout, spin), rho, system)
        for m in (0, 1):
            lo, up = transition(spin, m)
            out[(spin, m)] = complex(2 * after[lo, up])
    return LineAmplitudeSet(out)


def populations_from_lines(lines: LineAmplitudeSet, reference: LineAmplitudeSet):
    """Normalized populations from the real parts of the four lines.

    ``reference`` holds the lines of the |00>-like initial state; its
    partner-0 lines fix the per-nucleus scale (and sign). The four
    population differences plus unit trace are solved by least squares.
    """
    d = {}
    for spin in ("b", "a"):
        ref = reference[(spin, 0)].real
        if abs(ref) < MIN_REFERENCE:
            raise ValueError(f"reference line ({spin!r}, 0) has zero intensity")
        for m in (0, 1):
            d[(spin, m)] = lines[(spin, m)].real / ref
    rows, rhs = [], []
    for key, val in d.items():
        lo, up = transition(*key)
        row = np.zeros(4)
        row[lo], row[up] = 1.0, -1.0
        rows.append(row)
        rhs.append(val)
    rows.append(np.ones(4))
    rhs.append(1.0)
    p, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return PopulationVector(*(float(x) for x in p))


def coherences_from_lines(lines: LineAmplitudeSet, reference: LineAmplitudeSet, quadrature_sign=1.0):
    """Normalized ``(c0, c1)`` from the imaginary parts of the 1H lines.

    ``quadrature_sign=-1`` flips the receiver quadrature convention.
    """
    ref = reference[("a", 0)].real
    if abs(ref) < MIN_REFERENCE:
        raise ValueError("reference line ('a', 0) has zero intensity")
    # Re(ref) = READ_SIGN["re"] * B and Im(line) = READ_SIGN["im"] * B * C
    k = quadrature_sign * READ_SIGN["re"] / READ_SIGN["im"] / ref
    return CoherencePair(k * lines[("a", 0)].imag, k * lines[("a", 1)].imag)
