"""Ideal gates of the two interferometer schemes and their pulse realizations.

Ideal matrices are written exactly as published:

* ``R1(theta) = [[alpha, -beta], [beta, alpha]]`` on spin b, with
  ``alpha = cos(theta/2)`` and ``beta = sin(theta/2)``;
* ``CN_ba`` with control b and target a;
* ``U(phi) = [[1, e^{i phi}], [-e^{-i phi}, 1]] / sqrt(2)`` on spin b.

Pulse realizations map their axis labels through
:data:`whichpath.pulses.LABEL_AXIS`, except the U(phi) sequence, which follows the explicit
exponential ``exp(-i Ix t1) exp(-i Iy t2) exp(-i Ix t1)`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pulses import Delay, PulseSequence, SpinSystem, compile_unitary, labeled_rf, rf
from .spin_algebra import (
    distance_up_to_diagonal_phase,
    distance_up_to_global_phase,
    on_b,
)

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class GateParams:
    theta: float

    @property
    def alpha(self):
        return float(np.cos(self.theta / 2))

    @property
    def beta(self):
        return float(np.sin(self.theta / 2))

    @property
    def population_ratio(self):
        """|alpha|^2 / |beta|^2 of the two intermediate states."""
        return self.alpha**2 / self.beta**2


@dataclass(frozen=True)
class UPulseAngles:
    theta1: float
    theta2: float


def r1_gate(theta):
    g = GateParams(theta)
    r = np.array([[g.alpha, -g.beta], [g.beta, g.alpha]], dtype=complex)
    return on_b(r)


def cnot_ideal():
    """CN_ba: flips spin a when spin b is |1>."""
    return np.eye(4, dtype=complex)[[0, 1, 3, 2]]


def r2_gate(theta):
    return cnot_ideal() @ r1_gate(theta)


def u_gate_ideal(phi):
    u = np.array(
        [[1, np.exp(1j * phi)], [-np.exp(-1j * phi), 1]], dtype=complex
    ) / np.sqrt(2)
    return on_b(u)


def u_pulse_angles(phi):
    """Pulse angles of the x-y-x decomposition of U(phi), principal branches."""
    theta1 = np.arctan(-np.sin(phi))
    theta2 = 2 * np.arcsin(-np.cos(phi) / np.sqrt(2))
    return UPulseAngles(float(theta1), float(theta2))


def r1_pulse_sequence(theta):
    """``(theta)_{-y}`` on spin b."""
    return PulseSequence([labeled_rf("b", "-y", theta)])


def cnot_pulse_sequence(system=None):
    """``(pi/2)_{-y}^a  1/(2J)  (pi/2)_y^{a,b}  (pi/2)_{-x}^{a,b}  (pi/2)_{-y}^b``."""
    system = system or SpinSystem()
    return PulseSequence(
        [
            labeled_rf("a", "-y", HALF_PI),
            Delay(system.half_period),
            labeled_rf("ab", "+y", HALF_PI),
            labeled_rf("ab", "-x", HALF_PI),
            labeled_rf("b", "-y", HALF_PI),
        ]
    )


def u_pulse_sequence(phi, angles_fn=u_pulse_angles):
    angles = angles_fn(phi)
    return PulseSequence(
        [
            rf("b", "+x", angles.theta1),
            rf("b", "+y", angles.theta2),
            rf("b", "+x", angles.theta1),
        ]
    )


def readout_sequence():
    """``(pi/2)_y^a`` then ``(pi/2)_y^b``.

    Each pulse opens its own acquisition (1H and 13C spectra respectively);
    see :func:`whichpath.measurement.line_amplitudes`.
    """
    return PulseSequence([labeled_rf("a", "+y", HALF_PI), labeled_rf("b", "+y", HALF_PI)])


@dataclass(frozen=True)
class CnotReport:
    distance: float
    phases: tuple  # radians, one per basis state

    @property
    def correction(self):
        """Diagonal unitary undoing the residual phases (a frame update)."""
        return np.diag(np.exp(-1j * np.asarray(self.phases)))

    @property
    def relative_phases(self):
        """Phases with the |00> phase removed, wrapped to (-pi, pi]."""
        p = np.asarray(self.phases) - self.phases[0]
        return tuple(float(np.angle(np.exp(1j * x))) for x in p)


def cnot_report(system=None):
    u = compile_unitary(cnot_pulse_sequence(system), system)
    dist, phases = distance_up_to_diagonal_phase(u, cnot_ideal())
    return CnotReport(dist, tuple(float(p) for p in phases))


def u_sweep_distance(phis, angles_fn=u_pulse_angles):
    """Worst global-phase distance between the pulsed and ideal U(phi).

    Returns ``(max_distance, phi_at_max)``.
    """
    worst, worst_phi = -1.0, None
    for phi in phis:
        d = distance_up_to_global_phase(
            compile_unitary(u_pulse_sequence(phi, angles_fn)), u_gate_ideal(phi)
        )
        if d > worst:
            worst, worst_phi = d, float(phi)
    return worst, worst_phi

