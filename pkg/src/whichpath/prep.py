"""Initial states: effective pure states, thermal equilibrium, and the
two-transition-pulse + gradient preparation with its angle solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .pulses import GradientCrusher, PulseSequence, TransitionPulse, run_sequence

GAMMA_RATIO_H_C = 3.977

# spin-a line with b = 1, then spin-b line with a = 1
PREP_PAIRS = ((2, 3), (1, 3))
PREP_RESIDUAL_TOL = 1e-9


class NoSolution(RuntimeError):
    pass


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class ThermalParams:
    eps_b: float = 0.01
    eps_a: float = 0.01 * GAMMA_RATIO_H_C

    def __post_init__(self):
        if not abs(self.eps_a) + abs(self.eps_b) < 1:
            raise ValueError("high-temperature expansion needs |eps_a| + |eps_b| < 1")

    def scaled(self, factor):
        return ThermalParams(self.eps_b * factor, self.eps_a * factor)


@dataclass(frozen=True)
class EffectivePureParams:
    A: float = 0.2475
    B: float = 0.01

    def __post_init__(self):
        if abs(4 * self.A + self.B - 1) > 1e-12:
            raise ValueError(f"need 4A + B = 1, got {4 * self.A + self.B!r}")
        if self.A < 0 or self.B < 0:
            raise ValueError("A and B must be non-negative")


def effective_pure(params: EffectivePureParams):
    """``A E + B |00><00|``."""
    rho = params.A * np.eye(4, dtype=complex)
    rho[0, 0] += params.B
    return rho


def thermal_state(params: ThermalParams):
    """High-temperature equilibrium ``E/4 + eps_b Iz(b) + eps_a Iz(a)``."""
    zb = np.array([0.5, 0.5, -0.5, -0.5])
    za = np.array([0.5, -0.5, 0.5, -0.5])
    return np.diag(0.25 + params.eps_b * zb + params.eps_a * za).astype(complex)


def prep_sequence(angles, axis="+y"):
    (p1, p2), (a1, a2) = PREP_PAIRS, angles
    return PulseSequence(
        [TransitionPulse(p1, a1, axis), TransitionPulse(p2, a2, axis), GradientCrusher()]
    )


def prepare(thermal: ThermalParams, angles, rf_scale=1.0, record=None):
    """Transition pulses on (|10>,|11>) then (|01>,|11>), then the crusher.

    The two pulses are applied in sequence; ideal selective rotations on
    these pairs share |11> and do not commute, so the order is fixed.
    """
    seq = prep_sequence(angles).scaled(rf_scale)
    return run_sequence(seq, thermal_state(thermal), record=record)


def _prep_populations(thermal, angles):
    # diagonal input keeps every intermediate state diagonal -> populations suffice
    p = np.diag(thermal_state(thermal)).real.copy()
    for (i, j), ang in zip(PREP_PAIRS, angles):
        c2, s2 = np.cos(ang / 2) ** 2, np.sin(ang / 2) ** 2
        p[i], p[j] = c2 * p[i] + s2 * p[j], s2 * p[i] + c2 * p[j]
    return p


def _equalization_error(angles, thermal):
    p = _prep_populations(thermal, angles)
    return np.array([p[1] - p[3], p[2] - p[3]])


@dataclass(frozen=True)
class PrepSolution:
    angles: tuple
    residual: float
    A: float
    B: float

    def report(self):
        a1, a2 = self.angles
        return (
            f"angles_rad = {a1:.12f} {a2:.12f}  residual = {self.residual:.3e}\n"
            f"A = {self.A:.12g}  B = {self.B:.12g}\n"
        )


def pseudo_pure_weights(rho):
    """Read ``(A, B)`` off a diagonal ``A E + B |00><00|`` state."""
    p = np.diag(rho).real
    a = float(np.mean(p[1:]))
    return a, float(p[0] - a)


def solve_prep_angles(thermal: ThermalParams, grid=61):
    """Flip angles equalizing the |01>, |10>, |11> populations after crushing.

    A coarse grid over [0, pi]^2 picks the starting point; a Powell-hybrid
    root solve refines it. Deterministic for given inputs.
    """
    if thermal.eps_a == 0 and thermal.eps_b == 0:
        raise DegenerateInput("zero polarization: nothing to equalize")
    axis = np.linspace(0.0, np.pi, grid)
    best, start = np.inf, None
    for a1 in axis:
        for a2 in axis:
            r = np.max(np.abs(_equalization_error((a1, a2), thermal)))
            if r < best:
                best, start = r, (a1, a2)
    # errors are linear in eps; solve on the unit-scale problem for conditioning
    scale = max(abs(thermal.eps_a), abs(thermal.eps_b))
    sol = optimize.root(
        lambda x: _equalization_error(x, thermal) / scale, start, method="hybr", tol=1e-15
    )
    angles = tuple(float(x) for x in sol.x)
    rho = prepare(thermal, angles)
    p = np.diag(rho).real
    residual = float(max(abs(p[1] - p[3]), abs(p[2] - p[3])))
    if not residual < PREP_RESIDUAL_TOL:
        raise NoSolution(f"equalization residual {residual:.3e} after refinement")
    a, b = pseudo_pure_weights(rho)
    if not b > 0:
        raise NoSolution(f"prepared state has B = {b:.3e} <= 0")
    return PrepSolution(angles, residual, a, b)
