"""End-to-end evolution for the two interferometer schemes.

Unmarked: ``R1(theta)`` then ``U(phi)``. Marked: ``R2(theta) = CN_ba R1(theta)``
then ``U(phi)``. Gates are either ideal matrices or compiled pulse
sequences; a stage is a 4x4 unitary or a :class:`PulseSequence`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

from . import gates
from .measurement import normalize_pseudo_pure
from .prep import (
    EffectivePureParams,
    ThermalParams,
    effective_pure,
    prepare,
    solve_prep_angles,
)
from .pulses import PulseSequence, SpinSystem, compile_unitary, run_sequence
from .spin_algebra import apply_unitary, basis_state, pure_density


class Scheme(str, enum.Enum):
    UNMARKED = "unmarked"
    MARKED = "marked"


class GateLevel(str, enum.Enum):
    IDEAL = "ideal"
    PULSE = "pulse"


class InitKind(str, enum.Enum):
    PURE = "pure"
    EFFPURE = "effpure"
    THERMAL = "thermal"


@dataclass(frozen=True)
class InitialState:
    kind: InitKind = InitKind.PURE
    effpure: EffectivePureParams = field(default_factory=EffectivePureParams)
    thermal: ThermalParams = field(default_factory=ThermalParams)


@dataclass(frozen=True)
class PipelinePoint:
    scheme: Scheme
    theta: float
    phi: float
    gate_level: GateLevel = GateLevel.IDEAL
    initial: InitialState = field(default_factory=InitialState)
    system: SpinSystem = field(default_factory=SpinSystem)
    cnot_correction: bool = True


@lru_cache(maxsize=32)
def _cnot_report(system):
    return gates.cnot_report(system)


@lru_cache(maxsize=32)
def _prep_solution(thermal):
    return solve_prep_angles(thermal)


def prep_solution(thermal):
    return _prep_solution(thermal)


def cnot_report(system):
    return _cnot_report(system)


def scheme_stages(point: PipelinePoint):
    """Ordered ``(label, stage)`` list from the intermediate-state gate onward."""
    level = GateLevel(point.gate_level)
    marked = Scheme(point.scheme) is Scheme.MARKED
    if level is GateLevel.IDEAL:
        stages = [("R1", gates.r1_gate(point.theta))]
        if marked:
            stages.append(("CN", gates.cnot_ideal()))
        stages.append(("U", gates.u_gate_ideal(point.phi)))
        return stages
    stages = [("R1", gates.r1_pulse_sequence(point.theta))]
    if marked:
        stages.append(("CN", gates.cnot_pulse_sequence(point.system)))
        if point.cnot_correction:
            # frame update, not an RF pulse: unaffected by flip-angle errors
            stages.append(("CN-phase", cnot_report(point.system).correction))
    stages.append(("U", gates.u_pulse_sequence(point.phi)))
    return stages


def evolve(stages, rho, system=None, rf_scale=1.0, record=None):
    for _, stage in stages:
        if isinstance(stage, PulseSequence):
            rho = run_sequence(stage.scaled(rf_scale), rho, system, record=record)
        else:
            rho = apply_unitary(stage, rho)
            if record is not None:
                record.append(rho)
    return rho


def initial_density(initial: InitialState, rf_scale=1.0, record=None):
    """Return ``(rho, A, B)``; ``A`` and ``B`` are the nominal normalization.

    ``rf_scale`` only matters for the thermal preparation pulses.
    """
    kind = InitKind(initial.kind)
    if kind is InitKind.PURE:
        rho, a, b = pure_density(basis_state("00")), 0.0, 1.0
    elif kind is InitKind.EFFPURE:
        rho, a, b = effective_pure(initial.effpure), initial.effpure.A, initial.effpure.B
    else:
        sol = prep_solution(initial.thermal)
        rho = prepare(initial.thermal, sol.angles, rf_scale=rf_scale, record=record)
        return rho, sol.A, sol.B
    if record is not None:
        record.append(rho)
    return rho, a, b


def final_state(point: PipelinePoint, rf_scale=1.0, record=None):
    """Final density matrix plus nominal ``(A, B)`` of its initial state."""
    rho, a, b = initial_density(point.initial, rf_scale, record)
    rho = evolve(scheme_stages(point), rho, point.system, rf_scale, record)
    return rho, a, b


def normalized_final_state(point: PipelinePoint):
    rho, a, b = final_state(point)
    return normalize_pseudo_pure(rho, a, b)


def compiled_propagators(point: PipelinePoint):
    """Every crusher-free pulse stage compiled to a unitary (for checks)."""
    return [
        compile_unitary(stage, point.system)
        for _, stage in scheme_stages(point)
        if isinstance(stage, PulseSequence)
    ]

