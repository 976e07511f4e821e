"""Pulse-level simulation of a two-spin NMR which-path interferometer.

Spin b (13C) interferes; spin a (1H) optionally marks its path through a
controlled-NOT. See :mod:`whichpath.harness` for phase sweeps and
:mod:`whichpath.cli` for the command-line tool.
"""

from .gates import (
    cnot_ideal,
    cnot_pulse_sequence,
    cnot_report,
    r1_gate,
    r2_gate,
    readout_sequence,
    u_gate_ideal,
    u_pulse_angles,
    u_pulse_sequence,
)
from .harness import SweepConfig, SweepDataset, compare, run_point, sweep, theory_curve, visibility
from .pipeline import GateLevel, InitialState, InitKind, PipelinePoint, Scheme
from .pulses import PulseSequence, SpinSystem, compile_unitary, run_sequence
from .spectra import ErrorModel, FidParams, run_noisy_experiment

__version__ = "0.1.0"
