"""Pulse-sequence events, their propagators, and sequence execution.

A pulse ``(theta)_n`` is the propagator ``exp(-i theta (I . n))`` on every
targeted spin. Delays evolve only the weak scalar coupling
``H = 2 pi J Iz(b) Iz(a)`` (doubly rotating frame, zero offsets). The
gradient crusher is an idealized dephaser that zeroes every coherence.

Sequences are chronological: ``events[0]`` acts first, so the compiled
propagator is ``U_n ... U_2 U_1``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from .spin_algebra import (
    AXES,
    E4,
    I2,
    apply_unitary,
    expm_diagonal,
    kron,
    require_unitary,
    rotation,
)

SPINS = ("a", "b")

# Sequence-notation axis label -> simulator axis. The published gate matrices
# come out of exp(-i theta I.n) only with every transverse axis label negated.
LABEL_AXIS = {"+x": "-x", "-x": "+x", "+y": "-y", "-y": "+y"}


class NonUnitarySequence(ValueError):
    """A sequence containing a gradient crusher has no single propagator."""


@dataclass(frozen=True)
class SpinSystem:
    """Heteronuclear two-spin system: b = 13C (observed), a = 1H (marker)."""

    j_coupling: float = 215.0  # Hz
    freq_b: float = 125.0  # MHz
    freq_a: float = 500.0  # MHz

    def __post_init__(self):
        if not self.j_coupling > 0:
            raise ValueError("j_coupling must be positive")
        if not (self.freq_a > 0 and self.freq_b > 0):
            raise ValueError("resonance frequencies must be positive")

    @property
    def half_period(self):
        """The 1/(2J) free-evolution time, in seconds."""
        return 1.0 / (2.0 * self.j_coupling)


def _check_axis(axis):
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


@dataclass(frozen=True)
class RfPulse:
    targets: frozenset
    axis: str
    flip_angle: float

    def __post_init__(self):
        targets = frozenset(self.targets)
        if not targets or targets - set(SPINS):
            raise ValueError(f"pulse targets must be a nonempty subset of {SPINS}")
        object.__setattr__(self, "targets", targets)
        _check_axis(self.axis)
        if not np.isfinite(self.flip_angle):
            raise ValueError("flip angle must be finite")


@dataclass(frozen=True)
class Delay:
    duration: float

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration >= 0):
            raise ValueError("delay duration must be finite and >= 0")


@dataclass(frozen=True)
class GradientCrusher:
    pass


@dataclass(frozen=True)
class TransitionPulse:
    pair: tuple
    flip_angle: float
    axis: str = "+y"

    def __post_init__(self):
        i, j = (int(k) for k in self.pair)
        if i == j:
            raise ValueError("transition pulse needs two distinct basis states")
        if not (0 <= i < 4 and 0 <= j < 4):
            raise ValueError("transition indices must lie in 0..3")
        object.__setattr__(self, "pair", (i, j))
        _check_axis(self.axis)
        if not np.isfinite(self.flip_angle):
            raise ValueError("flip angle must be finite")


PulseEvent = Union[RfPulse, Delay, GradientCrusher, TransitionPulse]


def rf(targets, axis, flip_angle):
    """Shorthand: ``rf("ab", "+y", pi/2)``."""
    return RfPulse(frozenset(targets), axis, float(flip_angle))


def labeled_rf(targets, label, flip_angle):
    """RF pulse given by its sequence-notation axis label (see LABEL_AXIS)."""
    return rf(targets, LABEL_AXIS[label], flip_angle)


@dataclass(frozen=True)
class PulseSequence:
    events: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __iter__(self) -> Iterator[PulseEvent]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def __add__(self, other):
        return PulseSequence(self.events + tuple(other))

    @property
    def has_crusher(self):
        return any(isinstance(e, GradientCrusher) for e in self.events)

    def scaled(self, factor):
        """Copy with every flip angle multiplied by ``factor`` (RF miscalibration)."""
        if factor == 1.0:
            return self
        out = []
        for e in self.events:
            if isinstance(e, (RfPulse, TransitionPulse)):
                e = dataclasses.replace(e, flip_angle=e.flip_angle * factor)
            out.append(e)
        return PulseSequence(out)

    def to_text(self):
        return "".join(format_event(e) + "\n" for e in self.events)

    @classmethod
    def from_text(cls, text):
        events = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                try:
                    events.append(parse_event(line))
                except (ValueError, IndexError) as exc:
                    raise ValueError(f"line {lineno}: {exc}") from None
        return cls(events)


def format_event(event):
    if isinstance(event, RfPulse):
        targets = "".join(sorted(event.targets))
        return f"rf {targets} {event.axis} {event.flip_angle!r}"
    if isinstance(event, Delay):
        return f"delay {event.duration!r}"
    if isinstance(event, GradientCrusher):
        return "crush"
    if isinstance(event, TransitionPulse):
        i, j = event.pair
        return f"tsel {i} {j} {event.axis} {event.flip_angle!r}"
    raise TypeError(f"not a pulse event: {event!r}")


def parse_event(line):
    tok = line.split()
    kind = tok[0]
    if kind == "rf" and len(tok) == 4:
        return rf(tok[1], tok[2], float(tok[3]))
    if kind == "delay" and len(tok) == 2:
        return Delay(float(tok[1]))
    if kind == "crush" and len(tok) == 1:
        return GradientCrusher()
    if kind == "tsel" and len(tok) == 5:
        return TransitionPulse((int(tok[1]), int(tok[2])), float(tok[4]), tok[3])
    raise ValueError(f"cannot parse pulse event {line!r}")


def rf_propagator(targets, axis, flip_angle, system=None):
    """Propagator of a hard pulse on the given spins (identity on the rest)."""
    targets = frozenset(targets)
    r = rotation(axis, flip_angle)
    return kron(r if "b" in targets else I2, r if "a" in targets else I2)


def j_propagator(duration, system=None):
    """Free evolution under ``2 pi J Iz Iz`` for ``duration`` seconds."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    system = system or SpinSystem()
    zz = np.array([0.25, -0.25, -0.25, 0.25])
    return expm_diagonal(2 * np.pi * system.j_coupling * zz, duration)


def transition_propagator(pair, axis, flip_angle):
    """Rotation confined to the two-level subspace spanned by ``pair``.

    ``pair[0]`` plays the role of |0> and ``pair[1]`` of |1> in the 2x2 block.
    """
    i, j = pair
    if i == j:
        raise ValueError("transition pulse needs two distinct basis states")
    r = rotation(axis, flip_angle)
    u = E4.copy()
    idx = [i, j]
    for p in range(2):
        for q in range(2):
            u[idx[p], idx[q]] = r[p, q]
    return u


def crusher(rho):
    """Idealized gradient: keep the diagonal, zero every coherence."""
    return np.diag(np.diag(np.asarray(rho, dtype=complex)))


def event_propagator(event, system=None):
    if isinstance(event, RfPulse):
        return rf_propagator(event.targets, event.axis, event.flip_angle, system)
    if isinstance(event, Delay):
        return j_propagator(event.duration, system)
    if isinstance(event, TransitionPulse):
        return transition_propagator(event.pair, event.axis, event.flip_angle)
    if isinstance(event, GradientCrusher):
        raise NonUnitarySequence("a gradient crusher has no unitary propagator")
    raise TypeError(f"not a pulse event: {event!r}")


def compile_unitary(seq: Iterable[PulseEvent], system=None):
    """Reverse-order product of the event propagators."""
    u = E4.copy()
    for event in seq:
        u = event_propagator(event, system) @ u
    return require_unitary(u)


def run_sequence(seq: Iterable[PulseEvent], rho0, system=None, record=None):
    """Apply events chronologically to ``rho0``.

    If ``record`` is a list, the state after every event is appended to it.
    """
    rho = np.asarray(rho0, dtype=complex)
    for event in seq:
        if isinstance(event, GradientCrusher):
            rho = crusher(rho)
        else:
            rho = apply_unitary(event_propagator(event, system), rho)
        if record is not None:
            record.append(rho)
    return rho
