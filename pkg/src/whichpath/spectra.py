"""FID synthesis, DFT spectra, Lorentzian line fitting, and seeded error runs.

Each observed nucleus gives a doublet: the partner-0 line sits at
``offset + J/2`` and the partner-1 line at ``offset - J/2``. All lines share
one exponential T2 decay.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gates import readout_sequence
from .measurement import (
    LineAmplitudeSet,
    coherences_from_lines,
    line_amplitudes,
    marginal_b,
    populations_from_lines,
)
from .pipeline import GateLevel, PipelinePoint, final_state, initial_density

OBSERVABLES = ("p00", "p01", "p10", "p11", "p0b", "p1b", "c0", "c1")
MAX_CONDITION = 1e8
MIN_SEPARATION_LINEWIDTHS = 3.0


class IllConditioned(ValueError):
    pass


@dataclass(frozen=True)
class FidParams:
    dwell_time: float = 1e-3
    n_points: int = 4096
    t2: float = 0.5
    offset_b: float = 0.0  # Hz
    offset_a: float = 0.0  # Hz
    quadrature_sign: float = 1.0  # -1 swaps the receiver's imaginary channel

    def __post_init__(self):
        if self.quadrature_sign not in (1, -1):
            raise ValueError("quadrature_sign must be +1 or -1")
        n = int(self.n_points)
        if n < 256 or n & (n - 1):
            raise ValueError("n_points must be a power of two >= 256")
        if not self.dwell_time > 0:
            raise ValueError("dwell_time must be positive")
        if not self.t2 > 0:
            raise ValueError("t2 must be positive")

    def times(self):
        return np.arange(self.n_points) * self.dwell_time

    def freqs(self):
        return np.fft.fftfreq(self.n_points, self.dwell_time)

    def line_freqs(self, spin, j_coupling):
        off = self.offset_b if spin == "b" else self.offset_a
        return np.array([off + j_coupling / 2, off - j_coupling / 2])


@dataclass(frozen=True)
class ErrorModel:
    rf_scale_sigma: float = 0.0
    noise_sigma: float = 0.0
    n_shots: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.rf_scale_sigma < 0 or self.noise_sigma < 0:
            raise ValueError("error sigmas must be >= 0")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")


@lru_cache(maxsize=64)
def _fid_basis(params, freqs):
    t = params.times()
    return np.exp(np.outer(t, 2j * np.pi * np.asarray(freqs)) - (t / params.t2)[:, None])


def synthesize_fid(amplitudes, freqs, params: FidParams):
    """``s(t_k) = sum_m A_m exp(2 pi i nu_m t_k - t_k / T2)``."""
    nus = tuple(float(f) for f in np.atleast_1d(freqs))
    return _fid_basis(params, nus) @ np.asarray(amplitudes, dtype=complex)


def dft_spectrum(fid):
    """Unnormalized forward DFT; bin ``k`` sits at ``fftfreq(N, dt)[k]``."""
    fid = np.asarray(fid, dtype=complex)
    n = fid.size
    if n == 0 or n & (n - 1):
        raise ValueError("FID length must be a power of two")
    return np.fft.fft(fid)


def lorentzian_basis(freqs, line_freqs, t2, dwell_time):
    """DFT-scaled complex Lorentzians ``(T2/dt) / (1 + 2 pi i (f - nu) T2)``."""
    f = np.asarray(freqs)[:, None]
    nu = np.asarray(line_freqs)[None, :]
    return (t2 / dwell_time) / (1 + 2j * np.pi * (f - nu) * t2)


def fit_lines(spectrum, expected_freqs, t2, dwell_time):
    """Complex amplitudes of Lorentzian lines at known frequencies.

    Linear least squares over all DFT bins, frequencies and T2 held fixed.
    """
    nus = np.sort(np.asarray(expected_freqs, dtype=float))
    width = 1.0 / (np.pi * t2)  # FWHM in Hz
    if nus.size > 1 and np.min(np.diff(nus)) < MIN_SEPARATION_LINEWIDTHS * width:
        raise IllConditioned(
            f"lines closer than {MIN_SEPARATION_LINEWIDTHS:g} linewidths ({width:.3g} Hz)"
        )
    spectrum = np.asarray(spectrum, dtype=complex)
    key = tuple(float(f) for f in np.atleast_1d(expected_freqs))
    pinv, cond = _fit_operator(spectrum.size, key, float(t2), float(dwell_time))
    if not cond <= MAX_CONDITION:
        raise IllConditioned(f"design matrix condition number {cond:.3e}")
    return pinv @ spectrum


@lru_cache(maxsize=64)
def _fit_operator(n, freqs, t2, dwell_time):
    # least-squares solution operator of the fixed design, reused across calls
    design = lorentzian_basis(np.fft.fftfreq(n, dwell_time), freqs, t2, dwell_time)
    return np.linalg.pinv(design), float(np.linalg.cond(design))


def spectral_lines(lines: LineAmplitudeSet, params: FidParams, j_coupling, rng=None, noise_sigma=0.0):
    """Run every nucleus through synthesize -> (noise) -> DFT -> fit."""
    out = {}
    for spin in ("b", "a"):
        nus = params.line_freqs(spin, j_coupling)
        fid = synthesize_fid(lines.for_spin(spin), nus, params)
        if noise_sigma > 0:
            fid = fid + noise_sigma * (
                rng.standard_normal(fid.size) + 1j * rng.standard_normal(fid.size)
            )
        amps = fit_lines(dft_spectrum(fid), nus, params.t2, params.dwell_time)
        out[(spin, 0)], out[(spin, 1)] = complex(amps[0]), complex(amps[1])
    return LineAmplitudeSet(out)


def observables_from_lines(lines, reference, quadrature_sign=1.0):
    pops = populations_from_lines(lines, reference)
    coh = coherences_from_lines(lines, reference, quadrature_sign)
    p0b, p1b = marginal_b(pops)
    return dict(
        p00=pops.p00, p01=pops.p01, p10=pops.p10, p11=pops.p11,
        p0b=p0b, p1b=p1b, c0=coh.c0, c1=coh.c1,
    )


def shot_rng(seed, *indices):
    return np.random.default_rng([int(seed), *(int(i) for i in indices)])


def run_shot(point: PipelinePoint, error: ErrorModel, fid: FidParams, rng):
    """One realization: RF scale draw, pipeline, spectra, fitted observables."""
    g = 1.0 + error.rf_scale_sigma * rng.standard_normal() if error.rf_scale_sigma > 0 else 1.0
    readout = readout_sequence().scaled(g)
    j = point.system.j_coupling
    rho_ref, _, _ = initial_density(point.initial, rf_scale=g)
    rho, _, _ = final_state(point, rf_scale=g)
    ref = spectral_lines(line_amplitudes(rho_ref, readout), fid, j, rng, error.noise_sigma)
    lines = spectral_lines(line_amplitudes(rho, readout), fid, j, rng, error.noise_sigma)
    return observables_from_lines(lines, ref, fid.quadrature_sign)


@dataclass
class NoisyEstimate:
    mean: dict
    stderr: dict
    shots: np.ndarray = field(repr=False)  # (n_shots, len(OBSERVABLES))


def run_noisy_experiment(point: PipelinePoint, error: ErrorModel, fid: FidParams = None, row=0):
    """Monte-Carlo estimate of the observables with standard errors.

    Shot ``k`` of row ``row`` draws from ``default_rng([seed, row, k])`` so
    results do not depend on evaluation order.
    """
    fid = fid or FidParams()
    if error.rf_scale_sigma > 0 and GateLevel(point.gate_level) is GateLevel.IDEAL:
        raise ValueError("RF miscalibration needs pulse-level gates")
    data = np.empty((error.n_shots, len(OBSERVABLES)))
    for k in range(error.n_shots):
        obs = run_shot(point, error, fid, shot_rng(error.seed, row, k))
        data[k] = [obs[name] for name in OBSERVABLES]
    mean = data.mean(axis=0)
    if error.n_shots > 1:
        se = data.std(axis=0, ddof=1) / np.sqrt(error.n_shots)
    else:
        se = np.zeros(len(OBSERVABLES))
    return NoisyEstimate(
        dict(zip(OBSERVABLES, map(float, mean))),
        dict(zip(OBSERVABLES, map(float, se))),
        data,
    )


def fid_csv(fid, params: FidParams):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "time_s", "re", "im"])
    for k, (t, s) in enumerate(zip(params.times(), fid)):
        w.writerow([k, f"{t:.12g}", f"{s.real:.12g}", f"{s.imag:.12g}"])
    return buf.getvalue()


def spectrum_csv(spectrum, params: FidParams):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin", "freq_hz", "re", "im"])
    for k, (f, s) in enumerate(zip(params.freqs(), spectrum)):
        w.writerow([k, f"{f:.12g}", f"{s.real:.12g}", f"{s.imag:.12g}"])
    return buf.getvalue()
