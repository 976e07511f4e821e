"""Phase sweeps of the two schemes, analytic curves, visibility, and dataset I/O."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .gates import GateParams
from .measurement import coherences, marginal_b, normalize_pseudo_pure, populations
from .pipeline import (
    GateLevel,
    InitialState,
    InitKind,
    PipelinePoint,
    Scheme,
    cnot_report,
    final_state,
)
from .prep import EffectivePureParams, ThermalParams
from .pulses import SpinSystem
from .spectra import OBSERVABLES, ErrorModel, FidParams, run_noisy_experiment

FIGURES = (2, 3, 4)
FIGURE_OBSERVABLES = {2: ("p00", "p10"), 3: ("p00", "p01", "p10", "p11", "p0b", "p1b"), 4: ("c0", "c1")}
FIGURE_SCHEME = {2: Scheme.UNMARKED, 3: Scheme.MARKED, 4: Scheme.MARKED}


class DegenerateSignal(ValueError):
    pass


def default_phi_grid(steps=24):
    if steps < 1:
        raise ValueError("phi grid needs at least one point")
    return tuple(2 * np.pi * k / steps for k in range(steps))


@dataclass(frozen=True)
class SweepConfig:
    theta: float
    scheme: Scheme = Scheme.UNMARKED
    phi_grid: tuple = field(default_factory=default_phi_grid)
    gate_level: GateLevel = GateLevel.IDEAL
    initial: InitialState = field(default_factory=InitialState)
    error: ErrorModel | None = None
    fid: FidParams = field(default_factory=FidParams)
    system: SpinSystem = field(default_factory=SpinSystem)
    cnot_correction: bool = True

    def __post_init__(self):
        grid = tuple(float(p) for p in self.phi_grid)
        if not grid:
            raise ValueError("phi grid is empty")
        if any(not 0 <= p < 2 * np.pi for p in grid):
            raise ValueError("phi values must lie in [0, 2 pi)")
        object.__setattr__(self, "phi_grid", grid)
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "gate_level", GateLevel(self.gate_level))

    def point(self, phi):
        return PipelinePoint(
            self.scheme, self.theta, phi, self.gate_level, self.initial,
            self.system, self.cnot_correction,
        )

    def to_flat(self):
        """Flat, order-stable dict (JSON sidecar)."""
        init, err = self.initial, self.error
        return {
            "scheme": self.scheme.value,
            "theta_rad": self.theta,
            "theta_deg": math.degrees(self.theta),
            "phi_grid_rad": list(self.phi_grid),
            "gate_level": self.gate_level.value,
            "init": InitKind(init.kind).value,
            "eff_A": init.effpure.A,
            "eff_B": init.effpure.B,
            "eps_b": init.thermal.eps_b,
            "eps_a": init.thermal.eps_a,
            "noisy": err is not None,
            "rf_spread": err.rf_scale_sigma if err else 0.0,
            "noise_sigma": err.noise_sigma if err else 0.0,
            "shots": err.n_shots if err else 1,
            "seed": err.seed if err else 0,
            "dwell_time": self.fid.dwell_time,
            "n_points": self.fid.n_points,
            "t2": self.fid.t2,
            "quadrature_sign": self.fid.quadrature_sign,
            "j_coupling": self.system.j_coupling,
            "freq_b": self.system.freq_b,
            "freq_a": self.system.freq_a,
            "cnot_correction": self.cnot_correction,
        }

    @classmethod
    def from_flat(cls, d):
        err = None
        if d["noisy"]:
            err = ErrorModel(d["rf_spread"], d["noise_sigma"], d["shots"], d["seed"])
        init = InitialState(
            InitKind(d["init"]),
            EffectivePureParams(d["eff_A"], d["eff_B"]),
            ThermalParams(d["eps_b"], d["eps_a"]),
        )
        return cls(
            theta=d["theta_rad"],
            scheme=Scheme(d["scheme"]),
            phi_grid=tuple(d["phi_grid_rad"]),
            gate_level=GateLevel(d["gate_level"]),
            initial=init,
            error=err,
            fid=FidParams(
                d["dwell_time"], d["n_points"], d["t2"], quadrature_sign=d["quadrature_sign"]
            ),
            system=SpinSystem(d["j_coupling"], d["freq_b"], d["freq_a"]),
            cnot_correction=d["cnot_correction"],
        )


@dataclass(frozen=True)
class Row:
    phi: float
    values: dict  # observable name -> float, keys in OBSERVABLES order
    stderr: dict | None = None

    def __getitem__(self, name):
        return self.values[name]


@dataclass
class SweepDataset:
    config: SweepConfig
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def phis(self):
        return np.array([r.phi for r in self.rows])

    def column(self, name):
        return np.array([r.values[name] for r in self.rows])

    @property
    def noisy(self):
        return any(r.stderr is not None for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["phi_rad", *OBSERVABLES]
        if self.noisy:
            header += [f"se_{n}" for n in OBSERVABLES]
        w.writerow(header)
        for r in self.rows:
            vals = [r.phi, *(r.values[n] for n in OBSERVABLES)]
            if self.noisy:
                vals += [r.stderr[n] for n in OBSERVABLES]
            w.writerow([_fmt(v) for v in vals])
        return buf.getvalue()

    def sidecar(self):
        out = self.config.to_flat()
        out.update(self.metadata)
        return out

    def to_json(self):
        return json.dumps(self.sidecar(), indent=1) + "\n"

    @classmethod
    def from_csv(cls, text, sidecar):
        """Rebuild a dataset from its CSV and JSON sidecar text."""
        meta = json.loads(sidecar) if isinstance(sidecar, str) else dict(sidecar)
        config = SweepConfig.from_flat(meta)
        cfg_keys = set(config.to_flat())
        metadata = {k: v for k, v in meta.items() if k not in cfg_keys}
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[: len(OBSERVABLES) + 1] != ["phi_rad", *OBSERVABLES]:
            raise ValueError(f"unexpected CSV header {header}")
        noisy = len(header) > len(OBSERVABLES) + 1
        rows = []
        for rec in reader:
            vals = [float(x) for x in rec]
            values = dict(zip(OBSERVABLES, vals[1 : 1 + len(OBSERVABLES)]))
            se = dict(zip(OBSERVABLES, vals[1 + len(OBSERVABLES) :])) if noisy else None
            rows.append(Row(vals[0], values, se))
        return cls(config, rows, metadata)

    def matches(self, other, rel=1e-11, abs_tol=1e-15):
        """Equality at the 12-significant-digit precision of the CSV form."""
        if len(self.rows) != len(other.rows) or self.noisy != other.noisy:
            return False
        for a, b in zip(self.rows, other.rows):
            pairs = [(a.phi, b.phi)] + [(a.values[n], b.values[n]) for n in OBSERVABLES]
            if a.stderr is not None:
                pairs += [(a.stderr[n], b.stderr[n]) for n in OBSERVABLES]
            if not all(math.isclose(x, y, rel_tol=rel, abs_tol=abs_tol) for x, y in pairs):
                return False
        return self.config.to_flat() == other.config.to_flat()


def _fmt(x):
    return f"{x + 0.0:.12g}"  # + 0.0 turns -0.0 into 0.0


def observables_of(rho):
    pops = populations(rho)
    coh = coherences(rho)
    p0b, p1b = marginal_b(pops)
    return dict(
        p00=pops.p00, p01=pops.p01, p10=pops.p10, p11=pops.p11,
        p0b=p0b, p1b=p1b, c0=coh.c0, c1=coh.c1,
    )


def run_point(config: SweepConfig, phi, row=0, record=None):
    """Observables at one phase: direct readout, or spectral Monte-Carlo when
    the config carries an error model."""
    point = config.point(phi)
    if config.error is not None:
        est = run_noisy_experiment(point, config.error, config.fid, row=row)
        return Row(float(phi), est.mean, est.stderr)
    rho, a, b = final_state(point, record=record)
    return Row(float(phi), observables_of(normalize_pseudo_pure(rho, a, b)))


def sweep(config: SweepConfig, workers=1):
    """One row per grid phase, in grid order regardless of ``workers``."""
    jobs = list(enumerate(config.phi_grid))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda j: run_point(config, j[1], row=j[0]), jobs))
    else:
        rows = [run_point(config, phi, row=i) for i, phi in jobs]
    return SweepDataset(config, rows, _metadata(config))


def _metadata(config):
    g = GateParams(config.theta)
    meta = {
        "population_ratio": g.population_ratio,
        "fringe_amplitude_expected": math.sin(config.theta),
    }
    if config.scheme is Scheme.UNMARKED:
        meta["fig2_note"] = (
            "gate matrices give 1/2(1 +/- sin(theta) cos(phi)); caption form uses "
            "sin(phi); caption(phi) = derived(phi - pi/2)"
        )
    if config.scheme is Scheme.MARKED and config.gate_level is GateLevel.PULSE:
        rep = cnot_report(config.system)
        meta["cnot_distance"] = rep.distance
        for i, p in enumerate(rep.phases):
            meta[f"cnot_phase_{i}"] = p
        if config.error is None:
            # surface what the residual CNOT phases would do if left uncorrected
            raw = replace(config, cnot_correction=not config.cnot_correction)
            shift = 0.0
            for phi in config.phi_grid:
                a = run_point(config, phi).values
                b = run_point(raw, phi).values
                shift = max(shift, abs(a["c0"] - b["c0"]), abs(a["c1"] - b["c1"]))
            meta["cnot_phase_coherence_shift"] = shift
    return meta


def theory_curve(figure, theta, phi):
    """Analytic curves as ``{"caption": {...}, "derived": {...}}``.

    ``derived`` follows from the gate matrices; ``caption`` is the published
    caption expression. They differ only for figure 2.
    """
    if figure not in FIGURES:
        raise ValueError(f"no theory curve for figure {figure!r}")
    s = math.sin(theta)
    if figure == 2:
        return {
            "caption": {"p00": 0.5 * (1 + s * math.sin(phi)), "p10": 0.5 * (1 - s * math.sin(phi))},
            "derived": {"p00": 0.5 * (1 + s * math.cos(phi)), "p10": 0.5 * (1 - s * math.cos(phi))},
        }
    if figure == 3:
        c2, s2 = 0.5 * math.cos(theta / 2) ** 2, 0.5 * math.sin(theta / 2) ** 2
        curve = {"p00": c2, "p01": s2, "p10": c2, "p11": s2, "p0b": 0.5, "p1b": 0.5}
    else:
        curve = {"c0": 0.5 * s * math.sin(phi), "c1": -0.5 * s * math.sin(phi)}
    return {"caption": dict(curve), "derived": dict(curve)}


def visibility(dataset: SweepDataset, observable):
    """Fringe contrast ``(max - min) / (max + min)`` over the grid."""
    v = dataset.column(observable)
    hi, lo = float(v.max()), float(v.min())
    if hi + lo < 1e-12:
        raise DegenerateSignal(f"{observable}: max + min = {hi + lo:.3e}")
    return (hi - lo) / (hi + lo)


def fit_fringe(phis, values):
    """Least-squares ``c + a cos(phi) + b sin(phi)``; returns ``(c, a, b)``."""
    phis = np.asarray(phis)
    design = np.column_stack([np.ones_like(phis), np.cos(phis), np.sin(phis)])
    (c, a, b), *_ = np.linalg.lstsq(design, np.asarray(values), rcond=None)
    return float(c), float(a), float(b)


def fringe_amplitude(phis, values):
    """Peak-to-peak amplitude of the fitted sinusoid."""
    _, a, b = fit_fringe(phis, values)
    return 2 * math.hypot(a, b)


def caption_phase_offset(dataset: SweepDataset, figure):
    """Phase ``delta`` such that ``caption(phi + delta)`` best matches the data.

    Every caption curve has the form ``const + K sin(phi)``; the data are
    projected on ``cos``/``sin`` and the K-weighted components combined.
    """
    theta = dataset.config.theta
    num = den = 0.0
    for name in FIGURE_OBSERVABLES[figure]:
        k = theory_curve(figure, theta, math.pi / 2)["caption"][name] - theory_curve(figure, theta, 0.0)["caption"][name]
        if abs(k) < 1e-15:
            continue
        _, a, b = fit_fringe(dataset.phis, dataset.column(name))
        num += k * a
        den += k * b
    if num == 0.0 and den == 0.0:
        return 0.0
    return math.atan2(num, den)


def compare(dataset: SweepDataset, figure, form="derived", fit_offset=False, observables=None):
    """Residuals of the dataset against an analytic curve.

    Returns ``{observable: {"max_abs": .., "rms": ..}, ..., "phi_offset": delta}``.
    """
    if form not in ("derived", "caption"):
        raise ValueError(f"unknown theory form {form!r}")
    names = FIGURE_OBSERVABLES[figure] if observables is None else tuple(observables)
    if not names:
        raise ValueError("empty observable selection")
    delta = caption_phase_offset(dataset, figure) if fit_offset else 0.0
    report = {}
    for name in names:
        model = np.array(
            [theory_curve(figure, dataset.config.theta, phi + delta)[form][name] for phi in dataset.phis]
        )
        res = dataset.column(name) - model
        report[name] = {"max_abs": float(np.max(np.abs(res))), "rms": float(np.sqrt(np.mean(res**2)))}
    report["phi_offset"] = delta
    return report


def flat_residuals(report, prefix):
    out = {}
    for name, val in report.items():
        if isinstance(val, dict):
            for k, v in val.items():
                out[f"{prefix}_{k}_{name}"] = v
        else:
            out[f"{prefix}_{name}"] = val
    return out
