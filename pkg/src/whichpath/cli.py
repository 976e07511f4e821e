"""Command-line front end.

Exit codes: 0 success, 1 verification or solver failure, 2 usage error.
Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import gates
from .harness import (
    FIGURE_OBSERVABLES,
    FIGURE_SCHEME,
    SweepConfig,
    compare,
    default_phi_grid,
    flat_residuals,
    sweep,
    visibility,
)
from .pipeline import GateLevel, InitialState, InitKind, Scheme
from .pulses import SpinSystem
from .prep import DegenerateInput, EffectivePureParams, NoSolution, ThermalParams, solve_prep_angles
from .spectra import ErrorModel, FidParams

U_TOL = 1e-10
CNOT_TOL = 1e-10

# key -> (type, default); keys double as --flags and config-file keys
SETTINGS = {
    "scheme": (str, "unmarked"),
    "theta_deg": (float, 90.0),
    "phi_steps": (int, 24),
    "gates": (str, "ideal"),
    "init": (str, "pure"),
    "eff_a": (float, 0.2475),
    "eff_b": (float, 0.01),
    "eps_b": (float, 0.01),
    "eps_a": (float, 0.03977),
    "rf_spread": (float, 0.0),
    "noise_sigma": (float, 0.0),
    "shots": (int, 1),
    "seed": (int, 0),
    "dwell_time": (float, 1e-3),
    "n_points": (int, 4096),
    "t2": (float, 0.5),
    "quadrature": (int, 1),
    "j_coupling": (float, 215.0),
    "cnot_correction": (str, "on"),
    "workers": (int, 1),
    "out": (str, "sweep.csv"),
    "outdir": (str, "."),
}
CHOICES = {
    "scheme": ("marked", "unmarked"),
    "gates": ("ideal", "pulse"),
    "init": ("pure", "effpure", "thermal"),
    "cnot_correction": ("on", "off"),
    "quadrature": (1, -1),
}


class UsageError(Exception):
    pass


def read_config(path):
    """Parse a ``key = value`` file; unknown keys are an error."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SETTINGS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _convert(key, value)
    return out


def _convert(key, value):
    kind = SETTINGS[key][0]
    try:
        v = kind(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    if key in CHOICES and v not in CHOICES[key]:
        allowed = ", ".join(str(c) for c in CHOICES[key])
        raise UsageError(f"{key} must be one of {allowed}, got {v!r}")
    return v


def resolve(args, keys):
    """Merge defaults, config file, and explicit flags; return (settings, explicit)."""
    file_vals = read_config(args.config) if getattr(args, "config", None) else {}
    explicit = {}
    for key in keys:
        if key in file_vals:
            explicit[key] = file_vals[key]
        flag = getattr(args, key, None)
        if flag is not None:
            explicit[key] = _convert(key, flag) if isinstance(flag, str) else flag
    settings = {k: explicit.get(k, SETTINGS[k][1]) for k in keys}
    return settings, explicit


def build_config(s, explicit, scheme=None):
    if s["phi_steps"] < 1:
        raise UsageError("--phi-steps must be >= 1")
    if s["shots"] < 1:
        raise UsageError("--shots must be >= 1")
    if s["rf_spread"] < 0 or s["noise_sigma"] < 0:
        raise UsageError("error sigmas must be >= 0")
    if s["rf_spread"] > 0 and s["gates"] == "ideal":
        raise UsageError("--rf-spread needs --gates pulse (ideal gates have no flip angles)")
    if s["init"] != "effpure" and {"eff_a", "eff_b"} & set(explicit):
        raise UsageError("--eff-a/--eff-b only apply with --init effpure")
    if s["init"] != "thermal" and {"eps_a", "eps_b"} & set(explicit):
        raise UsageError("--eps-a/--eps-b only apply with --init thermal")
    try:
        initial = InitialState(
            InitKind(s["init"]),
            EffectivePureParams(s["eff_a"], s["eff_b"]),
            ThermalParams(s["eps_b"], s["eps_a"]),
        )
        noisy = s["rf_spread"] > 0 or s["noise_sigma"] > 0 or s["shots"] > 1
        error = ErrorModel(s["rf_spread"], s["noise_sigma"], s["shots"], s["seed"]) if noisy else None
        fid = FidParams(s["dwell_time"], s["n_points"], s["t2"], quadrature_sign=s["quadrature"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return SweepConfig(
        theta=math.radians(s["theta_deg"]),
        scheme=Scheme(scheme or s["scheme"]),
        phi_grid=default_phi_grid(s["phi_steps"]),
        gate_level=GateLevel(s["gates"]),
        initial=initial,
        error=error,
        fid=fid,
        system=SpinSystem(j_coupling=s["j_coupling"]),
        cnot_correction=s["cnot_correction"] == "on",
    )


def _write_outputs(dataset, csv_path, json_path):
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(dataset.to_csv(), encoding="utf-8")
    json_path.write_text(dataset.to_json(), encoding="utf-8")


def _attach_residuals(dataset):
    figs = (2,) if dataset.config.scheme is Scheme.UNMARKED else (3, 4)
    for fig in figs:
        dataset.metadata.update(flat_residuals(compare(dataset, fig), f"fig{fig}_derived"))
        if fig == 2:
            rep = compare(dataset, 2, form="caption", fit_offset=True)
            dataset.metadata.update(flat_residuals(rep, "fig2_caption"))


def _summary(dataset, out=None):
    out = out or sys.stdout
    cfg = dataset.config
    lead = "p00" if cfg.scheme is Scheme.UNMARKED else "p0b"
    try:
        vis = visibility(dataset, lead)
        print(f"visibility({lead}) = {vis:.4f}", file=out)
    except ValueError as exc:
        print(f"visibility({lead}) undefined: {exc}", file=out)
    for m in ("p0b", "p1b"):
        col = dataset.column(m)
        print(f"{m} variation = {col.max() - col.min():.3e}", file=out)
    for key, val in dataset.metadata.items():
        if "_max_abs_" in key or "_rms_" in key or key.startswith("cnot_phase"):
            print(f"{key} = {val:.3e}", file=out)


# gnuplot expressions of the analytic curves; theta is a script variable
_GP_CURVES = {
    2: {
        "p00": ("0.5*(1+sin(theta)*sin(x))", "0.5*(1+sin(theta)*cos(x))"),
        "p10": ("0.5*(1-sin(theta)*sin(x))", "0.5*(1-sin(theta)*cos(x))"),
    },
    3: {
        "p00": ("0.5*cos(theta/2)**2",) * 2,
        "p01": ("0.5*sin(theta/2)**2",) * 2,
        "p10": ("0.5*cos(theta/2)**2",) * 2,
        "p11": ("0.5*sin(theta/2)**2",) * 2,
        "p0b": ("0.5",) * 2,
        "p1b": ("0.5",) * 2,
    },
    4: {
        "c0": ("0.5*sin(theta)*sin(x)",) * 2,
        "c1": ("-0.5*sin(theta)*sin(x)",) * 2,
    },
}
_COLUMN = {n: i + 2 for i, n in enumerate(("p00", "p01", "p10", "p11", "p0b", "p1b", "c0", "c1"))}


def gnuplot_script(fig, dataset, csv_name):
    ylabel = "coherence" if fig == 4 else "normalized population"
    lines = [
        "# data points with caption (dashed) and matrix-derived (solid) curves",
        'set datafile separator ","',
        "set key outside right",
        "set xrange [0:2*pi]",
        'set xlabel "phi (rad)"',
        f'set ylabel "{ylabel}"',
        f"theta = {dataset.config.theta!r}",
    ]
    plots = []
    for name, (cap, der) in _GP_CURVES[fig].items():
        lines.append(f"caption_{name}(x) = {cap}")
        lines.append(f"derived_{name}(x) = {der}")
        col = _COLUMN[name]
        if dataset.noisy:
            plots.append(f'"{csv_name}" every ::1 using 1:{col}:{col + 8} with yerrorbars title "{name}"')
        else:
            plots.append(f'"{csv_name}" every ::1 using 1:{col} with points title "{name}"')
        plots.append(f'derived_{name}(x) with lines dt 1 title "derived {name}"')
        plots.append(f'caption_{name}(x) with lines dt 2 title "caption {name}"')
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _wrong_u_angles(phi):
    # deliberately broken decomposition, to prove verify can fail
    good = gates.u_pulse_angles(phi)
    return gates.UPulseAngles(-good.theta1, good.theta2)


def cmd_verify(args, out=None):
    out = out or sys.stdout
    angles_fn = _wrong_u_angles if args.inject_wrong_angles else gates.u_pulse_angles
    phis = np.linspace(0, 2 * np.pi, 721)
    worst, worst_phi = gates.u_sweep_distance(phis, angles_fn)
    rep = gates.cnot_report()
    print(f"U(phi) sweep: 721 points, max global-phase distance = {worst:.3e} at phi = {worst_phi:.6f}", file=out)
    print(f"CNOT sequence: diagonal-phase distance = {rep.distance:.3e}", file=out)
    print("CNOT phases (rad): " + " ".join(f"{p:+.12f}" for p in rep.phases), file=out)
    ok = worst < U_TOL and rep.distance < CNOT_TOL
    print("PASS" if ok else "FAIL", file=out)
    return 0 if ok else 1


def cmd_figure(args, out=None):
    out = out or sys.stdout
    s, explicit = resolve(args, [k for k in SETTINGS if k not in ("scheme", "out")])
    cfg = build_config(s, explicit, scheme=FIGURE_SCHEME[args.fig])
    data = sweep(cfg, workers=s["workers"])
    _attach_residuals(data)
    stem = f"fig{args.fig}_theta{s['theta_deg']:g}"
    outdir = Path(s["outdir"])
    _write_outputs(data, outdir / f"{stem}.csv", outdir / f"{stem}.json")
    (outdir / f"{stem}.gp").write_text(gnuplot_script(args.fig, data, f"{stem}.csv"), encoding="utf-8")
    print(f"wrote {outdir / stem}.csv/.json/.gp", file=out)
    _summary(data, out)
    return 0


def cmd_run(args, out=None):
    out = out or sys.stdout
    s, explicit = resolve(args, [k for k in SETTINGS if k != "outdir"])
    cfg = build_config(s, explicit)
    data = sweep(cfg, workers=s["workers"])
    _attach_residuals(data)
    csv_path = Path(s["out"])
    _write_outputs(data, csv_path, csv_path.with_suffix(".json"))
    print(f"wrote {csv_path} and {csv_path.with_suffix('.json')}", file=out)
    _summary(data, out)
    return 0


def cmd_prep(args, out=None):
    out = out or sys.stdout
    s, _ = resolve(args, ["eps_b", "eps_a"])
    try:
        thermal = ThermalParams(s["eps_b"], s["eps_a"])
        sol = solve_prep_angles(thermal)
    except (NoSolution, DegenerateInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out.write(sol.report())
    return 0


def _add_settings(p, keys):
    for key in keys:
        kind = SETTINGS[key][0]
        p.add_argument(
            "--" + key.replace("_", "-"), dest=key, default=None,
            type=str if key in CHOICES else kind,
            choices=[str(c) for c in CHOICES[key]] if key in CHOICES else None,
        )


def build_parser():
    parser = argparse.ArgumentParser(prog="whichpath", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check pulse sequences against ideal gates")
    v.add_argument("--inject-wrong-angles", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)

    run_keys = [k for k in SETTINGS if k != "outdir"]
    r = sub.add_parser("run", help="sweep phi for one scheme")
    r.add_argument("--config")
    _add_settings(r, run_keys)
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("figure", help="reproduce figure 2, 3 or 4")
    f.add_argument("fig", type=int, choices=sorted(FIGURE_OBSERVABLES))
    f.add_argument("--config")
    _add_settings(f, [k for k in SETTINGS if k not in ("scheme", "out")])
    f.set_defaults(func=cmd_figure)

    p = sub.add_parser("prep", help="solve the pseudo-pure preparation angles")
    p.add_argument("--config")
    _add_settings(p, ["eps_b", "eps_a"])
    p.set_defaults(func=cmd_prep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
