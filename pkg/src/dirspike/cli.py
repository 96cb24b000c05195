"""Command-line front end: every command reads a TOML config, writes its
outputs into a directory, and prints a short deterministic summary.

Exit codes: 0 success, 1 property-suite failure, 2 usage or config error,
3 numerical failure (blow-up, vanished norm, missing bracket).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, config as cfgmod, navigation, simulate, verify
from .errors import (
    ConfigError,
    DirspikeError,
    IntegrationBlowup,
    NormVanished,
    ObstacleSingularity,
    ThresholdBracketError,
)
from .simulate import DetectorConfig, FullState, ReducedState, fmt_float

__all__ = ["build_parser", "main", "entry"]


def _common(sub: argparse.ArgumentParser, config_required: bool = True) -> None:
    sub.add_argument(
        "--config", required=config_required, help="path to a TOML config file"
    )
    sub.add_argument("--out", default="out", help="output directory (default: out)")
    sub.add_argument("--seed", type=int, default=0, help="seed for randomised suites")
    sub.add_argument(
        "--threads", type=int, default=1, help="worker threads for sweeps"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirspike",
        description="Simulate and analyse the directional spiking model.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("simulate", help="integrate one run and detect spikes")
    _common(s)

    s = subs.add_parser(
        "phase-plane", help="nullclines, equilibria, vector field and orbits"
    )
    _common(s)

    s = subs.add_parser("fi", help="steady firing rate across an input grid")
    _common(s)

    s = subs.add_parser(
        "thresholds", help="spiking window and excitability classification"
    )
    _common(s)

    s = subs.add_parser("navigate", help="closed-loop navigation scenario")
    _common(s)

    s = subs.add_parser("verify", help="run the dynamical property suites")
    _common(s, config_required=False)
    s.add_argument(
        "--suite",
        default="all",
        choices=sorted(verify.SUITES) + ["all"],
        help="which property suite to run (default: all)",
    )

    s = subs.add_parser("configs", help="list bundled configs or print one path")
    s.add_argument("--name", default=None, help="print the path of one bundled config")

    return parser


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args, expected_kind: str) -> dict:
    cfg = cfgmod.load_config(args.config)
    if cfg["kind"] != expected_kind:
        raise ConfigError(
            f"config {args.config} is a '{cfg['kind']}' config; this command "
            f"needs a '{expected_kind}' config"
        )
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load(args, "sim")
    out = _outdir(args)
    p = cfgmod.build_model_params(cfg)
    det = cfgmod.build_detector(cfg)
    meta = cfgmod.effective_meta(cfg)
    sim = cfg["sim"]
    dt = sim["dt"] if sim["dt"] is not None else p.tau / 50.0
    input_u = cfgmod.build_input_fn(cfg)

    if sim["system"] == "reduced":
        s0 = ReducedState(r=float(sim["r0"]), x_s=float(sim["xs0"]))
        traj = simulate.simulate_reduced(s0, input_u, p, dt=dt, t_end=float(sim["t_end"]))
    elif sim["system"] == "full":
        if sim["x0"] is None:
            raise ConfigError("[sim].x0 is required for a full run")
        x0 = np.asarray([float(v) for v in sim["x0"]])
        s0 = FullState(x=x0, x_s=float(sim["xs0"]))
        traj = simulate.simulate_full(s0, input_u, p, dt=dt, t_end=float(sim["t_end"]))
    else:
        raise ConfigError(f"[sim].system must be 'full' or 'reduced', got {sim['system']!r}")

    train = simulate.detect_spikes(
        traj, r_up=det.r_up, r_down=det.r_down,
        steady_window=det.steady_frac * (traj.t_end - traj.t0),
    )
    traj_path = out / "trajectory.csv"
    spikes_path = out / "spikes.json"
    simulate.write_trajectory_csv(traj, traj_path, meta)
    simulate.write_spikes_json(train, spikes_path, meta)
    print(f"wrote {traj_path} ({traj.r.shape[0]} rows)")
    print(
        f"wrote {spikes_path} (spikes={train.n_spikes}, "
        f"steady_frequency={fmt_float(train.steady_frequency)})"
    )
    return 0


def cmd_phase_plane(args) -> int:
    cfg = _load(args, "scan")
    out = _outdir(args)
    p = cfgmod.build_model_params(cfg)
    meta = cfgmod.effective_meta(cfg)
    ph = cfg["phase"]
    u_values = ph["u_values"]
    if not u_values:
        raise ConfigError("[phase].u_values is required for phase-plane")
    u_values = [float(u) for u in u_values]
    r_grid = np.linspace(0.0, float(ph["r_max"]), int(ph["n_grid"]))

    xs_curve = analysis.nullcline_xs(p, r_grid)
    path = out / "nullcline_xs.csv"
    with open(path, "w") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write("r,x_s\n")
        for r, xs in zip(xs_curve.r, xs_curve.x_s):
            fh.write(f"{fmt_float(r)},{fmt_float(xs)}\n")
    print(f"wrote {path}")

    records = []
    field_n = int(ph["field_n"])
    for k, u in enumerate(u_values):
        curve = analysis.nullcline_r(u, p, r_grid)
        path = out / f"nullcline_r_{k}.csv"
        with open(path, "w") as fh:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
            fh.write(f"# u_tilde={fmt_float(u)}\n")
            fh.write("r,x_s\n")
            for r, xs in zip(curve.r, curve.x_s):
                fh.write(f"{fmt_float(r)},{fmt_float(xs)}\n")
        print(f"wrote {path}")

        eqs = analysis.find_equilibria(u, p)
        records.extend(e.to_record(u) for e in eqs)

        xs_lo = float(min(0.0, np.nanmin(curve.x_s)))
        xs_hi = float(max(np.nanmax(xs_curve.x_s), 1.0))
        rr = np.linspace(0.0, float(ph["r_max"]), field_n)
        ss = np.linspace(xs_lo, xs_hi, field_n)
        path = out / f"field_{k}.csv"
        with open(path, "w") as fh:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
            fh.write(f"# u_tilde={fmt_float(u)}\n")
            fh.write("r,x_s,dr_dt,dxs_dt\n")
            for xs in ss:
                f1, f2 = analysis.reduced_rhs(rr, xs, u, p)
                for i in range(field_n):
                    fh.write(
                        f"{fmt_float(rr[i])},{fmt_float(xs)},"
                        f"{fmt_float(f1[i])},{fmt_float(f2[i])}\n"
                    )
        print(f"wrote {path}")

        dt = cfg["scan"]["dt"] if cfg["scan"]["dt"] is not None else p.tau / 50.0
        orbit = simulate.simulate_reduced(
            ReducedState(0.0, 0.0), u, p, dt=dt, t_end=float(ph["orbit_t_end"])
        )
        orbit_meta = dict(meta)
        orbit_meta["phase.orbit_u_tilde"] = fmt_float(u)
        path = out / f"orbit_{k}.csv"
        simulate.write_trajectory_csv(orbit, path, orbit_meta)
        print(f"wrote {path}")

    path = out / "equilibria.jsonl"
    analysis.write_jsonl(path, records)
    print(f"wrote {path} ({len(records)} equilibria)")
    return 0


def _fi_grid(cfg: dict) -> np.ndarray:
    sc, fi = cfg["scan"], cfg["fi"]
    lo = fi["u_min"] if fi["u_min"] is not None else sc["u_min"]
    hi = fi["u_max"] if fi["u_max"] is not None else sc["u_max"]
    return np.linspace(float(lo), float(hi), int(fi["n_points"]))


def cmd_fi(args) -> int:
    cfg = _load(args, "scan")
    out = _outdir(args)
    p = cfgmod.build_model_params(cfg)
    det = cfgmod.build_detector(cfg)
    meta = cfgmod.effective_meta(cfg)
    grid = _fi_grid(cfg)
    dt = cfg["scan"]["dt"]
    points = simulate.fi_curve(
        p, grid, dt=dt, t_end=float(cfg["fi"]["t_end"]),
        detector=det, threads=args.threads,
    )
    path = out / "fi_curve.csv"
    with open(path, "w") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write("u_tilde,frequency\n")
        for u, f in points:
            fh.write(f"{fmt_float(u)},{fmt_float(f)}\n")
    print(f"wrote {path} ({len(points)} points)")
    spiking = [f for _, f in points if f > 0]
    if spiking:
        print(
            f"spiking at {len(spiking)}/{len(points)} grid points, "
            f"f in [{fmt_float(min(spiking))}, {fmt_float(max(spiking))}]"
        )
    else:
        print("no steady spiking on this grid")
    return 0


def cmd_thresholds(args) -> int:
    cfg = _load(args, "scan")
    out = _outdir(args)
    p = cfgmod.build_model_params(cfg)
    det = cfgmod.build_detector(cfg)
    meta = cfgmod.effective_meta(cfg)
    sc = cfg["scan"]
    report = analysis.classify_type(
        p,
        (float(sc["u_min"]), float(sc["u_max"])),
        tol=float(sc["tol"]),
        dt=sc["dt"],
        detector=det,
        threads=args.threads,
    )
    doc = report.to_dict()
    doc["config"] = {k: meta[k] for k in sorted(meta)}
    path = out / "thresholds.json"
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")

    flat = {k: v for k, v in doc.items() if not isinstance(v, (dict, list))}
    flat["u_range"] = f"{sc['u_min']}..{sc['u_max']}"
    path = out / "threshold_report.txt"
    analysis.write_report_txt(path, flat)
    print(f"wrote {path}")
    print(
        f"window alpha*u in [{fmt_float(doc['alpha_u_lower'])}, "
        f"{fmt_float(doc['alpha_u_upper'])}] "
        f"({doc['lower_mechanism']} onset), type={report.excitability_type}"
    )
    return 0


def cmd_navigate(args) -> int:
    cfg = _load(args, "nav")
    out = _outdir(args)
    meta = cfgmod.effective_meta(cfg)
    scenario = cfgmod.build_nav_scenario(cfg)
    traj, metrics = navigation.run_scenario(scenario)
    traj_path = out / "nav_trajectory.csv"
    metrics_path = out / "metrics.json"
    navigation.write_nav_csv(traj, traj_path, meta)
    navigation.write_metrics_json(metrics, metrics_path, meta)
    print(f"wrote {traj_path} ({traj.t.shape[0]} rows)")
    print(
        f"wrote {metrics_path} (duty_cycle={fmt_float(metrics.duty_cycle)}, "
        f"max_err={fmt_float(metrics.max_tracking_error_after_transient)})"
    )
    return 0


def cmd_verify(args) -> int:
    out = _outdir(args)
    results = verify.run_suite(args.suite, seed=args.seed)
    lines = []
    failed = 0
    for r in results:
        tag = "ok" if r.passed else "FAIL"
        line = f"{tag:4s} {r.name}: {r.detail}"
        print(line)
        lines.append(line)
        if not r.passed:
            failed += 1
    path = out / "verify_report.txt"
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.write(f"failed={failed} of {len(results)}\n")
    print(f"wrote {path}")
    return 1 if failed else 0


def cmd_configs(args) -> int:
    if args.name:
        print(cfgmod.bundled_config_path(args.name))
        return 0
    for name in cfgmod.bundled_config_names():
        print(f"{name}\t{cfgmod.bundled_config_path(name)}")
    return 0


_DISPATCH = {
    "simulate": cmd_simulate,
    "phase-plane": cmd_phase_plane,
    "fi": cmd_fi,
    "thresholds": cmd_thresholds,
    "navigate": cmd_navigate,
    "verify": cmd_verify,
    "configs": cmd_configs,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (IntegrationBlowup, NormVanished, ThresholdBracketError, ObstacleSingularity) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except DirspikeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
