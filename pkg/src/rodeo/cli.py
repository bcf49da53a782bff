"""Command-line driver: run a configured experiment and write CSV, SVG and a JSON summary.

Exit codes: 0 ok, 1 compare thresholds failed (compare mode), 2 invalid
config, 3 numerical guard, 4 breakdown in nmqj mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .config import parse_config
from .errors import NumericalGuard, RodeoError, SchemaError
from .exact import evolve_exact, n_steps_for, positivity_monitor
from .jump_mc import TrajectoryConfig, run_ensemble
from .model import density
from .nmqj import NMQJConfig, run_nmqj
from .observables import bloch_series, compare
from .policy import current_policy
from .svgplot import bloch_figure

COLUMNS = [
    "t", "x_exact", "y_exact", "z_exact", "x_mc", "y_mc", "z_mc",
    "stderr_x", "stderr_y", "stderr_z", "n_classes", "reverse_jumps_cum", "breakdown_flag",
]

EXIT_OK, EXIT_COMPARE, EXIT_SCHEMA, EXIT_GUARD, EXIT_BREAKDOWN = 0, 1, 2, 3, 4


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _error_info(exc):
    info = {"kind": getattr(exc, "kind", type(exc).__name__), "message": str(exc)}
    for attr in ("time", "index", "rate", "stream_id"):
        if getattr(exc, attr, None) is not None:
            info[attr] = getattr(exc, attr)
    if isinstance(exc, SchemaError):
        info["errors"] = [{"path": p, "message": m} for p, m in exc.errors]
    return info


def _event_info(ev):
    if ev is None:
        return None
    return {
        "time": ev.time,
        "source_class": ev.source_class,
        "eigenindex": ev.eigenindex,
        "rate": ev.rate,
        "missing_target": [[z.real, z.imag] for z in ev.missing_target],
    }


def write_trajectory_csv(path, exact, mc=None, n_classes=None, reverse_cum=None, breakdown_time=None):
    n_mc = 0 if mc is None else len(mc.times)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for k, t in enumerate(exact.times):
            row = [t, exact.x[k], exact.y[k], exact.z[k]]
            if k < n_mc:
                row += [mc.x[k], mc.y[k], mc.z[k], mc.stderr_x[k], mc.stderr_y[k], mc.stderr_z[k]]
            else:
                row += [None] * 6
            row.append(None if n_classes is None or k >= len(n_classes) else int(n_classes[k]))
            row.append(None if reverse_cum is None or k >= len(reverse_cum) else int(reverse_cum[k]))
            flag = breakdown_time is not None and t >= breakdown_time - 1e-12
            row.append(int(flag))
            w.writerow([_fmt(v) for v in row])


def write_populations_csv(path, populations):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "class_id", "weight"])
        for t, cid, weight in populations:
            w.writerow([_fmt(t), str(int(cid)), _fmt(weight)])


def _truncate(series, n):
    return type(series)(*(getattr(series, f)[:n] for f in series.__dataclass_fields__))


def _population_curves(populations):
    curves = {}
    for t, cid, weight in populations:
        ts, ws = curves.setdefault(int(cid), ([], []))
        ts.append(t)
        ws.append(weight)
    return curves


def run(cfg, out_dir=None, threads=None):
    """Execute ``cfg``; returns the exit code. Artifacts go to ``out_dir``."""
    out = Path(out_dir or cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / cfg.output[k] for k in ("trajectory_csv", "populations_csv", "plot_svg", "summary_json")}
    threads = threads or cfg.threads
    started = time.perf_counter()
    summary = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "dt": cfg.dt,
        "t_max": cfg.t_max,
        "n_traj": cfg.n_traj,
        "strategy": cfg.strategy,
        "numeric_policy": os.environ.get("RODEO_NUMERIC_POLICY", "default"),
        "error": None,
        "breakdown": None,
        "compare": None,
    }
    code = EXIT_OK
    exact_b = mc_b = None
    n_cls = rev = None
    populations = []
    bd_time = None
    try:
        me = cfg.build_model()
        strategy = cfg.build_strategy()
        psi0 = cfg.psi0()
        exact = evolve_exact(me, density(psi0), cfg.t_max, cfg.dt, cfg.record_every)
        exact_b = bloch_series(exact)
        mon = positivity_monitor(exact)
        summary["positivity"] = {
            "first_violation_time": mon.first_violation_time,
            "min_eigenvalue": float(mon.mu.min()),
            "violation_threshold": current_policy().violation_mu,
        }

        if cfg.mode == "jump":
            tc = TrajectoryConfig(cfg.dt, cfg.t_max, cfg.n_traj, cfg.seed, cfg.max_event_prob, cfg.record_every)
            res = run_ensemble(me, strategy, psi0, tc, threads=threads)
            mc_b = bloch_series(res.estimate)
            summary["n_jumps"] = res.n_jumps

        elif cfg.mode in ("nmqj", "witness", "compare"):
            nc = NMQJConfig(cfg.dt, cfg.t_max, cfg.n_traj, cfg.seed, cfg.max_event_prob, cfg.record_every)
            res = run_nmqj(me, strategy, psi0, nc)
            mc_b = bloch_series(res.estimate)
            n_cls, rev = res.n_classes, res.reverse_jumps_cum
            populations = res.populations
            summary["direct_jumps"] = res.direct_jumps
            summary["reverse_jumps"] = res.reverse_jumps
            summary["max_classes"] = int(n_cls.max())
            if res.breakdown is not None:
                ev = res.breakdown
                bd_time = ev.time
                info = _event_info(ev)
                # independent confirmation, at step resolution just past the event
                k = min(n_steps_for(cfg.t_max, cfg.dt), int(round(ev.time / cfg.dt)) + 10)
                fine = positivity_monitor(evolve_exact(me, density(psi0), k * cfg.dt, cfg.dt))
                later = fine.times > ev.time
                info["oracle"] = {
                    "first_violation_time": fine.first_violation_time,
                    "confirmed": bool(np.all(fine.mu[later] < -current_policy().violation_mu)),
                    "mu": [[float(t), float(m)] for t, m in zip(fine.times, fine.mu)],
                }
                summary["breakdown"] = info
                if cfg.mode == "nmqj":
                    code = EXIT_BREAKDOWN
                    summary["error"] = {"kind": "Breakdown", "message": f"breakdown at t={ev.time:.6g}"}

        if cfg.mode == "compare":
            # the independent-trajectory engine is reported alongside when it applies
            tc = TrajectoryConfig(cfg.dt, cfg.t_max, cfg.n_traj, cfg.seed, cfg.max_event_prob, cfg.record_every)
            try:
                res_a = run_ensemble(me, strategy, psi0, tc, threads=threads)
                rep = compare(bloch_series(res_a.estimate), exact_b,
                              cfg.compare["n_sigma"], cfg.compare["floor"])
                summary["compare_jump"] = rep.summary()
            except NumericalGuard as exc:
                summary["compare_jump"] = {"skipped": _error_info(exc)}

        if mc_b is not None:
            n = len(mc_b.times)
            rep = compare(mc_b, _truncate(exact_b, n), cfg.compare["n_sigma"], cfg.compare["floor"])
            summary["compare"] = rep.summary()
            if cfg.mode == "compare" and not rep.passed:
                code = EXIT_COMPARE

    except NumericalGuard as exc:
        code = EXIT_GUARD
        summary["error"] = _error_info(exc)
    except RodeoError as exc:
        code = EXIT_GUARD
        summary["error"] = _error_info(exc)

    if exact_b is not None:
        write_trajectory_csv(paths["trajectory_csv"], exact_b, mc_b, n_cls, rev, bd_time)
        write_populations_csv(paths["populations_csv"], populations)
        mc = None if mc_b is None else mc_b.components()
        if mc is not None and len(mc_b.times) < len(exact_b.times):
            pad = len(exact_b.times) - len(mc_b.times)
            mc = {k: np.concatenate([v, np.full(pad, np.nan)]) for k, v in mc.items()}
        svg = bloch_figure(exact_b.times, exact_b.components(), mc,
                           _population_curves(populations), title=f"{cfg.mode} mode")
        paths["plot_svg"].write_text(svg)
    summary["exit_code"] = code
    summary["runtime_s"] = round(time.perf_counter() - started, 3)
    paths["summary_json"].write_text(json.dumps(summary, indent=2, default=_json_default, allow_nan=False) + "\n")
    return code


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def build_parser():
    p = argparse.ArgumentParser(prog="rodeo", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--mode", choices=["exact", "jump", "nmqj", "witness", "compare"])
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output directory (overrides output.dir)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        current_policy()
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text, {"mode": args.mode, "seed": args.seed, "threads": args.threads})
    except (SchemaError, OSError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        out = Path(args.out or "out")
        out.mkdir(parents=True, exist_ok=True)
        err = _error_info(exc) if isinstance(exc, SchemaError) else {"kind": type(exc).__name__, "message": str(exc)}
        (out / "summary.json").write_text(json.dumps({"exit_code": EXIT_SCHEMA, "error": err}, indent=2) + "\n")
        return EXIT_SCHEMA
    code = run(cfg, args.out)
    if code:
        summary = json.loads((Path(args.out or cfg.output["dir"]) / cfg.output["summary_json"]).read_text())
        if summary.get("error"):
            print(f"{summary['error']['kind']}: {summary['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
