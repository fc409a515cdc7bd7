"""Command-line front end.

    muchlab MODE [--config FILE] [--out DIR] [--n INT] [--t-end REAL]

Exit status: 0 on success (a detected blow-up counts as success), 1 when
``verify`` finds a failing criterion, 2 for configuration errors, 3 for
numerical failures.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import blowup as B
from . import config as C
from . import io
from . import verify as V
from .characteristics import trace_characteristic
from .errors import ConfigError, InvalidFieldError, MuchLabError, NoRealPeakonError
from .model import StateU
from .peakons import integrate_peakons
from .timestepper import DT_UNDERFLOW, NON_FINITE, integrate

log = logging.getLogger("muchlab")

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _outdir(cfg: dict) -> Path:
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seeds(cfg: dict, u0: np.ndarray) -> list[float]:
    if cfg["seeds"]:
        return [float(s) for s in cfg["seeds"]]
    return [B.slope_infimum(u0)[1]]


def _assessments(cfg: dict, u0: np.ndarray, seeds) -> dict:
    params = C.params_of(cfg)
    if params.gamma != 0.0:
        return {"skipped": "blow-up criteria assume gamma = 0"}
    return {
        "constants": B.breaking_constants(u0, params).as_dict(),
        "assessments": [a.as_dict() for a in B.assess_all(u0, params, seeds)],
    }


def _pde_run(cfg: dict):
    u0 = C.initial_field(cfg)
    run = integrate(StateU(0.0, u0), cfg["t_end"], C.params_of(cfg), C.control_of(cfg))
    return u0, run


def _write_run(cfg: dict, out: Path, run) -> dict:
    io.write_diagnostics(out / "diagnostics.csv", run.diagnostics)
    every = cfg["output"]["snapshot_every"]
    snaps = run.snapshots[::every]
    if snaps[-1] is not run.snapshots[-1]:
        snaps.append(run.snapshots[-1])
    io.write_snapshots(out / "snapshots.csv", snaps)
    if cfg["output"]["plot_script"]:
        io.write_plot_script(out / "plot_diagnostics.py", "diagnostics.csv")
    det = cfg["detector"]
    report = B.runtime_detector(run.diagnostics, det["gamma_threshold"],
                                det["split_threshold"], det["m_budget"])
    return {
        "termination": run.termination.as_dict(),
        "n_accepted": run.n_accepted,
        "n_rejected": run.n_rejected,
        "detection": report.as_dict(),
    }


def _status(run) -> int:
    return EXIT_NUMERICAL if run.termination.kind in (DT_UNDERFLOW, NON_FINITE) else EXIT_OK


def _header(cfg: dict) -> dict:
    return {"mode": cfg["mode"], "params": cfg["params"], "n": cfg["grid"]["n"],
            "t_end": cfg["t_end"], "initial": cfg.get("initial")}


def cmd_simulate(cfg: dict) -> int:
    out = _outdir(cfg)
    u0, run = _pde_run(cfg)
    summary = _header(cfg) | _write_run(cfg, out, run)
    summary["blowup"] = _assessments(cfg, u0, _seeds(cfg, u0))
    io.write_json(out / "summary.json", summary)
    log.info("simulate: %s at t=%g", run.termination.kind, run.termination.t)
    return _status(run)


def cmd_characteristics(cfg: dict) -> int:
    out = _outdir(cfg)
    u0, run = _pde_run(cfg)
    summary = _header(cfg) | _write_run(cfg, out, run)
    seeds = [float(s) for s in cfg["seeds"]] or list(np.arange(8) / 8.0)
    rows, traces = [], []
    for x0 in seeds:
        tr = trace_characteristic(run, x0)
        for j in range(tr.t.size):
            rows.append((x0, tr.t[j], tr.q[j], tr.qx[j], tr.m[j], tr.ux[j], tr.Gamma[j], tr.residual[j]))
        traces.append({"x0": x0, "t_last": float(tr.t[-1]), "truncated": tr.truncated,
                       "min_qx": float(tr.qx.min()),
                       "max_abs_residual": float(np.max(np.abs(tr.residual)))})
    io.write_csv(out / "characteristics.csv",
                 ["x0", "t", "q", "qx", "m", "ux", "Gamma", "residual"], rows)
    summary["characteristics"] = traces
    io.write_json(out / "summary.json", summary)
    return _status(run)


def cmd_peakon(cfg: dict) -> int:
    out = _outdir(cfg)
    sys0 = C.peakon_system(cfg)
    params = C.params_of(cfg)
    t_end = cfg["t_end"]
    times = np.linspace(0.0, t_end, cfg["peakon"]["samples"])
    traj = integrate_peakons(sys0, t_end, params, C.control_of(cfg),
                             variant=cfg["peakon"]["variant"], sample_times=times)
    n = sys0.n_peaks
    header = ["t", "sum_p"] + [f"p{i}" for i in range(n)] + [f"q{i}" for i in range(n)]
    rows = ([traj.t[k], traj.sum_p[k], *traj.p[k], *traj.q[k]] for k in range(traj.t.size))
    io.write_csv(out / "trajectory.csv", header, rows)
    if cfg["output"]["plot_script"]:
        io.write_plot_script(out / "plot_trajectory.py", "trajectory.csv")
    span = traj.t[-1] - traj.t[0]
    summary = _header(cfg) | {
        "variant": cfg["peakon"]["variant"],
        "p_initial": sys0.p, "q_initial": sys0.q,
        "p_final": traj.p[-1], "q_final_mod1": traj.q[-1] % 1.0,
        "mean_speed": (traj.q[-1] - traj.q[0]) / span,
        "sum_p_drift": float(np.max(np.abs(traj.sum_p - traj.sum_p[0]))),
        "n_accepted": traj.n_accepted,
    }
    io.write_json(out / "summary.json", summary)
    return EXIT_OK


def cmd_blowup_check(cfg: dict) -> int:
    out = _outdir(cfg)
    u0 = C.initial_field(cfg)
    if C.params_of(cfg).gamma != 0.0:
        raise ConfigError("blowup-check needs gamma = 0")
    summary = _header(cfg) | _assessments(cfg, u0, _seeds(cfg, u0))
    summary["inf_u0x"], summary["argmin_u0x"] = B.slope_infimum(u0)
    io.write_json(out / "summary.json", summary)
    for a in summary["assessments"]:
        status = f"t* = {a['t_star']!r}" if a["hypotheses_met"] else "; ".join(a["reasons"])
        print(f"theorem {a['theorem']} x0={a['x0']!r}: {status}")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    vcfg = cfg["verify"]
    try:
        results = V.run_all(vcfg.get("tolerances"), vcfg.get("criteria"))
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    for r in results:
        print(r.summary_line())
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if cfg["output"].get("dir"):
        io.write_json(_outdir(cfg) / "verify.json",
                      {"criteria": [r.as_dict() for r in results], "failed": failed})
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _threads() -> int:
    raw = os.environ.get("MUCHLAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"MUCHLAB_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise ConfigError(f"MUCHLAB_THREADS must be a positive integer, got {raw!r}")
    return val


def _child(cfg: dict) -> int:
    # runs in a worker process; errors become exit codes so one bad point does not sink the sweep
    return run(cfg)


def cmd_sweep(cfg: dict) -> int:
    if "sweep" not in cfg:
        raise ConfigError("sweep mode needs a 'sweep' section")
    out = _outdir(cfg)
    axes = cfg["sweep"]["axes"]
    keys = sorted(axes)
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    base["mode"] = cfg["sweep"].get("mode", "simulate")
    children = []
    for i, combo in enumerate(itertools.product(*(axes[k] for k in keys))):
        child = base
        for k, v in zip(keys, combo):
            child = C.set_dotted(child, k, v)
        C.validate(child)  # every point is checked before any computation starts
        child["output"] = dict(child["output"], dir=str(out / f"run_{i:03d}"))
        children.append((combo, child))
    workers = min(_threads(), len(children)) or 1
    if workers == 1:
        codes = [_child(c) for _, c in children]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            codes = list(pool.map(_child, [c for _, c in children]))
    rows = [[f"run_{i:03d}", *combo, code] for i, ((combo, _), code) in enumerate(zip(children, codes))]
    with (out / "sweep.csv").open("w", newline="") as fh:
        fh.write(",".join(["run", *keys, "exit_code"]) + "\n")
        for row in rows:
            fh.write(",".join(io.fmt(v) if not isinstance(v, str) else v for v in row) + "\n")
    return max(codes) if codes else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "peakon": cmd_peakon,
    "characteristics": cmd_characteristics,
    "blowup-check": cmd_blowup_check,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="muchlab", description="Generalized mu-CH solver and checks")
    ap.add_argument("mode", choices=C.MODES)
    ap.add_argument("--config", help="YAML or JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--n", type=int, help="grid size (overrides grid.n)")
    ap.add_argument("--t-end", type=float, dest="t_end", help="final time (overrides t_end)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(cfg: dict) -> int:
    """Execute a loaded config and return the process exit status."""
    try:
        return COMMANDS[cfg["mode"]](cfg)
    except (ConfigError, NoRealPeakonError, InvalidFieldError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MuchLabError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = C.load(args.config, mode=args.mode, out=args.out, n=args.n, t_end=args.t_end)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
