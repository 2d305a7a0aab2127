"""Command-line front end: classification, simulation and the verification
experiments as reproducible batch runs.

Every output file embeds the fully resolved configuration (tool version,
seed, every numeric setting) and contains no timestamps or execution
details, so re-running the same command reproduces the file byte for byte;
``--threads`` only changes wall time.  Exit codes: 0 success, 1 a configured
tolerance check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .integrator import CROSSINGS, SCHEMES, EventSpec, PathState, StepConfig, simulate_path
from .montecarlo import (
    FUNCTIONALS,
    EnsembleConfig,
    hitting_probability,
    importance_estimate,
    martingale_drift_test,
    stationary_sample,
    stream_generator,
)
from .params import O2BPParams
from .regime import classify, stationary_law_report
from .stats import BetaLaw, GammaLaw, beta_cdf, beta_gamma_transform, gamma_cdf, ks_test

SCHEMA_VERSION = 1

_DEFAULTS = {
    "params": {"alpha": 1.0, "beta": 0.0, "gamma": 0.0, "delta": 1.0, "rho": 0.0, "theta": 0.0, "eta": 0.0},
    "step": {"dt": 1e-3, "cross_floor": 1e-8, "scheme": "drift-implicit", "truncation_level": 1},
    "events": {"eps_x": 1e-4, "eps_y": 1e-4, "eps_corner": 1e-3, "crossing": "grid"},
    "run": {
        "paths": 1000,
        "seed": None,
        "horizon": 10.0,
        "start": [1.0, 1.0],
        "stride": 1,
        "burn_in": 5.0,
        "spacing": 0.5,
        "count": 10000,
        "times": [0.5, 1.0, 2.0],
        "which": "corner",
        "functional": "exp-neg-sum",
        "box": 100.0,
    },
    "tolerances": {
        "ks": 0.02,
        "se_multiplier": 3.0,
        "min_frequency": None,
        "max_frequency": None,
    },
}

_FLAG_MAP = {
    # dest -> (section, key)
    "alpha": ("params", "alpha"),
    "beta": ("params", "beta"),
    "gamma": ("params", "gamma"),
    "delta": ("params", "delta"),
    "rho": ("params", "rho"),
    "theta": ("params", "theta"),
    "eta": ("params", "eta"),
    "dt": ("step", "dt"),
    "cross_floor": ("step", "cross_floor"),
    "scheme": ("step", "scheme"),
    "truncation_level": ("step", "truncation_level"),
    "eps_x": ("events", "eps_x"),
    "eps_y": ("events", "eps_y"),
    "eps_corner": ("events", "eps_corner"),
    "crossing": ("events", "crossing"),
    "paths": ("run", "paths"),
    "seed": ("run", "seed"),
    "horizon": ("run", "horizon"),
    "start": ("run", "start"),
    "stride": ("run", "stride"),
    "burn_in": ("run", "burn_in"),
    "spacing": ("run", "spacing"),
    "count": ("run", "count"),
    "times": ("run", "times"),
    "which": ("run", "which"),
    "functional": ("run", "functional"),
    "box": ("run", "box"),
    "ks_tol": ("tolerances", "ks"),
    "se_mult": ("tolerances", "se_multiplier"),
    "min_frequency": ("tolerances", "min_frequency"),
    "max_frequency": ("tolerances", "max_frequency"),
}


class CliError(Exception):
    """Invalid input; maps to exit code 2."""


def _parse_start(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    if text in ("stationary-mean", "stationary-law"):
        return text
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(f"start must be 'x,y' or a start tag, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError as e:
        raise CliError(f"bad start point {text!r}: {e}") from None


def _parse_times(text):
    if isinstance(text, (list, tuple)):
        return [float(t) for t in text]
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError as e:
        raise CliError(f"bad times list {text!r}: {e}") from None


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CliError(f"cannot read config {path}: {e}") from None
    if not isinstance(raw, dict):
        raise CliError("config root must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CliError(f"unsupported config schema_version {version!r} (expected {SCHEMA_VERSION})")
    for section, content in raw.items():
        if section == "schema_version":
            continue
        if section not in _DEFAULTS:
            raise CliError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise CliError(f"config section {section!r} must be an object")
        for key in content:
            if key not in _DEFAULTS[section]:
                raise CliError(f"unknown config field {section}.{key!r}")
    return raw


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < command-line flags."""
    cfg = {s: dict(v) for s, v in _DEFAULTS.items()}
    if getattr(args, "config", None):
        raw = _load_config_file(args.config)
        for section, content in raw.items():
            if section == "schema_version":
                continue
            cfg[section].update(content)
    for dest, (section, key) in _FLAG_MAP.items():
        val = getattr(args, dest, None)
        if val is not None:
            cfg[section][key] = val
    if cfg["run"]["seed"] is None:
        env = os.environ.get("O2BP_DEFAULT_SEED")
        if env is not None:
            try:
                cfg["run"]["seed"] = int(env)
            except ValueError:
                raise CliError(f"O2BP_DEFAULT_SEED must be an integer, got {env!r}") from None
        else:
            cfg["run"]["seed"] = 0
    cfg["run"]["start"] = _parse_start(cfg["run"]["start"])
    cfg["run"]["times"] = _parse_times(cfg["run"]["times"])
    return cfg


def _build(cfg: dict):
    try:
        params = O2BPParams(**cfg["params"])
        step = StepConfig(**cfg["step"])
        events = EventSpec(**cfg["events"])
    except ValueError as e:
        raise CliError(str(e)) from None
    start = cfg["run"]["start"]
    if isinstance(start, list):
        try:
            start = PathState(start[0], start[1])
        except ValueError as e:
            raise CliError(str(e)) from None
    return params, step, events, start


def _metadata(command: str, cfg: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "quadbessel", "version": __version__},
        "command": command,
        "config": cfg,
    }


def _dump_json(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta_comment(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


# ---------------------------------------------------------------- subcommands


def cmd_classify(args) -> int:
    cfg = resolve_config(args)
    params, _, _, _ = _build(cfg)
    report = classify(params).as_dict()
    report["metadata"] = _metadata("classify", {"params": cfg["params"]})
    _dump_json(report, args.out)
    return 0


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    params, step, events, start = _build(cfg)
    if not isinstance(start, PathState):
        raise CliError("simulate needs an explicit start point 'x,y'")
    run = cfg["run"]
    prefix = args.out or "path"
    meta = _metadata("simulate", {k: cfg[k] for k in ("params", "step", "events", "run")})
    comment = _meta_comment(meta)
    for i in range(run["paths"]):
        rng = stream_generator(run["seed"], i)
        path = simulate_path(
            params, start, run["horizon"], step, events, rng=rng, stride=run["stride"]
        )
        with open(f"{prefix}_{i:03d}.csv", "w") as fh:
            fh.write(comment)
            path.write_csv(fh)
        with open(f"{prefix}_{i:03d}_events.json", "w") as fh:
            path.write_events_json(fh)
    _dump_json({"metadata": meta, "paths_written": run["paths"]}, f"{prefix}_run.json")
    return 0


def cmd_hitting(args) -> int:
    cfg = resolve_config(args)
    params, step, events, start = _build(cfg)
    run = cfg["run"]
    which = run["which"]
    if which not in ("corner", "x-edge", "y-edge"):
        raise CliError(f"--which must be corner, x-edge or y-edge, got {which!r}")
    ens = EnsembleConfig(run["paths"], run["seed"], step, run["horizon"], start)
    est = hitting_probability(params, ens, which, events, workers=args.threads)
    meta = _metadata("hitting", {k: cfg[k] for k in ("params", "step", "events", "run", "tolerances")})
    tol = cfg["tolerances"]
    checks = {}
    ok = True
    if tol["min_frequency"] is not None:
        checks["min_frequency"] = est.frequency >= tol["min_frequency"]
        ok &= checks["min_frequency"]
    if tol["max_frequency"] is not None:
        checks["max_frequency"] = est.frequency <= tol["max_frequency"]
        ok &= checks["max_frequency"]
    summary = {"metadata": meta, "estimate": est.as_dict(), "checks": checks, "passed": ok}
    prefix = args.out or "hitting"
    _dump_json(summary, f"{prefix}_summary.json")
    with open(f"{prefix}_events.csv", "w") as fh:
        fh.write(_meta_comment(meta))
        fh.write("path_id,event,time\n")
        for i, t in enumerate(est.event_times):
            t_text = "" if math.isnan(t) else repr(float(t))
            fh.write(f"{i},{which},{t_text}\n")
    return 0 if ok else 1


def cmd_stationary(args) -> int:
    cfg = resolve_config(args)
    params, step, events, start = _build(cfg)
    run = cfg["run"]
    law, reason = stationary_law_report(params)
    if law is None:
        raise CliError(f"no stationary law: {reason}")
    ens = EnsembleConfig(run["paths"], run["seed"], step, 1.0, start)
    samples = stationary_sample(
        params, ens, run["burn_in"], run["spacing"], run["count"], workers=args.threads
    )
    x = np.sort(samples[:, 0])
    y = np.sort(samples[:, 1])
    ks_x = ks_test(x, lambda v: gamma_cdf(v, GammaLaw(law.a, law.c)))
    ks_y = ks_test(y, lambda v: gamma_cdf(v, GammaLaw(law.b, law.d)))
    w, z = beta_gamma_transform(samples[:, 0], samples[:, 1], law.c, law.d)
    ks_w = ks_test(np.sort(w), lambda v: beta_cdf(v, BetaLaw(law.a, law.b)))
    ks_z = ks_test(np.sort(z), lambda v: gamma_cdf(v, GammaLaw(law.a + law.b, 1.0)))
    corr_wz = float(np.corrcoef(w, z)[0, 1])
    n = samples.shape[0]
    tol = cfg["tolerances"]["ks"]
    checks = {
        "ks_x": ks_x.statistic <= tol,
        "ks_y": ks_y.statistic <= tol,
        "ks_w": ks_w.statistic <= tol,
        "ks_z": ks_z.statistic <= tol,
    }
    ok = all(checks.values())
    meta = _metadata("stationary", {k: cfg[k] for k in ("params", "step", "run", "tolerances")})
    summary = {
        "metadata": meta,
        "law": law.as_dict(),
        "n_samples": n,
        "ks_x": ks_x.statistic,
        "ks_y": ks_y.statistic,
        "ks_w": ks_w.statistic,
        "ks_z": ks_z.statistic,
        "corr_wz": corr_wz,
        "mean_x": float(np.mean(samples[:, 0])),
        "se_x": float(np.std(samples[:, 0], ddof=1) / math.sqrt(n)),
        "mean_y": float(np.mean(samples[:, 1])),
        "se_y": float(np.std(samples[:, 1], ddof=1) / math.sqrt(n)),
        "checks": checks,
        "passed": ok,
    }
    prefix = args.out or "stationary"
    _dump_json(summary, f"{prefix}_summary.json")
    with open(f"{prefix}_samples.csv", "w") as fh:
        fh.write(_meta_comment(meta))
        fh.write("x,y\n")
        for xv, yv in samples:
            fh.write(f"{float(xv)!r},{float(yv)!r}\n")
    return 0 if ok else 1


def cmd_martingale(args) -> int:
    cfg = resolve_config(args)
    params, step, events, start = _build(cfg)
    run = cfg["run"]
    functional = {"power-product": "power-product", "log-combo": "log-combo"}.get(run["functional"])
    if functional is None:
        raise CliError(
            f"--functional must be power-product or log-combo for martingale runs, got {run['functional']!r}"
        )
    ens = EnsembleConfig(run["paths"], run["seed"], step, max(run["times"]), start)
    try:
        points = martingale_drift_test(
            params, functional, ens, run["times"], box=run["box"], workers=args.threads
        )
    except ValueError as e:
        raise CliError(str(e)) from None
    if functional == "power-product":
        m0 = start.x ** (1.0 - 2.0 * params.alpha) * start.y ** (1.0 - 2.0 * params.delta)
        bound = params.beta / (2.0 * params.delta - 1.0) + params.gamma / (2.0 * params.alpha - 1.0)
        expect_constant = bound == params.rho
    else:
        m0 = params.gamma * math.log(start.x) - params.beta * math.log(start.y)
        expect_constant = True
    k = cfg["tolerances"]["se_multiplier"]
    if expect_constant:
        ok = all(abs(pt.mean - m0) <= k * pt.se for pt in points)
    else:
        ok = all(pt.mean <= m0 + k * pt.se for pt in points) and all(
            points[j + 1].mean <= points[j].mean
            + k * math.hypot(points[j].se, points[j + 1].se)
            for j in range(len(points) - 1)
        )
    meta = _metadata("martingale", {k_: cfg[k_] for k_ in ("params", "step", "run", "tolerances")})
    summary = {
        "metadata": meta,
        "functional": functional,
        "initial_value": m0,
        "expected_behavior": "constant" if expect_constant else "nonincreasing",
        "points": [{"time": pt.time, "mean": pt.mean, "se": pt.se} for pt in points],
        "passed": ok,
    }
    _dump_json(summary, args.out)
    return 0 if ok else 1


def cmd_importance(args) -> int:
    cfg = resolve_config(args)
    params, step, events, start = _build(cfg)
    run = cfg["run"]
    ens = EnsembleConfig(run["paths"], run["seed"], step, run["horizon"], start)
    try:
        res = importance_estimate(params, run["functional"], run["horizon"], ens, workers=args.threads)
    except ValueError as e:
        raise CliError(str(e)) from None
    k = cfg["tolerances"]["se_multiplier"]
    checks = {
        "direct_vs_weighted": abs(res.direct - res.weighted) <= k * res.combined_se,
        "weight_mean_is_one": abs(res.weight_mean - 1.0) <= k * res.weight_se,
    }
    ok = all(checks.values())
    meta = _metadata("importance", {k_: cfg[k_] for k_ in ("params", "step", "run", "tolerances")})
    summary = {"metadata": meta, "result": res.as_dict(), "checks": checks, "passed": ok}
    _dump_json(summary, args.out)
    return 0 if ok else 1


_AXES = ("alpha", "beta", "gamma", "delta", "rho", "theta", "eta")


def cmd_phase(args) -> int:
    cfg = resolve_config(args)
    run = cfg["run"]
    for name in (args.axis1, args.axis2):
        if name not in _AXES:
            raise CliError(f"axis must be one of {_AXES}, got {name!r}")
    if args.axis1 == args.axis2:
        raise CliError("the two axes must differ")
    n1, n2 = args.n1, args.n2
    if n1 < 1 or n2 < 1:
        raise CliError("grid sizes must be >= 1")
    mode = args.mode
    if mode == "hitting" and n1 * n2 > 10_000:
        raise CliError(f"hitting mode limited to 10000 cells, got {n1 * n2}")
    v1 = np.linspace(args.min1, args.max1, n1)
    v2 = np.linspace(args.min2, args.max2, n2)
    params, step, events, start = _build(cfg)
    base = cfg["params"]
    cells = []
    for i, a in enumerate(v1):
        row = []
        for j, b in enumerate(v2):
            d = dict(base)
            d[args.axis1] = float(a)
            d[args.axis2] = float(b)
            try:
                p = O2BPParams(**d)
            except ValueError:
                row.append("invalid")
                continue
            if mode == "classify":
                rep = classify(p)
                if args.cell == "corner":
                    row.append(rep.corner.status.value)
                elif args.cell == "existence":
                    row.append(rep.existence.classification.value)
                else:
                    raise CliError(f"--cell must be corner or existence in classify mode, got {args.cell!r}")
            else:
                ens = EnsembleConfig(
                    run["paths"], run["seed"] + i * n2 + j, step, run["horizon"], start
                )
                est = hitting_probability(p, ens, run["which"], events, workers=args.threads)
                row.append(repr(est.frequency))
        cells.append(row)
    meta = _metadata(
        "phase",
        {
            "params": cfg["params"],
            "step": cfg["step"],
            "events": cfg["events"],
            "run": cfg["run"],
            "grid": {
                "axis1": args.axis1, "min1": args.min1, "max1": args.max1, "n1": n1,
                "axis2": args.axis2, "min2": args.min2, "max2": args.max2, "n2": n2,
                "mode": mode, "cell": args.cell,
            },
        },
    )
    out = args.out or "phase.csv"
    with open(out, "w") as fh:
        fh.write(_meta_comment(meta))
        fh.write(f"{args.axis1}\\{args.axis2}," + ",".join(repr(float(b)) for b in v2) + "\n")
        for a, row in zip(v1, cells):
            fh.write(repr(float(a)) + "," + ",".join(row) + "\n")
    return 0


# -------------------------------------------------------------------- parser


def _add_common(sp: argparse.ArgumentParser) -> None:
    g = sp.add_argument_group("process parameters")
    for name in _AXES:
        g.add_argument(f"--{name}", type=float)
    g = sp.add_argument_group("integration")
    g.add_argument("--dt", type=float)
    g.add_argument("--cross-floor", dest="cross_floor", type=float)
    g.add_argument("--scheme", choices=SCHEMES)
    g.add_argument("--truncation-level", dest="truncation_level", type=int)
    g = sp.add_argument_group("events")
    g.add_argument("--eps-x", dest="eps_x", type=float)
    g.add_argument("--eps-y", dest="eps_y", type=float)
    g.add_argument("--eps-corner", dest="eps_corner", type=float)
    g.add_argument("--threshold", dest="eps_corner_alias", type=float,
                   help="shorthand: set all three event thresholds at once")
    g.add_argument("--crossing", choices=CROSSINGS)
    g = sp.add_argument_group("run")
    g.add_argument("--paths", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--horizon", type=float)
    g.add_argument("--start", type=str)
    g.add_argument("--stride", type=int)
    g.add_argument("--burn-in", dest="burn_in", type=float)
    g.add_argument("--spacing", type=float)
    g.add_argument("--count", type=int)
    g.add_argument("--times", type=str)
    g.add_argument("--which", type=str)
    g.add_argument("--functional", type=str)
    g.add_argument("--box", type=float)
    g = sp.add_argument_group("tolerances")
    g.add_argument("--ks-tol", dest="ks_tol", type=float)
    g.add_argument("--se-mult", dest="se_mult", type=float)
    g.add_argument("--min-frequency", dest="min_frequency", type=float)
    g.add_argument("--max-frequency", dest="max_frequency", type=float)
    sp.add_argument("--config", type=str, help="JSON config file; flags override its values")
    sp.add_argument("--out", type=str, help="output path or prefix")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads (wall time only; results are identical)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadbessel",
        description="Obliquely repelled planar Bessel diffusions: exact classification and Monte Carlo verification.",
    )
    ap.add_argument("--version", action="version", version=f"quadbessel {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    handlers = {
        "classify": cmd_classify,
        "simulate": cmd_simulate,
        "hitting": cmd_hitting,
        "stationary": cmd_stationary,
        "martingale": cmd_martingale,
        "importance": cmd_importance,
        "phase": cmd_phase,
    }
    docs = {
        "classify": "exact parameter-regime report as JSON",
        "simulate": "write sample paths as CSV with event sidecars",
        "hitting": "finite-horizon boundary hitting frequency with CI",
        "stationary": "sample the stationary law and test it against the product of gammas",
        "martingale": "box-stopped supermartingale/martingale diagnostics",
        "importance": "direct vs change-of-measure estimates of a terminal functional",
        "phase": "sweep two parameters and tabulate verdicts or frequencies",
    }
    for name, fn in handlers.items():
        sp = sub.add_parser(name, help=docs[name])
        _add_common(sp)
        if name == "phase":
            sp.add_argument("--axis1", required=True)
            sp.add_argument("--min1", type=float, required=True)
            sp.add_argument("--max1", type=float, required=True)
            sp.add_argument("--n1", type=int, required=True)
            sp.add_argument("--axis2", required=True)
            sp.add_argument("--min2", type=float, required=True)
            sp.add_argument("--max2", type=float, required=True)
            sp.add_argument("--n2", type=int, required=True)
            sp.add_argument("--mode", choices=("classify", "hitting"), default="classify")
            sp.add_argument("--cell", choices=("corner", "existence"), default="existence")
        sp.set_defaults(handler=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "eps_corner_alias", None) is not None:
        for dest in ("eps_x", "eps_y", "eps_corner"):
            if getattr(args, dest, None) is None:
                setattr(args, dest, args.eps_corner_alias)
    try:
        return args.handler(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
