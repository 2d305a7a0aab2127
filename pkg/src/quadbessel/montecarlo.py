"""Ensemble experiments: hitting probabilities, stationary sampling,
martingale diagnostics and change-of-measure estimators.

Reproducibility contract: every path gets its own counter-based stream keyed
by (seed, context, path index), per-path results land in arrays indexed by
path, and reductions run in fixed index order.  Worker count therefore has
no observable effect on any result, bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._kernels import importance_kernel, martingale_kernel, simulate_kernel
from .integrator import EventSpec, PathState, StepConfig, n_steps_for
from .params import O2BPParams
from .regime import stationary_law_report

START_TAGS = ("stationary-mean", "stationary-law")

_EMPTY_REC = np.empty(0, dtype=np.int64)
_EMPTY_OUT = np.empty((0, 2), dtype=float)

FUNCTIONALS: dict[str, Callable] = {
    "exp-neg-sum": lambda x, y: np.exp(-x - y),
    "exp-neg-x": lambda x, y: np.exp(-x),
}


def stream_generator(seed: int, index: int, context: int = 0) -> np.random.Generator:
    """Counter-based per-path stream: Philox keyed by (seed, context:index).

    Distinct (seed, context, index) triples give statistically independent
    streams, and the mapping is pure, so any execution schedule reproduces
    the same draws.
    """
    if not 0 <= index < (1 << 48):
        raise ValueError(f"path index out of range: {index}")
    if not 0 <= context < (1 << 16):
        raise ValueError(f"stream context out of range: {context}")
    key = np.array([np.uint64(seed & (2**64 - 1)), np.uint64((context << 48) | index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class EnsembleConfig:
    """Shared ensemble settings; identical configs give bit-identical results."""

    n_paths: int
    seed: int
    step: StepConfig = StepConfig()
    horizon: float = 1.0
    start: PathState | str = PathState(1.0, 1.0)

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if isinstance(self.start, str) and self.start not in START_TAGS:
            raise ValueError(f"start tag must be one of {START_TAGS}, got {self.start!r}")

    def as_dict(self) -> dict:
        start = self.start if isinstance(self.start, str) else [self.start.x, self.start.y]
        return {
            "n_paths": self.n_paths,
            "seed": self.seed,
            "step": self.step.as_dict(),
            "horizon": self.horizon,
            "start": start,
        }


@dataclass(frozen=True)
class HittingEstimate:
    """Finite-horizon hitting frequency with a normal-approximation 95% CI."""

    frequency: float
    ci_halfwidth: float
    threshold: float
    horizon: float
    n_paths: int
    which: str
    event_times: np.ndarray = field(repr=False, compare=False, default=None)

    def as_dict(self) -> dict:
        return {
            "which": self.which,
            "frequency": self.frequency,
            "ci_halfwidth": self.ci_halfwidth,
            "threshold": self.threshold,
            "horizon": self.horizon,
            "n_paths": self.n_paths,
        }


@dataclass(frozen=True)
class EnsembleSummary:
    checkpoints: tuple
    mean_x: tuple
    var_x: tuple
    mean_y: tuple
    var_y: tuple
    hits: dict | None
    n_paths: int

    def as_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "checkpoints": list(self.checkpoints),
            "mean_x": list(self.mean_x),
            "var_x": list(self.var_x),
            "mean_y": list(self.mean_y),
            "var_y": list(self.var_y),
            "hits": self.hits,
        }


@dataclass(frozen=True)
class MartingalePoint:
    time: float
    mean: float
    se: float


@dataclass(frozen=True)
class ImportanceResult:
    mode: str
    functional: str
    direct: float
    direct_se: float
    weighted: float
    weighted_se: float
    weight_mean: float
    weight_se: float

    @property
    def combined_se(self) -> float:
        return math.hypot(self.direct_se, self.weighted_se)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "functional": self.functional,
            "direct": self.direct,
            "direct_se": self.direct_se,
            "weighted": self.weighted,
            "weighted_se": self.weighted_se,
            "weight_mean": self.weight_mean,
            "weight_se": self.weight_se,
        }


def _for_each_path(n_paths: int, workers: int, body: Callable[[int], None]) -> None:
    if workers <= 1:
        for i in range(n_paths):
            body(i)
        return
    chunks = np.array_split(np.arange(n_paths), min(n_paths, workers * 4))

    def run_chunk(idx):
        for i in idx:
            body(int(i))

    with ThreadPoolExecutor(max_workers=workers) as ex:
        list(ex.map(run_chunk, chunks))


def _resolve_start(cfg: EnsembleConfig, p: O2BPParams, gen: np.random.Generator):
    """Starting point for one path; law draws consume the stream first."""
    if isinstance(cfg.start, PathState):
        return cfg.start.x, cfg.start.y
    law, reason = stationary_law_report(p)
    if law is None:
        raise ValueError(f"start tag {cfg.start!r} needs a stationary law: {reason}")
    if cfg.start == "stationary-mean":
        return law.x.mean, law.y.mean
    x0 = gen.standard_gamma(law.a) / law.c
    y0 = gen.standard_gamma(law.b) / law.d
    return x0, y0


def _draw_increments(p: O2BPParams, dt: float, n: int, gen: np.random.Generator):
    z = gen.standard_normal((n, 2))
    sq = math.sqrt(dt)
    comp = math.sqrt(max(0.0, 1.0 - p.rho * p.rho))
    dB = sq * z[:, 0]
    dC = sq * (p.rho * z[:, 0] + comp * z[:, 1])
    return dB, dC


def _run_events(
    p: O2BPParams,
    cfg: EnsembleConfig,
    events: EventSpec,
    workers: int,
    record_steps: np.ndarray | None = None,
    context: int = 0,
):
    """Common driver: per path returns hit indices, log-survivals, terminal
    state and optionally recorded states."""
    n = n_steps_for(cfg.horizon, cfg.step.dt)
    rec = _EMPTY_REC if record_steps is None else record_steps
    n_rec = rec.size
    hit = np.full((cfg.n_paths, 3), -1, dtype=np.int64)
    logs = np.zeros((cfg.n_paths, 3), dtype=float)
    term = np.zeros((cfg.n_paths, 2), dtype=float)
    states = np.zeros((cfg.n_paths, n_rec, 2), dtype=float) if n_rec else None
    truncated = cfg.step.scheme == "truncated"
    bridge = events.crossing == "bridge"

    def body(i: int) -> None:
        gen = stream_generator(cfg.seed, i, context)
        x0, y0 = _resolve_start(cfg, p, gen)
        dB, dC = _draw_increments(p, cfg.step.dt, n, gen)
        out = states[i] if n_rec else _EMPTY_OUT
        hx, hy, hc, lsx, lsy, lsc, xT, yT = simulate_kernel(
            x0, y0,
            p.alpha, p.beta, p.gamma, p.delta, p.theta, p.eta, p.rho,
            cfg.step.dt, n, cfg.step.cross_floor,
            truncated, cfg.step.truncation_level,
            dB, dC,
            events.eps_x, events.eps_y, events.eps_corner, bridge,
            rec, out,
        )
        hit[i, 0] = hx
        hit[i, 1] = hy
        hit[i, 2] = hc
        logs[i, 0] = lsx
        logs[i, 1] = lsy
        logs[i, 2] = lsc
        term[i, 0] = xT
        term[i, 1] = yT

    _for_each_path(cfg.n_paths, workers, body)
    return hit, logs, term, states


_WHICH = {"x-edge": 0, "y-edge": 1, "corner": 2}


def hitting_probability(
    p: O2BPParams,
    cfg: EnsembleConfig,
    which: str,
    events: EventSpec = EventSpec(),
    workers: int = 1,
) -> HittingEstimate:
    """Fraction of paths whose event time is within the horizon.

    In bridge mode the per-path indicator is replaced by the conditional
    crossing probability given the skeleton (a smoothed, lower-variance
    estimator of the same frequency); the CI keeps the binomial form, which
    is conservative for the smoothed estimator.
    """
    if which not in _WHICH:
        raise ValueError(f"which must be one of {sorted(_WHICH)}, got {which!r}")
    col = _WHICH[which]
    hit, logs, _, _ = _run_events(p, cfg, events, workers)
    if events.crossing == "bridge":
        probs = 1.0 - np.exp(logs[:, col])
        freq = float(np.mean(probs))
    else:
        freq = float(np.mean(hit[:, col] >= 0))
    ci = 1.96 * math.sqrt(max(freq * (1.0 - freq), 0.0) / cfg.n_paths)
    times = np.where(hit[:, col] >= 0, hit[:, col] * cfg.step.dt, np.nan)
    threshold = (events.eps_x, events.eps_y, events.eps_corner)[col]
    return HittingEstimate(
        frequency=freq,
        ci_halfwidth=ci,
        threshold=threshold,
        horizon=cfg.horizon,
        n_paths=cfg.n_paths,
        which=which,
        event_times=times,
    )


def run_ensemble(
    p: O2BPParams,
    cfg: EnsembleConfig,
    reducers: Sequence[str] = ("moments", "events"),
    checkpoints: Sequence[float] | None = None,
    events: EventSpec = EventSpec(),
    workers: int = 1,
) -> EnsembleSummary:
    """Map the path simulator over the ensemble and fold the chosen reducers.

    ``moments`` gives per-checkpoint means and variances of both
    coordinates, ``events`` counts boundary events within the horizon.
    Results are independent of the worker schedule.
    """
    for r in reducers:
        if r not in ("moments", "events"):
            raise ValueError(f"unknown reducer {r!r}")
    if checkpoints is None:
        checkpoints = (cfg.horizon,)
    steps = np.array(sorted({n_steps_for(t, cfg.step.dt) for t in checkpoints}), dtype=np.int64)
    hit, logs, term, states = _run_events(
        p, cfg, events, workers, record_steps=steps if "moments" in reducers else None
    )
    if "moments" in reducers:
        def _var(col):
            if cfg.n_paths < 2:
                return float("nan")
            return float(np.var(col, ddof=1))

        times = tuple(float(k * cfg.step.dt) for k in steps)
        mean_x = tuple(float(np.mean(states[:, j, 0])) for j in range(steps.size))
        var_x = tuple(_var(states[:, j, 0]) for j in range(steps.size))
        mean_y = tuple(float(np.mean(states[:, j, 1])) for j in range(steps.size))
        var_y = tuple(_var(states[:, j, 1]) for j in range(steps.size))
    else:
        times = tuple(float(k * cfg.step.dt) for k in steps)
        mean_x = var_x = mean_y = var_y = ()
    hits = None
    if "events" in reducers:
        hits = {
            "x_edge": int(np.sum(hit[:, 0] >= 0)),
            "y_edge": int(np.sum(hit[:, 1] >= 0)),
            "corner": int(np.sum(hit[:, 2] >= 0)),
        }
    return EnsembleSummary(
        checkpoints=times,
        mean_x=mean_x,
        var_x=var_x,
        mean_y=mean_y,
        var_y=var_y,
        hits=hits,
        n_paths=cfg.n_paths,
    )


def stationary_sample(
    p: O2BPParams,
    cfg: EnsembleConfig,
    burn_in: float = 5.0,
    spacing: float = 0.5,
    count: int = 10_000,
    force: bool = False,
    workers: int = 1,
) -> np.ndarray:
    """Pooled (x, y) samples of the long-run law of the drifted system.

    Each path discards [0, burn_in] and then contributes one state every
    ``spacing`` time units; samples are pooled across paths in path order up
    to ``count``.  Requires the product-form stationary law to exist unless
    ``force`` is set (exploratory runs with an explicit start).
    """
    if not burn_in > 0 or not spacing > 0:
        raise ValueError("burn_in and spacing must be > 0")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    law, reason = stationary_law_report(p)
    if law is None and not force:
        raise ValueError(f"no stationary law: {reason} (use force=True to override)")
    if law is None and isinstance(cfg.start, str):
        raise ValueError("force runs need an explicit start point")
    per_path = int(math.ceil(count / cfg.n_paths))
    dt = cfg.step.dt
    steps = np.array(
        [n_steps_for(burn_in + (j + 1) * spacing, dt) for j in range(per_path)],
        dtype=np.int64,
    )
    horizon = float(steps[-1] * dt)
    run_cfg = EnsembleConfig(cfg.n_paths, cfg.seed, cfg.step, horizon, cfg.start)
    disabled = EventSpec(eps_x=-1.0, eps_y=-1.0, eps_corner=-1.0)
    _, _, _, states = _run_events(p, run_cfg, disabled, workers, record_steps=steps)
    pooled = states.reshape(-1, 2)
    return pooled[:count]


_FUNCTIONAL_NAMES = ("power-product", "log-combo")


def martingale_drift_test(
    p: O2BPParams,
    functional: str,
    cfg: EnsembleConfig,
    times: Sequence[float],
    box: float = 100.0,
    workers: int = 1,
) -> list[MartingalePoint]:
    """Box-stopped ensemble means of the diagnostic functional at given times.

    ``power-product`` tracks M = X^(1-2*alpha) Y^(1-2*delta), valid when
    alpha > 1/2, delta > 1/2 and beta/(2*delta-1) + gamma/(2*alpha-1) >= rho
    > -1 (supermartingale; martingale at equality).  ``log-combo`` tracks
    M = gamma*ln(X) - beta*ln(Y), valid when alpha = delta = 1/2 and
    rho*beta*gamma < |beta*gamma|.  Paths are stopped on leaving
    [1/box, box]^2 so the unstopped local-martingale caveat does not bite.
    """
    if functional not in _FUNCTIONAL_NAMES:
        raise ValueError(f"functional must be one of {_FUNCTIONAL_NAMES}, got {functional!r}")
    if functional == "power-product":
        if not p.alpha > 0.5:
            raise ValueError(f"power-product requires alpha > 1/2, got alpha = {p.alpha}")
        if not p.delta > 0.5:
            raise ValueError(f"power-product requires delta > 1/2, got delta = {p.delta}")
        bound = p.beta / (2.0 * p.delta - 1.0) + p.gamma / (2.0 * p.alpha - 1.0)
        if not bound >= p.rho:
            raise ValueError(
                "power-product requires beta/(2*delta-1) + gamma/(2*alpha-1) >= rho, "
                f"got {bound} < {p.rho}"
            )
        if not p.rho > -1.0:
            raise ValueError(f"power-product requires rho > -1, got rho = {p.rho}")
    else:
        if p.alpha != 0.5 or p.delta != 0.5:
            raise ValueError(
                f"log-combo requires alpha = delta = 1/2, got ({p.alpha}, {p.delta})"
            )
        if not p.rho * p.beta * p.gamma < abs(p.beta * p.gamma):
            raise ValueError(
                "log-combo requires rho*beta*gamma < |beta*gamma|, got "
                f"{p.rho * p.beta * p.gamma} >= {abs(p.beta * p.gamma)}"
            )
    if not isinstance(cfg.start, PathState):
        raise ValueError("martingale runs need an explicit start point")
    if not box > 1.0:
        raise ValueError(f"box must be > 1, got {box}")
    lo, hi = 1.0 / box, box
    if not (lo < cfg.start.x < hi and lo < cfg.start.y < hi):
        raise ValueError(f"start must lie strictly inside [{lo}, {hi}]^2")
    if p.theta != 0.0 or p.eta != 0.0:
        raise ValueError("martingale diagnostics apply to the undrifted system")
    dt = cfg.step.dt
    steps = np.array(sorted({n_steps_for(t, dt) for t in times}), dtype=np.int64)
    n = int(steps[-1])
    vals = np.zeros((cfg.n_paths, steps.size), dtype=float)
    power_mode = functional == "power-product"

    def body(i: int) -> None:
        gen = stream_generator(cfg.seed, i)
        dB, dC = _draw_increments(p, dt, n, gen)
        out = np.zeros(steps.size, dtype=float)
        martingale_kernel(
            cfg.start.x, cfg.start.y,
            p.alpha, p.beta, p.gamma, p.delta,
            dt, n, cfg.step.cross_floor,
            dB, dC, box, power_mode, steps, out,
        )
        vals[i] = out

    _for_each_path(cfg.n_paths, workers, body)
    root_n = math.sqrt(cfg.n_paths)
    return [
        MartingalePoint(
            time=float(k * dt),
            mean=float(np.mean(vals[:, j])),
            se=float(np.std(vals[:, j], ddof=1) / root_n),
        )
        for j, k in enumerate(steps)
    ]


def importance_estimate(
    p: O2BPParams,
    functional: str,
    horizon: float,
    cfg: EnsembleConfig,
    workers: int = 1,
) -> ImportanceResult:
    """Direct versus reweighted estimate of E[f(X_T, Y_T)] at T = horizon.

    The direct estimator simulates the coupled system.  The reweighted one
    simulates an independent pair of own-term-only processes (Bessel
    dimensions 2*alpha+1, 2*delta+1) and multiplies f by the exponential
    change-of-measure weight accumulated with left-point Ito sums; the
    weight has expectation one by construction.  Requires rho = 0.  With
    gamma = 0 the one-sided mode only needs delta >= 1/2 and a positive y
    start; otherwise the two-sided mode needs |beta| <= delta - 1/2 and
    |gamma| <= alpha - 1/2 with a start in the open quadrant.
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {sorted(FUNCTIONALS)}, got {functional!r}")
    if p.rho != 0.0:
        raise ValueError(f"change of measure requires rho = 0, got rho = {p.rho}")
    if p.theta != 0.0 or p.eta != 0.0:
        raise ValueError("change of measure applies to the undrifted system")
    if not isinstance(cfg.start, PathState):
        raise ValueError("importance runs need an explicit start point")
    if p.gamma == 0.0:
        mode = "one-sided"
        if not p.delta >= 0.5:
            raise ValueError(f"one-sided mode requires delta >= 1/2, got delta = {p.delta}")
        if not cfg.start.y > 0:
            raise ValueError("one-sided mode requires a start with y > 0")
    else:
        mode = "two-sided"
        if not abs(p.beta) <= p.delta - 0.5:
            raise ValueError(
                f"two-sided mode requires |beta| <= delta - 1/2, got |{p.beta}| > {p.delta - 0.5}"
            )
        if not abs(p.gamma) <= p.alpha - 0.5:
            raise ValueError(
                f"two-sided mode requires |gamma| <= alpha - 1/2, got |{p.gamma}| > {p.alpha - 0.5}"
            )
        if not (cfg.start.x > 0 and cfg.start.y > 0):
            raise ValueError("two-sided mode requires a start in the open quadrant")
    f = FUNCTIONALS[functional]
    n = n_steps_for(horizon, cfg.step.dt)
    dt = cfg.step.dt
    direct_xy = np.zeros((cfg.n_paths, 2), dtype=float)
    ref_uvw = np.zeros((cfg.n_paths, 3), dtype=float)
    truncated = cfg.step.scheme == "truncated"

    def body(i: int) -> None:
        gen = stream_generator(cfg.seed, i)
        dB, dC = _draw_increments(p, dt, n, gen)
        _, _, _, _, _, _, xT, yT = simulate_kernel(
            cfg.start.x, cfg.start.y,
            p.alpha, p.beta, p.gamma, p.delta, 0.0, 0.0, p.rho,
            dt, n, cfg.step.cross_floor,
            truncated, cfg.step.truncation_level,
            dB, dC,
            -1.0, -1.0, -1.0, False, _EMPTY_REC, _EMPTY_OUT,
        )
        direct_xy[i, 0] = xT
        direct_xy[i, 1] = yT
        gen2 = stream_generator(cfg.seed, i, context=1)
        dB2, dC2 = _draw_increments(p.without_drift(), dt, n, gen2)
        u, v, expo = importance_kernel(
            cfg.start.x, cfg.start.y,
            p.alpha, p.beta, p.gamma, p.delta,
            dt, n, dB2, dC2,
        )
        ref_uvw[i, 0] = u
        ref_uvw[i, 1] = v
        ref_uvw[i, 2] = expo

    _for_each_path(cfg.n_paths, workers, body)
    root_n = math.sqrt(cfg.n_paths)
    fd = f(direct_xy[:, 0], direct_xy[:, 1])
    weights = np.exp(ref_uvw[:, 2])
    fw = f(ref_uvw[:, 0], ref_uvw[:, 1]) * weights
    return ImportanceResult(
        mode=mode,
        functional=functional,
        direct=float(np.mean(fd)),
        direct_se=float(np.std(fd, ddof=1) / root_n),
        weighted=float(np.mean(fw)),
        weighted_se=float(np.std(fw, ddof=1) / root_n),
        weight_mean=float(np.mean(weights)),
        weight_se=float(np.std(weights, ddof=1) / root_n),
    )
