#!/usr/bin/env python3
"""Boundary attainability, Monte Carlo against the closed-form hitting law.

Three experiments:

1. Reflecting regime (alpha < 1/2, beta = 0): the x-coordinate is a Bessel
   process of dimension 2*alpha + 1 < 2, so the first time it reaches zero
   has an explicit law.  The empirical curve uses bridge-corrected crossing
   detection, since a grid skeleton alone cannot see excursions below the
   repulsion scale of the integrator.
2. Guaranteed avoidance: cooperative parameters keep all 1000 paths away
   from the corner over the whole horizon.
3. Common-noise collapse: with perfectly correlated driving noise and weak
   repulsion both coordinates coincide and reach the corner together; the
   empirical frequency tracks the exact law of the one-dimensional hitting
   time.
"""

import os

import numpy as np

from quadbessel import (
    EnsembleConfig,
    EventSpec,
    O2BPParams,
    PathState,
    StepConfig,
    bessel_hitting_zero_cdf,
    hitting_probability,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")


def reflecting_edge() -> None:
    print("== x-edge hitting for alpha = 0.25 (Bessel dimension 1.5) from x = 1")
    p = O2BPParams(0.25, 0.0, 0.0, 1.0)
    events = EventSpec(eps_x=1e-3, eps_y=-1.0, eps_corner=-1.0, crossing="bridge")
    rows = []
    for horizon in (1.0, 2.0, 5.0, 10.0):
        cfg = EnsembleConfig(3000, 101, StepConfig(dt=1e-3), horizon=horizon, start=PathState(1.0, 1.0))
        est = hitting_probability(p, cfg, "x-edge", events, workers=4)
        oracle = bessel_hitting_zero_cdf(1.0, 1.5, horizon)
        rows.append((horizon, est.frequency, est.ci_halfwidth, oracle))
        print(f"   T={horizon:5.1f}: empirical {est.frequency:.4f} +- {est.ci_halfwidth:.4f}"
              f"   closed form {oracle:.4f}")
    os.makedirs(OUT_DIR, exist_ok=True)
    out = os.path.join(OUT_DIR, "edge_hitting_curve.csv")
    with open(out, "w") as fh:
        fh.write("horizon,empirical,ci_halfwidth,closed_form\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"   -> {out}")


def guaranteed_avoidance() -> None:
    print("== corner avoidance under cooperative cross terms (condition C1)")
    p = O2BPParams(0.3, 0.5, 0.5, 0.3)
    cfg = EnsembleConfig(1000, 5, StepConfig(dt=1e-3), horizon=20.0, start=PathState(0.1, 0.1))
    est = hitting_probability(p, cfg, "corner", EventSpec(eps_corner=1e-4), workers=4)
    print(f"   corner proxy frequency over T=20: {est.frequency:.4f} (guaranteed zero in the limit)")


def common_noise_collapse() -> None:
    print("== corner hit under common noise (rho = 1, alpha = delta = 0.25)")
    p = O2BPParams(0.25, 0.0, 0.0, 0.25, rho=1.0)
    events = EventSpec(eps_x=-1.0, eps_y=-1.0, eps_corner=1e-3, crossing="bridge")
    for horizon in (5.0, 20.0, 80.0):
        cfg = EnsembleConfig(1000, 9, StepConfig(dt=1e-3), horizon=horizon, start=PathState(0.1, 0.1))
        est = hitting_probability(p, cfg, "corner", events, workers=4)
        oracle = bessel_hitting_zero_cdf(0.1, 1.5, horizon)
        print(f"   T={horizon:5.1f}: empirical {est.frequency:.4f}   exact hitting law {oracle:.4f}")
    print("   (the hit is certain only in infinite time: the tail decays like T^(-1/4))")


def main() -> None:
    reflecting_edge()
    print()
    guaranteed_avoidance()
    print()
    common_noise_collapse()


if __name__ == "__main__":
    main()
