#!/usr/bin/env python3
"""Tour of the exact parameter classifier.

Walks a handful of characteristic parameter sets through the full report:
corner verdicts with their witnessing conditions, existence and uniqueness
classes, edge-hitting verdicts and the product-form stationary law of the
drifted system.  Finishes with a small beta-gamma sweep written as a CSV
phase diagram.
"""

import os

import numpy as np

from quadbessel import O2BPParams, classify

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")

CASES = {
    "decoupled pair of dim-3 Bessels": O2BPParams(1.0, 0.0, 0.0, 1.0),
    "cooperative, corner avoided by C1": O2BPParams(0.3, 0.5, 0.5, 0.3),
    "mixed signs, skew-symmetric drifted": O2BPParams(1.0, -1.0, 1.0, 1.0, rho=0.0, theta=1.0, eta=2.0),
    "competitive, no solution": O2BPParams(0.25, -0.5, -0.5, 0.25, rho=0.5),
    "degenerate line system": O2BPParams(0.3, -0.4, -0.3, 0.4, rho=-1.0),
    "common noise, corner hit a.s.": O2BPParams(0.25, 0.0, 0.0, 0.25, rho=1.0),
    "weak repulsion, honestly unknown": O2BPParams(0.25, -1.0, -1.0, 0.25),
}


def show(name: str, p: O2BPParams) -> None:
    rep = classify(p)
    print(f"== {name}")
    print(f"   params: alpha={p.alpha} beta={p.beta} gamma={p.gamma} delta={p.delta} "
          f"rho={p.rho} theta={p.theta} eta={p.eta}")
    corner = rep.corner
    extra = f" via {corner.witness}" if corner.witness else ""
    print(f"   corner:    {corner.status.value}{extra}")
    ex = rep.existence
    print(f"   existence: {ex.classification.value} ({ex.basis})"
          + (" [corner-start uniqueness open]" if ex.corner_uniqueness_open else ""))
    print(f"   edges:     x={rep.x_edge.value}  y={rep.y_edge.value}")
    if rep.stationary is not None:
        law = rep.stationary
        print(f"   stationary law: Gamma({law.a:g}, {law.c:g}) x Gamma({law.b:g}, {law.d:g})")
    else:
        print(f"   stationary law: none ({rep.stationary_absence_reason})")
    print(f"   power-product drift coefficient: {rep.supermartingale_coefficient:+.4f}")
    print()


def sweep_csv() -> str:
    os.makedirs(OUT_DIR, exist_ok=True)
    path = os.path.join(OUT_DIR, "existence_sweep.csv")
    betas = np.linspace(-1.5, 1.5, 31)
    gammas = np.linspace(-1.5, 1.5, 31)
    with open(path, "w") as fh:
        fh.write("beta\\gamma," + ",".join(f"{g:g}" for g in gammas) + "\n")
        for b in betas:
            cells = [
                classify(O2BPParams(1.0, float(b), float(g), 1.0)).existence.classification.value
                for g in gammas
            ]
            fh.write(f"{b:g}," + ",".join(cells) + "\n")
    return path


def main() -> None:
    for name, p in CASES.items():
        show(name, p)
    path = sweep_csv()
    print(f"existence classes over (beta, gamma) at alpha = delta = 1 written to {path}")


if __name__ == "__main__":
    main()
