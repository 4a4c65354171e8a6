"""Manufactured single-profile solution: construction and solver cross-check.

Pick a divergence-free profile q on the |k|^2 = 1 eigenspace. With the force
chosen as B(q, q) e^{-2t} and the level-1 free constant set to q, the exact
solution of the functional equation is u(t) = q e^{-t}: level 1 swallows q
through the resonant branch and level 2 cancels identically. The Galerkin
solver should reproduce that flow to near machine accuracy.
"""

import argparse
import time

import numpy as np

from nsexpand import (
    FieldPolynomial,
    ForceExpansion,
    NormSpec,
    SolverConfig,
    SpectralField,
    assemble,
    build_expansion,
    integrate,
    norm,
    poly_bilinear,
)


def main():
    parser = argparse.ArgumentParser(description="manufactured solution cross-check")
    parser.add_argument("--t-end", type=float, default=5.0, help="integration horizon")
    parser.add_argument("--step", type=float, default=1e-3, help="solver step")
    parser.add_argument("--cutoff", type=int, default=8, help="Galerkin eigenvalue cutoff")
    args = parser.parse_args()

    q = SpectralField({(1, 0, 0): [0, 0.25, 0.25j], (0, 1, 0): [0.5, 0, -0.125]})
    qq = FieldPolynomial.constant(q)
    force = ForceExpansion(((2, poly_bilinear(qq, qq)),))

    result = build_expansion(force, 2, resonant={1: q})
    print("constructed levels:")
    print(f"  q_1 == q exactly: {result.polynomial(1) == qq}")
    print(f"  q_2 == 0 exactly: {result.polynomial(2).is_zero}")
    print(f"  worst level residual: {result.max_residual():.2e}")

    config = SolverConfig(args.cutoff, args.step, args.t_end, sample_stride=10)
    t0 = time.perf_counter()
    traj = integrate(q, force, config)
    elapsed = time.perf_counter() - t0

    spec = NormSpec(0.0, 0.0)
    worst = 0.0
    for t, state in zip(traj.times, traj.states):
        exact = assemble(result.terms, float(t))
        worst = max(worst, norm(state - exact, spec) / norm(exact, spec))
    print(f"solver vs q e^(-t) over [0, {args.t_end:g}]: "
          f"max relative gap {worst:.2e} ({len(traj)} samples, {elapsed:.1f}s)")
    decade = float(np.exp(-traj.times[-1]))
    print(f"  flow decayed by factor {decade:.2e}; gap stays flat in relative terms")


if __name__ == "__main__":
    main()
