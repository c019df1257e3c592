#!/usr/bin/env python3
"""Empirical smoothness report for the factorized convolution.

The smoothing stage is expected to produce paths whose increments scale like
dt^(beta - 1/r) up to an epsilon; this script measures the empirical modulus
max_k |X(t_{k+1}) - X(t_k)| / dt^(beta - 1/r - eps) across paths and grids
and reports it without asserting a bound.

Usage: python scripts/holder_modulus.py [--eps 0.02]
"""

import argparse

import numpy as np

from stochconv import (
    ConvolutionRequest,
    HilbertSpec,
    IntegrandSpec,
    QWienerSpec,
    SemigroupSpec,
    SpectralOperator,
    TimeGrid,
    factorized_convolution,
    sample_increments,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eps", type=float, default=0.02)
    parser.add_argument("--paths", type=int, default=500)
    parser.add_argument("--beta", type=float, default=0.3)
    parser.add_argument("--r", type=float, default=4.0)
    parser.add_argument("--rate", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    space = HilbertSpec(1)
    phi = IntegrandSpec.from_constant(SpectralOperator(space, space, [1.0]))
    semigroup = SemigroupSpec(space, rates=[args.rate], horizon=1.0)
    exponent = args.beta - 1.0 / args.r - args.eps
    print(f"increment exponent dt^{exponent:.4f}")

    for n_steps in (200, 400, 800, 1600):
        noise = sample_increments(
            QWienerSpec(space, [1.0]), TimeGrid(1.0, n_steps), args.seed, args.paths
        )
        request = ConvolutionRequest(
            phi, semigroup, noise, beta=args.beta, r=args.r
        )
        ensemble = factorized_convolution(request)
        dt = ensemble.grid.dt
        jumps = np.abs(np.diff(ensemble.values[:, :, 0], axis=1))
        modulus = np.max(jumps, axis=1) / dt**exponent
        print(
            f"N={n_steps:5d}  modulus mean={np.mean(modulus):.4f} "
            f"median={np.median(modulus):.4f} max={np.max(modulus):.4f}"
        )


if __name__ == "__main__":
    main()
