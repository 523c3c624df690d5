#!/usr/bin/env python3
"""Fraction of eigenvalues near the essential segment for a homogeneous cube, h = a/4 and a/8.

The cube has edge a = lambda/20 at 1 GHz in vacuum; each contrast is run at
both resolutions (1536 unknowns at a/8, so expect a few seconds per case).
"""
import argparse

import numpy as np

from viespec.assembly import build_operator
from viespec.eig import classify, eig_dense
from viespec.media import ContrastField, Grid, derive_background, EPS0, MU0
from viespec.symbol import essential_spectrum


def cluster_fraction(eta_r: complex, cells: int, medium, tol: float) -> float:
    a = medium.wavelength / 20
    grid = Grid((cells,) * 3, a / cells)
    field = ContrastField.from_scalar(grid, eta_r)
    op = build_operator(grid, field, medium)
    spec = classify(eig_dense(op.to_dense()), essential_spectrum(field), tol)
    return spec.cluster_fraction


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--contrast", nargs="*", type=complex,
                   default=[1.5 + 0.25j, 2 + 0.3j, 2 + 0.5j, 3 + 1j])
    p.add_argument("--tol", type=float, default=0.05)
    args = p.parse_args()
    medium = derive_background(0.0, EPS0, MU0, 2 * np.pi * 1e9)
    print("eta_r            a/4      a/8      non-decreasing")
    for eta in args.contrast:
        f4 = cluster_fraction(eta, 4, medium, args.tol)
        f8 = cluster_fraction(eta, 8, medium, args.tol)
        print(f"{eta!s:15s}  {f4:6.1%}  {f8:6.1%}  {f8 >= f4}")


if __name__ == "__main__":
    main()
