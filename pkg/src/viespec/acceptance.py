"""Executable acceptance checks, one function per criterion.

Each check returns a ``CriterionResult``; ``run_acceptance`` runs a selection
and ``python -m viespec verify`` reports them.
"""
from __future__ import annotations

import filecmp
import functools
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.linalg import lu_factor
from scipy.optimize import linear_sum_assignment

from .assembly import build_operator
from .bounds import circle_region, wedge_region
from .eig import DISCRETE, classify, eig_arnoldi, eig_dense
from .errors import InfeasiblePlanError
from .media import ContrastField, Grid, rasterize
from .scenarios import list_scenarios, load_scenario, run_scenario
from .solver import plan_relaxation, solve_relaxed
from .symbol import essential_spectrum, numeric_fourier_oracle, symbol_phi, symbol_phi_inverse

__all__ = ["CriterionResult", "CRITERIA", "RUNTIME_LIMITS", "run_acceptance", "run_criterion"]

CLUSTER_TOL = 0.05


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.name}: {self.detail} ({self.seconds:.1f} s)"


@functools.lru_cache(maxsize=None)
def _scenario_problem(name: str):
    sc = load_scenario(name)
    fld = rasterize(sc.spec)
    op = build_operator(sc.spec.grid, fld, sc.spec.background)
    return sc, fld, op


@functools.lru_cache(maxsize=None)
def _dense_spectrum(name: str):
    sc, fld, op = _scenario_problem(name)
    ess = essential_spectrum(fld, sc.options.sphere_resolution)
    return classify(eig_dense(op.to_dense()), ess, CLUSTER_TOL)


def criterion_1(n_pairs: int = 10_000, seed: int = 1):
    rng = np.random.default_rng(seed)
    eye = np.eye(3)
    b = rng.standard_normal((n_pairs, 3, 3))
    skew = rng.standard_normal((n_pairs, 3, 3))
    # real part with positive-definite symmetric part, arbitrary imaginary part
    re = b @ np.swapaxes(b, 1, 2) + 0.05 * eye + (skew - np.swapaxes(skew, 1, 2))
    eta_r = re + 1j * rng.standard_normal((n_pairs, 3, 3))
    theta = rng.standard_normal((n_pairs, 3))
    prod = symbol_phi_inverse(eta_r, theta).value @ symbol_phi(eta_r, theta).value
    worst = float(np.linalg.norm(prod - eye, 2, axis=(1, 2)).max())
    return worst <= 1e-12, f"max |inv(Phi) Phi - I| = {worst:.2e} over {n_pairs} pairs (limit 1e-12)"


def criterion_2(resolution: int = 160):
    res = numeric_fourier_oracle(resolution)
    ok = res.accurate and res.max_error <= 1e-2 and res.magnitude_spread <= 1e-2
    return ok, (f"N = {resolution}: max |numeric - (I/3 - Q)| = {res.max_error:.2e}, "
                f"|k| vs 2|k| spread = {res.magnitude_spread:.2e} (limit 1e-2)")


def criterion_3():
    _, _, op = _scenario_problem("empty")
    a = op.to_dense()
    exact = bool(np.array_equal(a, np.eye(a.shape[0])))
    lam = eig_dense(a).eigenvalues
    dev = float(np.abs(lam - 1.0).max())
    return exact and dev <= 1e-12, f"matrix is exactly I: {exact}; max |lambda - 1| = {dev:.1e}"


def criterion_4(n_vectors: int = 100, seed: int = 4):
    grid = Grid((4, 4, 4), 0.3 / 80)
    sc = load_scenario("cube-two-layer")
    medium = sc.spec.background
    rng = np.random.default_rng(seed)
    eta_r = 1.0 + rng.uniform(0.2, 2.0, grid.n_cells) + 1j * rng.uniform(0.0, 1.0, grid.n_cells)
    eta_r[rng.random(grid.n_cells) < 0.3] = 1.0
    op = build_operator(grid, ContrastField.from_scalar(grid, eta_r), medium)
    a = op.to_dense()
    worst = 0.0
    for _ in range(n_vectors):
        u = rng.standard_normal(op.n_unknowns) + 1j * rng.standard_normal(op.n_unknowns)
        ref = a @ u
        worst = max(worst, np.linalg.norm(op.matvec(u) - ref) / np.linalg.norm(ref))
    return worst <= 1e-12, f"max relative deviation over {n_vectors} vectors = {worst:.2e} (limit 1e-12)"


def _charpoly(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion."""
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def _companion_roots(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -c[1:] / c[0]
    comp[1:, :-1] += np.eye(n - 1)
    return np.linalg.eigvals(comp)


def criterion_5(n_matrices: int = 50, seed: int = 5):
    rng = np.random.default_rng(seed)
    worst_root = worst_trace = worst_det = 0.0
    for i in range(n_matrices):
        n = 1 + i % 6
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        lam = eig_dense(a, method="qr").eigenvalues
        roots = _companion_roots(_charpoly(a))
        cost = np.abs(lam[:, None] - roots[None, :])
        r, c = linear_sum_assignment(cost)
        worst_root = max(worst_root, cost[r, c].max())
        norm = np.linalg.norm(a, 2)
        worst_trace = max(worst_trace, abs(np.trace(a) - lam.sum()) / (n * norm))
        lu, piv = lu_factor(a)
        det = np.prod(np.diag(lu)) * (-1.0) ** np.sum(piv != np.arange(n))
        worst_det = max(worst_det, abs(np.prod(lam) - det) / abs(det))
    ok = worst_root <= 1e-8 and worst_trace <= 1e-8 and worst_det <= 1e-6
    return ok, (f"root mismatch {worst_root:.1e} (1e-8), trace {worst_trace:.1e} (1e-8 n|A|), "
                f"det {worst_det:.1e} (1e-6 rel)")


def criterion_6():
    coarse = _dense_spectrum("cube-homogeneous-lowfreq")
    fine = _dense_spectrum("cube-homogeneous-lowfreq-fine")
    fc, ff = coarse.cluster_fraction, fine.cluster_fraction
    ok = fc >= 0.9 and ff >= fc
    return ok, (f"within 0.05 of [1, eta_r]: h = a/4 {fc:.1%} of {len(coarse)}, "
                f"h = a/8 {ff:.1%} of {len(fine)}")


def criterion_7(slack: float = 0.02):
    sc, fld, _ = _scenario_problem("wedge-hom1")
    spec = _dense_spectrum("wedge-hom1")
    region = wedge_region(fld, sc.spec.background)
    disc = spec.tagged(DISCRETE)
    worst = float(region.signed_distance(disc).max()) if len(disc) else -np.inf
    dmin = float(np.abs(spec.eigenvalues).min())
    d0 = region.distance_to_origin()
    ok = worst <= slack and dmin > d0 - slack
    return ok, (f"{len(disc)} discrete, max half-plane excess {worst:.1e} (slack {slack}); "
                f"min |lambda| = {dmin:.3f} > wedge distance {d0:.3f} - {slack}")


def criterion_8(inflation: float = 0.05):
    sc, fld, _ = _scenario_problem("cube-in-lossy-background")
    spec = _dense_spectrum("cube-in-lossy-background")
    region = circle_region(fld, sc.spec.background)
    inside = region.contains(spec.eigenvalues, inflation=inflation)
    r = float(np.abs(spec.eigenvalues - region.centers[0]).max())
    return bool(inside.all()), (f"{inside.sum()} of {len(inside)} inside; max |lambda - c| = {r:.4f}, "
                                f"inflated radius {0.5 * region.diameters[0] * (1 + inflation):.4f}")


def criterion_9():
    coarse = _dense_spectrum("cube-highfreq-h5")
    _, _, op = _scenario_problem("cube-highfreq-h10")
    ritz = eig_arnoldi(op, 4)
    r5 = float(np.abs(coarse.eigenvalues).max())
    r10 = float(np.abs(ritz.eigenvalues).max())
    change = abs(r10 - r5) / r5
    ok = len(coarse) == 375 and bool(ritz.converged.all()) and change < 0.10
    return ok, (f"{len(coarse)} eigenvalues at h = lambda/5, rho = {r5:.4f}; "
                f"Arnoldi at h = lambda/10 rho = {r10:.4f}; change {change:.1%} (limit 10%)")


def criterion_10(seed: int = 10):
    sc, fld, op = _scenario_problem("cube-homogeneous-lowfreq")
    plan = plan_relaxation(essential_spectrum(fld))
    rng = np.random.default_rng(seed)
    rhs = rng.standard_normal(op.n_unknowns) + 1j * rng.standard_normal(op.n_unknowns)
    u, trace = solve_relaxed(op, rhs, plan)
    final = np.linalg.norm(rhs - op.to_dense() @ u) / np.linalg.norm(rhs)
    ref = np.linalg.solve(op.to_dense(), rhs)
    err = np.linalg.norm(u - ref) / np.linalg.norm(ref)
    observed = trace.observed_rate()
    neg = ContrastField.from_scalar(fld.grid, -1.0 + 0j)
    try:
        plan_relaxation(essential_spectrum(neg))
        infeasible = False
    except InfeasiblePlanError:
        infeasible = True
    ok = (plan.predicted_rate < 1 and final <= 1e-8 and observed <= 2 * plan.predicted_rate
          and err <= 1e-6 and infeasible)
    return ok, (f"predicted rate {plan.predicted_rate:.3f}, observed {observed:.3f}, "
                f"{trace.iterations} iterations to residual {final:.1e}, error vs LU {err:.1e}; "
                f"eps_r = -1 lossless plan infeasible: {infeasible}")


def criterion_11(workdir: Optional[Path] = None):
    names = list_scenarios()
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp = Path(tmp)
        differing = []
        for name in names:
            a = run_scenario(name, tmp / "a" / name)
            b = run_scenario(name, tmp / "b" / name)
            for pa, pb in ((a.spectrum_csv, b.spectrum_csv), (a.essential_csv, b.essential_csv),
                           (a.regions_csv, b.regions_csv)):
                if (pa is None) != (pb is None) or (pa is not None and not filecmp.cmp(pa, pb, shallow=False)):
                    differing.append(f"{name}/{pa.name if pa else 'regions.csv'}")
    ok = not differing
    return ok, f"{len(names)} scenarios run twice; differing CSVs: {', '.join(differing) or 'none'}"


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("symbol inverse identity", criterion_1),
    2: ("Fourier symbol of the static kernel", criterion_2),
    3: ("zero-contrast identity", criterion_3),
    4: ("dense vs matrix-free", criterion_4),
    5: ("eigensolver oracle", criterion_5),
    6: ("essential-cluster reproduction", criterion_6),
    7: ("wedge bound", criterion_7),
    8: ("circle bound", criterion_8),
    9: ("high-frequency spectral radius", criterion_9),
    10: ("relaxation solver", criterion_10),
    11: ("determinism", criterion_11),
}

# wall-clock budgets in seconds; "runtime seconds" is read as 30 s
RUNTIME_LIMITS: dict[int, float] = {1: 1.0, 2: 60.0, 3: 30.0, 4: 30.0, 5: 30.0, 6: 120.0,
                                    7: 120.0, 8: 120.0, 9: 300.0, 10: 120.0}


def run_criterion(number: int) -> CriterionResult:
    name, fn = CRITERIA[number]
    t0 = time.perf_counter()
    passed, detail = fn()
    elapsed = time.perf_counter() - t0
    limit = RUNTIME_LIMITS.get(number)
    if limit is not None:
        detail += f"; runtime limit {limit:g} s"
        if elapsed > limit:
            passed = False
            detail += " EXCEEDED"
    return CriterionResult(number, name, bool(passed), detail, elapsed)


def run_acceptance(numbers: Optional[Iterable[int]] = None) -> list[CriterionResult]:
    return [run_criterion(n) for n in (sorted(CRITERIA) if numbers is None else numbers)]
