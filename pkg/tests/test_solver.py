import csv
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viespec.assembly import build_operator
from viespec.bounds import circle_region, wedge_region
from viespec.errors import DivergenceError, DomainError, InfeasiblePlanError
from viespec.media import ContrastField, Grid
from viespec.solver import (
    Disk,
    IterationTrace,
    RelaxationPlan,
    minimal_enclosing_disk,
    plan_relaxation,
    region_hull_points,
    solve_relaxed,
)
from viespec.symbol import essential_spectrum

points = st.lists(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=8
)


def _brute_force_disk(pts):
    pts = list(dict.fromkeys(complex(p) for p in pts))
    if len(pts) == 1:
        return pts[0], 0.0
    cands = []
    for a, b in itertools.combinations(pts, 2):
        cands.append(((a + b) / 2, abs(a - b) / 2))
    for a, b, c in itertools.combinations(pts, 3):
        m = np.array([[2 * (b - a).real, 2 * (b - a).imag], [2 * (c - a).real, 2 * (c - a).imag]])
        if abs(np.linalg.det(m)) < 1e-9:
            continue
        rhs = [abs(b) ** 2 - abs(a) ** 2, abs(c) ** 2 - abs(a) ** 2]
        x, y = np.linalg.solve(m, rhs)
        cands.append((complex(x, y), abs(complex(x, y) - a)))
    best = min(
        (cr for cr in cands if all(abs(p - cr[0]) <= cr[1] * (1 + 1e-9) + 1e-9 for p in pts)),
        key=lambda cr: cr[1],
    )
    return best


@settings(max_examples=100)
@given(points)
def test_enclosing_disk_matches_brute_force(pts):
    disk = minimal_enclosing_disk(pts)
    _, radius = _brute_force_disk(pts)
    assert np.all(disk.contains(pts, rtol=1e-9))
    assert disk.radius == pytest.approx(radius, rel=1e-7, abs=1e-9)


def test_enclosing_disk_errors_and_determinism(rng):
    with pytest.raises(DomainError):
        minimal_enclosing_disk([])
    with pytest.raises(DomainError):
        minimal_enclosing_disk([1.0, np.inf])
    pts = rng.standard_normal(500) + 1j * rng.standard_normal(500)
    assert minimal_enclosing_disk(pts) == minimal_enclosing_disk(pts[::-1])
    assert minimal_enclosing_disk([2 + 1j]) == Disk(2 + 1j, 0.0)


def test_plan_for_single_point():
    plan = plan_relaxation(extra_points=[1.0])
    assert plan.tau == 1.0 and plan.predicted_rate == 0.0
    u, trace = solve_relaxed(np.eye(4), np.arange(4.0) + 1, plan)
    assert trace.iterations == 1
    assert np.allclose(u, np.arange(4.0) + 1)


def test_plan_for_segment():
    plan = plan_relaxation(extra_points=[1.0, 2.0])
    assert plan.center == pytest.approx(1.5)
    assert plan.radius == pytest.approx(0.5)
    assert plan.tau == pytest.approx(2 / 3)
    assert plan.predicted_rate == pytest.approx(1 / 3)


def test_infeasible_plan():
    with pytest.raises(InfeasiblePlanError):
        plan_relaxation(extra_points=[1.0, -1.0])
    with pytest.raises(InfeasiblePlanError):
        plan_relaxation(essential_spectrum(ContrastField.from_scalar(Grid((1, 1, 1), 1.0), -1.0)))
    with pytest.raises(DomainError):
        plan_relaxation()


def test_zero_contrast_converges_in_one_step(vacuum_1ghz, rng):
    g = Grid((3, 3, 3), 0.01)
    field = ContrastField.vacuum(g)
    op = build_operator(g, field, vacuum_1ghz)
    plan = plan_relaxation(essential_spectrum(field))
    rhs = rng.standard_normal(op.n_unknowns) + 0j
    u, trace = solve_relaxed(op, rhs, plan)
    assert trace.iterations == 1
    assert np.allclose(u, rhs)


def test_solution_matches_direct_solve(vacuum_1ghz, rng):
    g = Grid((3, 3, 3), 0.0025)
    field = ContrastField.from_scalar(g, 1.5 + 0.25j)
    op = build_operator(g, field, vacuum_1ghz)
    plan = plan_relaxation(essential_spectrum(field))
    rhs = rng.standard_normal(op.n_unknowns) + 1j * rng.standard_normal(op.n_unknowns)
    u, trace = solve_relaxed(op, rhs, plan)
    ref = np.linalg.solve(op.to_dense(), rhs)
    assert np.linalg.norm(u - ref) <= 1e-6 * np.linalg.norm(ref)
    assert trace.residuals[-1] <= plan.tol
    # independent residual check with the dense matrix
    assert np.linalg.norm(rhs - op.to_dense() @ u) <= plan.tol * np.linalg.norm(rhs) * (1 + 1e-6)
    res = np.asarray(trace.residuals)
    assert np.all(np.diff(res[3:]) <= 1e-12)


def test_normal_operator_rate_matches_prediction(rng):
    n = 80
    lam = 2.0 + 0.8 * np.exp(2j * np.pi * rng.random(n)) * np.sqrt(rng.random(n))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    a = q @ np.diag(lam) @ q.conj().T
    plan = plan_relaxation(extra_points=lam, tol=1e-10)
    _, trace = solve_relaxed(a, rng.standard_normal(n) + 0j, plan)
    assert trace.observed_rate() <= plan.predicted_rate + 0.05


def test_divergence_is_reported():
    a = np.diag([1.0, 5.0]) + 0j
    plan = RelaxationPlan(tau=1.0, center=1.0, radius=0.0, predicted_rate=0.0)
    with pytest.raises(DivergenceError) as err:
        solve_relaxed(a, np.array([1.0, 1.0]), plan)
    assert err.value.trace is not None and err.value.trace.iterations < 20


def test_forced_plan_on_spectrum_straddling_zero():
    a = np.diag([-1.0, 1.0]) + 0j
    with pytest.raises(InfeasiblePlanError):
        plan_relaxation(extra_points=[-1.0, 1.0])
    plan = RelaxationPlan(tau=1.0, center=1.0, radius=1.0, predicted_rate=1.0)
    with pytest.raises(DivergenceError):
        solve_relaxed(a, np.array([1.0, 1.0]), plan)


def test_zero_rhs():
    plan = plan_relaxation(extra_points=[1.0, 2.0])
    u, trace = solve_relaxed(np.eye(3), np.zeros(3), plan)
    assert not u.any() and trace.iterations == 0


def test_region_hull_points_cover_disks(lossy_1ghz):
    field = ContrastField.from_scalar(Grid((2, 1, 1), 1.0), np.array([2 + 1j, 0.5 - 0.5j]))
    reg = circle_region(field, lossy_1ghz)
    pts = region_hull_points(reg, n_polygon=16)
    disk = minimal_enclosing_disk(pts)
    for c, d in zip(reg.centers, reg.diameters):
        assert abs(c - disk.center) + d / 2 <= disk.radius + 1e-12


def test_half_planes_need_a_radius(vacuum_1ghz):
    reg = wedge_region(ContrastField.from_scalar(Grid((1, 1, 1), 1.0), 3 + 1j), vacuum_1ghz)
    with pytest.raises(DomainError):
        region_hull_points(reg)
    pts = region_hull_points(reg, spectral_radius=4.0)
    assert np.all(reg.contains(pts, slack=1e-9))
    assert np.abs(pts).max() <= 4.0 / np.cos(np.pi / 64) + 1e-9
    with pytest.raises(DomainError):
        region_hull_points(reg, n_polygon=2, spectral_radius=4.0)


def test_trace_rate_and_csv(tmp_path):
    trace = IterationTrace(np.array([1.0, 0.5, 0.25, 0.125]))
    assert trace.iterations == 3
    assert trace.observed_rate() == pytest.approx(0.5)
    rows = list(csv.reader(trace.to_csv(tmp_path / "t.csv").open()))
    assert rows[0] == ["iteration", "residual"] and rows[-1] == ["3", "0.125"]
    assert IterationTrace(np.array([1.0])).observed_rate() == 0.0
