import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from viespec.assembly import build_operator
from viespec.bounds import (
    CIRCLE,
    GENERAL,
    WEDGE,
    _geometry,
    bound_region,
    circle_region,
    general_bound_holds,
    general_bound_value,
    general_region,
    spectral_radius_bound,
    wedge_region,
)
from viespec.eig import DISCRETE, classify, eig_dense
from viespec.errors import DomainError, RegimeError, UndefinedCaseError
from viespec.media import EPS0, MU0, ContrastField, Grid, admittance, derive_background
from viespec.symbol import essential_spectrum

OMEGA = 2 * np.pi * 1e9
G1 = Grid((1, 1, 1), 0.01)


def _field(*eta_r):
    return ContrastField.from_scalar(Grid((len(eta_r), 1, 1), 0.01), np.array(eta_r, dtype=complex))


def test_vacuum_lossless_reduces_to_imaginary_part(vacuum_1ghz):
    eps = 3 * EPS0
    eta = admittance(0.0, eps, OMEGA)
    for lam in (0.3 + 0.7j, -2 - 1j, 5 + 0.01j):
        v = general_bound_value(lam, eta, vacuum_1ghz)
        assert v == pytest.approx(OMEGA * (eps - EPS0) * lam.imag, rel=1e-12)
        assert general_bound_holds(lam, eta, vacuum_1ghz) == (lam.imag <= 0)


def test_segment_endpoint_is_admissible(vacuum_1ghz):
    eta = admittance(0.05, 2.5 * EPS0, OMEGA)
    assert general_bound_holds(eta / vacuum_1ghz.eta_b, eta, vacuum_1ghz)


def test_real_lambda_on_boundary(vacuum_1ghz):
    assert general_bound_holds(2.0, admittance(0.0, 4 * EPS0, OMEGA), vacuum_1ghz)


def test_lambda_one_is_undefined(vacuum_1ghz):
    with pytest.raises(UndefinedCaseError):
        general_bound_holds(1.0, admittance(0.0, 2 * EPS0, OMEGA), vacuum_1ghz)


def test_wedge_lossless_is_lower_half_plane(vacuum_1ghz):
    reg = wedge_region(_field(3.0), vacuum_1ghz)
    assert reg.kind == WEDGE
    assert reg.markers["M"] == 3.0
    assert reg.markers["N"] == 0
    lam = np.array([2 + 0.1j, 2 - 0.1j, -5 - 1e-9j, 100 + 0j, -1 + 1e-3j])
    assert list(reg.contains(lam)) == [False, True, True, True, False]


def test_wedge_homogeneous_conducting_marker(vacuum_1ghz):
    sigma, eps = 0.1, 3 * EPS0
    eta_r = admittance(sigma, eps, OMEGA) / vacuum_1ghz.eta_b
    reg = wedge_region(_field(eta_r), vacuum_1ghz)
    assert reg.markers["M"] == pytest.approx(3 + 1j * sigma / (OMEGA * EPS0))
    assert reg.markers["N"] == pytest.approx(-1j * sigma / (OMEGA * (eps - EPS0)))
    # the boundary passes through 1 and M, and N lies on it as well
    for z in (1.0, reg.markers["M"], reg.markers["N"]):
        assert abs(reg.signed_distance(z)) < 1e-12


def test_wedge_inhomogeneous_markers_by_scan(vacuum_1ghz):
    vals = [3 + 1j, 2 + 1.5j, 4 + 0.2j, 3 + 1j]
    reg = wedge_region(_field(*vals), vacuum_1ghz)
    ratios = [v.imag / (v.real - 1) for v in vals]
    assert reg.markers["N1"] == pytest.approx(-1j * max(ratios))
    assert reg.markers["N2"] == pytest.approx(-1j * min(ratios))
    assert len(reg.eta_r) == 3
    assert {"M1", "M2", "M3"} <= set(reg.markers)


def test_union_over_cells(vacuum_1ghz):
    reg = wedge_region(_field(3 + 1j, 2 + 1.5j), vacuum_1ghz)
    lam = np.array([0.5 - 0.3j, 3 + 2j, 0.2 + 0.5j])
    single = [wedge_region(_field(v), vacuum_1ghz).contains(lam) for v in (3 + 1j, 2 + 1.5j)]
    assert np.array_equal(reg.contains(lam), single[0] | single[1])


@pytest.mark.parametrize("eta_r", [3 - 0.1j, 0.5 + 0.1j, 1.0 + 0.5j])
def test_wedge_regime_errors(vacuum_1ghz, eta_r):
    with pytest.raises(RegimeError):
        wedge_region(_field(eta_r), vacuum_1ghz)


def test_wedge_needs_lossless_background(lossy_1ghz):
    with pytest.raises(RegimeError):
        wedge_region(_field(3 + 1j), lossy_1ghz)


def test_circle_needs_lossy_background(vacuum_1ghz):
    with pytest.raises(RegimeError):
        circle_region(_field(3 + 1j), vacuum_1ghz)


def test_no_scatterer_or_anisotropic(vacuum_1ghz):
    with pytest.raises(RegimeError):
        general_region(ContrastField.vacuum(G1), vacuum_1ghz)
    aniso = ContrastField(G1, np.diag([1.0, 1.0, 4.0]).astype(complex)[None])
    with pytest.raises(RegimeError):
        general_region(aniso, vacuum_1ghz)
    assert bound_region(aniso, vacuum_1ghz) is None
    assert bound_region(ContrastField.vacuum(G1), vacuum_1ghz) is None
    with pytest.raises(DomainError):
        bound_region(_field(2.0), vacuum_1ghz, kind="square")


def test_auto_selection(vacuum_1ghz, lossy_1ghz):
    assert bound_region(_field(3 + 1j), vacuum_1ghz).kind == WEDGE
    assert bound_region(_field(0.5 + 1j), vacuum_1ghz).kind == GENERAL
    assert bound_region(_field(0.5 + 1j), lossy_1ghz).kind == CIRCLE


def test_circle_through_zero_and_one(lossy_1ghz):
    # sigma = 0 and eps = eps_b in a background with sigma_b = omega eps_b
    eta_r = admittance(0.0, lossy_1ghz.eps_b, lossy_1ghz.omega) / lossy_1ghz.eta_b
    reg = circle_region(_field(eta_r), lossy_1ghz)
    assert reg.centers[0] == pytest.approx(0.5)
    assert reg.diameters[0] == pytest.approx(1.0)
    assert reg.markers["M2"] == pytest.approx(0.5 - 0.5j, abs=1e-15)
    assert abs(reg.signed_distance(0.0)) < 1e-15


def test_circle_degenerates_for_background_material(lossy_1ghz):
    centers, diam, normals = _geometry(np.array([1.0 + 0j]), lossy_1ghz)
    assert normals is None
    assert centers[0] == pytest.approx(1.0) and diam[0] == 0.0


def test_circle_parameters_from_material(lossy_1ghz):
    sigma, eps = 0.3, 4 * EPS0
    eta_r = admittance(sigma, eps, OMEGA) / lossy_1ghz.eta_b
    reg = circle_region(_field(eta_r), lossy_1ghz)
    sb, eb = lossy_1ghz.sigma_b, lossy_1ghz.eps_b
    a = sigma / sb + 1
    b = OMEGA * (eps - eb) / sb
    assert reg.centers[0] == pytest.approx(a / 2 - 0.5j * b, rel=1e-12)
    assert reg.diameters[0] ** 2 == pytest.approx((sigma / sb - 1) ** 2 + b**2, rel=1e-12)
    assert "M2" not in reg.markers


@given(
    st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False),
    st.floats(0, 5),
    st.floats(0.1, 10),
)
def test_circle_equals_expanded_inequality(lam, sigma, eps_r):
    medium = derive_background(OMEGA * EPS0, EPS0, MU0, OMEGA)
    eta = admittance(sigma, eps_r * EPS0, OMEGA)
    centers, diam, _ = _geometry(np.array([eta / medium.eta_b]), medium)
    lhs = abs(lam - centers[0]) ** 2 - 0.25 * diam[0] ** 2
    rhs = general_bound_value(lam, eta, medium) / medium.eta_b.real
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lam)) ** 2 * (1 + abs(eta / medium.eta_b)))


def test_region_csv_and_primitives(tmp_path, vacuum_1ghz, lossy_1ghz):
    reg = wedge_region(_field(3 + 1j), vacuum_1ghz)
    (prim,) = reg.primitives()
    assert prim["type"] == "halfplane"
    # the direction vector is orthogonal to the normal
    assert prim["dx"] * prim["nx"] + prim["dy"] * prim["ny"] == 0
    rows = list(csv.DictReader(reg.to_csv(tmp_path / "w.csv").open()))
    assert rows[0]["kind"] == "wedge" and float(rows[0]["eta_r_re"]) == 3.0
    circ = circle_region(_field(2 + 1j), lossy_1ghz)
    rows = list(csv.DictReader(circ.to_csv(tmp_path / "c.csv").open()))
    assert float(rows[0]["radius"]) == pytest.approx(circ.diameters[0] / 2)


def test_discrete_eigenvalues_satisfy_general_bound(vacuum_1ghz):
    grid = Grid((3, 3, 2), 0.004)
    vals = np.where(grid.indices()[:, 2] == 0, 2.0 + 0.8j, 3.5 + 0.2j)
    field = ContrastField.from_scalar(grid, vals)
    op = build_operator(grid, field, vacuum_1ghz)
    spec = classify(eig_dense(op.to_dense()), essential_spectrum(field), 0.05)
    reg = general_region(field, vacuum_1ghz)
    disc = spec.tagged(DISCRETE)
    assert np.all(reg.contains(disc, slack=0.02))


def test_spectral_radius_zero_contrast(vacuum_1ghz):
    g = Grid((3, 3, 3), 0.01)
    r = spectral_radius_bound(build_operator(g, ContrastField.vacuum(g), vacuum_1ghz))
    assert 1.0 <= r <= 1.0 + 1e-6


def test_spectral_radius_above_dense_spectrum(vacuum_1ghz):
    g = Grid((3, 3, 3), 0.005)
    field = ContrastField.from_scalar(g, 2.5 + 0.75j)
    op = build_operator(g, field, vacuum_1ghz)
    assert spectral_radius_bound(op) >= np.abs(eig_dense(op.to_dense()).eigenvalues).max()


def test_spectral_radius_monotone_in_contrast(vacuum_1ghz):
    g = Grid((3, 3, 3), 0.005)
    chi = 1.5 + 0.5j
    r1 = spectral_radius_bound(build_operator(g, ContrastField.from_scalar(g, 1 + chi), vacuum_1ghz))
    r2 = spectral_radius_bound(build_operator(g, ContrastField.from_scalar(g, 1 + 2 * chi), vacuum_1ghz))
    assert r2 >= r1


def test_spectral_radius_tiny_operator(vacuum_1ghz):
    op = build_operator(G1, ContrastField.from_scalar(G1, 2.0), vacuum_1ghz)
    assert spectral_radius_bound(op) == pytest.approx(np.linalg.norm(op.to_dense(), 2), rel=1e-6)
