import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from viespec.assembly import (
    apply_matfree,
    assemble_dense,
    build_operator,
    read_dense,
    self_term,
    write_dense,
)
from viespec.errors import DimensionError, SizeError
from viespec.kernel import green_g0, green_g1
from viespec.media import EPS0, MU0, ContrastField, Grid, derive_background


def _random_field(grid, seed):
    rng = np.random.default_rng(seed)
    vals = 1 + rng.uniform(0, 2, grid.n_cells) + 1j * rng.uniform(0, 1, grid.n_cells)
    return ContrastField.from_scalar(grid, vals)


def test_zero_contrast_is_identity(vacuum_1ghz):
    g = Grid((3, 2, 2), 0.01)
    op = assemble_dense(g, ContrastField.vacuum(g), vacuum_1ghz)
    assert np.array_equal(op.to_dense(), np.eye(36))
    u = np.arange(36.0) + 1j
    assert np.array_equal(op.matvec(u), u)


def test_single_cell_static_limit():
    m = derive_background(0.0, EPS0, MU0, 1e-3)
    g = Grid((1, 1, 1), 0.01)
    op = assemble_dense(g, ContrastField.from_scalar(g, 2.5 + 0.5j), m)
    assert np.allclose(op.to_dense(), (1 + (1.5 + 0.5j) / 3) * np.eye(3), atol=1e-12)


def test_two_cell_coupling_block(vacuum_1ghz):
    g = Grid((2, 1, 1), 0.01)
    eta = np.array([2.0 + 0.5j, 3.0 - 0.1j])
    op = assemble_dense(g, ContrastField.from_scalar(g, eta), vacuum_1ghz)
    a = op.to_dense()
    d = np.array([-0.01, 0.0, 0.0])
    kern = 0.01**3 * (green_g0(d) + green_g1(d, vacuum_1ghz))
    assert np.allclose(a[0:3, 3:6], -kern * (eta[1] - 1), rtol=1e-13)
    assert np.allclose(a[3:6, 0:3], -kern * (eta[0] - 1), rtol=1e-13)
    s = self_term(g, vacuum_1ghz)
    assert np.allclose(a[0:3, 0:3], np.eye(3) * (1 + (eta[0] - 1) / 3) - s * (eta[0] - 1))


@settings(max_examples=10)
@given(st.integers(0, 1000), st.sampled_from([(2, 2, 2), (3, 1, 2), (4, 3, 1)]))
def test_matfree_matches_dense(seed, dims):
    m = derive_background(0.01, 2 * EPS0, MU0, 2 * np.pi * 1e9)
    g = Grid(dims, 0.02)
    op = assemble_dense(g, _random_field(g, seed), m)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(op.n_unknowns) + 1j * rng.standard_normal(op.n_unknowns)
    ref = op.to_dense() @ u
    assert np.linalg.norm(apply_matfree(op, u) - ref) <= 1e-12 * np.linalg.norm(ref)
    assert np.linalg.norm(op.rmatvec(u) - op.to_dense().conj().T @ u) <= 1e-12 * np.linalg.norm(ref)


def test_anisotropic_matfree(vacuum_1ghz, rng):
    g = Grid((2, 2, 1), 0.01)
    eta = np.eye(3) + 0.3 * (rng.standard_normal((4, 3, 3)) + 1j * rng.standard_normal((4, 3, 3)))
    op = assemble_dense(g, ContrastField(g, eta), vacuum_1ghz)
    u = rng.standard_normal(12) + 0j
    assert np.allclose(op.matvec(u), op.to_dense() @ u, rtol=1e-12, atol=1e-14)


def test_uniform_scalar_contrast_gives_symmetric_matrix(vacuum_1ghz):
    g = Grid((3, 2, 2), 0.01)
    a = assemble_dense(g, ContrastField.from_scalar(g, 2 + 0.3j), vacuum_1ghz).to_dense()
    assert np.allclose(a, a.T, rtol=0, atol=1e-14 * np.abs(a).max())


def test_self_term_is_scalar_identity(vacuum_1ghz):
    s = self_term(Grid((1, 1, 1), 0.02), vacuum_1ghz)
    assert np.allclose(s, s[0, 0] * np.eye(3))
    static = derive_background(0.0, EPS0, MU0, 1e-6)
    assert abs(self_term(Grid((1, 1, 1), 0.02), static)[0, 0]) < 1e-12


def _ray_length(a, theta, phi):
    d = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
    return a / max(abs(c) for c in d)


def test_self_term_against_spherical_quadrature():
    # independent oracle: integrate the zz entry of g1 over the cube in spherical
    # coordinates, first octant, r from 0 to the cube face along each ray.
    # Breakpoints sit where the ray switches face.
    m = derive_background(0.02, 2 * EPS0, MU0, 2 * np.pi * 1e9)
    k = m.k_b
    h = 0.04
    a = h / 2

    def g1_zz(r, cos2):
        e = cmath.exp(1j * k * r)
        al = k * k * e / (4 * np.pi * r)
        be = 1j * k * e / (4 * np.pi * r * r)
        ga = (e - 1) / (4 * np.pi * r**3)
        return (-al - 3 * be + 3 * ga) * cos2 + (al + be - ga)

    ref = 0j
    for part in (0, 1):
        def integrand(r, theta, phi):
            v = g1_zz(r, np.cos(theta) ** 2) * r * r * np.sin(theta)
            return v.imag if part else v.real

        val, _ = integrate.nquad(
            integrand,
            [lambda theta, phi: (0.0, _ray_length(a, theta, phi)), (0.0, np.pi / 2), (0.0, np.pi / 2)],
            opts=[
                {"epsabs": 1e-14, "epsrel": 1e-9},
                lambda phi: {"epsabs": 1e-13, "epsrel": 1e-8, "points": [np.arctan(1 / max(np.cos(phi), np.sin(phi)))]},
                {"epsabs": 1e-13, "epsrel": 1e-8, "points": [np.pi / 4]},
            ],
        )
        ref += 8 * val * (1j if part else 1)
    got = self_term(Grid((1, 1, 1), h), m)[2, 2]
    assert abs(got - ref) <= 1e-8 * abs(ref)


def test_static_kernel_principal_value_over_cube():
    # the ball part vanishes; what remains is int f(dir) ln R(dir) dOmega over the sphere
    def integrand(theta, phi):
        t = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
        return green_g0(t)[2, 2] * np.log(_ray_length(1.0, theta, phi)) * np.sin(theta)

    val, _ = integrate.nquad(
        integrand,
        [(0.0, np.pi / 2), (0.0, np.pi / 2)],
        opts=[
            lambda phi: {"epsabs": 1e-13, "points": [np.arctan(1 / max(np.cos(phi), np.sin(phi)))]},
            {"epsabs": 1e-13, "points": [np.pi / 4]},
        ],
    )
    assert abs(8 * val) < 1e-10


def test_operator_norm_grows_with_frequency():
    g = Grid((3, 3, 3), 0.01)
    field = ContrastField.from_scalar(g, 2.0 + 0.5j)
    norms = []
    for f in (1e9, 3e9, 6e9):
        m = derive_background(0.0, EPS0, MU0, 2 * np.pi * f)
        norms.append(np.linalg.norm(assemble_dense(g, field, m).to_dense(), 2))
    assert norms[0] < norms[1] < norms[2]


def test_size_and_dimension_errors(vacuum_1ghz):
    g = Grid((4, 4, 4), 0.01)
    field = ContrastField.vacuum(g)
    with pytest.raises(SizeError):
        assemble_dense(g, field, vacuum_1ghz, dense_cap=10)
    op = build_operator(g, field, vacuum_1ghz)
    with pytest.raises(SizeError):
        op.to_dense(dense_cap=10)
    with pytest.raises(DimensionError):
        op.matvec(np.ones(5))
    with pytest.raises(DimensionError):
        build_operator(Grid((2, 2, 2), 0.01), field, vacuum_1ghz)


def test_dense_dump_round_trip(tmp_path, vacuum_1ghz):
    g = Grid((2, 1, 1), 0.01)
    op = assemble_dense(g, ContrastField.from_scalar(g, 2 + 1j), vacuum_1ghz)
    dims, h, omega, mat = read_dense(write_dense(op, tmp_path / "a.bin"))
    assert dims == (2, 1, 1) and h == 0.01 and omega == vacuum_1ghz.omega
    assert np.array_equal(mat, op.to_dense())
    (tmp_path / "bad.bin").write_bytes(b"NOTDENSE" + bytes(60))
    (tmp_path / "short.bin").write_bytes(b"VIEDENSE")
    for name in ("bad.bin", "short.bin"):
        with pytest.raises(ValueError):
            read_dense(tmp_path / name)
