"""Collocation discretization of the electric volume integral operator.

Unknowns are ordered cell-major, component-minor: entry ``3*n + c`` is
component ``c`` of the field in cell ``n`` (cell order as ``Grid.indices``).
Row block ``m`` of the operator reads

    (I + chi_m/3) u_m - sum_n K(x_m - x_n) chi_n u_n

with ``K(d) = h^3 (g0 + g1)(d)`` off the diagonal (midpoint rule) and
``K(0)`` the integral of ``g1`` over one cell.  The principal value of
``g0`` over a cube centred on the singularity is zero, so the static part
has no self contribution.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator

from .errors import AccuracyError, DimensionError, SizeError
from .kernel import _green_g1_k, expm1i, green_g0
from .media import BackgroundMedium, ContrastField, Grid

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DiscreteOperator",
    "assemble_dense",
    "build_operator",
    "apply_matfree",
    "self_term",
    "write_dense",
    "read_dense",
]

DEFAULT_DENSE_CAP = 4096
_EYE3 = np.eye(3)
_MAGIC = b"VIEDENSE"


def _radial_moment(x: np.ndarray) -> np.ndarray:
    """``exp(ix)(1 - ix) - 1``, i.e. ``k^2 * int_0^rho r exp(ikr) dr`` with ``x = k rho``."""
    x = np.asarray(x, dtype=complex)
    out = expm1i(x) - 1j * x * np.exp(1j * x)
    small = np.abs(x) < 0.1
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        term = np.ones_like(xs)
        for n in range(1, 24):
            term = term * (1j * xs) / n
            if n >= 2:
                acc -= (n - 1) * term
        out[small] = acc
    return out


def _self_integral(h: float, k: complex, order: int) -> complex:
    # trace(g1) = 2*alpha, and by cubic symmetry the cell integral of g1 is
    # (1/3) tr(...) * I.  The radial integral of alpha*r^2 along each ray is
    # closed form; the ray length is integrated over one face (x6 faces, x4
    # quadrants) with Gauss-Legendre in the face coordinates.
    a = 0.5 * h
    t, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * a * (t + 1.0)
    wx = 0.5 * a * w
    X, Y = np.meshgrid(x, x, indexing="ij")
    rho = np.sqrt(X * X + Y * Y + a * a)
    vals = a / rho**3 * _radial_moment(k * rho) / (4.0 * np.pi)
    face = np.sum(wx[:, None] * wx[None, :] * vals)
    return complex((2.0 / 3.0) * 24.0 * face)


def self_term(grid: Grid, medium: BackgroundMedium, *, rtol: float = 1e-6, max_order: int = 256) -> np.ndarray:
    k = medium.k_b
    if k == 0:
        return np.zeros((3, 3), dtype=complex)
    order = 8
    prev = _self_integral(grid.h, k, order)
    while order < max_order:
        order *= 2
        cur = _self_integral(grid.h, k, order)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur * _EYE3
        prev = cur
    raise AccuracyError(f"self-term quadrature did not reach rtol={rtol} by order {max_order}")


def _offset_kernel(grid: Grid, medium: BackgroundMedium, self_block: np.ndarray) -> np.ndarray:
    """K(d) for integer offsets d in [-(n-1), n-1]^3, shape (2nx-1, 2ny-1, 2nz-1, 3, 3)."""
    nx, ny, nz = grid.dims
    off = np.stack(
        np.meshgrid(
            np.arange(-nx + 1, nx), np.arange(-ny + 1, ny), np.arange(-nz + 1, nz), indexing="ij"
        ),
        axis=-1,
    ).astype(float)
    centre = (nx - 1, ny - 1, nz - 1)
    off[centre] = 1.0  # placeholder, overwritten below
    dx = grid.h * off
    kern = grid.h**3 * (green_g0(dx) + _green_g1_k(dx, medium.k_b))
    kern[centre] = self_block
    return kern


@dataclass(eq=False)
class DiscreteOperator:
    grid: Grid
    field: ContrastField
    medium: BackgroundMedium
    self_block: np.ndarray
    kernel_hat: np.ndarray  # (3, 3, Px, Py, Pz)
    kernel_hat_adj: np.ndarray
    dense: Optional[np.ndarray] = None

    def __post_init__(self):
        for a in (self.self_block, self.kernel_hat, self.kernel_hat_adj, self.dense):
            if a is not None:
                a.setflags(write=False)

    @property
    def n_unknowns(self) -> int:
        return 3 * self.grid.n_cells

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_unknowns, self.n_unknowns)

    @property
    def h(self) -> float:
        return self.grid.h

    def matvec(self, u) -> np.ndarray:
        return apply_matfree(self, u)

    def rmatvec(self, u) -> np.ndarray:
        return _apply(self, u, adjoint=True)

    def __matmul__(self, u):
        return self.matvec(u)

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=complex)

    def to_dense(self, dense_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        return _dense_matrix(self.grid, self.field, self.medium, self.self_block, dense_cap)


def build_operator(grid: Grid, field: ContrastField, medium: BackgroundMedium) -> DiscreteOperator:
    """Matrix-free operator: kernel table transformed once for FFT convolution."""
    if field.grid != grid:
        raise DimensionError("contrast field was rasterized on a different grid")
    s = self_term(grid, medium)
    kern = _offset_kernel(grid, medium, s)
    pads = tuple(scipy.fft.next_fast_len(2 * n - 1) for n in grid.dims)
    circ = np.zeros((3, 3) + pads, dtype=complex)
    nx, ny, nz = grid.dims
    ix = np.arange(-nx + 1, nx) % pads[0]
    iy = np.arange(-ny + 1, ny) % pads[1]
    iz = np.arange(-nz + 1, nz) % pads[2]
    circ[:, :, ix[:, None, None], iy[None, :, None], iz[None, None, :]] = np.moveaxis(kern, (3, 4), (0, 1))
    khat = scipy.fft.fftn(circ, axes=(2, 3, 4))
    khat_adj = scipy.fft.fftn(np.conj(circ), axes=(2, 3, 4))
    return DiscreteOperator(grid, field, medium, s, khat, khat_adj)


def _apply(op: DiscreteOperator, u, adjoint: bool = False) -> np.ndarray:
    u = np.asarray(u)
    if u.shape != (op.n_unknowns,):
        raise DimensionError(f"vector length {u.shape} does not match operator size {op.n_unknowns}")
    grid = op.grid
    nx, ny, nz = grid.dims
    chi = op.field.chi
    U = u.reshape(-1, 3).astype(complex, copy=False)
    if adjoint:
        chi = np.conj(np.swapaxes(chi, 1, 2))
        khat = op.kernel_hat_adj
        pads = khat.shape[2:]
        Ug = U.reshape(nx, ny, nz, 3)
        uhat = scipy.fft.fftn(Ug, s=pads, axes=(0, 1, 2))
        vhat = np.einsum("ij...,...j->...i", khat, uhat)
        V = scipy.fft.ifftn(vhat, axes=(0, 1, 2))[:nx, :ny, :nz].reshape(-1, 3)
        out = U + np.einsum("nij,nj->ni", chi, U) / 3.0 - np.einsum("nij,nj->ni", chi, V)
        return out.reshape(-1)
    khat = op.kernel_hat
    pads = khat.shape[2:]
    W = np.einsum("nij,nj->ni", chi, U)
    what = scipy.fft.fftn(W.reshape(nx, ny, nz, 3), s=pads, axes=(0, 1, 2))
    vhat = np.einsum("ij...,...j->...i", khat, what)
    V = scipy.fft.ifftn(vhat, axes=(0, 1, 2))[:nx, :ny, :nz].reshape(-1, 3)
    return (U + W / 3.0 - V).reshape(-1)


def apply_matfree(op: DiscreteOperator, u) -> np.ndarray:
    return _apply(op, u)


def _dense_matrix(grid, field, medium, self_block, dense_cap, chunk: int = 256) -> np.ndarray:
    n = grid.n_cells
    if n > dense_cap:
        raise SizeError(
            f"{n} cells exceed the dense cap of {dense_cap}; use the matrix-free path (arnoldi mode)"
        )
    centers = grid.centers()
    chi = field.chi
    h3 = grid.h**3
    k = medium.k_b
    out = np.empty((3 * n, 3 * n), dtype=complex)
    for start in range(0, n, chunk):
        rows = np.arange(start, min(start + chunk, n))
        dx = centers[rows, None, :] - centers[None, :, :]
        diag = (np.arange(len(rows)), rows)
        dx[diag] = 1.0
        kern = h3 * (green_g0(dx) + _green_g1_k(dx, k))
        kern[diag] = self_block
        blocks = -kern @ chi[None, :, :, :]
        blocks[diag] += _EYE3 + chi[rows] / 3.0
        out[3 * start : 3 * rows[-1] + 3] = blocks.transpose(0, 2, 1, 3).reshape(3 * len(rows), 3 * n)
    return out


def assemble_dense(
    grid: Grid, field: ContrastField, medium: BackgroundMedium, dense_cap: int = DEFAULT_DENSE_CAP
) -> DiscreteOperator:
    if grid.n_cells > dense_cap:
        raise SizeError(
            f"{grid.n_cells} cells exceed the dense cap of {dense_cap}; use the matrix-free path"
        )
    op = build_operator(grid, field, medium)
    dense = _dense_matrix(grid, field, medium, op.self_block, dense_cap)
    return DiscreteOperator(grid, field, medium, op.self_block, op.kernel_hat, op.kernel_hat_adj, dense)


# -- binary dump ------------------------------------------------------------------------
# layout (little endian): 8-byte magic "VIEDENSE", uint32 version (1),
# 3 x int64 grid dims, float64 h, float64 omega, then the 3N x 3N matrix as
# row-major complex128 (interleaved re/im), unknowns ordered as in the module doc.

_HEADER = struct.Struct("<8sI3qdd")


def write_dense(op: DiscreteOperator, path) -> Path:
    path = Path(path)
    mat = np.ascontiguousarray(op.to_dense(), dtype="<c16")
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, *op.grid.dims, op.grid.h, op.medium.omega))
        fh.write(mat.tobytes())
    return path


def read_dense(path):
    """Return ``(dims, h, omega, matrix)`` from a file written by :func:`write_dense`."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path} is too short to be a dense operator dump")
    magic, version, nx, ny, nz, h, omega = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise ValueError(f"{path} is not a dense operator dump")
    m = 3 * nx * ny * nz
    mat = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if mat.size != m * m:
        raise ValueError(f"{path}: payload holds {mat.size} entries, expected {m * m}")
    return (nx, ny, nz), h, omega, mat.reshape(m, m).copy()
