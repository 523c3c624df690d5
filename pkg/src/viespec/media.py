"""Background medium, uniform grids and per-cell contrast tensors.

All quantities are SI; ``omega`` is the angular frequency.  The admittance
of a medium is ``eta = sigma - i*omega*eps`` (time factor ``exp(-i*omega*t)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.constants import epsilon_0 as EPS0
from scipy.constants import mu_0 as MU0

from .errors import DomainError, GeometryError

__all__ = [
    "EPS0",
    "MU0",
    "BackgroundMedium",
    "Grid",
    "ContrastField",
    "Box",
    "ScattererSpec",
    "derive_background",
    "admittance",
    "rasterize",
]

_EYE3 = np.eye(3)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BackgroundMedium:
    sigma_b: float
    eps_b: float
    mu_b: float
    omega: float

    @property
    def eta_b(self) -> complex:
        return complex(self.sigma_b, -self.omega * self.eps_b)

    @property
    def zeta_b(self) -> complex:
        return complex(0.0, -self.omega * self.mu_b)

    @property
    def k_b(self) -> complex:
        k = np.sqrt(complex(-self.eta_b * self.zeta_b))
        # principal root already has Im >= 0 for a passive medium; keep the
        # branch explicit in case of signed-zero surprises
        if k.imag < 0 or (k.imag == 0 and k.real < 0):
            k = -k
        return complex(k)

    @property
    def wavelength(self) -> float:
        """Wavelength in the background, ``2*pi/Re(k_b)``."""
        return 2.0 * np.pi / self.k_b.real

    @property
    def is_lossless(self) -> bool:
        return self.sigma_b == 0.0


def derive_background(sigma_b: float, eps_b: float, mu_b: float, omega: float) -> BackgroundMedium:
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    if not eps_b > 0:
        raise DomainError(f"eps_b must be positive, got {eps_b!r}")
    if not mu_b > 0:
        raise DomainError(f"mu_b must be positive, got {mu_b!r}")
    if not sigma_b >= 0:
        raise DomainError(f"sigma_b must be non-negative, got {sigma_b!r}")
    return BackgroundMedium(float(sigma_b), float(eps_b), float(mu_b), float(omega))


def admittance(sigma, eps, omega: float) -> np.ndarray:
    """``sigma - i*omega*eps`` for scalars or 3x3 tensors."""
    return np.asarray(sigma, dtype=complex) - 1j * omega * np.asarray(eps, dtype=complex)


@dataclass(frozen=True)
class Grid:
    dims: tuple[int, int, int]
    h: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise DomainError(f"grid dims must be three positive integers, got {self.dims!r}")
        if not self.h > 0:
            raise DomainError(f"cell size must be positive, got {self.h!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def indices(self) -> np.ndarray:
        """Integer (i, j, k) per cell, C order: cell = (i*ny + j)*nz + k."""
        return np.indices(self.dims).reshape(3, -1).T

    def centers(self) -> np.ndarray:
        return np.asarray(self.origin) + self.h * (self.indices() + 0.5)

    @property
    def extent(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin)
        return lo, lo + self.h * np.asarray(self.dims)


@dataclass(frozen=True, eq=False)
class ContrastField:
    """Relative admittance ``eta_r = eta/eta_b`` per cell, shape (N, 3, 3)."""

    grid: Grid
    eta_r: np.ndarray
    isotropic: bool = field(init=False)

    def __post_init__(self):
        eta_r = np.array(self.eta_r, dtype=complex)
        if eta_r.shape != (self.grid.n_cells, 3, 3):
            raise DomainError(
                f"eta_r must have shape ({self.grid.n_cells}, 3, 3), got {eta_r.shape}"
            )
        object.__setattr__(self, "eta_r", _frozen(eta_r))
        diag = eta_r[:, 0, 0]
        iso = bool(np.all(eta_r == diag[:, None, None] * _EYE3))
        object.__setattr__(self, "isotropic", iso)

    @classmethod
    def vacuum(cls, grid: Grid) -> "ContrastField":
        return cls(grid, np.broadcast_to(_EYE3, (grid.n_cells, 3, 3)))

    @classmethod
    def from_scalar(cls, grid: Grid, eta_r) -> "ContrastField":
        vals = np.broadcast_to(np.asarray(eta_r, dtype=complex), (grid.n_cells,))
        return cls(grid, vals[:, None, None] * _EYE3)

    @property
    def chi(self) -> np.ndarray:
        return self.eta_r - _EYE3

    @property
    def scalar_eta_r(self) -> np.ndarray:
        if not self.isotropic:
            raise DomainError("field is anisotropic; no scalar eta_r")
        return self.eta_r[:, 0, 0]

    @property
    def scatterer_mask(self) -> np.ndarray:
        """Cells where the contrast is nonzero."""
        return np.any(self.eta_r != _EYE3, axis=(1, 2))

    def distinct_eta_r(self) -> np.ndarray:
        """Distinct relative admittances inside the scatterer, sorted, shape (M, 3, 3)."""
        inside = self.eta_r[self.scatterer_mask]
        if inside.size == 0:
            return np.zeros((0, 3, 3), dtype=complex)
        flat = inside.reshape(len(inside), 9)
        keys = np.concatenate([flat.real, flat.imag], axis=1)
        uniq = np.unique(keys, axis=0)
        return (uniq[:, :9] + 1j * uniq[:, 9:]).reshape(-1, 3, 3)

    def uniqueness_regime(self, medium: BackgroundMedium) -> bool:
        """Re(t^T eta t) > 0 for all unit t and cells, i.e. Hermitian part of Re(eta) positive definite."""
        eta = self.eta_r * medium.eta_b
        re = 0.5 * (eta.real + np.swapaxes(eta.real, 1, 2))
        return bool(np.all(np.linalg.eigvalsh(re) > 0))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``lo <= x < hi`` (metres) with its constitutive data.

    ``sigma`` and ``eps`` are scalars or 3x3 tensors; ``eps`` is absolute (F/m).
    """

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    sigma: object = 0.0
    eps: object = EPS0


@dataclass(frozen=True)
class ScattererSpec:
    """Boxes are painted in order; later boxes overwrite earlier ones where they overlap."""

    grid: Grid
    background: BackgroundMedium
    boxes: Sequence[Box] = ()


def _as_tensor(value) -> np.ndarray:
    a = np.asarray(value, dtype=complex)
    if a.ndim == 0:
        return a * _EYE3
    if a.shape == (3,):
        return np.diag(a)
    if a.shape == (3, 3):
        return a
    raise DomainError(f"constitutive value must be scalar, 3-vector or 3x3, got shape {a.shape}")


def rasterize(spec: ScattererSpec) -> ContrastField:
    grid, medium = spec.grid, spec.background
    centers = grid.centers()
    g_lo, g_hi = grid.extent
    tol = 1e-9 * grid.h
    eta_r = np.broadcast_to(_EYE3, (grid.n_cells, 3, 3)).astype(complex)
    for n, box in enumerate(spec.boxes):
        lo = np.asarray(box.lo, dtype=float)
        hi = np.asarray(box.hi, dtype=float)
        if np.any(hi <= lo):
            raise GeometryError(f"box {n} is empty or inverted: lo={box.lo}, hi={box.hi}")
        if np.any(lo < g_lo - tol) or np.any(hi > g_hi + tol):
            raise GeometryError(f"box {n} extends outside the grid {g_lo}..{g_hi}")
        inside = np.all((centers >= lo) & (centers < hi), axis=1)
        eta = admittance(_as_tensor(box.sigma), _as_tensor(box.eps), medium.omega)
        eta_r[inside] = eta / medium.eta_b
    return ContrastField(grid, eta_r)
