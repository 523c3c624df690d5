"""Symbol calculus for the electric volume integral operator.

The operator is ``d(I + chi/3) + S d(chi) + K`` where ``S`` is the principal
value convolution with ``-g0`` and ``K`` is compact.  The Fourier image of
the ``g0`` convolution is ``F = I/3 - Q`` (Q the projector on the wave
direction), so the singular part contributes ``-F = Q - I/3`` and the
symbol collapses to ``I + Q chi``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DomainError, NearSingularSymbolError
from .media import BackgroundMedium, ContrastField

__all__ = [
    "SymbolMatrix",
    "EssentialSpectrumSample",
    "FourierOracleResult",
    "fourier_symbol_F",
    "singular_part_symbol",
    "numeric_fourier_oracle",
    "combined_symbol",
    "product_symbol",
    "symbol_phi",
    "symbol_phi_inverse",
    "regularizer_contrast",
    "regularizer_symbol",
    "essential_spectrum",
    "fibonacci_sphere",
]

_EYE3 = np.eye(3)
NEAR_SINGULAR_RTOL = 1e-8


def _unit(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.shape != (3,):
        raise DomainError(f"direction must be a 3-vector, got shape {t.shape}")
    n = np.linalg.norm(t)
    if n == 0:
        raise DomainError("direction must be nonzero")
    return t / n


def _as_tensor(eta_r) -> np.ndarray:
    a = np.asarray(eta_r, dtype=complex)
    if a.ndim == 0:
        return a * _EYE3
    if a.shape != (3, 3):
        raise DomainError(f"expected scalar or 3x3, got shape {a.shape}")
    return a


def fourier_symbol_F(theta) -> np.ndarray:
    t = _unit(theta)
    return _EYE3 / 3.0 - np.outer(t, t)


def singular_part_symbol(theta) -> np.ndarray:
    """Fourier image of the singular operator as it enters the scattering operator."""
    return -fourier_symbol_F(theta)


def combined_symbol(a, b, theta) -> np.ndarray:
    """Symbol of ``d(a) + S d(b)``: the 3x3 matrix ``a + (Q - I/3) b``."""
    return _as_tensor(a) + singular_part_symbol(theta) @ _as_tensor(b)


def product_symbol(a1, b1, a2, b2, theta) -> np.ndarray:
    """Symbol of the composition of two combined operators, expanded term by term."""
    s = singular_part_symbol(theta)
    a1, b1, a2, b2 = map(_as_tensor, (a1, b1, a2, b2))
    return a1 @ a2 + a1 @ s @ b2 + s @ b1 @ a2 + s @ b1 @ s @ b2


@dataclass(frozen=True, eq=False)
class SymbolMatrix:
    """``value`` has shape (3, 3), or (..., 3, 3) when evaluated on a batch."""

    value: np.ndarray
    theta: np.ndarray
    x_index: Optional[int] = None

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.value)


def _units(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.ndim == 0 or t.shape[-1] != 3:
        raise DomainError(f"direction must be a 3-vector (or a stack of them), got shape {t.shape}")
    n = np.linalg.norm(t, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise DomainError("direction must be nonzero")
    return t / n


def _tensors(eta_r) -> np.ndarray:
    a = np.asarray(eta_r, dtype=complex)
    if a.ndim == 0:
        return a * _EYE3
    if a.shape[-2:] != (3, 3):
        raise DomainError(f"expected scalar or 3x3 (or a stack of 3x3), got shape {a.shape}")
    return a


def symbol_phi(eta_r_at_x, theta, x_index: Optional[int] = None) -> SymbolMatrix:
    """``I + Q chi = I - Q + Q eta_r``; broadcasts over leading axes of both arguments."""
    t = _units(theta)
    q = t[..., :, None] * t[..., None, :]
    value = _EYE3 - q + q @ _tensors(eta_r_at_x)
    return SymbolMatrix(value, t, x_index)


def symbol_phi_inverse(eta_r_at_x, theta, x_index: Optional[int] = None) -> SymbolMatrix:
    """Closed-form inverse ``I + (Q - Q eta_r)/xi`` with ``xi = t^T eta_r t``."""
    t = _units(theta)
    eta_r = _tensors(eta_r_at_x)
    xi = np.einsum("...i,...ij,...j->...", t, eta_r, t)
    scale = np.linalg.norm(eta_r, 2, axis=(-2, -1))
    bad = np.abs(xi) < NEAR_SINGULAR_RTOL * scale
    if np.any(bad):
        worst = complex(np.asarray(xi)[bad].flat[0]) if np.ndim(xi) else complex(xi)
        raise NearSingularSymbolError(
            f"symbol is nearly singular (xi={worst:.3e}); the essential spectrum passes near 0"
        )
    q = t[..., :, None] * t[..., None, :]
    value = _EYE3 + (q - q @ eta_r) / np.asarray(xi)[..., None, None]
    return SymbolMatrix(value, t, x_index)


def regularizer_contrast(eta_at_x: complex, medium: BackgroundMedium) -> complex:
    eta = complex(eta_at_x)
    if eta == 0:
        raise DomainError("admittance must be nonzero")
    return medium.eta_b / eta - 1.0


def regularizer_symbol(chi_prime: complex, theta) -> np.ndarray:
    """Symbol of the isotropic regularizer ``d(I + chi'/3) + S d(chi')``."""
    return combined_symbol(1.0 + chi_prime / 3.0, chi_prime, theta)


# -- numerical Fourier transform of the static kernel -------------------------------


@dataclass(frozen=True, eq=False)
class FourierOracleResult:
    resolution: int
    directions: np.ndarray  # (M, 3) unit vectors
    wavenumbers: np.ndarray  # (M, 2) |k| in units of the auxiliary grid step
    numeric: np.ndarray  # (M, 2, 3, 3) at |k| and 2|k|
    analytic: np.ndarray  # (M, 3, 3)
    accurate: bool

    @property
    def max_error(self) -> float:
        if len(self.directions) == 0:
            return math.inf
        return float(np.abs(self.numeric - self.analytic[:, None]).max())

    @property
    def magnitude_spread(self) -> float:
        if len(self.directions) == 0:
            return math.inf
        return float(np.abs(self.numeric[:, 1] - self.numeric[:, 0]).max())


def numeric_fourier_oracle(
    resolution: int = 160,
    *,
    window_fraction: float = 1.0 / 3.0,
    min_kl: float = 8.0,
    max_kh: float = 0.4,
    max_samples: int = 64,
) -> FourierOracleResult:
    """Fourier image of the principal-value ``g0`` convolution, computed by FFT.

    ``g0`` is sampled on a ``resolution**3`` lattice with unit spacing, the
    singular origin excluded (the lattice sum of the angular factor over a
    cubic shell vanishes, which is the discrete principal value).  A flat-top
    window ``exp(-(r/L)^8)`` with ``L = window_fraction*resolution`` truncates
    the tail; its transfer function differs from one by ``O((kL)^-8)``.
    Directions are taken from lattice wave vectors ``m`` whose magnitude
    satisfies ``|k| L >= min_kl`` and ``2|k| <= max_kh``, and every direction
    is sampled at ``|k|`` and ``2|k|``.
    """
    n = int(resolution)
    if n < 16:
        raise DomainError(f"resolution must be at least 16, got {n}")
    if n % 2:
        n += 1
    x = np.arange(n, dtype=float) - n // 2
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
    r2 = X * X + Y * Y + Z * Z
    c = n // 2
    r2[c, c, c] = 1.0
    L = window_fraction * n
    base = np.exp(-((r2 / (L * L)) ** 4)) / (4.0 * np.pi * r2**2.5)
    base[c, c, c] = 0.0

    dk = 2.0 * np.pi / n
    mmax = int(max_kh / 2.0 / dk) + 1
    picks = []
    seen = set()
    rng = range(-mmax, mmax + 1)
    for m in sorted(
        ((i, j, k) for i in rng for j in rng for k in rng),
        key=lambda m: (m[0] ** 2 + m[1] ** 2 + m[2] ** 2, m),
    ):
        if m == (0, 0, 0):
            continue
        kn = dk * math.sqrt(m[0] ** 2 + m[1] ** 2 + m[2] ** 2)
        if kn * L < min_kl or 2.0 * kn > max_kh:
            continue
        g = math.gcd(math.gcd(abs(m[0]), abs(m[1])), abs(m[2]))
        prim = tuple(v // g for v in m)
        if prim in seen or tuple(-v for v in prim) in seen:
            continue
        seen.add(prim)
        picks.append(m)
        if len(picks) >= max_samples:
            break

    mvec = np.array(picks, dtype=int).reshape(-1, 3)
    numeric = np.zeros((len(mvec), 2, 3, 3), dtype=complex)
    coords = (X, Y, Z)
    for i in range(3):
        for j in range(i, 3):
            g = base * (3.0 * coords[i] * coords[j] - (r2 if i == j else 0.0))
            g[c, c, c] = 0.0
            spec = np.fft.fftn(np.fft.ifftshift(g))
            for s, mult in enumerate((1, 2)):
                idx = (mult * mvec) % n
                vals = spec[idx[:, 0], idx[:, 1], idx[:, 2]]
                numeric[:, s, i, j] = vals
                numeric[:, s, j, i] = vals
            del spec, g

    directions = mvec / np.linalg.norm(mvec, axis=1, keepdims=True) if len(mvec) else np.zeros((0, 3))
    analytic = np.array([fourier_symbol_F(d) for d in directions]).reshape(-1, 3, 3)
    kn = dk * np.linalg.norm(mvec, axis=1) if len(mvec) else np.zeros(0)
    wavenumbers = np.stack([kn, 2.0 * kn], axis=1) if len(mvec) else np.zeros((0, 2))
    accurate = n >= 128 and len(mvec) > 0
    return FourierOracleResult(n, directions, wavenumbers, numeric, analytic, accurate)


# -- essential spectrum ---------------------------------------------------------------


def fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform unit vectors on the sphere (golden-angle spiral)."""
    i = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - math.sqrt(5.0)) * np.arange(n)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@dataclass(frozen=True, eq=False)
class EssentialSpectrumSample:
    """Sampled essential spectrum: ``1`` plus ``t^T eta_r t`` over cells and directions.

    ``cell_index`` is -1 for the unit point; ``thetas`` rows are NaN where the
    value is exact (isotropic cells, where the direction does not matter).
    """

    points: np.ndarray
    cell_index: np.ndarray
    thetas: np.ndarray
    sphere_resolution: int
    includes_unit: bool = True

    @property
    def segment_endpoints(self) -> np.ndarray:
        """Distinct far ends of the chords from 1 that make up the accumulation set."""
        pts = self.points[self.points != 1.0]
        return np.unique(pts)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "cell", "theta_x", "theta_y", "theta_z"])
            for p, c, t in zip(self.points, self.cell_index, self.thetas):
                tt = ["" if np.isnan(v) else f"{v:.17g}" for v in t]
                w.writerow([f"{p.real:.17g}", f"{p.imag:.17g}", int(c), *tt])
        return path


def essential_spectrum(field: ContrastField, sphere_resolution: int = 16) -> EssentialSpectrumSample:
    """Sample ``{1} U {t^T eta_r(x) t}``.

    Isotropic cells contribute their ``eta_r`` exactly.  Anisotropic cells are
    sampled at ``sphere_resolution**2`` Fibonacci directions.
    """
    if sphere_resolution < 8:
        raise DomainError(f"sphere_resolution must be at least 8, got {sphere_resolution}")
    points = [np.array([1.0 + 0j])]
    cells = [np.array([-1])]
    thetas = [np.full((1, 3), np.nan)]

    eta_r = field.eta_r
    mask = field.scatterer_mask
    dirs = None
    for tensor in field.distinct_eta_r():
        first = int(np.flatnonzero(mask & np.all(eta_r == tensor, axis=(1, 2)))[0])
        if np.all(tensor == tensor[0, 0] * _EYE3):
            points.append(np.array([tensor[0, 0]]))
            cells.append(np.array([first]))
            thetas.append(np.full((1, 3), np.nan))
            continue
        if dirs is None:
            dirs = fibonacci_sphere(sphere_resolution**2)
        vals = np.einsum("pi,ij,pj->p", dirs, tensor, dirs)
        points.append(vals)
        cells.append(np.full(len(vals), first))
        thetas.append(dirs)
    return EssentialSpectrumSample(
        points=np.concatenate(points),
        cell_index=np.concatenate(cells),
        thetas=np.concatenate(thetas),
        sphere_resolution=int(sphere_resolution),
    )
