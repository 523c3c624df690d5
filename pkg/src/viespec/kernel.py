"""Static and dynamic parts of the electric Green's tensor.

The full kernel ``(k^2 + grad grad) exp(ikr)/(4 pi r)`` is split into the
strongly singular static tensor ``g0 = (3Q - I)/(4 pi r^3)`` and the weakly
singular remainder ``g1``.  Both functions accept separation vectors of
shape (..., 3) and return (..., 3, 3).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .media import BackgroundMedium

__all__ = [
    "KernelSample",
    "green_g0",
    "green_g1",
    "alpha_beta_gamma",
    "expm1i",
    "sample",
]

_EYE3 = np.eye(3)


def _split(dx) -> tuple[np.ndarray, np.ndarray]:
    dx = np.asarray(dx, dtype=float)
    if dx.shape[-1:] != (3,):
        raise DomainError(f"separation must have trailing dimension 3, got {dx.shape}")
    r = np.linalg.norm(dx, axis=-1)
    if np.any(r == 0):
        raise SingularityError("kernel evaluated at zero separation; use the self-cell rule")
    return r, dx / r[..., None]


def _projector(theta: np.ndarray) -> np.ndarray:
    return theta[..., :, None] * theta[..., None, :]


def expm1i(z):
    """``exp(i z) - 1`` without cancellation for small complex ``z``."""
    z = np.asarray(z, dtype=complex)
    return 2j * np.sin(0.5 * z) * np.exp(0.5j * z)


def green_g0(dx) -> np.ndarray:
    r, theta = _split(dx)
    return (3.0 * _projector(theta) - _EYE3) / (4.0 * np.pi * r[..., None, None] ** 3)


def _abg(r, k: complex):
    r = np.asarray(r, dtype=float)
    e = np.exp(1j * k * r)
    four_pi_r = 4.0 * np.pi * r
    alpha = k * k * e / four_pi_r
    beta = 1j * k * e / (four_pi_r * r)
    gamma = expm1i(k * r) / (four_pi_r * r * r)
    return alpha, beta, gamma


def alpha_beta_gamma(r, medium: BackgroundMedium):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("alpha/beta/gamma need r > 0")
    a, b, g = _abg(r, medium.k_b)
    if a.ndim == 0:
        return complex(a), complex(b), complex(g)
    return a, b, g


def green_g1(dx, medium: BackgroundMedium) -> np.ndarray:
    return _green_g1_k(dx, medium.k_b)


def _green_g1_k(dx, k: complex) -> np.ndarray:
    r, theta = _split(dx)
    a, b, g = _abg(r, k)
    cq = (-a - 3.0 * b + 3.0 * g)[..., None, None]
    ci = (a + b - g)[..., None, None]
    return cq * _projector(theta) + ci * _EYE3


@dataclass(frozen=True, eq=False)
class KernelSample:
    g0: np.ndarray
    g1: np.ndarray
    r: float
    theta: np.ndarray


def sample(dx, medium: BackgroundMedium) -> KernelSample:
    r, theta = _split(dx)
    return KernelSample(green_g0(dx), green_g1(dx, medium), float(r), theta)
