"""Admissible regions for the discrete eigenvalues.

An eigenvalue ``lam != 1`` of the continuous operator, with its eigenfield
living where the contrast is nonzero, must violate the uniqueness condition
for the modified contrast ``(eta - lam*eta_b)/(1 - lam)`` in some cell.  That
gives, per cell, the bilinear inequality

    Re eta - (Re eta + Re eta_b) Re lam - (Im eta - Im eta_b) Im lam
        + Re eta_b |lam|^2 <= 0

and the admissible set is the union of these per-cell sets.  With a lossy
background each set is a disk; with a lossless one it is a half-plane whose
boundary passes through 1 and ``eta/eta_b``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import DomainError, RegimeError, UndefinedCaseError
from .media import BackgroundMedium, ContrastField

__all__ = [
    "GENERAL",
    "WEDGE",
    "CIRCLE",
    "BoundRegion",
    "general_bound_value",
    "general_bound_holds",
    "general_region",
    "wedge_region",
    "circle_region",
    "bound_region",
    "spectral_radius_bound",
]

GENERAL = "general"
WEDGE = "wedge"
CIRCLE = "circle"

# relative slack on the bilinear form so that boundary points such as
# lam = eta/eta_b are not rejected by rounding
_BOUNDARY_RTOL = 1e-12


def general_bound_value(lam, eta, medium: BackgroundMedium) -> np.ndarray:
    """Left-hand side of the per-cell inequality; broadcasts ``lam`` against ``eta``."""
    lam = np.asarray(lam, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    eb = medium.eta_b
    return (
        eta.real
        - (eta.real + eb.real) * lam.real
        - (eta.imag - eb.imag) * lam.imag
        + eb.real * np.abs(lam) ** 2
    )


def _scale(lam, eta, medium) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    return (np.abs(eta) + abs(medium.eta_b)) * (1.0 + np.abs(lam)) ** 2


def general_bound_holds(lam: complex, eta_at_x: complex, medium: BackgroundMedium) -> bool:
    """Whether ``lam`` is admissible for a cell of admittance ``eta_at_x`` (non-strict)."""
    lam = complex(lam)
    if lam == 1.0:
        raise UndefinedCaseError("lambda = 1 belongs to the essential spectrum; the bound is undefined there")
    v = general_bound_value(lam, eta_at_x, medium)
    return bool(v <= _BOUNDARY_RTOL * _scale(lam, eta_at_x, medium))


@dataclass(frozen=True, eq=False)
class BoundRegion:
    """Union over scatterer cells of the per-cell admissible sets.

    Cells sharing an admittance give the same set, so only distinct values
    are stored.  ``eta_r`` holds the ratios ``eta/eta_b`` and ``eta`` the
    absolute admittances.  For ``kind == "circle"`` the per-cell disks have
    ``centers`` and ``diameters``; otherwise each set is a closed half-plane
    ``{lam : Re(conj(normals) * (lam - 1)) <= 0}`` (a full plane where the
    normal vanishes).
    """

    kind: str
    medium: BackgroundMedium
    eta_r: np.ndarray
    markers: dict = field(default_factory=dict)
    centers: Optional[np.ndarray] = None
    diameters: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None

    @property
    def eta(self) -> np.ndarray:
        return self.eta_r * self.medium.eta_b

    @property
    def is_disk_union(self) -> bool:
        return self.centers is not None

    def values(self, lam) -> np.ndarray:
        """Bilinear form per (lam, cell), shape ``lam.shape + (n_cells,)``."""
        lam = np.asarray(lam, dtype=complex)[..., None]
        return general_bound_value(lam, self.eta, self.medium)

    def signed_distance(self, lam) -> np.ndarray:
        """Euclidean signed distance to the union: negative inside, positive outside."""
        lam = np.asarray(lam, dtype=complex)[..., None]
        if self.is_disk_union:
            d = np.abs(lam - self.centers) - 0.5 * self.diameters
        else:
            nrm = np.abs(self.normals)
            safe = np.where(nrm > 0, nrm, 1.0)
            d = np.where(nrm > 0, (np.conj(self.normals) * (lam - 1.0)).real / safe, -np.inf)
        if d.shape[-1] == 0:
            return np.full(lam.shape[:-1], np.inf)
        return d.min(axis=-1)

    def contains(self, lam, slack: float = 0.0, inflation: float = 0.0) -> np.ndarray:
        """Membership with an absolute ``slack`` and, for disks, a relative diameter ``inflation``."""
        lam = np.asarray(lam, dtype=complex)
        if self.is_disk_union:
            r = 0.5 * self.diameters * (1.0 + inflation)
            d = np.abs(lam[..., None] - self.centers) - r
            if d.shape[-1] == 0:
                return np.zeros(lam.shape, dtype=bool)
            return d.min(axis=-1) <= slack + 1e-12 * (1.0 + np.abs(lam))
        return self.signed_distance(lam) <= slack + 1e-12 * (1.0 + np.abs(lam))

    def distance_to_origin(self) -> float:
        return float(max(0.0, self.signed_distance(0.0)))

    def primitives(self) -> list[dict]:
        """Drawing primitives: ``circle`` (cx, cy, r) or ``halfplane`` (through 1 and ``eta_r``)."""
        out = []
        for i, er in enumerate(self.eta_r):
            if self.is_disk_union:
                c = self.centers[i]
                out.append({"type": "circle", "cx": c.real, "cy": c.imag, "r": 0.5 * self.diameters[i]})
            else:
                n = self.normals[i]
                if n == 0:
                    continue
                # boundary direction: the normal rotated by 90 degrees
                out.append({"type": "halfplane", "px": 1.0, "py": 0.0, "dx": -n.imag, "dy": n.real,
                            "nx": n.real, "ny": n.imag})
        return out

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kind", "index", "eta_r_re", "eta_r_im", "cx", "cy", "radius", "nx", "ny"])
            for i, er in enumerate(self.eta_r):
                row = [self.kind, i, f"{er.real:.17g}", f"{er.imag:.17g}"]
                if self.is_disk_union:
                    c = self.centers[i]
                    row += [f"{c.real:.17g}", f"{c.imag:.17g}", f"{0.5 * self.diameters[i]:.17g}", "", ""]
                else:
                    n = self.normals[i]
                    row += ["", "", "", f"{n.real:.17g}", f"{n.imag:.17g}"]
                w.writerow(row)
        return path


def _scatterer_eta(field: ContrastField, medium: BackgroundMedium) -> np.ndarray:
    if not field.isotropic:
        raise RegimeError("eigenvalue bounds are available for isotropic media only")
    eta_r = field.scalar_eta_r[field.scatterer_mask]
    if eta_r.size == 0:
        raise RegimeError("no scatterer: the contrast vanishes everywhere")
    return np.unique(eta_r)


def _geometry(eta_r: np.ndarray, medium: BackgroundMedium):
    """Disk parameters for a lossy background, half-plane normals otherwise."""
    eb = medium.eta_b
    eta = eta_r * eb
    if eb.real > 0:
        # divide the form by Re eta_b and complete the square
        a = eta.real / eb.real + 1.0
        b = (eb.imag - eta.imag) / eb.real
        centers = 0.5 * a - 0.5j * b
        diam = np.hypot(eta.real / eb.real - 1.0, b)
        return centers, diam, None
    # linear form -Re eta * (x - 1) - (Im eta - Im eta_b) * y
    normals = -eta.real - 1j * (eta.imag - eb.imag)
    return None, None, normals


def _clean(z) -> complex:
    # drop negative zeros so exported markers read naturally
    z = complex(z)
    return complex(z.real + 0.0, z.imag + 0.0)


def general_region(field: ContrastField, medium: BackgroundMedium) -> BoundRegion:
    eta_r = _scatterer_eta(field, medium)
    centers, diam, normals = _geometry(eta_r, medium)
    return BoundRegion(GENERAL, medium, eta_r, {}, centers, diam, normals)


def wedge_region(field: ContrastField, medium: BackgroundMedium) -> BoundRegion:
    """Lossless background, nonnegative conductivity and permittivity above the background.

    Each cell contributes the half-plane
    ``sigma - sigma Re lam + omega (eps - eps_b) Im lam <= 0``; markers are
    ``M`` (the value ``eta/eta_b`` per distinct cell), ``N = -i sigma/(omega (eps - eps_b))``
    for a homogeneous scatterer, and ``N1``/``N2`` from the largest and
    smallest ratio otherwise.
    """
    if medium.sigma_b != 0:
        raise RegimeError("wedge bound needs a lossless background (sigma_b = 0); use the circle or general bound")
    eta_r = _scatterer_eta(field, medium)
    # with eta_b = -i omega eps_b: sigma = omega eps_b Im eta_r, eps = eps_b Re eta_r
    if np.any(eta_r.imag < 0):
        raise RegimeError("wedge bound needs nonnegative conductivity; use the general bound")
    if np.any(eta_r.real <= 1.0):
        raise RegimeError("wedge bound needs permittivity above the background; use the general bound")
    _, _, normals = _geometry(eta_r, medium)
    ratio = eta_r.imag / (eta_r.real - 1.0)
    markers = {f"M{i + 1}" if len(eta_r) > 1 else "M": _clean(er) for i, er in enumerate(eta_r)}
    if len(eta_r) == 1:
        markers["N"] = _clean(-1j * ratio[0])
    else:
        markers["N1"] = _clean(-1j * ratio.max())
        markers["N2"] = _clean(-1j * ratio.min())
    return BoundRegion(WEDGE, medium, eta_r, markers, None, None, normals)


def circle_region(field: ContrastField, medium: BackgroundMedium) -> BoundRegion:
    """Lossy background: per-cell disks centred at ``A/2 - iB/2`` with diameter ``D``.

    ``A = sigma/sigma_b + 1``, ``B = omega (eps - eps_b)/sigma_b`` and
    ``D^2 = (sigma/sigma_b - 1)^2 + B^2``.  The marker ``M2 = eta/eta_b`` is
    reported for cells with the background permittivity and no conductivity.
    """
    if not medium.sigma_b > 0:
        raise RegimeError("circle bound needs a conducting background (sigma_b > 0)")
    eta_r = _scatterer_eta(field, medium)
    centers, diam, _ = _geometry(eta_r, medium)
    markers = {}
    eta = eta_r * medium.eta_b
    eps = -eta.imag / medium.omega
    for i, (s, e) in enumerate(zip(eta.real, eps)):
        if abs(s) <= 1e-12 * abs(eta[i]) and np.isclose(e, medium.eps_b, rtol=1e-12, atol=0.0):
            markers["M2"] = _clean(eta_r[i])
    return BoundRegion(CIRCLE, medium, eta_r, markers, centers, diam, None)


def bound_region(field: ContrastField, medium: BackgroundMedium, kind: str = "auto") -> Optional[BoundRegion]:
    """Region of the requested kind; ``auto`` picks circle, wedge or general by regime.

    Returns None for ``auto`` when there is no scatterer.
    """
    if kind == "auto":
        if not field.scatterer_mask.any() or not field.isotropic:
            return None
        if medium.sigma_b > 0:
            return circle_region(field, medium)
        try:
            return wedge_region(field, medium)
        except RegimeError:
            return general_region(field, medium)
    builders = {CIRCLE: circle_region, WEDGE: wedge_region, GENERAL: general_region}
    if kind not in builders:
        raise DomainError(f"unknown bound kind {kind!r}")
    return builders[kind](field, medium)


def spectral_radius_bound(op, *, tol: float = 1e-12, seed: int = 0) -> float:
    """Upper bound on every ``|lam|`` from the induced 2-norm of the operator.

    The largest eigenvalue of ``A^H A`` is found by Lanczos (ARPACK) through
    ``matvec``/``rmatvec`` only; the norm is enlarged by ``1e-7`` relative to
    cover the remaining iteration error.
    """
    n = op.shape[0]
    gram = LinearOperator((n, n), matvec=lambda v: op.rmatvec(op.matvec(v)), dtype=complex)
    if n <= 3:
        dense = np.column_stack([gram.matvec(e) for e in np.eye(n, dtype=complex)])
        top = float(np.linalg.eigvalsh(0.5 * (dense + dense.conj().T)).max())
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        top = float(eigsh(gram, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)[0])
    return float(np.sqrt(max(top, 0.0)) * (1.0 + 1e-7))
