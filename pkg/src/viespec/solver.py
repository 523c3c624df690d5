"""Stationary Richardson iteration with a relaxation parameter read off the spectrum.

If every eigenvalue lies in a disk ``|lam - c| <= rho`` with ``rho < |c|``,
the iteration ``u <- u + tau (v - A u)`` with ``tau = 1/c`` contracts the
error asymptotically by ``rho/|c|`` per step (for normal ``A``, exactly so).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .bounds import BoundRegion
from .errors import DivergenceError, DomainError, InfeasiblePlanError
from .symbol import EssentialSpectrumSample

__all__ = [
    "Disk",
    "RelaxationPlan",
    "IterationTrace",
    "minimal_enclosing_disk",
    "region_hull_points",
    "plan_relaxation",
    "solve_relaxed",
]


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def contains(self, z, rtol: float = 1e-12) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.abs(z - self.center) <= self.radius * (1 + rtol) + rtol


def _disk2(a: complex, b: complex) -> Disk:
    c = 0.5 * (a + b)
    return Disk(c, abs(a - c))


def _disk3(a: complex, b: complex, c: complex) -> Disk:
    # circumcircle; collinear triples fall back to the widest pair
    bx, by = (b - a).real, (b - a).imag
    cx, cy = (c - a).real, (c - a).imag
    d = 2.0 * (bx * cy - by * cx)
    if abs(d) <= 1e-14 * max(abs(b - a), abs(c - a)) ** 2:
        pairs = [(a, b), (a, c), (b, c)]
        return _disk2(*max(pairs, key=lambda p: abs(p[0] - p[1])))
    ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d
    uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d
    centre = a + complex(ux, uy)
    return Disk(centre, max(abs(centre - a), abs(centre - b), abs(centre - c)))


def minimal_enclosing_disk(points) -> Disk:
    """Smallest disk containing every point (Welzl's move-to-front, iterative form).

    Points are deduplicated and processed in a fixed pseudo-random order, so
    the result is deterministic.
    """
    pts = np.unique(np.asarray(points, dtype=complex).ravel())
    if pts.size == 0:
        raise DomainError("cannot enclose an empty point set")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must be finite")
    pts = pts[np.random.default_rng(12345).permutation(len(pts))]
    disk = Disk(complex(pts[0]), 0.0)
    for i in range(1, len(pts)):
        p = complex(pts[i])
        if disk.contains(p):
            continue
        disk = Disk(p, 0.0)
        for j in range(i):
            q = complex(pts[j])
            if disk.contains(q):
                continue
            disk = _disk2(p, q)
            for k in range(j):
                s = complex(pts[k])
                if not disk.contains(s):
                    disk = _disk3(p, q, s)
    return disk


def region_hull_points(region: BoundRegion, n_polygon: int = 64, spectral_radius: Optional[float] = None) -> np.ndarray:
    """Points whose convex hull covers ``region``.

    Disks are replaced by circumscribed regular polygons.  Half-planes are
    unbounded, so they are clipped to ``|lam| <= spectral_radius`` and the
    circumscribed polygon of that disk is intersected coarsely by keeping the
    vertices on the admissible side plus the two boundary crossings.
    """
    if n_polygon < 3:
        raise DomainError("polygon needs at least 3 vertices")
    ang = 2.0 * np.pi * np.arange(n_polygon) / n_polygon
    scale = 1.0 / np.cos(np.pi / n_polygon)
    unit = np.exp(1j * ang) * scale
    if region.is_disk_union:
        return (region.centers[:, None] + 0.5 * region.diameters[:, None] * unit[None, :]).ravel()
    if spectral_radius is None:
        raise DomainError("half-plane regions are unbounded; a spectral radius is required to clip them")
    poly = spectral_radius * unit
    out = [poly[region.contains(poly)]]
    for n in region.normals:
        if n == 0:
            continue
        # boundary line through 1 with direction i*n; crossings with |lam| = R * scale
        d = 1j * n / abs(n)
        big = spectral_radius * scale
        b = (np.conj(d) * 1.0).real
        disc = b * b - (1.0 - big * big)
        if disc >= 0:
            for t in (-b - np.sqrt(disc), -b + np.sqrt(disc)):
                out.append(np.array([1.0 + t * d]))
    return np.concatenate(out) if out else np.zeros(0, dtype=complex)


@dataclass(frozen=True)
class RelaxationPlan:
    tau: complex
    center: complex
    radius: float
    predicted_rate: float
    max_iters: int = 1000
    tol: float = 1e-8

    @property
    def enclosing_disk(self) -> Disk:
        return Disk(self.center, self.radius)


def plan_relaxation(
    essential: Optional[EssentialSpectrumSample] = None,
    regions: Sequence[BoundRegion] = (),
    *,
    extra_points: Iterable[complex] = (),
    spectral_radius: Optional[float] = None,
    n_polygon: int = 64,
    max_iters: int = 1000,
    tol: float = 1e-8,
) -> RelaxationPlan:
    """Minimal disk around the essential sample, bound regions and any extra points.

    The essential chords are convex hulls of their endpoints, so the
    endpoints suffice.  Raises InfeasiblePlanError when the disk reaches 0.
    """
    parts = [np.asarray(list(extra_points), dtype=complex)]
    if essential is not None:
        parts.append(np.asarray(essential.points, dtype=complex))
    for region in regions:
        parts.append(region_hull_points(region, n_polygon, spectral_radius))
    pts = np.concatenate(parts)
    if pts.size == 0:
        raise DomainError("no spectral information to plan from")
    disk = minimal_enclosing_disk(pts)
    c, rho = disk.center, disk.radius
    if abs(c) <= rho * (1 + 1e-12):
        raise InfeasiblePlanError(
            f"no disk excluding 0 covers the spectrum: minimal disk centre {c:.6g}, radius {rho:.6g}"
        )
    return RelaxationPlan(tau=1.0 / c, center=c, radius=rho, predicted_rate=rho / abs(c),
                          max_iters=max_iters, tol=tol)


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Relative residual ``|v - A u_j| / |v|`` for ``j = 0, 1, ...``."""

    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def iterations(self) -> int:
        return len(self.residuals) - 1

    def observed_rate(self, window: int = 10) -> float:
        """Geometric mean residual ratio over the last ``window`` steps."""
        r = self.residuals
        r = r[r > 0]
        if len(r) < 2:
            return 0.0
        w = min(window, len(r) - 1)
        return float((r[-1] / r[-1 - w]) ** (1.0 / w))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "residual"])
            for j, r in enumerate(self.residuals):
                w.writerow([j, f"{r:.17g}"])
        return path


def solve_relaxed(op, rhs, plan: RelaxationPlan, x0=None, *, divergence_window: int = 20,
                  divergence_factor: float = 10.0):
    """Iterate ``u <- u + tau (rhs - A u)`` until the relative residual reaches ``plan.tol``.

    Returns ``(u, trace)``.  Raises DivergenceError if the residual grows by
    ``divergence_factor`` within ``divergence_window`` iterations.
    """
    matvec = op.matvec if hasattr(op, "matvec") else (lambda x: op @ x)
    v = np.asarray(rhs, dtype=complex)
    nv = np.linalg.norm(v)
    u = np.zeros_like(v) if x0 is None else np.array(x0, dtype=complex)
    if nv == 0:
        return np.zeros_like(v), IterationTrace(np.zeros(1))
    r = v - matvec(u)
    hist = [np.linalg.norm(r) / nv]
    for _ in range(plan.max_iters):
        if hist[-1] <= plan.tol:
            break
        u = u + plan.tau * r
        r = v - matvec(u)
        hist.append(np.linalg.norm(r) / nv)
        lo = max(0, len(hist) - 1 - divergence_window)
        if hist[-1] > divergence_factor * min(hist[lo:]):
            raise DivergenceError(
                f"residual grew from {min(hist[lo:]):.3g} to {hist[-1]:.3g} within {divergence_window} iterations",
                trace=IterationTrace(np.array(hist)),
            )
    return u, IterationTrace(np.array(hist))
