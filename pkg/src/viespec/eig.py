"""Eigenvalues of the discretized operator and their classification.

``eig_dense`` runs a Householder Hessenberg reduction followed by a
single-shift complex QR iteration with Wilkinson shifts.  ``eig_arnoldi``
works matrix-free for grids beyond the dense cap.  ``classify`` tags every
eigenvalue by its distance to the chords joining 1 to the sampled
essential-spectrum points.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from . import _qr
from .errors import ConvergenceError, DimensionError, DomainError
from .symbol import EssentialSpectrumSample

__all__ = [
    "ESSENTIAL",
    "DISCRETE",
    "UNCLASSIFIED",
    "DEFAULT_CLASSIFY_TOL",
    "SpectrumResult",
    "eig_dense",
    "eig_arnoldi",
    "classify",
    "segment_distance",
]

log = logging.getLogger(__name__)

ESSENTIAL = "essential-cluster"
DISCRETE = "discrete"
UNCLASSIFIED = "unclassified"
DEFAULT_CLASSIFY_TOL = 0.05
QR_MAX_DIM = 1000


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    classification: np.ndarray
    segment_set: Optional[EssentialSpectrumSample] = None
    distances: Optional[np.ndarray] = None
    method: str = ""
    converged: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.eigenvalues)

    def tagged(self, tag: str) -> np.ndarray:
        return self.eigenvalues[self.classification == tag]

    @property
    def cluster_fraction(self) -> float:
        if len(self) == 0:
            return float("nan")
        return float(np.mean(self.classification == ESSENTIAL))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "residual", "tag"])
            for lam, res, tag in zip(self.eigenvalues, self.residuals, self.classification):
                w.writerow([f"{lam.real:.17g}", f"{lam.imag:.17g}", f"{res:.17g}", tag])
        return path

    @classmethod
    def from_csv(cls, path) -> "SpectrumResult":
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        lam = np.array([complex(float(r["re"]), float(r["im"])) for r in rows], dtype=complex)
        res = np.array([float(r["residual"]) for r in rows])
        tags = np.array([r["tag"] for r in rows], dtype=object)
        return cls(lam, res, tags)


def _order(lam: np.ndarray) -> np.ndarray:
    return np.lexsort((lam.imag, lam.real))


def eig_dense(
    matrix,
    *,
    method: str = "auto",
    residuals: bool = True,
    max_iter: int = 120,
    exceptional_every: int = 30,
) -> SpectrumResult:
    """All eigenvalues of a square complex matrix, sorted by (Re, Im).

    ``method="qr"`` uses the compiled Hessenberg/QR path; ``"lapack"`` calls
    numpy's geev wrapper; ``"auto"`` picks QR up to ``QR_MAX_DIM`` rows.
    Residuals are ``|H v - lam v|`` for unit inverse-iteration vectors of
    the Hessenberg form (QR path) or ``|A v - lam v|`` (LAPACK path).
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if method == "auto":
        method = "qr" if n <= QR_MAX_DIM else "lapack"
    if n == 0:
        empty = np.zeros(0, dtype=complex)
        return SpectrumResult(empty, np.zeros(0), np.zeros(0, dtype=object), method=method)

    if method == "lapack":
        if residuals:
            lam, vecs = np.linalg.eig(a)
            res = np.linalg.norm(a @ vecs - vecs * lam, axis=0)
        else:
            lam = np.linalg.eigvals(a)
            res = np.full(n, np.nan)
    elif method == "qr":
        h = _qr.hessenberg(np.ascontiguousarray(a))
        work = h.copy()
        lam, status, _ = _qr.shifted_qr(work, exceptional_every, max_iter)
        if status >= 0:
            done = lam[status + 1 :]
            raise ConvergenceError(
                f"QR iteration stalled at row {status}; {len(done)} of {n} eigenvalues converged",
                partial=done.copy(),
            )
        if residuals:
            _, res = _qr.inverse_iteration(h, lam, 2)
        else:
            res = np.full(n, np.nan)
    else:
        raise DomainError(f"unknown method {method!r}")

    idx = _order(lam)
    tags = np.full(n, UNCLASSIFIED, dtype=object)
    return SpectrumResult(lam[idx], np.asarray(res)[idx], tags, method=method)


def _as_matvec(op) -> tuple[Callable, int]:
    if hasattr(op, "matvec") and hasattr(op, "shape"):
        return op.matvec, op.shape[0]
    a = np.asarray(op)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("operator must be square")
    return (lambda u: a @ u), a.shape[0]


def _extend(matvec, V, H, f, start, m, coupling=None):
    """Grow a Krylov factorization ``A V = V H + f e^T`` from ``start`` to ``m`` columns.

    ``coupling`` is the row ``b`` of a Krylov-Schur residual ``f b^T`` left by a
    restart; it becomes row ``start`` of ``H`` once ``f`` is normalized.
    """
    for j in range(start, m):
        beta = np.linalg.norm(f)
        if beta <= 1e-13 * max(1.0, np.abs(H[:j, :j]).max(initial=0.0)):
            return j, f
        if j == start and coupling is not None:
            H[j, :j] = beta * coupling
        elif j > 0:
            H[j, j - 1] = beta
        V[:, j] = f / beta
        w = matvec(V[:, j])
        c = V[:, : j + 1].conj().T @ w
        w = w - V[:, : j + 1] @ c
        c2 = V[:, : j + 1].conj().T @ w  # second Gram-Schmidt pass
        w = w - V[:, : j + 1] @ c2
        H[: j + 1, j] = c + c2
        f = w
    return m, f


def eig_arnoldi(
    op,
    k: int,
    target: str = "largest-magnitude",
    *,
    point: complex = 0.0,
    krylov_dim: Optional[int] = None,
    tol: float = 1e-8,
    max_restarts: int = 200,
    seed: int = 0,
) -> SpectrumResult:
    """``k`` Ritz values of ``op`` by Arnoldi with Krylov-Schur restarts.

    ``target`` is ``"largest-magnitude"`` or ``"closest-to-point"`` (Ritz
    values nearest ``point``; no shift-invert, so interior targets converge
    slowly).  Residuals are the estimates ``|f| |e_m^T y|``; ``converged``
    flags those below ``tol * max(1, |theta|)``.  When the restart budget runs
    out the current Ritz values are returned with their residuals and flags.
    """
    matvec, n = _as_matvec(op)
    if not 0 < k < n:
        raise DomainError(f"need 0 < k < {n}, got k={k}")
    if target == "largest-magnitude":
        key = lambda th: -np.abs(th)  # noqa: E731
    elif target == "closest-to-point":
        key = lambda th: np.abs(th - point)  # noqa: E731
    else:
        raise DomainError(f"unknown target {target!r}")
    m = min(krylov_dim or max(2 * k + 20, 40), n - 1)
    keep = min(k + (m - k) // 2, m - 1)

    rng = np.random.default_rng(seed)
    V = np.zeros((n, m), dtype=complex)
    H = np.zeros((m, m), dtype=complex)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    size, f = _extend(matvec, V, H, f, 0, m)

    for restart in range(max_restarts + 1):
        hm = H[:size, :size]
        theta, Y = scipy.linalg.eig(hm)
        fnorm = np.linalg.norm(f) if size == m else 0.0
        resid = fnorm * np.abs(Y[-1, :]) / np.linalg.norm(Y, axis=0)
        order = np.lexsort((theta.imag, theta.real, key(theta)))
        want = order[: min(k, size)]
        conv = resid[want] <= tol * np.maximum(1.0, np.abs(theta[want]))
        if conv.all() or size < m or restart == max_restarts:
            break
        # Krylov-Schur: rotate the preferred Ritz values to the top-left and truncate
        T, U = scipy.linalg.schur(H, output="complex")
        rank = np.empty(m)
        diag = np.diag(T)
        rank[np.lexsort((diag.imag, diag.real, key(diag)))] = np.arange(m)
        select = (rank < keep).astype(int)
        T, U, _, _, _, _, info = scipy.linalg.lapack.ztrsen(select, T, U, job="N")
        if info != 0:
            raise ConvergenceError(f"Schur reordering failed (info={info})", partial=theta[want])
        coupling = U[m - 1, :keep].copy()
        V[:, :keep] = V @ U[:, :keep]
        H[:] = 0.0
        H[:keep, :keep] = np.triu(T[:keep, :keep])
        size, f = _extend(matvec, V, H, f, keep, m, coupling=coupling)
    if not conv.all():
        log.info("arnoldi: %d of %d Ritz values converged after %d restarts", conv.sum(), len(want), restart)

    tags = np.full(len(want), UNCLASSIFIED, dtype=object)
    return SpectrumResult(theta[want], resid[want], tags, method="arnoldi", converged=conv)


def segment_distance(lam, endpoints) -> np.ndarray:
    """Distance from each ``lam`` to the union of chords ``[1, p]`` over ``endpoints``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    p = np.unique(np.append(np.asarray(endpoints, dtype=complex).ravel(), 1.0 + 0j))
    out = np.full(lam.shape, np.inf)
    step = max(1, 2_000_000 // max(1, len(p)))
    d = p - 1.0
    dd = np.abs(d) ** 2
    safe = np.where(dd > 0, dd, 1.0)
    for s in range(0, len(lam), step):
        z = lam[s : s + step, None] - 1.0
        t = np.where(dd > 0, np.clip((z * np.conj(d)).real / safe, 0.0, 1.0), 0.0)
        out[s : s + step] = np.abs(z - t * d).min(axis=1)
    return out


def classify(result: SpectrumResult, essential: EssentialSpectrumSample, tol: float = DEFAULT_CLASSIFY_TOL) -> SpectrumResult:
    if not tol > 0:
        raise DomainError(f"classification tolerance must be positive, got {tol}")
    dist = segment_distance(result.eigenvalues, essential.points)
    tags = np.where(dist <= tol, ESSENTIAL, DISCRETE).astype(object)
    return replace(result, classification=tags, segment_set=essential, distances=dist)
