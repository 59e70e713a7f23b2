"""Biorthogonal eigendecomposition of non-Hermitian Hamiltonians."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "NearDefectiveError",
    "NHEigensystem",
    "decompose",
    "coupling_matrices",
    "write_diagnostics",
]

COND_LIMIT = 1e12
DEGENERACY_RTOL = 1e-9


class NearDefectiveError(np.linalg.LinAlgError):
    """Eigenvectors are (numerically) linearly dependent: close to an exceptional point."""

    def __init__(self, cluster, eigenvalues, condition):
        self.cluster = tuple(cluster)
        self.condition = condition
        vals = ", ".join(f"{eigenvalues[i]:.6g}" for i in self.cluster)
        super().__init__(
            f"near-defective spectrum: states {list(self.cluster)} ({vals}) "
            f"are nearly coalescent; eigenvector condition number {condition:.3e}")


@dataclass(frozen=True, eq=False)
class NHEigensystem:
    """Right eigenvectors as columns of ``right``, left eigenvectors as rows of ``left``.

    ``left @ right`` is the identity.  Eigenvalues are ``omega - i Gamma / 2``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residuals: np.ndarray
    biorthogonality_defect: float
    condition: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def energies(self) -> np.ndarray:
        return self.eigenvalues.real

    @property
    def widths(self) -> np.ndarray:
        """Loss rates Gamma_a = -2 Im(lambda_a)."""
        return -2.0 * self.eigenvalues.imag

    def completeness_error(self) -> float:
        return float(np.linalg.norm(self.right @ self.left - np.eye(self.dim)))

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ self.left

    def lossless(self) -> "NHEigensystem":
        """Same basis with the imaginary parts of the eigenvalues removed."""
        return NHEigensystem(self.eigenvalues.real.astype(complex), self.right, self.left,
                             self.residuals, self.biorthogonality_defect, self.condition)


def _clusters(vals, tol):
    groups = []
    current = [0]
    for k in range(1, vals.size):
        if abs(vals[k] - vals[current[-1]]) < tol:
            current.append(k)
        else:
            groups.append(current)
            current = [k]
    groups.append(current)
    return [g for g in groups if len(g) > 1]


def decompose(H) -> NHEigensystem:
    """Eigendecompose ``H`` with left vectors from the inverse of the right-vector matrix.

    Eigenvalues are sorted by real part, then imaginary part.  Right vectors
    have unit norm with their largest component real and positive.  Vectors
    of (near-)degenerate eigenvalues are orthonormalized within their
    cluster before inversion.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("matrix must be square")
    d = H.shape[0]
    scale = max(np.linalg.norm(H, 2), 1e-300)
    vals, R = sla.eig(H)
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    R = R[:, order]

    for cl in _clusters(vals, DEGENERACY_RTOL * scale):
        Q, _ = np.linalg.qr(R[:, cl])
        R[:, cl] = Q

    for k in range(d):
        r = R[:, k] / np.linalg.norm(R[:, k])
        m = np.argmax(np.abs(r))
        R[:, k] = r * (abs(r[m]) / r[m])

    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        gaps = np.abs(np.subtract.outer(vals, vals)) + np.eye(d) * np.inf
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise NearDefectiveError(sorted((int(i), int(j))), vals, cond)
    L = np.linalg.solve(R, np.eye(d, dtype=complex))
    # eigenvalues consistent with the (possibly rotated) vectors
    vals = np.einsum("ai,ij,ja->a", L, H, R)
    res = np.linalg.norm(H @ R - R * vals, axis=0)
    if np.any(res > 1e-10 * scale):
        bad = np.nonzero(res > 1e-10 * scale)[0]
        raise NearDefectiveError(bad.tolist(), vals, cond)
    defect = float(np.abs(L @ R - np.eye(d)).max())
    return NHEigensystem(vals, R, L, res, defect, cond)


def coupling_matrices(eig: NHEigensystem, V):
    """Coupling operator in the biorthogonal basis.

    Returns ``(Vt, Vs)`` with ``Vt[a, b] = (a|V|b)`` and
    ``Vs[a, b] = (a*|V|b*)``, the matrix element between eigenvectors of the
    adjoint Hamiltonian.
    """
    V = np.asarray(V, dtype=complex)
    if V.shape != (eig.dim, eig.dim):
        raise ValueError(f"coupling operator shape {V.shape} does not match dimension {eig.dim}")
    Vt = eig.left @ V @ eig.right
    Vs = eig.right.conj().T @ V @ eig.left.conj().T
    return Vt, Vs


def write_diagnostics(eig: NHEigensystem, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re_lambda_ev", "im_lambda_ev", "residual"])
        for k, (lam, r) in enumerate(zip(eig.eigenvalues, eig.residuals)):
            w.writerow([k, f"{lam.real:.15g}", f"{lam.imag:.15g}", f"{r:.3e}"])
