"""
Relaxation tensors and master-equation generators in the non-Hermitian eigenbasis.

Density matrices are represented by their biorthogonal components
``rho[a, b] = (a|rho|b*)`` and vectorized row-major, so the superoperator
index of ``(a, b)`` is ``a * d + b``.

With F[j, s, q] the loss-broadened half-Fourier transform of the bath
correlation at frequency ``omega_q - omega_j`` and decay ``Gamma_q + Gamma_s``,
the tensor is

    R[a,b,c,d] = delta_bd sum_q F[c,d,q] V[a,q] V[q,c]
               + delta_ac sum_q F*[d,c,q] W[d,q] W[q,b]
               - (F[c,d,a] + F*[d,c,b]) V[a,c] W[d,b]

where ``V = (a|V|b)`` and ``W = (a*|V|b*)``; it enters the equation of
motion with a minus sign.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .bath import SpectralDensity, _f_value
from .nheig import NHEigensystem, coupling_matrices
from .operators import SystemModel

__all__ = [
    "FCache",
    "RelaxationTensor",
    "Generator",
    "eigen_couplings",
    "brls_tensor",
    "br_tensor",
    "assemble_generator",
    "secular_rate",
    "secular_rates",
    "write_tensor",
]

KEY_QUANTUM = 1e-14


class FCache:
    """Memo of F values keyed by (frequency, width, bath) with hit/miss counters."""

    def __init__(self):
        self._store: dict = {}
        self.hits = 0
        self.misses = 0

    def __len__(self):
        return len(self._store)

    @property
    def lookups(self) -> int:
        return self.hits + self.misses

    @property
    def hit_rate(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0

    def table(self, sd: SpectralDensity, energies, widths) -> np.ndarray:
        """F[j, s, q] for every index triple of the eigenbasis."""
        w = np.asarray(energies, dtype=float)
        g = np.asarray(widths, dtype=float)
        d = w.size
        xq = np.rint((w[None, :] - w[:, None]) / KEY_QUANTUM).astype(np.int64)   # [j, q]
        gq = np.rint((g[None, :] + g[:, None]) / KEY_QUANTUM).astype(np.int64)   # [s, q]
        X = np.broadcast_to(xq[:, None, :], (d, d, d))
        G = np.broadcast_to(gq[None, :, :], (d, d, d))
        pairs = np.stack([X.ravel(), G.ravel()], axis=1)
        uniq, inverse = np.unique(pairs, axis=0, return_inverse=True)
        values = np.empty(len(uniq), dtype=complex)
        for n, (xi, gi) in enumerate(uniq):
            key = (int(xi), int(gi), sd.key)
            if key in self._store:
                self.hits += 1
            else:
                self.misses += 1
                self._store[key] = _f_value(sd, xi * KEY_QUANTUM, max(gi, 0) * KEY_QUANTUM)
            values[n] = self._store[key]
        self.hits += d**3 - len(uniq)
        return values[inverse.ravel()].reshape(d, d, d)


@dataclass(frozen=True, eq=False)
class RelaxationTensor:
    R: np.ndarray
    flavor: str

    @property
    def dim(self) -> int:
        return self.R.shape[0]


def eigen_couplings(eig: NHEigensystem, model_or_couplings, sd: SpectralDensity | None = None):
    """``[(Vt, Vs, sd), ...]`` for every bath coupling of a model.

    Also accepts a list of :class:`~brls.operators.BathCoupling` and an
    override density ``sd`` that replaces every bath (e.g. an effective one).
    """
    couplings = (model_or_couplings.couplings if isinstance(model_or_couplings, SystemModel)
                 else model_or_couplings)
    out = []
    for c in couplings:
        Vt, Vs = coupling_matrices(eig, c.operator)
        out.append((Vt, Vs, sd if sd is not None else c.sd))
    return out


def brls_tensor(eig: NHEigensystem, couplings, lossless=False, cache: FCache | None = None,
                flavor=None) -> RelaxationTensor:
    """Loss-broadened Bloch-Redfield tensor; ``lossless=True`` drops the widths inside F."""
    d = eig.dim
    cache = FCache() if cache is None else cache
    widths = np.zeros(d) if lossless else np.clip(eig.widths, 0.0, None)
    R = np.zeros((d, d, d, d), dtype=complex)
    eye = np.eye(d)
    for Vt, Vs, sd in couplings:
        if sd.is_zero or not (np.any(Vt) or np.any(Vs)):
            continue
        F = cache.table(sd, eig.energies, widths)
        Fc = F.conj()
        t1 = np.einsum("cdq,aq,qc->acd", F, Vt, Vt)
        t2 = np.einsum("dcq,dq,qb->cdb", Fc, Vs, Vs)
        R += np.einsum("acd,bd->abcd", t1, eye)
        R += np.einsum("cdb,ac->abcd", t2, eye)
        R -= np.einsum("cda,ac,db->abcd", F, Vt, Vs)
        R -= np.einsum("dcb,ac,db->abcd", Fc, Vt, Vs)
    if flavor is None:
        flavor = "BR" if lossless else "BRLS"
    return RelaxationTensor(R, flavor)


def br_tensor(eig: NHEigensystem, couplings, cache: FCache | None = None) -> RelaxationTensor:
    """Standard Bloch-Redfield tensor: bath integrals without the system loss rates."""
    return brls_tensor(eig, couplings, lossless=True, cache=cache, flavor="BR")


@dataclass(frozen=True, eq=False)
class Generator:
    """Superoperator on row-major vectorized eigenbasis density matrices.

    ``coherent`` is the diagonal NH part, ``refill`` the quantum-jump terms
    and ``redfield`` minus the reshaped relaxation tensor.
    """

    eig: NHEigensystem
    coherent: np.ndarray
    refill: np.ndarray
    redfield: np.ndarray
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        L = self.refill + self.redfield
        L[np.diag_indices_from(L)] += self.coherent
        object.__setattr__(self, "matrix", L)

    @property
    def dim(self) -> int:
        return self.eig.dim

    def apply(self, rho_eig: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ np.asarray(rho_eig).reshape(d * d)).reshape(d, d)


def assemble_generator(eig: NHEigensystem, tensor: RelaxationTensor | None = None,
                       jumps=()) -> Generator:
    """Full BR LS equation of motion for ``(a|rho|b*)``."""
    d = eig.dim
    lam = eig.eigenvalues
    coherent = (-1j * (lam[:, None] - lam.conj()[None, :])).ravel()
    refill = np.zeros((d * d, d * d), dtype=complex)
    for j in jumps:
        if j.rate == 0:
            continue
        A = eig.left @ np.asarray(j.operator, dtype=complex) @ eig.right
        refill += j.rate * np.kron(A, A.conj())
    if tensor is None:
        red = np.zeros((d * d, d * d), dtype=complex)
    else:
        if tensor.dim != d:
            raise ValueError("tensor dimension does not match eigensystem")
        red = -tensor.R.reshape(d * d, d * d)
    return Generator(eig, coherent, refill, red)


def secular_rate(eig: NHEigensystem, couplings, i: int, f: int, lossless=False) -> float:
    """Population transfer rate K_{i->f} = 2 Re F_{iif} |(f|V|i)|^2 summed over baths."""
    if i == f:
        raise ValueError("initial and final state must differ")
    widths = np.zeros(eig.dim) if lossless else np.clip(eig.widths, 0.0, None)
    w = eig.energies
    K = 0.0
    for Vt, _, sd in couplings:
        if sd.is_zero:
            continue
        F = _f_value(sd, w[f] - w[i], widths[i] + widths[f])
        K += 2.0 * F.real * abs(Vt[f, i]) ** 2
    return K


def secular_rates(eig: NHEigensystem, couplings, lossless=False,
                  cache: FCache | None = None) -> np.ndarray:
    """Matrix ``K[i, f]`` of secular transfer rates for all pairs (zero diagonal)."""
    d = eig.dim
    cache = FCache() if cache is None else cache
    widths = np.zeros(d) if lossless else np.clip(eig.widths, 0.0, None)
    K = np.zeros((d, d))
    idx = np.arange(d)
    for Vt, _, sd in couplings:
        if sd.is_zero:
            continue
        F = cache.table(sd, eig.energies, widths)
        Fiif = F[idx, idx, :]                      # [i, f]
        K += 2.0 * Fiif.real * np.abs(Vt.T) ** 2   # |Vt[f, i]|^2
    K[idx, idx] = 0.0
    return K


def write_tensor(tensor: RelaxationTensor, path, threshold=1e-12):
    """CSV of tensor entries with magnitude above ``threshold``."""
    R = tensor.R
    idx = np.argwhere(np.abs(R) > threshold)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "c", "d", "re", "im"])
        for a, b, c, d in idx:
            v = R[a, b, c, d]
            w.writerow([a, b, c, d, f"{v.real:.15g}", f"{v.imag:.15g}"])
