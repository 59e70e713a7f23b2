"""
Numerically exact reference dynamics with an explicitly discretized bath.

The bath is replaced by M harmonic modes on a uniform frequency grid and the
joint system + bath density matrix is propagated with the full Lindblad
equation, keeping at most ``phonon_cap`` phonons in total.  Each bath
coupling of the model gets its own copy of the discretized modes.

For models whose Hamiltonian and couplings conserve the system excitation
number and whose jumps conserve or lower it (the Tavis-Cummings models), a
state starting in the single-excitation sector never develops coherences with
the ground state.  Only the joint single-excitation block is then propagated;
the ground population follows from trace conservation.  Without in-sector
jumps that block obeys a non-Hermitian Schroedinger equation and is
propagated exactly, vector by vector.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import DOP853

from .bath import SpectralDensity, _quad, _segments
from .dynamics import ATOL, RTOL, StiffnessError, Trajectory, check_density
from .nheig import decompose
from .operators import SystemModel, build_nh

__all__ = [
    "DiscretizationWarning",
    "DimensionError",
    "DiscretizedBath",
    "discretize",
    "exact_evolve",
    "ExactPropagator",
    "write_bath",
]

MAX_DIM = 4000


class DiscretizationWarning(UserWarning):
    pass


class DimensionError(MemoryError):
    pass


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    omegas: np.ndarray
    couplings: np.ndarray
    window: tuple[float, float]

    @property
    def n_modes(self) -> int:
        return self.omegas.size

    @property
    def spacing(self) -> float:
        return (self.window[1] - self.window[0]) / self.n_modes

    @property
    def recurrence_time(self) -> float:
        """2 pi / spacing, in 1/eV."""
        return 2 * math.pi / self.spacing


def discretize(sd: SpectralDensity, window=(0.05, 0.35), n_modes=200) -> DiscretizedBath:
    """Midpoint grid on ``window`` with g_k = sqrt(J(w_k) dw)."""
    lo, hi = map(float, window)
    if n_modes < 2:
        raise ValueError("need at least two bath modes")
    if not 0 <= lo < hi:
        raise ValueError("window must satisfy 0 <= lo < hi")
    dw = (hi - lo) / n_modes
    w = lo + dw * (np.arange(n_modes) + 0.5)
    g = np.sqrt(np.clip(sd(w), 0.0, None) * dw)
    if not sd.is_zero:
        total = sum(_quad(sd, a, b, "J weight") for a, b in _segments(sd))
        captured = float(np.sum(g**2))
        if total > 0 and captured < 0.99 * total:
            warnings.warn(f"discretization window captures {captured / total:.3%} of the "
                          "spectral weight", DiscretizationWarning, stacklevel=2)
    return DiscretizedBath(w, g, (lo, hi))


def write_bath(bath: DiscretizedBath, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_ev", "g_ev"])
        for om, g in zip(bath.omegas, bath.couplings):
            w.writerow([f"{om:.15g}", f"{g:.15g}"])


def _fock_space(n_modes, cap):
    """Occupations as sorted tuples of mode indices, total number <= cap."""
    states = [()]
    for n in range(1, cap + 1):
        states.extend(combinations_with_replacement(range(n_modes), n))
    return states


def _bath_operators(omegas, groups, cap):
    """H_b and one coupling operator sum_k g_k (b_k + b_k^dag) per mode group."""
    n_modes = omegas.size
    states = _fock_space(n_modes, cap)
    index = {s: i for i, s in enumerate(states)}
    D = len(states)
    hb = np.array([sum(omegas[k] for k in s) for s in states])
    ops = []
    for modes, gk in groups:
        rows, cols, vals = [], [], []
        for i, s in enumerate(states):
            if len(s) >= cap:
                continue
            for k, g in zip(modes, gk):
                if g == 0:
                    continue
                t = tuple(sorted(s + (k,)))
                amp = g * math.sqrt(s.count(k) + 1)
                rows.append(index[t])
                cols.append(i)
                vals.append(amp)
        up = sp.csr_matrix((vals, (rows, cols)), shape=(D, D), dtype=complex)
        ops.append((up + up.T).tocsr())
    return sp.diags(hb).astype(complex).tocsr(), ops, D


def _sector_structure(model, rho0):
    """Indices of the single-excitation sector if the fast path applies, else None."""
    space = model.space
    if space is None:
        return None
    e = space.excitations
    same = e[:, None] == e[None, :]
    lower = e[:, None] == e[None, :] - 1
    H = model.hamiltonian
    if np.any(np.abs(H[~same]) > 0):
        return None
    for c in model.couplings:
        if np.any(np.abs(c.operator[~same]) > 0):
            return None
    for j in model.jumps:
        A = np.abs(j.operator)
        if np.any(A[~(same | lower)] > 0):
            return None
        if np.any(A[same] > 0) and np.any(A[lower] > 0):
            return None
    ground = np.nonzero(e == 0)[0]
    sector = np.nonzero(e == 1)[0]
    if ground.size != 1 or sector.size == 0:
        return None
    weight = np.abs(rho0)
    outside = np.ones(model.dim, bool)
    outside[sector] = False
    outside[ground] = False
    if np.any(weight[outside] > 0) or np.any(weight[np.ix_(sector, outside)] > 0):
        return None
    if np.any(weight[np.ix_(sector, ground)] > 0):
        return None
    return int(ground[0]), sector


class ExactPropagator:
    """Joint system + discretized-bath propagator for a fixed model and time grid.

    Build once, then call :meth:`reduced` for any number of initial system
    states.  ``method`` is ``'auto'``, ``'sector'`` or ``'full'``.
    """

    def __init__(self, model: SystemModel, bath: DiscretizedBath, grid, phonon_cap=1,
                 method="auto", max_dim=MAX_DIM, rtol=RTOL, atol=ATOL):
        self.model = model
        self.bath = bath
        self.grid = np.asarray(grid, dtype=float)
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("time grid must be strictly increasing")
        self.phonon_cap = int(phonon_cap)
        self.method = method
        self.max_dim = max_dim
        self.rtol, self.atol = rtol, atol
        nc = max(len(model.couplings), 1)
        M = bath.n_modes
        omegas = np.tile(bath.omegas, nc)
        groups = [(range(c * M, (c + 1) * M), bath.couplings) for c in range(len(model.couplings))]
        self._Hb, self._Bops, self.bath_dim = _bath_operators(omegas, groups, self.phonon_cap)
        self._vacuum = 0
        self._vectors = None
        self._eig = decompose(build_nh(model))

    def joint_dim(self, sector_size=None) -> int:
        n = self.model.dim if sector_size is None else sector_size
        return n * self.bath_dim

    # -- joint operators --------------------------------------------------

    def _joint_h(self, idx, nh=True):
        m = self.model
        Hs = build_nh(m) if nh else m.hamiltonian.astype(complex)
        Hs = Hs[np.ix_(idx, idx)]
        Ib = sp.identity(self.bath_dim, dtype=complex, format="csr")
        H = sp.kron(sp.csr_matrix(Hs), Ib) + sp.kron(sp.identity(len(idx), dtype=complex), self._Hb)
        for c, B in zip(m.couplings, self._Bops):
            V = c.operator[np.ix_(idx, idx)]
            if np.any(V):
                H = H + sp.kron(sp.csr_matrix(V), B)
        return H.tocsr()

    def _initial_joint(self, rho_s):
        n = rho_s.shape[0]
        D = n * self.bath_dim
        rho = np.zeros((D, D), dtype=complex)
        sel = np.arange(n) * self.bath_dim + self._vacuum
        rho[np.ix_(sel, sel)] = rho_s
        return rho

    def _partial_trace(self, rho_joint, n):
        Db = self.bath_dim
        r = rho_joint.reshape(n, Db, n, Db)
        return np.einsum("akbk->ab", r)

    # -- propagation ------------------------------------------------------

    def reduced(self, rho0) -> Trajectory:
        """Reduced system trajectory for the initial system state ``rho0``."""
        rho0 = check_density(rho0)
        structure = None if self.method == "full" else _sector_structure(self.model, rho0)
        if self.method == "sector" and structure is None:
            raise ValueError("model/initial state do not admit the sector decomposition")
        if structure is None:
            return self._full(rho0)
        return self._sector(rho0, *structure)

    def _check_dim(self, D):
        if D > self.max_dim:
            raise DimensionError(
                f"joint dimension {D} exceeds the cap {self.max_dim} "
                f"(density matrix ~{D * D * 16 / 1e9:.2f} GB)")

    def _sector(self, rho0, ground, sector):
        m = self.model
        n = sector.size
        D = self.joint_dim(n)
        self._check_dim(D)
        e = m.space.excitations
        inside = [j for j in m.jumps
                  if j.rate > 0 and np.any(np.abs(j.operator[np.ix_(e == 1, e == 1)]) > 0)]
        rho_s = rho0[np.ix_(sector, sector)]
        if not inside:
            block, joint_min = self._sector_vectors(rho_s, sector)
        else:
            block, joint_min = self._sector_rk(rho_s, sector, inside)
        d = m.dim
        rho = np.zeros((self.grid.size, d, d), dtype=complex)
        rho[np.ix_(np.arange(self.grid.size), sector, sector)] = block
        rho[:, ground, ground] = 1.0 - np.trace(block, axis1=1, axis2=2).real
        rho[0] = rho0
        extra = {"joint_min_eig": joint_min, "joint_dim": D, "path": "sector"}
        return Trajectory(self.grid, rho, self._eig, None, extra)

    def _propagators(self, H):
        dts = np.diff(self.grid)
        Hd = H.toarray()
        cache = {}
        out = []
        for dt in dts:
            key = round(dt, 12)
            if key not in cache:
                cache[key] = sla.expm(-1j * Hd * dt)
            out.append(cache[key])
        return out

    def _sector_vectors(self, rho_s, sector):
        if self._vectors is None or self._vectors[0] != sector.tobytes():
            H = self._joint_h(sector)
            n = sector.size
            Db = self.bath_dim
            psi = np.zeros((n * Db, n), dtype=complex)
            psi[np.arange(n) * Db + self._vacuum, np.arange(n)] = 1.0
            states = np.empty((self.grid.size, n * Db, n), dtype=complex)
            states[0] = psi
            for k, U in enumerate(self._propagators(H)):
                psi = U @ psi
                states[k + 1] = psi
            # M[t, i, j, a, b] = sum_k psi_i[a, k] conj(psi_j[b, k])
            S = states.reshape(self.grid.size, n, Db, n)
            Mt = np.einsum("taki,tbkj->tijab", S, S.conj())
            gram = np.einsum("tki,tkj->tij", states.conj(), states)
            self._vectors = (sector.tobytes(), Mt, gram)
        _, Mt, gram = self._vectors
        block = np.einsum("ij,tijab->tab", rho_s, Mt)
        # nonzero joint spectrum = spectrum of sqrt(rho) G sqrt(rho)
        w, U = np.linalg.eigh(rho_s)
        sq = (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T
        small = np.einsum("ij,tjk,kl->til", sq, gram, sq)
        joint_min = np.minimum(np.linalg.eigvalsh(small)[:, 0], 0.0)
        return block, joint_min

    def _sector_rk(self, rho_s, sector, jumps):
        H = self._joint_h(sector)
        # a constant energy offset drops out of H rho - rho H^dag; removing it
        # makes the integrator take far fewer steps
        shift = float(np.mean(H.diagonal().real))
        H = (H - shift * sp.identity(H.shape[0], dtype=complex, format="csr")).tocsr()
        Ib = sp.identity(self.bath_dim, dtype=complex, format="csr")
        As = [(j.rate, sp.kron(sp.csr_matrix(j.operator[np.ix_(sector, sector)]), Ib).tocsr())
              for j in jumps]
        rho_init = self._initial_joint(rho_s)
        blocks, joint = self._integrate(H, As, rho_init, sector.size)
        return blocks, joint

    def _full(self, rho0):
        m = self.model
        d = m.dim
        D = self.joint_dim()
        self._check_dim(D)
        idx = np.arange(d)
        H = self._joint_h(idx)
        Ib = sp.identity(self.bath_dim, dtype=complex, format="csr")
        As = [(j.rate, sp.kron(sp.csr_matrix(j.operator), Ib).tocsr())
              for j in m.jumps if j.rate > 0]
        rho, joint_min, joint_trace = self._integrate(H, As, self._initial_joint(rho0), d,
                                                      with_trace=True)
        rho[0] = rho0
        extra = {"joint_min_eig": joint_min, "joint_trace": joint_trace, "joint_dim": D,
                 "path": "full"}
        return Trajectory(self.grid, rho, self._eig, None, extra)

    def _integrate(self, H, As, rho_init, n, with_trace=False):
        D = rho_init.shape[0]
        

        def rhs(t, y):
            rho = y.reshape(D, D)
            # rho H^dag and A rho A^dag written with the sparse factor on the left
            out = -1j * (H @ rho - (H @ rho.conj().T).conj().T)
            for g, A in As:
                out += g * (A @ (A @ rho.conj().T).conj().T)
            return out.ravel()

        # step by hand and reduce each sample at once; storing every joint
        # density matrix would need grid.size * D^2 complex numbers
        blocks = np.empty((self.grid.size, n, n), dtype=complex)
        joint_min = np.empty(self.grid.size)
        joint_trace = np.empty(self.grid.size)

        def record(k, y):
            rho = y.reshape(D, D)
            blocks[k] = self._partial_trace(rho, n)
            joint_min[k] = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
            joint_trace[k] = np.trace(rho).real

        record(0, rho_init.ravel())
        k = 1
        solver = DOP853(rhs, self.grid[0], rho_init.ravel(), self.grid[-1],
                      rtol=self.rtol, atol=self.atol)
        while k < self.grid.size:
            msg = solver.step()
            if solver.status == "failed":
                raise StiffnessError(solver.t, msg)
            if k < self.grid.size and self.grid[k] <= solver.t:
                interp = solver.dense_output()
                while k < self.grid.size and self.grid[k] <= solver.t:
                    record(k, solver.y if self.grid[k] == solver.t else interp(self.grid[k]))
                    k += 1
        if with_trace:
            return blocks, joint_min, joint_trace
        return blocks, joint_min


def exact_evolve(model: SystemModel, bath: DiscretizedBath, rho0, grid, phonon_cap=1,
                 method="auto", max_dim=MAX_DIM, rtol=RTOL, atol=ATOL) -> Trajectory:
    """Reduced system trajectory from the joint system + discretized-bath Lindblad equation."""
    prop = ExactPropagator(model, bath, grid, phonon_cap=phonon_cap, method=method,
                           max_dim=max_dim, rtol=rtol, atol=atol)
    return prop.reduced(rho0)
