"""Propagation of eigenbasis density matrices and observable extraction."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .nheig import NHEigensystem
from .redfield import Generator

__all__ = [
    "HBAR_EV_FS",
    "StiffnessError",
    "Trajectory",
    "fs_to_internal",
    "internal_to_fs",
    "default_grid",
    "to_eigenbasis",
    "from_eigenbasis",
    "eigenstate_density",
    "basis_density",
    "check_density",
    "evolve",
    "observables",
    "write_trajectory",
]

HBAR_EV_FS = 0.6582119569
RTOL = 1e-8
ATOL = 1e-12


class StiffnessError(RuntimeError):
    def __init__(self, t_reached, message=""):
        self.t_reached = t_reached
        super().__init__(f"integration failed at t = {t_reached * HBAR_EV_FS:.6g} fs "
                         f"({t_reached:.6g} 1/eV): {message}")


def fs_to_internal(t_fs):
    return np.asarray(t_fs, dtype=float) / HBAR_EV_FS


def internal_to_fs(t):
    return np.asarray(t, dtype=float) * HBAR_EV_FS


def default_grid(t_max_fs=200.0, samples=400) -> np.ndarray:
    """Uniform grid from 0 to ``t_max_fs`` in internal time units."""
    return fs_to_internal(np.linspace(0.0, t_max_fs, samples))


def to_eigenbasis(eig: NHEigensystem, rho) -> np.ndarray:
    """(a|rho|b*) = left[a] rho left[b]^dag."""
    return eig.left @ rho @ eig.left.conj().T


def from_eigenbasis(eig: NHEigensystem, rho_eig) -> np.ndarray:
    """sum_ab |a) rho_ab (b*|; accepts a stack of matrices."""
    return eig.right @ rho_eig @ eig.right.conj().T


def eigenstate_density(eig: NHEigensystem, index: int) -> np.ndarray:
    """|a)(a| hermitized and normalized to unit trace in the computational basis."""
    r = eig.right[:, index]
    rho = np.outer(r, r.conj())
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def basis_density(dim: int, index: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def check_density(rho, tol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled system density matrices in the computational basis.

    ``times`` are in 1/eV; ``eig`` (if present) defines the eigenbasis used
    for :attr:`populations`.
    """

    times: np.ndarray
    rho: np.ndarray
    eig: NHEigensystem | None = None
    rho_eig: np.ndarray | None = None
    extra: dict | None = None

    @property
    def times_fs(self) -> np.ndarray:
        return internal_to_fs(self.times)

    @property
    def trace(self) -> np.ndarray:
        return np.real(np.trace(self.rho, axis1=1, axis2=2))

    @property
    def min_eig(self) -> np.ndarray:
        herm = 0.5 * (self.rho + np.conj(np.swapaxes(self.rho, 1, 2)))
        return np.linalg.eigvalsh(herm)[:, 0]

    @property
    def hermiticity_error(self) -> np.ndarray:
        return np.abs(self.rho - np.conj(np.swapaxes(self.rho, 1, 2))).max(axis=(1, 2))

    @property
    def populations(self) -> np.ndarray:
        """Re (a|rho|a*) for each eigenstate a, shape (n_times, d)."""
        if self.eig is None:
            raise ValueError("trajectory has no eigensystem attached")
        if self.rho_eig is not None:
            return np.real(np.diagonal(self.rho_eig, axis1=1, axis2=2))
        L = self.eig.left
        return np.real(np.einsum("ai,tij,aj->ta", L, self.rho, L.conj()))

    def expectation(self, op) -> np.ndarray:
        return np.einsum("ij,tji->t", np.asarray(op), self.rho)


def evolve(gen: Generator, rho0, grid, rtol=RTOL, atol=ATOL) -> Trajectory:
    """Integrate the generator with an adaptive embedded Runge-Kutta 4(5) scheme.

    ``rho0`` is a computational-basis density matrix; ``grid`` is an
    increasing array of times in 1/eV starting at the initial time.
    """
    eig = gen.eig
    d = eig.dim
    rho0 = check_density(rho0)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("time grid must be strictly increasing")
    y0 = to_eigenbasis(eig, rho0).reshape(d * d)
    L = gen.matrix
    if grid.size == 1 or not np.any(L):
        ys = np.repeat(y0[None, :], grid.size, axis=0)
    else:
        sol = solve_ivp(lambda t, y: L @ y, (grid[0], grid[-1]), y0, method="RK45",
                        t_eval=grid, rtol=rtol, atol=atol)
        if sol.status != 0:
            t_reached = sol.t[-1] if sol.t.size else grid[0]
            raise StiffnessError(t_reached, sol.message)
        ys = sol.y.T
        bad = ~np.all(np.isfinite(ys), axis=1)
        if bad.any():
            raise StiffnessError(grid[np.argmax(bad)], "non-finite density matrix")
    rho_eig = ys.reshape(-1, d, d)
    rho_eig[0] = y0.reshape(d, d)
    rho = from_eigenbasis(eig, rho_eig)
    rho[0] = rho0
    return Trajectory(grid, rho, eig, rho_eig)


def observables(traj: Trajectory, ops) -> np.ndarray:
    """<O>(t) = Tr[O rho(t)] for each operator; shape (n_ops, n_times)."""
    d = traj.rho.shape[1]
    out = []
    for op in ops:
        op = np.asarray(op)
        if op.shape != (d, d):
            raise ValueError(f"operator shape {op.shape} does not match dimension {d}")
        out.append(traj.expectation(op))
    return np.array(out)


def write_trajectory(traj: Trajectory, path, ops=(), names=()):
    """Trajectory CSV: t_fs, trace, min_eig, P_0..P_{d-1}, then Re/Im of each <O>."""
    names = list(names) or [f"O{k}" for k in range(len(ops))]
    pops = traj.populations if traj.eig is not None else np.real(
        np.diagonal(traj.rho, axis1=1, axis2=2))
    exps = observables(traj, ops) if len(ops) else np.zeros((0, traj.times.size))
    header = ["t_fs", "trace", "min_eig"] + [f"P_{k}" for k in range(pops.shape[1])]
    for n in names:
        header += [f"re_{n}", f"im_{n}"]
    tr = traj.trace
    me = traj.min_eig
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k, t in enumerate(traj.times_fs):
            row = [f"{t:.10g}", f"{tr[k]:.15g}", f"{me[k]:.15g}"]
            row += [f"{p:.15g}" for p in pops[k]]
            for e in exps[:, k]:
                row += [f"{e.real:.15g}", f"{e.imag:.15g}"]
            w.writerow(row)
