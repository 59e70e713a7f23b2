"""Truncated Hilbert spaces, system models and the effective non-Hermitian Hamiltonian."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bath import SpectralDensity

__all__ = [
    "InvalidModelError",
    "ValidityWarning",
    "Mode",
    "HilbertSpace",
    "JumpOperator",
    "BathCoupling",
    "SystemModel",
    "tavis_cummings",
    "build_nh",
]


class InvalidModelError(ValueError):
    pass


class ValidityWarning(UserWarning):
    """Loss rates large enough that Lindblad pumping of the ground state may appear."""


@dataclass(frozen=True)
class Mode:
    """A bosonic mode (``kind='boson'``, occupations 0..n_max) or a two-level system."""

    kind: str
    n_max: int = 1

    def __post_init__(self):
        if self.kind not in ("boson", "tls"):
            raise ValueError(f"unknown mode kind {self.kind!r}")
        if self.kind == "tls" and self.n_max != 1:
            raise ValueError("a two-level mode has n_max = 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def boson(cls, n_max):
        return cls("boson", int(n_max))

    @classmethod
    def tls(cls):
        return cls("tls", 1)


def _capped_states(n_max, budget):
    """Occupation tuples with sum <= budget, lexicographic, without the full product."""
    if not n_max:
        yield ()
        return
    for n in range(min(n_max[0], budget) + 1):
        for rest in _capped_states(n_max[1:], budget - n):
            yield (n,) + rest


class HilbertSpace:
    """Product space of modes, optionally restricted to a total excitation cap.

    Basis states are occupation tuples in lexicographic order.
    """

    def __init__(self, modes: Sequence[Mode], excitation_cap: int | None = None):
        if not modes:
            raise ValueError("at least one mode is required")
        self.modes = tuple(modes)
        self.excitation_cap = excitation_cap
        if excitation_cap is None:
            states = list(itertools.product(*[range(m.n_max + 1) for m in self.modes]))
        else:
            states = list(_capped_states([m.n_max for m in self.modes], excitation_cap))
        self.states = tuple(states)
        self.index = {s: i for i, s in enumerate(states)}
        self.excitations = np.array([sum(s) for s in states], dtype=int)

    @property
    def dim(self) -> int:
        return len(self.states)

    def _check(self, mode):
        if not 0 <= mode < len(self.modes):
            raise IndexError(f"mode index {mode} out of range for {len(self.modes)} modes")

    def lower(self, mode: int) -> np.ndarray:
        """Annihilation operator (a or sigma_-) of ``mode`` on the truncated space."""
        self._check(mode)
        op = np.zeros((self.dim, self.dim), dtype=complex)
        for i, s in enumerate(self.states):
            n = s[mode]
            if n == 0:
                continue
            t = s[:mode] + (n - 1,) + s[mode + 1:]
            op[self.index[t], i] = np.sqrt(n)
        return op

    def raise_(self, mode: int) -> np.ndarray:
        return self.lower(mode).conj().T

    def number(self, mode: int) -> np.ndarray:
        self._check(mode)
        return np.diag([complex(s[mode]) for s in self.states])

    def basis_vector(self, occupations) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple(occupations)]] = 1.0
        return v

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


@dataclass(frozen=True)
class JumpOperator:
    """Lindblad jump operator with its rate (eV)."""

    operator: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise InvalidModelError(f"jump rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class BathCoupling:
    """System operator coupled linearly to an independent bath."""

    operator: np.ndarray
    sd: SpectralDensity


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Hermitian system Hamiltonian plus Markovian jumps and non-Markovian couplings."""

    hamiltonian: np.ndarray
    jumps: tuple = ()
    couplings: tuple = ()
    space: HilbertSpace | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise InvalidModelError("Hamiltonian must be a square matrix")
        scale = max(np.abs(H).max(), 1.0)
        if np.abs(H - H.conj().T).max() > 1e-12 * scale:
            raise InvalidModelError("Hamiltonian is not Hermitian")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "jumps", tuple(self.jumps))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        d = H.shape[0]
        for j in self.jumps:
            if np.shape(j.operator) != (d, d):
                raise InvalidModelError("jump operator dimension mismatch")
        for c in self.couplings:
            V = np.asarray(c.operator)
            if V.shape != (d, d):
                raise InvalidModelError("coupling operator dimension mismatch")
            if np.abs(V - V.conj().T).max() > 1e-12 or np.abs(np.imag(V)).max() > 1e-12:
                raise InvalidModelError("coupling operators must be real and Hermitian")
        self._guard()

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def _guard(self):
        rates = [j.rate for j in self.jumps]
        if not rates:
            return
        E = np.linalg.eigvalsh(self.hamiltonian)
        gaps = E[1:] - E[0]
        gaps = gaps[gaps > 1e-12]
        if gaps.size and max(rates) > gaps.min():
            warnings.warn(
                f"loss rate {max(rates):.4g} eV exceeds the smallest excitation "
                f"energy {gaps.min():.4g} eV; Lindblad dynamics may pump the ground state",
                ValidityWarning, stacklevel=3)


def tavis_cummings(n_emitters, omega_c, omega_e, g_ec, gamma_c, gamma_e,
                   sd: SpectralDensity | None = None, jump="decay",
                   excitation_cap=1) -> SystemModel:
    """N two-level emitters coupled to one lossy cavity mode.

    Each emitter couples with ``g_ec / sqrt(N)`` and, when ``sd`` is given,
    to its own copy of that bath through sigma_+ sigma_-.  ``jump='decay'``
    gives jumps ``a`` (rate gamma_c) and ``sigma_-`` (gamma_e); ``'dephasing'``
    gives ``a^dag a`` (gamma_c) and ``sigma_+ sigma_-`` (gamma_e, if nonzero).
    """
    if n_emitters < 1:
        raise InvalidModelError("need at least one emitter")
    if gamma_c < 0 or gamma_e < 0:
        raise InvalidModelError("rates must be >= 0")
    if excitation_cap < 1:
        raise InvalidModelError("excitation cap must be >= 1")
    space = HilbertSpace([Mode.boson(excitation_cap)] + [Mode.tls()] * n_emitters,
                         excitation_cap=excitation_cap)
    a = space.lower(0)
    ad = a.conj().T
    g = g_ec / np.sqrt(n_emitters)
    H = omega_c * ad @ a
    jumps = []
    couplings = []
    if jump == "decay":
        jumps.append(JumpOperator(a, gamma_c))
    elif jump == "dephasing":
        jumps.append(JumpOperator(ad @ a, gamma_c))
    else:
        raise InvalidModelError(f"unknown jump kind {jump!r}")
    for j in range(1, n_emitters + 1):
        sm = space.lower(j)
        sp = sm.conj().T
        H = H + omega_e * sp @ sm + g * (ad @ sm + sp @ a)
        if jump == "decay":
            jumps.append(JumpOperator(sm, gamma_e))
        elif gamma_e > 0:
            jumps.append(JumpOperator(sp @ sm, gamma_e))
        if sd is not None:
            couplings.append(BathCoupling((sp @ sm).real.astype(complex), sd))
    info = dict(kind="tavis-cummings", n_emitters=n_emitters, omega_c=omega_c,
                omega_e=omega_e, g_ec=g_ec, gamma_c=gamma_c, gamma_e=gamma_e, jump=jump)
    return SystemModel(H, jumps, couplings, space=space, info=info)


def build_nh(model: SystemModel) -> np.ndarray:
    """H_s - (i/2) sum_A gamma_A A^dag A."""
    Hnh = model.hamiltonian.astype(complex).copy()
    for j in model.jumps:
        A = j.operator
        Hnh -= 0.5j * j.rate * (A.conj().T @ A)
    return Hnh
