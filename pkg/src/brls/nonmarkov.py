"""Trace-distance measure of non-Markovianity (information backflow)."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import HBAR_EV_FS, Trajectory, fs_to_internal

__all__ = [
    "NMResult",
    "StatePair",
    "trace_distance",
    "increase_intervals",
    "nm_measure",
    "default_pairs",
    "optimal_pair",
    "write_nm",
    "default_nm_grid",
    "DEFAULT_HORIZON_FS",
]

INCREASE_THRESHOLD = 1e-12
DEFAULT_HORIZON_FS = 500.0


def trace_distance(rho1, rho2) -> float:
    """D = (1/2) sum of singular values of rho1 - rho2."""
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape != rho2.shape:
        raise ValueError(f"shape mismatch {rho1.shape} vs {rho2.shape}")
    diff = rho1 - rho2
    diff = 0.5 * (diff + np.conj(np.swapaxes(diff, -1, -2)))
    return 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(axis=-1)


def _trace_distance_series(r1, r2):
    diff = r1 - r2
    diff = 0.5 * (diff + np.conj(np.swapaxes(diff, 1, 2)))
    return 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(axis=1)


def increase_intervals(times, D, threshold=INCREASE_THRESHOLD):
    """Maximal runs of strictly increasing samples, as ``[(a, b, D(b) - D(a)), ...]``."""
    D = np.asarray(D, dtype=float)
    up = np.diff(D) > threshold
    out = []
    k = 0
    n = up.size
    while k < n:
        if not up[k]:
            k += 1
            continue
        start = k
        while k < n and up[k]:
            k += 1
        out.append((float(times[start]), float(times[k]), float(D[k] - D[start])))
    return out


@dataclass(frozen=True)
class StatePair:
    label: str
    rho1: np.ndarray = field(repr=False)
    rho2: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class NMResult:
    """Maximum over pairs of the summed trace-distance increases.

    ``intervals`` belong to the maximizing pair and hold ``(a, b, increment)``
    with times in 1/eV; only intervals with ``a >= t_min`` are counted.
    """

    value: float
    intervals: list
    best_pair: str
    t_min: float
    per_pair: dict


def _restricted(intervals, t_min):
    return [iv for iv in intervals if iv[0] >= t_min]


def nm_measure(dynamics, pairs, grid, t_min=0.0, workers=1) -> NMResult:
    """Trace-distance non-Markovianity of ``dynamics`` over a set of initial pairs.

    Parameters
    ----------
    dynamics : callable
        Maps an initial density matrix to a :class:`~brls.dynamics.Trajectory`
        (or an array of density matrices) sampled on ``grid``.
    pairs : sequence of StatePair
    grid : array
        Sample times in 1/eV; at least 400 points are expected.
    t_min : float
        Only increase intervals starting at or after ``t_min`` contribute.
    workers : int
        Pairs are independent and may be propagated in a thread pool.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("nm_measure needs at least one pair of initial states")
    grid = np.asarray(grid, dtype=float)

    def rhos(rho0):
        out = dynamics(rho0)
        return out.rho if isinstance(out, Trajectory) else np.asarray(out)

    def one(pair):
        D = _trace_distance_series(rhos(pair.rho1), rhos(pair.rho2))
        ivs = _restricted(increase_intervals(grid, D), t_min)
        return float(sum(iv[2] for iv in ivs)), ivs

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]
    per_pair = {p.label: r[0] for p, r in zip(pairs, results)}
    best = int(np.argmax([r[0] for r in results]))
    return NMResult(float(results[best][0]), results[best][1], pairs[best].label,
                    float(t_min), per_pair)


def _pure(v):
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def optimal_pair(space, emitter=1, cavity=0) -> StatePair:
    """|+-> = (sigma_+ +- i a^dag)|0> / sqrt(2)."""
    vac = space.basis_vector((0,) * len(space.modes))
    e = space.raise_(emitter) @ vac
    c = space.raise_(cavity) @ vac
    return StatePair("optimal", _pure(e + 1j * c), _pure(e - 1j * c))


def default_pairs(space, n_random=32, seed=0):
    """The analytic optimum plus Haar-random pure pairs in the single-excitation sector."""
    pairs = [optimal_pair(space)]
    sector = np.nonzero(space.excitations == 1)[0]
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        vs = []
        for _ in range(2):
            v = np.zeros(space.dim, dtype=complex)
            v[sector] = rng.normal(size=sector.size) + 1j * rng.normal(size=sector.size)
            vs.append(v)
        pairs.append(StatePair(f"random{k:03d}", _pure(vs[0]), _pure(vs[1])))
    return pairs


def default_nm_grid(horizon_fs=DEFAULT_HORIZON_FS, samples=2001):
    return fs_to_internal(np.linspace(0.0, horizon_fs, samples))


def write_nm(result: NMResult, path):
    """Per-pair NM rows, the intervals of the best pair, then a summary row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "pair", "nm", "a_fs", "b_fs", "increment"])
        for label, v in result.per_pair.items():
            w.writerow(["pair", label, f"{v:.15g}", "", "", ""])
        for a, b, inc in result.intervals:
            w.writerow(["interval", result.best_pair, "", f"{a * HBAR_EV_FS:.10g}",
                        f"{b * HBAR_EV_FS:.10g}", f"{inc:.15g}"])
        w.writerow(["max", result.best_pair, f"{result.value:.15g}", "", "", ""])
