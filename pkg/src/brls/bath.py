"""
Bath spectral densities and the integrals built from them.

Everything here works in internal units with hbar = 1: energies and rates in
eV, times in 1/eV.  A spectral density is zero for negative frequencies.

The central quantity is the loss-broadened half-Fourier transform

    F(x, G) = int_0^inf dt C(t) exp(-i x t - G t / 2)
            = int_0^inf dw J(w) [ (n(w)+1) / (G/2 + i(x + w))
                                  + n(w) / (G/2 + i(x - w)) ],

evaluated by adaptive quadrature.  The Lorentzian kernel becomes singular
when G -> 0; the singular part is removed analytically on a symmetric window
around the pole so that one code path covers both G > 0 and G = 0.
"""

from __future__ import annotations

import bisect
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "QuadratureError",
    "SpectralDensity",
    "TransitionSpectrum",
    "evaluate_sd",
    "bose_occupation",
    "correlation",
    "half_fourier_f",
    "transition_spectrum_value",
    "effective_sd",
    "effective_sd_curve",
    "effective_density_table",
    "surrogate_structured_density",
    "read_table",
    "EPSABS",
    "EPSREL",
]

EPSABS = 1e-10
EPSREL = 1e-8
# support is cut where J drops below this fraction of its maximum
SUPPORT_CUTOFF = 1e-14
_QUAD_LIMIT = 400


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, what, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"quadrature for {what} did not converge: estimated error "
            f"{residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """A bath spectral density J(w) (eV) with an optional temperature.

    Use the constructors :meth:`lorentzian`, :meth:`composite`,
    :meth:`tabulated`, :meth:`zero` or :meth:`from_file` rather than the raw
    initializer.

    ``peaks`` holds ``(g_b, omega_b, kappa)`` triples of the underdamped
    Lorentzian form; ``omegas``/``values`` hold tabulated samples.
    ``temperature`` is k_B T in eV.
    """

    kind: str
    peaks: tuple = ()
    omegas: np.ndarray | None = None
    values: np.ndarray | None = None
    temperature: float = 0.0
    _key: str = field(default="", repr=False)

    def __post_init__(self):
        if self.kind not in ("lorentzian", "composite", "tabulated"):
            raise ValueError(f"unknown spectral density kind {self.kind!r}")
        if self.temperature < 0 or not math.isfinite(self.temperature):
            raise ValueError("temperature must be finite and >= 0")
        if self.kind == "tabulated":
            w = np.asarray(self.omegas, dtype=float)
            j = np.asarray(self.values, dtype=float)
            if w.ndim != 1 or w.shape != j.shape or w.size < 2:
                raise ValueError("tabulated density needs >= 2 matching samples")
            if np.any(np.diff(w) <= 0):
                raise ValueError("tabulated frequencies must be strictly increasing")
            if np.any(j < 0):
                raise ValueError("tabulated spectral density must be >= 0")
            w.setflags(write=False)
            j.setflags(write=False)
            object.__setattr__(self, "omegas", w)
            object.__setattr__(self, "values", j)
        else:
            for g, wb, kappa in self.peaks:
                if wb <= 0 or kappa <= 0:
                    raise ValueError("peak centre and width must be positive")
        h = hashlib.sha1()
        h.update(self.kind.encode())
        h.update(repr(tuple(tuple(map(float, p)) for p in self.peaks)).encode())
        if self.omegas is not None:
            h.update(self.omegas.tobytes())
            h.update(self.values.tobytes())
        h.update(repr(float(self.temperature)).encode())
        object.__setattr__(self, "_key", h.hexdigest())

    # -- constructors -----------------------------------------------------

    @classmethod
    def lorentzian(cls, g_b, omega_b, kappa, temperature=0.0):
        return cls("lorentzian", peaks=((float(g_b), float(omega_b), float(kappa)),),
                   temperature=temperature)

    @classmethod
    def composite(cls, peaks: Sequence[tuple[float, float, float]], temperature=0.0):
        peaks = tuple((float(g), float(w), float(k)) for g, w, k in peaks)
        return cls("composite", peaks=peaks, temperature=temperature)

    @classmethod
    def tabulated(cls, omegas, values, temperature=0.0):
        return cls("tabulated", omegas=np.array(omegas, dtype=float),
                   values=np.array(values, dtype=float), temperature=temperature)

    @classmethod
    def zero(cls):
        return cls("composite", peaks=())

    @classmethod
    def from_file(cls, path, temperature=0.0):
        w, j = read_table(path)
        return cls.tabulated(w, j, temperature=temperature)

    # -- evaluation -------------------------------------------------------

    @property
    def key(self) -> str:
        """Content hash used to share cached integrals between equal baths."""
        return self._key

    @property
    def is_zero(self) -> bool:
        if self.kind == "tabulated":
            return not np.any(self.values)
        return all(g == 0 for g, _, _ in self.peaks)

    def __call__(self, omega):
        if isinstance(omega, (float, int)):
            return self._scalar(float(omega))
        w = np.asarray(omega, dtype=float)
        if self.kind == "tabulated":
            out = np.interp(w, self.omegas, self.values, left=0.0, right=0.0)
            out = np.where(w >= 0, out, 0.0)
        else:
            out = np.zeros_like(w)
            pos = w > 0
            wp = np.where(pos, w, 1.0)
            for g, wb, kappa in self.peaks:
                val = (2 * g**2 / np.pi) * kappa * wp * wb / (
                    (wp**2 - wb**2) ** 2 + kappa**2 * wp**2)
                out = out + np.where(pos, val, 0.0)
        return float(out) if out.ndim == 0 else out

    def _scalar(self, w: float) -> float:
        # quadrature integrands call J one point at a time
        if w <= 0:
            return 0.0
        if self.kind == "tabulated":
            xs = self.omegas
            if w < xs[0] or w > xs[-1]:
                return 0.0
            k = min(bisect.bisect_right(xs, w), xs.size - 1)
            x0, x1 = xs[k - 1], xs[k]
            y0, y1 = self.values[k - 1], self.values[k]
            return float(y0 + (y1 - y0) * (w - x0) / (x1 - x0))
        total = 0.0
        for g, wb, kappa in self.peaks:
            total += (2 * g * g / math.pi) * kappa * w * wb / (
                (w * w - wb * wb) ** 2 + kappa * kappa * w * w)
        return total

    def occupation(self, omega):
        return bose_occupation(omega, self.temperature)

    def peak_value(self) -> float:
        if self.kind == "tabulated":
            return float(self.values.max())
        if not self.peaks:
            return 0.0
        grid = np.concatenate([np.linspace(wb - 3 * k, wb + 3 * k, 61)
                               for _, wb, k in self.peaks])
        return float(np.max(self(grid)))

    def support(self) -> tuple[float, float]:
        """Interval outside of which J is below ``SUPPORT_CUTOFF`` of its peak."""
        if self.kind == "tabulated":
            nz = np.nonzero(self.values)[0]
            if nz.size == 0:
                return 0.0, 0.0
            i0 = max(nz[0] - 1, 0)
            i1 = min(nz[-1] + 1, self.values.size - 1)
            return max(float(self.omegas[i0]), 0.0), max(float(self.omegas[i1]), 0.0)
        jmax = self.peak_value()
        if jmax == 0:
            return 0.0, 0.0
        # J ~ sum_p (2 g^2 / pi) kappa w_b / w^3 far above every peak
        tail = sum(2 * g**2 * k * wb / np.pi for g, wb, k in self.peaks)
        hi = (tail / (SUPPORT_CUTOFF * jmax)) ** (1 / 3)
        hi = max(hi, 4 * max(wb for _, wb, _ in self.peaks))
        return 0.0, float(hi)

    def breakpoints(self) -> np.ndarray:
        """Points where the integrand changes character; quadrature splits there."""
        lo, hi = self.support()
        pts = [lo, hi]
        if self.kind == "tabulated":
            # interpolation nodes are kinks of J
            pts.extend(self.omegas)
        else:
            top = lo
            for _, wb, k in self.peaks:
                pts.extend(wb + k * np.array([-20, -6, -2, -0.5, 0, 0.5, 2, 6, 20]))
                top = max(top, wb + 20 * k)
            pts.extend(np.linspace(lo, top, 9))
            x = max(2 * top, 1e-3)
            while x < hi:
                pts.append(x)
                x *= 3
        pts = np.unique(np.clip(pts, lo, hi))
        return pts


def evaluate_sd(sd: SpectralDensity, omega):
    """J(omega); zero for omega < 0 and outside tabulated data."""
    return sd(omega)


def bose_occupation(omega, temperature):
    """Bose-Einstein occupation; identically zero at zero temperature."""
    w = np.asarray(omega, dtype=float)
    if temperature == 0:
        out = np.zeros_like(w)
    else:
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(w > 0, 1.0 / np.expm1(np.where(w > 0, w, 1.0) / temperature), 0.0)
    return float(out) if out.ndim == 0 else out


def read_table(path):
    """Read a two-column ``omega J`` table; '#' starts a comment line."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]


# -- quadrature helpers ---------------------------------------------------

def _quad(func, a, b, what, **kw):
    if b <= a:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(func, a, b, epsabs=EPSABS, epsrel=EPSREL,
                                  limit=_QUAD_LIMIT, **kw)
    tol = max(EPSABS, EPSREL * abs(val))
    if not math.isfinite(val) or err > 100 * tol:
        raise QuadratureError(what, err, tol)
    return val


def _segments(sd, extra=()):
    lo, hi = sd.support()
    pts = np.concatenate([sd.breakpoints(), np.asarray(extra, dtype=float)])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return list(zip(pts[:-1], pts[1:]))


def _weight(sd, thermal):
    """Integrand weight J(w)(n+1) or J(w) n."""
    T = sd.temperature
    if not thermal:
        if T == 0:
            return lambda w: sd(w)
        return lambda w: sd(w) * (bose_occupation(w, T) + 1.0)
    return lambda w: sd(w) * bose_occupation(w, T)


def _kernel_integral(sd, weight, center, width, sign, real_only=False):
    """int_0^inf weight(w) / (width/2 + i*sign*(w - center)) dw.

    On a window symmetric about ``center`` the constant ``weight(center)`` is
    subtracted and integrated in closed form; the remainder is regular even
    for ``width == 0``, where the result is the principal value plus the
    pi * weight(center) pole contribution.
    """
    lo, hi = sd.support()
    if hi <= lo:
        return 0.0
    half = 0.5 * width
    h = min(center - lo, hi - center) if lo < center < hi else 0.0
    f0 = weight(center) if h > 0 else 0.0
    a, b = center - h, center + h

    def re_part(w):
        y = w - center
        f = weight(w)
        if a <= w <= b:
            f = f - f0
        den = y * y + half * half
        return f * half / den if den > 0 else 0.0

    def im_part(w):
        y = w - center
        f = weight(w)
        if a <= w <= b:
            f = f - f0
        den = y * y + half * half
        return -sign * f * y / den if den > 0 else 0.0

    extra = [a, center, b] if h > 0 else [center] if lo < center < hi else []
    if h > 0 and width > 0:
        extra += [center - k * width for k in (1, 5, 25)] + [center + k * width for k in (1, 5, 25)]
    segs = _segments(sd, extra)
    re = sum(_quad(re_part, s0, s1, "Re F") for s0, s1 in segs)
    if h > 0:
        re += f0 * 2.0 * (math.atan(h / half) if half > 0 else math.pi / 2)
    if real_only:
        return re
    im = sum(_quad(im_part, s0, s1, "Im F") for s0, s1 in segs)
    return complex(re, im)


# -- public integrals -----------------------------------------------------

def correlation(sd: SpectralDensity, t: float) -> complex:
    """Bath autocorrelation C(t) = int_0^inf J [(n+1) e^{-iwt} + n e^{iwt}] dw."""
    if t < 0:
        raise ValueError("correlation is defined for t >= 0")
    lo, hi = sd.support()
    if hi <= lo:
        return 0j
    T = sd.temperature
    if T == 0:
        sym = sd
    else:
        def sym(w):
            return sd(w) * (2 * bose_occupation(w, T) + 1.0)
    segs = _segments(sd)
    if t == 0:
        re = sum(_quad(sym, a, b, "C(0)") for a, b in segs)
        return complex(re, 0.0)
    re = sum(_quad(sym, a, b, "Re C(t)", weight="cos", wvar=t) for a, b in segs)
    im = -sum(_quad(sd, a, b, "Im C(t)", weight="sin", wvar=t) for a, b in segs)
    return complex(re, im)


def half_fourier_f(sd: SpectralDensity, omega_q, omega_j, gamma_q, gamma_s) -> complex:
    """Loss-broadened half-Fourier transform of the bath correlation.

    Returns ``int_0^inf C(t) exp(-i(omega_q - omega_j)t - (gamma_q + gamma_s)t/2) dt``.
    """
    if gamma_q < 0 or gamma_s < 0:
        raise ValueError("loss rates must be >= 0")
    return _f_value(sd, omega_q - omega_j, gamma_q + gamma_s)


def _f_value(sd, x, width) -> complex:
    if sd.is_zero:
        return 0j
    val = _kernel_integral(sd, _weight(sd, False), -x, width, +1)
    if sd.temperature > 0:
        val += _kernel_integral(sd, _weight(sd, True), x, width, -1)
    return complex(val)


@dataclass(frozen=True)
class TransitionSpectrum:
    """Lorentzian line shape of a transition between two lossy states."""

    omega_i: float
    omega_f: float
    gamma_i: float
    gamma_f: float

    def __post_init__(self):
        if self.gamma_i < 0 or self.gamma_f < 0:
            raise ValueError("loss rates must be >= 0")

    @property
    def center(self) -> float:
        return self.omega_i - self.omega_f

    @property
    def width(self) -> float:
        """Full width at half maximum, gamma_i + gamma_f."""
        return self.gamma_i + self.gamma_f

    @property
    def is_delta(self) -> bool:
        return self.width == 0

    def __call__(self, omega):
        return transition_spectrum_value(self, omega)


def transition_spectrum_value(ts: TransitionSpectrum, omega):
    """T_{i->f}(omega).  Raises ValueError for a zero-width (delta) spectrum."""
    if ts.is_delta:
        raise ValueError("zero-width transition spectrum is a delta function; "
                         "use effective_sd for the delta branch")
    half = 0.5 * ts.width
    w = np.asarray(omega, dtype=float)
    out = (half / np.pi) / ((ts.center - w) ** 2 + half**2)
    return float(out) if out.ndim == 0 else out


def effective_sd(sd: SpectralDensity, ts: TransitionSpectrum) -> float:
    """Spectral density seen by the transition, J convolved with its line shape."""
    return _jeff(sd, ts.center, ts.width)


def _jeff(sd, center, width):
    if sd.is_zero:
        return 0.0
    if width == 0:
        n = sd.temperature
        val = 0.0
        if center > 0:
            val += sd(center) * (bose_occupation(center, n) + 1.0)
        elif center < 0:
            val += sd(-center) * bose_occupation(-center, n)
        return float(val)
    val = _kernel_integral(sd, _weight(sd, False), center, width, +1, real_only=True)
    if sd.temperature > 0:
        val += _kernel_integral(sd, _weight(sd, True), -center, width, +1, real_only=True)
    return max(val / np.pi, 0.0)


def effective_sd_curve(sd: SpectralDensity, omegas, width) -> np.ndarray:
    """J^eff on a grid of transition energies for a fixed width gamma_i + gamma_f.

    For ``width > 0`` all grid points are integrated together by vector-valued
    adaptive quadrature, which is far cheaper than one scalar integral per point.
    """
    if width < 0:
        raise ValueError("width must be >= 0")
    centers = np.asarray(omegas, dtype=float)
    if width == 0 or sd.is_zero:
        return np.array([_jeff(sd, float(w), float(width)) for w in centers.ravel()]
                        ).reshape(centers.shape)
    half = 0.5 * width
    out = _quad_vec(_weight(sd, False), sd, centers, half)
    if sd.temperature > 0:
        out = out + _quad_vec(_weight(sd, True), sd, -centers, half)
    return np.clip(out, 0.0, None)


def effective_density_table(sd: SpectralDensity, width, omegas=None) -> SpectralDensity:
    """Tabulated J^eff for a fixed width, usable as a bath in its own right.

    The table is pinned to zero at omega = 0 so that the principal-value part
    of F stays finite for degenerate (zero-frequency) transitions.
    """
    if omegas is None:
        lo, hi = sd.support()
        omegas = np.linspace(0.0, min(hi, 4 * max(sd.breakpoints().max(), 1e-3)), 2001)
    w = np.asarray(omegas, dtype=float)
    if w[0] > 0:
        w = np.concatenate([[0.0], w])
    vals = effective_sd_curve(sd, w, width)
    vals[0] = 0.0
    return SpectralDensity.tabulated(w, vals, temperature=sd.temperature)


def _quad_vec(weight, sd, centers, half):
    total = np.zeros(centers.shape)
    for a, b in _segments(sd):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad_vec(
                lambda w: weight(w) * (half / np.pi) / ((w - centers) ** 2 + half**2),
                a, b, epsabs=EPSABS, epsrel=EPSREL, norm="max", limit=5000)
        tol = max(EPSABS, EPSREL * float(np.max(np.abs(val), initial=0.0)))
        if not np.all(np.isfinite(val)) or err > 100 * tol:
            raise QuadratureError("J_eff curve", err, tol)
        total += val
    return total


# Stand-in for a measured vibronic density of a J-aggregate dye: nine modes
# between 0 and 0.4 eV, thinning out around 0.2 eV.  Entries are (g, omega,
# kappa); kappa is kept >= 12 meV so that broadening by 0.1 meV is already
# below a percent of the peak.
SURROGATE_PEAKS = (
    (0.012, 0.025, 0.014),
    (0.010, 0.065, 0.012),
    (0.014, 0.110, 0.012),
    (0.018, 0.150, 0.012),
    (0.024, 0.172, 0.012),
    (0.024, 0.226, 0.012),
    (0.018, 0.255, 0.012),
    (0.012, 0.300, 0.012),
    (0.010, 0.360, 0.014),
)


def surrogate_structured_density(scale=1.0, temperature=0.0) -> SpectralDensity:
    """Structured multi-peak density used in place of tabulated dye data."""
    peaks = [(g * math.sqrt(scale), w, k) for g, w, k in SURROGATE_PEAKS]
    return SpectralDensity.composite(peaks, temperature=temperature)
