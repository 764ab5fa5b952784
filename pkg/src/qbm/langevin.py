"""Langevin-channel quantities of the exactly diagonalized model.

Everything here is a spectral sum over the diagonalized modes.  The three
moment signals

    S_k(t) = sum_nu alpha_nu^k w_nu exp(-i alpha_nu t),   k = 0, 1, 2,

carry all the time dependence: S_0 is the survival amplitude A(t) of the
distinguished oscillator, and its derivatives are analytic resummations
(dA/dt = -i S_1, d2A/dt2 = -S_2) rather than finite differences.  The
time-local frequency and damping coefficients of the mean-path equation

    X'' + Gamma(t) X' + Omega2(t) X = <f>/M

factorize through them:

    Omega2(t) = Re[S_1 conj(S_2)] / Re[S_1 conj(S_0)],
    Gamma(t)  = Im[conj(S_2) S_0] / Re[conj(S_1) S_0].

The overall sign of Gamma is fixed by the damping convention Gamma > 0:
with it Gamma(0) = 0 exactly and Gamma grows onto the golden-rule plateau
gamma_GR = 2 pi g(Omega)^2 / spacing, which is what the decay of |A|^2
shows.  The shared denominator has isolated zero crossings; samples taken
within 1e-12 (relative to sum |alpha| w) of one are flagged, not fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmplitudeVanishes, WindowTooShort
from .model import DiscretizedBath
from .spectrum import Spectrum

_DENOM_RTOL = 1e-12
_AMPLITUDE_FLOOR = 1e-12
_MIN_FIT_SAMPLES = 16


@dataclass(frozen=True)
class LangevinInput:
    """Initial mean position/momentum of the oscillator and its mass."""

    x0: float = 1.0
    p0: float = 0.0
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not (self.mass > 0.0):
            raise ValueError(f"mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class CoefficientSample:
    """Omega2(t) and Gamma(t) at one time; denominator_ok=False means the
    shared denominator passed through zero and the values are NaN."""

    time: float
    omega2: float
    gamma: float
    denominator_ok: bool


@dataclass(frozen=True)
class GammaEstimate:
    """Least-squares exponential decay rate of |A(t)|^2 over a window,
    with the fit intercept, rms residual of the linear model in
    -ln|A|^2, and the golden-rule surrogate for comparison."""

    gamma: float
    intercept: float
    rms_residual: float
    golden_rule: float
    window: tuple[float, float]
    n_samples: int


def moment_signal(spec: Spectrum, k: int, t):
    """S_k(t) = sum_nu alpha_nu^k w_nu exp(-i alpha_nu t) for k in {0, 1, 2}.

    Scalar t returns a complex scalar; an array of times returns the
    corresponding complex array.
    """
    if k not in (0, 1, 2):
        raise ValueError(f"moment order k must be 0, 1 or 2, got {k}")
    coeff = spec.weights * spec.alphas**k
    ts = np.asarray(t, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(ts, spec.alphas))
    val = phases @ coeff
    return complex(val) if ts.ndim == 0 else val


def _denominator_scale(spec: Spectrum) -> float:
    return float(np.sum(np.abs(spec.alphas) * spec.weights))


def coefficient_series(
    spec: Spectrum, times
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized fast-mode coefficients over an array of times.

    Returns (omega2, gamma, denominator_ok); flagged entries hold NaN.
    """
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    s0 = moment_signal(spec, 0, ts)
    s1 = moment_signal(spec, 1, ts)
    s2 = moment_signal(spec, 2, ts)
    den = np.real(np.conj(s1) * s0)
    ok = np.abs(den) >= _DENOM_RTOL * _denominator_scale(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        omega2 = np.real(s1 * np.conj(s2)) / den
        gamma = np.imag(np.conj(s2) * s0) / den
    omega2 = np.where(ok, omega2, np.nan)
    gamma = np.where(ok, gamma, np.nan)
    return omega2, gamma, ok


def coefficients(spec: Spectrum, t: float, mode: str = "fast") -> CoefficientSample:
    """Time-local Langevin coefficients at a single time.

    mode="fast" evaluates the factorized forms through S_0, S_1, S_2.
    mode="naive" evaluates the underlying pair sums

        Omega2 = sum_{nu,mu} cos(d t) a_nu a_mu^2 w_nu w_mu / D,
        Gamma  = sum_{nu,mu} sin(d t) a_nu^2 w_nu w_mu / D,
        D      = sum_{nu,mu} cos(d t) a_nu w_nu w_mu,
        d      = a_nu - a_mu,

    term by term; it is the O(N^2)-per-entry cross-check intended for
    N <= 32.  Both modes carry the same damping-positive sign convention.
    """
    tt = float(t)
    if mode == "fast":
        omega2, gamma, ok = coefficient_series(spec, tt)
        return CoefficientSample(
            time=tt,
            omega2=float(omega2[0]),
            gamma=float(gamma[0]),
            denominator_ok=bool(ok[0]),
        )
    if mode != "naive":
        raise ValueError(f"mode must be 'fast' or 'naive', got {mode!r}")
    al = spec.alphas
    w = spec.weights
    delta = al[:, None] - al[None, :]
    cosd = np.cos(delta * tt)
    sind = np.sin(delta * tt)
    ww = np.outer(w, w)
    den = float(np.sum(cosd * al[:, None] * ww))
    num_omega2 = float(np.sum(cosd * al[:, None] * al[None, :] ** 2 * ww))
    num_gamma = float(np.sum(sind * al[:, None] ** 2 * ww))
    ok = abs(den) >= _DENOM_RTOL * _denominator_scale(spec)
    if not ok:
        return CoefficientSample(tt, math.nan, math.nan, False)
    return CoefficientSample(tt, num_omega2 / den, num_gamma / den, True)


def gamma_from_survival(spec: Spectrum, t):
    """Instantaneous decay rate of the survival probability,

        -d ln|A(t)|^2 / dt = -2 Re[dA/dt / A] = -2 Re[-i S_1 / S_0],

    evaluated with the analytic derivative.  Raises AmplitudeVanishes if
    |A| is at (or below) 1e-12 anywhere in the request.
    """
    ts = np.asarray(t, dtype=float)
    s0 = moment_signal(spec, 0, ts)
    s1 = moment_signal(spec, 1, ts)
    a0 = np.abs(np.atleast_1d(s0))
    if np.any(a0 <= _AMPLITUDE_FLOOR):
        t_bad = np.atleast_1d(ts)[int(np.argmin(a0))]
        raise AmplitudeVanishes(
            f"|A(t)| = {float(a0.min()):.3e} at t = {float(t_bad)!r}"
        )
    val = -2.0 * np.real(-1j * s1 / s0)
    return float(val) if ts.ndim == 0 else val


def mean_position(spec: Spectrum, inp: LangevinInput, t):
    """Deterministic mean path

        X(t) = sum_nu w_nu cos(alpha_nu t) X(0)
             + sum_nu w_nu sin(alpha_nu t) P(0)/M,

    with the fluctuating force averaging to zero.  Linear in (X(0), P(0))
    by construction.
    """
    ts = np.asarray(t, dtype=float)
    arg = np.multiply.outer(ts, spec.alphas)
    cos_sum = np.cos(arg) @ spec.weights
    sin_sum = np.sin(arg) @ spec.weights
    val = cos_sum * inp.x0 + sin_sum * (inp.p0 / inp.mass)
    return float(val) if ts.ndim == 0 else val


def golden_rule_rate(bath: DiscretizedBath, omega0: float) -> float:
    """Golden-rule surrogate gamma_GR = 2 pi g(Omega)^2 / spacing, with
    g(Omega) the coupling of the bath mode closest to resonance and the
    spacing taken as the median frequency step.  NaN for N < 2 (no
    spacing is defined)."""
    if bath.n < 2:
        return math.nan
    g_res = bath.couplings[int(np.argmin(np.abs(bath.omegas - omega0)))]
    spacing = float(np.median(np.diff(bath.omegas)))
    return 2.0 * math.pi * float(g_res) ** 2 / spacing


def estimate_gamma(
    spec: Spectrum,
    fit_window: tuple[float, float],
    n_samples: int = 256,
) -> GammaEstimate:
    """Exponential decay rate of |A(t)|^2 over a window.

    Samples -ln|A(t)|^2 uniformly over [t0, t1] and fits a straight line
    by least squares; the slope is gamma.  The rms residual is reported so
    callers can tell a genuine exponential regime from a meaningless fit
    (two-level dynamics, for example, never decays and leaves a large
    residual).  The window must contain at least 16 samples.
    """
    t0, t1 = float(fit_window[0]), float(fit_window[1])
    if n_samples < _MIN_FIT_SAMPLES:
        raise WindowTooShort(
            f"need at least {_MIN_FIT_SAMPLES} samples, got {n_samples}"
        )
    if not t1 > t0:
        raise WindowTooShort(f"empty fit window [{t0}, {t1}]")
    ts = np.linspace(t0, t1, n_samples)
    a = moment_signal(spec, 0, ts)
    p = np.abs(a) ** 2
    if np.any(p <= _AMPLITUDE_FLOOR**2):
        raise AmplitudeVanishes("survival probability vanishes inside fit window")
    y = -np.log(p)
    slope, intercept = np.polyfit(ts, y, 1)
    resid = y - (slope * ts + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return GammaEstimate(
        gamma=float(slope),
        intercept=float(intercept),
        rms_residual=rms,
        golden_rule=golden_rule_rate(spec.bath, spec.omega0),
        window=(t0, t1),
        n_samples=int(n_samples),
    )


def recurrence_time(spec: Spectrum) -> float:
    """t_r = 2 pi / min(alpha_{nu+1} - alpha_nu): the beat period of the
    closest eigenvalue pair, after which the quasi-continuum rephases.
    For a single bath mode (two eigenvalues) this is the beat period of
    the doublet.  The companion scale tau_omega = 2 pi / Omega lives on
    the Spectrum itself."""
    gaps = np.diff(spec.alphas)
    return 2.0 * math.pi / float(gaps.min())
