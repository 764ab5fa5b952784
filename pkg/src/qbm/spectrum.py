"""Exact diagonalization of the arrowhead Hamiltonian via its secular equation.

Eigenvalues alpha of the one-excitation Hamiltonian are the roots of

    F(alpha) = alpha - omega0 - sum_n g_n^2 / (alpha - omega_n) = 0.

F is strictly increasing between consecutive bath poles and runs from
-inf to +inf on each of the N+1 open intervals

    (-inf, omega_1), (omega_1, omega_2), ..., (omega_N, +inf),

so there is exactly one simple root per interval and the spectrum
interlaces the bath grid:

    alpha_0 < omega_1 < alpha_1 < omega_2 < ... < omega_N < alpha_N.

The normalized eigenvector for root alpha_nu has squared overlap with the
distinguished oscillator

    w_nu = 1 / (1 + sum_n (g_n / (alpha_nu - omega_n))^2) = 1 / F'(alpha_nu)

and bath components c_nu(n) = g_n sqrt(w_nu) / (alpha_nu - omega_n).
Completeness of the eigenbasis gives the moment sum rules

    sum_nu w_nu = 1,
    sum_nu alpha_nu w_nu = omega0,
    sum_nu alpha_nu^2 w_nu = omega0^2 + sum_n g_n^2,

which are exact in exact arithmetic and serve as the standing accuracy
check on any computed spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    PoleEvaluation,
    RootNotBracketed,
    ToleranceNotReached,
)
from .model import DiscretizedBath, hamiltonian_matrix

_EPS = float(np.finfo(float).eps)

# relative offset at which brackets enter an interval from its poles
_POLE_OFFSET = 1e-13
# relative width at which bisection stops
_WIDTH_TOL = 1e-14
_MAX_BISECT = 200


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues and oscillator weights of a diagonalized model.

    alphas[nu] is the nu-th eigenvalue (ascending), weights[nu] the squared
    overlap of its eigenvector with the distinguished oscillator.  The bath
    that produced the spectrum is kept so downstream evolution routines are
    self-contained.
    """

    alphas: np.ndarray
    weights: np.ndarray
    omega0: float
    bath: DiscretizedBath

    def __post_init__(self) -> None:
        al = np.asarray(self.alphas, dtype=float).copy()
        w = np.asarray(self.weights, dtype=float).copy()
        if al.ndim != 1 or w.shape != al.shape:
            raise ValueError("alphas and weights must be 1-d arrays of equal length")
        if al.size != self.bath.n + 1:
            raise ValueError("spectrum must hold exactly N+1 eigenvalues")
        if np.any(np.diff(al) <= 0.0):
            raise RootNotBracketed("eigenvalues not strictly increasing")
        om = self.bath.omegas
        if not (
            np.all(al[:-1] < om) and np.all(om < al[1:])
        ):  # alpha_nu < omega_{nu+1} < alpha_{nu+1}
            raise RootNotBracketed("eigenvalues do not interlace the bath grid")
        if np.any(w <= 0.0) or np.any(w > 1.0 + 1e-12):
            raise ValueError("weights must lie in (0, 1]")
        al.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "alphas", al)
        object.__setattr__(self, "weights", w)

    @property
    def n_levels(self) -> int:
        return self.alphas.size

    @property
    def tau_omega(self) -> float:
        """Bare oscillator period 2*pi/omega0."""
        return 2.0 * np.pi / self.omega0


def secular_residual(alpha: float, bath: DiscretizedBath, omega0: float) -> float:
    """F(alpha) = alpha - omega0 - sum_n g_n^2 / (alpha - omega_n).

    Refuses to evaluate within machine resolution of a pole: |alpha - omega_n|
    below 4*eps*max(1, |alpha|, |omega_n|) raises PoleEvaluation rather than
    returning a catastrophically cancelled number.
    """
    a = float(alpha)
    d = a - bath.omegas
    guard = 4.0 * _EPS * np.maximum(1.0, np.maximum(abs(a), np.abs(bath.omegas)))
    if np.any(np.abs(d) < guard):
        raise PoleEvaluation(f"secular function evaluated at a pole (alpha = {a!r})")
    return a - omega0 - float(np.sum(bath.couplings**2 / d))


def _entry_point(pole: float, side: int, f) -> tuple[float, float]:
    """Step into an interval from `pole` on the given side (+1 above, -1 below)
    until the residual has the sign a bracket endpoint needs (negative just
    above a pole, positive just below).  The offset starts at the standard
    relative value and shrinks geometrically if the first try lands past the
    root, which can happen for very weakly coupled modes."""
    off = _POLE_OFFSET * max(1.0, abs(pole))
    floor = 4.0 * np.spacing(max(1.0, abs(pole)))
    for _ in range(80):
        x = pole + side * off
        v = f(x)
        if side > 0 and v < 0.0:
            return x, v
        if side < 0 and v > 0.0:
            return x, v
        off *= 0.125
        if off < floor:
            break
    raise RootNotBracketed(
        f"no sign change reachable next to pole at omega = {pole!r}"
    )


def _expand_out(start: float, side: int, width0: float, f) -> tuple[float, float]:
    """Find an outer endpoint with the closing sign (F > 0 above the band,
    F < 0 below) by geometric expansion of the initial width."""
    width = max(width0, _POLE_OFFSET * max(1.0, abs(start)))
    for _ in range(200):
        x = start + side * width
        v = f(x)
        if side > 0 and v > 0.0:
            return x, v
        if side < 0 and v < 0.0:
            return x, v
        width *= 2.0
    raise RootNotBracketed(
        f"no outer bracket within width {width!r} from {start!r}"
    )


def _bisect(f, lo: float, hi: float) -> float:
    """Bisection on a bracket with f(lo) < 0 < f(hi), to relative width
    1e-14, followed by up to three Newton corrections clamped to the
    bracket.  Newton uses F'(x) = 1 + sum g^2/(x-omega)^2 >= 1, so the
    steps are always well scaled."""
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):  # resolution floor of the grid
            return mid
        v = f(mid)
        if v < 0.0:
            lo = mid
        elif v > 0.0:
            hi = mid
        else:
            return mid
        if (hi - lo) <= _WIDTH_TOL * max(1.0, abs(mid)):
            return 0.5 * (lo + hi)
    raise ToleranceNotReached(
        f"bisection exhausted {_MAX_BISECT} iterations on [{lo!r}, {hi!r}]"
    )


def _polish(x: float, lo: float, hi: float, bath: DiscretizedBath, omega0: float) -> float:
    g2 = bath.couplings**2
    for _ in range(3):
        d = x - bath.omegas
        if np.any(d == 0.0):
            return x
        fv = x - omega0 - float(np.sum(g2 / d))
        fp = 1.0 + float(np.sum(g2 / d**2))
        step = fv / fp
        xn = x - step
        if not (lo < xn < hi):
            return x
        x = xn
        if abs(step) <= _EPS * max(1.0, abs(x)):
            break
    return x


def solve_spectrum(bath: DiscretizedBath, omega0: float) -> Spectrum:
    """Locate all N+1 secular roots by bracketed bisection.

    One bracket per interlacing interval: interior brackets enter from the
    bounding poles at a relative offset of 1e-13, the two outer brackets
    grow geometrically from an initial width sum_n |g_n| (the coupling
    scale bounds how far the band edges are pushed).  Bisection holds the
    sign invariant F(lo) < 0 < F(hi) throughout, so every root it returns
    is certified by its final bracket.
    """
    om = bath.omegas
    g = bath.couplings
    n = bath.n

    def f(x: float) -> float:
        return secular_residual(x, bath, omega0)

    alphas = np.empty(n + 1, dtype=float)
    coupling_scale = float(np.sum(np.abs(g)))

    # below the band
    lo_x, _ = _expand_out(om[0], -1, coupling_scale + max(0.0, om[0] - omega0), f)
    hi_x, _ = _entry_point(om[0], -1, f)
    alphas[0] = _polish(_bisect(f, lo_x, hi_x), lo_x, hi_x, bath, omega0)

    # interior intervals
    for i in range(n - 1):
        lo_x, _ = _entry_point(om[i], +1, f)
        hi_x, _ = _entry_point(om[i + 1], -1, f)
        if not lo_x < hi_x:
            raise RootNotBracketed(
                f"interval ({om[i]!r}, {om[i + 1]!r}) too narrow to bracket"
            )
        alphas[i + 1] = _polish(_bisect(f, lo_x, hi_x), lo_x, hi_x, bath, omega0)

    # above the band
    lo_x, _ = _entry_point(om[-1], +1, f)
    hi_x, _ = _expand_out(om[-1], +1, coupling_scale + max(0.0, omega0 - om[-1]), f)
    alphas[n] = _polish(_bisect(f, lo_x, hi_x), lo_x, hi_x, bath, omega0)

    weights = _weights_for(alphas, bath)
    return Spectrum(alphas=alphas, weights=weights, omega0=float(omega0), bath=bath)


def _weights_for(alphas: np.ndarray, bath: DiscretizedBath) -> np.ndarray:
    # w_nu = 1 / F'(alpha_nu); the denominator differences are safe because
    # roots interlace the poles strictly.
    d = alphas[:, None] - bath.omegas[None, :]
    return 1.0 / (1.0 + np.sum((bath.couplings[None, :] / d) ** 2, axis=1))


def dense_diagonalize_oracle(bath: DiscretizedBath, omega0: float) -> Spectrum:
    """Independent route to the same Spectrum through a dense symmetric
    eigensolve of the arrowhead matrix.  Weights are the squared first
    components of the eigenvectors.  Meant for cross-checks and small to
    medium N (the matrix is built densely)."""
    if bath.n > 2000:
        raise ValueError("dense oracle limited to N <= 2000")
    h = hamiltonian_matrix(bath, omega0)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on real
        raise NoConvergence(str(exc)) from exc  # symmetric input is robust
    return Spectrum(
        alphas=vals,
        weights=vecs[0, :] ** 2,
        omega0=float(omega0),
        bath=bath,
    )


def overlap_matrix(spec: Spectrum, bath: DiscretizedBath | None = None) -> np.ndarray:
    """(N+1) x (N+1) matrix C with C[nu, 0] = sqrt(w_nu) and
    C[nu, n] = g_n sqrt(w_nu) / (alpha_nu - omega_n): the orthogonal change
    of basis from site amplitudes to eigenmode amplitudes."""
    b = spec.bath if bath is None else bath
    root_w = np.sqrt(spec.weights)
    c = np.empty((spec.n_levels, spec.n_levels), dtype=float)
    c[:, 0] = root_w
    c[:, 1:] = root_w[:, None] * b.couplings[None, :] / (
        spec.alphas[:, None] - b.omegas[None, :]
    )
    return c


def eigenvector_overlap(
    spec: Spectrum,
    bath: DiscretizedBath | None = None,
    n: int = 1,
    nu: int = 0,
) -> float:
    """Component of eigenvector nu on bath mode n (1-based bath index):
    c_nu(n) = g_n sqrt(w_nu) / (alpha_nu - omega_n)."""
    b = spec.bath if bath is None else bath
    if not 1 <= n <= b.n:
        raise IndexError(f"bath index n must be in 1..{b.n}, got {n}")
    if not 0 <= nu <= spec.n_levels - 1:
        raise IndexError(f"eigenvalue index nu must be in 0..{spec.n_levels - 1}")
    return float(
        b.couplings[n - 1]
        * np.sqrt(spec.weights[nu])
        / (spec.alphas[nu] - b.omegas[n - 1])
    )
