"""One-dimensional oscillatory integrals  I = int_a^b exp(-i omega gamma(x)) eta(x) dx.

Three services: accurate evaluation by phase-adapted Gauss-Legendre panels,
van der Corput upper bounds, and a lower bound at a nondegenerate stationary
point obtained by straightening the phase to a quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf, erfc

from .errors import DegenerateCritical, HypothesisFail, TolNotMet

Fn = Callable[[np.ndarray], np.ndarray]

#: van der Corput constants for k = 1, 2 (5 * 2^{k-1} - 2)
VDC_CONSTANTS = {1: 3.0, 2: 8.0}

_GL_ORDER = 24
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class OscillatoryProblem:
    """Data of  int_a^b exp(-i omega gamma(x)) eta(x) dx.

    ``phase_derivs`` lists gamma', gamma'', ... as far as known (up to order 4).
    All callables take and return numpy arrays.  The derivative callables are
    compared against centred differences at five seeded points when the problem
    is built.
    """

    phase: Fn
    amplitude: Fn
    a: float
    b: float
    omega: float
    phase_derivs: tuple = ()
    amplitude_deriv: Fn | None = None
    label: str = ""
    check: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if len(self.phase_derivs) > 4:
            raise ValueError("at most four phase derivatives")
        if self.check:
            self._check_derivatives()

    def _check_derivatives(self) -> None:
        rng = np.random.default_rng(12345)
        width = self.b - self.a
        x = self.a + width * (0.05 + 0.9 * rng.random(5))
        h = 1e-5 * width
        chain = [self.phase, *self.phase_derivs]
        pairs = list(zip(chain[:-1], chain[1:]))
        if self.amplitude_deriv is not None:
            pairs.append((self.amplitude, self.amplitude_deriv))
        for f, df in pairs:
            fd = (np.asarray(f(x + h)) - np.asarray(f(x - h))) / (2 * h)
            exact = np.asarray(df(x))
            scale = np.maximum(1.0, np.abs(exact))
            if np.any(np.abs(fd - exact) > 1e-6 * scale):
                raise ValueError(f"derivative callable inconsistent in problem {self.label!r}")

    def derivative(self, k: int) -> Fn:
        if k == 0:
            return self.phase
        if k > len(self.phase_derivs):
            raise HypothesisFail(f"phase derivative of order {k} not supplied")
        return self.phase_derivs[k - 1]

    def with_omega(self, omega: float) -> "OscillatoryProblem":
        return OscillatoryProblem(self.phase, self.amplitude, self.a, self.b, omega, self.phase_derivs,
                                  self.amplitude_deriv, self.label, check=False)


@dataclass(frozen=True)
class CriticalPoint:
    x0: float
    gamma2: float

    @classmethod
    def locate(cls, prob: OscillatoryProblem, guess: float | None = None) -> "CriticalPoint":
        """Newton iteration on gamma' from ``guess`` (default: midpoint)."""
        d1, d2 = prob.derivative(1), prob.derivative(2)
        x = 0.5 * (prob.a + prob.b) if guess is None else guess
        for _ in range(100):
            curvature = float(d2(np.array([x]))[0])
            if curvature == 0:
                raise HypothesisFail(f"gamma'' vanishes at {x}; Newton step undefined")
            step = float(d1(np.array([x]))[0]) / curvature
            x = min(max(x - step, prob.a), prob.b)
            if abs(step) < 1e-15 * max(1.0, abs(x)):
                break
        return cls.at(prob, x)

    @classmethod
    def at(cls, prob: OscillatoryProblem, x0: float) -> "CriticalPoint":
        if not prob.a < x0 < prob.b:
            raise HypothesisFail(f"critical point {x0} not inside ({prob.a}, {prob.b})")
        g1 = float(prob.derivative(1)(np.array([x0]))[0])
        g2 = float(prob.derivative(2)(np.array([x0]))[0])
        if abs(g1) >= 1e-10:
            raise HypothesisFail(f"gamma'({x0}) = {g1:.3e} is not zero")
        return cls(float(x0), g2)


# ---------------------------------------------------------------------------
# evaluation


def _phase_edges(prob: OscillatoryProblem, panels_hint: int) -> np.ndarray:
    """Panel edges equidistributing the phase variation omega*|d gamma|."""
    x = np.linspace(prob.a, prob.b, 4097)
    g = np.asarray(prob.phase(x), dtype=float)
    variation = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(g)))])
    total = prob.omega * variation[-1]
    count = max(panels_hint, int(math.ceil(total / math.pi)))
    if variation[-1] == 0:
        return np.linspace(prob.a, prob.b, count + 1)
    # blend phase variation with arc length so flat stretches still get panels
    weight = variation / variation[-1] + np.linspace(0.0, 1.0, x.size) / max(1.0, total / math.pi)
    weight /= weight[-1]
    return np.interp(np.linspace(0.0, 1.0, count + 1), weight, x)


def _panel_sum(prob: OscillatoryProblem, edges: np.ndarray) -> complex:
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    vals = np.exp(-1j * prob.omega * np.asarray(prob.phase(nodes))) * np.asarray(prob.amplitude(nodes))
    return complex(np.sum(weights * vals))


# Beyond this many phase half-turns the panel rule gives way to the
# Fourier-Filon evaluation below (when its hypotheses hold).
HIGH_FREQUENCY_SWITCH = 20_000


def _gaussian_segment(A: float, lo: float, hi: float, beta: np.ndarray) -> np.ndarray:
    """int_lo^hi exp(-i A y^2 + i beta (y - lo)) dy for each beta, in closed form.

    Completing the square leaves an error function of argument sqrt(iA)(y - c);
    when both ends sit on the same side of the centre c the difference is
    taken between erfc values to avoid cancelling two numbers close to 1.
    """
    c = beta / (2.0 * A)
    root = np.sqrt(1j * A)
    d_hi, d_lo = hi - c, lo - c
    z_hi, z_lo = root * d_hi, root * d_lo
    diff = np.where(d_lo > 0, erfc(z_lo) - erfc(z_hi),
                    np.where(d_hi < 0, erfc(-z_hi) - erfc(-z_lo), erf(z_hi) - erf(z_lo)))
    return np.exp(-1j * beta * lo + 1j * beta * beta / (4.0 * A)) * (0.5 * math.sqrt(math.pi) / root) * diff


def _linear_segment(omega: float, lo: float, hi: float, beta: np.ndarray) -> np.ndarray:
    """int_lo^hi exp(-i omega u + i beta (u - lo)) du for beta on the 2 pi / (hi - lo) lattice."""
    width = hi - lo
    gap = beta - omega
    safe = np.where(gap == 0, 1.0, gap)
    out = (np.exp(-1j * omega * width) - 1.0) / (1j * safe)
    return np.exp(-1j * omega * lo) * np.where(gap == 0, width, out)


def _fourier_filon(density: Fn, lo: float, hi: float, kernel: Callable[[np.ndarray], np.ndarray],
                   tol: float, *, start: int = 512, limit: int = 2**20) -> complex | None:
    """sum_m c_m K(beta_m) for the trigonometric interpolant of ``density`` on [lo, hi].

    ``density`` must vanish to high order at both ends so that its periodic
    extension is smooth.  The sample count doubles until two levels agree.
    """
    width = hi - lo
    previous = None
    count = start
    while count <= limit:
        y = lo + width * np.arange(count) / count
        coef = np.fft.fft(np.asarray(density(y), dtype=complex)) / count
        m = np.fft.fftfreq(count, d=1.0 / count)
        value = complex(np.sum(coef * kernel(2.0 * np.pi * m / width)))
        if previous is not None and abs(value - previous) <= tol:
            return value
        previous = value
        count *= 2
    return None


def _integrate_high_frequency(prob: OscillatoryProblem, tol: float) -> complex | None:
    """Frequency-independent evaluation for amplitudes vanishing at both ends.

    The phase is straightened: to u = gamma(x) when gamma' keeps one sign, or to
    the quadratic gamma(x0) + gamma''(x0) y^2/2 around a single nondegenerate
    critical point.  The transported amplitude is expanded in a Fourier series
    whose terms integrate against the straightened exponential in closed form.
    Returns None when the hypotheses are not met.
    """
    if len(prob.phase_derivs) < 2:
        return None
    x = np.linspace(prob.a, prob.b, 4097)
    eta = np.abs(np.asarray(prob.amplitude(x)))
    if eta.max() == 0:
        return 0j
    if max(eta[0], eta[-1]) > 1e-13 * eta.max():
        return None
    d1 = np.asarray(prob.derivative(1)(x), dtype=float)
    d2 = np.asarray(prob.derivative(2)(x), dtype=float)
    omega = prob.omega
    if np.all(d1 > 0) or np.all(d1 < 0):
        u = np.asarray(prob.phase(x), dtype=float)
        order = np.argsort(u)
        x_of_u = CubicSpline(u[order], x[order])

        def density(v):
            xv = np.clip(x_of_u(v), prob.a, prob.b)
            return np.asarray(prob.amplitude(xv)) / np.abs(np.asarray(prob.derivative(1)(xv)))

        return _fourier_filon(density, float(u.min()), float(u.max()),
                              lambda beta: _linear_segment(omega, float(u.min()), float(u.max()), beta), tol)
    if not (np.all(d2 > 0) or np.all(d2 < 0)):
        return None
    cp = CriticalPoint.locate(prob, float(x[np.argmin(np.abs(d1))]))
    xk, y, dydx = _straighten(prob, cp, 40001)
    x_of_y = CubicSpline(y, xk)
    A = 0.5 * omega * cp.gamma2
    lo, hi = float(y[0]), float(y[-1])

    def density(v):
        xv = np.clip(x_of_y(v), prob.a, prob.b)
        g1 = np.asarray(prob.derivative(1)(xv))
        near = np.abs(v) < 1e-300
        jac = np.where(near, 1.0, cp.gamma2 * v / np.where(near, 1.0, g1))
        return np.asarray(prob.amplitude(xv)) * jac

    phase0 = complex(np.exp(-1j * omega * float(prob.phase(np.array([cp.x0]))[0])))
    inner = _fourier_filon(density, lo, hi, lambda beta: _gaussian_segment(A, lo, hi, beta), tol)
    return None if inner is None else phase0 * inner


def integrate(prob: OscillatoryProblem, tol: float = 1e-10, *, max_panels: int = 10**6,
              min_panels: int = 8) -> complex:
    """Phase-adapted composite Gauss-Legendre; panel count doubled until two levels agree within tol.

    Very oscillatory problems whose amplitude vanishes at both ends go through a
    Fourier-Filon rule instead, whose cost does not grow with omega.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.linspace(prob.a, prob.b, 1025)
    turns = prob.omega * float(np.sum(np.abs(np.diff(np.asarray(prob.phase(x), dtype=float))))) / math.pi
    if turns > HIGH_FREQUENCY_SWITCH:
        value = _integrate_high_frequency(prob, tol)
        if value is not None:
            return value
    count = min_panels
    edges = _phase_edges(prob, count)
    coarse = _panel_sum(prob, edges)
    while True:
        fine_edges = np.sort(np.concatenate([edges, 0.5 * (edges[1:] + edges[:-1])]))
        if fine_edges.size - 1 > max_panels:
            raise TolNotMet(f"{prob.label}: panel budget {max_panels} exhausted")
        fine = _panel_sum(prob, fine_edges)
        if abs(fine - coarse) <= tol:
            return fine
        edges, coarse = fine_edges, fine


# ---------------------------------------------------------------------------
# bounds


def amplitude_variation(prob: OscillatoryProblem, panels: int = 256) -> float:
    """int_a^b |eta'| (composite Gauss rule, or total variation of dense samples)."""
    if prob.amplitude_deriv is not None:
        edges = np.linspace(prob.a, prob.b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        weights = (half[:, None] * _GL_W[None, :]).ravel()
        return float(np.sum(weights * np.abs(prob.amplitude_deriv(nodes))))
    x = np.linspace(prob.a, prob.b, 200001)
    return float(np.sum(np.abs(np.diff(np.asarray(prob.amplitude(x))))))


def vdc_bound(prob: OscillatoryProblem, k: int, delta: float, *, samples: int = 4001) -> float:
    """C_k (omega delta)^{-1/k} (|eta(b)| + int |eta'|), after checking |gamma^(k)| >= delta.

    The |eta(b)| term makes the bound valid for amplitudes that do not vanish at
    the right endpoint; for amplitudes with eta(b) = 0 it is the usual form.
    For k = 1 the derivative gamma' must also be monotone, checked through the
    sign of gamma''.
    """
    if k not in VDC_CONSTANTS:
        raise ValueError("only k = 1 and k = 2 are supported")
    if not delta > 0:
        raise ValueError("delta must be positive")
    x = np.linspace(prob.a, prob.b, samples)
    dk = np.abs(np.asarray(prob.derivative(k)(x), dtype=float))
    if np.min(dk) < delta * (1 - 1e-12):
        raise HypothesisFail(f"|gamma^({k})| drops to {np.min(dk):.3e} < delta = {delta:.3e}")
    if k == 1:
        d2 = np.asarray(prob.derivative(2)(x), dtype=float)
        if np.any(d2 > 0) and np.any(d2 < 0):
            raise HypothesisFail("gamma' is not monotone on the interval")
    right = abs(complex(np.asarray(prob.amplitude(np.array([prob.b])))[0]))
    return VDC_CONSTANTS[k] * (prob.omega * delta) ** (-1.0 / k) * (right + amplitude_variation(prob))


def stationary_main_term(prob: OscillatoryProblem, cp: CriticalPoint) -> complex:
    """eta(x0) int exp(-i omega gamma''(x0) y^2 / 2 - y^2) dy, the Gaussian main term (without e^{-i omega gamma(x0)})."""
    eta0 = complex(np.asarray(prob.amplitude(np.array([cp.x0])))[0])
    return eta0 * np.sqrt(np.pi / (1 + 0.5j * prob.omega * cp.gamma2))


def _straighten(prob: OscillatoryProblem, cp: CriticalPoint, points: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes x_k (excluding x0), y(x_k) and dy/dx(x_k) for gamma(x) - gamma(x0) = gamma''(x0) y^2 / 2.

    The rise gamma(x) - gamma(x0) is accumulated from gamma' cell by cell, which
    keeps its relative accuracy close to x0 where direct subtraction would not.
    """
    g1 = prob.derivative(1)
    g2 = cp.gamma2
    x0 = cp.x0
    # nodes clustered at x0 on both sides
    u = np.linspace(0.0, 1.0, points // 2) ** 2
    left = x0 - (x0 - prob.a) * u[::-1]
    right = x0 + (prob.b - x0) * u
    edges = np.concatenate([left, right[1:]])
    gx, gw = np.polynomial.legendre.leggauss(8)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    cell = np.sum(gw[None, :] * np.asarray(g1(mid[:, None] + half[:, None] * gx[None, :])), axis=1) * half
    centre = left.size - 1
    rise = np.zeros(edges.size)
    rise[centre + 1:] = np.cumsum(cell[centre:])
    rise[:centre] = -np.cumsum(cell[:centre][::-1])[::-1]
    keep = edges != x0
    ratio = 2.0 * rise[keep] / g2
    if np.any(ratio < 0):
        raise HypothesisFail("phase is not convex/concave around the critical point")
    xk = edges[keep]
    y = np.sign(xk - x0) * np.sqrt(ratio)
    dydx = np.asarray(g1(xk)) / (g2 * y)
    return xk, y, dydx


def stationary_remainder_constant(prob: OscillatoryProblem, cp: CriticalPoint, *, points: int = 20001) -> float:
    """Total variation over the real line of q(y) = (Phi(y) - exp(-y^2) Phi(0)) / y.

    Here y = xi(x) straightens the phase, gamma(x) - gamma(x0) = gamma''(x0) y^2 / 2,
    and Phi(y) = eta(x(y)) dx/dy.  Jumps at the ends of the y-range (amplitudes
    not vanishing at a or b) and the two Gaussian tails are included.
    """
    x0 = cp.x0
    xk, y, dydx = _straighten(prob, cp, points)
    phi = np.asarray(prob.amplitude(xk)) / dydx
    phi0 = complex(np.asarray(prob.amplitude(np.array([x0])))[0])
    q = (phi - np.exp(-y * y) * phi0) / y
    if np.any(~np.isfinite(q)):
        raise HypothesisFail("straightening map degenerates")
    tv = float(np.sum(np.abs(np.diff(q))))
    ya, yb = y[0], y[-1]
    tails = abs(phi0) * (math.exp(-ya * ya) / abs(ya) + math.exp(-yb * yb) / abs(yb))
    jumps = abs(phi[0] / ya) + abs(phi[-1] / yb)
    return tv + tails + jumps


def stationary_lower(prob: OscillatoryProblem, cp: CriticalPoint, j: int = 0) -> tuple[float, float]:
    """Lower bound for |I| at a nondegenerate stationary point, and the threshold beyond which it holds.

    With omega = t 2^{2j} the returned bound is
    (sqrt(pi)/2) (omega |gamma''(x0)|)^{-1/2} |eta(x0)|
    and the threshold is in units of t: it holds for t > T.
    """
    if abs(cp.gamma2) < 1e-8:
        raise DegenerateCritical(f"gamma''(x0) = {cp.gamma2:.3e}")
    x = np.linspace(prob.a, prob.b, 2001)
    d2 = np.asarray(prob.derivative(2)(x), dtype=float)
    if np.any(d2 * cp.gamma2 <= 0):
        raise HypothesisFail("gamma'' changes sign on the interval")
    eta0 = abs(complex(np.asarray(prob.amplitude(np.array([cp.x0])))[0]))
    if eta0 == 0:
        raise HypothesisFail("amplitude vanishes at the critical point")
    g2 = abs(cp.gamma2)
    c_tv = stationary_remainder_constant(prob, cp)
    c_prime = 2.0**0.25 * c_tv / (math.sqrt(2 * math.pi) * eta0 * math.sqrt(g2))
    threshold_omega = max(4.0 * c_prime**2, 2.0 / g2)
    lower = 0.5 * math.sqrt(math.pi) * (prob.omega * g2) ** -0.5 * eta0
    return lower, threshold_omega / 4.0**j


def corpus(omega_values: Sequence[float] = (37.0, 150.0, 520.0, 1000.0)) -> list[OscillatoryProblem]:
    """Twenty reference problems: five phase/amplitude families at four frequencies."""

    def bump(c, w):
        def f(x):
            z = (np.asarray(x) - c) / w
            inside = np.abs(z) < 1
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(inside, np.exp(-1.0 / np.where(inside, 1 - z * z, 1.0)), 0.0)

        def df(x):
            z = (np.asarray(x) - c) / w
            inside = np.abs(z) < 1
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                d = 1 - z * z
                val = np.exp(-1.0 / np.where(inside, d, 1.0)) * (-2 * z / np.where(inside, d, 1.0) ** 2) / w
            return np.where(inside, val, 0.0)

        return f, df

    b1, db1 = bump(0.0, 1.0)
    b2, db2 = bump(0.3, 0.6)
    families = [
        ("quadratic-bump", lambda x: x * x, (lambda x: 2 * x, lambda x: 2 + 0 * x), b1, db1, -1.0, 1.0),
        ("linear-one", lambda x: x, (lambda x: 1 + 0 * x, lambda x: 0 * x), lambda x: 1 + 0 * np.asarray(x),
         lambda x: 0 * np.asarray(x), 0.2, 1.7),
        ("cubic-gauss", lambda x: x**3 / 3 - x, (lambda x: x * x - 1, lambda x: 2 * x),
         lambda x: np.exp(-np.asarray(x) ** 2), lambda x: -2 * x * np.exp(-np.asarray(x) ** 2), 0.2, 2.0),
        ("sqrt-phase", lambda x: np.sqrt(1 + x * x) - 0.5 * x,
         (lambda x: x / np.sqrt(1 + x * x) - 0.5, lambda x: (1 + x * x) ** -1.5), b2, db2, -0.3, 0.9),
        ("cos-poly", lambda x: np.cos(x), (lambda x: -np.sin(x), lambda x: -np.cos(x)),
         lambda x: (1 + np.asarray(x)) ** 2 * (1 - np.asarray(x)),
         lambda x: (1 + np.asarray(x)) * (1 - 3 * np.asarray(x)), -0.8, 1.0),
    ]
    out = []
    for name, g, dg, h, dh, a, b in families:
        for om in omega_values:
            out.append(OscillatoryProblem(g, h, a, b, om, dg, dh, f"{name}@{om:g}"))
    return out
