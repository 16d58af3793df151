"""Dyadic profile, Littlewood-Paley kernels on the Kohn and full-Laplacian scales.

The profile ``R`` is built in the logarithmic variable ``u = log2(tau)``: a bump
``chi`` equal to 1 for ``|u| <= 1`` and 0 for ``|u| >= 2`` is normalized by its
dyadic translates ``chi(2^{-2k} tau)``, which shift ``u`` by ``2k``.  At most
two translates are nonzero at any ``tau``, so the normalizer is a short sum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ZeroDenominator
from .spectral_core import (GroupParams, RadialFunction, SpectralSymbol, central_grid, inverse_transform,
                            plancherel_norm, radial_grid)

LN2 = math.log(2.0)


def _glue(x: np.ndarray, sharpness: float) -> np.ndarray:
    """exp(-a/x) for x > 0, zero otherwise."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(x > 0, np.exp(-sharpness / np.where(x > 0, x, 1.0)), 0.0)


def _glue_prime(x: np.ndarray, sharpness: float) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        safe = np.where(x > 0, x, 1.0)
        return np.where(x > 0, sharpness / safe**2 * np.exp(-sharpness / safe), 0.0)


@dataclass(frozen=True)
class DyadicProfile:
    """Smooth R >= 0 supported in [1/4, 4] with sum_j R(2^{-2j} tau) = 1 on tau > 0."""

    transition_sharpness: float = 1.0

    def __post_init__(self) -> None:
        if not self.transition_sharpness > 0:
            raise ValueError("transition_sharpness must be positive")

    support = (0.25, 4.0)

    def _step(self, x):
        x = np.clip(x, 0.0, 1.0)
        a = _glue(x, self.transition_sharpness)
        b = _glue(1.0 - x, self.transition_sharpness)
        return a / (a + b)

    def _step_prime(self, x):
        inside = (x > 0) & (x < 1)
        xc = np.clip(x, 0.0, 1.0)
        a, b = _glue(xc, self.transition_sharpness), _glue(1.0 - xc, self.transition_sharpness)
        da, db = _glue_prime(xc, self.transition_sharpness), _glue_prime(1.0 - xc, self.transition_sharpness)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = (da * b + a * db) / (a + b) ** 2
        return np.where(inside, val, 0.0)

    def bump(self, tau):
        """chi(tau): 1 on [1/2, 2], 0 outside (1/4, 4)."""
        tau = np.asarray(tau, dtype=float)
        pos = tau > 0
        u = np.log2(np.where(pos, tau, 1.0))
        return np.where(pos, self._step(2.0 - np.abs(u)), 0.0)

    def _bump_u(self, u):
        return self._step(2.0 - np.abs(u))

    def _bump_u_prime(self, u):
        return -np.sign(u) * self._step_prime(2.0 - np.abs(u))

    def _normalizer(self, u):
        k = np.round(u / 2.0)
        return sum(self._bump_u(u - 2.0 * (k + d)) for d in (-1, 0, 1))

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        pos = tau > 0
        u = np.log2(np.where(pos, tau, 1.0))
        out = np.where(pos, self._bump_u(u) / self._normalizer(u), 0.0)
        return out if out.ndim else float(out)

    def derivative(self, tau):
        """dR/dtau, from the quotient rule in the log variable."""
        tau = np.asarray(tau, dtype=float)
        pos = tau > 0
        safe = np.where(pos, tau, 1.0)
        u = np.log2(safe)
        k = np.round(u / 2.0)
        den = self._normalizer(u)
        den_u = sum(self._bump_u_prime(u - 2.0 * (k + d)) for d in (-1, 0, 1))
        num, num_u = self._bump_u(u), self._bump_u_prime(u)
        d_u = (num_u * den - num * den_u) / den**2
        out = np.where(pos, d_u / (safe * LN2), 0.0)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {"transition_sharpness": self.transition_sharpness}


def build_profile(transition_sharpness: float = 1.0) -> DyadicProfile:
    return DyadicProfile(float(transition_sharpness))


class OperatorTag(str, enum.Enum):
    KOHN = "kohn"
    FULL = "full"

    @classmethod
    def parse(cls, value) -> "OperatorTag":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def spectral_variable(tag: OperatorTag, m, lam, n: int):
    """Eigenvalue of the operator on the (m, lam) spherical function."""
    kohn = 4.0 * (2 * np.asarray(m) + n) * np.abs(lam)
    return kohn if tag is OperatorTag.KOHN else kohn + np.asarray(lam) ** 2


def _full_band(j: int, big_m: float) -> tuple[float, float]:
    """|lam| range where 4 M |lam| + lam^2 lies in [2^{2j-2}, 2^{2j+2}]."""
    lo = math.sqrt(4 * big_m * big_m + 2.0 ** (2 * j - 2)) - 2 * big_m
    hi = math.sqrt(4 * big_m * big_m + 2.0 ** (2 * j + 2)) - 2 * big_m
    return lo, hi


def _kohn_band(j: int, big_m: float) -> tuple[float, float]:
    return 2.0 ** (2 * j - 4) / big_m, 2.0 ** (2 * j) / big_m


def lp_symbol(tag: OperatorTag, j: int, profile: DyadicProfile, params: GroupParams,
              *, positive_only: bool = False, single_mode: int | None = None) -> SpectralSymbol:
    """R(2^{-2j} x) with x the Kohn or full-Laplacian eigenvalue.

    ``single_mode`` keeps only that mode; together with ``positive_only`` this
    produces the m = 0, lam > 0 bumps used for sharpness tests.
    """
    tag = OperatorTag.parse(tag)
    n = params.n
    scale = 2.0 ** (-2 * j)
    top = 2.0 ** (2 * j + 2)

    def value(m, lam):
        out = profile(scale * spectral_variable(tag, m, lam, n))
        if single_mode is not None:
            out = np.where(np.asarray(m) == single_mode, out, 0.0)
        return out

    if tag is OperatorTag.KOHN:
        band = _kohn_band

        def limit(a):
            a = np.asarray(a, dtype=float)
            with np.errstate(divide="ignore"):
                big = top / (4.0 * a)
            return np.floor((np.minimum(big, 1e15) - n) / 2.0).astype(np.int64)
    else:
        band = _full_band

        def limit(a):
            a = np.asarray(a, dtype=float)
            with np.errstate(divide="ignore"):
                big = (top - a * a) / (4.0 * a)
            return np.floor((np.minimum(big, 1e15) - n) / 2.0).astype(np.int64)

    if single_mode is not None:
        full_limit = limit
        mode = single_mode

        def limit(a):
            return np.where(full_limit(a) >= mode, mode, -1)

    def support(m):
        if single_mode is not None and m != single_mode:
            return None
        return band(j, 2 * m + n)

    lam_max = band(j, (single_mode or 0) * 2 + n)[1]
    label = f"{'phi' if tag is OperatorTag.KOHN else 'psi'}_{j}"
    return SpectralSymbol(params, value, limit, lam_max, support, single_mode, positive_only, label,
                          {"tag": tag.value, "j": j, "profile": profile.to_dict()})


def vj_symbol(j: int, profile: DyadicProfile, params: GroupParams) -> SpectralSymbol:
    """Mode 0, positive frequencies, full-Laplacian scale."""
    sym = lp_symbol(OperatorTag.FULL, j, profile, params, positive_only=True, single_mode=0)
    return _relabel(sym, f"v_{j}")


def wj_symbol(j: int, profile: DyadicProfile, params: GroupParams) -> SpectralSymbol:
    """Mode 0, positive frequencies, Kohn scale."""
    sym = lp_symbol(OperatorTag.KOHN, j, profile, params, positive_only=True, single_mode=0)
    return _relabel(sym, f"w_{j}")


def _relabel(sym: SpectralSymbol, label: str) -> SpectralSymbol:
    return SpectralSymbol(sym.params, sym.value_fn, sym.mode_limit, sym.lam_max, sym.support_fn, sym.m_max,
                          sym.positive_only, label, dict(sym.meta, label=label))


# ---------------------------------------------------------------------------
# kernels


def natural_grids(tag: OperatorTag, j: int, params: GroupParams, *, r_extent: float = 64.0,
                  period: float = 8192.0, r_panels: int = 128, oversample: float = 2.0):
    """Grids that scale with the kernel: r ~ 2^{-j}, s ~ 2^{-2j} (or 2^{-j} for the full
    scale at large j, where the lam^2 term dominates).

    Returns ``(r, r_weights, s, s_weights)``.
    """
    r_max = r_extent * 2.0 ** (-j)
    s_scale = 2.0 ** (-2 * j) if (tag is OperatorTag.KOHN or j <= 0) else 2.0 ** (-j)
    span = period * s_scale
    lam_max = lp_symbol(tag, j, DyadicProfile(), params).lam_max
    points = int(math.ceil(oversample * span * lam_max / math.pi))
    points += points % 2
    r, wr = radial_grid(r_max, r_panels)
    s, ws = central_grid(span, points)
    return r, wr, s, ws


@dataclass
class LPKernel:
    tag: OperatorTag
    j: int
    symbol: SpectralSymbol
    profile: DyadicProfile
    r_grid: np.ndarray | None = None
    s_grid: np.ndarray | None = None
    r_weights: np.ndarray | None = None
    s_weights: np.ndarray | None = None
    _space: RadialFunction | None = field(default=None, repr=False)

    @property
    def space(self) -> RadialFunction:
        if self._space is None:
            if self.r_grid is None or self.s_grid is None:
                r, wr, s, ws = natural_grids(self.tag, self.j, self.symbol.params)
                self.r_grid, self.r_weights, self.s_grid, self.s_weights = r, wr, s, ws
            space = inverse_transform(self.symbol, self.r_grid, self.s_grid, r_weights=self.r_weights,
                                      s_weights=self.s_weights)
            space.meta = {"tag": self.tag.value, "j": self.j, "profile_params": self.profile.to_dict()}
            self._space = space
        return self._space


def kernel(tag, j: int, profile: DyadicProfile, params: GroupParams, r_grid=None, s_grid=None, *,
           r_weights=None, s_weights=None) -> LPKernel:
    tag = OperatorTag.parse(tag)
    return LPKernel(tag, j, lp_symbol(tag, j, profile, params), profile,
                    None if r_grid is None else np.asarray(r_grid, float),
                    None if s_grid is None else np.asarray(s_grid, float), r_weights, s_weights)


def project(u_symbol: SpectralSymbol, tag, j: int, profile: DyadicProfile) -> SpectralSymbol:
    """Symbol of Delta_j u: u convolved with phi_j (Kohn) or psi_j (full)."""
    return u_symbol.multiply(lp_symbol(OperatorTag.parse(tag), j, profile, u_symbol.params))


def _pow2(e: int) -> Fraction:
    return Fraction(2) ** e


def overlap_window(j: int, params: GroupParams, *, search: int = 40) -> list[int]:
    """Dyadic indices k for which the constraints

        1/4 < 2^{-2j} xi < 4,   1/4 < 2^{-2k}(xi + eta) < 4,   0 < eta <= xi^2 / (16 n^2)

    are simultaneously satisfiable (xi: Kohn eigenvalue, eta = lam^2).  The
    inequalities are strict because the profile vanishes at 1/4 and 4.  For xi
    in (A, B) the attainable xi + eta fill (A, B + B^2/(16 n^2)), so the test is
    an open-interval intersection, evaluated in exact rationals.
    """
    n = params.n
    lo = _pow2(2 * j - 2)
    hi = _pow2(2 * j + 2)
    reach = hi + hi * hi / (16 * n * n)
    return [k for k in range(j - search, j + search + 1) if _pow2(2 * k + 2) > lo and _pow2(2 * k - 2) < reach]


def symbol_overlap(j: int, k: int, params: GroupParams, *, modes: int = 4000) -> bool:
    """Whether the phi_j and psi_k symbols share support, checked mode by mode.

    On mode M the full eigenvalue is f(xi) = xi + xi^2 / (16 M^2), increasing in
    the Kohn eigenvalue xi, so the open bands meet iff f(2^{2j-2}) < 2^{2k+2}
    and f(2^{2j+2}) > 2^{2k-2}.  Exact rationals keep touching bands apart.
    """
    n = params.n
    a, b = _pow2(2 * j - 2), _pow2(2 * j + 2)
    top, bottom = _pow2(2 * k + 2), _pow2(2 * k - 2)
    for m in range(modes):
        big_sq = 16 * (2 * m + n) ** 2
        if a + a * a / big_sq < top and b + b * b / big_sq > bottom:
            return True
    return False


def l1_norm(k: LPKernel) -> float:
    return k.space.norm(1.0)


def bernstein_check(u_symbol: SpectralSymbol, tag, j: int, sigma: float,
                    profile: DyadicProfile | None = None) -> float:
    """||L^{sigma/2} Delta_j u||_2 / (2^{j sigma} ||Delta_j u||_2), Plancherel side.

    ``L`` is the operator selected by ``tag``.
    """
    tag = OperatorTag.parse(tag)
    profile = profile or DyadicProfile()
    block = project(u_symbol, tag, j, profile)
    base = plancherel_norm(block)
    if base == 0.0:
        raise ZeroDenominator(f"Delta_{j} u vanishes")
    if sigma == 0:
        return 1.0
    n = u_symbol.params.n
    f = block.value_fn
    powered = SpectralSymbol(block.params,
                             lambda m, lam: f(m, lam) * spectral_variable(tag, m, lam, n) ** (sigma / 2.0),
                             block.mode_limit, block.lam_max, block.lambda_support, block.m_max,
                             block.positive_only)
    return plancherel_norm(powered) / (2.0 ** (j * sigma) * base)
