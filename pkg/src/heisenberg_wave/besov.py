"""Homogeneous Besov norms on the Kohn and full-Laplacian dyadic scales, and
the exponent bookkeeping for Strichartz pairs.

A norm is ``|| {2^{k rho} ||Delta_k u||_{L^r}}_k ||_{l^q}``, with Delta_k the
Littlewood-Paley block of the chosen scale.  For r = 2 block norms come from the
Plancherel side; otherwise each block is synthesized on its natural grid and
integrated against Haar measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import FitUnstable, WindowUnstable
from .fits import DecayFit
from .littlewood_paley import (DyadicProfile, OperatorTag, lp_symbol, natural_grids, project, vj_symbol)
from .spectral_core import (GroupParams, RadialFunction, SpectralSymbol, forward_transform, inverse_transform,
                            plancherel_norm)


def _extended(value) -> float:
    v = float(value)
    if not (1.0 <= v <= math.inf):
        raise ValueError(f"exponent {value} outside [1, inf]")
    return v


@dataclass(frozen=True)
class BesovSpec:
    tag: OperatorTag
    rho: float
    q: float
    r: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", OperatorTag.parse(self.tag))
        object.__setattr__(self, "q", _extended(self.q))
        object.__setattr__(self, "r", _extended(self.r))

    def is_norm(self, params: GroupParams) -> bool:
        """The homogeneous quasi-norm is a norm only below the critical regularity N/r."""
        return self.rho < params.N / self.r


# ---------------------------------------------------------------------------
# blocks


def as_symbol(u, *, m_max: int | None = None, lam_grid=None) -> SpectralSymbol:
    """Spectral side of ``u``.

    Radial functions carrying ``tag``/``j``/``profile_params`` metadata (as written
    by the kernel dump) are rebuilt exactly; anything else goes through the
    forward transform on the supplied ``lam_grid``.
    """
    if isinstance(u, SpectralSymbol):
        return u
    if not isinstance(u, RadialFunction):
        raise TypeError("expected a SpectralSymbol or RadialFunction")
    meta = u.meta or {}
    if {"tag", "j", "profile_params"} <= set(meta):
        profile = DyadicProfile(**meta["profile_params"])
        return lp_symbol(meta["tag"], int(meta["j"]), profile, u.params)
    if m_max is None or lam_grid is None:
        raise ValueError("a bare radial function needs m_max and lam_grid for its transform")
    return forward_transform(u, m_max, lam_grid)


def _block_norm(block: SpectralSymbol, tag: OperatorTag, k: int, r: float, grid_scale: float) -> float:
    energy = plancherel_norm(block)
    if r == 2.0 or energy == 0.0:
        return energy
    rg, rw, sg, sw = natural_grids(tag, k, block.params, r_extent=64.0 * grid_scale,
                                   period=8192.0 * grid_scale)
    return inverse_transform(block, rg, sg, r_weights=rw, s_weights=sw).norm(r)


@dataclass
class BlockTable:
    """Cached dyadic block norms ||Delta_k u||_{L^r} of one function on one scale."""

    symbol: SpectralSymbol
    tag: OperatorTag
    r: float
    profile: DyadicProfile
    grid_scale: float = 1.0
    norms: dict = field(default_factory=dict)

    def get(self, k: int) -> float:
        if k not in self.norms:
            block = project(self.symbol, self.tag, k, self.profile)
            self.norms[k] = _block_norm(block, self.tag, k, self.r, self.grid_scale)
        return self.norms[k]

    def aggregate(self, rho: float, q: float, ks: Iterable[int]) -> float:
        weighted = np.array([2.0 ** (k * rho) * self.get(k) for k in ks])
        if weighted.size == 0:
            return 0.0
        if math.isinf(q):
            return float(weighted.max())
        return float(np.sum(weighted**q) ** (1.0 / q))


def besov_norm(u, spec: BesovSpec, j_window: tuple[int, int] = (-8, 8), *, profile: DyadicProfile | None = None,
               widen_attempts: int = 3, rel_tol: float = 1e-4, grid_scale: float = 1.0,
               table: BlockTable | None = None) -> float:
    """l^q sum over the window of 2^{k rho} ||Delta_k u||_{L^r}.

    The window is widened by two on each side until that changes the result by
    at most ``rel_tol``; ``WindowUnstable`` after ``widen_attempts`` tries.
    """
    profile = profile or DyadicProfile()
    sym = as_symbol(u)
    if not spec.is_norm(sym.params):
        raise ValueError(f"rho = {spec.rho} is not below N/r = {sym.params.N / spec.r}")
    table = table or BlockTable(sym, spec.tag, spec.r, profile, grid_scale)
    lo, hi = j_window
    current = table.aggregate(spec.rho, spec.q, range(lo, hi + 1))
    for _ in range(widen_attempts):
        lo, hi = lo - 2, hi + 2
        wider = table.aggregate(spec.rho, spec.q, range(lo, hi + 1))
        if abs(wider - current) <= rel_tol * max(abs(wider), 1e-300) or wider == current:
            return wider
        current = wider
    raise WindowUnstable(f"Besov norm still moving after widening to [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# experiments on the two scales


def vj_besov_bound(j: int, rho: float, params: GroupParams, profile: DyadicProfile | None = None,
                   *, grid_scale: float = 1.0) -> float:
    """||v_j||_{B^rho_{1,1}(L)} / 2^{j rho}.

    Only the blocks k = j-1, j, j+1 can meet the support of v_j; the others are
    checked to vanish on the Plancherel side rather than assumed to.
    """
    profile = profile or DyadicProfile()
    table = BlockTable(vj_symbol(j, profile, params), OperatorTag.FULL, 1.0, profile, grid_scale)
    total = table.aggregate(rho, 1.0, range(j - 3, j + 4))
    return total / 2.0 ** (j * rho)


@dataclass
class AsymptoticsResult:
    fit: DecayFit
    j_list: list
    norms: list
    blocks: dict


def kernel_norm_asymptotics(tag_of_space, rho: float, q: float, j_list: Sequence[int], params: GroupParams,
                            profile: DyadicProfile | None = None, *, min_r_squared: float = 0.99,
                            tables: dict | None = None) -> AsymptoticsResult:
    """Growth exponent in j of ||phi_j||_{B^rho_{q,2}} on the requested scale.

    phi_j is the Kohn-scale block kernel.  ``tables`` may carry block caches
    keyed by j so several q values reuse one set of Plancherel integrals.
    """
    profile = profile or DyadicProfile()
    tag = OperatorTag.parse(tag_of_space)
    spec = BesovSpec(tag, rho, q, 2.0)
    norms, blocks = [], {}
    for j in j_list:
        if tables is not None and j in tables:
            table = tables[j]
        else:
            table = BlockTable(lp_symbol(OperatorTag.KOHN, j, profile, params), tag, 2.0, profile)
            if tables is not None:
                tables[j] = table
        norms.append(_window_norm(table, spec, j))
        blocks[j] = {k: v for k, v in sorted(table.norms.items()) if v > 0}
    fit = DecayFit.dyadic(j_list, norms)
    if fit.r_squared < min_r_squared:
        raise FitUnstable(f"r^2 = {fit.r_squared:.4f} below {min_r_squared}")
    return AsymptoticsResult(fit, list(j_list), norms, blocks)


def _window_norm(table: BlockTable, spec: BesovSpec, j: int) -> float:
    """Norm of phi_j: its full-scale blocks live in j-1 <= k <= 2j+2 (Kohn blocks in j-1..j+1),
    so a window one wider than that is already exhaustive; one further step confirms it."""
    lo, hi = j - 3, max(2 * j + 3, j + 3)
    inner = table.aggregate(spec.rho, spec.q, range(lo, hi + 1))
    outer = table.aggregate(spec.rho, spec.q, range(lo - 2, hi + 3))
    if abs(outer - inner) > 1e-4 * outer:
        raise WindowUnstable(f"phi_{j} blocks reach beyond [{lo}, {hi}]")
    return outer


def inclusion_check(rho: float, q: float, r: float, samples: Sequence, params: GroupParams,
                    profile: DyadicProfile | None = None, *, reverse: bool = False,
                    j_window: tuple[int, int] = (-8, 8)) -> float:
    """Largest ratio of Besov norms on the two scales over ``samples``.

    For 0 < rho < N/r the Kohn-scale norm is controlled by the full-scale one and
    the returned ratio is ||u||_{B(Kohn)} / ||u||_{B(full)}; for -N/r' < rho < 0 the
    roles swap.  ``reverse`` returns the uncontrolled ratio instead.
    """
    N = params.N
    q, r = _extended(q), _extended(r)
    if rho > 0:
        if not (r < math.inf and rho < N / r):
            raise ValueError("need r < inf and 0 < rho < N/r")
        num, den = OperatorTag.KOHN, OperatorTag.FULL
    elif rho < 0:
        r_dual = math.inf if r == 1 else r / (r - 1)
        if not (r > 1 and rho > -N / r_dual):
            raise ValueError("need r > 1 and -N/r' < rho < 0")
        num, den = OperatorTag.FULL, OperatorTag.KOHN
    else:
        raise ValueError("rho = 0 is not covered by either inclusion")
    if reverse:
        num, den = den, num
    profile = profile or DyadicProfile()
    worst = 0.0
    for u in samples:
        top = besov_norm(u, BesovSpec(num, rho, q, r), j_window, profile=profile)
        bottom = besov_norm(u, BesovSpec(den, rho, q, r), j_window, profile=profile)
        if bottom == 0:
            raise ValueError("sample has vanishing norm")
        worst = max(worst, top / bottom)
    return worst


# ---------------------------------------------------------------------------
# Strichartz exponent arithmetic


INF = "inf"
WHICH = ("Thm1.2-b", "Thm1.2-c", "Cor1.3")


def parse_exponent(value) -> Fraction | str:
    """Exact exponent from an int, a Fraction, or an 'a/b' / 'inf' string.  Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(value, float):
        if math.isinf(value):
            return INF
        raise TypeError("floats are ambiguous at region boundaries; pass 'a/b' strings or Fractions")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    text = str(value).strip().lower()
    if text in ("inf", "infinity", "oo", "∞"):
        return INF
    if "." in text or "e" in text:
        raise TypeError(f"{value!r} looks like a float; pass an exact 'a/b' string")
    return Fraction(text)


def _reciprocal(e) -> Fraction:
    return Fraction(0) if e == INF else 1 / e


def _show(x) -> str | None:
    if x is None:
        return None
    if x == INF:
        return INF
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class AdmissibleWindow:
    """Exponent pair with its regularity window.

    ``rho_min``/``rho_max`` are None for the "Cor1.3" region, which constrains
    (p, r) only.
    """

    p: Fraction | str
    r: Fraction | str
    rho_min: Fraction | None
    rho_max: Fraction | None
    admissible: bool
    which: str = "Thm1.2-b"

    def to_dict(self) -> dict:
        return {"p": _show(self.p), "r": _show(self.r), "rho_min": _show(self.rho_min),
                "rho_max": _show(self.rho_max), "admissible": self.admissible}


def strichartz_admissible(p, r, params: GroupParams, which: str = "Thm1.2-b") -> AdmissibleWindow:
    """Exact evaluation of the exponent constraints.

    Thm1.2-b / Thm1.2-c: 2/p = 1/2 - 1/r with the regularity windows
    [-(N-1/2)d + 1, -(N-3/2)d + 1] and the same shifted down by one, d = 1/2 - 1/r.
    Cor1.3: 0 <= 2/p <= d and (N-1)d - 1 <= 1/p <= Nd - 1.
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    p, r = parse_exponent(p), parse_exponent(r)
    for name, e in (("p", p), ("r", r)):
        if e != INF and e < 2:
            raise ValueError(f"{name} = {e} below 2")
    N = Fraction(params.N)
    d = Fraction(1, 2) - _reciprocal(r)
    inv_p = _reciprocal(p)
    if which == "Cor1.3":
        ok = 0 <= 2 * inv_p <= d and (N - 1) * d - 1 <= inv_p <= N * d - 1
        return AdmissibleWindow(p, r, None, None, bool(ok), which)
    shift = 1 if which == "Thm1.2-b" else 0
    lo = -(N - Fraction(1, 2)) * d + shift
    hi = -(N - Fraction(3, 2)) * d + shift
    ok = 2 * inv_p == d
    return AdmissibleWindow(p, r, lo, hi, bool(ok and lo <= hi), which)
