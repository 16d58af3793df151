"""Exponent experiments: sup-norm scans of propagated kernels, stationary-point
lower bounds for the m = 0 bumps, and the verdicts built from them.

Every experiment returns a ``ScanResult`` holding the raw cells, the fits and
a list of ``Verdict`` objects.  Verdicts only compare exponents and ratios; the
constants in front of the estimates are never asserted.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .besov import BesovSpec, besov_norm, strichartz_admissible, vj_besov_bound
from .errors import BudgetExceeded, FitUnstable, NotAdmissible, ThresholdNotReached
from .fits import DecayFit
from .littlewood_paley import DyadicProfile, OperatorTag, lp_symbol, vj_symbol, wj_symbol
from .oscillatory import integrate
from .propagator import (SCHRODINGER, WAVE, _noise_floor, bump_lower_bound, bump_problem, propagated_symbol,
                         sigma_range, stationary_sigma, sup_scan, vj_value, wj_value)
from .spectral_core import GroupParams, SpectralSymbol

__all__ = ["DecayFit", "Verdict", "ScanResult", "dispersive_scan", "schrodinger_scan", "sharpness_vj",
           "counterexample_wj", "consistency_guard", "strichartz_spot_check", "log_grid"]


@dataclass
class Verdict:
    claim_id: str
    expected: tuple[float, float]
    observed: float
    passed: bool
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    @classmethod
    def judge(cls, claim_id: str, expected: tuple[float, float], observed: float, runtime: float = 0.0,
              **details) -> "Verdict":
        lo, hi = expected
        ok = bool(np.isfinite(observed) and lo <= observed <= hi)
        return cls(claim_id, (float(lo), float(hi)), float(observed), ok, float(runtime), details)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["expected"] = [_json_float(x) for x in self.expected]
        d["observed"] = _json_float(self.observed)
        return d

    def line(self) -> str:
        lo, hi = self.expected
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.claim_id}: observed {self.observed:.4g}, expected [{lo:.4g}, {hi:.4g}]"


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class ScanResult:
    claim: str
    cells: dict = field(default_factory=dict)
    t_fits: dict = field(default_factory=dict)
    normalized: dict = field(default_factory=dict)
    exponent_fits: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "cells": [{"j": j, "t": t, "value": v} for (j, t), v in sorted(self.cells.items())],
            "t_fits": {str(j): f.to_dict() for j, f in sorted(self.t_fits.items())},
            "normalized": {str(j): v for j, v in sorted(self.normalized.items())},
            "exponent_fits": {k: f.to_dict() for k, f in sorted(self.exponent_fits.items())},
            "verdicts": [v.to_dict() for v in self.verdicts],
            "extra": {k: v for k, v in self.extra.items() if k != "cells"},
        }


def log_grid(t_min: float, t_max: float, per_decade: int = 12) -> np.ndarray:
    """Log-spaced times, ``per_decade`` intervals per factor of ten, both ends included."""
    count = max(2, int(round(per_decade * math.log10(t_max / t_min))) + 1)
    return np.logspace(math.log10(t_min), math.log10(t_max), count)


class _Clock:
    def __init__(self, budget: float | None):
        self.start = time.perf_counter()
        self.budget = budget

    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def check(self, where: str) -> None:
        if self.budget is not None and self.elapsed() > self.budget:
            raise BudgetExceeded(f"{where}: {self.elapsed():.1f}s over budget {self.budget:.1f}s")


def _normalized(values: np.ndarray, ts: np.ndarray) -> float:
    """Geometric mean of value * t^{1/2}: the t-normalized size used for j-exponent fits."""
    return float(np.exp(np.mean(np.log(values * np.sqrt(ts)))))


MIN_R_SQUARED = 0.98


def _fit_verdicts(result: "ScanResult", claim: str, expected: tuple[float, float], fit: DecayFit,
                  **details) -> None:
    """Slope verdict plus a separate goodness-of-fit verdict (r^2 >= MIN_R_SQUARED)."""
    result.verdicts.append(Verdict.judge(claim, expected, fit.slope, r_squared=fit.r_squared,
                                         n_points=fit.n_points, **details))
    result.verdicts.append(Verdict.judge(claim + ".r_squared", (MIN_R_SQUARED, 1.0), fit.r_squared))


def _branch_fit(result: ScanResult, name: str, window: Sequence[int]) -> DecayFit | None:
    js = [j for j in window if j in result.normalized]
    if len(js) < 3:
        return None
    fit = DecayFit.dyadic(js, [result.normalized[j] for j in js])
    result.exponent_fits[name] = fit
    return fit


# ---------------------------------------------------------------------------
# sup-norm scans of e^{-it sqrt(L)} psi_j and e^{-itL} psi_j


def _sup_scan_family(claim: str, kind: str, j_list, t_list, params: GroupParams, profile: DyadicProfile,
                     budget: float | None, r_factors: Sequence[float]) -> tuple[ScanResult, _Clock]:
    if len(j_list) == 0:
        raise ValueError("j_list is empty")
    t_list = np.asarray(sorted(t_list), dtype=float)
    if t_list.size < 3:
        raise FitUnstable("t_list needs at least 3 points")
    clock = _Clock(budget)
    result = ScanResult(claim)
    where = {}
    for j in sorted(j_list):
        base = lp_symbol(OperatorTag.FULL, j, profile, params)
        smax = sigma_range(j, params, kind)
        rs = [f * 2.0 ** (-j) for f in r_factors]
        values = []
        for t in t_list:
            clock.check(f"{claim} j={j} t={t:g}")
            sup = sup_scan(base, float(t), kind=kind, r_values=rs, sigma_max=smax)
            result.cells[(j, float(t))] = sup.value
            where[(j, float(t))] = (sup.r, sup.sigma)
            values.append(sup.value)
        values = np.asarray(values)
        result.t_fits[j] = DecayFit.fit(t_list, values)
        result.normalized[j] = _normalized(values, t_list)
    result.extra["argmax"] = {f"{j},{t:g}": list(rs) for (j, t), rs in sorted(where.items())}
    return result, clock


def dispersive_scan(j_list: Sequence[int], t_list: Sequence[float], rho: float, params: GroupParams,
                    budget: float | None = None, *, profile: DyadicProfile | None = None,
                    r_factors: Sequence[float] = (0.0, 0.5), slope_max: float = -0.45,
                    positive_window: Sequence[int] = (2, 3, 4), negative_window: Sequence[int] = (-2, -1, 0),
                    exponent_tol: float = 0.15) -> ScanResult:
    """sup over (r, sigma) of |e^{-it sqrt(L)} psi_j| for each (j, t).

    Per j: the t-slope must not exceed ``slope_max``.  The t-normalized sups are
    then fitted against 2^j separately on the two windows, whose exponents should
    be N - 3/2 (large j) and N - 1/2 (small j).  ``rho`` sets the loss used for the
    reported uniformity ratio max/min of sup * t^{1/2} * 2^{-j rho}.
    """
    if any(abs(j) > 4 for j in j_list):
        raise ValueError("j_list must lie in [-4, 4]")
    profile = profile or DyadicProfile()
    result, clock = _sup_scan_family("dispersive", WAVE, j_list, t_list, params, profile, budget, r_factors)
    N = params.N
    for j, fit in sorted(result.t_fits.items()):
        _fit_verdicts(result, f"dispersive.t_slope[j={j}]", (-math.inf, slope_max), fit)
    for name, window, target in (("j>=0", positive_window, N - 1.5), ("j<0", negative_window, N - 0.5)):
        fit = _branch_fit(result, name, window)
        if fit is not None:
            _fit_verdicts(result, f"dispersive.j_exponent[{name}]", (target - exponent_tol, target + exponent_tol),
                          fit, window=list(window))
    scaled = [result.normalized[j] * 2.0 ** (-j * rho) for j in result.normalized]
    result.extra["rho"] = rho
    result.extra["uniformity_ratio"] = max(scaled) / min(scaled)
    result.extra["runtime"] = clock.elapsed()
    for v in result.verdicts:
        v.runtime = clock.elapsed()
    return result


def schrodinger_scan(j_list: Sequence[int], t_list: Sequence[float], params: GroupParams,
                     budget: float | None = None, *, profile: DyadicProfile | None = None,
                     r_factors: Sequence[float] = (0.0,), slope_max: float = -0.45,
                     positive_window: Sequence[int] = (0, 1, 2), exponent_tol: float = 0.15) -> ScanResult:
    """As :func:`dispersive_scan` for e^{-itL}; the expected j-exponent is N - 2."""
    if len(j_list) == 0:
        raise ValueError("j_list is empty")
    profile = profile or DyadicProfile()
    result, clock = _sup_scan_family("schrodinger", SCHRODINGER, j_list, t_list, params, profile, budget,
                                     r_factors)
    for j, fit in sorted(result.t_fits.items()):
        if j >= 0:
            _fit_verdicts(result, f"schrodinger.t_slope[j={j}]", (-math.inf, slope_max), fit)
    fit = _branch_fit(result, "j>=0", positive_window)
    if fit is not None:
        target = params.N - 2
        _fit_verdicts(result, "schrodinger.j_exponent[j>=0]", (target - exponent_tol, target + exponent_tol), fit,
                      window=list(positive_window))
    result.extra["runtime"] = clock.elapsed()
    return result


# ---------------------------------------------------------------------------
# lower bounds at the stationary point of the m = 0 bumps


@dataclass
class BumpCell:
    j: int
    t: float
    sigma: float
    value: float
    lower: float
    minus_bound: float


def _bump_scan(which: str, j_list, t_list, params: GroupParams, profile: DyadicProfile, auto_shift: bool,
               clock: _Clock) -> tuple[ScanResult, dict]:
    t_list = np.asarray(sorted(t_list), dtype=float)
    if t_list.size < 3:
        raise FitUnstable("t_list needs at least 3 points")
    result = ScanResult("sharpness" if which == "vj" else "counterexample")
    cells: dict = {}
    value_fn = vj_value if which == "vj" else wj_value
    thresholds = {}
    for j in sorted(j_list):
        clock.check(f"{which} j={j}")
        _, threshold, _ = bump_lower_bound(j, float(t_list[0]), params, profile, which)
        thresholds[j] = threshold
        ts = t_list
        if ts[0] <= threshold:
            if not auto_shift:
                raise ThresholdNotReached(f"{which} j={j}: t_min = {ts[0]:g} <= T = {threshold:.4g}")
            ts = t_list * (1.01 * threshold / t_list[0])
        _, sigma = stationary_sigma(j, params, which)
        values = []
        for t in ts:
            v = abs(value_fn(j, float(t), sigma, params, profile))
            lower, _, minus = bump_lower_bound(j, float(t), params, profile, which)
            cells[(j, float(t))] = BumpCell(j, float(t), sigma, v, lower, minus)
            result.cells[(j, float(t))] = v
            values.append(v)
        values = np.asarray(values)
        result.t_fits[j] = DecayFit.fit(ts, values)
        result.normalized[j] = _normalized(values, ts)
    result.extra["thresholds"] = {str(j): T for j, T in sorted(thresholds.items())}
    result.extra["lower_bounds"] = [{"j": c.j, "t": c.t, "lower": c.lower, "value": c.value}
                                    for c in cells.values()]
    violations = [c for c in cells.values() if c.lower > c.value]
    result.verdicts.append(Verdict.judge(f"{which}.lower_below_value", (0, 0), len(violations),
                                         cells=len(cells)))
    return result, cells


def minus_branch_decay(j: int, params: GroupParams, profile: DyadicProfile | None = None, which: str = "vj",
                       t_list: Sequence[float] | None = None) -> DecayFit:
    """t-decay of the minus-branch integral at sigma_j, fitted where it stands above rounding level."""
    profile = profile or DyadicProfile()
    ts = np.asarray(t_list if t_list is not None else log_grid(10.0, 1000.0), dtype=float)
    _, sigma = stationary_sigma(j, params, which)
    keep_t, keep_v = [], []
    for t in ts:
        prob = bump_problem(j, float(t), sigma, params, profile, which, -1)
        floor = _noise_floor(prob)
        v = abs(integrate(prob, tol=floor))
        if v > 100.0 * floor:
            keep_t.append(t)
            keep_v.append(v)
    return DecayFit.fit(keep_t, keep_v)


def sharpness_vj(j_list: Sequence[int], t_list: Sequence[float], params: GroupParams,
                 profile: DyadicProfile | None = None, *, budget: float | None = None, auto_shift: bool = True,
                 positive_window: Sequence[int] = (4, 5, 6, 7), negative_window: Sequence[int] = (-3, -2, -1, 0),
                 slope_tol: float = 0.05, exponent_tol: float = 0.15, minus_max: float = -0.9,
                 besov_js: Sequence[int] = (), besov_rho: float = 1.0) -> ScanResult:
    """|cos(t sqrt(L)) v_j (0, sigma_j t)| beyond the stationary-phase thresholds.

    Verdicts: t-slope of v_0 in -1/2 +- slope_tol, the two j-exponents
    (N - n - 1/2 and N - 1/2), the t^{-1} decay of the minus branch at j = 0, and
    the lower bound never exceeding the computed value.  ``besov_js`` adds the
    uniformity check of ||v_j||_{B^rho_{1,1}} / 2^{j rho}.
    """
    profile = profile or DyadicProfile()
    clock = _Clock(budget)
    result, cells = _bump_scan("vj", j_list, t_list, params, profile, auto_shift, clock)
    N, n = params.N, params.n
    if 0 in result.t_fits:
        fit = result.t_fits[0]
        _fit_verdicts(result, "sharpness.t_slope[v_0]", (-0.5 - slope_tol, -0.5 + slope_tol), fit)
    for name, window, target in (("j>=0", positive_window, N - n - 0.5), ("j<0", negative_window, N - 0.5)):
        fit = _branch_fit(result, name, window)
        if fit is not None:
            _fit_verdicts(result, f"sharpness.j_exponent[{name}]", (target - exponent_tol, target + exponent_tol),
                          fit, window=list(window))
    minus = minus_branch_decay(0, params, profile, "vj")
    result.extra["minus_branch_fit"] = minus.to_dict()
    result.verdicts.append(Verdict.judge("sharpness.minus_branch_slope[v_0]", (-math.inf, minus_max),
                                         minus.slope, n_points=minus.n_points))
    if besov_js:
        ratios = {j: vj_besov_bound(j, besov_rho, params, profile) for j in besov_js}
        spread = max(ratios.values()) / min(ratios.values())
        result.extra["vj_besov_ratios"] = {str(j): v for j, v in sorted(ratios.items())}
        result.verdicts.append(Verdict.judge("sharpness.vj_besov_uniform", (1.0, 3.0), spread))
    result.extra["runtime"] = clock.elapsed()
    result.extra["cells"] = cells
    return result


def counterexample_wj(j_list: Sequence[int], t_list: Sequence[float], params: GroupParams,
                      profile: DyadicProfile | None = None, *, budget: float | None = None,
                      auto_shift: bool = True, positive_window: Sequence[int] = (4, 5, 6, 7),
                      negative_window: Sequence[int] = (-3, -2, -1, 0), exponent_tol: float = 0.2,
                      min_gap: float = 1.0, besov_rho: float = 1.0) -> ScanResult:
    """The Kohn-scale bumps w_j: j-exponents N + 1 (j >= 0) and N - 1/2 (j < 0).

    The two exponent windows they force on rho are [N+1, inf) and (-inf, N-1/2];
    the verdict asks for a gap of at least ``min_gap`` between the measured
    exponents.  The Kohn-scale Besov norm of w_j scales exactly like 2^{j rho} by
    dilation; that identity is checked on the spectral side.
    """
    profile = profile or DyadicProfile()
    clock = _Clock(budget)
    result, cells = _bump_scan("wj", j_list, t_list, params, profile, auto_shift, clock)
    N = params.N
    fits = {}
    for name, window, target in (("j>=0", positive_window, N + 1.0), ("j<0", negative_window, N - 0.5)):
        fit = _branch_fit(result, name, window)
        fits[name] = fit
        if fit is not None:
            expected = (target - exponent_tol, target + exponent_tol)
            _fit_verdicts(result, f"counterexample.j_exponent[{name}]", expected, fit, window=list(window))
    if fits["j>=0"] is not None and fits["j<0"] is not None:
        gap = fits["j>=0"].slope - fits["j<0"].slope
        result.verdicts.append(Verdict.judge("counterexample.window_gap", (min_gap, math.inf), gap))
    # ||w_j||_{B^rho_{1,1}(Kohn)} = 2^{j rho} ||w_0||: blocks of w_j are dilates of blocks of w_0
    rng = np.random.default_rng(0)
    worst = 0.0
    for j in (1, 2, 3):
        m = rng.integers(0, 5, 64)
        lam = rng.uniform(1e-3, 4.0, 64) * 4.0**j
        a = wj_symbol(j, profile, params).value(m, lam)
        b = wj_symbol(0, profile, params).value(m, lam / 4.0**j)
        worst = max(worst, float(np.max(np.abs(a - b))))
    result.extra["dilation_symbol_error"] = worst
    result.verdicts.append(Verdict.judge("counterexample.dilation_identity", (0.0, 1e-12), worst))
    result.extra["runtime"] = clock.elapsed()
    result.extra["cells"] = cells
    return result


# ---------------------------------------------------------------------------
# lower vs upper at matched cells


def consistency_guard(bump: ScanResult, params: GroupParams, profile: DyadicProfile | None = None, *,
                      which: str = "vj", max_nodes: int = 2**23, window: float = 0.25) -> Verdict:
    """Stationary lower bound <= grid-route sup of |cos(t sqrt(L)) v_j| near sigma_j t.

    The sup is taken by the FFT scan over |sigma| <= |sigma_j| + ``window`` on the
    grid route, independent of the mode-route value behind the lower bound.  Cells
    whose lam-grid would exceed ``max_nodes`` are skipped and counted.
    """
    profile = profile or DyadicProfile()
    cells = bump.extra["cells"]
    violations, checked, skipped = [], 0, 0
    for (j, t), cell in sorted(cells.items()):
        base = vj_symbol(j, profile, params) if which == "vj" else wj_symbol(j, profile, params)
        smax = abs(cell.sigma) + window
        h = math.pi / (2.0 * base.lam_max)
        if 4.0 * smax * t / h > max_nodes:
            skipped += 1
            continue
        sup = sup_scan(base, t, kind="cos", r_values=(0.0,), sigma_max=smax).value
        checked += 1
        if cell.lower > sup or cell.value > sup * (1 + 1e-6) + 1e-12:
            violations.append({"j": j, "t": t, "lower": cell.lower, "value": cell.value, "sup": sup})
    return Verdict.judge("consistency.lower_le_upper", (0, 0), len(violations), checked=checked,
                         skipped=skipped, violations=violations)


# ---------------------------------------------------------------------------
# Strichartz boundedness proxy


def _space_time_norm(u0: SpectralSymbol, p: float, r: float, rho: float, t_max: float, nodes: int,
                     profile: DyadicProfile, grid_scale: float) -> tuple[float, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(nodes)
    ts = 0.5 * t_max * (x + 1)
    ws = 0.5 * t_max * w
    spec = BesovSpec(OperatorTag.FULL, rho, 2.0, r)
    vals = np.array([besov_norm(propagated_symbol(u0, float(t), WAVE), spec, (-3, 3), profile=profile,
                                grid_scale=grid_scale) for t in ts])
    if p == math.inf:
        return float(vals.max()), vals
    return float(np.sum(ws * vals**p) ** (1.0 / p)), vals


def strichartz_spot_check(p, r, rho: float, u0: SpectralSymbol, t_window: float, params: GroupParams,
                          profile: DyadicProfile | None = None, *, which: str = "Thm1.2-c", nodes: int = 6,
                          grid_scale: float = 0.125, max_growth: float = 0.05) -> Verdict:
    """Growth of ||e^{-it sqrt(L)} u0||_{L^p([0,T]; B^rho_{r,2})} when T doubles (L^r blocks, l^2 sum).

    (p, r, rho) must be admissible for the homogeneous estimate.  A bounded
    global norm shows up as small growth; this is a coarse proxy, not a proof.
    ``details["spread"]`` is max/min - 1 of the pointwise-in-t norms, which
    for r = 2 measures how far the flow is from unitary on each block.
    """
    profile = profile or DyadicProfile()
    window = strichartz_admissible(p, r, params, which)
    if not window.admissible or window.rho_min is None:
        raise NotAdmissible(f"(p, r) = ({p}, {r}) is not admissible ({which})")
    if not window.rho_min <= Fraction(rho).limit_denominator(10**6) <= window.rho_max:
        raise NotAdmissible(f"rho = {rho} outside [{window.rho_min}, {window.rho_max}]")
    p_val = math.inf if window.p == "inf" else float(window.p)
    r_val = math.inf if window.r == "inf" else float(window.r)
    start = time.perf_counter()
    first, vals_a = _space_time_norm(u0, p_val, r_val, rho, t_window, nodes, profile, grid_scale)
    second, vals_b = _space_time_norm(u0, p_val, r_val, rho, 2 * t_window, nodes, profile, grid_scale)
    both = np.concatenate([vals_a, vals_b])
    growth = second / first - 1.0
    return Verdict.judge("strichartz.growth_under_doubling", (-1e-9, max_growth), growth,
                         runtime=time.perf_counter() - start, norm_T=first, norm_2T=second,
                         spread=float(both.max() / both.min() - 1.0))
