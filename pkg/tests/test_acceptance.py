"""Acceptance run: one test per criterion, each printing a PASS/FAIL line.

The thresholds here are the stated ones.  Where a criterion fails at desk
scale the test fails too; the measured values are in the summary line.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from heisenberg_wave.besov import kernel_norm_asymptotics, strichartz_admissible
from heisenberg_wave.errors import HypothesisFail
from heisenberg_wave.littlewood_paley import (OperatorTag, kernel, l1_norm, lp_symbol, natural_grids,
                                              overlap_window, symbol_overlap, vj_symbol, wj_symbol)
from heisenberg_wave.oscillatory import CriticalPoint, corpus, integrate, stationary_lower, vdc_bound
from heisenberg_wave.propagator import mode_problem, per_mode_bound, sigma_range
from heisenberg_wave.spectral_core import (GroupParams, evaluate, forward_transform, inverse_transform,
                                           plancherel_norm)
from heisenberg_wave.verifier import (Verdict, consistency_guard, counterexample_wj, dispersive_scan, log_grid,
                                      schrodinger_scan, sharpness_vj)

pytestmark = pytest.mark.slow

BUMP_JS = (-3, -2, -1, 0, 4, 5, 6, 7)
BUMP_TIMES = log_grid(1.0, 10.0, 4)


def check(claim, ok_range, observed, **details):
    return Verdict.judge(claim, ok_range, observed, **details)


def finish(record_criterion, label, checks):
    failed = record_criterion(label, checks)
    assert not failed, "; ".join(v.line() for v in failed)


@pytest.fixture(scope="module")
def sharpness(params, profile):
    return sharpness_vj(BUMP_JS, BUMP_TIMES, params, profile)


@pytest.fixture(scope="module")
def counterexample(params, profile):
    return counterexample_wj(BUMP_JS, BUMP_TIMES, params, profile)


# ---------------------------------------------------------------------------

def test_ac1_transform_round_trip(params, profile, record_criterion):
    checks = []
    for name, make, tag in (("psi", lambda j: lp_symbol(OperatorTag.FULL, j, profile, params), OperatorTag.FULL),
                            ("v", lambda j: vj_symbol(j, profile, params), OperatorTag.FULL),
                            ("w", lambda j: wj_symbol(j, profile, params), OperatorTag.KOHN)):
        for j in range(-2, 3):
            sym = make(j)
            r, wr, s, ws = natural_grids(tag, j, params)
            f = inverse_transform(sym, r, s, r_weights=wr, s_weights=ws)
            # modes 0..4 on |lam| in [lam_max/8, lam_max]: the part of the spectrum the
            # natural grid resolves (lower |lam| needs a wider s-window)
            lam = np.linspace(sym.lam_max / 8, sym.lam_max, 80)
            lam = np.concatenate([-lam[::-1], lam])
            back = forward_transform(f, 4, lam, tol=1.0)
            m = np.arange(5)[:, None]
            a, b = back.value(m, lam[None, :]), sym.value(m, lam[None, :])
            err = float(np.sqrt(np.sum(np.abs(a - b) ** 2) / np.sum(np.abs(b) ** 2)))
            checks.append(check(f"round_trip[{name}_{j}]", (0, 1e-6), err))
            planch = abs(plancherel_norm(sym) / f.norm(2.0) - 1.0)
            checks.append(check(f"plancherel[{name}_{j}]", (0, 1e-6), planch))
    finish(record_criterion, "AC1 transform round trip", checks)


def test_ac2_partition_overlap_homogeneity(params, profile, record_criterion):
    checks = []
    tau = np.logspace(-8, 8, 4001)
    total = sum(profile(4.0**-k * tau) for k in range(-20, 21))
    checks.append(check("partition_of_unity", (0, 1e-12), float(np.max(np.abs(total - 1)))))

    # the overlap windows, from exact rationals, against a mode-by-mode support search
    mismatched = 0
    for n in (1, 2):
        p = GroupParams(n)
        for j in range(-6, 7):
            found = [k for k in range(j - 8, 2 * j + 12) if symbol_overlap(j, k, p)]
            window = overlap_window(j, p)
            in_bounds = all(Fraction(2) ** (2 * j - 4) <= Fraction(2) ** (2 * k)
                        <= Fraction(2) ** (4 * j + 2) / n**2 + Fraction(2) ** (2 * j + 4) for k in window)
            mismatched += (found != window) or not in_bounds
    checks.append(check("overlap_windows_exact", (0, 0), mismatched))

    r0 = np.array([0.0, 0.4, 1.1, 2.0])
    s0 = np.array([0.0, 0.9, -3.0, 7.5])
    phi0 = lp_symbol(OperatorTag.KOHN, 0, profile, params)
    base = evaluate(phi0, r0, s0, dlam=phi0.lam_max / 8000)
    worst = 0.0
    for j in (-3, -2, -1, 1, 2, 3):
        phij = lp_symbol(OperatorTag.KOHN, j, profile, params)
        scaled = evaluate(phij, r0 * 2.0**-j, s0 * 4.0**-j, dlam=phij.lam_max / 8000)
        worst = max(worst, float(np.max(np.abs(scaled / 2.0 ** (params.N * j) - base)) / np.max(np.abs(base))))
    checks.append(check("kohn_dilation_identity", (0, 1e-6), worst))

    l1 = {tag: {j: l1_norm(kernel(tag, j, profile, params)) for j in range(-4, 5)}
          for tag in (OperatorTag.KOHN, OperatorTag.FULL)}
    kohn = l1[OperatorTag.KOHN]
    spread = max(abs(v - kohn[0]) for v in kohn.values()) / kohn[0]
    checks.append(check("kohn_l1_constant", (0, 1e-4), spread, norms=kohn))
    full = l1[OperatorTag.FULL]
    checks.append(check("full_l1_ratio", (0, 3.0), max(full.values()) / full[0], norms=full))
    finish(record_criterion, "AC2 partition, overlap, homogeneity", checks)


def test_ac3_besov_asymptotics(params, profile, record_criterion):
    N = params.N
    checks = []
    for tag, target in (("full", 2 * 1.0 + N / 2), ("kohn", 1.0 + N / 2)):
        tables: dict = {}
        for q in (1.0, 2.0, math.inf):
            res = kernel_norm_asymptotics(tag, 1.0, q, [2, 3, 4, 5], params, profile, min_r_squared=0.0,
                                          tables=tables)
            checks.append(check(f"besov_slope[{tag},q={q:g}]", (target - 0.1, target + 0.1), res.fit.slope))
            checks.append(check(f"besov_slope[{tag},q={q:g}].r_squared", (0.99, 1.0), res.fit.r_squared))
    finish(record_criterion, "AC3 Besov asymptotics", checks)


def _dense_trapezoid(prob, points=2**22 + 1):
    x = np.linspace(prob.a, prob.b, points)
    return np.trapezoid(np.exp(-1j * prob.omega * prob.phase(x)) * prob.amplitude(x), x)


def test_ac4_oscillatory_engine(record_criterion):
    problems = corpus()
    worst = max(abs(integrate(p) - _dense_trapezoid(p)) for p in problems)
    checks = [check("quadrature_vs_trapezoid", (0, 1e-8), worst)]

    applicable = violations = 0
    grid_cache = {}
    for p in problems:
        x = np.linspace(p.a, p.b, 4001)
        for k in (1, 2):
            delta = float(np.min(np.abs(p.derivative(k)(x))))
            if not delta > 0:
                continue
            try:
                bound = vdc_bound(p, k, delta)
            except HypothesisFail:
                continue
            applicable += 1
            value = grid_cache.setdefault(p.label, abs(integrate(p)))
            violations += value > bound
    checks.append(check("vdc_dominates", (0, 0), violations, applicable=applicable))

    cases = lower_violations = 0
    for p in problems:
        x = np.linspace(p.a, p.b, 4001)
        d1 = p.derivative(1)(x)
        if not np.any(np.diff(np.sign(d1)) != 0):
            continue  # no stationary point
        cp = CriticalPoint.locate(p, float(x[np.argmin(np.abs(d1))]))
        _, threshold = stationary_lower(p, cp)
        omegas = [p.omega] if p.omega > threshold else []
        omegas += [threshold * f for f in (1.01, 2.0, 10.0)]
        for om in omegas:
            q = p.with_omega(om)
            lower, _ = stationary_lower(q, cp)
            cases += 1
            lower_violations += lower > abs(integrate(q))
    checks.append(check("stationary_lower_below_value", (0, 0), lower_violations, cases=cases))
    finish(record_criterion, "AC4 oscillatory engine", checks)


def test_ac5_dispersive_upper_bound(params, profile, record_criterion):
    res = dispersive_scan(range(-2, 5), log_grid(10.0, 1000.0, 12), params.N - 1.5, params, profile=profile)
    keep = {f"dispersive.t_slope[j={j}]" for j in range(-2, 3)}
    checks = [v for v in res.verdicts
              if v.claim_id.removesuffix(".r_squared") in keep or ".j_exponent" in v.claim_id]

    rng = np.random.default_rng(0)
    violations = 0
    for _ in range(40):
        j = int(rng.integers(-2, 3))
        t = float(10 ** rng.uniform(1, 3))
        m = int(rng.integers(0, 60))
        sigma = float(rng.uniform(-1, 1) * sigma_range(j, params))
        r = float(rng.choice([0.0, 0.5])) * 2.0**-j
        measured = abs(integrate(mode_problem(j, t, sigma, m, r, params, profile)))
        violations += measured > per_mode_bound(j, t, m, params, sigma=sigma, r=r, profile=profile)
    checks.append(check("per_mode_bound_dominates", (0, 0), violations, samples=40))
    finish(record_criterion, "AC5 dispersive upper bound", checks)


def test_ac6_sharpness(sharpness, record_criterion):
    finish(record_criterion, "AC6 sharpness", list(sharpness.verdicts))


def test_ac7_counterexample(counterexample, record_criterion):
    finish(record_criterion, "AC7 counterexample", list(counterexample.verdicts))


def test_ac8_schrodinger(params, profile, record_criterion):
    res = schrodinger_scan((0, 1, 2), log_grid(10.0, 1000.0, 12), params, profile=profile)
    finish(record_criterion, "AC8 Schrodinger", list(res.verdicts))


def test_ac9_exponent_arithmetic(record_criterion):
    checks = []
    for n in (1, 2, 3):
        params = GroupParams(n)
        N = params.N
        # points of 1/p = N d - 1 with 2/p <= d, d = 1/2 - 1/r; p = 2N - 1 is the corner where 2/p = d
        for p in (2 * N - 1, 2 * N, 3 * N, 10 * N, "inf"):
            inv_p = Fraction(0) if p == "inf" else Fraction(1, p)
            d = (inv_p + 1) / N
            r = 1 / (Fraction(1, 2) - d)
            w = strichartz_admissible(p, r, params, "Cor1.3")
            checks.append(check(f"segment[N={N},p={p}]", (1, 1), int(w.admissible)))
        corner = strichartz_admissible(2 * N - 1, Fraction(2 * (2 * N - 1), 2 * N - 5), params, "Thm1.2-b")
        checks.append(check(f"corner_on_wave_line[N={N}]", (1, 1), int(corner.admissible)))
        # just outside the segment
        below = 2 * N - 2
        d = (Fraction(1, below) + 1) / N
        w = strichartz_admissible(below, 1 / (Fraction(1, 2) - d), params, "Cor1.3")
        checks.append(check(f"off_segment[N={N}]", (0, 0), int(w.admissible)))
        checks.append(check(f"cor_rejects_r2[N={N}]", (0, 0),
                            int(strichartz_admissible("inf", 2, params, "Cor1.3").admissible)))
        b = strichartz_admissible("inf", 2, params, "Thm1.2-b")
        c = strichartz_admissible("inf", 2, params, "Thm1.2-c")
        checks.append(check(f"window_b_is_1[N={N}]", (1, 1), int((b.rho_min, b.rho_max) == (1, 1))))
        checks.append(check(f"window_c_is_0[N={N}]", (1, 1), int((c.rho_min, c.rho_max) == (0, 0))))
    checks.append(check("bgx_point_N4", (1, 1),
                        int(strichartz_admissible(7, "14/3", GroupParams(1), "Cor1.3").admissible)))
    finish(record_criterion, "AC9 exponent arithmetic", checks)


def test_ac10_consistency_guard(sharpness, counterexample, params, profile, record_criterion):
    guard = consistency_guard(sharpness, params, profile)
    checks = [guard] + [v for v in sharpness.verdicts + counterexample.verdicts
                        if v.claim_id.endswith("lower_below_value")]
    finish(record_criterion, "AC10 consistency guard", checks)
