import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heisenberg_wave.errors import BudgetExceeded, FitUnstable, NotAdmissible, ThresholdNotReached
from heisenberg_wave.littlewood_paley import OperatorTag, lp_symbol
from heisenberg_wave.verifier import (Verdict, consistency_guard, counterexample_wj, dispersive_scan, log_grid,
                                      schrodinger_scan, sharpness_vj, strichartz_spot_check)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(lo=finite, width=st.floats(0, 1e6), observed=st.one_of(finite, st.just(math.nan), st.just(math.inf)))
def test_verdict_passes_exactly_inside_interval(lo, width, observed):
    hi = lo + width
    v = Verdict.judge("x", (lo, hi), observed)
    assert v.passed == (math.isfinite(observed) and lo <= observed <= hi)


def test_verdict_serialization():
    v = Verdict.judge("sharpness.t_slope[v_0]", (-0.55, math.inf), -0.51, runtime=1.5, window=[0, 1])
    d = v.to_dict()
    assert d["expected"] == [-0.55, "inf"]
    assert json.loads(json.dumps(d))["details"] == {"window": [0, 1]}
    assert v.line().startswith("PASS sharpness.t_slope[v_0]: observed -0.51")
    assert Verdict.judge("y", (0, 1), 2).line().startswith("FAIL")


def test_log_grid():
    g = log_grid(10, 1000, 12)
    assert g.size == 25
    assert g[0] == pytest.approx(10) and g[-1] == pytest.approx(1000)
    assert np.allclose(np.diff(np.log10(g)), 1 / 12)
    assert log_grid(5, 5.0001).size == 2


# --- input checks -------------------------------------------------------------

def test_scans_reject_bad_grids(params, profile):
    with pytest.raises(FitUnstable):
        dispersive_scan([0], [10.0, 100.0], 1.0, params, profile=profile)
    with pytest.raises(ValueError):
        dispersive_scan([], log_grid(10, 100, 4), 1.0, params, profile=profile)
    with pytest.raises(ValueError):
        dispersive_scan([5], log_grid(10, 100, 4), 1.0, params, profile=profile)
    with pytest.raises(ValueError):
        schrodinger_scan([], log_grid(1, 10, 4), params, None, profile=profile)
    with pytest.raises(FitUnstable):
        sharpness_vj([0], [20.0, 40.0], params, profile, budget=None)


def test_budget_is_enforced(params, profile):
    with pytest.raises(BudgetExceeded):
        sharpness_vj([0, 1, 2], log_grid(10, 100, 4), params, profile, budget=1e-9)


def test_threshold_without_shift(params, profile):
    with pytest.raises(ThresholdNotReached):
        sharpness_vj([0], log_grid(1e-3, 1e-2, 4), params, profile, budget=None, auto_shift=False)


def test_shifted_times_clear_threshold(params, profile):
    res = sharpness_vj([0], log_grid(1e-3, 1e-2, 4), params, profile, budget=None)
    cell = next(iter(res.extra["cells"].values()))
    assert cell.t > 1e-2
    assert all(c.lower <= c.value for c in res.extra["cells"].values())


# --- small end-to-end runs -------------------------------------------------------

@pytest.fixture(scope="module")
def small_sharpness(params, profile):
    return sharpness_vj([0, 1, 2], log_grid(10, 100, 4), params, profile, budget=None,
                        positive_window=(0, 1, 2), negative_window=(-3, -2, -1))


def test_sharpness_structure(small_sharpness):
    claims = {v.claim_id for v in small_sharpness.verdicts}
    assert {"vj.lower_below_value", "sharpness.t_slope[v_0]", "sharpness.j_exponent[j>=0]",
            "sharpness.minus_branch_slope[v_0]"} <= claims
    assert "sharpness.j_exponent[j<0]" not in claims  # no negative j were scanned
    assert len(small_sharpness.extra["cells"]) == 3 * 5
    json.dumps(small_sharpness.to_dict())


def test_lowest_bump_decays_like_inverse_root(small_sharpness):
    by_id = {v.claim_id: v for v in small_sharpness.verdicts}
    assert by_id["sharpness.t_slope[v_0]"].passed
    assert by_id["sharpness.t_slope[v_0].r_squared"].observed > 0.99
    assert by_id["vj.lower_below_value"].passed


def test_consistency_guard_on_small_run(small_sharpness, params, profile):
    verdict = consistency_guard(small_sharpness, params, profile)
    assert verdict.passed
    assert verdict.details["checked"] + verdict.details["skipped"] == 15
    assert verdict.details["checked"] > 0


def test_counterexample_small_run(params, profile):
    res = counterexample_wj([0, 1, 2], log_grid(10, 100, 4), params, profile, budget=None,
                            positive_window=(0, 1, 2), negative_window=(-3, -2, -1))
    by_id = {v.claim_id: v for v in res.verdicts}
    assert by_id["counterexample.dilation_identity"].passed
    assert by_id["wj.lower_below_value"].passed
    assert "counterexample.window_gap" not in by_id


def test_dispersive_scan_records_every_cell(params, profile):
    ts = log_grid(10, 100, 4)
    res = dispersive_scan([0, 1], ts, 1.0, params, profile=profile, positive_window=(0, 1), negative_window=(-1, 0))
    assert len(res.cells) == 2 * ts.size
    assert {f"dispersive.t_slope[j={j}]" for j in (0, 1)} <= {v.claim_id for v in res.verdicts}
    assert all(v > 0 for v in res.cells.values())
    assert res.extra["uniformity_ratio"] >= 1.0


# --- Strichartz proxy ----------------------------------------------------------

def test_strichartz_rejects_inadmissible(params, profile):
    u0 = lp_symbol(OperatorTag.FULL, 0, profile, params)
    with pytest.raises(NotAdmissible):
        strichartz_spot_check("inf", 2, 0.0, u0, 4.0, params, profile, which="Cor1.3")
    with pytest.raises(NotAdmissible):
        strichartz_spot_check("inf", 2, 0.5, u0, 4.0, params, profile)
    with pytest.raises(NotAdmissible):
        strichartz_spot_check(4, 4, 0.0, u0, 4.0, params, profile)


@pytest.mark.slow
def test_strichartz_energy_pair_is_flat(params, profile):
    u0 = lp_symbol(OperatorTag.FULL, 0, profile, params)
    v = strichartz_spot_check("inf", 2, 0.0, u0, 4.0, params, profile)
    assert v.passed
    assert v.details["spread"] < 1e-6
