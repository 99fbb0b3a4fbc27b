import pytest

from sancode.allocator import AllocationProblem, evaluate, optimize, per_type_blocking
from sancode.mr_chain import MrConfig
from sancode.queueing import erlang_b

FIG9_RATIOS = (1.0, 2.0, 5.0)


def problem(scheme="crs", ratio=5.0, c=1.0, m=12):
    return AllocationProblem(total_drives=m, cost_weight=c, lambda_ratio=ratio,
                             total_load=6.0, layer_slots=2, scheme=scheme)


def test_rates_split():
    lam1, lam2 = problem(ratio=5.0).rates
    assert lam1 == pytest.approx(5.0) and lam2 == pytest.approx(1.0)


def test_three_state_per_type_blocking():
    b1, b2 = per_type_blocking(MrConfig(1, 1, 1, 1.0, 1.0, 1.0, "urs"))
    assert b1 == pytest.approx(2 / 3, abs=1e-12)
    assert b2 == pytest.approx(2 / 3, abs=1e-12)


def test_no_refinement_drives_no_type2():
    cfg = MrConfig(6, 0, 2, 4.0, 0.0, 1.0, "urs")
    b1, _ = per_type_blocking(cfg)
    assert b1 == pytest.approx(erlang_b(12, 4.0), abs=1e-12)


def test_classical_per_type_blocking_is_the_two_factors():
    cfg = MrConfig(8, 4, 2, 5.0, 1.0, 1.0, "classical")
    assert per_type_blocking(cfg) == (erlang_b(16, 5.0), erlang_b(8, 2.0))


@pytest.mark.parametrize("scheme", ["classical", "urs", "crs"])
@pytest.mark.parametrize("ratio", FIG9_RATIOS)
def test_optimum_is_exhaustive_minimum(scheme, ratio):
    prob = problem(scheme, ratio)
    res = optimize(prob)
    every = [evaluate(prob, m2) for m2 in prob.feasible_m2()]
    best_cost = min(c.cost for c in every)
    assert res.cost == best_cost
    assert res.best_m2 == min(c.m2 for c in every if c.cost == best_cost)
    for c in every:
        assert c.p_s <= min(c.p_b1, c.p_b2) + 1e-15


def test_urs_range_restricted():
    prob = problem("urs")
    assert max(prob.feasible_m2()) == 6
    for ratio in (0.2, 1.0, 5.0):
        res = optimize(problem("urs", ratio))
        assert res.best_m2 <= 12 - res.best_m2
    assert list(problem("crs").feasible_m2()) == list(range(1, 12))


@pytest.mark.parametrize("scheme", ["urs", "crs"])
def test_negligible_type2_prefers_fewest_refinement_drives(scheme):
    assert optimize(problem(scheme, ratio=1e6)).best_m2 == 1


def test_cost_weight_insensitivity():
    # optimum moves by at most one drive when c varies within a factor of two
    for scheme in ("urs", "crs"):
        for ratio in FIG9_RATIOS:
            picks = {optimize(problem(scheme, ratio, c)).best_m2 for c in (0.5, 0.75, 1.0, 1.5, 2.0)}
            assert max(picks) - min(picks) <= 1, (scheme, ratio, picks)


def test_validation():
    with pytest.raises(ValueError):
        AllocationProblem(total_drives=1)
    with pytest.raises(ValueError):
        AllocationProblem(total_drives=12, cost_weight=0)
    assert list(AllocationProblem(total_drives=2, scheme="urs").feasible_m2()) == [1]
