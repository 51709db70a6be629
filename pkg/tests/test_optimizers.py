import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import make_instance, random_instance
from splitmax.combined import Exact, Item, MonteCarlo, Objective
from splitmax.data import ConfigError, SocialGraph, generate_synthetic
from splitmax.optimizers import (
    ALGORITHMS,
    baseline_hdh,
    baseline_pagerank,
    baseline_random,
    baseline_top_k,
    eager_greedy,
    pagerank,
    randomized_greedy,
    run_algorithm,
    tpg,
)

TINY_EPS = 1e-12


def fixture_instance():
    return generate_synthetic(12, 3, 16, extent=500, rng_seed=5, budget=3000)


def is_tie_free(inst, obj, gap=1e-9):
    """No near-tie between the best and runner-up ratio at any eager round."""
    _, trace = eager_greedy(inst, objective=obj)
    sel = obj.selection()
    remaining = inst.budget
    for step_no, step in enumerate(trace):
        if step_no >= 2:  # rounds after the balanced start
            ratios = sorted(
                (sel.gain(it)[0] / obj.cost(it) for it in obj.candidates() if it not in sel and obj.cost(it) <= remaining),
                reverse=True,
            )
            if len(ratios) > 1 and ratios[0] - ratios[1] <= gap:
                return False
        sel.add(Item(step.kind, step.id))
        remaining -= step.cost
    return True


# ---------------------------------------------------------------- randomized greedy


def test_rg_zero_budget_is_empty():
    sol, trace = randomized_greedy(fixture_instance().with_budget(0.0), mode=Exact())
    assert sol.chosen_slots == () and sol.chosen_seeds == () and sol.phi_value == 0.0 and len(trace) == 0


def test_rg_unbounded_budget_takes_everything():
    inst = fixture_instance()
    inst = inst.with_budget(float(inst.slots.costs.sum() + inst.graph.seed_cost.sum()))
    obj = Objective(inst, Exact())
    sol, _ = randomized_greedy(inst, TINY_EPS, objective=obj)
    assert sorted(sol.chosen_slots) == inst.slots.ids
    assert sorted(sol.chosen_seeds) == inst.graph.nodes.tolist()
    assert sol.phi_value == pytest.approx(obj.phi(inst.slots.ids, inst.graph.nodes.tolist()).phi, abs=1e-9)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.5])
def test_rg_epsilon_range(eps):
    with pytest.raises(ConfigError):
        randomized_greedy(fixture_instance(), eps, Exact())


def test_rg_empty_pools():
    inst = make_instance([], [0], budget=5.0, seed_costs={0: 10})
    sol, _ = randomized_greedy(inst, 0.1, Exact())
    assert sol.chosen_seeds == () and sol.chosen_slots == ()


def test_rg_deterministic_for_seed():
    inst = fixture_instance()
    mode = MonteCarlo(R=200, rng_seed=3)
    a = randomized_greedy(inst, 0.3, mode, rng_seed=9)
    b = randomized_greedy(inst, 0.3, mode, rng_seed=9)
    assert a[0] == b[0] and a[1] == b[1]


def test_rg_meets_guarantee_on_eight_slot_six_seed_instance():
    from splitmax.diagnostics import PhiTable, brute_force_optimum, structure_report, verify_bound

    rng = np.random.default_rng(86)
    inst = None
    while inst is None or len(inst.slots) != 8 or inst.graph.n_nodes != 6:
        inst = random_instance(rng, max_slots=8, max_users=6, max_edges=10)
    obj = Objective(inst, Exact())
    report = structure_report(PhiTable.from_objective(obj, max_elems=16))
    opt = brute_force_optimum(inst)
    sol, _ = randomized_greedy(inst, TINY_EPS, objective=obj)
    assert verify_bound(sol.phi_value, report, opt)[0]


# ---------------------------------------------------------------- two-phase greedy


def test_tpg_nothing_affordable_is_empty():
    inst = make_instance([(10, [0])], [0, 1], budget=4.0, slot_costs=[5], seed_costs={0: 6, 1: 7})
    sol, trace = tpg(inst, Exact())
    assert sol.chosen_slots == () and sol.chosen_seeds == () and len(trace) == 0


def test_tpg_exact_pair_budget_takes_balanced_start():
    inst = make_instance([(100, [0, 1]), (50, [2])], [0, 1, 2], [(0, 1, 0.5)], budget=5.0, slot_costs=[2, 2], seed_costs={0: 3, 1: 3, 2: 3})
    sol, trace = tpg(inst, Exact())
    assert sol.chosen_slots == (0,) and sol.chosen_seeds == (0,)
    assert [(s.kind, s.id) for s in trace] == [("slot", 0), ("seed", 0)]


def test_tpg_takes_better_single_when_pair_unaffordable():
    inst = make_instance([(100, [0, 1, 2])], [0, 1, 2], [(0, 1, 0.5)], budget=3.0, slot_costs=[3], seed_costs={0: 3, 1: 3, 2: 3})
    sol, _ = tpg(inst, Exact())
    assert sol.chosen_slots == (0,) and sol.chosen_seeds == ()


def test_tpg_equals_eager_on_fixture():
    inst = fixture_instance()
    obj = Objective(inst, Exact())
    assert tpg(inst, objective=obj)[1].sequence == eager_greedy(inst, objective=obj)[1].sequence


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_tpg_sequence_equals_eager_when_tie_free(s):
    rng = np.random.default_rng(s)
    inst = random_instance(rng, max_slots=6, max_users=6, max_edges=10)
    obj = Objective(inst, Exact())
    if not is_tie_free(inst, obj):
        return
    assert tpg(inst, objective=obj)[1].sequence == eager_greedy(inst, objective=obj)[1].sequence


# ---------------------------------------------------------------- baselines


@pytest.mark.parametrize("algo", ["random", "topk", "hdh", "pagerank"])
def test_baseline_zero_budget_is_empty(algo):
    sol, _ = run_algorithm(algo, fixture_instance().with_budget(0.0), Exact())
    assert sol.chosen_slots == () and sol.chosen_seeds == ()


@pytest.mark.parametrize("algo", ["random", "topk", "hdh", "pagerank"])
def test_baseline_single_affordable_item(algo):
    inst = make_instance([(10, [0])], [0, 1], [(0, 1, 0.5)], budget=2.0, slot_costs=[5], seed_costs={0: 2, 1: 9})
    sol, _ = run_algorithm(algo, inst, Exact())
    assert sol.chosen_slots == () and sol.chosen_seeds == (0,)


def test_random_fixed_seed_repeats():
    inst = fixture_instance()
    assert baseline_random(inst, 4, Exact()) == baseline_random(inst, 4, Exact())


def test_random_differs_across_seeds():
    inst = fixture_instance().with_budget(1000.0)
    sols = {baseline_random(inst, s, Exact())[0].chosen_slots for s in range(5)}
    assert len(sols) > 1


def test_topk_all_too_expensive_is_empty():
    inst = make_instance([(10, [0])], [0], budget=1.0, slot_costs=[2], seed_costs={0: 2})
    assert baseline_top_k(inst, Exact())[0].phi_value == 0.0


def test_topk_unit_costs_budget_two_takes_top_two_singletons():
    inst = make_instance(
        [(100, [0]), (100, [1, 2, 3]), (100, [4, 5])],
        range(6),
        [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        budget=2.0,
    )
    sol, _ = baseline_top_k(inst, Exact())
    # singletons: seed 0 -> 5 (+ interaction 0), slot 1 -> 3, slot 2 -> 2, others <= 1
    assert sol.chosen_seeds == (0,) and sol.chosen_slots == (1,)


def test_hdh_orders_by_impressions_and_out_degree():
    inst = make_instance([(100, [0]), (100, [1, 2, 3])], range(4), [(2, 0, 0.1), (2, 1, 0.1), (3, 0, 0.1)], budget=2.0)
    sol, _ = baseline_hdh(inst, mode=Exact())
    assert sol.chosen_slots == (1,) and sol.chosen_seeds == (2,)


def test_hdh_alternate_merge():
    inst = make_instance([(100, [0]), (100, [1, 2, 3])], range(4), [(2, 0, 0.1), (2, 1, 0.1), (3, 0, 0.1)], budget=3.0)
    sol, trace = baseline_hdh(inst, merge="alternate", mode=Exact())
    assert [(s.kind, s.id) for s in trace] == [("slot", 1), ("seed", 2), ("slot", 0)]


def test_unknown_merge_rejected():
    with pytest.raises(ConfigError):
        baseline_hdh(fixture_instance(), merge="zip", mode=Exact())


GOLDEN = {
    "random": ((4, 10, 11, 2, 6, 3, 8, 0, 7, 5, 9, 1), (6, 1, 2), 15.887551990211177),
    "topk": ((1, 0, 4, 5, 2, 3, 6, 7, 9, 8, 10, 11), (8, 1, 2), 15.795211561691161),
    "hdh": ((1, 9, 0, 4, 5, 8, 2, 3, 6, 7, 10, 11), (6, 1, 2), 15.887551990211177),
    "pagerank": ((1, 0, 4, 5, 2, 3, 6, 7, 9, 8, 10, 11), (6, 1, 2), 15.887551990211177),
}


@pytest.mark.parametrize("algo", sorted(GOLDEN))
def test_baseline_golden_solutions(algo):
    sol, _ = run_algorithm(algo, fixture_instance(), Exact(), rng_seed=0)
    slots, seeds, value = GOLDEN[algo]
    assert sol.chosen_slots == slots and sol.chosen_seeds == seeds
    assert sol.phi_value == pytest.approx(value, abs=1e-9)


# ---------------------------------------------------------------- pagerank


def test_pagerank_cycle_is_uniform():
    g = SocialGraph(range(5), [0, 1, 2, 3, 4], [1, 2, 3, 4, 0])
    assert np.allclose(pagerank(g), 0.2, atol=1e-12)


def test_pagerank_two_nodes_hand_solution():
    # x_u = 0.075 + 0.425 x_v,  x_u + x_v = 1
    x = pagerank(SocialGraph([0, 1], [0], [1]))
    assert x[0] == pytest.approx(20 / 57, abs=1e-8) and x[1] == pytest.approx(37 / 57, abs=1e-8)


def test_pagerank_no_edges_uniform():
    assert np.allclose(pagerank(SocialGraph(range(4), [], [])), 0.25)


def test_pagerank_iteration_cap_logged(caplog):
    g = SocialGraph([0, 1, 2], [0, 1], [1, 2])
    with caplog.at_level(logging.INFO, logger="splitmax.optimizers"):
        x = pagerank(g, max_iter=2)
    assert "no convergence" in caplog.text
    assert x.sum() == pytest.approx(1.0)


def test_pagerank_baseline_uses_scores():
    inst = make_instance([], range(3), [(0, 2, 0.5), (1, 2, 0.5)], budget=1.0)
    sol, _ = baseline_pagerank(inst, mode=Exact())
    assert sol.chosen_seeds == (2,)


def test_unknown_algorithm():
    with pytest.raises(ConfigError):
        run_algorithm("annealing", fixture_instance())


# ---------------------------------------------------------------- shared properties


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(ALGORITHMS))
def test_budget_feasible_and_trace_consistent(s, algo):
    rng = np.random.default_rng(s)
    inst = random_instance(rng, max_slots=6, max_users=6, max_edges=10)
    obj = Objective(inst, Exact())
    sol, trace = run_algorithm(algo, inst, objective=obj, rng_seed=s, epsilon=0.2)
    assert sol.spent_billboard + sol.spent_social <= inst.budget + 1e-9
    assert sol.spent_billboard == math.fsum(obj.slot_cost[b] for b in sol.chosen_slots)
    assert sol.spent_social == math.fsum(obj.seed_cost[v] for v in sol.chosen_seeds)
    steps = list(trace)
    assert tuple(t.id for t in steps if t.kind == "slot") == sol.chosen_slots
    assert tuple(t.id for t in steps if t.kind == "seed") == sol.chosen_seeds
    prev = inst.budget
    for t in steps:
        assert t.gain >= -1e-12
        assert 0 <= t.remaining < prev
        prev = t.remaining
    assert math.fsum(t.gain for t in steps) == pytest.approx(sol.phi_value, abs=1e-9)
    assert sol.phi_value == pytest.approx(obj.phi(sol.chosen_slots, sol.chosen_seeds).phi, abs=1e-9)
    if sol.spent > 0:
        assert sum(sol.split) == pytest.approx(1.0)


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_monte_carlo_runs_are_feasible_and_repeatable(algo):
    inst = generate_synthetic(30, 3, 60, rng_seed=2, budget=2500)
    mode = MonteCarlo(R=100, rng_seed=1)
    a = run_algorithm(algo, inst, mode, rng_seed=3)
    b = run_algorithm(algo, inst, mode, rng_seed=3)
    assert a[0] == b[0] and a[1] == b[1]
    assert a[0].spent <= inst.budget
