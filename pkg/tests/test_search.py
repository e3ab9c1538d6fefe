import math

import numpy as np
import pytest

from vqcsearch.pool import HardLimits, Topology, build_pool
from vqcsearch.search import (
    ArmStats,
    MctsEngine,
    SearchConfig,
    SearchDeadEndError,
    TreeNode,
    backpropagate,
    prune_children,
    random_layout_sampler,
    run_search,
    select_node,
    ucb_score,
)
from vqcsearch.simulator import GateKind
from vqcsearch.supernet import OptimizerConfig, init_params

UCB_ALPHA1_8_2 = 1.442026886600883  # sqrt(ln 8), frozen


def _three_action_pool():
    return build_pool(3, [GateKind.H], include_cnot=False,
                      include_placeholder=False)


def _chain(prefix):
    """Build a root-to-leaf node chain for a fixed action sequence."""
    root = TreeNode(())
    node = root
    for action in prefix:
        child = TreeNode(node.prefix + (action,), parent=node)
        node.children[action] = child
        node.stats.setdefault(action, ArmStats())
        node = child
    return root, node


def _walk(root):
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(node.children.values())


def assert_counts_conserved(root):
    for node in _walk(root):
        assert node.visit_count == sum(st.pulls for st in node.stats.values())


# ---------------------------------------------------------------------------
# ucb


def test_ucb_alpha_zero_is_pure_exploitation():
    assert ucb_score(0.37, 12, 5, 0.0) == 0.37


def test_ucb_frozen_value():
    assert ucb_score(0.0, 8, 2, 1.0) == pytest.approx(UCB_ALPHA1_8_2, abs=1e-12)


def test_ucb_unpulled_arm_is_infinite():
    assert ucb_score(0.0, 50, 0, 0.0) == math.inf
    assert ucb_score(-100.0, 1, 0, 2.0) == math.inf


def test_ucb_formula_direct():
    got = ucb_score(0.25, 20, 4, 0.7)
    assert got == pytest.approx(0.25 + 0.7 * math.sqrt(2 * math.log(20) / 4))


# ---------------------------------------------------------------------------
# backpropagation


def test_backprop_fresh_arc_reward_one():
    root, leaf = _chain([2, 0, 1])
    backpropagate(leaf, 1.0)
    node = root
    for action in (2, 0, 1):
        st = node.stats[action]
        assert (st.pulls, st.avg_reward) == (1, 1.0)
        assert node.visit_count == 1
        node = node.children[action]
    assert leaf.visit_count == 0


def test_backprop_running_mean_recurrence():
    root, leaf = _chain([1])
    backpropagate(leaf, 0.0)
    backpropagate(leaf, 1.0)
    st = root.stats[1]
    assert st.pulls == 2
    assert st.avg_reward == pytest.approx(0.5)


def test_backprop_disjoint_arcs_stay_separate():
    root = TreeNode(())
    a = TreeNode((0,), parent=root)
    b = TreeNode((1,), parent=root)
    root.children = {0: a, 1: b}
    backpropagate(a, 4.0)
    backpropagate(b, -2.0)
    assert root.stats[0].avg_reward == 4.0
    assert root.stats[1].avg_reward == -2.0
    assert root.visit_count == 2


def test_backprop_mean_matches_brute_recomputation():
    rng = np.random.default_rng(0)
    rewards = rng.normal(size=40).tolist()
    root, leaf = _chain([0, 2, 1, 0])
    for r in rewards:
        backpropagate(leaf, r)
    expected = float(np.mean(rewards))
    node = root
    for action in (0, 2, 1, 0):
        st = node.stats[action]
        assert st.pulls == 40
        assert st.avg_reward == pytest.approx(expected, abs=1e-12)
        node = node.children[action]
    assert_counts_conserved(root)


def test_backprop_rejects_non_finite():
    _, leaf = _chain([0])
    with pytest.raises(ArithmeticError):
        backpropagate(leaf, math.nan)
    with pytest.raises(ArithmeticError):
        backpropagate(leaf, math.inf)


# ---------------------------------------------------------------------------
# pruning


def _node_with(stats):
    node = TreeNode(())
    for action, (pulls, avg) in stats.items():
        node.stats[action] = ArmStats(pulls, avg)
        node.children[action] = TreeNode((action,), parent=node)
        node.visit_count += pulls
    return node


def test_prune_zero_ratio_keeps_everything():
    node = _node_with({0: (3, 0.9), 1: (3, 0.1), 2: (3, 0.0)})
    assert prune_children(node, 0.0, 1) == 0
    assert node.pruned == set()


def test_prune_worked_example():
    # pull-weighted node average (10*1.0 + 2*0.5 + 2*0.1)/14 = 0.8;
    # ratio 0.5 puts the threshold at 0.4, cutting only the 0.1 arm
    node = _node_with({0: (10, 1.0), 1: (2, 0.5), 2: (2, 0.1)})
    assert prune_children(node, 0.5, 2) == 1
    assert node.pruned == {2}
    assert 2 in node.stats  # stats retained for count conservation
    assert node.visit_count == sum(st.pulls for st in node.stats.values())


def test_prune_respects_min_children_floor():
    node = _node_with({0: (5, 1.0), 1: (5, 0.01), 2: (5, 0.02)})
    assert prune_children(node, 0.9, 3) == 0
    assert node.pruned == set()
    node2 = _node_with({0: (5, 1.0), 1: (5, 0.01), 2: (5, 0.02)})
    # floor 2 allows exactly one cut, taken in ascending-average order
    assert prune_children(node2, 0.9, 2) == 1
    assert node2.pruned == {1}


def test_prune_skips_unvisited_children():
    node = _node_with({0: (6, 1.0), 1: (0, 0.0), 2: (4, 0.05)})
    node.stats[1] = ArmStats(0, 0.0)
    assert prune_children(node, 0.5, 1) == 1
    assert node.pruned == {2}


def test_prune_stops_at_first_survivor():
    # ascending order: 0.2 below threshold, 0.6 above → walk stops, even
    # though nothing after 0.6 is examined
    node = _node_with({0: (4, 1.0), 1: (4, 0.6), 2: (4, 0.2)})
    node_avg = (4 * 1.0 + 4 * 0.6 + 4 * 0.2) / 12
    assert 0.2 < 0.5 * node_avg < 0.6
    assert prune_children(node, 0.5, 1) == 1
    assert node.pruned == {2}


# ---------------------------------------------------------------------------
# selection


@pytest.fixture
def tiny():
    pool = _three_action_pool()
    limits = HardLimits(max_layers=2)
    return pool, limits


def test_select_expands_unvisited_first(tiny):
    pool, limits = tiny
    cfg = SearchConfig(alpha=0.4)
    root = TreeNode(())
    child = select_node(root, pool, limits, cfg, rng=None)
    assert child.prefix == (0,)
    assert root.children[0] is child
    # next calls expand the remaining actions in index order
    assert select_node(root, pool, limits, cfg, rng=None).prefix == (1,)
    assert select_node(root, pool, limits, cfg, rng=None).prefix == (2,)


def test_select_greedy_when_alpha_zero(tiny):
    pool, limits = tiny
    node = _node_with({0: (3, 0.2), 1: (3, 0.9), 2: (3, 0.4)})
    cfg = SearchConfig(alpha=0.0, prune_ratio=0.0)
    assert select_node(node, pool, limits, cfg, rng=None).prefix == (1,)


def test_select_ties_break_to_lowest_index(tiny):
    pool, limits = tiny
    node = _node_with({0: (3, 0.5), 1: (3, 0.5), 2: (3, 0.5)})
    cfg = SearchConfig(alpha=0.0, prune_ratio=0.0)
    assert select_node(node, pool, limits, cfg, rng=None).prefix == (0,)


def test_select_alpha_zero_invariant_under_reward_shift(tiny):
    pool, limits = tiny
    cfg = SearchConfig(alpha=0.0, prune_ratio=0.0)
    base = {0: (3, 0.2), 1: (5, 0.9), 2: (2, 0.4)}
    picks = []
    for shift in (0.0, 10.0, -3.5):
        node = _node_with({a: (p, r + shift) for a, (p, r) in base.items()})
        picks.append(select_node(node, pool, limits, cfg, rng=None).prefix)
    assert picks[0] == picks[1] == picks[2]


def test_select_prunes_before_choosing(tiny):
    # the starved arm would win on exploration bonus alone, but its average
    # sits under the threshold so pruning removes it first
    pool, limits = tiny
    stats = {0: (50, 1.0), 1: (1, 0.01), 2: (10, 0.9)}
    cfg = SearchConfig(alpha=1.0, prune_ratio=0.5, min_children=2)
    node = _node_with(stats)
    st = node.stats[1]
    bonus = ucb_score(st.avg_reward, node.visit_count, st.pulls, cfg.alpha)
    assert bonus > ucb_score(1.0, node.visit_count, 50, cfg.alpha)
    child = select_node(node, pool, limits, cfg, rng=None)
    assert node.pruned == {1}
    assert child.prefix == (2,)  # best UCB among the survivors
    # with a floor covering every child, the same arm survives and wins
    node2 = _node_with(stats)
    cfg2 = SearchConfig(alpha=1.0, prune_ratio=0.5, min_children=3)
    assert select_node(node2, pool, limits, cfg2, rng=None).prefix == (1,)


def test_select_seeded_expansion_is_reproducible(tiny):
    pool, limits = tiny
    cfg = SearchConfig()
    picks = []
    for _ in range(2):
        root = TreeNode(())
        rng = np.random.default_rng(123)
        picks.append(select_node(root, pool, limits, cfg, rng=rng).prefix)
    assert picks[0] == picks[1]


def test_select_dead_end_raises():
    pool = build_pool(2, [], Topology.LINE, include_placeholder=False)
    limits = HardLimits(max_layers=2, max_count_per_kind={GateKind.CNOT: 0})
    with pytest.raises(SearchDeadEndError):
        select_node(TreeNode(()), pool, limits, SearchConfig(), rng=None)


# ---------------------------------------------------------------------------
# engine stages


def _engine(reward_by_first, seed=0, **cfg_kw):
    pool = _three_action_pool()
    limits = HardLimits(max_layers=cfg_kw.pop("max_layers", 1))
    cfg = SearchConfig(seed=seed, **cfg_kw)
    fn = lambda layout, params: reward_by_first[layout[0]]
    engine = MctsEngine(pool, limits, cfg, fn)
    params = init_params(limits.max_layers, pool.size_c, 1, scheme="zeros")
    return engine, params


def test_single_round_reaches_full_depth_and_backpropagates():
    engine, params = _engine({0: 1.0, 1: 2.0, 2: 3.0}, max_layers=3)
    reward = engine.execute_single_round(engine.root, params)
    assert reward in (1.0, 2.0, 3.0)
    assert engine.root.visit_count == 1
    node = engine.root
    depth = 0
    while node.children:
        node = next(iter(node.children.values()))
        depth += 1
    assert depth == 3
    assert engine.rounds_run == 1


def test_single_round_single_entry_pool():
    pool = build_pool(1, [GateKind.H], include_cnot=False,
                      include_placeholder=False)
    limits = HardLimits(max_layers=4)
    engine = MctsEngine(pool, limits, SearchConfig(seed=0),
                        lambda layout, params: float(len(layout)))
    params = init_params(4, 1, 1, scheme="zeros")
    assert engine.execute_single_round(engine.root, params) == 4.0
    leaf = engine.root
    while leaf.children:
        leaf = next(iter(leaf.children.values()))
    assert leaf.prefix == (0, 0, 0, 0)


def test_rounds_are_seed_reproducible():
    traces = []
    for _ in range(2):
        engine, params = _engine({0: 0.3, 1: 0.6, 2: 0.1}, seed=7, max_layers=2)
        traces.append([engine.execute_single_round(engine.root, params)
                       for _ in range(20)])
    assert traces[0] == traces[1]


def test_sample_arc_zero_rounds_is_pure_descent():
    engine, params = _engine({0: 0.0, 1: 1.0, 2: 0.5}, max_layers=1,
                             rounds_per_call=10)
    for _ in range(30):
        engine.execute_single_round(engine.root, params)
    before = engine.rounds_run
    arc = engine.sample_arc(params, rounds=0)
    assert engine.rounds_run == before
    assert arc == [1]


def test_sample_arc_finds_rigged_optimum():
    engine, params = _engine({0: 0.0, 1: 0.0, 2: 1.0}, seed=3, max_layers=1,
                             alpha=0.4, rounds_per_call=40)
    arc = engine.sample_arc(params)
    assert arc == [2]


def test_sample_arc_respects_limits():
    pool = build_pool(2, [GateKind.RY], Topology.LINE, include_placeholder=True)
    limits = HardLimits(max_layers=5, max_count_per_kind={GateKind.CNOT: 1})
    engine = MctsEngine(pool, limits, SearchConfig(seed=1, rounds_per_call=25),
                        lambda layout, params: 1.0)
    params = init_params(5, pool.size_c, pool.max_params_l, scheme="zeros")
    for _ in range(10):
        arc = engine.sample_arc(params)
        kinds = [pool.entries[i].kind for i in arc]
        assert len(arc) == 5
        assert kinds.count(GateKind.CNOT) <= 1


def test_exploit_arc_picks_highest_reward_of_three():
    # three rigged arms scoring 10, 10, 20: exploitation returns the third
    engine, params = _engine({0: 10.0, 1: 10.0, 2: 20.0}, seed=5, max_layers=1,
                             alpha=0.5, rounds_per_call=30)
    assert engine.exploit_arc(params) == [2]


def test_exploit_arc_zero_rounds_equals_sample_arc_zero():
    for seed in (0, 1, 2):
        a, params = _engine({0: 0.2, 1: 0.9, 2: 0.4}, seed=seed, max_layers=2)
        b, _ = _engine({0: 0.2, 1: 0.9, 2: 0.4}, seed=seed, max_layers=2)
        for _ in range(25):
            a.execute_single_round(a.root, params)
            b.execute_single_round(b.root, params)
        assert a.exploit_arc(params, rounds_per_level=0) == \
            b.sample_arc(params, rounds=0)


def test_exploit_arc_simulation_budget():
    engine, params = _engine({0: 0.1, 1: 0.2, 2: 0.3}, max_layers=3,
                             rounds_per_call=4)
    engine.exploit_arc(params)
    assert engine.rounds_run <= 4 * 3


def test_count_conservation_everywhere():
    engine, params = _engine({0: 0.3, 1: 0.8, 2: 0.5}, seed=11, max_layers=3,
                             alpha=0.6, prune_ratio=0.4, rounds_per_call=15)
    engine.sample_arc(params)
    engine.exploit_arc(params)
    engine.sample_arc(params)
    assert_counts_conserved(engine.root)
    stats = engine.tree_stats()
    assert stats["rounds_run"] == engine.rounds_run
    assert stats["max_depth"] <= 3


def test_arc_consistency_of_tree_structure():
    engine, params = _engine({0: 0.3, 1: 0.8, 2: 0.5}, seed=2, max_layers=3,
                             rounds_per_call=20)
    engine.sample_arc(params)
    for node in _walk(engine.root):
        for action, child in node.children.items():
            assert child.parent is node
            assert child.prefix == node.prefix + (action,)
            assert child.depth == node.depth + 1


def test_engine_dead_end_propagates():
    pool = build_pool(2, [], Topology.LINE, include_placeholder=False)
    limits = HardLimits(max_layers=3, max_count_per_kind={GateKind.CNOT: 1})
    engine = MctsEngine(pool, limits, SearchConfig(seed=0),
                        lambda layout, params: 0.0)
    params = init_params(3, pool.size_c, 1, scheme="zeros")
    with pytest.raises(SearchDeadEndError):
        engine.execute_single_round(engine.root, params)


# ---------------------------------------------------------------------------
# config / sampler / outer loop


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(alpha=-0.1)
    with pytest.raises(ValueError):
        SearchConfig(prune_ratio=1.0)
    with pytest.raises(ValueError):
        SearchConfig(min_children=0)
    with pytest.raises(ValueError):
        SearchConfig(rounds_per_call=-1)
    with pytest.raises(ValueError):
        SearchConfig(nesting_level=2)
    with pytest.raises(ValueError):
        SearchConfig(iterations=-1)


def test_random_layout_sampler_obeys_limits():
    pool = build_pool(3, [GateKind.ROT], Topology.LINE, include_placeholder=True)
    limits = HardLimits(max_layers=6, max_count_per_kind={GateKind.CNOT: 2})
    draw = random_layout_sampler(pool, limits, np.random.default_rng(4))
    for _ in range(50):
        layout = draw()
        assert len(layout) == 6
        kinds = [pool.entries[i].kind for i in layout]
        assert kinds.count(GateKind.CNOT) <= 2


def test_run_search_single_entry_pool():
    from vqcsearch.tasks import VqeChemistry, evaluate
    from vqcsearch.simulator import PauliSumObservable
    from vqcsearch.tasks import ChemistryPayload

    pool = build_pool(1, [GateKind.RY], include_cnot=False,
                      include_placeholder=False)
    task = VqeChemistry(payload=ChemistryPayload(
        PauliSumObservable(1, [(1.0, "Z")])))
    limits = HardLimits(max_layers=1)
    cfg = SearchConfig(seed=0, iterations=8, rounds_per_call=2)
    opt = OptimizerConfig(method="adam", learning_rate=0.1, batch_size=2, seed=0)
    report = run_search(task, pool, limits, cfg, opt)
    assert report.best_layout == [0]
    assert len(report.reward_trace) == 8
    assert report.best_reward == pytest.approx(max(report.reward_trace))
    _, reward = evaluate(task, pool, report.best_layout, report.params)
    assert reward == pytest.approx(report.best_reward, abs=1e-12)


def test_run_search_zero_iterations():
    from vqcsearch.tasks import VqeChemistry, ChemistryPayload
    from vqcsearch.simulator import PauliSumObservable

    pool = build_pool(1, [GateKind.RY], include_cnot=False,
                      include_placeholder=False)
    task = VqeChemistry(payload=ChemistryPayload(
        PauliSumObservable(1, [(1.0, "Z")])))
    limits = HardLimits(max_layers=1)
    report = run_search(task, pool, limits,
                        SearchConfig(seed=0, iterations=0),
                        OptimizerConfig(seed=0))
    assert report.best_layout is None
    assert report.best_reward is None
    assert report.reward_trace == []
    assert not report.stopped_early


def test_run_search_bit_reproducible():
    from vqcsearch.tasks import VqeChemistry, ChemistryPayload
    from vqcsearch.simulator import PauliSumObservable

    pool = build_pool(2, [GateKind.RY], Topology.LINE, include_placeholder=True)
    task = VqeChemistry(payload=ChemistryPayload(
        PauliSumObservable(2, [(1.0, "ZZ"), (0.3, "XI")])))
    limits = HardLimits(max_layers=3)
    reports = []
    for _ in range(2):
        cfg = SearchConfig(seed=21, iterations=5, rounds_per_call=5)
        opt = OptimizerConfig(learning_rate=0.05, batch_size=2, seed=21)
        reports.append(run_search(task, pool, limits, cfg, opt))
    a, b = reports
    assert a.reward_trace == b.reward_trace
    assert a.best_layout == b.best_layout
    assert np.array_equal(a.params.values, b.params.values)


def test_run_search_early_stop():
    from vqcsearch.tasks import VqeChemistry, ChemistryPayload
    from vqcsearch.simulator import PauliSumObservable

    # reward of the empty-handed identity layout is -<Z> = -1... loss <Z>=1,
    # so rig an observable whose reward is already above threshold
    pool = build_pool(1, [GateKind.RY], include_cnot=False,
                      include_placeholder=False)
    task = VqeChemistry(payload=ChemistryPayload(
        PauliSumObservable(1, [(-1.0, "Z")])))
    limits = HardLimits(max_layers=1)
    cfg = SearchConfig(seed=0, iterations=50, rounds_per_call=2,
                       early_stop_reward=0.9)
    opt = OptimizerConfig(batch_size=1, seed=0)
    report = run_search(task, pool, limits, cfg, opt)
    assert report.stopped_early
    assert len(report.reward_trace) < 50
    assert report.reward_trace[-1] >= 0.9
