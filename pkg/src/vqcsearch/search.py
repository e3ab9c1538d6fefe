"""Nested Monte-Carlo tree search over layer-wise gate choices.

The tree is rooted at the empty circuit; a node at depth d fixes the first
d pool choices of a layout.  One simulation round descends to a full-depth
leaf, scores the finished circuit once, and credits that single global
reward to every decision on the path (the per-layer bandits are treated as
independent, so each layer's arm sees the shared outcome).  Exploitation
re-runs rounds beneath every node it passes through, which is what makes
the search nested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pool import HardLimits, OperationPool, allowed_actions
from .supernet import (
    OptimizerConfig,
    SharedParameters,
    _batch_gradients,
    _Optimizer,
    init_params,
    warmup,
)


class SearchDeadEndError(RuntimeError):
    """No action is allowed at a node and no placeholder exists to fall back on."""


@dataclass
class SearchConfig:
    alpha: float = 0.4
    prune_ratio: float = 0.5
    min_children: int = 2
    rounds_per_call: int = 10
    nesting_level: int = 1
    iterations: int = 50
    early_stop_reward: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 <= self.prune_ratio < 1.0:
            raise ValueError(f"prune_ratio must be in [0, 1), got {self.prune_ratio}")
        if self.min_children < 1:
            raise ValueError(f"min_children must be >= 1, got {self.min_children}")
        if self.rounds_per_call < 0:
            raise ValueError(f"rounds_per_call must be >= 0, got {self.rounds_per_call}")
        if self.nesting_level not in (0, 1):
            raise ValueError(f"nesting_level must be 0 or 1, got {self.nesting_level}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")


@dataclass
class ArmStats:
    pulls: int = 0
    avg_reward: float = 0.0


class TreeNode:
    """One circuit prefix.  Per-arm statistics live on the parent side."""

    __slots__ = ("prefix", "parent", "visit_count", "stats", "children",
                 "pruned", "_allowed")

    def __init__(self, prefix: tuple[int, ...] = (), parent: "TreeNode | None" = None):
        self.prefix = tuple(prefix)
        self.parent = parent
        self.visit_count = 0
        self.stats: dict[int, ArmStats] = {}
        self.children: dict[int, TreeNode] = {}
        self.pruned: set[int] = set()
        self._allowed: list[int] | None = None

    def allowed(self, pool: OperationPool, limits: HardLimits) -> list[int]:
        if self._allowed is None:
            self._allowed = allowed_actions(self.prefix, pool, limits)
        return self._allowed

    @property
    def depth(self) -> int:
        return len(self.prefix)


def ucb_score(avg_reward: float, node_visits: int, arm_pulls: int,
              alpha: float) -> float:
    """Mean reward plus exploration bonus; unvisited arms rank first."""
    if arm_pulls == 0:
        return math.inf
    return avg_reward + alpha * math.sqrt(2.0 * math.log(node_visits) / arm_pulls)


def backpropagate(leaf: TreeNode, reward: float) -> None:
    """Credit one finished circuit's reward to every decision on its path.

    Each edge on the leaf-to-root path receives the same global value: the
    per-layer average is updated as a running mean and the parent's visit
    count grows by one, so ``visit_count == sum of arm pulls`` everywhere.
    """
    if not math.isfinite(reward):
        raise ArithmeticError(f"non-finite reward {reward!r} cannot be backpropagated")
    child = leaf
    node = leaf.parent
    while node is not None:
        action = child.prefix[-1]
        st = node.stats.setdefault(action, ArmStats())
        st.pulls += 1
        st.avg_reward += (reward - st.avg_reward) / st.pulls
        node.visit_count += 1
        child = node
        node = node.parent


def prune_children(node: TreeNode, prune_ratio: float, min_children: int) -> int:
    """Drop persistently weak children; returns how many were cut this call.

    A child is cut when its average reward falls below ``prune_ratio`` times
    the node's pull-weighted average, walking candidates in ascending
    average order and never leaving fewer than ``min_children`` survivors.
    Unvisited children are exempt (they have no average yet), and pruned
    statistics are kept so visit-count bookkeeping still balances.
    """
    total = sum(st.pulls for st in node.stats.values())
    if total == 0:
        return 0
    node_avg = sum(st.pulls * st.avg_reward for st in node.stats.values()) / total
    threshold = prune_ratio * node_avg
    survivors = [a for a in node.children if a not in node.pruned]
    candidates = sorted(
        (a for a in survivors if node.stats.get(a, ArmStats()).pulls > 0),
        key=lambda a: (node.stats[a].avg_reward, a),
    )
    cut = 0
    remaining = len(survivors)
    for action in candidates:
        if remaining <= min_children:
            break
        if node.stats[action].avg_reward < threshold:
            node.pruned.add(action)
            cut += 1
            remaining -= 1
        else:
            break
    return cut


def select_node(node: TreeNode, pool: OperationPool, limits: HardLimits,
                policy: SearchConfig, rng: np.random.Generator | None = None,
                ) -> TreeNode:
    """One descent step: expand if possible, otherwise prune then pick by UCB.

    Expansion order is drawn from ``rng`` when given (lowest index without);
    among fully expanded children, score ties go to the lowest pool index.
    """
    allowed = node.allowed(pool, limits)
    if not allowed:
        raise SearchDeadEndError(
            f"no allowed action after prefix {list(node.prefix)}"
        )
    unexpanded = [a for a in allowed if a not in node.children]
    if unexpanded:
        if rng is None:
            action = unexpanded[0]
        else:
            action = unexpanded[int(rng.integers(len(unexpanded)))]
        child = TreeNode(node.prefix + (action,), parent=node)
        node.children[action] = child
        node.stats.setdefault(action, ArmStats())
        return child
    prune_children(node, policy.prune_ratio, policy.min_children)
    best_action = None
    best_score = -math.inf
    for action in sorted(a for a in allowed if a not in node.pruned):
        st = node.stats[action]
        score = ucb_score(st.avg_reward, node.visit_count, st.pulls, policy.alpha)
        if score > best_score:
            best_action, best_score = action, score
    if best_action is None:
        raise SearchDeadEndError(
            f"all children pruned after prefix {list(node.prefix)}"
        )
    return node.children[best_action]


@dataclass
class SearchReport:
    best_layout: list[int] | None
    best_reward: float | None
    reward_trace: list[float]
    stopped_early: bool
    tree_stats: dict
    params: SharedParameters


class MctsEngine:
    """Search state shared by the four stage operations.

    ``reward_fn(layout, params)`` scores one finished circuit; the engine
    itself never looks inside layouts, so tests can rig rewards freely.
    """

    def __init__(self, pool: OperationPool, limits: HardLimits, cfg: SearchConfig,
                 reward_fn, rng: np.random.Generator | None = None):
        self.pool = pool
        self.limits = limits
        self.cfg = cfg
        self.reward_fn = reward_fn
        self.rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        self.root = TreeNode(())
        self.rounds_run = 0

    def execute_single_round(self, start: TreeNode,
                             params: SharedParameters) -> float:
        """Descend from ``start`` to a full-depth leaf, score it, backpropagate."""
        node = start
        while node.depth < self.limits.max_layers:
            node = select_node(node, self.pool, self.limits, self.cfg, self.rng)
        reward = float(self.reward_fn(list(node.prefix), params))
        backpropagate(node, reward)
        self.rounds_run += 1
        return reward

    def sample_arc(self, params: SharedParameters,
                   rounds: int | None = None) -> list[int]:
        """Run simulation rounds from the root, then read off one full arc."""
        n = self.cfg.rounds_per_call if rounds is None else rounds
        for _ in range(n):
            self.execute_single_round(self.root, params)
        node = self.root
        while node.depth < self.limits.max_layers:
            node = select_node(node, self.pool, self.limits, self.cfg, self.rng)
        return list(node.prefix)

    def exploit_arc(self, params: SharedParameters,
                    rounds_per_level: int | None = None) -> list[int]:
        """Descend with fresh simulation rounds beneath every visited node."""
        n = self.cfg.rounds_per_call if rounds_per_level is None else rounds_per_level
        node = self.root
        while node.depth < self.limits.max_layers:
            for _ in range(n):
                self.execute_single_round(node, params)
            node = select_node(node, self.pool, self.limits, self.cfg, self.rng)
        return list(node.prefix)

    def tree_stats(self) -> dict:
        nodes = 0
        max_depth = 0
        pruned = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            nodes += 1
            max_depth = max(max_depth, node.depth)
            pruned += len(node.pruned)
            stack.extend(node.children.values())
        return {
            "node_count": nodes,
            "max_depth": max_depth,
            "pruned_arms": pruned,
            "rounds_run": self.rounds_run,
        }


def random_layout_sampler(pool: OperationPool, limits: HardLimits,
                          rng: np.random.Generator):
    """Uniform random full-depth layouts that respect the hard limits."""

    def draw() -> list[int]:
        prefix: list[int] = []
        for _ in range(limits.max_layers):
            acts = allowed_actions(prefix, pool, limits)
            if not acts:
                raise SearchDeadEndError(
                    f"no allowed action after prefix {prefix}"
                )
            prefix.append(int(acts[int(rng.integers(len(acts)))]))
        return prefix

    return draw


def run_search(
    task,
    pool: OperationPool,
    limits: HardLimits,
    cfg: SearchConfig,
    opt: OptimizerConfig,
    warmup_cfg: OptimizerConfig | None = None,
    init_scheme: str = "uniform",
) -> SearchReport:
    """Full search loop: optional warm-up, then per iteration one batch of
    sampled arcs, one shared-parameter update, and one exploitation pass
    whose reward decides early stopping and the reported best layout."""
    from .tasks import evaluate  # local import: tasks builds on this module's inputs

    params = init_params(
        limits.max_layers, pool.size_c, pool.max_params_l,
        scheme=init_scheme, seed=opt.seed,
    )
    if warmup_cfg is not None and warmup_cfg.steps > 0:
        sampler = random_layout_sampler(
            pool, limits, np.random.default_rng(warmup_cfg.seed)
        )
        params = warmup(task, pool, sampler, params, warmup_cfg)

    def reward_fn(layout, ps):
        return evaluate(task, pool, layout, ps)[1]

    engine = MctsEngine(pool, limits, cfg, reward_fn)
    optimizer = _Optimizer(opt, params.values.shape)
    threshold = cfg.early_stop_reward
    if threshold is None:
        threshold = getattr(task, "early_stop_reward", None)

    trace: list[float] = []
    best_reward = -math.inf
    best_layout: list[int] | None = None
    best_params = params
    stopped_early = False
    trainable = pool.max_params_l > 0

    for _ in range(cfg.iterations):
        batch = [engine.sample_arc(params) for _ in range(opt.batch_size)]
        if trainable:
            grads = _batch_gradients(task, pool, batch, params)
            grad = np.mean(grads, axis=0)
            params = SharedParameters(optimizer.step(params.values, grad))
        if cfg.nesting_level == 1:
            arc = engine.exploit_arc(params)
        else:
            arc = engine.exploit_arc(params, rounds_per_level=0)
        reward = float(reward_fn(arc, params))
        trace.append(reward)
        if reward > best_reward:
            best_reward = reward
            best_layout = arc
            best_params = params.copy()
        if threshold is not None and reward >= threshold:
            stopped_early = True
            break

    return SearchReport(
        best_layout=list(best_layout) if best_layout is not None else None,
        best_reward=best_reward if best_layout is not None else None,
        reward_trace=trace,
        stopped_early=stopped_early,
        tree_stats=engine.tree_stats(),
        params=best_params,
    )
