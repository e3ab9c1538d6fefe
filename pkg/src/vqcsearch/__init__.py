"""Variational quantum circuit design by nested Monte-Carlo tree search."""

from .simulator import (
    GateKind,
    GateOp,
    PauliSumObservable,
    SampleHistogram,
    StateVector,
    apply_gate,
    expectation,
    fidelity,
    init_state,
    load_observable,
    loss_gradient,
    run_circuit,
    sample,
    save_observable,
)
from .pool import HardLimits, OperationPool, Topology, allowed_actions, build_pool
from .supernet import (
    OptimizerConfig,
    SharedParameters,
    finetune,
    init_params,
    param_slice,
    warmup,
)
from .search import (
    MctsEngine,
    SearchConfig,
    SearchReport,
    TreeNode,
    backpropagate,
    prune_children,
    run_search,
    select_node,
    ucb_score,
)
from .tasks import (
    Graph,
    MaxCut,
    QecEncoding422,
    TaskSpec,
    Vqls,
    VqeChemistry,
    evaluate,
    maxcut_hamiltonian,
    oracle_ground_energy,
    oracle_linear_solve,
    oracle_maxcut,
)

__version__ = "0.1.0"
