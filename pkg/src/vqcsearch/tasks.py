"""The four benchmark tasks and their brute-force verification oracles.

Each task turns a finished layout into a scalar loss; ``evaluate`` then
applies the placeholder penalty and reward scaling.  The oracles at the
bottom are deliberately independent of the search machinery: exhaustive
enumeration for MaxCut, dense diagonalization for ground energies, and a
dense linear solve for the VQLS reference distribution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pool import OperationPool
from .simulator import (
    GateKind,
    GateOp,
    PauliSumObservable,
    StateVector,
    apply_pauli_word,
    bind_layout,
    evolve_batch,
    expectation,
    init_state,
    observable_matrix,
    run_circuit,
)


class DegenerateSystemError(ValueError):
    """The linear system's matrix is singular or numerically unusable."""


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph; vertex i is measured on qubit i."""

    num_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        if self.num_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        norm = []
        for edge in self.edges:
            if len(edge) == 2:
                u, v = edge
                w = 1.0
            else:
                u, v, w = edge
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u}, {v}) outside vertex range")
            if not math.isfinite(w):
                raise ValueError(f"edge ({u}, {v}) has non-finite weight")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge between {u} and {v}")
            seen.add(key)
            norm.append((u, v, w))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def total_weight(self) -> float:
        return sum(w for _, _, w in self.edges)


def load_graph(path) -> Graph:
    """Read the graph JSON format {"vertices": n, "edges": [[u, v, w], ...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "vertices" not in data or "edges" not in data:
        raise ValueError(f"{path}: graph file needs vertices and edges keys")
    return Graph(
        num_vertices=int(data["vertices"]),
        edges=tuple(tuple(e) for e in data["edges"]),
    )


# ---------------------------------------------------------------------------
# task specifications


@dataclass
class TaskSpec:
    """Common task surface: loss definition plus reward bookkeeping knobs."""

    num_qubits: int
    initial_state_kind: str = "zeros"
    penalty_beta: float = 0.0
    reward_scaling: str = "identity"
    early_stop_reward: float | None = None

    variant = "abstract"

    def __post_init__(self) -> None:
        if self.penalty_beta < 0:
            raise ValueError(f"penalty_beta must be >= 0, got {self.penalty_beta}")
        if self.reward_scaling not in ("identity", "exp_neg10"):
            raise ValueError(f"unknown reward scaling {self.reward_scaling!r}")
        if self.initial_state_kind not in ("zeros", "plus"):
            raise ValueError(f"unknown initial state {self.initial_state_kind!r}")

    def initial_state(self) -> StateVector:
        return init_state(self.num_qubits, self.initial_state_kind)

    def output_state(self, pool, layout, params) -> StateVector:
        return run_circuit(pool, layout, params, self.initial_state())

    def loss(self, pool, layout, params) -> float:
        raise NotImplementedError


# --- [[4,2,2]] encoder discovery -------------------------------------------

_SINGLE_QUBIT_INPUTS = {
    "0": np.array([1.0, 0.0], dtype=np.complex128),
    "1": np.array([0.0, 1.0], dtype=np.complex128),
    "+": np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0),
    "-": np.array([1.0, -1.0], dtype=np.complex128) / math.sqrt(2.0),
    "+i": np.array([1.0, 1.0j], dtype=np.complex128) / math.sqrt(2.0),
    "-i": np.array([1.0, -1.0j], dtype=np.complex128) / math.sqrt(2.0),
    "T": np.array([1.0, np.exp(1.0j * math.pi / 4.0)], dtype=np.complex128)
    / math.sqrt(2.0),
}

REFERENCE_ENCODER_422 = (
    GateOp(GateKind.H, (3,)),
    GateOp(GateKind.CNOT, (0, 2)),
    GateOp(GateKind.CNOT, (1, 2)),
    GateOp(GateKind.CNOT, (3, 2)),
    GateOp(GateKind.CNOT, (3, 1)),
    GateOp(GateKind.CNOT, (3, 0)),
)


@dataclass
class Qec422Payload:
    """The 49 product inputs and their images under the reference encoder."""

    reference_encoder: tuple[GateOp, ...]
    input_labels: list[tuple[str, str]]
    input_set: np.ndarray          # (49, 16)
    reference_outputs: np.ndarray  # (49, 16)


def make_qec422_payload() -> Qec422Payload:
    zero = np.array([1.0, 0.0], dtype=np.complex128)
    labels = []
    rows = []
    for name1, phi1 in _SINGLE_QUBIT_INPUTS.items():
        for name2, phi2 in _SINGLE_QUBIT_INPUTS.items():
            labels.append((name1, name2))
            state = np.kron(np.kron(np.kron(phi1, phi2), zero), zero)
            rows.append(state)
    inputs = np.array(rows)
    refs = evolve_batch(inputs, list(REFERENCE_ENCODER_422), 4)
    return Qec422Payload(
        reference_encoder=REFERENCE_ENCODER_422,
        input_labels=labels,
        input_set=inputs,
        reference_outputs=refs,
    )


_QEC_PAYLOAD: Qec422Payload | None = None


def _qec_payload() -> Qec422Payload:
    global _QEC_PAYLOAD
    if _QEC_PAYLOAD is None:
        _QEC_PAYLOAD = make_qec422_payload()
    return _QEC_PAYLOAD


def qec422_loss(pool, layout, params) -> float:
    """1 minus the mean fidelity to the reference encoder over the 49 inputs."""
    payload = _qec_payload()
    gates = bind_layout(pool, layout, params)
    outs = evolve_batch(payload.input_set, gates, 4)
    overlaps = np.einsum("bi,bi->b", payload.reference_outputs.conj(), outs)
    return float(1.0 - np.mean(np.abs(overlaps) ** 2))


@dataclass
class QecEncoding422(TaskSpec):
    num_qubits: int = 4
    reward_scaling: str = "exp_neg10"

    variant = "qec422"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.num_qubits != 4:
            raise ValueError("the [[4,2,2]] encoding task is fixed at 4 qubits")

    @property
    def payload(self) -> Qec422Payload:
        return _qec_payload()

    def loss(self, pool, layout, params) -> float:
        return qec422_loss(pool, layout, params)


# --- variational linear solver ----------------------------------------------


@dataclass
class VqlsPayload:
    """A = sum of c_l * (single Pauli word); b is prepared by U = H on every qubit."""

    num_qubits: int
    a_terms: tuple[tuple[float, str], ...]

    def __post_init__(self) -> None:
        if not self.a_terms:
            raise ValueError("linear system needs at least one term")
        norm = []
        for coeff, word in self.a_terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient for term {word!r}")
            if len(word) != self.num_qubits or any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"bad Pauli word {word!r} for {self.num_qubits} qubits")
            norm.append((coeff, word))
        self.a_terms = tuple(norm)


def paper_vqls_payload(zeta: float = 1.0, j: float = 0.1, eta: float = 0.2,
                       num_qubits: int = 4) -> VqlsPayload:
    """The benchmark system: A = zeta*I + j*X_0 + j*X_1 + eta*Z_2 Z_3."""
    if num_qubits < 4:
        raise ValueError("the benchmark system uses at least 4 qubits")
    eye = "I" * num_qubits

    def with_ops(ops: dict[int, str]) -> str:
        word = list(eye)
        for q, ch in ops.items():
            word[q] = ch
        return "".join(word)

    return VqlsPayload(
        num_qubits=num_qubits,
        a_terms=(
            (zeta, eye),
            (j, with_ops({0: "X"})),
            (j, with_ops({1: "X"})),
            (eta, with_ops({2: "Z", 3: "Z"})),
        ),
    )


def _vqls_pieces_from_state(state: StateVector, payload: VqlsPayload
                            ) -> tuple[float, float]:
    """(numerator, denominator) of the local-cost ratio for an ansatz state."""
    n = payload.num_qubits
    psi = np.zeros_like(state.amplitudes)
    for coeff, word in payload.a_terms:
        psi = psi + coeff * apply_pauli_word(state, word).amplitudes
    den = float(np.real(np.vdot(psi, psi)))
    # U P U^dag with U = H^(x)n and P = 1/2 + (1/2n) sum Z_j reduces to
    # 1/2 + (1/2n) sum X_j, since H Z H = X
    tensor = psi.reshape((2,) * n)
    m_psi = 0.5 * psi
    for q in range(n):
        m_psi = m_psi + np.roll(tensor, 1, axis=q).reshape(-1) / (2.0 * n)
    num = float(np.real(np.vdot(psi, m_psi)))
    return num, den


def vqls_cost_from_state(state: StateVector, payload: VqlsPayload) -> float:
    num, den = _vqls_pieces_from_state(state, payload)
    if abs(den) < 1e-12:
        raise DegenerateSystemError("A maps the ansatz state to (numerically) zero")
    value = 1.0 - num / den
    return float(min(max(value, 0.0), 1.0 + 1e-9))


def vqls_cost(pool, layout, params, payload: VqlsPayload) -> float:
    state = run_circuit(pool, layout, params, init_state(payload.num_qubits, "plus"))
    return vqls_cost_from_state(state, payload)


@dataclass
class Vqls(TaskSpec):
    num_qubits: int = 4
    initial_state_kind: str = "plus"
    penalty_beta: float = 0.01
    reward_scaling: str = "exp_neg10"
    payload: VqlsPayload = field(default_factory=paper_vqls_payload)

    variant = "vqls"

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.payload.num_qubits != self.num_qubits:
            raise ValueError(
                f"linear system on {self.payload.num_qubits} qubits does not "
                f"match task register of {self.num_qubits}"
            )

    def loss(self, pool, layout, params) -> float:
        state = self.output_state(pool, layout, params)
        return vqls_cost_from_state(state, self.payload)

    def loss_pieces(self, pool, layout, params) -> tuple[float, float]:
        """Ratio pieces for the quotient-rule parameter-shift gradient."""
        state = self.output_state(pool, layout, params)
        return _vqls_pieces_from_state(state, self.payload)


# --- chemistry ---------------------------------------------------------------


@dataclass
class ChemistryPayload:
    hamiltonian: PauliSumObservable


def chemistry_loss(pool, layout, params, payload: ChemistryPayload) -> float:
    """Energy expectation (Hartree) of the evolved vacuum register."""
    n = payload.hamiltonian.num_qubits
    state = run_circuit(pool, layout, params, init_state(n, "zeros"))
    return expectation(state, payload.hamiltonian)


@dataclass
class VqeChemistry(TaskSpec):
    num_qubits: int = 0
    payload: ChemistryPayload | None = None

    variant = "chemistry"

    def __post_init__(self) -> None:
        if self.payload is None:
            raise ValueError("chemistry task needs a Hamiltonian payload")
        if self.num_qubits == 0:
            self.num_qubits = self.payload.hamiltonian.num_qubits
        super().__post_init__()
        if self.payload.hamiltonian.num_qubits != self.num_qubits:
            raise ValueError(
                f"Hamiltonian acts on {self.payload.hamiltonian.num_qubits} "
                f"qubits, task register has {self.num_qubits}"
            )

    def loss(self, pool, layout, params) -> float:
        state = self.output_state(pool, layout, params)
        return expectation(state, self.payload.hamiltonian)


# --- MaxCut -------------------------------------------------------------------


@dataclass
class MaxCutPayload:
    graph: Graph


def maxcut_hamiltonian(graph: Graph) -> PauliSumObservable:
    """Ising form -sum_ij w_ij (I - Z_i Z_j)/2, identity parts merged."""
    n = graph.num_vertices
    eye = "I" * n
    terms: list[tuple[float, str]] = [(-graph.total_weight / 2.0, eye)]
    for u, v, w in graph.edges:
        word = list(eye)
        word[u] = "Z"
        word[v] = "Z"
        terms.append((w / 2.0, "".join(word)))
    return PauliSumObservable(num_qubits=n, terms=terms)


def maxcut_loss(pool, layout, params, payload: MaxCutPayload) -> float:
    n = payload.graph.num_vertices
    state = run_circuit(pool, layout, params, init_state(n, "plus"))
    return expectation(state, maxcut_hamiltonian(payload.graph))


@dataclass
class MaxCut(TaskSpec):
    num_qubits: int = 0
    initial_state_kind: str = "plus"
    penalty_beta: float = 0.01
    payload: MaxCutPayload | None = None

    variant = "maxcut"

    def __post_init__(self) -> None:
        if self.payload is None:
            raise ValueError("MaxCut task needs a graph payload")
        if self.num_qubits == 0:
            self.num_qubits = self.payload.graph.num_vertices
        super().__post_init__()
        if self.payload.graph.num_vertices > self.num_qubits:
            raise ValueError(
                f"graph has {self.payload.graph.num_vertices} vertices but the "
                f"register only {self.num_qubits} qubits"
            )
        self._hamiltonian = maxcut_hamiltonian(self.payload.graph)

    def loss(self, pool, layout, params) -> float:
        state = self.output_state(pool, layout, params)
        return expectation(state, self._hamiltonian)


# ---------------------------------------------------------------------------
# reward bookkeeping


def evaluate(task: TaskSpec, pool: OperationPool, layout, params
             ) -> tuple[float, float]:
    """(loss, reward) for a finished layout under the task's scaling rules."""
    loss = float(task.loss(pool, layout, params))
    if not math.isfinite(loss):
        raise ArithmeticError(f"non-finite loss for layout {list(layout)}")
    placeholders = sum(
        1 for idx in layout if pool.entries[idx].kind is GateKind.PLACEHOLDER
    )
    penalty = task.penalty_beta * placeholders
    if task.reward_scaling == "exp_neg10":
        reward = math.exp(-10.0 * loss) - penalty
    else:
        reward = -loss - penalty
    return loss, reward


# ---------------------------------------------------------------------------
# verification oracles

_ORACLE_VERTEX_CAP = 24
_ORACLE_QUBIT_CAP = 12
_ENUM_CHUNK = 1 << 20


def oracle_maxcut(graph: Graph) -> tuple[float, list[str]]:
    """Exhaustive max cut: best value and every optimal assignment bitstring."""
    V = graph.num_vertices
    if V > _ORACLE_VERTEX_CAP:
        raise ValueError(
            f"enumeration capped at {_ORACLE_VERTEX_CAP} vertices, got {V}"
        )
    size = 2**V

    def cut_values(lo: int, hi: int) -> np.ndarray:
        idx = np.arange(lo, hi, dtype=np.uint64)
        vals = np.zeros(hi - lo, dtype=np.float64)
        for u, v, w in graph.edges:
            bu = (idx >> np.uint64(V - 1 - u)) & np.uint64(1)
            bv = (idx >> np.uint64(V - 1 - v)) & np.uint64(1)
            vals += w * (bu ^ bv).astype(np.float64)
        return vals

    best = -math.inf
    for lo in range(0, size, _ENUM_CHUNK):
        best = max(best, float(cut_values(lo, min(lo + _ENUM_CHUNK, size)).max()))
    winners: list[str] = []
    for lo in range(0, size, _ENUM_CHUNK):
        vals = cut_values(lo, min(lo + _ENUM_CHUNK, size))
        for off in np.nonzero(vals >= best - 1e-9)[0]:
            winners.append(format(lo + int(off), f"0{V}b"))
    return best, winners


def oracle_ground_energy(obs: PauliSumObservable) -> float:
    """Minimum eigenvalue by dense diagonalization."""
    if obs.num_qubits > _ORACLE_QUBIT_CAP:
        raise ValueError(
            f"dense diagonalization capped at {_ORACLE_QUBIT_CAP} qubits, "
            f"got {obs.num_qubits}"
        )
    matrix = observable_matrix(obs)
    return float(np.linalg.eigvalsh(matrix)[0])


def oracle_linear_solve(payload: VqlsPayload) -> np.ndarray:
    """Measurement distribution of the normalized classical solution of Ax = b."""
    n = payload.num_qubits
    if n > _ORACLE_QUBIT_CAP:
        raise ValueError(f"dense solve capped at {_ORACLE_QUBIT_CAP} qubits, got {n}")
    a = observable_matrix(PauliSumObservable(n, list(payload.a_terms)))
    eigs = np.abs(np.linalg.eigvalsh(a))
    if eigs.min() < 1e-10:
        raise DegenerateSystemError("system matrix is singular within 1e-10")
    b = np.full(2**n, 1.0 / math.sqrt(2**n), dtype=np.complex128)
    x = np.linalg.solve(a, b)
    probs = np.abs(x) ** 2
    return probs / probs.sum()
