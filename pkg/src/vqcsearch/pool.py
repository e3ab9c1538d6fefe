"""Candidate operation pools and per-layer action filtering.

A pool is the fixed, ordered menu of gate prototypes the search may place
at each layer.  The ordering is deterministic so that pool indices are
stable across runs: single-qubit prototypes first (grouped by kind in the
order given, then by qubit), CNOTs next (sorted by (control, target)),
and the optional placeholder last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .simulator import GateKind, GateOp, PARAM_COUNT


class Topology(str, Enum):
    LINE = "line"
    RING = "ring"
    ALL_TO_ALL = "all_to_all"
    CUSTOM = "custom"


_SINGLE_QUBIT_KINDS = (GateKind.H, GateKind.ROT, GateKind.RZ, GateKind.RY, GateKind.U3)


@dataclass(frozen=True)
class HardLimits:
    """Structural caps enforced during search.

    ``max_layers`` is the layout length p.  ``max_count_per_kind`` caps how
    many times a gate kind may appear in one circuit (placeholders are
    exempt: they are how the search expresses "shorter circuit").
    """

    max_layers: int
    max_count_per_kind: dict[GateKind, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.max_layers < 1:
            raise ValueError(f"max_layers must be >= 1, got {self.max_layers}")
        norm = {}
        for kind, cap in self.max_count_per_kind.items():
            kind = GateKind(kind)
            if cap < 0:
                raise ValueError(f"cap for {kind.value} must be >= 0, got {cap}")
            if kind is GateKind.PLACEHOLDER:
                raise ValueError("placeholder layers cannot be capped")
            norm[kind] = int(cap)
        object.__setattr__(self, "max_count_per_kind", norm)


@dataclass(frozen=True)
class OperationPool:
    num_qubits: int
    entries: tuple[GateOp, ...]
    placeholder_index: int | None

    @property
    def size_c(self) -> int:
        return len(self.entries)

    @property
    def max_params_l(self) -> int:
        return max((PARAM_COUNT[e.kind] for e in self.entries), default=0)


def _adjacencies(num_qubits: int, topology: Topology,
                 edges: list[tuple[int, int]] | None) -> list[tuple[int, int]]:
    if topology is Topology.LINE:
        return [(q, q + 1) for q in range(num_qubits - 1)]
    if topology is Topology.RING:
        pairs = [(q, q + 1) for q in range(num_qubits - 1)]
        if num_qubits > 2:
            pairs.append((0, num_qubits - 1))
        return pairs
    if topology is Topology.ALL_TO_ALL:
        return [
            (a, b) for a in range(num_qubits) for b in range(a + 1, num_qubits)
        ]
    if topology is Topology.CUSTOM:
        if edges is None:
            raise ValueError("custom topology requires an explicit edge list")
        seen = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) is not a valid adjacency")
            if not (0 <= u < num_qubits and 0 <= v < num_qubits):
                raise ValueError(f"edge ({u}, {v}) outside qubit range {num_qubits}")
            pair = (min(u, v), max(u, v))
            if pair not in seen:
                seen.append(pair)
        return seen
    raise ValueError(f"unknown topology {topology!r}")


def build_pool(
    num_qubits: int,
    single_qubit_kinds: list[GateKind | str],
    topology: Topology | str | None = Topology.LINE,
    include_placeholder: bool = True,
    edges: list[tuple[int, int]] | None = None,
    include_cnot: bool = True,
) -> OperationPool:
    """Assemble the ordered prototype menu for a register.

    Each undirected adjacency of the CNOT topology contributes two directed
    prototypes, control first.  Passing ``include_cnot=False`` (or an empty
    kind list with a placeholder) builds single-qubit-only pools.
    """
    if num_qubits < 1:
        raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
    kinds = []
    for k in single_qubit_kinds:
        kind = GateKind(k)
        if kind not in _SINGLE_QUBIT_KINDS:
            raise ValueError(f"{kind.value} is not a single-qubit pool kind")
        if kind in kinds:
            raise ValueError(f"duplicate single-qubit kind {kind.value}")
        kinds.append(kind)

    entries: list[GateOp] = []
    for kind in kinds:
        for q in range(num_qubits):
            entries.append(GateOp(kind, (q,)))
    if include_cnot:
        if num_qubits < 2:
            raise ValueError("CNOT prototypes need at least two qubits")
        topo = Topology(topology)
        for u, v in sorted(_adjacencies(num_qubits, topo, edges)):
            entries.append(GateOp(GateKind.CNOT, (u, v)))
            entries.append(GateOp(GateKind.CNOT, (v, u)))
    placeholder_index = None
    if include_placeholder:
        placeholder_index = len(entries)
        entries.append(GateOp(GateKind.PLACEHOLDER, ()))
    if not entries:
        raise ValueError("pool is empty: no gate prototypes were requested")
    return OperationPool(
        num_qubits=num_qubits,
        entries=tuple(entries),
        placeholder_index=placeholder_index,
    )


def allowed_actions(prefix, pool: OperationPool, limits: HardLimits) -> list[int]:
    """Pool indices allowed at the next layer after ``prefix``.

    Enforces the per-kind caps from ``limits``; placeholders are always
    allowed when the pool has one.  Raises if the prefix is already at full
    depth, and asserts the monotonicity guarantee that extending a prefix
    never re-enables a capped kind.
    """
    if len(prefix) >= limits.max_layers:
        raise ValueError(
            f"prefix already has {len(prefix)} layers; max_layers is "
            f"{limits.max_layers}"
        )
    used: dict[GateKind, int] = {}
    for idx in prefix:
        if not 0 <= idx < pool.size_c:
            raise ValueError(f"prefix entry {idx} outside pool of size {pool.size_c}")
        kind = pool.entries[idx].kind
        used[kind] = used.get(kind, 0) + 1
    allowed = []
    for idx, proto in enumerate(pool.entries):
        if proto.kind is GateKind.PLACEHOLDER:
            allowed.append(idx)
            continue
        cap = limits.max_count_per_kind.get(proto.kind)
        if cap is not None and used.get(proto.kind, 0) >= cap:
            continue
        allowed.append(idx)
    return allowed
