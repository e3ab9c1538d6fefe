"""File formats: run configs, circuit files, traces, and OpenQASM export.

A circuit file is self-contained: it embeds the pool, the layout, the bound
angles and the full task definition, so downstream commands (fine-tune,
sample, export) never need the original config or fixtures again.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .pool import HardLimits, OperationPool, Topology, build_pool
from .search import SearchConfig
from .simulator import (
    GateKind,
    GateOp,
    PauliSumObservable,
    load_observable,
)
from .supernet import OptimizerConfig, SharedParameters
from .tasks import (
    Graph,
    ChemistryPayload,
    MaxCut,
    MaxCutPayload,
    QecEncoding422,
    TaskSpec,
    Vqls,
    VqlsPayload,
    load_graph,
)


class ConfigError(ValueError):
    """Invalid run configuration; message is anchored to the offending key."""


CIRCUIT_FORMAT = "vqcsearch-circuit/1"


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    task: TaskSpec
    pool: OperationPool
    limits: HardLimits
    search: SearchConfig
    optimizer: OptimizerConfig
    warmup: OptimizerConfig | None
    output_dir: str
    seed: int | None


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"{context}.{key}: missing required key")
    return mapping[key]


def _section(data: dict, name: str, required: bool = True) -> dict:
    block = data.get(name)
    if block is None:
        if required:
            raise ConfigError(f"{name}: missing required section")
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"{name}: expected a mapping, got {type(block).__name__}")
    return block


def _build_task(block: dict, base_dir: str) -> TaskSpec:
    variant = _require(block, "variant", "task")
    common = {}
    for key in ("penalty_beta", "reward_scaling", "early_stop_reward",
                "initial_state_kind"):
        if key in block:
            common[key] = block[key]
    try:
        if variant == "qec422":
            return QecEncoding422(**common)
        if variant == "vqls":
            num_qubits = int(block.get("num_qubits", 4))
            if "terms" in block:
                terms = tuple(
                    (float(t["coeff"]), str(t["pauli"])) for t in block["terms"]
                )
                payload = VqlsPayload(num_qubits=num_qubits, a_terms=terms)
            else:
                from .tasks import paper_vqls_payload

                payload = paper_vqls_payload(num_qubits=num_qubits)
            return Vqls(num_qubits=num_qubits, payload=payload, **common)
        if variant == "chemistry":
            path = _require(block, "hamiltonian", "task")
            full = path if os.path.isabs(path) else os.path.join(base_dir, path)
            if not os.path.exists(full):
                raise ConfigError(f"task.hamiltonian: file not found: {full}")
            obs = load_observable(full)
            from .tasks import VqeChemistry

            return VqeChemistry(payload=ChemistryPayload(hamiltonian=obs), **common)
        if variant == "maxcut":
            grf = _require(block, "graph", "task")
            if isinstance(grf, str):
                full = grf if os.path.isabs(grf) else os.path.join(base_dir, grf)
                if not os.path.exists(full):
                    raise ConfigError(f"task.graph: file not found: {full}")
                graph = load_graph(full)
            else:
                graph = Graph(
                    num_vertices=int(_require(grf, "vertices", "task.graph")),
                    edges=tuple(tuple(e) for e in _require(grf, "edges", "task.graph")),
                )
            return MaxCut(payload=MaxCutPayload(graph=graph), **common)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"task: {exc}") from exc
    raise ConfigError(f"task.variant: unknown variant {variant!r}")


def _build_pool(block: dict, num_qubits: int) -> OperationPool:
    try:
        kinds = [GateKind(k) for k in block.get("single_qubit_kinds", [])]
        topology = block.get("topology", "line")
        edges = block.get("edges")
        if edges is not None:
            edges = [tuple(int(x) for x in e) for e in edges]
        return build_pool(
            num_qubits=num_qubits,
            single_qubit_kinds=kinds,
            topology=Topology(topology),
            include_placeholder=bool(block.get("include_placeholder", True)),
            edges=edges,
            include_cnot=bool(block.get("include_cnot", True)),
        )
    except ValueError as exc:
        raise ConfigError(f"pool: {exc}") from exc


def _build_limits(block: dict) -> HardLimits:
    try:
        caps = {
            GateKind(k): int(v)
            for k, v in (block.get("max_count_per_kind") or {}).items()
        }
        return HardLimits(
            max_layers=int(_require(block, "max_layers", "limits")),
            max_count_per_kind=caps,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"limits: {exc}") from exc


def _filtered(block: dict, cls, context: str) -> dict:
    valid = set(cls.__dataclass_fields__)
    out = {}
    for key, value in block.items():
        if key not in valid:
            raise ConfigError(f"{context}.{key}: unknown key")
        out[key] = value
    return out


def load_run_config(path, seed_override: int | None = None,
                    out_override: str | None = None) -> RunConfig:
    """Parse and cross-validate a YAML run configuration."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")

    base_dir = os.path.dirname(os.path.abspath(path))
    seed = seed_override if seed_override is not None else data.get("seed")
    task = _build_task(_section(data, "task"), base_dir)
    pool = _build_pool(_section(data, "pool"), task.num_qubits)
    limits = _build_limits(_section(data, "limits"))

    search_block = _filtered(_section(data, "search", required=False),
                             SearchConfig, "search")
    search_block.setdefault("seed", seed)
    try:
        search_cfg = SearchConfig(**search_block)
    except ValueError as exc:
        raise ConfigError(f"search: {exc}") from exc

    opt_block = _filtered(_section(data, "optimizer", required=False),
                          OptimizerConfig, "optimizer")
    opt_block.setdefault("seed", seed)
    try:
        opt_cfg = OptimizerConfig(**opt_block)
    except ValueError as exc:
        raise ConfigError(f"optimizer: {exc}") from exc

    warmup_cfg = None
    wblock = _section(data, "warmup", required=False)
    if wblock and wblock.get("enabled", True):
        wblock = dict(wblock)
        wblock.pop("enabled", None)
        wblock = _filtered(wblock, OptimizerConfig, "warmup")
        wblock.setdefault("seed", None if seed is None else seed + 1)
        try:
            warmup_cfg = OptimizerConfig(**wblock)
        except ValueError as exc:
            raise ConfigError(f"warmup: {exc}") from exc

    out_dir = out_override or data.get("output_dir") or "runs/latest"
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base_dir, out_dir)

    # cross checks before any simulation happens
    if pool.num_qubits != task.num_qubits:
        raise ConfigError(
            f"pool: register of {pool.num_qubits} qubits does not match task "
            f"register of {task.num_qubits}"
        )
    for kind in limits.max_count_per_kind:
        if not any(e.kind is kind for e in pool.entries):
            raise ConfigError(
                f"limits.max_count_per_kind.{kind.value}: kind not present in pool"
            )
    return RunConfig(
        task=task,
        pool=pool,
        limits=limits,
        search=search_cfg,
        optimizer=opt_cfg,
        warmup=warmup_cfg,
        output_dir=out_dir,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# task and pool serialization


def task_to_dict(task: TaskSpec) -> dict:
    out = {
        "variant": task.variant,
        "num_qubits": task.num_qubits,
        "initial_state_kind": task.initial_state_kind,
        "penalty_beta": task.penalty_beta,
        "reward_scaling": task.reward_scaling,
    }
    if task.early_stop_reward is not None:
        out["early_stop_reward"] = task.early_stop_reward
    if isinstance(task, Vqls):
        out["terms"] = [
            {"coeff": c, "pauli": w} for c, w in task.payload.a_terms
        ]
    elif isinstance(task, MaxCut):
        out["graph"] = {
            "vertices": task.payload.graph.num_vertices,
            "edges": [[u, v, w] for u, v, w in task.payload.graph.edges],
        }
    elif task.variant == "chemistry":
        h = task.payload.hamiltonian
        out["hamiltonian"] = {
            "num_qubits": h.num_qubits,
            "terms": [{"coeff": c, "pauli": w} for c, w in h.terms],
        }
    return out


def task_from_dict(data: dict) -> TaskSpec:
    from .tasks import VqeChemistry

    variant = data.get("variant")
    common = {
        key: data[key]
        for key in ("penalty_beta", "reward_scaling", "early_stop_reward",
                    "initial_state_kind")
        if key in data
    }
    if variant == "qec422":
        return QecEncoding422(**common)
    if variant == "vqls":
        payload = VqlsPayload(
            num_qubits=int(data["num_qubits"]),
            a_terms=tuple((t["coeff"], t["pauli"]) for t in data["terms"]),
        )
        return Vqls(num_qubits=payload.num_qubits, payload=payload, **common)
    if variant == "chemistry":
        h = data["hamiltonian"]
        obs = PauliSumObservable(
            num_qubits=int(h["num_qubits"]),
            terms=[(t["coeff"], t["pauli"]) for t in h["terms"]],
        )
        return VqeChemistry(payload=ChemistryPayload(hamiltonian=obs), **common)
    if variant == "maxcut":
        g = data["graph"]
        graph = Graph(num_vertices=int(g["vertices"]),
                      edges=tuple(tuple(e) for e in g["edges"]))
        return MaxCut(payload=MaxCutPayload(graph=graph), **common)
    raise ValueError(f"unknown task variant {variant!r}")


def pool_to_dict(pool: OperationPool) -> dict:
    return {
        "num_qubits": pool.num_qubits,
        "entries": [
            {"kind": e.kind.value, "wires": list(e.wires)} for e in pool.entries
        ],
        "placeholder_index": pool.placeholder_index,
    }


def pool_from_dict(data: dict) -> OperationPool:
    entries = tuple(
        GateOp(GateKind(e["kind"]), tuple(e["wires"])) for e in data["entries"]
    )
    return OperationPool(
        num_qubits=int(data["num_qubits"]),
        entries=entries,
        placeholder_index=data.get("placeholder_index"),
    )


# ---------------------------------------------------------------------------
# circuit files


def save_circuit(path, task: TaskSpec, pool: OperationPool, layout,
                 params: SharedParameters, loss: float, reward: float,
                 extra: dict | None = None) -> None:
    layer_params = []
    for i, idx in enumerate(layout):
        need = pool.entries[idx].num_params
        layer_params.append([float(x) for x in params.values[i, idx, :need]])
    data = {
        "format": CIRCUIT_FORMAT,
        "num_qubits": task.num_qubits,
        "task": task_to_dict(task),
        "pool": pool_to_dict(pool),
        "layout": [int(i) for i in layout],
        "layer_params": layer_params,
        "loss": float(loss),
        "reward": float(reward),
    }
    if extra:
        data.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


@dataclass
class CircuitFile:
    task: TaskSpec
    pool: OperationPool
    layout: list[int]
    params: SharedParameters
    loss: float
    reward: float
    raw: dict


def load_circuit(path) -> CircuitFile:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != CIRCUIT_FORMAT:
        raise ValueError(f"{path}: not a circuit file (format marker missing)")
    task = task_from_dict(data["task"])
    pool = pool_from_dict(data["pool"])
    layout = [int(i) for i in data["layout"]]
    layer_params = data["layer_params"]
    if len(layer_params) != len(layout):
        raise ValueError(f"{path}: layer_params length does not match layout")
    p = max(len(layout), 1)
    values = np.zeros((p, pool.size_c, max(pool.max_params_l, 1)))
    for i, idx in enumerate(layout):
        need = pool.entries[idx].num_params
        if len(layer_params[i]) != need:
            raise ValueError(
                f"{path}: layer {i} carries {len(layer_params[i])} angles, "
                f"pool entry {idx} needs {need}"
            )
        values[i, idx, :need] = layer_params[i]
    return CircuitFile(
        task=task,
        pool=pool,
        layout=layout,
        params=SharedParameters(values),
        loss=float(data["loss"]),
        reward=float(data["reward"]),
        raw=data,
    )


# ---------------------------------------------------------------------------
# trace files


def write_reward_trace(path, trace: list[float], stopped_early: bool) -> None:
    """CSV of per-iteration best-so-far reward; the stop flag marks the last row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_reward", "stopped_early"])
        best = -math.inf
        for i, reward in enumerate(trace):
            best = max(best, reward)
            is_last = i == len(trace) - 1
            writer.writerow([i, f"{best:.12g}", stopped_early and is_last])


def write_loss_trace(path, trace: list[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        for step, loss in enumerate(trace):
            writer.writerow([step, f"{loss:.12g}"])


# ---------------------------------------------------------------------------
# OpenQASM 2.0 and text export


def _format_angle(x: float) -> str:
    return repr(float(x))


def export_qasm2(pool: OperationPool, layout, params: SharedParameters) -> str:
    """OpenQASM 2.0 listing; Rot becomes rz/ry/rz and placeholders vanish."""
    from .simulator import bind_layout

    gates = bind_layout(pool, layout, params)
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{pool.num_qubits}];",
    ]
    for gate in gates:
        if gate.kind is GateKind.PLACEHOLDER:
            continue
        if gate.kind is GateKind.H:
            lines.append(f"h q[{gate.wires[0]}];")
        elif gate.kind is GateKind.CNOT:
            lines.append(f"cx q[{gate.wires[0]}],q[{gate.wires[1]}];")
        elif gate.kind is GateKind.RZ:
            lines.append(f"rz({_format_angle(gate.params[0])}) q[{gate.wires[0]}];")
        elif gate.kind is GateKind.RY:
            lines.append(f"ry({_format_angle(gate.params[0])}) q[{gate.wires[0]}];")
        elif gate.kind is GateKind.ROT:
            phi, theta, omega = gate.params
            q = gate.wires[0]
            lines.append(f"rz({_format_angle(phi)}) q[{q}];")
            lines.append(f"ry({_format_angle(theta)}) q[{q}];")
            lines.append(f"rz({_format_angle(omega)}) q[{q}];")
        elif gate.kind is GateKind.U3:
            theta, phi, lam = gate.params
            lines.append(
                f"u3({_format_angle(theta)},{_format_angle(phi)},"
                f"{_format_angle(lam)}) q[{gate.wires[0]}];"
            )
        else:
            raise ValueError(f"no QASM form for gate kind {gate.kind!r}")
    return "\n".join(lines) + "\n"


def parse_qasm2(text: str) -> tuple[int, list[GateOp]]:
    """Parse the subset of OpenQASM 2.0 emitted by export_qasm2."""
    num_qubits = None
    gates: list[GateOp] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        if line in ("OPENQASM 2.0;", 'include "qelib1.inc";'):
            continue
        if line.startswith("qreg"):
            num_qubits = int(line[line.index("[") + 1 : line.index("]")])
            continue
        if not line.endswith(";"):
            raise ValueError(f"unterminated statement: {line!r}")
        stmt = line[:-1]
        name, _, rest = stmt.partition(" ")
        angles: tuple[float, ...] = ()
        if "(" in name:
            name, _, arg_str = name.partition("(")
            angles = tuple(float(a) for a in arg_str.rstrip(")").split(","))
        wires = tuple(
            int(w[w.index("[") + 1 : w.index("]")]) for w in rest.split(",")
        )
        if name == "h":
            gates.append(GateOp(GateKind.H, wires))
        elif name == "cx":
            gates.append(GateOp(GateKind.CNOT, wires))
        elif name == "rz":
            gates.append(GateOp(GateKind.RZ, wires, angles))
        elif name == "ry":
            gates.append(GateOp(GateKind.RY, wires, angles))
        elif name == "u3":
            gates.append(GateOp(GateKind.U3, wires, angles))
        else:
            raise ValueError(f"unsupported QASM statement: {line!r}")
    if num_qubits is None:
        raise ValueError("no qreg declaration found")
    return num_qubits, gates


def export_text(pool: OperationPool, layout, params: SharedParameters) -> str:
    """Human-readable listing, one operation per line, placeholders dropped."""
    from .simulator import bind_layout

    gates = bind_layout(pool, layout, params)
    shown = [g for g in gates if g.kind is not GateKind.PLACEHOLDER]
    lines = [f"# {pool.num_qubits} qubits, {len(shown)} operations"]
    for gate in shown:
        if gate.kind is GateKind.CNOT:
            lines.append(f"CNOT q{gate.wires[0]} -> q{gate.wires[1]}")
        elif gate.kind is GateKind.H:
            lines.append(f"H q{gate.wires[0]}")
        else:
            angles = ", ".join(f"{x:.6f}" for x in gate.params)
            name = {"rot": "Rot", "rz": "RZ", "ry": "RY", "u3": "U3"}[gate.kind.value]
            lines.append(f"{name}({angles}) q{gate.wires[0]}")
    return "\n".join(lines) + "\n"
