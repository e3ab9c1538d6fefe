"""Dense statevector simulator for small variational circuits.

Conventions used throughout the package:

* Qubit 0 is the leftmost position in a bitstring and the most significant
  bit of a computational-basis index.  For ``n`` qubits, basis state
  ``|b_0 b_1 ... b_{n-1}>`` lives at index ``sum(b_q << (n - 1 - q))``.
* Pauli words are strings over ``IXYZ`` whose position ``q`` acts on
  qubit ``q``.
* All amplitudes are complex128; states are treated as immutable values
  and every operation returns a fresh ``StateVector``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

MAX_QUBITS = 12

# Dense Pauli-sum matrices are cached for observables on at most this many
# qubits; above it the bit-mask term path is used instead.
_DENSE_OBSERVABLE_QUBITS = 8


class GateKind(str, Enum):
    H = "h"
    CNOT = "cnot"
    ROT = "rot"
    RZ = "rz"
    RY = "ry"
    U3 = "u3"
    PLACEHOLDER = "placeholder"


PARAM_COUNT = {
    GateKind.H: 0,
    GateKind.CNOT: 0,
    GateKind.ROT: 3,
    GateKind.RZ: 1,
    GateKind.RY: 1,
    GateKind.U3: 3,
    GateKind.PLACEHOLDER: 0,
}

WIRE_COUNT = {
    GateKind.H: 1,
    GateKind.CNOT: 2,
    GateKind.ROT: 1,
    GateKind.RZ: 1,
    GateKind.RY: 1,
    GateKind.U3: 1,
    GateKind.PLACEHOLDER: 0,
}


@dataclass(frozen=True)
class GateOp:
    """A gate prototype (``params=None``) or a fully bound gate instance.

    ``wires`` lists target qubits; for CNOT it is ``(control, target)``.
    Placeholders carry no wires and act as the identity.
    """

    kind: GateKind
    wires: tuple[int, ...] = ()
    params: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"gate wires must be distinct, got {self.wires}")
        if len(self.wires) != WIRE_COUNT[kind]:
            raise ValueError(
                f"{kind.value} acts on {WIRE_COUNT[kind]} wire(s), got {self.wires}"
            )
        if self.params is not None:
            object.__setattr__(self, "params", tuple(float(x) for x in self.params))
            if len(self.params) != PARAM_COUNT[kind]:
                raise ValueError(
                    f"{kind.value} takes {PARAM_COUNT[kind]} parameter(s), "
                    f"got {len(self.params)}"
                )

    @property
    def num_params(self) -> int:
        return PARAM_COUNT[self.kind]

    def bound(self, params: tuple[float, ...]) -> "GateOp":
        """Return a copy of this prototype with angles attached."""
        return GateOp(self.kind, self.wires, tuple(params))


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"amplitude vector for {self.num_qubits} qubits must have "
                f"length {2**self.num_qubits}, got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass
class SampleHistogram:
    """Measurement counts keyed by bitstring (qubit 0 leftmost)."""

    counts: dict[str, int]
    shots: int

    def top(self, k: int = 1) -> list[tuple[str, int]]:
        ordered = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return ordered[:k]


# ---------------------------------------------------------------------------
# gate matrices


def _rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]],
        dtype=np.complex128,
    )


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)
_CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
)


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Unitary matrix of a bound gate, ordered with wire 0 most significant."""
    kind = gate.kind
    if kind is GateKind.PLACEHOLDER:
        return np.eye(1, dtype=np.complex128)
    if kind in (GateKind.ROT, GateKind.RZ, GateKind.RY, GateKind.U3):
        if gate.params is None:
            raise ValueError(f"{kind.value} gate has no bound parameters")
    if kind is GateKind.H:
        return _H_MATRIX
    if kind is GateKind.CNOT:
        return _CNOT_MATRIX
    if kind is GateKind.RZ:
        return _rz(gate.params[0])
    if kind is GateKind.RY:
        return _ry(gate.params[0])
    if kind is GateKind.ROT:
        phi, theta, omega = gate.params
        return _rz(omega) @ _ry(theta) @ _rz(phi)
    if kind is GateKind.U3:
        theta, phi, lam = gate.params
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        return np.array(
            [
                [c, -np.exp(1j * lam) * s],
                [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
            ],
            dtype=np.complex128,
        )
    raise ValueError(f"unknown gate kind {kind!r}")


# ---------------------------------------------------------------------------
# state preparation and evolution


def init_state(num_qubits: int, kind: str = "zeros") -> StateVector:
    """Prepare |0...0> (``zeros``) or the uniform |+...+> state (``plus``)."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    dim = 2**num_qubits
    amps = np.zeros(dim, dtype=np.complex128)
    if kind == "zeros":
        amps[0] = 1.0
    elif kind == "plus":
        amps[:] = 1.0 / math.sqrt(dim)
    else:
        raise ValueError(f"unknown initial state kind {kind!r}")
    return StateVector(num_qubits, amps)


def _apply_to_tensor(tensor: np.ndarray, gate: GateOp, num_qubits: int) -> np.ndarray:
    """Apply ``gate`` to ``tensor`` of shape (batch, 2, ..., 2); axis q+1 is qubit q."""
    if gate.kind is GateKind.PLACEHOLDER:
        return tensor
    for w in gate.wires:
        if not 0 <= w < num_qubits:
            raise ValueError(
                f"gate wire {w} out of range for {num_qubits} qubits"
            )
    u = gate_matrix(gate)
    k = len(gate.wires)
    axes = [w + 1 for w in gate.wires]
    out = np.tensordot(
        u.reshape((2,) * (2 * k)), tensor, axes=(tuple(range(k, 2 * k)), axes)
    )
    # tensordot puts the gate's output axes first; move them back in place
    return np.moveaxis(out, tuple(range(k)), axes)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    n = state.num_qubits
    tensor = state.amplitudes.reshape((1,) + (2,) * n)
    out = _apply_to_tensor(tensor, gate, n)
    return StateVector(n, np.ascontiguousarray(out).reshape(-1))


def bind_layout(pool, layout, params) -> list[GateOp]:
    """Instantiate the gate sequence for ``layout`` with angles from ``params``.

    ``pool`` is an OperationPool, ``layout`` a sequence of pool indices and
    ``params`` a SharedParameters tensor of shape (p, c, l); layer ``i`` with
    pool entry ``k`` reads its angles from ``params.values[i, k, :needed]``.
    """
    values = params.values
    if values.ndim != 3:
        raise ValueError(f"parameter tensor must be rank 3, got shape {values.shape}")
    p, c, l = values.shape
    if len(layout) > p:
        raise ValueError(f"layout length {len(layout)} exceeds parameter depth {p}")
    if c != pool.size_c:
        raise ValueError(f"parameter tensor width {c} != pool size {pool.size_c}")
    if l < pool.max_params_l:
        raise ValueError(
            f"parameter tensor depth {l} < pool max_params_l {pool.max_params_l}"
        )
    gates = []
    for i, idx in enumerate(layout):
        if not 0 <= idx < pool.size_c:
            raise ValueError(f"layout entry {idx} outside pool of size {pool.size_c}")
        proto = pool.entries[idx]
        need = proto.num_params
        if need:
            gates.append(proto.bound(tuple(values[i, idx, :need])))
        else:
            gates.append(proto if proto.params is not None else proto.bound(()))
    return gates


def run_circuit(pool, layout, params, init: StateVector) -> StateVector:
    """Evolve ``init`` through the circuit encoded by ``layout``."""
    gates = bind_layout(pool, layout, params)
    n = init.num_qubits
    tensor = init.amplitudes.reshape((1,) + (2,) * n)
    for gate in gates:
        tensor = _apply_to_tensor(tensor, gate, n)
    return StateVector(n, np.ascontiguousarray(tensor).reshape(-1))


def evolve_batch(states: np.ndarray, gates: list[GateOp], num_qubits: int) -> np.ndarray:
    """Evolve a (batch, 2**n) matrix of states through a bound gate list."""
    tensor = states.reshape((-1,) + (2,) * num_qubits)
    for gate in gates:
        tensor = _apply_to_tensor(tensor, gate, num_qubits)
    return np.ascontiguousarray(tensor).reshape(states.shape[0], -1)


# ---------------------------------------------------------------------------
# observables


@dataclass
class PauliSumObservable:
    """Weighted sum of Pauli words, all on the same qubit register."""

    num_qubits: int
    terms: list[tuple[float, str]]
    _compiled: list | None = field(default=None, repr=False, compare=False)
    _dense: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.num_qubits < 1:
            raise ValueError("observable needs at least one qubit")
        clean: list[tuple[float, str]] = []
        for coeff, word in self.terms:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff} for word {word!r}")
            if len(word) != self.num_qubits:
                raise ValueError(
                    f"pauli word {word!r} has length {len(word)}, "
                    f"expected {self.num_qubits}"
                )
            if any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"pauli word {word!r} has characters outside IXYZ")
            clean.append((coeff, word))
        self.terms = clean


def _compile_term(num_qubits: int, word: str) -> tuple[int, np.ndarray]:
    """Reduce a Pauli word to (flip mask, per-index phase vector).

    With P|b> = phase(b) |b ^ flip>, the action on amplitudes is
    (P psi)[i] = phase(i ^ flip) * psi[i ^ flip].
    """
    n = num_qubits
    flip = 0
    zy = 0
    n_y = 0
    for q, ch in enumerate(word):
        mask = 1 << (n - 1 - q)
        if ch in ("X", "Y"):
            flip |= mask
        if ch in ("Z", "Y"):
            zy |= mask
        if ch == "Y":
            n_y += 1
    idx = np.arange(2**n, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(zy)).astype(np.int64) & 1
    phase = (1j**n_y) * np.where(parity, -1.0, 1.0)
    return flip, phase.astype(np.complex128)


_PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli_word_matrix(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word (qubit 0 = most significant factor)."""
    out = np.array([[1.0 + 0.0j]])
    for ch in word:
        out = np.kron(out, _PAULI_MATRICES[ch])
    return out


def observable_matrix(obs: PauliSumObservable) -> np.ndarray:
    dim = 2**obs.num_qubits
    out = np.zeros((dim, dim), dtype=np.complex128)
    for coeff, word in obs.terms:
        out += coeff * pauli_word_matrix(word)
    return out


def apply_pauli_word(state: StateVector, word: str) -> StateVector:
    """Apply a single Pauli word to a state."""
    if len(word) != state.num_qubits:
        raise ValueError(
            f"pauli word length {len(word)} != qubit count {state.num_qubits}"
        )
    flip, phase = _compile_term(state.num_qubits, word)
    idx = np.arange(state.amplitudes.size)
    src = idx ^ flip
    return StateVector(state.num_qubits, phase[src] * state.amplitudes[src])


def expectation(state: StateVector, obs: PauliSumObservable) -> float:
    """Real expectation value <psi|O|psi> of a Hermitian Pauli sum."""
    if obs.num_qubits != state.num_qubits:
        raise ValueError(
            f"observable on {obs.num_qubits} qubits cannot be measured on a "
            f"{state.num_qubits}-qubit state"
        )
    psi = state.amplitudes
    if obs.num_qubits <= _DENSE_OBSERVABLE_QUBITS:
        if obs._dense is None:
            obs._dense = observable_matrix(obs)
        value = np.vdot(psi, obs._dense @ psi)
    else:
        if obs._compiled is None:
            obs._compiled = [
                (coeff,) + _compile_term(obs.num_qubits, word)
                for coeff, word in obs.terms
            ]
        idx = np.arange(psi.size)
        value = 0.0 + 0.0j
        for coeff, flip, phase in obs._compiled:
            src = idx ^ flip
            value += coeff * np.vdot(psi, phase[src] * psi[src])
    if abs(value.imag) > 1e-9:
        raise ValueError(
            f"expectation has imaginary residue {value.imag:.3e}; "
            "observable is not Hermitian-consistent"
        )
    return float(value.real)


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2 of two pure states."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different qubit counts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def sample(state: StateVector, shots: int, seed: int | None = None) -> SampleHistogram:
    """Draw measurement counts in the computational basis."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = np.abs(state.amplitudes) ** 2
    total = probs.sum()
    if not math.isfinite(total) or total <= 0.0:
        raise ValueError("state has no measurable weight")
    probs = probs / total
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    n = state.num_qubits
    counts = {
        format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0
    }
    return SampleHistogram(counts=counts, shots=shots)


# ---------------------------------------------------------------------------
# gradients

_SHIFT = math.pi / 2.0


def loss_gradient(task, pool, layout, params) -> np.ndarray:
    """Parameter-shift gradient of ``task``'s loss w.r.t. the shared tensor.

    Every rotation angle in the gate set enters through an exp(-i t G / 2)
    factor, so the +/- pi/2 shift rule is exact.  Tasks whose loss is a
    ratio of two expectation values expose ``loss_pieces`` and are handled
    with the quotient rule, shifting numerator and denominator together.

    Returns an array shaped like ``params.values`` that is nonzero only at
    slots (i, layout[i], j) of parametric layers.
    """
    values = params.values
    grad = np.zeros_like(values)
    pieces = getattr(task, "loss_pieces", None)

    if pieces is not None:
        num0, den0 = pieces(pool, layout, params)
        if abs(den0) < 1e-12:
            raise ArithmeticError("loss denominator vanished at the base point")

    for i, idx in enumerate(layout):
        need = pool.entries[idx].num_params
        for j in range(need):
            shifted = values.copy()
            shifted[i, idx, j] = values[i, idx, j] + _SHIFT
            plus = _Shifted(values=shifted)
            shifted = values.copy()
            shifted[i, idx, j] = values[i, idx, j] - _SHIFT
            minus = _Shifted(values=shifted)
            if pieces is None:
                f_plus = task.loss(pool, layout, plus)
                f_minus = task.loss(pool, layout, minus)
                g = 0.5 * (f_plus - f_minus)
            else:
                np_, dp = pieces(pool, layout, plus)
                nm, dm = pieces(pool, layout, minus)
                dn = 0.5 * (np_ - nm)
                dd = 0.5 * (dp - dm)
                # loss = 1 - num/den
                g = -(dn * den0 - num0 * dd) / (den0 * den0)
            if not math.isfinite(g):
                raise ArithmeticError(
                    f"non-finite gradient at layer {i}, entry {idx}, angle {j}"
                )
            grad[i, idx, j] = g
    return grad


@dataclass(frozen=True)
class _Shifted:
    """Lightweight parameter-tensor wrapper used for shifted evaluations."""

    values: np.ndarray


# ---------------------------------------------------------------------------
# observable file format


def load_observable(path) -> PauliSumObservable:
    """Read a Pauli-sum JSON file: {"num_qubits": n, "terms": [...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "num_qubits" not in data or "terms" not in data:
        raise ValueError(f"{path}: observable file needs num_qubits and terms keys")
    terms = [(t["coeff"], t["pauli"]) for t in data["terms"]]
    return PauliSumObservable(num_qubits=int(data["num_qubits"]), terms=terms)


def save_observable(obs: PauliSumObservable, path) -> None:
    data = {
        "num_qubits": obs.num_qubits,
        "terms": [{"coeff": coeff, "pauli": word} for coeff, word in obs.terms],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
