"""
Gate-level circuits, exact simulation and verifier semantics.

Qubit 0 is the most significant bit of a basis index. Verifier registers are
laid out contiguously: classical proof A, then quantum proof B, then ancilla C.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from hamred.const import (
    ACCEPT_THRESHOLD,
    ACCEPTS,
    DEFAULT_SLACK,
    HERMITIAN_TOL,
    MONOTONE_INPUT_CAP,
    NORM_TOL,
    QUBIT_BUDGET,
    REJECT_THRESHOLD,
    REJECTS,
    SPARSE_AMPLITUDE_TOL,
    UNDETERMINED,
)
from hamred.ops import HermitianOperator, min_eigenvalue
from hamred.utils import (
    EnumerationCapError,
    GateArityError,
    QubitBudgetError,
    RegisterLayoutError,
    all_bitstrings,
    bits_to_int,
    check_dimension,
    hamming_weight,
    validate_bits,
)

_LOGGER = logging.getLogger(__name__)

_S2 = 1.0 / np.sqrt(2.0)
_T_PHASE = np.exp(1j * np.pi / 4)

_CCX = np.eye(8, dtype=complex)
_CCX[[6, 7]] = _CCX[[7, 6]]

GATE_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "T": np.diag([1.0, _T_PHASE]).astype(complex),
    "TDG": np.diag([1.0, np.conj(_T_PHASE)]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
    "CCX": _CCX,
}
CUSTOM = "CUSTOM"
GATE_KINDS = list(GATE_MATRICES) + [CUSTOM]

for _m in GATE_MATRICES.values():
    _m.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Gate:
    """
    A named gate on ordered target qubits. For CNOT the first target is the
    control; for CCX the first two are controls.
    """

    kind: str
    targets: Tuple[int, ...]
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        kind = self.kind.upper()
        targets = tuple(int(t) for t in self.targets)
        if kind not in GATE_KINDS:
            raise GateArityError(f"unknown gate kind {self.kind!r}")
        if len(set(targets)) != len(targets) or any(t < 0 for t in targets):
            raise GateArityError(f"gate targets must be distinct and non-negative: {targets}")
        if kind == CUSTOM:
            if self.matrix is None:
                raise GateArityError("custom gate needs a matrix")
            matrix = np.array(self.matrix, dtype=complex)
            dim = 2 ** len(targets)
            if matrix.shape != (dim, dim):
                raise GateArityError(
                    f"custom matrix shape {matrix.shape} does not fit {len(targets)} targets"
                )
            if not np.allclose(matrix.conj().T @ matrix, np.eye(dim), atol=HERMITIAN_TOL):
                raise GateArityError("custom gate matrix is not unitary")
            matrix.setflags(write=False)
        else:
            matrix = None
            expected = int(np.log2(GATE_MATRICES[kind].shape[0]))
            if len(targets) != expected:
                raise GateArityError(f"{kind} acts on {expected} qubits, got {targets}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", matrix)

    @property
    def arity(self) -> int:
        return len(self.targets)

    @property
    def unitary(self) -> np.ndarray:
        return self.matrix if self.kind == CUSTOM else GATE_MATRICES[self.kind]

    def relabeled(self, mapping: Sequence[int]) -> "Gate":
        return Gate(self.kind, tuple(mapping[t] for t in self.targets), self.matrix)


@dataclass(frozen=True, eq=False)
class QuantumCircuit:
    """V = V_L ... V_1, gates listed in application order."""

    n_qubits: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        for index, gate in enumerate(gates):
            if max(gate.targets) >= self.n_qubits:
                raise RegisterLayoutError(
                    f"gate {index} ({gate.kind}) targets {gate.targets} "
                    f"outside {self.n_qubits} qubits"
                )
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class RegisterLayout:
    """Widths of the classical proof (A), quantum proof (B) and ancilla (C) registers."""

    n: int
    m: int
    p: int

    def __post_init__(self):
        if min(self.n, self.m, self.p) < 0:
            raise RegisterLayoutError(f"negative register width in {self}")

    @property
    def total(self) -> int:
        return self.n + self.m + self.p

    @property
    def A(self) -> Tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def B(self) -> Tuple[int, ...]:
        return tuple(range(self.n, self.n + self.m))

    @property
    def C(self) -> Tuple[int, ...]:
        return tuple(range(self.n + self.m, self.total))


@dataclass(frozen=True, eq=False)
class VerifierCircuit:
    """
    A circuit with a register layout and a designated output qubit.

    The output lies in B when B is non-empty, otherwise in C.
    """

    circuit: QuantumCircuit
    layout: RegisterLayout
    output_qubit: Optional[int] = None

    def __post_init__(self):
        if self.layout.total != self.circuit.n_qubits:
            raise RegisterLayoutError(
                f"registers cover {self.layout.total} qubits, circuit has "
                f"{self.circuit.n_qubits}"
            )
        output = self.output_qubit
        if output is None:
            pool = self.layout.B or self.layout.C
            if not pool:
                raise RegisterLayoutError("verifier needs a B or C qubit for its output")
            output = pool[0]
        allowed = self.layout.B if self.layout.m else self.layout.C
        if output not in allowed:
            register = "B" if self.layout.m else "C"
            raise RegisterLayoutError(f"output qubit {output} must lie in {register}")
        object.__setattr__(self, "output_qubit", int(output))

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def m(self) -> int:
        return self.layout.m

    @property
    def p(self) -> int:
        return self.layout.p

    @property
    def gates(self) -> Tuple[Gate, ...]:
        return self.circuit.gates

    def __len__(self) -> int:
        return len(self.circuit)

    def with_circuit(self, circuit: QuantumCircuit) -> "VerifierCircuit":
        return type(self)(circuit, self.layout, self.output_qubit)


class CqmaCircuit(VerifierCircuit):
    """Verifier read as a cQMA circuit: A is the INPUT register, B the CHOICE register."""

    @property
    def input_width(self) -> int:
        return self.layout.n

    @property
    def choice_width(self) -> int:
        return self.layout.m


def as_cqma(V: VerifierCircuit) -> CqmaCircuit:
    return CqmaCircuit(V.circuit, V.layout, V.output_qubit)


def _apply_gate_tensor(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    k = gate.arity
    u = gate.unitary.reshape((2,) * (2 * k))
    out = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), list(gate.targets)))
    return np.moveaxis(out, list(range(k)), list(gate.targets))


def apply_circuit(circuit: QuantumCircuit, state: np.ndarray) -> np.ndarray:
    """
    Dense statevector simulation.

    :param QuantumCircuit circuit: gates to apply
    :param np.ndarray state: unit vector of dimension 2^n_qubits
    :return np.ndarray: V_L ... V_1 |state>
    :raise RegisterLayoutError: on a dimension mismatch or non-unit input
    """
    vector = np.asarray(state, dtype=complex).reshape(-1)
    n = circuit.n_qubits
    if vector.shape[0] != 2**n:
        raise RegisterLayoutError(
            f"state of dimension {vector.shape[0]} for a {n}-qubit circuit"
        )
    if abs(np.linalg.norm(vector) - 1.0) > NORM_TOL:
        raise RegisterLayoutError("input state is not normalized")
    tensor = vector.reshape((2,) * n) if n else vector
    for gate in circuit.gates:
        tensor = _apply_gate_tensor(tensor, gate)
    return tensor.reshape(-1)


def circuit_unitary(circuit: QuantumCircuit, dim_cap: Optional[int] = None) -> np.ndarray:
    """Full 2^n x 2^n unitary of the circuit."""
    n = circuit.n_qubits
    dim = 2**n
    check_dimension(dim, dim_cap, "circuit unitary")
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for gate in circuit.gates:
        tensor = _apply_gate_tensor(tensor, gate)
    return tensor.reshape(dim, dim)


def _sparse_apply(
    indices: np.ndarray, amplitudes: np.ndarray, gate: Gate, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    shifts = [n - 1 - q for q in gate.targets]
    k = len(shifts)
    local = np.zeros_like(indices)
    mask = 0
    for s in shifts:
        local = (local << 1) | ((indices >> s) & 1)
        mask |= 1 << s
    base = indices & ~np.int64(mask)
    offsets = np.array(
        [
            sum(((o >> (k - 1 - j)) & 1) << shifts[j] for j in range(k))
            for o in range(2**k)
        ],
        dtype=np.int64,
    )
    new_indices = (base[None, :] | offsets[:, None]).reshape(-1)
    new_amplitudes = (gate.unitary[:, local] * amplitudes[None, :]).reshape(-1)
    unique, inverse = np.unique(new_indices, return_inverse=True)
    summed = np.zeros(len(unique), dtype=complex)
    np.add.at(summed, inverse, new_amplitudes)
    keep = np.abs(summed) > SPARSE_AMPLITUDE_TOL
    return unique[keep], summed[keep]


def simulate_basis(circuit: QuantumCircuit, index: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact sparse simulation of a computational-basis input.

    :param QuantumCircuit circuit: gates to apply
    :param int index: basis index of the input
    :return (np.ndarray, np.ndarray): basis indices and amplitudes of the output
    """
    n = circuit.n_qubits
    if n > QUBIT_BUDGET:
        raise QubitBudgetError(f"{n} qubits do not fit a 64-bit basis index")
    indices = np.array([index], dtype=np.int64)
    amplitudes = np.array([1.0 + 0.0j])
    for gate in circuit.gates:
        indices, amplitudes = _sparse_apply(indices, amplitudes, gate, n)
    return indices, amplitudes


def _input_index(V: VerifierCircuit, x: str, y: int) -> int:
    return (bits_to_int(x) << (V.m + V.p)) | (y << V.p)


def acceptance_operator(
    V: VerifierCircuit, x: str, dim_cap: Optional[int] = None
) -> HermitianOperator:
    """
    A_x = (<x|_A <0|_C) V^dagger Pi_out=1 V (|x>_A |0>_C), acting on B.

    :param VerifierCircuit V: verifier
    :param str x: classical proof of width n
    :return HermitianOperator: 2^m x 2^m acceptance operator
    """
    validate_bits(x, V.n, "classical proof")
    check_dimension(2**V.m, dim_cap, "acceptance operator")
    shift = V.circuit.n_qubits - 1 - V.output_qubit
    columns = []
    for y in range(2**V.m):
        indices, amplitudes = simulate_basis(V.circuit, _input_index(V, x, y))
        accepted = ((indices >> shift) & 1) == 1
        columns.append((indices[accepted], amplitudes[accepted]))
    support = np.unique(np.concatenate([c[0] for c in columns]))
    phi = np.zeros((len(support), len(columns)), dtype=complex)
    for j, (indices, amplitudes) in enumerate(columns):
        phi[np.searchsorted(support, indices), j] = amplitudes
    operator = phi.conj().T @ phi
    return HermitianOperator((operator + operator.conj().T) / 2)


def accept_probability(V: VerifierCircuit, x: str, proof: np.ndarray) -> float:
    """Pr[V outputs 1] on |x>_A |proof>_B |0>_C by dense simulation."""
    validate_bits(x, V.n, "classical proof")
    a = np.zeros(2**V.n, dtype=complex)
    a[bits_to_int(x)] = 1.0
    c = np.zeros(2**V.p, dtype=complex)
    c[0] = 1.0
    state = np.kron(np.kron(a, np.asarray(proof, dtype=complex).reshape(-1)), c)
    out = apply_circuit(V.circuit, state).reshape((2,) * V.circuit.n_qubits)
    return float(np.sum(np.abs(np.take(out, 1, axis=V.output_qubit)) ** 2))


def cqma_status(
    W: VerifierCircuit, x: str, slack: float = DEFAULT_SLACK, dim_cap: Optional[int] = None
) -> str:
    """
    :param CqmaCircuit W: cQMA circuit
    :param str x: INPUT string
    :return str: "accepts" if every choice accepts with probability >= 2/3,
        "rejects" if some choice rejects with probability >= 2/3, else "undetermined"
    """
    lowest = min_eigenvalue(acceptance_operator(W, x, dim_cap))
    if lowest >= ACCEPT_THRESHOLD - slack:
        return ACCEPTS
    if lowest <= REJECT_THRESHOLD + slack:
        return REJECTS
    return UNDETERMINED


def classify_inputs(
    W: VerifierCircuit, slack: float = DEFAULT_SLACK, progress: bool = False
) -> Dict[str, str]:
    """Status of every INPUT string, by brute force."""
    if W.n > MONOTONE_INPUT_CAP:
        raise EnumerationCapError(
            f"{W.n} input bits exceed the enumeration cap of {MONOTONE_INPUT_CAP}"
        )
    inputs = list(all_bitstrings(W.n))
    if progress:
        from rich.progress import track

        inputs = track(inputs, description="Classifying inputs")
    return {x: cqma_status(W, x, slack) for x in inputs}


def accepted_set(W: VerifierCircuit, slack: float = DEFAULT_SLACK) -> List[str]:
    return [x for x, s in classify_inputs(W, slack).items() if s == ACCEPTS]


def monotone_check(
    W: VerifierCircuit, slack: float = DEFAULT_SLACK, progress: bool = False
) -> bool:
    """
    True iff every input is decided and the accepted set is closed under
    flipping zeros to ones.
    """
    statuses = classify_inputs(W, slack, progress)
    undetermined = [x for x, s in statuses.items() if s == UNDETERMINED]
    if undetermined:
        _LOGGER.warning(f"Input {undetermined[0]} is neither accepted nor rejected")
        return False
    for x, status in statuses.items():
        if status != ACCEPTS:
            continue
        for i, bit in enumerate(x):
            if bit == "0" and statuses[x[:i] + "1" + x[i + 1 :]] != ACCEPTS:
                _LOGGER.info(f"Accepted set not monotone: {x} accepted, flip {i} rejected")
                return False
    return True


def min_weight_accepted(W: VerifierCircuit, slack: float = DEFAULT_SLACK) -> Optional[int]:
    weights = [hamming_weight(x) for x in accepted_set(W, slack)]
    return min(weights) if weights else None


_TOFFOLI_SEQUENCE = [
    ("H", (2,)),
    ("CNOT", (1, 2)),
    ("TDG", (2,)),
    ("CNOT", (0, 2)),
    ("T", (2,)),
    ("CNOT", (1, 2)),
    ("TDG", (2,)),
    ("CNOT", (0, 2)),
    ("T", (1,)),
    ("T", (2,)),
    ("H", (2,)),
    ("CNOT", (0, 1)),
    ("T", (0,)),
    ("TDG", (1,)),
    ("CNOT", (0, 1)),
]


def decompose(V):
    """
    Rewrite every CCX into 15 one- and two-qubit Clifford+T gates.

    :param QuantumCircuit | VerifierCircuit V: circuit
    :return: same type, with only one- and two-qubit gates
    """
    circuit = V.circuit if isinstance(V, VerifierCircuit) else V
    gates = []
    for gate in circuit.gates:
        if gate.kind == "CCX":
            gates.extend(
                Gate(kind, tuple(gate.targets[q] for q in qubits))
                for kind, qubits in _TOFFOLI_SEQUENCE
            )
        elif gate.arity > 2:
            raise GateArityError(f"no decomposition for {gate.arity}-qubit {gate.kind}")
        else:
            gates.append(gate)
    result = QuantumCircuit(circuit.n_qubits, tuple(gates))
    return V.with_circuit(result) if isinstance(V, VerifierCircuit) else result


def remap(gates: Iterable[Gate], mapping: Sequence[int]) -> List[Gate]:
    return [g.relabeled(mapping) for g in gates]


def pattern_gates(
    controls: Sequence[int],
    bits: str,
    targets: Sequence[int],
    work: Sequence[int],
) -> List[Gate]:
    """
    XOR 1 into every target iff the controls read `bits`.

    Controls are X-conjugated where the pattern has a zero and restored
    afterwards; the AND of the controls is built on work qubits with Toffolis
    and uncomputed.

    :param Sequence[int] controls: control qubits
    :param str bits: required control values
    :param Sequence[int] targets: qubits to flip
    :param Sequence[int] work: at least len(controls) - 1 clean qubits
    :return list[Gate]: gate sequence
    """
    if len(bits) != len(controls):
        raise RegisterLayoutError("pattern and controls differ in length")
    if len(controls) > 1 and len(work) < len(controls) - 1:
        raise RegisterLayoutError(
            f"{len(controls)} controls need {len(controls) - 1} work qubits"
        )
    flips = [Gate("X", (c,)) for c, b in zip(controls, bits) if b == "0"]
    if not controls:
        return [Gate("X", (t,)) for t in targets]
    if len(controls) == 1:
        return flips + [Gate("CNOT", (controls[0], t)) for t in targets] + flips
    chain = [Gate("CCX", (controls[0], controls[1], work[0]))]
    for i in range(2, len(controls)):
        chain.append(Gate("CCX", (work[i - 2], controls[i], work[i - 1])))
    top = work[len(controls) - 2]
    body = [Gate("CNOT", (top, t)) for t in targets]
    return flips + chain + body + chain[::-1] + flips


def or_gates(inputs: Sequence[int], ancillas: Sequence[int]) -> Tuple[List[Gate], int]:
    """
    Coherent OR cascade into fresh ancillas.

    :param Sequence[int] inputs: qubits to OR together
    :param Sequence[int] ancillas: len(inputs) - 1 clean qubits
    :return (list[Gate], int): gates and the qubit holding the OR
    """
    if not inputs:
        raise RegisterLayoutError("OR of no inputs")
    if len(ancillas) < len(inputs) - 1:
        raise RegisterLayoutError(f"OR of {len(inputs)} inputs needs {len(inputs) - 1} ancillas")
    gates = []
    current = inputs[0]
    for value, target in zip(inputs[1:], ancillas):
        negate = [Gate("X", (current,)), Gate("X", (value,))]
        gates += negate + [Gate("CCX", (current, value, target)), Gate("X", (target,))] + negate
        current = target
    return gates, current


class _CircuitBuilder:
    """
    Allocates labelled qubits and collects gates; registers are reordered into
    the A, B, C layout when the circuit is finished.
    """

    def __init__(self):
        self._registers: List[str] = []
        self._gates: List[Gate] = []

    def alloc(self, register: str, count: int = 1) -> List[int]:
        start = len(self._registers)
        self._registers.extend([register] * count)
        return list(range(start, start + count))

    def add(self, gates: Iterable[Gate]):
        self._gates.extend(gates)

    def append(self, kind: str, *targets: int):
        self._gates.append(Gate(kind, targets))

    def embed(self, sub: VerifierCircuit, mapping: Sequence[int]):
        if len(mapping) != sub.circuit.n_qubits:
            raise RegisterLayoutError("mapping does not cover the subcircuit")
        self._gates.extend(remap(sub.gates, mapping))

    def finish(self, output: int, cls=CqmaCircuit) -> VerifierCircuit:
        order = [
            q for register in "ABC" for q, r in enumerate(self._registers) if r == register
        ]
        position = {q: i for i, q in enumerate(order)}
        mapping = [position[q] for q in range(len(self._registers))]
        layout = RegisterLayout(*(self._registers.count(r) for r in "ABC"))
        circuit = QuantumCircuit(layout.total, tuple(remap(self._gates, mapping)))
        return cls(circuit, layout, position[output])


def or_of_outputs(subcircuits: Sequence[VerifierCircuit]) -> VerifierCircuit:
    """
    Run the subcircuits side by side and coherently OR their outputs.

    Registers are concatenated in order. When the result has a B register the
    OR is swapped into its first qubit.
    """
    if not subcircuits:
        raise RegisterLayoutError("nothing to combine")
    if len(subcircuits) == 1:
        return subcircuits[0]
    builder = _CircuitBuilder()
    outputs = []
    first_b = None
    for sub in subcircuits:
        mapping = (
            builder.alloc("A", sub.n) + builder.alloc("B", sub.m) + builder.alloc("C", sub.p)
        )
        if first_b is None and sub.m:
            first_b = mapping[sub.n]
        builder.embed(sub, mapping)
        outputs.append(mapping[sub.output_qubit])
    gates, result = or_gates(outputs, builder.alloc("C", len(outputs) - 1))
    builder.add(gates)
    if first_b is not None:
        builder.append("SWAP", result, first_b)
        result = first_b
    return builder.finish(result, VerifierCircuit)


def _amplify_into(
    builder: _CircuitBuilder, W: VerifierCircuit, t: int
) -> Tuple[List[int], int]:
    b = builder.alloc("B", W.m)
    c = builder.alloc("C", W.p)
    copies = builder.alloc("C", W.n)
    inputs: List[int] = []
    if t == 1:
        inputs = builder.alloc("A", W.n)
        builder.add(Gate("CNOT", (a, q)) for a, q in zip(inputs, copies))
    else:
        for q in copies:
            sub_inputs, sub_output = _amplify_into(builder, W, t - 1)
            inputs += sub_inputs
            builder.append("CNOT", sub_output, q)
    mapping = copies + b + c
    builder.embed(W, mapping)
    return inputs, mapping[W.output_qubit]


def normalize_inputs(W: VerifierCircuit) -> CqmaCircuit:
    """Copy every INPUT bit into a fresh ancilla first and run W on the copies."""
    return compose_amplify(W, 1)


def compose_amplify(W: VerifierCircuit, t: int) -> CqmaCircuit:
    """
    W^t: a copy of W whose INPUT bits are fed by the outputs of n independent
    copies of W^(t-1). Every copy reads its inputs through CNOT copies into
    its own ancillas.

    :param CqmaCircuit W: base circuit with n INPUT bits
    :param int t: composition depth, at least 1
    :return CqmaCircuit: circuit with n^t INPUT bits whose output is the first B qubit
    :raise QubitBudgetError: if W^t would not fit the simulation qubit budget
    """
    if t < 1:
        raise RegisterLayoutError(f"composition depth must be at least 1, got {t}")
    width = amplified_width(W, t)
    if width > QUBIT_BUDGET:
        raise QubitBudgetError(
            f"W^{t} needs {width} qubits, above the budget of {QUBIT_BUDGET}"
        )
    builder = _CircuitBuilder()
    _, output = _amplify_into(builder, W, t)
    result = builder.finish(output)
    _LOGGER.debug(
        f"Composed W^{t}: {result.n} inputs, {result.circuit.n_qubits} qubits, "
        f"{len(result)} gates"
    )
    return result


def amplified_width(W: VerifierCircuit, t: int) -> int:
    """Qubit count of compose_amplify(W, t), without building it."""
    width = 2 * W.n + W.m + W.p
    for _ in range(t - 1):
        width = W.n * width + W.n + W.m + W.p
    return width


def amplification_glue(n: int, t: int) -> int:
    """Copy gates added by compose_amplify beyond the copies of W: n + n^2 + ... + n^t."""
    return sum(n**j for j in range(1, t + 1))
