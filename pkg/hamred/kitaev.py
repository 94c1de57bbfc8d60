"""
Circuit-to-Hamiltonian compilation.

Sites are the verifier qubits (A, B, C) followed by the clock D. A legal clock
is a single (L+1)-dimensional site; a unary clock is L qubits holding
|1^t 0^(L-t)>.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from hamred.circuits import (
    Gate,
    QuantumCircuit,
    VerifierCircuit,
    _apply_gate_tensor,
)
from hamred.const import CLOCK_LEGAL, CLOCK_MODES, CLOCK_UNARY, HISTORY_FLOOR_CONSTANT
from hamred.ops import (
    HermitianOperator,
    LocalTerm,
    OperatorSum,
    Subspace,
    assemble,
    min_eigenvalue,
)
from hamred.utils import (
    GateArityError,
    RegisterLayoutError,
    check_dimension,
)

_LOGGER = logging.getLogger(__name__)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_RAISE = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|


@dataclass(frozen=True)
class ClockEncoding:
    """Clock register of a Kitaev Hamiltonian for a circuit of L gates."""

    mode: str
    L: int

    def __post_init__(self):
        if self.mode not in CLOCK_MODES:
            raise RegisterLayoutError(f"unknown clock mode {self.mode!r}")
        if self.L < 0:
            raise RegisterLayoutError(f"negative clock length {self.L}")

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.L + 1,) if self.mode == CLOCK_LEGAL else (2,) * self.L

    @property
    def dim(self) -> int:
        return self.L + 1 if self.mode == CLOCK_LEGAL else 2**self.L

    def index(self, t: int) -> int:
        """Basis index of clock time t."""
        if self.mode == CLOCK_LEGAL:
            return t
        return int("1" * t + "0" * (self.L - t), 2) if self.L else 0

    def state(self, t: int) -> np.ndarray:
        vector = np.zeros(self.dim, dtype=complex)
        vector[self.index(t)] = 1.0
        return vector


@dataclass(frozen=True, eq=False)
class KitaevHamiltonian:
    """
    H = H_in + H_out + H_prop + H_stab for a verifier.

    `verifier` is the circuit actually compiled, with its output already on B1.
    """

    verifier: VerifierCircuit
    clock: ClockEncoding
    h_in: OperatorSum
    h_out: OperatorSum
    h_stab: OperatorSum
    h_prop_terms: Tuple[OperatorSum, ...]

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.h_in.dims

    @property
    def dim(self) -> int:
        return self.h_in.dim

    @property
    def L(self) -> int:
        return self.clock.L

    @property
    def clock_sites(self) -> Tuple[int, ...]:
        start = self.verifier.circuit.n_qubits
        return tuple(range(start, start + len(self.clock.dims)))

    def h_prop(self) -> OperatorSum:
        total = OperatorSum.zero(self.dims)
        for term in self.h_prop_terms:
            total = total + term
        return total

    def penalty(self) -> OperatorSum:
        """H_in + H_prop + H_stab, whose null space is the history-state space."""
        return self.h_in + self.h_prop() + self.h_stab

    def total(self) -> OperatorSum:
        return self.penalty() + self.h_out

    def terms(self) -> List[OperatorSum]:
        """
        H_1, ..., H_r as separate projectors: one H_in term per ancilla, the
        propagation terms in gate order, the stabilizer terms, then H_r = H_out.
        """
        single = lambda t: OperatorSum(self.dims, (t,))  # noqa: E731
        return (
            [single(t) for t in self.h_in.terms]
            + list(self.h_prop_terms)
            + [single(t) for t in self.h_stab.terms]
            + [self.h_out]
        )

    def groups(self) -> Tuple[OperatorSum, Dict[str, List[int]]]:
        """All terms in one sum, with the term positions of each group."""
        sums = [
            ("h_in", self.h_in),
            ("h_prop", self.h_prop()),
            ("h_stab", self.h_stab),
            ("h_out", self.h_out),
        ]
        groups, terms = {}, []
        for name, s in sums:
            groups[name] = list(range(len(terms), len(terms) + len(s.terms)))
            terms.extend(s.terms)
        return OperatorSum(self.dims, tuple(terms)), groups

    def clock_state(self, t: int) -> np.ndarray:
        return self.clock.state(t)


@dataclass(frozen=True, eq=False)
class HistoryState:
    vector: np.ndarray
    proof: np.ndarray


def with_output_on_b1(V: VerifierCircuit) -> VerifierCircuit:
    """Append SWAP(output, B1) when the output is elsewhere in B."""
    if not V.m or V.output_qubit == V.layout.B[0]:
        return V
    b1 = V.layout.B[0]
    _LOGGER.warning(f"Output qubit {V.output_qubit} is not B1; appending SWAP to {b1}")
    gates = V.gates + (Gate("SWAP", (V.output_qubit, b1)),)
    return type(V)(QuantumCircuit(V.circuit.n_qubits, gates), V.layout, b1)


def _clock_window(clock: ClockEncoding, first: int, t: int) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Local form of |t><t|_D for t in {0, L}."""
    if clock.mode == CLOCK_LEGAL:
        block = np.zeros((clock.L + 1, clock.L + 1), dtype=complex)
        block[t, t] = 1.0
        return (first,), block
    if clock.L == 0:
        return (), np.eye(1, dtype=complex)
    if t == 0:
        return (first,), _P0
    if t == clock.L:
        return (first + clock.L - 1,), _P1
    raise RegisterLayoutError(f"no local clock projector for t={t}")


def clock_projector_term(
    clock: ClockEncoding, first: int, t: int, site: int, projector: np.ndarray, weight: float = 1.0
) -> LocalTerm:
    """projector on `site` tensored with |t><t|_D, for t in {0, L}."""
    support, block = _clock_window(clock, first, t)
    return LocalTerm((site,) + support, np.kron(projector, block), weight)


def _transition(clock: ClockEncoding, first: int, j: int):
    """Local |j><j-1| and |j><j| + |j-1><j-1| on the clock window for gate j."""
    if clock.mode == CLOCK_LEGAL:
        step = np.zeros((clock.L + 1, clock.L + 1), dtype=complex)
        step[j, j - 1] = 1.0
        both = np.zeros_like(step)
        both[j, j] = both[j - 1, j - 1] = 1.0
        return (first,), step, both
    support, step, both = [], np.eye(1, dtype=complex), np.eye(1, dtype=complex)
    if j >= 2:
        support.append(first + j - 2)
        step, both = np.kron(step, _P1), np.kron(both, _P1)
    support.append(first + j - 1)
    step, both = np.kron(step, _RAISE), np.kron(both, np.eye(2))
    if j <= clock.L - 1:
        support.append(first + j)
        step, both = np.kron(step, _P0), np.kron(both, _P0)
    return tuple(support), step, both


def compile(
    V: VerifierCircuit, clock: Optional[str] = CLOCK_LEGAL, dim_cap: Optional[int] = None
) -> KitaevHamiltonian:
    """
    Build the four term groups of the Kitaev Hamiltonian.

    :param VerifierCircuit V: verifier made of one- and two-qubit gates
    :param str clock: "legal" or "unary"
    :param int dim_cap: dense dimension cap override
    :return KitaevHamiltonian: compiled Hamiltonian
    :raise GateArityError: if a gate acts on more than two qubits
    :raise DimensionCapError: if the total dimension exceeds the cap
    """
    for index, gate in enumerate(V.gates):
        if gate.arity > 2:
            raise GateArityError(
                f"gate {index} ({gate.kind}) acts on {gate.arity} qubits; decompose first"
            )
    V = with_output_on_b1(V)
    encoding = ClockEncoding(clock or CLOCK_LEGAL, len(V.gates))
    N = V.circuit.n_qubits
    dims = (2,) * N + encoding.dims
    dim = 2**N * encoding.dim
    check_dimension(dim, dim_cap, "Kitaev Hamiltonian")
    L = encoding.L

    h_in = OperatorSum(
        dims, tuple(clock_projector_term(encoding, N, 0, c, _P1) for c in V.layout.C)
    )
    out_site = V.layout.B[0] if V.m else V.output_qubit
    h_out = OperatorSum(dims, (clock_projector_term(encoding, N, L, out_site, _P0),))

    h_prop_terms = []
    for j, gate in enumerate(V.gates, start=1):
        support, step, both = _transition(encoding, N, j)
        u = gate.unitary
        block = 0.5 * (
            np.kron(np.eye(u.shape[0]), both) - np.kron(u, step) - np.kron(u.conj().T, step.T)
        )
        h_prop_terms.append(OperatorSum(dims, (LocalTerm(gate.targets + support, block),)))

    stab = []
    if encoding.mode == CLOCK_UNARY:
        p01 = np.kron(_P0, _P1)
        stab = [LocalTerm((N + i, N + i + 1), p01) for i in range(L - 1)]
    h_stab = OperatorSum(dims, tuple(stab))

    _LOGGER.info(
        f"Compiled Kitaev Hamiltonian: L={L}, {N} qubits + {encoding.mode} clock, "
        f"dimension {dim}, {len(h_in.terms) + L + len(stab) + 1} terms"
    )
    return KitaevHamiltonian(V, encoding, h_in, h_out, h_stab, tuple(h_prop_terms))


def _prefix_states(V: VerifierCircuit, start: np.ndarray) -> List[np.ndarray]:
    N = V.circuit.n_qubits
    tensor = start.reshape((2,) * N) if N else start
    states = [tensor.reshape(-1)]
    for gate in V.gates:
        tensor = _apply_gate_tensor(tensor, gate)
        states.append(tensor.reshape(-1))
    return states


def history_state(
    V: VerifierCircuit, psi: np.ndarray, clock: Optional[str] = CLOCK_LEGAL
) -> HistoryState:
    """
    (L+1)^(-1/2) sum_t V_t ... V_1 |psi>_AB |0>_C |t>_D

    :param VerifierCircuit V: verifier
    :param np.ndarray psi: unit vector on A and B
    :param str clock: clock mode, matching the compiled Hamiltonian
    :return HistoryState: unit vector on A, B, C and the clock
    """
    V = with_output_on_b1(V)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape[0] != 2 ** (V.n + V.m):
        raise RegisterLayoutError(
            f"proof of dimension {psi.shape[0]} for {V.n + V.m} proof qubits"
        )
    encoding = ClockEncoding(clock or CLOCK_LEGAL, len(V.gates))
    ancilla = np.zeros(2**V.p, dtype=complex)
    ancilla[0] = 1.0
    states = _prefix_states(V, np.kron(psi, ancilla))
    vector = sum(np.kron(s, encoding.state(t)) for t, s in enumerate(states))
    vector = vector / np.sqrt(encoding.L + 1)
    return HistoryState(vector, psi)


def hist_projector(V: VerifierCircuit, clock: Optional[str] = CLOCK_LEGAL) -> Subspace:
    """Orthonormal history states of every computational-basis proof on A and B."""
    width = 2 ** (V.n + V.m)
    columns = []
    for index in range(width):
        proof = np.zeros(width, dtype=complex)
        proof[index] = 1.0
        columns.append(history_state(V, proof, clock).vector)
    basis = np.stack(columns, axis=1)
    return Subspace(basis.shape[0], basis)


def kitaev_bounds(
    V: VerifierCircuit,
    epsilon: float,
    clock: Optional[str] = CLOCK_LEGAL,
    dim_cap: Optional[int] = None,
) -> Tuple[float, float]:
    """
    :param VerifierCircuit V: verifier
    :param float epsilon: verifier error in [0, 1)
    :return (float, float): a = epsilon / (L+1) and b = lambda_min(H)
    """
    if not 0 <= epsilon < 1:
        raise RegisterLayoutError(f"epsilon must lie in [0, 1), got {epsilon}")
    kit = compile(V, clock, dim_cap)
    a = epsilon / (kit.L + 1)
    b = min_eigenvalue(assemble(kit.total(), dim_cap))
    floor = history_energy_floor(kit.L, epsilon)
    if b < floor:
        _LOGGER.warning(
            f"lambda_min(H)={b:.3g} is below the sanity floor {floor:.3g}; "
            "some classical proof is accepted"
        )
    return a, b


def history_energy_floor(L: int, epsilon: float) -> float:
    """Sanity floor 1e-3 (1 - sqrt(eps)) / L^3 for the rejection energy."""
    return HISTORY_FLOOR_CONSTANT * (1 - np.sqrt(epsilon)) / max(L, 1) ** 3


def _gate_unitaries(V: VerifierCircuit) -> List[np.ndarray]:
    """U_j = V_j ... V_1 on the verifier qubits for j = 0..L."""
    N = V.circuit.n_qubits
    dim = 2**N
    tensor = np.eye(dim, dtype=complex).reshape((2,) * N + (dim,))
    unitaries = [np.eye(dim, dtype=complex)]
    for gate in V.gates:
        tensor = _apply_gate_tensor(tensor, gate)
        unitaries.append(tensor.reshape(dim, dim))
    return unitaries


def change_of_basis_W(
    V: VerifierCircuit, clock: Optional[str] = CLOCK_LEGAL, dim_cap: Optional[int] = None
) -> np.ndarray:
    """
    W = sum_j (V_j ... V_1)^dagger (x) |j><j|, which maps H_prop to I (x) E_D.

    :raise RegisterLayoutError: for a unary clock
    """
    if clock != CLOCK_LEGAL:
        raise RegisterLayoutError("change of basis is defined for the legal clock only")
    V = with_output_on_b1(V)
    L = len(V.gates)
    check_dimension(2**V.circuit.n_qubits * (L + 1), dim_cap, "change of basis")
    W = 0
    for j, u in enumerate(_gate_unitaries(V)):
        marker = np.zeros((L + 1, L + 1), dtype=complex)
        marker[j, j] = 1.0
        W = W + np.kron(u.conj().T, marker)
    return W


def propagation_operator(L: int) -> OperatorSum:
    """E_D: half the Laplacian of the path on L+1 clock states."""
    E = np.zeros((L + 1, L + 1), dtype=complex)
    for j in range(1, L + 1):
        E[j, j] += 0.5
        E[j - 1, j - 1] += 0.5
        E[j, j - 1] -= 0.5
        E[j - 1, j] -= 0.5
    return OperatorSum((L + 1,), (LocalTerm((0,), E),))


def propagation_spectrum(L: int) -> List[float]:
    """1 - cos(pi k / (L+1)) for k = 0..L, ascending."""
    if L < 1:
        raise RegisterLayoutError(f"propagation spectrum needs L >= 1, got {L}")
    return sorted(1.0 - np.cos(np.pi * k / (L + 1)) for k in range(L + 1))


def lifted_pair(
    V: VerifierCircuit, dim_cap: Optional[int] = None
) -> Tuple[HermitianOperator, HermitianOperator]:
    """
    A1 = W (H_in + p Pi_hist) W^dagger and A2 = W (H_prop + 2 Pi_hist) W^dagger
    on the legal clock, p being the ancilla count.

    :raise RegisterLayoutError: if the verifier has no ancilla
    """
    if V.p < 1:
        raise RegisterLayoutError("lifted pair needs at least one ancilla qubit")
    kit = compile(V, CLOCK_LEGAL, dim_cap)
    W = change_of_basis_W(kit.verifier, CLOCK_LEGAL, dim_cap)
    hist = hist_projector(kit.verifier, CLOCK_LEGAL).projector()
    A1 = (assemble(kit.h_in, dim_cap) + V.p * hist).conjugated(W)
    A2 = (assemble(kit.h_prop(), dim_cap) + 2 * hist).conjugated(W)
    return A1, A2


def legal_clock_isometry(V: VerifierCircuit) -> np.ndarray:
    """Embedding of the legal clock into the unary clock qubits, on the full space."""
    L = len(with_output_on_b1(V).gates)
    unary = ClockEncoding(CLOCK_UNARY, L)
    J = np.zeros((unary.dim, L + 1), dtype=complex)
    for t in range(L + 1):
        J[unary.index(t), t] = 1.0
    return np.kron(np.eye(2**V.circuit.n_qubits), J)
