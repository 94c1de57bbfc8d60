import numpy as np
import pytest
from numpy.testing import assert_allclose

from hamred.circuits import (
    CqmaCircuit,
    Gate,
    QuantumCircuit,
    RegisterLayout,
    VerifierCircuit,
    accept_probability,
    acceptance_operator,
    amplification_glue,
    amplified_width,
    apply_circuit,
    circuit_unitary,
    classify_inputs,
    compose_amplify,
    cqma_status,
    decompose,
    min_weight_accepted,
    monotone_check,
    normalize_inputs,
    or_gates,
    or_of_outputs,
    pattern_gates,
    simulate_basis,
)
from hamred.const import ACCEPTS, QUBIT_BUDGET, REJECTS, UNDETERMINED
from hamred.ops import expectation
from hamred.utils import (
    GateArityError,
    QubitBudgetError,
    RegisterLayoutError,
    all_bitstrings,
    int_to_bits,
)

MIXED_GATES = [
    ("H", (0,)),
    ("T", (0,)),
    ("CNOT", (0, 1)),
    ("H", (2,)),
    ("CCX", (2, 0, 1)),
    ("TDG", (1,)),
    ("SWAP", (1, 2)),
    ("Z", (0,)),
]


def circuit_of(n, gates):
    return QuantumCircuit(n, tuple(Gate(k, t) for k, t in gates))


def basis_value(circuit, index):
    """Output basis index of a classical (permutation) circuit."""
    indices, amplitudes = simulate_basis(circuit, index)
    assert len(indices) == 1
    assert abs(amplitudes[0]) == pytest.approx(1.0)
    return int(indices[0])


def same_up_to_phase(u, v):
    overlap = np.trace(u.conj().T @ v)
    return abs(abs(overlap) - u.shape[0]) < 1e-9


class TestGates:
    """
    Testing gate validation
    """

    @pytest.mark.parametrize(
        ["kind", "targets"],
        [("CNOT", (0,)), ("X", (0, 1)), ("CCX", (0, 1)), ("FOO", (0,)), ("X", (-1,))],
    )
    def test_bad_gates(self, kind, targets):
        with pytest.raises(GateArityError):
            Gate(kind, targets)

    def test_duplicate_targets(self):
        with pytest.raises(GateArityError):
            Gate("CNOT", (1, 1))

    def test_kind_is_normalized(self):
        assert Gate("cnot", (0, 1)).kind == "CNOT"

    def test_custom_must_be_unitary(self):
        with pytest.raises(GateArityError):
            Gate("CUSTOM", (0,), np.array([[1, 1], [0, 1]]))

    def test_custom_gate(self):
        sx = np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2
        circuit = QuantumCircuit(1, (Gate("CUSTOM", (0,), sx), Gate("CUSTOM", (0,), sx)))
        assert_allclose(circuit_unitary(circuit), [[0, 1], [1, 0]], atol=1e-12)

    def test_target_outside_circuit(self):
        with pytest.raises(RegisterLayoutError):
            circuit_of(2, [("CNOT", (0, 2))])


class TestLayout:
    """
    Testing register layouts and output placement
    """

    def test_registers(self):
        layout = RegisterLayout(2, 1, 3)
        assert layout.A == (0, 1)
        assert layout.B == (2,)
        assert layout.C == (3, 4, 5)

    def test_default_output(self):
        V = VerifierCircuit(circuit_of(3, []), RegisterLayout(1, 1, 1))
        assert V.output_qubit == 1

    def test_output_in_c_without_b(self):
        V = VerifierCircuit(circuit_of(2, []), RegisterLayout(1, 0, 1))
        assert V.output_qubit == 1

    def test_output_must_be_in_b(self):
        with pytest.raises(RegisterLayoutError):
            VerifierCircuit(circuit_of(3, []), RegisterLayout(1, 1, 1), output_qubit=2)

    def test_layout_must_cover_circuit(self):
        with pytest.raises(RegisterLayoutError):
            VerifierCircuit(circuit_of(4, []), RegisterLayout(1, 1, 1))


class TestSimulation:
    """
    Testing dense and sparse simulation
    """

    @pytest.mark.parametrize("index", range(8))
    def test_sparse_matches_dense(self, index):
        circuit = circuit_of(3, MIXED_GATES)
        state = np.zeros(8, dtype=complex)
        state[index] = 1.0
        dense = apply_circuit(circuit, state)
        indices, amplitudes = simulate_basis(circuit, index)
        sparse = np.zeros(8, dtype=complex)
        sparse[indices] = amplitudes
        assert_allclose(sparse, dense, atol=1e-12)

    def test_unitary_columns(self):
        circuit = circuit_of(3, MIXED_GATES)
        U = circuit_unitary(circuit)
        assert_allclose(U.conj().T @ U, np.eye(8), atol=1e-12)
        state = np.zeros(8, dtype=complex)
        state[5] = 1.0
        assert_allclose(U[:, 5], apply_circuit(circuit, state), atol=1e-12)

    def test_qubit_zero_is_most_significant(self):
        circuit = circuit_of(2, [("X", (0,))])
        assert basis_value(circuit, 0) == 2

    def test_unnormalized_state(self):
        with pytest.raises(RegisterLayoutError):
            apply_circuit(circuit_of(1, []), np.array([1.0, 1.0]))

    def test_wrong_dimension(self):
        with pytest.raises(RegisterLayoutError):
            apply_circuit(circuit_of(2, []), np.array([1.0, 0.0]))


class TestDecompose:
    """
    Testing the Toffoli rewrite
    """

    def test_toffoli_equivalence(self):
        circuit = circuit_of(3, [("CCX", (0, 1, 2))])
        rewritten = decompose(circuit)
        assert len(rewritten) == 15
        assert all(g.arity <= 2 for g in rewritten.gates)
        assert same_up_to_phase(circuit_unitary(circuit), circuit_unitary(rewritten))

    def test_permuted_targets(self):
        circuit = circuit_of(4, [("H", (3,)), ("CCX", (3, 0, 2)), ("CNOT", (1, 0))])
        assert same_up_to_phase(circuit_unitary(circuit), circuit_unitary(decompose(circuit)))

    def test_keeps_verifier_layout(self, toys):
        V = toys.and_gate()
        rewritten = decompose(V)
        assert rewritten.layout == V.layout
        assert rewritten.output_qubit == V.output_qubit
        assert isinstance(rewritten, CqmaCircuit)


class TestSynthesis:
    """
    Testing pattern matching and OR cascades
    """

    @pytest.mark.parametrize("bits", ["101", "000", "111", "010"])
    def test_pattern_gates(self, bits):
        gates = pattern_gates([0, 1, 2], bits, [3], [4, 5])
        circuit = QuantumCircuit(6, tuple(gates))
        for x in all_bitstrings(3):
            out = int_to_bits(basis_value(circuit, int(x + "000", 2)), 6)
            assert out[:3] == x
            assert out[3] == ("1" if x == bits else "0")
            assert out[4:] == "00"

    def test_single_control(self):
        circuit = QuantumCircuit(2, tuple(pattern_gates([0], "0", [1], [])))
        assert basis_value(circuit, 0b00) == 0b01
        assert basis_value(circuit, 0b10) == 0b10

    def test_pattern_needs_work_qubits(self):
        with pytest.raises(RegisterLayoutError):
            pattern_gates([0, 1, 2], "111", [3], [4])

    @pytest.mark.parametrize("x", list(all_bitstrings(3)))
    def test_or_gates(self, x):
        gates, result = or_gates([0, 1, 2], [3, 4])
        circuit = QuantumCircuit(5, tuple(gates))
        out = int_to_bits(basis_value(circuit, int(x + "00", 2)), 5)
        assert out[:3] == x
        assert out[result] == ("1" if "1" in x else "0")

    def test_or_of_outputs(self, toys):
        V = or_of_outputs([toys.accept_iff_first(n=1), toys.reject_all()])
        statuses = classify_inputs(V)
        assert statuses == {"00": REJECTS, "01": REJECTS, "10": ACCEPTS, "11": ACCEPTS}


class TestVerifierSemantics:
    """
    Testing acceptance operators and cQMA statuses
    """

    @pytest.mark.parametrize(["x", "status"], [("100", ACCEPTS), ("111", ACCEPTS), ("011", REJECTS)])
    def test_accept_iff_first(self, toys, x, status):
        assert cqma_status(toys.accept_iff_first(), x) == status

    def test_undetermined(self):
        V = CqmaCircuit(circuit_of(1, [("H", (0,))]), RegisterLayout(0, 0, 1))
        assert cqma_status(V, "") == UNDETERMINED

    def test_acceptance_operator_matches_simulation(self, rng):
        layout = RegisterLayout(1, 2, 1)
        gates = [("H", (1,)), ("CNOT", (1, 3)), ("T", (2,)), ("CNOT", (0, 2)), ("H", (2,)), ("SWAP", (3, 1))]
        V = CqmaCircuit(circuit_of(4, gates), layout)
        proof = rng.normal(size=4) + 1j * rng.normal(size=4)
        proof /= np.linalg.norm(proof)
        for x in ("0", "1"):
            A = acceptance_operator(V, x)
            assert expectation(A, proof) == pytest.approx(accept_probability(V, x, proof), abs=1e-10)

    def test_quantum_proof_choice(self, toys):
        # accepts iff B reads 1, so one choice rejects
        V = toys.make(0, 1, 0, [], output=0)
        assert cqma_status(V, "") == REJECTS

    def test_monotone(self, toys):
        assert monotone_check(toys.and_gate())
        assert monotone_check(toys.accept_iff_first())

    def test_not_monotone(self, toys):
        V = toys.make(1, 1, 1, [("X", (0,)), ("CNOT", (0, 2)), ("X", (0,)), ("SWAP", (2, 1))])
        assert classify_inputs(V) == {"0": ACCEPTS, "1": REJECTS}
        assert not monotone_check(V)

    def test_min_weight(self, toys):
        assert min_weight_accepted(toys.and_gate()) == 2
        assert min_weight_accepted(toys.accept_iff_first()) == 1
        assert min_weight_accepted(toys.reject_all()) is None

    def test_normalize_inputs(self, toys):
        V = toys.accept_iff_first()
        assert classify_inputs(normalize_inputs(V)) == classify_inputs(V)


class TestAmplification:
    """
    Testing composition of a monotone circuit with itself
    """

    def test_and_squared(self, toys):
        W = toys.and_gate()
        W2 = compose_amplify(W, 2)
        assert W2.n == 4
        assert min_weight_accepted(W2) == 4
        assert classify_inputs(W2)["1111"] == ACCEPTS
        assert classify_inputs(W2)["1110"] == REJECTS

    def test_size_bound(self, toys):
        W = toys.and_gate()
        W2 = compose_amplify(W, 2)
        glue = amplification_glue(W.n, 2)
        assert glue == 6
        assert len(W2) == (W.n + 1) * len(W) + glue
        assert len(W2) <= W.n**2 * len(W) + glue

    def test_depth_one(self, toys):
        W = toys.and_gate()
        assert classify_inputs(compose_amplify(W, 1)) == classify_inputs(W)

    def test_bad_depth(self, toys):
        with pytest.raises(RegisterLayoutError):
            compose_amplify(toys.and_gate(), 0)

    @pytest.mark.parametrize("t", [1, 2, 3])
    def test_width_prediction(self, toys, t):
        W = toys.and_gate()
        assert amplified_width(W, t) == compose_amplify(W, t).circuit.n_qubits

    @pytest.mark.parametrize("t", [4, 9])
    def test_qubit_budget(self, toys, t):
        W = toys.and_gate()
        assert amplified_width(W, t) > QUBIT_BUDGET
        with pytest.raises(QubitBudgetError):
            compose_amplify(W, t)

    def test_wide_basis_simulation(self):
        with pytest.raises(QubitBudgetError):
            simulate_basis(circuit_of(QUBIT_BUDGET + 1, []), 0)
