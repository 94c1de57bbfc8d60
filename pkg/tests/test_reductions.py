import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from hamred import reductions
from hamred.circuits import classify_inputs
from hamred.const import ACCEPTS, NO, YES
from hamred.ops import assemble, eigenvalues, expectation
from hamred.utils import (
    DeltaTooSmallError,
    DimensionCapError,
    ProjectorError,
    RegisterLayoutError,
    all_bitstrings,
    is_power_of_two,
)

from .conftest import accept_all, accept_iff_first, reject_all

TOY_COVER = (0, 3, 4)


def positions(instance, role):
    return [i for i, t in enumerate(instance.terms) if t.role == role]


@pytest.fixture(scope="module")
def lh_yes():
    return reductions.cq_to_lh(accept_iff_first())


@pytest.fixture(scope="module")
def lh_yes_matrix(lh_yes):
    return assemble(lh_yes.hamiltonian)


class TestQmw:
    """
    Testing the verifier to monotone-weight reduction
    """

    @pytest.mark.parametrize(["make", "weight"], [(accept_all, 2), (reject_all, 3)])
    def test_min_weight(self, small_tree, make, weight):
        Q = reductions.to_qmw(make(), small_tree)
        assert reductions.qmw_min_weight(Q) == weight
        assert Q.g == 2 and Q.g_prime == 2

    def test_threshold_inputs_accept(self, small_tree):
        Q = reductions.to_qmw(reject_all(), small_tree)
        statuses = classify_inputs(Q.W)
        for x, status in statuses.items():
            assert (status == ACCEPTS) == (x.count("1") > 2)

    def test_input_width(self, small_tree):
        Q = reductions.to_qmw(accept_all(), small_tree)
        assert Q.W.n == small_tree.right_size
        assert Q.provenance["slots"] == 1

    def test_depth_mismatch(self, small_tree):
        with pytest.raises(RegisterLayoutError):
            reductions.to_qmw(accept_iff_first(), small_tree)

    def test_qmsa(self, small_tree):
        Q = reductions.to_qmsa(accept_all(m=0), small_tree)
        assert isinstance(Q, reductions.QmsaInstance)
        assert Q.W.m == 0
        assert reductions.qmw_min_weight(Q) == 2

    def test_qmsa_rejects_quantum_proof(self, small_tree):
        with pytest.raises(RegisterLayoutError):
            reductions.to_qmsa(accept_all(), small_tree)
        with pytest.raises(RegisterLayoutError):
            reductions.QmsaInstance(accept_all(), 0, 1)

    def test_tree_instance_exceeds_dense_cap(self, small_tree):
        Q = reductions.to_qmw(accept_all(), small_tree)
        assert reductions.qmw_min_weight(Q) <= Q.g <= Q.g_prime
        with pytest.raises(DimensionCapError):
            reductions.qmw_to_qssc(Q, dim_cap=8192)

    def test_thresholds_in_range(self):
        with pytest.raises(RegisterLayoutError):
            reductions.QmwInstance.from_verifier(accept_iff_first(), 1, 4)


class TestQssc:
    """
    Testing the monotone-weight to set-cover reduction on the toy chain
    """

    def test_parameters(self, toy_qssc):
        assert len(toy_qssc.terms) == 5
        assert toy_qssc.input_width == 3
        assert toy_qssc.kitaev.dim == 96
        assert toy_qssc.alpha == pytest.approx(1.0)
        assert toy_qssc.b == pytest.approx(1.0 / 3)
        assert toy_qssc.beta == pytest.approx(2.0 / 3)
        assert (toy_qssc.g, toy_qssc.g_prime) == (3, 4)
        assert toy_qssc.delta >= 288 and is_power_of_two(int(toy_qssc.delta))
        assert toy_qssc.scale >= 3

    def test_projection_bounds_certify(self, toy_qssc):
        report = reductions.projection_check(toy_qssc)
        assert report.applicable
        assert report.holds
        assert reductions.delta_hypothesis_margin(toy_qssc) > 0

    def test_cover_of_size_g(self, toy_qssc):
        verdict = reductions.verify_qssc(toy_qssc, TOY_COVER)
        assert verdict.is_cover
        assert verdict.eigenvalue >= toy_qssc.alpha - 1e-9
        assert len(TOY_COVER) == toy_qssc.g

    def test_smallest_cover(self, toy_qssc):
        assert reductions.find_cover(toy_qssc) == TOY_COVER

    def test_no_small_cover(self, toy_qssc):
        assert reductions.brute_force_no(toy_qssc, max_size=toy_qssc.g - 1)

    def test_every_subset_is_cover_or_below_beta(self, toy_qssc):
        table = reductions.cover_table(toy_qssc, max_size=toy_qssc.g_prime - 1)
        assert len(table) == 26
        assert (table["is_cover"] | table["below_beta"]).all()
        assert table[table["size"] <= 2]["below_beta"].all()

    def test_full_set_is_cover(self, toy_qssc):
        assert reductions.verify_qssc(toy_qssc, range(5)).is_cover

    def test_empty_subset(self, toy_qssc):
        verdict = reductions.verify_qssc(toy_qssc, [])
        assert verdict.eigenvalue == pytest.approx(0.0)
        assert not verdict.is_cover

    def test_index_out_of_range(self, toy_qssc):
        with pytest.raises(RegisterLayoutError):
            reductions.verify_qssc(toy_qssc, [5])

    @pytest.mark.parametrize("T", [[], [0], [0, 2], [0, 1, 2]])
    def test_history_eigenvectors(self, toy_qssc, T):
        assert reductions.check_history_eigenvectors(toy_qssc, T) <= 1e-10

    @pytest.mark.parametrize(["T", "expected"], [([], 1.0 / 3), ([0], 0.0)])
    def test_pi_hist_bound(self, toy_qssc, T, expected):
        assert reductions.pi_hist_bound(toy_qssc, T) == pytest.approx(expected, abs=1e-9)

    def test_delta_too_small(self):
        Q = reductions.QmwInstance.from_verifier(accept_iff_first(), 1, 2)
        with pytest.raises(DeltaTooSmallError) as e:
            reductions.qmw_to_qssc(Q, delta=1.0)
        assert e.value.margin is not None

    def test_padding_to_power_of_two(self):
        Q = reductions.QmwInstance.from_verifier(accept_all(padded=True), 0, 1)
        instance = reductions.qmw_to_qssc(Q)
        H, padding = reductions.padded_terms(instance)
        assert len(H) == 8
        assert padding == [False] * 5 + [True] * 2 + [False]
        assert instance.provenance["b_source"] == "generic"


class TestQirr:
    """
    Testing the set-cover to irreducibility reduction
    """

    def test_parameters(self, toy_qssc, toy_qirr, toy_qirr_improved):
        assert toy_qirr.r == 4
        assert toy_qirr.chaperone_qubits == 2
        assert int(np.prod(toy_qirr.dims)) == 768
        assert len(toy_qirr.terms) == 3 + 3 + 4
        assert len(toy_qirr_improved.terms) == 3 * 4 + 3 + 4
        assert toy_qirr.gamma == pytest.approx(toy_qssc.alpha + 3)
        assert toy_qirr.delta == pytest.approx(toy_qssc.beta + 3)
        assert (toy_qirr.h, toy_qirr.h_prime) == (toy_qssc.g + 5, toy_qssc.g_prime + 5)
        assert (toy_qirr_improved.h, toy_qirr_improved.h_prime) == (
            toy_qssc.g * 4 - 1,
            toy_qssc.g_prime * 4 - 1,
        )

    def test_k_decomposition(self, toy_qirr):
        chosen = reductions.succinct_subset(toy_qirr, [0])
        F = reductions.qirr_subset_operator(toy_qirr, chosen)
        K1, K2 = reductions.k_decomposition(toy_qirr, [0])
        assert np.max(np.abs(F.matrix - K1.matrix - K2.matrix)) <= 1e-10

    def test_cover_is_sufficient(self, toy_qirr):
        report = reductions.verify_qirr(toy_qirr, reductions.succinct_subset(toy_qirr, [0]))
        assert report.status == YES
        assert report.route == "sufficient"
        assert report.eigenvalue >= toy_qirr.gamma - 1e-9

    def test_missing_head(self, toy_qirr, toy_qssc):
        chosen = reductions.succinct_subset(toy_qirr, [0])
        chosen.remove(positions(toy_qirr, "head")[0])
        report = reductions.verify_qirr(toy_qirr, chosen)
        assert (report.status, report.route) == (NO, "missing-head")
        assert report.energy_full == pytest.approx(toy_qssc.delta + 1, abs=1e-9)
        assert report.energy_subset == pytest.approx(0.0, abs=1e-9)

    def test_missing_tail(self, toy_qirr):
        chosen = reductions.succinct_subset(toy_qirr, [0])
        chosen.remove(positions(toy_qirr, "tail")[1])
        report = reductions.verify_qirr(toy_qirr, chosen)
        assert (report.status, report.route) == (NO, "missing-tail")
        assert report.energy_full == pytest.approx(toy_qirr.r, abs=1e-9)
        assert report.energy_subset <= toy_qirr.r - 1 + 1e-9

    def test_non_cover(self, toy_qirr):
        report = reductions.verify_qirr(toy_qirr, reductions.succinct_subset(toy_qirr, []))
        assert report.status == NO
        assert report.route == "chaperone-block"
        assert report.energy_full >= toy_qirr.gamma - 1e-9
        assert report.energy_subset <= toy_qirr.delta + 1e-9

    def test_improved_matches_basic(self, toy_qirr, toy_qirr_improved):
        for cover in ([0], list(range(3))):
            basic = reductions.qirr_subset_operator(
                toy_qirr, reductions.succinct_subset(toy_qirr, cover)
            )
            improved = reductions.qirr_subset_operator(
                toy_qirr_improved, reductions.succinct_subset(toy_qirr_improved, cover)
            )
            assert_allclose(eigenvalues(improved), eigenvalues(basic), atol=1e-9)

    def test_improved_keeps_chaperones(self, toy_qirr_improved):
        covers = [t for t in toy_qirr_improved.terms if t.role == "cover"]
        assert sorted({t.chaperone for t in covers}) == [0, 1, 2, 3]

    def test_projector_validation(self, toy_qirr):
        tail = toy_qirr.terms[-1]
        broken = dataclasses.replace(
            toy_qirr,
            terms=(dataclasses.replace(tail, operator=tail.operator.scaled(0.5)),),
        )
        with pytest.raises(ProjectorError):
            reductions.check_projectors(broken)

    def test_unknown_mode(self, toy_qssc):
        with pytest.raises(RegisterLayoutError):
            reductions.qssc_to_qirr(toy_qssc, mode="fancy")


class TestLocalHamiltonian:
    """
    Testing the classical-proof local Hamiltonian and its compressions H(c)
    """

    def test_prepared_circuit(self, lh_yes):
        assert lh_yes.prepared.circuit.n_qubits == 8
        assert len(lh_yes.prepared) == 6
        assert lh_yes.hamiltonian.dim == 1792
        assert lh_yes.a == 0.0
        assert lh_yes.b > 0

    @pytest.mark.parametrize("c", ["000", "101", "110"])
    def test_classical_block(self, lh_yes, lh_yes_matrix, c):
        block = reductions.compressed_classical_block(lh_yes_matrix, lh_yes.copy_width, c)
        expected = reductions.effective_hamiltonian(lh_yes.prepared, c)
        assert np.max(np.abs(block.matrix - expected.matrix)) <= 1e-10

    def test_random_expectations(self, lh_yes, lh_yes_matrix, rng):
        rest = lh_yes_matrix.dim // 8
        for _ in range(20):
            c = "".join(rng.choice(["0", "1"], size=3))
            psi = rng.normal(size=rest) + 1j * rng.normal(size=rest)
            psi /= np.linalg.norm(psi)
            classical = np.zeros(8)
            classical[int(c, 2)] = 1.0
            full = expectation(lh_yes_matrix, np.kron(classical, psi))
            H_c = reductions.effective_hamiltonian(lh_yes.prepared, c)
            assert full == pytest.approx(expectation(H_c, psi), abs=1e-10)

    def test_effective_circuit_keeps_length(self, lh_yes):
        for c in all_bitstrings(3):
            V_c = reductions.effective_circuit(lh_yes.prepared, c)
            assert len(V_c) == len(lh_yes.prepared)
            assert V_c.n == 0

    def test_effective_circuit_needs_copy_phase(self):
        with pytest.raises(RegisterLayoutError):
            reductions.effective_circuit(accept_iff_first(), "100")

    def test_yes_instance(self, lh_yes):
        report = reductions.verify_lh(lh_yes)
        assert report.status == YES
        assert report.yes_proof.startswith("1")
        assert report.energies[report.yes_proof] >= lh_yes.b - 1e-9

    def test_no_instance(self):
        instance = reductions.cq_to_lh(reject_all())
        assert instance.provenance["b_source"] == "floor"
        report = reductions.verify_lh(instance)
        assert report.status == NO
        assert set(report.witness_energies) == {"0", "1"}
        assert all(e <= instance.a + 1e-9 for e in report.witness_energies.values())

    def test_rejecting_proof_has_low_energy_witness(self, lh_yes):
        vector, energy = reductions.lh_no_witness(lh_yes, "000")
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert energy <= lh_yes.a + 1e-9

    def test_weight_variant(self):
        Q = reductions.QmwInstance.from_verifier(accept_iff_first(), 1, 2)
        instance = reductions.qmw_to_lh_hw(Q)
        assert (instance.g, instance.g_prime) == (1, 2)
        report = reductions.verify_lh(instance)
        assert report.status == YES
        assert all(c.count("1") <= 1 for c in report.energies)

