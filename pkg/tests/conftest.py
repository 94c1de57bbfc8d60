import os

import hypothesis
import numpy as np
import pytest

from hamred.circuits import CqmaCircuit, Gate, QuantumCircuit, RegisterLayout, VerifierCircuit
from hamred.disperser import tree_from_rows

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


def make_verifier(n, m, p, gates, output=None, cls=CqmaCircuit):
    """Verifier from (kind, targets) pairs over the A, B, C layout."""
    layout = RegisterLayout(n, m, p)
    circuit = QuantumCircuit(layout.total, tuple(Gate(k, t) for k, t in gates))
    return cls(circuit, layout, output)


def accept_iff_first(n=3, m=1):
    """Accepts exactly the x with x_1 = 1."""
    a1, c1 = 0, n + m
    gates = [("CNOT", (a1, c1))]
    if m:
        gates.append(("SWAP", (c1, n)))
    return make_verifier(n, m, 1, gates)


def accept_all(n=1, m=1, padded=False):
    """Always accepts; the padded form has L = 4."""
    c1 = n + m
    gates = [("X", (c1,))]
    if padded:
        gates += [("T", (c1,)), ("TDG", (c1,))]
    if m:
        gates.append(("SWAP", (c1, n)))
    return make_verifier(n, m, 1, gates)


def reject_all(n=1, m=1):
    c1 = n + m
    gates = [("SWAP", (c1, n))] if m else [("I", (c1,))]
    return make_verifier(n, m, 1, gates)


def and_gate(m=1):
    """n = 2, accepts only 11."""
    c1 = 2 + m
    gates = [("CCX", (0, 1, c1))]
    if m:
        gates.append(("SWAP", (c1, 2)))
    return make_verifier(2, m, 1, gates)


@pytest.fixture
def toys():
    """Factory namespace for the toy verifiers."""

    class Toys:
        accept_iff_first = staticmethod(accept_iff_first)
        accept_all = staticmethod(accept_all)
        reject_all = staticmethod(reject_all)
        and_gate = staticmethod(and_gate)
        make = staticmethod(make_verifier)

    return Toys


@pytest.fixture
def small_tree():
    """Depth 1 over 4 right vertices: root {0}, leaves {1} and {2}."""
    return tree_from_rows(1, 4, [[0], [1], [2]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def toy_qssc():
    """accept_iff_first (n=3) wrapped as QMW with f=1, then reduced to QSSC."""
    from hamred.reductions import QmwInstance, qmw_to_qssc

    Q = QmwInstance.from_verifier(accept_iff_first(), 1, 2)
    return qmw_to_qssc(Q)


@pytest.fixture(scope="session")
def toy_qirr(toy_qssc):
    from hamred.reductions import qssc_to_qirr

    return qssc_to_qirr(toy_qssc)


@pytest.fixture(scope="session")
def toy_qirr_improved(toy_qssc):
    from hamred.reductions import qssc_to_qirr

    return qssc_to_qirr(toy_qssc, mode="improved")
