""" Package-level data """

import logmuse
import coloredlogs

from hamred.hamred import Hamred
from hamred.ops import HermitianOperator, LocalTerm, OperatorSum, Subspace
from hamred.circuits import Gate, QuantumCircuit, VerifierCircuit, CqmaCircuit
from hamred.kitaev import ClockEncoding, KitaevHamiltonian
from hamred.disperser import DisperserGraph, EncodingTree
from hamred._version import __version__


__all__ = [
    "ClockEncoding",
    "CqmaCircuit",
    "DisperserGraph",
    "EncodingTree",
    "Gate",
    "Hamred",
    "HermitianOperator",
    "KitaevHamiltonian",
    "LocalTerm",
    "OperatorSum",
    "QuantumCircuit",
    "Subspace",
    "VerifierCircuit",
    "__version__",
]

_LOGGER = logmuse.init_logger("hamred")
coloredlogs.install(
    logger=_LOGGER,
    datefmt="%H:%M:%S",
    fmt="[%(levelname)s] [%(asctime)s] %(message)s",
)
