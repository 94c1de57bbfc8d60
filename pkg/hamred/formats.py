"""
Versioned JSON artifacts.

Every artifact is an object with "version" and "kind". Complex matrices are
nested lists of [re, im] pairs.
"""

import json
import logging
import os
from typing import Any, Callable, Dict, List

import numpy as np
from ubiquerg import expandpath

from hamred import kitaev
from hamred.circuits import CqmaCircuit, Gate, QuantumCircuit, RegisterLayout, VerifierCircuit
from hamred.const import FORMAT_VERSION
from hamred.disperser import DisperserGraph, EncodingTree
from hamred.ops import LocalTerm, OperatorSum
from hamred.reductions import (
    CqLhInstance,
    QirrInstance,
    QirrTerm,
    QmsaInstance,
    QmwInstance,
    QsscInstance,
)
from hamred.utils import HamredException, SchemaError

_LOGGER = logging.getLogger(__name__)


def encode_matrix(matrix: np.ndarray) -> List[List[List[float]]]:
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def decode_matrix(data: Any, path: str) -> np.ndarray:
    try:
        array = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("expected a matrix of [re, im] pairs", path)
    if array.ndim != 3 or array.shape[2] != 2 or array.shape[0] != array.shape[1]:
        raise SchemaError(f"expected a square matrix of [re, im] pairs, got shape {array.shape}", path)
    return array[..., 0] + 1j * array[..., 1]


def _field(data: Dict, key: str, path: str, kind: type = None):
    if not isinstance(data, dict):
        raise SchemaError("expected an object", path)
    if key not in data:
        raise SchemaError("missing field", f"{path}.{key}" if path else key)
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(
            f"expected {getattr(kind, '__name__', 'number')}, got {type(value).__name__}",
            f"{path}.{key}" if path else key,
        )
    return value


def _sub(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _header(kind: str) -> Dict[str, str]:
    return {"version": FORMAT_VERSION, "kind": kind}


def encode_circuit(V: VerifierCircuit) -> Dict:
    gates = []
    for gate in V.gates:
        entry = {"kind": gate.kind, "targets": list(gate.targets)}
        if gate.matrix is not None:
            entry["matrix"] = encode_matrix(gate.matrix)
        gates.append(entry)
    return dict(
        _header("circuit"),
        layout={"n": V.n, "m": V.m, "p": V.p},
        output=V.output_qubit,
        cqma=isinstance(V, CqmaCircuit),
        gates=gates,
    )


def decode_circuit(data: Dict, path: str = "") -> VerifierCircuit:
    layout_data = _field(data, "layout", path, dict)
    try:
        layout = RegisterLayout(
            *(int(_field(layout_data, r, _sub(path, "layout"), int)) for r in "nmp")
        )
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "layout"))
    gates = []
    for index, entry in enumerate(_field(data, "gates", path, list)):
        where = _sub(path, f"gates[{index}]")
        kind = _field(entry, "kind", where, str)
        targets = _field(entry, "targets", where, list)
        matrix = decode_matrix(entry["matrix"], _sub(where, "matrix")) if "matrix" in entry else None
        try:
            gates.append(Gate(kind, tuple(targets), matrix))
        except HamredException as e:
            raise SchemaError(str(e), _sub(where, "targets"))
    cls = CqmaCircuit if data.get("cqma") else VerifierCircuit
    try:
        return cls(QuantumCircuit(layout.total, tuple(gates)), layout, data.get("output"))
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "output"))


def encode_operator_sum(sum_: OperatorSum, groups: Dict[str, List[int]] = None) -> Dict:
    data = dict(
        _header("operator_sum"),
        dims=list(sum_.dims),
        terms=[
            {"support": list(t.support), "weight": t.weight, "block": encode_matrix(t.block)}
            for t in sum_.terms
        ],
    )
    if groups:
        data["groups"] = {k: list(v) for k, v in groups.items()}
    return data


def decode_operator_sum(data: Dict, path: str = "") -> OperatorSum:
    dims = _field(data, "dims", path, list)
    terms = []
    for index, entry in enumerate(_field(data, "terms", path, list)):
        where = _sub(path, f"terms[{index}]")
        block = decode_matrix(_field(entry, "block", where), _sub(where, "block"))
        try:
            terms.append(
                LocalTerm(
                    tuple(_field(entry, "support", where, list)),
                    block,
                    float(entry.get("weight", 1.0)),
                )
            )
        except HamredException as e:
            raise SchemaError(str(e), where)
    try:
        return OperatorSum(tuple(dims), tuple(terms))
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "terms"))


def encode_disperser(G: DisperserGraph) -> Dict:
    return dict(
        _header("disperser"),
        left_size=G.left_size,
        right_size=G.right_size,
        degree=G.degree,
        neighbors=[list(row) for row in G.neighbors],
    )


def decode_disperser(data: Dict, path: str = "") -> DisperserGraph:
    try:
        return DisperserGraph(
            _field(data, "left_size", path, int),
            _field(data, "right_size", path, int),
            _field(data, "degree", path, int),
            tuple(tuple(row) for row in _field(data, "neighbors", path, list)),
        )
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "neighbors"))


def encode_tree(T: EncodingTree) -> Dict:
    return dict(_header("encoding_tree"), depth=T.depth, graph=encode_disperser(T.graph))


def decode_tree(data: Dict, path: str = "") -> EncodingTree:
    graph = decode_disperser(_field(data, "graph", path, dict), _sub(path, "graph"))
    try:
        return EncodingTree(_field(data, "depth", path, int), graph)
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "depth"))


def encode_qmw(Q: QmwInstance) -> Dict:
    return dict(
        _header("qmsa" if isinstance(Q, QmsaInstance) else "qmw"),
        circuit=encode_circuit(Q.W),
        g=Q.g,
        g_prime=Q.g_prime,
        provenance=Q.provenance,
    )


def decode_qmw(data: Dict, path: str = "") -> QmwInstance:
    W = decode_circuit(_field(data, "circuit", path, dict), _sub(path, "circuit"))
    cls = QmsaInstance if data.get("kind") == "qmsa" else QmwInstance
    try:
        return cls(
            W,
            _field(data, "g", path, int),
            _field(data, "g_prime", path, int),
            dict(data.get("provenance", {})),
        )
    except HamredException as e:
        raise SchemaError(str(e), path or "g")


_QSSC_SCALARS = ["alpha", "beta", "delta", "epsilon", "zeta", "b"]


def encode_qssc(Q: QsscInstance) -> Dict:
    return dict(
        _header("qssc"),
        circuit=encode_circuit(Q.kitaev.verifier),
        clock=Q.kitaev.clock.mode,
        terms=[encode_operator_sum(t) for t in Q.terms],
        g=Q.g,
        g_prime=Q.g_prime,
        scale=Q.scale,
        provenance=Q.provenance,
        **{k: float(getattr(Q, k)) for k in _QSSC_SCALARS},
    )


def decode_qssc(data: Dict, path: str = "") -> QsscInstance:
    V = decode_circuit(_field(data, "circuit", path, dict), _sub(path, "circuit"))
    try:
        kit = kitaev.compile(V, _field(data, "clock", path, str))
    except HamredException as e:
        raise SchemaError(str(e), _sub(path, "clock"))
    terms = tuple(
        decode_operator_sum(t, _sub(path, f"terms[{i}]"))
        for i, t in enumerate(_field(data, "terms", path, list))
    )
    for i, t in enumerate(terms):
        if t.dims != kit.dims:
            raise SchemaError(f"term dims {t.dims} differ from {kit.dims}", _sub(path, f"terms[{i}]"))
    scalars = {k: float(_field(data, k, path, (int, float))) for k in _QSSC_SCALARS}
    return QsscInstance(
        terms=terms,
        g=_field(data, "g", path, int),
        g_prime=_field(data, "g_prime", path, int),
        kitaev=kit,
        scale=data.get("scale"),
        provenance=dict(data.get("provenance", {})),
        **scalars,
    )


def encode_qirr(Q: QirrInstance) -> Dict:
    return dict(
        _header("qirr"),
        qssc=encode_qssc(Q.source),
        mode=Q.mode,
        r=Q.r,
        gamma=Q.gamma,
        delta=Q.delta,
        h=Q.h,
        h_prime=Q.h_prime,
        terms=[
            {
                "role": t.role,
                "index": t.index,
                "coefficient": t.coefficient,
                "chaperone": t.chaperone,
                "padding": t.padding,
                "operator": encode_operator_sum(t.operator),
            }
            for t in Q.terms
        ],
        provenance=Q.provenance,
    )


def decode_qirr(data: Dict, path: str = "") -> QirrInstance:
    source = decode_qssc(_field(data, "qssc", path, dict), _sub(path, "qssc"))
    terms = []
    for i, entry in enumerate(_field(data, "terms", path, list)):
        where = _sub(path, f"terms[{i}]")
        terms.append(
            QirrTerm(
                decode_operator_sum(_field(entry, "operator", where, dict), _sub(where, "operator")),
                float(_field(entry, "coefficient", where, (int, float))),
                _field(entry, "role", where, str),
                _field(entry, "index", where, int),
                entry.get("chaperone"),
                bool(entry.get("padding", False)),
            )
        )
    return QirrInstance(
        terms=tuple(terms),
        gamma=float(_field(data, "gamma", path, (int, float))),
        delta=float(_field(data, "delta", path, (int, float))),
        h=_field(data, "h", path, int),
        h_prime=_field(data, "h_prime", path, int),
        mode=_field(data, "mode", path, str),
        r=_field(data, "r", path, int),
        source=source,
        provenance=dict(data.get("provenance", {})),
    )


def encode_cq_lh(inst: CqLhInstance) -> Dict:
    return dict(
        _header("cq_lh"),
        hamiltonian=encode_operator_sum(inst.hamiltonian),
        a=inst.a,
        b=inst.b,
        prepared=encode_circuit(inst.prepared),
        source=encode_circuit(inst.source),
        clock=inst.clock,
        epsilon=inst.epsilon,
        g=inst.g,
        g_prime=inst.g_prime,
        scale=inst.scale,
        provenance=inst.provenance,
    )


def decode_cq_lh(data: Dict, path: str = "") -> CqLhInstance:
    return CqLhInstance(
        hamiltonian=decode_operator_sum(
            _field(data, "hamiltonian", path, dict), _sub(path, "hamiltonian")
        ),
        a=float(_field(data, "a", path, (int, float))),
        b=float(_field(data, "b", path, (int, float))),
        prepared=decode_circuit(_field(data, "prepared", path, dict), _sub(path, "prepared")),
        source=decode_circuit(_field(data, "source", path, dict), _sub(path, "source")),
        clock=_field(data, "clock", path, str),
        epsilon=float(data.get("epsilon", 0.0)),
        g=data.get("g"),
        g_prime=data.get("g_prime"),
        scale=data.get("scale"),
        provenance=dict(data.get("provenance", {})),
    )


_ENCODERS: List = [
    (QmwInstance, encode_qmw),
    (QsscInstance, encode_qssc),
    (QirrInstance, encode_qirr),
    (CqLhInstance, encode_cq_lh),
    (VerifierCircuit, encode_circuit),
    (EncodingTree, encode_tree),
    (DisperserGraph, encode_disperser),
    (OperatorSum, encode_operator_sum),
]

_DECODERS: Dict[str, Callable] = {
    "circuit": decode_circuit,
    "disperser": decode_disperser,
    "encoding_tree": decode_tree,
    "operator_sum": decode_operator_sum,
    "qmw": decode_qmw,
    "qmsa": decode_qmw,
    "qssc": decode_qssc,
    "qirr": decode_qirr,
    "cq_lh": decode_cq_lh,
    "report": lambda data, path="": data,
}


def encode(obj) -> Dict:
    """Artifact dictionary for any library object with a known kind."""
    if isinstance(obj, dict) and obj.get("kind") == "report":
        return obj
    for cls, encoder in _ENCODERS:
        if isinstance(obj, cls):
            return encoder(obj)
    raise SchemaError(f"no artifact kind for {type(obj).__name__}")


def decode(data: Dict, expected: List[str] = None):
    """
    :param dict data: artifact dictionary
    :param list[str] expected: allowed kinds, or None for any
    :return: the decoded library object
    :raise SchemaError: on a version or kind mismatch or malformed content
    """
    if not isinstance(data, dict):
        raise SchemaError("artifact must be a JSON object")
    version = data.get("version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported version {version!r}, expected {FORMAT_VERSION}", "version")
    kind = data.get("kind")
    if kind not in _DECODERS:
        raise SchemaError(f"unknown kind {kind!r}", "kind")
    if expected and kind not in expected:
        raise SchemaError(f"expected one of {expected}, got {kind!r}", "kind")
    return _DECODERS[kind](data)


def dump(obj, path: str):
    write(encode(obj), path)


def write(data: Dict, path: str):
    """Write an already-encoded artifact."""
    path = expandpath(path)
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=1)
    _LOGGER.info(f"Wrote {data['kind']} artifact: {path}")


def load(path: str, expected: List[str] = None):
    path = expandpath(path)
    if not os.path.isfile(path):
        raise SchemaError("no such artifact file", path)
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}", path)
    return decode(data, expected)
