"""
Executable reductions between verifier, set-cover and irreducibility instances,
with brute-force and exact-spectrum instance verifiers.

Term and subset indices are 0-based positions in an instance's term list. For
a set-cover instance built from an n-bit verifier, terms 0..n-1 are the cover
terms G_i, term n is the penalty term and term n+1 is the output term.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from hamred import kitaev
from hamred.circuits import (
    CqmaCircuit,
    Gate,
    QuantumCircuit,
    RegisterLayout,
    VerifierCircuit,
    _CircuitBuilder,
    acceptance_operator,
    as_cqma,
    classify_inputs,
    decompose,
    min_weight_accepted,
    or_gates,
    pattern_gates,
)
from hamred.const import (
    ACCEPTS,
    CLOCK_LEGAL,
    DEFAULT_SLACK,
    DELTA_MAX_EXPONENT,
    ENUMERATION_CAP,
    MODE_BASIC,
    NO,
    NULL_TOL,
    QIRR_MODES,
    REJECT_THRESHOLD,
    REJECTS,
    T_GRID_MAX,
    T_GRID_POINTS,
    T_GRID_VECTORS,
    UNDETERMINED,
    YES,
)
from hamred.disperser import EncodingTree, decode, subset_from_bits
from hamred.ops import (
    HermitianOperator,
    LemmaReport,
    LocalTerm,
    OperatorSum,
    assemble,
    assemble_many,
    check_projection_lemma,
    eig,
    eigenvalues,
    expectation,
    min_eigenvalue,
    min_nonzero_eigenvalue,
    restrict,
    spectral_norm,
)
from hamred.utils import (
    DeltaTooSmallError,
    EnumerationCapError,
    ProjectorError,
    RegisterLayoutError,
    all_bitstrings,
    bits_to_int,
    hamming_weight,
    int_to_bits,
    next_power_of_two,
    validate_bits,
)

_LOGGER = logging.getLogger(__name__)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class QmwInstance:
    """Monotone cQMA circuit with weight thresholds g <= g'."""

    W: CqmaCircuit
    g: int
    g_prime: int
    provenance: Dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "W", as_cqma(self.W))
        n = self.W.n
        if self.g < 0 or self.g_prime > n or self.g_prime < 0:
            raise RegisterLayoutError(
                f"thresholds g={self.g}, g'={self.g_prime} must lie in [0, {n}]"
            )
        if self.g > self.g_prime:
            _LOGGER.warning(
                f"g={self.g} exceeds g'={self.g_prime}; the instance has no gap at this size"
            )

    @classmethod
    def from_verifier(cls, W: VerifierCircuit, g: int, g_prime: int):
        """Wrap a hand-made monotone circuit."""
        return cls(W, g, g_prime, {"reduction": "verifier", "g": g, "g_prime": g_prime})


class QmsaInstance(QmwInstance):
    """QMW instance whose circuit has no CHOICE register."""

    def __post_init__(self):
        super().__post_init__()
        if self.W.m:
            raise RegisterLayoutError("QMSA circuits have no quantum proof register")


def qmw_min_weight(Q: QmwInstance) -> Optional[int]:
    """Smallest accepted Hamming weight f, by brute force."""
    return min_weight_accepted(Q.W)


def _decode_table(T: EncodingTree, progress: bool = False):
    R = T.right_size
    rows = []
    values = range(2**R)
    if progress:
        from rich.progress import track

        values = track(values, description="Tabulating decode")
    for value in values:
        y = int_to_bits(value, R)
        chosen = subset_from_bits(y)
        if len(chosen) > R / 2:
            rows.append((y, True, []))
            continue
        leaves = sorted(decode(T, chosen))
        if leaves:
            rows.append((y, False, leaves))
    return rows


def to_qmw(V: VerifierCircuit, T: EncodingTree, progress: bool = False) -> QmwInstance:
    """
    Build the cQMA circuit W over INPUT = right vertices of the tree's disperser.

    W outputs 1 when more than half of the INPUT bits are set. Otherwise it
    decodes the set into candidate leaves, runs one copy of V per slot on a
    candidate with its own proof block, and outputs the coherent OR of the
    slots when at least one candidate exists. Slots beyond the number of
    candidates re-use candidates cyclically.

    :param VerifierCircuit V: verifier whose classical proof width equals the tree depth
    :param EncodingTree T: encoding tree
    :return QmwInstance: W with g = (depth+1) D and g' = floor(|R| / 2)
    """
    if T.depth != V.n:
        raise RegisterLayoutError(
            f"tree depth {T.depth} does not match classical proof width {V.n}"
        )
    R = T.right_size
    table = _decode_table(T, progress)
    K = max([1] + [len(leaves) for _, threshold, leaves in table if not threshold])

    builder = _CircuitBuilder()
    inputs = builder.alloc("A", R)
    slots = []
    for _ in range(K):
        candidate = builder.alloc("C", V.n)
        slots.append(candidate + builder.alloc("B", V.m) + builder.alloc("C", V.p))
    flag_threshold, flag_nonempty = builder.alloc("C", 2)
    work = builder.alloc("C", max(R - 1, 0))

    for y, threshold, leaves in table:
        if threshold:
            targets = [flag_threshold]
        else:
            targets = [flag_nonempty] + [
                slots[s][i]
                for s in range(K)
                for i, bit in enumerate(leaves[s % len(leaves)])
                if bit == "1"
            ]
        builder.add(pattern_gates(inputs, y, targets, work))

    for mapping in slots:
        builder.embed(V, mapping)
    gates, any_slot = or_gates(
        [mapping[V.output_qubit] for mapping in slots], builder.alloc("C", K - 1)
    )
    builder.add(gates)
    gated = builder.alloc("C")[0]
    builder.append("CCX", flag_nonempty, any_slot, gated)
    gates, final = or_gates([flag_threshold, gated], builder.alloc("C"))
    builder.add(gates)
    if V.m:
        first_b = slots[0][V.n]
        builder.append("SWAP", final, first_b)
        final = first_b
    W = builder.finish(final)

    g = (T.depth + 1) * T.graph.degree
    g_prime = R // 2
    _LOGGER.info(
        f"Built QMW circuit: {R} INPUT bits, {K} slot(s), {W.circuit.n_qubits} qubits, "
        f"{len(W)} gates; g={g}, g'={g_prime}"
    )
    provenance = {
        "reduction": "to_qmw",
        "depth": T.depth,
        "right_size": R,
        "degree": T.graph.degree,
        "slots": K,
    }
    return QmwInstance(W, g, g_prime, provenance)


def to_qmsa(V: VerifierCircuit, T: EncodingTree, progress: bool = False) -> QmsaInstance:
    """to_qmw for a verifier without a quantum proof."""
    if V.m:
        raise RegisterLayoutError(
            f"QMSA input must have no quantum proof register, got {V.m} qubit(s)"
        )
    Q = to_qmw(V, T, progress)
    provenance = dict(Q.provenance, reduction="to_qmsa")
    return QmsaInstance(Q.W, Q.g, Q.g_prime, provenance)


@dataclass(frozen=True, eq=False)
class QsscInstance:
    """
    Terms G_1..G_{n+2} with cover thresholds alpha > beta and size thresholds g <= g'.

    `scale` is the factor that would bring alpha - beta up to 1.
    """

    terms: Tuple[OperatorSum, ...]
    alpha: float
    beta: float
    g: int
    g_prime: int
    kitaev: kitaev.KitaevHamiltonian
    delta: float
    epsilon: float
    zeta: float
    b: float
    scale: Optional[int] = None
    provenance: Dict = field(default_factory=dict)

    @property
    def input_width(self) -> int:
        return len(self.terms) - 2

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.kitaev.dims

    @property
    def cover_weight(self) -> float:
        return float(self.kitaev.L + 1)


def _rejection_energy(W: VerifierCircuit, L: int, slack: float) -> Tuple[float, str]:
    statuses = classify_inputs(W, slack)
    energies = [
        (1.0 - min_eigenvalue(acceptance_operator(W, x))) / (L + 1)
        for x, status in statuses.items()
        if status == REJECTS
    ]
    if not energies:
        return (1.0 - REJECT_THRESHOLD) / (L + 1), "generic"
    return min(energies), "rejected-inputs"


def cover_terms(kit: kitaev.KitaevHamiltonian) -> List[OperatorSum]:
    """G_i = (L+1) |0><0|_{A_i} (x) |0><0|_D for every classical input bit."""
    first = kit.verifier.circuit.n_qubits
    return [
        OperatorSum(
            kit.dims,
            (kitaev.clock_projector_term(kit.clock, first, 0, i, _P0, kit.L + 1),),
        )
        for i in kit.verifier.layout.A
    ]


def _auto_delta_start(n: int, L: int, epsilon: float) -> int:
    order = n**2 * L**5 / epsilon if epsilon > 0 else n**2 * L**5
    return next_power_of_two(max(1, math.ceil(order)))


def qmw_to_qssc(
    Q: QmwInstance,
    delta: Optional[float] = None,
    epsilon: float = 0.0,
    clock: str = CLOCK_LEGAL,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> QsscInstance:
    """
    Reduce QMW to quantum set cover.

    The cover terms are G_i for each INPUT bit, G_{n+1} = (Delta+1)(H_in + H_prop
    + H_stab) and G_{n+2} = I - (H_in + H_prop + H_stab + H_out). With Delta
    unset, the smallest power of two from the n^2 L^5 / epsilon order upward is
    chosen for which the projection bounds certify and the full set is a cover.

    :param QmwInstance Q: QMW instance
    :param float delta: penalty weight, or None for automatic selection
    :param float epsilon: verifier error
    :param str clock: clock mode
    :param float slack: comparison slack
    :return QsscInstance: set-cover instance
    :raise DeltaTooSmallError: if no admissible Delta certifies the cover property
    """
    W = decompose(Q.W)
    kit = kitaev.compile(W, clock, dim_cap)
    n, m, L = W.n, W.m, kit.L
    zeta = 2 * (1 + 2 ** (2 * (n + m))) / (L + 1)
    alpha = 1 - (zeta + 1) * epsilon
    b, b_source = _rejection_energy(W, L, slack)
    beta = 1 - b

    covers = cover_terms(kit)
    penalty = kit.penalty()
    identity = OperatorSum.identity(kit.dims)
    P = assemble(penalty, dim_cap)
    Y1 = assemble_many(covers + [kit.h_out.scaled(-1.0)], dim_cap)
    base = assemble(identity, dim_cap) + Y1

    def certify(weight: float) -> Tuple[LemmaReport, float]:
        report = check_projection_lemma(
            Y1, weight * P, null_tol=NULL_TOL * max(1.0, weight), slack=slack, dim_cap=dim_cap
        )
        return report, min_eigenvalue(base + weight * P, dim_cap)

    if delta is None:
        weight = float(_auto_delta_start(n, L, epsilon))
        for _ in range(DELTA_MAX_EXPONENT):
            report, lowest = certify(weight)
            _LOGGER.debug(
                f"Delta={weight:g}: projection applicable={report.applicable}, "
                f"lambda_min(G_S)={lowest:.12g}"
            )
            if report.applicable and report.holds and lowest >= alpha - slack:
                break
            weight *= 2
        else:
            raise DeltaTooSmallError(
                f"no Delta up to {weight:g} certifies the cover property",
                margin=lowest - alpha,
            )
    else:
        weight = float(delta)
        report, lowest = certify(weight)
        if not (report.applicable and report.holds and lowest >= alpha - slack):
            raise DeltaTooSmallError(
                f"Delta={weight:g} does not certify: projection applicable="
                f"{report.applicable}, lambda_min(G_S) - alpha = {lowest - alpha:.3g}",
                margin=lowest - alpha,
            )

    terms = covers + [
        penalty.scaled(weight + 1),
        identity + (penalty + kit.h_out).scaled(-1.0),
    ]
    gap = alpha - beta
    scale = math.ceil(1.0 / gap) if 0 < gap < 1 else (1 if gap >= 1 else None)
    if scale is None:
        _LOGGER.warning(f"alpha={alpha:.6g} does not exceed beta={beta:.6g}")
    _LOGGER.info(
        f"Built QSSC instance: {len(terms)} terms, Delta={weight:g}, alpha={alpha:.6g}, "
        f"beta={beta:.6g}, g={Q.g + 2}, g'={Q.g_prime + 2}"
    )
    provenance = {
        "reduction": "qmw_to_qssc",
        "delta_mode": "auto" if delta is None else "fixed",
        "b_source": b_source,
        "clock": kit.clock.mode,
        "qmw": dict(Q.provenance),
    }
    return QsscInstance(
        terms=tuple(terms),
        alpha=alpha,
        beta=beta,
        g=Q.g + 2,
        g_prime=Q.g_prime + 2,
        kitaev=kit,
        delta=weight,
        epsilon=epsilon,
        zeta=zeta,
        b=b,
        scale=scale,
        provenance=provenance,
    )


def qssc_subset_operator(
    instance: QsscInstance, subset: Sequence[int], dim_cap: Optional[int] = None
) -> HermitianOperator:
    """G_{S'} for term positions S'; the empty subset gives the zero operator."""
    chosen = sorted(set(subset))
    for i in chosen:
        if i < 0 or i >= len(instance.terms):
            raise RegisterLayoutError(f"term index {i} out of range")
    if not chosen:
        return assemble(OperatorSum.zero(instance.dims), dim_cap)
    return assemble_many([instance.terms[i] for i in chosen], dim_cap)


def projection_check(
    instance: QsscInstance, slack: float = DEFAULT_SLACK, dim_cap: Optional[int] = None
) -> LemmaReport:
    """Projection bounds for Y1 = sum G_i - H_out and Y2 = Delta (H_in + H_prop + H_stab)."""
    kit = instance.kitaev
    Y1 = assemble_many(cover_terms(kit) + [kit.h_out.scaled(-1.0)], dim_cap)
    Y2 = instance.delta * assemble(kit.penalty(), dim_cap)
    return check_projection_lemma(
        Y1, Y2, null_tol=NULL_TOL * max(1.0, instance.delta), slack=slack, dim_cap=dim_cap
    )


@dataclass
class QsscVerdict:
    is_cover: bool
    eigenvalue: float
    margin: float
    subset: Tuple[int, ...]


def verify_qssc(
    instance: QsscInstance,
    subset: Sequence[int],
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> QsscVerdict:
    """
    :return QsscVerdict: cover iff lambda_min(G_{S'}) >= alpha - slack; the margin
        is lambda_min - alpha
    """
    lowest = min_eigenvalue(qssc_subset_operator(instance, subset, dim_cap), dim_cap)
    return QsscVerdict(
        is_cover=lowest >= instance.alpha - slack,
        eigenvalue=lowest,
        margin=lowest - instance.alpha,
        subset=tuple(sorted(set(subset))),
    )


def _subsets_up_to(count: int, max_size: int):
    total = sum(math.comb(count, j) for j in range(max_size + 1))
    if total > ENUMERATION_CAP:
        raise EnumerationCapError(f"{total} subsets exceed the cap of {ENUMERATION_CAP}")
    return total, (
        s for j in range(max_size + 1) for s in itertools.combinations(range(count), j)
    )


def brute_force_no(
    instance: QsscInstance,
    max_size: Optional[int] = None,
    slack: float = DEFAULT_SLACK,
    progress: bool = False,
    dim_cap: Optional[int] = None,
) -> bool:
    """True iff every subset of size <= g' (or max_size) has lambda_min <= beta + slack."""
    limit = instance.g_prime if max_size is None else max_size
    total, subsets = _subsets_up_to(len(instance.terms), min(limit, len(instance.terms)))
    if progress:
        from rich.progress import track

        subsets = track(subsets, total=total, description="Enumerating subsets")
    for subset in subsets:
        lowest = min_eigenvalue(qssc_subset_operator(instance, subset, dim_cap), dim_cap)
        if lowest > instance.beta + slack:
            _LOGGER.info(f"Subset {subset} has lambda_min={lowest:.6g} above beta")
            return False
    return True


def find_cover(
    instance: QsscInstance,
    max_size: Optional[int] = None,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> Optional[Tuple[int, ...]]:
    """Smallest cover (first in size-then-lexicographic order), or None."""
    limit = len(instance.terms) if max_size is None else max_size
    _, subsets = _subsets_up_to(len(instance.terms), min(limit, len(instance.terms)))
    for subset in subsets:
        if verify_qssc(instance, subset, slack, dim_cap).is_cover:
            return subset
    return None


def cover_table(
    instance: QsscInstance,
    max_size: Optional[int] = None,
    slack: float = DEFAULT_SLACK,
    progress: bool = False,
    dim_cap: Optional[int] = None,
) -> pd.DataFrame:
    """lambda_min of every subset up to max_size, with cover and below-beta flags."""
    limit = len(instance.terms) if max_size is None else max_size
    total, subsets = _subsets_up_to(len(instance.terms), min(limit, len(instance.terms)))
    if progress:
        from rich.progress import track

        subsets = track(subsets, total=total, description="Tabulating subsets")
    rows = []
    for subset in subsets:
        lowest = min_eigenvalue(qssc_subset_operator(instance, subset, dim_cap), dim_cap)
        rows.append(
            {
                "subset": ",".join(str(i) for i in subset),
                "size": len(subset),
                "min_eigenvalue": lowest,
                "is_cover": lowest >= instance.alpha - slack,
                "below_beta": lowest <= instance.beta + slack,
            }
        )
    return pd.DataFrame(rows)


def _hist_subspace(instance: QsscInstance):
    kit = instance.kitaev
    return kitaev.hist_projector(kit.verifier, kit.clock.mode)


def pi_hist_bound(
    instance: QsscInstance, T: Sequence[int], dim_cap: Optional[int] = None
) -> float:
    """lambda_max of Pi_hist (H_out - sum_{i in T} G_i) Pi_hist, on the history space."""
    covers = cover_terms(instance.kitaev)
    operator = assemble_many(
        [instance.kitaev.h_out] + [covers[i].scaled(-1.0) for i in T], dim_cap
    )
    return float(eigenvalues(restrict(operator, _hist_subspace(instance)))[-1])


def check_history_eigenvectors(
    instance: QsscInstance, T: Sequence[int], dim_cap: Optional[int] = None
) -> float:
    """
    Largest deviation of Pi_hist (-sum_{i in T} G_i) Pi_hist from the diagonal
    with entries |x . z| - |T|, in the basis of history states.
    """
    kit = instance.kitaev
    covers = cover_terms(kit)
    if T:
        operator = assemble_many([covers[i].scaled(-1.0) for i in T], dim_cap)
    else:
        operator = assemble(OperatorSum.zero(kit.dims), dim_cap)
    compressed = restrict(operator, _hist_subspace(instance)).matrix
    n, m = kit.verifier.n, kit.verifier.m
    expected = np.array(
        [
            sum(1 for i in T if int_to_bits(index >> m, n)[i] == "1") - len(T)
            for index in range(2 ** (n + m))
        ],
        dtype=float,
    )
    return float(np.max(np.abs(compressed - np.diag(expected))))


@dataclass(frozen=True, eq=False)
class QirrTerm:
    """c * (projector), with its role in the construction."""

    operator: OperatorSum
    coefficient: float
    role: str
    index: int
    chaperone: Optional[int] = None
    padding: bool = False


@dataclass(frozen=True, eq=False)
class QirrInstance:
    terms: Tuple[QirrTerm, ...]
    gamma: float
    delta: float
    h: int
    h_prime: int
    mode: str
    r: int
    source: QsscInstance
    provenance: Dict = field(default_factory=dict)

    @property
    def chaperone_qubits(self) -> int:
        return int(round(math.log2(self.r)))

    @property
    def dims(self) -> Tuple[int, ...]:
        return (2,) + tuple(self.source.dims) + (2,) * self.chaperone_qubits

    @property
    def chaperone_sites(self) -> Tuple[int, ...]:
        start = 1 + len(self.source.dims)
        return tuple(range(start, start + self.chaperone_qubits))


def _basis_projector(dim: int, index: int) -> np.ndarray:
    block = np.zeros((dim, dim), dtype=complex)
    block[index, index] = 1.0
    return block


def _lift(
    sum_: OperatorSum,
    dims: Tuple[int, ...],
    tag: int,
    chaperone_sites: Tuple[int, ...] = (),
    chaperone: Optional[int] = None,
) -> OperatorSum:
    """|tag><tag| (x) sum_ [(x) |chaperone><chaperone|] on the tagged space."""
    tag_block = _basis_projector(2, tag)
    terms = []
    for term in sum_.terms:
        support = (0,) + tuple(s + 1 for s in term.support)
        block = np.kron(tag_block, term.block)
        if chaperone is not None:
            support += chaperone_sites
            block = np.kron(block, _basis_projector(2 ** len(chaperone_sites), chaperone))
        terms.append(LocalTerm(support, block, term.weight))
    return OperatorSum(dims, tuple(terms))


def _tagged_chaperone(
    dims: Tuple[int, ...], chaperone_sites: Tuple[int, ...], tag: int, value: int
) -> OperatorSum:
    block = np.kron(_basis_projector(2, tag), _basis_projector(2 ** len(chaperone_sites), value))
    return OperatorSum(dims, (LocalTerm((0,) + chaperone_sites, block),))


def padded_terms(instance: QsscInstance) -> Tuple[List[OperatorSum], List[bool]]:
    """
    Kitaev projectors H_1..H_r with r padded to a power of two (at least 2) by
    zero projectors inserted before H_r = H_out.
    """
    H = instance.kitaev.terms()
    r = max(2, next_power_of_two(len(H)))
    extra = r - len(H)
    zero = OperatorSum.zero(instance.dims)
    return (
        H[:-1] + [zero] * extra + [H[-1]],
        [False] * (len(H) - 1) + [True] * extra + [False],
    )


def qssc_to_qirr(
    Q: QsscInstance, mode: str = MODE_BASIC, validate: bool = True, dim_cap: Optional[int] = None
) -> QirrInstance:
    """
    Reduce set cover to irreducibility with a tag qubit and log r chaperone qubits.

    Basic mode emits F_i = |0><0| (x) G_i (x) I for each cover term; improved
    mode splits each into r chaperone-indexed copies. Both emit r - 1 head terms
    (Delta+1)[|0><0| (x) H_j (x) I + |1><1| (x) I (x) |j-1><j-1|] and r tail terms
    |0><0| (x) (I - H_j) (x) I + |1><1| (x) I (x) |r-1><r-1|.

    :param QsscInstance Q: set-cover instance
    :param str mode: "basic" or "improved"
    :param bool validate: check every term is a scaled projector
    :return QirrInstance: irreducibility instance
    :raise ProjectorError: if validation finds a term that is not c * projector
    """
    if mode not in QIRR_MODES:
        raise RegisterLayoutError(f"unknown mode {mode!r}")
    H, padding = padded_terms(Q)
    r = len(H)
    instance_dims = (2,) + tuple(Q.dims) + (2,) * int(round(math.log2(r)))
    chaperone_sites = tuple(range(1 + len(Q.dims), len(instance_dims)))
    identity = OperatorSum.identity(Q.dims)
    head_weight = Q.delta + 1

    terms: List[QirrTerm] = []
    for i in range(Q.input_width):
        if mode == MODE_BASIC:
            op = _lift(Q.terms[i], instance_dims, 0)
            terms.append(QirrTerm(op, Q.cover_weight, "cover", i))
        else:
            for j in range(r):
                op = _lift(Q.terms[i], instance_dims, 0, chaperone_sites, j)
                terms.append(QirrTerm(op, Q.cover_weight, "cover", i, chaperone=j))
    for j in range(1, r):
        op = _lift(H[j - 1], instance_dims, 0) + _tagged_chaperone(
            instance_dims, chaperone_sites, 1, j - 1
        )
        terms.append(QirrTerm(op.scaled(head_weight), head_weight, "head", j, padding=padding[j - 1]))
    for j in range(1, r + 1):
        op = _lift(identity + H[j - 1].scaled(-1.0), instance_dims, 0) + _tagged_chaperone(
            instance_dims, chaperone_sites, 1, r - 1
        )
        terms.append(QirrTerm(op, 1.0, "tail", j, padding=padding[j - 1]))

    if mode == MODE_BASIC:
        h, h_prime = Q.g + 2 * r - 3, Q.g_prime + 2 * r - 3
    else:
        h, h_prime = Q.g * r - 1, Q.g_prime * r - 1
    instance = QirrInstance(
        terms=tuple(terms),
        gamma=Q.alpha + r - 1,
        delta=Q.beta + r - 1,
        h=h,
        h_prime=h_prime,
        mode=mode,
        r=r,
        source=Q,
        provenance={"reduction": "qssc_to_qirr", "mode": mode, "padding": padding.count(True)},
    )
    _LOGGER.info(
        f"Built QIRR instance ({mode}): {len(terms)} terms, r={r}, dimension "
        f"{int(np.prod(instance_dims))}, h={h}, h'={h_prime}"
    )
    if validate:
        check_projectors(instance, dim_cap=dim_cap)
    return instance


def check_projectors(instance: QirrInstance, tol: float = 1e-9, dim_cap: Optional[int] = None):
    """
    :raise ProjectorError: if some term has an eigenvalue outside {0, c}
    """
    for position, term in enumerate(instance.terms):
        values = eigenvalues(assemble(term.operator, dim_cap))
        scale = max(1.0, abs(term.coefficient))
        distance = np.minimum(np.abs(values), np.abs(values - term.coefficient))
        if np.max(distance) > tol * scale:
            raise ProjectorError(
                f"term {position} ({term.role} {term.index}) is not "
                f"{term.coefficient:g} times a projector"
            )


def qirr_subset_operator(
    instance: QirrInstance, subset: Sequence[int], dim_cap: Optional[int] = None
) -> HermitianOperator:
    chosen = sorted(set(subset))
    if not chosen:
        return assemble(OperatorSum.zero(instance.dims), dim_cap)
    return assemble_many([instance.terms[i].operator for i in chosen], dim_cap)


def succinct_subset(instance: QirrInstance, cover: Sequence[int]) -> List[int]:
    """Terms of the cover indices (every chaperone copy) plus all head and tail terms."""
    chosen = set(cover)
    return [
        position
        for position, term in enumerate(instance.terms)
        if term.role != "cover" or term.index in chosen
    ]


def k_decomposition(
    instance: QirrInstance, cover: Sequence[int], dim_cap: Optional[int] = None
) -> Tuple[HermitianOperator, HermitianOperator]:
    """
    K1 = |0><0| (x) (G_{S'} + (r-1) I) (x) I and
    K2 = |1><1| (x) I (x) (r I + (Delta+1-r) sum_{i<=r-2} |i><i|),
    where S' is the cover plus the penalty and output terms.
    """
    Q, r = instance.source, instance.r
    n = Q.input_width
    picked = [Q.terms[i] for i in sorted(set(cover))] + [Q.terms[n], Q.terms[n + 1]]
    inner = OperatorSum.identity(Q.dims, r - 1)
    for s in picked:
        inner = inner + s
    K1 = assemble(_lift(inner, instance.dims, 0), dim_cap)
    diag = np.full(instance.r, float(r))
    diag[: r - 1] = Q.delta + 1
    block = np.kron(_basis_projector(2, 1), np.diag(diag).astype(complex))
    K2 = assemble(
        OperatorSum(instance.dims, (LocalTerm((0,) + instance.chaperone_sites, block),)),
        dim_cap,
    )
    return K1, K2


@dataclass
class QirrReport:
    status: str
    route: str
    eigenvalue: float
    energy_full: Optional[float] = None
    energy_subset: Optional[float] = None
    witness: Optional[np.ndarray] = None


def _basis_vector(dims: Tuple[int, ...], digits: Sequence[int]) -> np.ndarray:
    vector = np.zeros(int(np.prod(dims)), dtype=complex)
    vector[int(np.ravel_multi_index(tuple(digits), dims))] = 1.0
    return vector


def _chaperone_digits(instance: QirrInstance, tag: int, value: int) -> List[int]:
    bits = int_to_bits(value, instance.chaperone_qubits)
    return [tag] + [0] * len(instance.source.dims) + [int(b) for b in bits]


def verify_qirr(
    instance: QirrInstance,
    subset: Sequence[int],
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> QirrReport:
    """
    Decide a candidate subset T' by the routes the construction supports, in order:
    lambda_min(F_{T'}) >= gamma; the missing-head witness |1>|0..0>|j-1>; the
    missing-tail witness |1>|0..0>|r-1>; the ground state of F_{T'} inside each
    tag-0 chaperone block; eigenvectors of F_T - t F_{T'} on a fixed t grid. Any
    NO witness must reach >= gamma on F_T and <= delta on F_{T'}.

    :return QirrReport: status yes/no/undetermined with the route that fired
    """
    chosen = sorted(set(subset))
    F_sub = qirr_subset_operator(instance, chosen, dim_cap)
    F_all = qirr_subset_operator(instance, range(len(instance.terms)), dim_cap)
    lowest = min_eigenvalue(F_sub, dim_cap)
    if lowest >= instance.gamma - slack:
        return QirrReport(YES, "sufficient", lowest)

    def witnesses(route: str, vector: np.ndarray) -> Optional[QirrReport]:
        full, part = expectation(F_all, vector), expectation(F_sub, vector)
        if full >= instance.gamma - slack and part <= instance.delta + slack:
            return QirrReport(NO, route, lowest, full, part, vector)
        return None

    present = set(chosen)
    for position, term in enumerate(instance.terms):
        if position in present or term.role == "cover":
            continue
        value = term.index - 1 if term.role == "head" else instance.r - 1
        found = witnesses(
            f"missing-{term.role}",
            _basis_vector(instance.dims, _chaperone_digits(instance, 1, value)),
        )
        if found:
            return found

    inner = int(np.prod(instance.source.dims))
    c_dim = instance.r
    for value in range(instance.r):
        rows = np.arange(inner) * c_dim + value
        block = F_sub.matrix[np.ix_(rows, rows)]
        _, vectors = eig(block, dim_cap)
        vector = np.zeros(F_sub.dim, dtype=complex)
        vector[rows] = vectors[:, 0]
        found = witnesses("chaperone-block", vector)
        if found:
            return found

    for t in np.linspace(0.0, T_GRID_MAX, T_GRID_POINTS):
        _, vectors = eig(F_all.matrix - t * F_sub.matrix, dim_cap)
        for column in range(1, min(T_GRID_VECTORS, vectors.shape[1]) + 1):
            found = witnesses("t-grid", vectors[:, -column])
            if found:
                return found

    _LOGGER.warning(f"No route decides subset {chosen}")
    return QirrReport(UNDETERMINED, "none", lowest)


@dataclass(frozen=True, eq=False)
class CqLhInstance:
    """
    Local Hamiltonian over A (classical), B, C and the clock with thresholds a < b.
    g and g' are set for the Hamming-weight variant.
    """

    hamiltonian: OperatorSum
    a: float
    b: float
    prepared: VerifierCircuit
    source: VerifierCircuit
    clock: str = CLOCK_LEGAL
    epsilon: float = 0.0
    g: Optional[int] = None
    g_prime: Optional[int] = None
    scale: Optional[int] = None
    provenance: Dict = field(default_factory=dict)

    @property
    def copy_width(self) -> int:
        return self.source.n


def _prepare_copy_phase(V: VerifierCircuit) -> VerifierCircuit:
    """Copy A into fresh C ancillas, run V on the copies, then flip the output."""
    builder = _CircuitBuilder()
    a = builder.alloc("A", V.n)
    b = builder.alloc("B", V.m)
    copies = builder.alloc("C", V.n)
    c = builder.alloc("C", V.p)
    builder.add(Gate("CNOT", (src, dst)) for src, dst in zip(a, copies))
    mapping = copies + b + c
    builder.embed(V, mapping)
    output = mapping[V.output_qubit]
    builder.append("X", output)
    return decompose(builder.finish(output, VerifierCircuit))


def effective_circuit(V: VerifierCircuit, c: str, copy_width: Optional[int] = None) -> VerifierCircuit:
    """
    V_c on B and C: each leading copy gate CNOT(A_k -> t_k) becomes X on t_k when
    c_k = 1 and the identity otherwise, so the gate count is unchanged.

    :param VerifierCircuit V: circuit prepared by cq_to_lh
    :param str c: classical proof
    :raise RegisterLayoutError: if V does not start with the copy phase
    """
    n = V.n if copy_width is None else copy_width
    validate_bits(c, n, "classical proof")
    gates = V.gates
    shifted = [q - n for q in range(V.circuit.n_qubits)]
    rewritten = []
    for k in range(n):
        gate = gates[k] if k < len(gates) else None
        if gate is None or gate.kind != "CNOT" or gate.targets[0] != k:
            raise RegisterLayoutError(f"gate {k} is not the copy of classical bit {k}")
        target = shifted[gate.targets[1]]
        rewritten.append(Gate("X" if c[k] == "1" else "I", (target,)))
    for index, gate in enumerate(gates[n:], start=n):
        if min(gate.targets) < n:
            raise RegisterLayoutError(f"gate {index} acts on the classical register")
        rewritten.append(gate.relabeled(shifted))
    layout = RegisterLayout(0, V.m, V.p)
    return VerifierCircuit(
        QuantumCircuit(layout.total, tuple(rewritten)), layout, V.output_qubit - n
    )


def effective_hamiltonian(
    V: VerifierCircuit,
    c: str,
    clock: str = CLOCK_LEGAL,
    dim_cap: Optional[int] = None,
) -> HermitianOperator:
    """
    H(c) on B, C and the clock, satisfying <c, psi|H|c, psi> = <psi|H(c)|psi>.

    :param VerifierCircuit V: circuit prepared by cq_to_lh
    :param str c: classical proof
    """
    kit = kitaev.compile(effective_circuit(V, c), clock, dim_cap)
    return assemble(kit.total(), dim_cap)


def cq_to_lh(
    V: VerifierCircuit,
    epsilon: float = 0.0,
    clock: str = CLOCK_LEGAL,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> CqLhInstance:
    """
    Compile a cq-Sigma2 verifier to a local Hamiltonian with thresholds a < b.

    a = epsilon / (L+1). b is the smallest lambda_min(H(c)) over classical proofs
    the verifier accepts for every quantum proof; with no such proof the floor
    1e-3 (1 - sqrt(epsilon)) / L^3 is used.
    """
    prepared = _prepare_copy_phase(V)
    kit = kitaev.compile(prepared, clock, dim_cap)
    a = epsilon / (kit.L + 1)
    accepted = [x for x, s in classify_inputs(V, slack).items() if s == ACCEPTS]
    if accepted:
        b = min(
            min_eigenvalue(effective_hamiltonian(prepared, x, clock, dim_cap))
            for x in accepted
        )
        b_source = "accepted-proofs"
    else:
        b = kitaev.history_energy_floor(kit.L, epsilon)
        b_source = "floor"
    scale = math.ceil(1.0 / (b - a)) if b > a else None
    _LOGGER.info(
        f"Built local Hamiltonian: L={kit.L}, dimension {kit.dim}, a={a:.6g}, b={b:.6g} ({b_source})"
    )
    return CqLhInstance(
        hamiltonian=kit.total(),
        a=a,
        b=b,
        prepared=prepared,
        source=V,
        clock=clock,
        epsilon=epsilon,
        scale=scale,
        provenance={"reduction": "cq_to_lh", "b_source": b_source, "L": kit.L},
    )


def qmw_to_lh_hw(
    Q: QmwInstance,
    epsilon: float = 0.0,
    clock: str = CLOCK_LEGAL,
    dim_cap: Optional[int] = None,
) -> CqLhInstance:
    """cq_to_lh on the QMW circuit, carrying g and g' through unchanged."""
    inner = cq_to_lh(Q.W, epsilon, clock, dim_cap=dim_cap)
    provenance = dict(inner.provenance, reduction="qmw_to_lh_hw", qmw=dict(Q.provenance))
    return CqLhInstance(
        hamiltonian=inner.hamiltonian,
        a=inner.a,
        b=inner.b,
        prepared=inner.prepared,
        source=inner.source,
        clock=inner.clock,
        epsilon=inner.epsilon,
        g=Q.g,
        g_prime=Q.g_prime,
        scale=inner.scale,
        provenance=provenance,
    )


def lh_no_witness(
    instance: CqLhInstance, c: str, dim_cap: Optional[int] = None
) -> Tuple[np.ndarray, float]:
    """
    History state of V_c on the quantum proof the verifier most rejects at c.

    :return (np.ndarray, float): witness vector and its energy under H(c)
    """
    values, vectors = eig(acceptance_operator(instance.source, c, dim_cap), dim_cap)
    V_c = effective_circuit(instance.prepared, c)
    witness = kitaev.history_state(V_c, vectors[:, 0], instance.clock).vector
    H_c = effective_hamiltonian(instance.prepared, c, instance.clock, dim_cap)
    return witness, expectation(H_c, witness)


@dataclass
class LhReport:
    status: str
    yes_proof: Optional[str] = None
    energies: Dict[str, float] = field(default_factory=dict)
    witness_energies: Dict[str, float] = field(default_factory=dict)


def verify_lh(
    instance: CqLhInstance,
    max_weight: Optional[int] = None,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> LhReport:
    """
    YES if some classical proof (of weight <= max_weight, or <= g for the
    weight variant) has lambda_min(H(c)) >= b; NO if every proof admits a
    history-state witness with energy <= a.
    """
    limit = instance.g if max_weight is None else max_weight
    report = LhReport(UNDETERMINED)
    proofs = list(all_bitstrings(instance.copy_width))
    for c in proofs:
        if limit is not None and hamming_weight(c) > limit:
            continue
        lowest = min_eigenvalue(
            effective_hamiltonian(instance.prepared, c, instance.clock, dim_cap)
        )
        report.energies[c] = lowest
        if lowest >= instance.b - slack and report.yes_proof is None:
            report.yes_proof = c
    if report.yes_proof is not None:
        report.status = YES
        return report
    for c in proofs:
        if limit is not None and hamming_weight(c) > limit:
            continue
        report.witness_energies[c] = lh_no_witness(instance, c, dim_cap)[1]
    if all(e <= instance.a + slack for e in report.witness_energies.values()):
        report.status = NO
    return report


def compressed_classical_block(
    H: HermitianOperator, copy_width: int, c: str
) -> HermitianOperator:
    """(<c| (x) I) H (|c> (x) I) with the classical register as the leading qubits."""
    validate_bits(c, copy_width, "classical proof")
    width = 2**copy_width
    rest = H.dim // width
    tensor = H.matrix.reshape(width, rest, width, rest)
    index = bits_to_int(c)
    return HermitianOperator(tensor[index, :, index, :])


def null_space_floor(instance: QsscInstance, dim_cap: Optional[int] = None) -> float:
    """Smallest non-zero eigenvalue of H_in + H_prop + H_stab."""
    return min_nonzero_eigenvalue(assemble(instance.kitaev.penalty(), dim_cap))


def delta_hypothesis_margin(instance: QsscInstance, dim_cap: Optional[int] = None) -> float:
    """Delta J - 2 |Y1|, positive when the projection bound applies."""
    kit = instance.kitaev
    Y1 = assemble_many(cover_terms(kit) + [kit.h_out.scaled(-1.0)], dim_cap)
    return instance.delta * null_space_floor(instance, dim_cap) - 2 * spectral_norm(Y1)
