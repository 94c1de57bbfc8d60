"""
Dense operator assembly, exact spectra and the two structural lemma checkers.

Sites are ordered big-endian: site 0 is the most significant tensor factor.
Every site has its own dimension (2 for qubits, L+1 for a legal clock).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import linalg

from hamred.const import (
    DEFAULT_SLACK,
    HERMITIAN_TOL,
    NULL_TOL,
    SPECTRAL_TOL,
)
from hamred.utils import (
    HermitianityError,
    NullSpaceOverlapError,
    SupportError,
    ZeroOperatorError,
    check_dimension,
)

_LOGGER = logging.getLogger(__name__)

Dims = Tuple[int, ...]


def _is_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if matrix.size == 0:
        return True
    return float(np.max(np.abs(matrix - matrix.conj().T))) <= tol


def as_dims(dims_or_n: Union[int, Sequence[int]]) -> Dims:
    """
    :param int | Sequence[int] dims_or_n: qubit count or explicit site dimensions
    :return tuple[int]: site dimensions
    """
    if isinstance(dims_or_n, (int, np.integer)):
        return (2,) * int(dims_or_n)
    return tuple(int(d) for d in dims_or_n)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise HermitianityError(f"operator must be square, got {matrix.shape}")
        if not _is_hermitian(matrix):
            raise HermitianityError("operator is not Hermitian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def projector(cls, vector: np.ndarray) -> "HermitianOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()))

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + _matrix(other))

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix - _matrix(other))

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(-self.matrix)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.matrix)

    __rmul__ = __mul__

    def conjugated(self, unitary: np.ndarray) -> "HermitianOperator":
        """U H U^dagger"""
        u = np.asarray(unitary)
        product = u @ self.matrix @ u.conj().T
        return HermitianOperator((product + product.conj().T) / 2)

    def allclose(self, other: "HermitianOperator", atol: float = HERMITIAN_TOL) -> bool:
        return np.allclose(self.matrix, _matrix(other), atol=atol, rtol=0)


def _matrix(H) -> np.ndarray:
    if isinstance(H, HermitianOperator):
        return H.matrix
    if isinstance(H, OperatorSum):
        return assemble(H).matrix
    return np.asarray(H, dtype=complex)


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """
    A Hermitian block acting on a few sites.

    An empty support with the 1x1 block [[1]] stands for the identity.
    """

    support: Tuple[int, ...]
    block: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise SupportError(f"duplicate support indices {support}")
        block = np.array(self.block, dtype=complex)
        if not _is_hermitian(block):
            raise HermitianityError(f"block on support {support} is not Hermitian")
        block.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "weight", float(self.weight))

    def scaled(self, factor: float) -> "LocalTerm":
        return LocalTerm(self.support, self.block, self.weight * factor)

    def shifted(self, offset: int) -> "LocalTerm":
        return LocalTerm(tuple(s + offset for s in self.support), self.block, self.weight)


@dataclass(frozen=True, eq=False)
class OperatorSum:
    """Weighted sum of local terms over sites of the given dimensions."""

    dims: Dims
    terms: Tuple[LocalTerm, ...] = ()

    def __post_init__(self):
        dims = as_dims(self.dims)
        terms = tuple(self.terms)
        for term in terms:
            _validate_term(term, dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        """Number of sites."""
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        if tuple(other.dims) != self.dims:
            raise SupportError(f"mixed ambient sizes {self.dims} and {other.dims}")
        return OperatorSum(self.dims, self.terms + other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def scaled(self, factor: float) -> "OperatorSum":
        return OperatorSum(self.dims, tuple(t.scaled(factor) for t in self.terms))

    def relabeled(self, mapping: Sequence[int], dims: Union[int, Sequence[int]]) -> "OperatorSum":
        """Move site s to mapping[s] inside a larger register with the given dims."""
        return OperatorSum(
            as_dims(dims),
            tuple(
                LocalTerm(tuple(mapping[s] for s in t.support), t.block, t.weight)
                for t in self.terms
            ),
        )

    @classmethod
    def identity(cls, dims: Union[int, Sequence[int]], weight: float = 1.0):
        return cls(as_dims(dims), (LocalTerm((), np.eye(1), weight),))

    @classmethod
    def zero(cls, dims: Union[int, Sequence[int]]):
        return cls(as_dims(dims), ())


def _validate_term(term: LocalTerm, dims: Dims):
    for site in term.support:
        if site < 0 or site >= len(dims):
            raise SupportError(
                f"support index {site} out of range for {len(dims)} sites"
            )
    expected = int(np.prod([dims[s] for s in term.support], dtype=np.int64))
    if term.block.shape != (expected, expected):
        raise SupportError(
            f"block shape {term.block.shape} does not match support {term.support} "
            f"of dimension {expected}"
        )


def embed(
    term: LocalTerm,
    dims_or_n: Union[int, Sequence[int]],
    dim_cap: Optional[int] = None,
) -> HermitianOperator:
    """
    Tensor a local block with the identity on every other site.

    :param LocalTerm term: block and support
    :param int | Sequence[int] dims_or_n: qubit count or site dimensions
    :param int dim_cap: dense dimension cap override
    :return HermitianOperator: block on the support, identity elsewhere; weight not applied
    :raise SupportError: support out of range
    """
    dims = as_dims(dims_or_n)
    _validate_term(term, dims)
    total = int(np.prod(dims, dtype=np.int64)) if dims else 1
    check_dimension(total, dim_cap)
    return HermitianOperator(_embed_matrix(term.support, term.block, dims))


def _embed_matrix(support: Sequence[int], block: np.ndarray, dims: Dims) -> np.ndarray:
    n = len(dims)
    support = list(support)
    rest = [i for i in range(n) if i not in support]
    rest_dim = int(np.prod([dims[i] for i in rest], dtype=np.int64)) if rest else 1
    full = np.kron(block, np.eye(rest_dim))
    if n == 0:
        return full
    order = support + rest
    shape = [dims[i] for i in order]
    perm = list(np.argsort(order))
    tensor = full.reshape(shape + shape).transpose(perm + [n + p for p in perm])
    total = int(np.prod(dims, dtype=np.int64))
    return tensor.reshape(total, total)


def assemble(sum_: OperatorSum, dim_cap: Optional[int] = None) -> HermitianOperator:
    """
    Sum of weight_i * embed(term_i). An empty sum is the zero operator.

    :param OperatorSum sum_: terms to add up
    :param int dim_cap: dense dimension cap override
    :return HermitianOperator: assembled matrix
    """
    check_dimension(sum_.dim, dim_cap)
    matrix = np.zeros((sum_.dim, sum_.dim), dtype=complex)
    for term in sum_.terms:
        if term.weight == 0.0:
            continue
        matrix += term.weight * _embed_matrix(term.support, term.block, sum_.dims)
    return HermitianOperator((matrix + matrix.conj().T) / 2)


def assemble_many(
    sums: Sequence[OperatorSum], dim_cap: Optional[int] = None
) -> HermitianOperator:
    """Assemble the sum of several operator sums over the same sites."""
    if not sums:
        raise SupportError("nothing to assemble")
    dims = sums[0].dims
    for s in sums:
        if s.dims != dims:
            raise SupportError(f"mixed ambient sizes {dims} and {s.dims}")
    return assemble(OperatorSum(dims, tuple(t for s in sums for t in s.terms)), dim_cap)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis stored as matrix columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        k = basis.shape[1]
        if k and not np.allclose(
            basis.conj().T @ basis, np.eye(k), atol=HERMITIAN_TOL, rtol=0
        ):
            raise HermitianityError("subspace basis is not orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> HermitianOperator:
        return HermitianOperator(self.basis @ self.basis.conj().T)

    @classmethod
    def span(cls, vectors: np.ndarray) -> "Subspace":
        """Orthonormalize the columns of the given matrix."""
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim == 1:
            vectors = vectors.reshape(-1, 1)
        return cls(vectors.shape[0], linalg.orth(vectors))


def eig(
    H, dim_cap: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact dense eigendecomposition.

    :param HermitianOperator H: operator
    :param int dim_cap: dense dimension cap override
    :return (np.ndarray, np.ndarray): ascending eigenvalues and eigenvector columns
    :raise DimensionCapError: if H is too large
    """
    matrix = _matrix(H)
    check_dimension(matrix.shape[0], dim_cap)
    if matrix.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    values, vectors = linalg.eigh(matrix)
    return values, vectors


def eigenvalues(H, dim_cap: Optional[int] = None) -> np.ndarray:
    matrix = _matrix(H)
    check_dimension(matrix.shape[0], dim_cap)
    return linalg.eigvalsh(matrix)


def min_eigenvalue(H, dim_cap: Optional[int] = None) -> float:
    return float(eigenvalues(H, dim_cap)[0])


def min_nonzero_eigenvalue(
    H, null_tol: float = NULL_TOL, dim_cap: Optional[int] = None
) -> float:
    """
    :param HermitianOperator H: positive semidefinite operator
    :param float null_tol: eigenvalues at or below this count as zero
    :return float: smallest eigenvalue above null_tol
    :raise ZeroOperatorError: if no eigenvalue exceeds null_tol
    """
    values = eigenvalues(H, dim_cap)
    above = values[values > null_tol]
    if above.size == 0:
        raise ZeroOperatorError(
            f"no eigenvalue above {null_tol}; operator is numerically zero"
        )
    return float(above[0])


def is_psd_shifted(
    H, alpha: float, tol: float = DEFAULT_SLACK, dim_cap: Optional[int] = None
) -> bool:
    """True iff lambda_min(H) >= alpha - tol."""
    return min_eigenvalue(H, dim_cap) >= alpha - tol


def spectral_norm(H, dim_cap: Optional[int] = None) -> float:
    values = eigenvalues(H, dim_cap)
    return float(np.max(np.abs(values))) if values.size else 0.0


def expectation(H, vector: np.ndarray) -> float:
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return float(np.real(np.vdot(v, _matrix(H) @ v)))


def null_space(H, tol: float = NULL_TOL, dim_cap: Optional[int] = None) -> Subspace:
    """
    :param HermitianOperator H: positive semidefinite operator
    :param float tol: eigenvalue cutoff
    :return Subspace: span of eigenvectors with eigenvalue <= tol, possibly empty
    """
    values, vectors = eig(H, dim_cap)
    mask = values <= tol
    return Subspace(len(values), vectors[:, mask])


def restrict(H, S: Subspace) -> HermitianOperator:
    """Compression S^dagger H S in the basis of S."""
    matrix = _matrix(H)
    if matrix.shape[0] != S.ambient_dim:
        raise SupportError(
            f"ambient mismatch: operator {matrix.shape[0]} vs subspace {S.ambient_dim}"
        )
    compressed = S.basis.conj().T @ matrix @ S.basis
    return HermitianOperator((compressed + compressed.conj().T) / 2)


def subspace_angle(S1: Subspace, S2: Subspace) -> float:
    """
    Smallest principal angle, arccos of the top singular value of S1^dagger S2.

    :return float: angle in [0, pi/2]
    """
    if S1.ambient_dim != S2.ambient_dim:
        raise SupportError(
            f"ambient mismatch: {S1.ambient_dim} vs {S2.ambient_dim}"
        )
    if S1.dimension == 0 or S2.dimension == 0:
        raise SupportError("subspace angle needs two non-empty subspaces")
    overlap = S1.basis.conj().T @ S2.basis
    top = linalg.svd(overlap, compute_uv=False)[0]
    return float(np.arccos(np.clip(top, 0.0, 1.0)))


def project_block(H, dims: Sequence[int], site: int, index: int) -> HermitianOperator:
    """
    Compression <s|H|s> onto one basis state of one site.

    :param HermitianOperator H: operator over the given sites
    :param Sequence[int] dims: site dimensions of H
    :param int site: site to fix
    :param int index: basis state of that site
    :return HermitianOperator: operator over the remaining sites
    """
    dims = as_dims(dims)
    matrix = _matrix(H)
    n = len(dims)
    tensor = matrix.reshape(list(dims) + list(dims))
    tensor = np.take(np.take(tensor, index, axis=n + site), index, axis=site)
    rest = int(np.prod([d for i, d in enumerate(dims) if i != site], dtype=np.int64))
    return HermitianOperator(tensor.reshape(rest, rest))


def spectrum_table(H, k: Optional[int] = None, dim_cap: Optional[int] = None) -> pd.DataFrame:
    """
    :param HermitianOperator H: operator
    :param int k: number of lowest eigenvalues to keep, all if None
    :return pd.DataFrame: index and eigenvalue columns, ascending
    """
    values = eigenvalues(H, dim_cap)
    if k is not None:
        values = values[:k]
    return pd.DataFrame({"index": np.arange(len(values)), "eigenvalue": values})


def reconstruction_error(H, dim_cap: Optional[int] = None) -> float:
    """max |H - V diag(w) V^dagger| of the eigendecomposition."""
    matrix = _matrix(H)
    values, vectors = eig(matrix, dim_cap)
    rebuilt = (vectors * values) @ vectors.conj().T
    return float(np.max(np.abs(matrix - rebuilt))) if matrix.size else 0.0


@dataclass
class LemmaReport:
    """Outcome of a numeric lemma check with every measured quantity."""

    name: str
    applicable: bool
    holds: bool
    bound: Optional[float] = None
    observed: Optional[float] = None
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def margin(self) -> Optional[float]:
        if self.bound is None or self.observed is None:
            return None
        return self.observed - self.bound


def check_geometric_lemma(
    A1,
    A2,
    null_tol: float = NULL_TOL,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> LemmaReport:
    """
    Certify lambda_min(A1 + A2) >= 2 v sin^2(angle / 2).

    v is the smaller of the two minimum non-zero eigenvalues and the angle is the
    smallest principal angle between the two null spaces.

    :param HermitianOperator A1: positive semidefinite operator
    :param HermitianOperator A2: positive semidefinite operator
    :param float null_tol: cutoff for null spaces and non-zero eigenvalues
    :param float slack: tolerance on the final comparison
    :return LemmaReport: v, angle, bound, lambda_min and the verdict
    :raise NullSpaceOverlapError: if the null spaces intersect
    """
    m1, m2 = _matrix(A1), _matrix(A2)
    if m1.shape != m2.shape:
        raise SupportError(f"shape mismatch {m1.shape} vs {m2.shape}")
    n1 = null_space(m1, null_tol, dim_cap)
    n2 = null_space(m2, null_tol, dim_cap)
    if n1.dimension and n2.dimension:
        top = linalg.svd(n1.basis.conj().T @ n2.basis, compute_uv=False)[0]
        if top >= 1.0 - slack:
            raise NullSpaceOverlapError(
                f"null spaces intersect (largest overlap {top:.12f})"
            )
        angle = float(np.arccos(np.clip(top, 0.0, 1.0)))
    else:
        # an empty null space is orthogonal to everything
        angle = math.pi / 2
    v = min(
        min_nonzero_eigenvalue(m1, null_tol, dim_cap),
        min_nonzero_eigenvalue(m2, null_tol, dim_cap),
    )
    bound = 2.0 * v * math.sin(angle / 2.0) ** 2
    lowest = min_eigenvalue(m1 + m2, dim_cap)
    report = LemmaReport(
        name="geometric",
        applicable=True,
        holds=lowest >= bound - slack,
        bound=bound,
        observed=lowest,
        details={"v": v, "angle": angle, "cos_angle": math.cos(angle)},
    )
    _LOGGER.debug(f"Geometric check: bound={bound:.6g}, lambda_min={lowest:.6g}")
    return report


def check_projection_lemma(
    Y1,
    Y2,
    null_tol: float = NULL_TOL,
    slack: float = DEFAULT_SLACK,
    dim_cap: Optional[int] = None,
) -> LemmaReport:
    """
    Certify both sides of the projection bound for Y = Y1 + Y2.

    lambda(Y1|S) - |Y1|^2 / (J - 2|Y1|) <= lambda(Y) <= lambda(Y1|S), with S the
    null space of Y2 and J its smallest non-zero eigenvalue. When J <= 2|Y1| the
    report is marked inapplicable instead of raising.

    :param HermitianOperator Y1: perturbation
    :param HermitianOperator Y2: positive semidefinite operator with a gap
    :return LemmaReport: lambda(Y), lambda(Y1|S), lower bound and both verdicts
    """
    m1, m2 = _matrix(Y1), _matrix(Y2)
    if m1.shape != m2.shape:
        raise SupportError(f"shape mismatch {m1.shape} vs {m2.shape}")
    norm_y1 = spectral_norm(m1, dim_cap)
    S = null_space(m2, null_tol, dim_cap)
    try:
        J = min_nonzero_eigenvalue(m2, null_tol, dim_cap)
    except ZeroOperatorError:
        J = 0.0
    details = {"J": J, "norm_y1": norm_y1, "null_dimension": float(S.dimension)}
    if S.dimension == 0 or J <= 2.0 * norm_y1:
        _LOGGER.debug(f"Projection check inapplicable: J={J:.6g}, |Y1|={norm_y1:.6g}")
        return LemmaReport("projection", applicable=False, holds=False, details=details)
    lowest = min_eigenvalue(m1 + m2, dim_cap)
    restricted = min_eigenvalue(restrict(m1, S), dim_cap)
    lower = restricted - norm_y1**2 / (J - 2.0 * norm_y1)
    lower_holds = lowest >= lower - slack
    upper_holds = lowest <= restricted + slack
    details.update(
        {
            "lambda_restricted": restricted,
            "lower_holds": float(lower_holds),
            "upper_holds": float(upper_holds),
        }
    )
    return LemmaReport(
        name="projection",
        applicable=True,
        holds=lower_holds and upper_holds,
        bound=lower,
        observed=lowest,
        details=details,
    )
