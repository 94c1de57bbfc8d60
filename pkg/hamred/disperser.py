"""
Desk-scale dispersers and the tree encoding of classical proofs.

Tree vertices are numbered breadth-first: the root is 0 and the children of v
are 2v+1 (bit 0) and 2v+2 (bit 1). Leaf strings are read from the root down.
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from hamred.const import DEFAULT_SEARCH_BUDGET, ENUMERATION_CAP
from hamred.utils import (
    DisperserSearchError,
    EnumerationCapError,
    RegisterLayoutError,
    SupportError,
    int_to_bits,
    validate_bits,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisperserGraph:
    """Bipartite graph with left-degree D; neighbor rows may repeat a right vertex."""

    left_size: int
    right_size: int
    degree: int
    neighbors: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.neighbors)
        if len(rows) != self.left_size:
            raise SupportError(f"{len(rows)} neighbor rows for {self.left_size} left vertices")
        for u, row in enumerate(rows):
            if len(row) != self.degree:
                raise SupportError(f"left vertex {u} has {len(row)} neighbors, expected {self.degree}")
            if any(v < 0 or v >= self.right_size for v in row):
                raise SupportError(f"left vertex {u} has a neighbor outside [0, {self.right_size})")
        object.__setattr__(self, "neighbors", rows)

    def neighbor_set(self, u: int) -> FrozenSet[int]:
        return frozenset(self.neighbors[u])

    def neighbor_mask(self, u: int) -> int:
        mask = 0
        for v in self.neighbors[u]:
            mask |= 1 << v
        return mask

    def coverage(self, subset: Iterable[int]) -> int:
        """Number of distinct right vertices adjacent to the subset."""
        mask = 0
        for u in subset:
            mask |= self.neighbor_mask(u)
        return bin(mask).count("1")


@dataclass
class DisperserReport:
    holds: bool
    required: float
    subsets_checked: int
    exhaustive: bool
    min_coverage: Optional[int] = None
    witness: Optional[Tuple[int, ...]] = None


def _required(G: DisperserGraph, epsilon: float) -> float:
    return (1.0 - epsilon) * G.right_size


def verify_disperser(
    G: DisperserGraph,
    k: int,
    epsilon: float,
    samples: Optional[int] = None,
    seed: int = 0,
    cap: int = ENUMERATION_CAP,
    progress: bool = False,
) -> DisperserReport:
    """
    Check that every left subset of size 2^k reaches (1 - epsilon)|R| right vertices.

    :param DisperserGraph G: graph to check
    :param int k: log of the subset size
    :param float epsilon: allowed uncovered fraction
    :param int samples: number of random subsets to draw instead of enumerating
    :param int seed: seed for sampled mode
    :param int cap: maximum number of subsets enumerated exhaustively
    :param bool progress: show a progress bar
    :return DisperserReport: verdict, subsets checked and a violating subset if any
    :raise EnumerationCapError: if enumeration exceeds the cap and no sampling was asked
    """
    size = 2**k
    required = _required(G, epsilon)
    masks = [G.neighbor_mask(u) for u in range(G.left_size)]
    if size > G.left_size:
        return DisperserReport(True, required, 0, True)
    total = math.comb(G.left_size, size)
    if samples is None and total > cap:
        raise EnumerationCapError(
            f"{total} subsets of size {size} exceed the cap of {cap}; use sampling"
        )
    if samples is None:
        subsets = itertools.combinations(range(G.left_size), size)
        exhaustive = True
    else:
        rng = random.Random(seed)
        subsets = (tuple(sorted(rng.sample(range(G.left_size), size))) for _ in range(samples))
        exhaustive = False
        total = samples
    if progress:
        from rich.progress import track

        subsets = track(subsets, total=total, description="Checking subsets")
    checked, lowest = 0, None
    for subset in subsets:
        mask = 0
        for u in subset:
            mask |= masks[u]
        covered = bin(mask).count("1")
        checked += 1
        lowest = covered if lowest is None else min(lowest, covered)
        if covered + 1e-12 < required:
            _LOGGER.info(f"Disperser property fails on {subset}: {covered} < {required}")
            return DisperserReport(False, required, checked, exhaustive, lowest, tuple(subset))
    return DisperserReport(True, required, checked, exhaustive, lowest)


def find_disperser(
    left_size: int,
    right_size: int,
    degree: int,
    k: int,
    epsilon: float,
    seed: int = 0,
    max_attempts: int = DEFAULT_SEARCH_BUDGET,
    samples: Optional[int] = None,
) -> DisperserGraph:
    """
    Seeded random search for a (k, epsilon)-disperser.

    Rows draw `degree` distinct right vertices when degree <= right_size,
    otherwise with replacement. Each candidate is checked with verify_disperser.

    :return DisperserGraph: first candidate that passes
    :raise DisperserSearchError: on infeasible parameters or an exhausted budget
    """
    required = (1.0 - epsilon) * right_size
    reachable = min(right_size, degree * min(2**k, left_size))
    if reachable + 1e-12 < required:
        raise DisperserSearchError(
            f"{min(2**k, left_size)} vertices of degree {degree} reach at most "
            f"{reachable} < {required} right vertices",
            attempts=0,
        )
    rng = random.Random(seed)
    for attempt in range(1, max_attempts + 1):
        rows = []
        for _ in range(left_size):
            if degree <= right_size:
                rows.append(tuple(sorted(rng.sample(range(right_size), degree))))
            else:
                rows.append(tuple(sorted(rng.randrange(right_size) for _ in range(degree))))
        graph = DisperserGraph(left_size, right_size, degree, tuple(rows))
        if verify_disperser(graph, k, epsilon, samples=samples, seed=seed).holds:
            _LOGGER.info(f"Found ({k}, {epsilon})-disperser after {attempt} attempt(s)")
            return graph
    raise DisperserSearchError(
        f"no ({k}, {epsilon})-disperser in {max_attempts} attempts", attempts=max_attempts
    )


@dataclass(frozen=True)
class EncodingTree:
    """Complete binary tree of the given depth whose vertices are the left side of a disperser."""

    depth: int
    graph: DisperserGraph

    def __post_init__(self):
        if self.depth < 0:
            raise RegisterLayoutError(f"negative tree depth {self.depth}")
        expected = 2 ** (self.depth + 1) - 1
        if self.graph.left_size != expected:
            raise RegisterLayoutError(
                f"depth {self.depth} tree has {expected} vertices, graph has "
                f"{self.graph.left_size} left vertices"
            )

    @property
    def leaves(self) -> int:
        return 2**self.depth

    @property
    def right_size(self) -> int:
        return self.graph.right_size

    def path(self, x: str) -> List[int]:
        """Vertices from the root to the leaf labelled x."""
        validate_bits(x, self.depth, "leaf label")
        vertex, path = 0, [0]
        for bit in x:
            vertex = 2 * vertex + 1 + int(bit)
            path.append(vertex)
        return path

    def leaf_label(self, vertex: int) -> str:
        return int_to_bits(vertex - (2**self.depth - 1), self.depth)

    def children(self, vertex: int) -> List[int]:
        if vertex >= 2**self.depth - 1:
            return []
        return [2 * vertex + 1, 2 * vertex + 2]


def encode(T: EncodingTree, x: str) -> FrozenSet[int]:
    """Union of the neighbor sets along the root-to-x path."""
    covered: Set[int] = set()
    for vertex in T.path(x):
        covered |= T.graph.neighbor_set(vertex)
    return frozenset(covered)


def trace_decode(T: EncodingTree, subset: Iterable[int]) -> Tuple[Set[str], int]:
    """
    Pruned breadth-first search: a vertex is explored only if its neighbors lie
    inside the subset.

    :param EncodingTree T: tree
    :param Iterable[int] subset: right vertices R_y
    :return (set[str], int): leaves whose whole path is inside the subset, and the
        number of vertices examined
    """
    allowed = frozenset(subset)
    frontier, leaves, visited = [0], set(), 0
    while frontier:
        following = []
        for vertex in frontier:
            visited += 1
            if not T.graph.neighbor_set(vertex) <= allowed:
                continue
            children = T.children(vertex)
            if children:
                following.extend(children)
            else:
                leaves.add(T.leaf_label(vertex))
        frontier = following
    return leaves, visited


def decode(T: EncodingTree, subset: Iterable[int]) -> Set[str]:
    return trace_decode(T, subset)[0]


def decode_visit_bound(T: EncodingTree, k: int) -> int:
    """Vertices a pruned search may examine when at most 2^k leaves survive."""
    return (2**k + 1) * 2 * max(T.depth, 1)


def subset_from_bits(bits: str) -> FrozenSet[int]:
    return frozenset(i for i, b in enumerate(bits) if b == "1")


def hardness_ratio(g: float, g_prime: float) -> float:
    """g' / g, reported as a number only."""
    return g_prime / g if g else math.inf


def tree_from_rows(depth: int, right_size: int, rows: Sequence[Sequence[int]]) -> EncodingTree:
    """Tree over explicit neighbor rows, one per vertex in breadth-first order."""
    degree = len(rows[0]) if rows else 0
    graph = DisperserGraph(len(rows), right_size, degree, tuple(tuple(r) for r in rows))
    return EncodingTree(depth, graph)
