"""Downward-closed set systems over types: membership oracles, loop and
contraction bookkeeping, greedy selection, and exact rank search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import ExactCapExceeded, Scalar, ValidationError

#: Largest candidate set an exhaustive rank search will explore.
DEFAULT_RANK_CAP = 20


class IndependenceOracle:
    """Membership oracle for a downward-closed family over a fixed ground set.

    The empty set is always independent. Sets containing types outside the
    ground are dependent, which makes such types loops. ``is_independent``
    memoizes per oracle; treat oracles as immutable once built.
    """

    kind = "abstract"
    is_matroid = False
    ground: frozenset[str]

    def is_independent(self, types: Iterable[str]) -> bool:
        key = types if isinstance(types, frozenset) else frozenset(types)
        if not key:
            return True
        memo = self._memo
        cached = memo.get(key)
        if cached is None:
            cached = key <= self.ground and self._independent(key)
            memo[key] = cached
        return cached

    def _independent(self, types: frozenset[str]) -> bool:
        raise NotImplementedError


@dataclass(eq=True)
class ExplicitFamily(IndependenceOracle):
    """Family given by an explicit list of independent sets (test fixture)."""

    ground: frozenset[str]
    sets: frozenset[frozenset[str]]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "explicit"

    def __post_init__(self):
        self.ground = frozenset(self.ground)
        self.sets = frozenset(frozenset(s) for s in self.sets)

    def _independent(self, types):
        return types in self.sets


@dataclass(eq=True)
class PartitionMatroid(IndependenceOracle):
    """Independent iff every part contains at most its capacity."""

    part_of: Mapping[str, str | int]
    capacity: Mapping[str | int, int]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "partition_matroid"
    is_matroid = True

    def __post_init__(self):
        self.part_of = dict(self.part_of)
        self.capacity = dict(self.capacity)
        missing = {p for p in self.part_of.values() if p not in self.capacity}
        if missing:
            raise ValidationError(f"parts without a capacity: {sorted(map(str, missing))}")
        for p, c in self.capacity.items():
            if not isinstance(c, int) or c < 0:
                raise ValidationError(f"capacity of part {p!r} must be an int >= 0")
        self.ground = frozenset(self.part_of)

    def _independent(self, types):
        counts: dict = {}
        for t in types:
            p = self.part_of[t]
            n = counts.get(p, 0) + 1
            if n > self.capacity[p]:
                return False
            counts[p] = n
        return True


@dataclass(eq=True)
class MatchingFamily(IndependenceOracle):
    """Types map to graph edges; independent iff the edges form a matching."""

    edges: Mapping[str, tuple[str, str]]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "matching"

    def __post_init__(self):
        cleaned = {}
        for t, (u, v) in self.edges.items():
            if u == v:
                raise ValidationError(f"type {t!r} maps to a self-loop edge at {u!r}")
            cleaned[t] = (u, v)
        self.edges = cleaned
        self.ground = frozenset(cleaned)

    def _independent(self, types):
        seen: set[str] = set()
        for t in types:
            u, v = self.edges[t]
            if u in seen or v in seen:
                return False
            seen.add(u)
            seen.add(v)
        return True


@dataclass(eq=True)
class IntersectionFamily(IndependenceOracle):
    """Independent iff independent in every member family.

    The intersection of k matroids is a k-extendible system.
    """

    members: tuple[IndependenceOracle, ...]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "intersection"

    def __post_init__(self):
        self.members = tuple(self.members)
        if not self.members:
            raise ValidationError("intersection needs at least one family")
        ground = self.members[0].ground
        for m in self.members[1:]:
            if m.ground != ground:
                raise ValidationError("intersected families must share one ground set")
        self.ground = ground

    @property
    def is_matroid(self) -> bool:  # type: ignore[override]
        return len(self.members) == 1 and self.members[0].is_matroid

    def _independent(self, types):
        return all(m.is_independent(types) for m in self.members)


@dataclass(eq=True)
class PathChainFamily(IndependenceOracle):
    """Types map to edges of a rooted tree; independent iff all edges lie on
    one common root-leaf path (i.e. their lower endpoints form an ancestor
    chain)."""

    edges: Mapping[str, tuple[str, str]]  # type -> (parent vertex, child vertex)
    root: str
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "path_chain"

    def __post_init__(self):
        self.edges = {t: (u, v) for t, (u, v) in self.edges.items()}
        parent: dict[str, str] = {}
        for t, (u, v) in self.edges.items():
            if v == self.root:
                raise ValidationError("the root cannot be a child endpoint")
            if v in parent and parent[v] != u:
                raise ValidationError(f"vertex {v!r} has two parents")
            parent[v] = u
        depth: dict[str, int] = {self.root: 0}

        def depth_of(v: str) -> int:
            trail = []
            while v not in depth:
                trail.append(v)
                if v not in parent:
                    raise ValidationError(f"vertex {v!r} is not connected to the root")
                v = parent[v]
            d = depth[v]
            for x in reversed(trail):
                d += 1
                depth[x] = d
            return depth[trail[0]] if trail else d

        for v in parent:
            depth_of(v)
        self._parent = parent
        self._depth = depth
        self.ground = frozenset(self.edges)

    def _ancestor_or_self(self, a: str, b: str) -> bool:
        da, db = self._depth[a], self._depth[b]
        while db > da:
            b = self._parent[b]
            db -= 1
        return a == b

    def _independent(self, types):
        verts = sorted((self._depth[self.edges[t][1]], self.edges[t][1]) for t in types)
        for (_, a), (_, b) in zip(verts, verts[1:]):
            if not self._ancestor_or_self(a, b):
                return False
        return True


def make_explicit_family(ground: Iterable[str], sets: Iterable[Iterable[str]]) -> ExplicitFamily:
    return ExplicitFamily(frozenset(ground), frozenset(frozenset(s) for s in sets))


def make_partition_matroid(
    parts: Mapping[str, str | int], capacity: Mapping[str | int, int]
) -> PartitionMatroid:
    return PartitionMatroid(dict(parts), dict(capacity))


def make_uniform_matroid(ground: Iterable[str], rank: int) -> PartitionMatroid:
    return PartitionMatroid({t: "all" for t in ground}, {"all": rank})


def intersect(oracles: Sequence[IndependenceOracle]) -> IntersectionFamily:
    return IntersectionFamily(tuple(oracles))


def make_matching_family(graph: Mapping[str, tuple[str, str]]) -> MatchingFamily:
    return MatchingFamily(dict(graph))


def make_path_chain_family(
    edges: Mapping[str, tuple[str, str]], root: str
) -> PathChainFamily:
    return PathChainFamily(dict(edges), root)


@dataclass(frozen=True)
class ContractionState:
    """Persistent record of contracted non-loop types, in contraction order.

    States are copy-on-extend so recursion branches can share prefixes.
    """

    family: IndependenceOracle
    contracted: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "contracted", tuple(self.contracted))
        object.__setattr__(self, "_set", frozenset(self.contracted))

    @property
    def contracted_set(self) -> frozenset[str]:
        return self._set  # type: ignore[attr-defined]


def is_loop(state: ContractionState, type_id: str) -> bool:
    """A type is a loop when its singleton is dependent in the contracted family.

    A previously contracted type is always a loop (a parallel copy of itself).
    """
    if type_id in state.contracted_set:
        return True
    return not state.family.is_independent(state.contracted_set | {type_id})


def contract_type(state: ContractionState, type_id: str) -> ContractionState:
    """Append a non-loop type to the contraction chain; loops are an error."""
    if is_loop(state, type_id):
        raise ValidationError(f"cannot contract loop {type_id!r}")
    return ContractionState(state.family, state.contracted + (type_id,))


def greedy_select(family: IndependenceOracle, ordered: Iterable[str]) -> tuple[str, ...]:
    """Scan once in the given order: contract non-loops, skip loops.

    Returns the contracted types in order; the returned set is a maximal
    independent subset of the scanned support.
    """
    state = ContractionState(family)
    for t in ordered:
        if not is_loop(state, t):
            state = contract_type(state, t)
    return state.contracted


def greedy_rank(family: IndependenceOracle, ordered: Iterable[str]) -> int:
    return len(greedy_select(family, ordered))


def max_rank(
    family: IndependenceOracle,
    types: Iterable[str],
    *,
    weights: Mapping[str, Scalar] | None = None,
    cap: int = DEFAULT_RANK_CAP,
) -> Scalar:
    """Maximum weight (cardinality when ``weights`` is None) of an independent
    subset of ``types``.

    Matroids use the exchange greedy, which is exact. Other families fall
    back to an exhaustive branch-and-bound over independent subsets, capped
    at ``cap`` candidates.
    """
    cand = [
        t
        for t in frozenset(types) & family.ground
        if weights is None or weights.get(t, 0) > 0
    ]
    if not cand:
        return 0
    w: dict[str, Scalar] = {
        t: (1 if weights is None else weights[t]) for t in cand
    }
    cand.sort(key=lambda t: (-w[t], t))
    if family.is_matroid:
        chosen: frozenset[str] = frozenset()
        total: Scalar = 0
        for t in cand:
            ext = chosen | {t}
            if family.is_independent(ext):
                chosen = ext
                total = total + w[t]
        return total
    if len(cand) > cap:
        raise ExactCapExceeded(
            f"rank computation infeasible: {len(cand)} candidates exceed cap {cap}"
        )
    suffix: list[Scalar] = [0] * (len(cand) + 1)
    for i in reversed(range(len(cand))):
        suffix[i] = suffix[i + 1] + w[cand[i]]
    best: Scalar = 0

    def search(i: int, chosen: frozenset[str], acc: Scalar) -> None:
        nonlocal best
        if acc > best:
            best = acc
        if i == len(cand) or acc + suffix[i] <= best:
            return
        t = cand[i]
        ext = chosen | {t}
        if family.is_independent(ext):
            search(i + 1, ext, acc + w[t])
        search(i + 1, chosen, acc)

    search(0, frozenset(), 0)
    return best
