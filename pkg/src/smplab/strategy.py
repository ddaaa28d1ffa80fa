"""Adaptive decision trees, prefix-closed probing constraints, feasibility
checking, and random-walk path extraction.

A decision tree probes the element at its root, then follows the arc labeled
with the revealed type. Constraints are stepwise: a sequence is feasible when
every prefix extension passes ``may_extend``, so prefix-closure holds by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import Scalar, TypeVector, Universe, ValidationError


@dataclass(frozen=True)
class DecisionTree:
    """One node of an adaptive strategy; a leaf when ``element`` is None.

    ``children`` maps every type of ``element`` to the subtree taken when the
    probe reveals that type. An element never repeats on a root-leaf path;
    this is enforced at construction. Shared (DAG) subtrees are allowed as
    long as the per-path invariant holds.
    """

    element: str | None
    children: Mapping[str, "DecisionTree"]

    def __post_init__(self):
        object.__setattr__(self, "children", dict(self.children))
        if self.element is None:
            if self.children:
                raise ValidationError("a leaf cannot have children")
            object.__setattr__(self, "_below", frozenset())
            return
        if not self.children:
            raise ValidationError("an internal node needs one child arc per type")
        below = {self.element}
        for child in self.children.values():
            if self.element in child.elements_below:
                raise ValidationError(
                    f"element {self.element!r} repeats on a probing path"
                )
            below |= child.elements_below
        object.__setattr__(self, "_below", frozenset(below))

    @property
    def is_leaf(self) -> bool:
        return self.element is None

    @property
    def elements_below(self) -> frozenset[str]:
        return self._below  # type: ignore[attr-defined]


def leaf() -> DecisionTree:
    return DecisionTree(None, {})


def probe(element: str, children: Mapping[str, DecisionTree]) -> DecisionTree:
    return DecisionTree(element, children)


def chain_tree(universe: Universe, sequence: Sequence[str]) -> DecisionTree:
    """The non-adaptive tree that probes a fixed sequence whatever it sees."""
    node = leaf()
    for e in reversed(sequence):
        node = probe(e, {t: node for t in universe.type_space[e]})
    return node


def validate_tree(tree: DecisionTree, universe: Universe) -> None:
    """Check that every internal node has exactly one arc per type."""
    seen: set[int] = set()
    stack = [tree]
    while stack:
        node = stack.pop()
        if id(node) in seen or node.is_leaf:
            continue
        seen.add(id(node))
        if node.element not in universe.type_space:
            raise ValidationError(f"unknown element {node.element!r} in tree")
        expected = set(universe.type_space[node.element])
        if set(node.children) != expected:
            raise ValidationError(
                f"node for {node.element!r} must have exactly one arc per type"
            )
        stack.extend(node.children.values())


@dataclass(frozen=True)
class ProbePath:
    """Root-to-leaf record of (element, revealed type) pairs."""

    steps: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((e, t) for e, t in self.steps))
        elems = [e for e, _ in self.steps]
        if len(set(elems)) != len(elems):
            raise ValidationError("a probing path cannot repeat elements")

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(e for e, _ in self.steps)

    @property
    def types(self) -> tuple[str, ...]:
        return tuple(t for _, t in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def random_walk_path(tree: DecisionTree, vector: TypeVector) -> ProbePath:
    """Follow the arcs selected by ``vector`` from the root down to a leaf."""
    steps: list[tuple[str, str]] = []
    node = tree
    while not node.is_leaf:
        e = node.element
        if e not in vector:
            raise ValidationError(f"type vector does not assign element {e!r}")
        t = vector[e]
        child = node.children.get(t)
        if child is None:
            raise ValidationError(f"node for {e!r} has no arc for type {t!r}")
        steps.append((e, t))
        node = child
    return ProbePath(tuple(steps))


class ConstraintOracle:
    """Stepwise prefix-closed probing constraint."""

    kind = "abstract"

    def may_extend(self, prefix: tuple[str, ...], nxt: str) -> bool:
        raise NotImplementedError

    def allows(self, sequence: Sequence[str]) -> bool:
        seq = tuple(sequence)
        return all(self.may_extend(seq[:i], seq[i]) for i in range(len(seq)))


@dataclass(eq=True)
class BudgetConstraint(ConstraintOracle):
    """Total probing cost must stay within the budget."""

    cost: Mapping[str, Scalar]
    budget: Scalar

    kind = "budget"

    def __post_init__(self):
        self.cost = dict(self.cost)
        for e, c in self.cost.items():
            if c < 0:
                raise ValidationError(f"cost of {e!r} must be >= 0")

    def _cost_of(self, e: str) -> Scalar:
        try:
            return self.cost[e]
        except KeyError:
            raise ValidationError(f"no probing cost for element {e!r}")

    def may_extend(self, prefix, nxt):
        spent: Scalar = 0
        for e in prefix:
            spent = spent + self._cost_of(e)
        return spent + self._cost_of(nxt) <= self.budget


@dataclass(eq=True)
class CardinalityConstraint(ConstraintOracle):
    limit: int

    kind = "cardinality"

    def may_extend(self, prefix, nxt):
        return len(prefix) < self.limit


@dataclass(eq=True)
class DagPathConstraint(ConstraintOracle):
    """Sequences must trace a directed path starting at ``start``."""

    arcs: Mapping[str, frozenset[str]]
    start: str

    kind = "dag_path"

    def __post_init__(self):
        self.arcs = {e: frozenset(out) for e, out in self.arcs.items()}

    def may_extend(self, prefix, nxt):
        if not prefix:
            return nxt == self.start
        return nxt in self.arcs.get(prefix[-1], frozenset())


@dataclass(eq=True)
class TreeFanConstraint(ConstraintOracle):
    """Probed edges of a rooted tree must all touch one root-leaf vertex path.

    An edge (u, v) with u the parent touches the path to leaf L exactly when
    L lies in the subtree of u, so each prefix keeps a set of still-compatible
    leaves; the sets are cached per prefix.
    """

    edges: Mapping[str, tuple[str, str]]  # element -> (parent vertex, child vertex)
    root: str

    kind = "tree_fan"

    def __post_init__(self):
        self.edges = {e: (u, v) for e, (u, v) in self.edges.items()}
        children: dict[str, list[str]] = {}
        parents: dict[str, str] = {}
        for e, (u, v) in self.edges.items():
            if v == self.root:
                raise ValidationError("the root cannot be a child endpoint")
            if v in parents and parents[v] != u:
                raise ValidationError(f"vertex {v!r} has two parents")
            parents[v] = u
            children.setdefault(u, []).append(v)
        leaves_under: dict[str, frozenset[str]] = {}

        def collect(v: str) -> frozenset[str]:
            got = leaves_under.get(v)
            if got is None:
                kids = children.get(v, [])
                got = (
                    frozenset({v})
                    if not kids
                    else frozenset().union(*(collect(c) for c in kids))
                )
                leaves_under[v] = got
            return got

        collect(self.root)
        unreachable = set(parents) - set(leaves_under)
        if unreachable:
            raise ValidationError(
                f"vertices not reachable from the root: {sorted(unreachable)}"
            )
        self._leaves_under = leaves_under
        self._prefix_compat: dict[tuple[str, ...], frozenset[str]] = {
            (): leaves_under[self.root]
        }

    def _edge_leaves(self, e: str) -> frozenset[str]:
        if e not in self.edges:
            raise ValidationError(f"element {e!r} is not an edge of the tree")
        u, _ = self.edges[e]
        return self._leaves_under[u]

    def _compat(self, prefix: tuple[str, ...]) -> frozenset[str]:
        got = self._prefix_compat.get(prefix)
        if got is None:
            got = self._compat(prefix[:-1]) & self._edge_leaves(prefix[-1])
            self._prefix_compat[prefix] = got
        return got

    def may_extend(self, prefix, nxt):
        return bool(self._compat(tuple(prefix)) & self._edge_leaves(nxt))


@dataclass(eq=True)
class TableConstraint(ConstraintOracle):
    """Explicit table of feasible sequences (used for serialized externals).

    ``may_extend`` consults the table directly; run the prefix-closure
    verifier on tables from outside sources.
    """

    sequences: frozenset[tuple[str, ...]]

    kind = "table"

    def __post_init__(self):
        self.sequences = frozenset(tuple(s) for s in self.sequences)

    def may_extend(self, prefix, nxt):
        return tuple(prefix) + (nxt,) in self.sequences

    def declared_sequences(self) -> frozenset[tuple[str, ...]]:
        return self.sequences


def constraint_budget(cost: Mapping[str, Scalar], budget: Scalar) -> BudgetConstraint:
    return BudgetConstraint(dict(cost), budget)


def constraint_cardinality(limit: int) -> CardinalityConstraint:
    return CardinalityConstraint(limit)


def constraint_dag_path(
    arcs: Mapping[str, Iterable[str]], start: str
) -> DagPathConstraint:
    return DagPathConstraint({e: frozenset(out) for e, out in arcs.items()}, start)


def constraint_tree_fan(
    tree_edges: Mapping[str, tuple[str, str]], root: str
) -> TreeFanConstraint:
    return TreeFanConstraint(dict(tree_edges), root)


def constraint_table(sequences: Iterable[Sequence[str]]) -> TableConstraint:
    return TableConstraint(frozenset(tuple(s) for s in sequences))


def check_tree_feasible(
    tree: DecisionTree, constraint: ConstraintOracle
) -> tuple[bool, tuple[str, ...] | None]:
    """True iff every root-leaf element sequence is feasible.

    On failure returns the first violating prefix (ending at the rejected
    element) in child-arc order.
    """

    def walk(node: DecisionTree, prefix: tuple[str, ...]):
        if node.is_leaf:
            return None
        if not constraint.may_extend(prefix, node.element):
            return prefix + (node.element,)
        extended = prefix + (node.element,)
        for child in node.children.values():
            witness = walk(child, extended)
            if witness is not None:
                return witness
        return None

    witness = walk(tree, ())
    return witness is None, witness
