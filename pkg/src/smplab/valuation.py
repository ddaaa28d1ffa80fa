"""Monotone combinatorial valuations over sets of type ids.

Every valuation maps a set of types to a non-negative value, is monotone,
and gives the empty set value 0. Values keep the arithmetic of their inputs
(int, float, or Fraction). Valuations are immutable and memoize their
evaluations, so sharing across threads and recursion branches is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .core import Scalar, ValidationError
from .families import DEFAULT_RANK_CAP, IndependenceOracle, max_rank


class ValuationFunction:
    """Base class; subclasses implement ``_evaluate`` over frozensets."""

    kind = "abstract"

    def __call__(self, types: Iterable[str]) -> Scalar:
        key = types if isinstance(types, frozenset) else frozenset(types)
        memo = self._memo
        value = memo.get(key)
        if value is None:
            value = self._evaluate(key)
            memo[key] = value
        return value

    def _evaluate(self, types: frozenset[str]) -> Scalar:
        raise NotImplementedError


@dataclass(eq=True)
class ExplicitValuation(ValuationFunction):
    """Table-backed valuation for tests and tiny hand-built instances."""

    ground: frozenset[str]
    table: Mapping[frozenset[str], Scalar]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "explicit"

    def __post_init__(self):
        self.ground = frozenset(self.ground)
        self.table = {frozenset(k): v for k, v in self.table.items()}

    def _evaluate(self, types):
        if not types:
            return self.table.get(frozenset(), 0)
        try:
            return self.table[types]
        except KeyError:
            raise ValidationError(f"explicit valuation has no entry for {sorted(types)}")


@dataclass(eq=True)
class CoverageValuation(ValuationFunction):
    """Size of the union of the ground items covered by the given types.

    Monotone submodular by construction; types without a cover set add
    nothing.
    """

    cover_sets: Mapping[str, frozenset]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "coverage"

    def __post_init__(self):
        self.cover_sets = {t: frozenset(s) for t, s in self.cover_sets.items()}

    def _evaluate(self, types):
        covered: set = set()
        for t in types:
            s = self.cover_sets.get(t)
            if s:
                covered |= s
        return len(covered)


@dataclass(eq=True)
class PartitionWeightedValuation(ValuationFunction):
    """Sum of part weights over the distinct parts touched by the given types.

    This is the weighted rank of a partition matroid that keeps at most one
    type per part. Types absent from ``part_of`` carry no value.
    """

    part_of: Mapping[str, str | int]
    part_weight: Mapping[str | int, Scalar]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "partition_weighted"

    def __post_init__(self):
        self.part_of = dict(self.part_of)
        self.part_weight = dict(self.part_weight)
        for p, w in self.part_weight.items():
            if w < 0:
                raise ValidationError(f"part {p!r} has negative weight {w!r}")
        missing = {p for p in self.part_of.values() if p not in self.part_weight}
        if missing:
            raise ValidationError(f"parts without a weight: {sorted(map(str, missing))}")

    def _evaluate(self, types):
        parts = {self.part_of[t] for t in types if t in self.part_of}
        total: Scalar = 0
        for p in parts:
            total = total + self.part_weight[p]
        return total


@dataclass(eq=True)
class WeightedRankValuation(ValuationFunction):
    """Maximum total weight of an independent subset of the argument.

    Exact greedy on matroids; exhaustive (capped) search on general
    downward-closed families. Types outside the family ground or with zero
    weight never contribute.
    """

    family: IndependenceOracle
    weights: Mapping[str, Scalar]
    rank_cap: int = DEFAULT_RANK_CAP
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "weighted_rank"

    def __post_init__(self):
        self.weights = dict(self.weights)
        for t, w in self.weights.items():
            if w < 0:
                raise ValidationError(f"type {t!r} has negative weight {w!r}")

    def _evaluate(self, types):
        return max_rank(self.family, types, weights=self.weights, cap=self.rank_cap)


@dataclass(eq=True)
class ContractedValuation(ValuationFunction):
    """Lazy marginal-value wrapper: value of A on top of a fixed set.

    Keeps monotonicity, and submodularity when the base is submodular.
    Chains of contractions are flattened so evaluation stays O(1) deep.
    """

    base: ValuationFunction
    fixed: frozenset[str]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    kind = "contracted"

    def _evaluate(self, types):
        return self.base(self.fixed | types) - self.base(self.fixed)


def contract(f: ValuationFunction, types: Iterable[str]) -> ValuationFunction:
    """Marginal valuation ``A -> f(S | A) - f(S)`` for the fixed set S."""
    fixed = frozenset(types)
    if not fixed:
        return f
    if isinstance(f, ContractedValuation):
        return ContractedValuation(f.base, f.fixed | fixed)
    return ContractedValuation(f, fixed)


def coverage_valuation(cover_sets: Mapping[str, Iterable]) -> CoverageValuation:
    return CoverageValuation({t: frozenset(s) for t, s in cover_sets.items()})


def partition_weighted_valuation(
    part_of: Mapping[str, str | int], part_weight: Mapping[str | int, Scalar]
) -> PartitionWeightedValuation:
    return PartitionWeightedValuation(dict(part_of), dict(part_weight))


def weighted_rank(
    family: IndependenceOracle,
    weights: Mapping[str, Scalar],
    rank_cap: int = DEFAULT_RANK_CAP,
) -> WeightedRankValuation:
    return WeightedRankValuation(family, dict(weights), rank_cap)


def unit_weights(family: IndependenceOracle) -> dict[str, int]:
    """Weight 1 on every ground type: the unweighted rank's weight map."""
    return {t: 1 for t in sorted(family.ground)}
