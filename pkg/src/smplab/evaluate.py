"""Exact and Monte Carlo evaluation of probing strategies.

``adap_*`` evaluators compute the expected value received by an adaptive
decision tree: the valuation of the realized types on the walked path.
``alg_*`` evaluators compute the value of the random-walk non-adaptive
strategy, which samples a virtual root-leaf path and then truly probes its
elements with fresh independent types. ``greedy_interleaved_exact`` scores
the greedy selection that scans the path in root-to-leaf order, feeding the
true draw before the virtual draw at each element.

Exact evaluators keep rational arithmetic when all inputs are rational.
Monte Carlo evaluators are deterministic given (seed, trials) and produce
bit-identical results for any worker count, because trials are partitioned
into fixed counter-addressed blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .core import (
    DEFAULT_ASSIGNMENT_CAP,
    ExactCapExceeded,
    RandomStream,
    Scalar,
    TypeDistribution,
    Universe,
    ValidationError,
    iter_type_profiles,
    sample_type_profiles,
)
from .families import IndependenceOracle
from .strategy import ConstraintOracle, DecisionTree, validate_tree
from .valuation import ValuationFunction, unit_weights, weighted_rank

#: Hard limit on the amount of exact work (arc expansions) per evaluation.
DEFAULT_WORK_CAP = 1 << 22

#: Trials per counter-addressed Monte Carlo block.
MC_BLOCK = 1024

#: Feasible-sequence expansion limit for the exhaustive non-adaptive search.
DEFAULT_SEQUENCE_CAP = 10**6


@dataclass(frozen=True)
class EvalReport:
    """Value of a strategy evaluation plus its provenance.

    ``stderr`` is only present in Monte Carlo mode; ``trace`` optionally
    carries per-node or diagnostic values.
    """

    value: Scalar
    mode: str
    trials: int | None = None
    seed: int | None = None
    stderr: float | None = None
    trace: Mapping | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "monte_carlo"):
            raise ValidationError(f"unknown evaluation mode {self.mode!r}")
        if self.mode == "exact" and self.stderr is not None:
            raise ValidationError("exact reports carry no standard error")
        if self.mode == "monte_carlo":
            if self.trials is None or self.trials < 1:
                raise ValidationError("monte_carlo reports need trials >= 1")
            if self.stderr is None or self.stderr < 0:
                raise ValidationError("monte_carlo reports need stderr >= 0")


def iter_tree_paths(
    tree: DecisionTree, dist: TypeDistribution
) -> Iterator[tuple[tuple[tuple[str, str], ...], Scalar]]:
    """Yield every positive-probability root-leaf path with its probability."""

    def walk(node: DecisionTree, steps: tuple, prob: Scalar):
        if node.is_leaf:
            yield steps, prob
            return
        e = node.element
        for t, child in node.children.items():
            p = dist.prob(e, t)
            if p == 0:
                continue
            yield from walk(child, steps + ((e, t),), prob * p)

    yield from walk(tree, (), 1)


class _WorkMeter:
    __slots__ = ("used", "cap")

    def __init__(self, cap: int):
        self.used = 0
        self.cap = cap

    def spend(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.cap:
            raise ExactCapExceeded(
                f"exact evaluation exceeded the work cap of {self.cap}; use MC"
            )


def adap_exact(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    *,
    work_cap: int = DEFAULT_WORK_CAP,
    want_trace: bool = False,
) -> EvalReport:
    """Expected adaptive value, by root decomposition with contraction.

    At each node the probe's marginal value is added and the remaining
    subtree is evaluated against the valuation contracted by the revealed
    type; this equals the direct sum over root-leaf paths.
    """
    validate_tree(tree, universe)
    meter = _WorkMeter(work_cap)
    memo: dict[tuple[int, frozenset[str]], Scalar] = {}

    def rec(node: DecisionTree, fixed: frozenset[str]) -> Scalar:
        if node.is_leaf:
            return 0
        key = (id(node), fixed)
        got = memo.get(key)
        if got is not None:
            return got
        base = f(fixed)
        total: Scalar = 0
        for t, child in node.children.items():
            p = dist.prob(node.element, t)
            if p == 0:
                continue
            meter.spend()
            ext = fixed | {t}
            total = total + p * ((f(ext) - base) + rec(child, ext))
        memo[key] = total
        return total

    value = rec(tree, frozenset())
    trace = None
    if want_trace:
        trace = {}

        def collect(node: DecisionTree, fixed: frozenset[str], prefix: tuple):
            if node.is_leaf:
                return
            trace[prefix] = memo[(id(node), fixed)]
            for t, child in node.children.items():
                if dist.prob(node.element, t) == 0:
                    continue
                collect(child, fixed | {t}, prefix + ((node.element, t),))

        collect(tree, frozenset(), ())
    return EvalReport(value=value, mode="exact", trace=trace)


def adap_by_path_enumeration(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    *,
    work_cap: int = DEFAULT_WORK_CAP,
) -> Scalar:
    """Reference route for the adaptive value: sum over root-leaf paths."""
    validate_tree(tree, universe)
    meter = _WorkMeter(work_cap)
    total: Scalar = 0
    for steps, p in iter_tree_paths(tree, dist):
        meter.spend(max(1, len(steps)))
        total = total + p * f(frozenset(t for _, t in steps))
    return total


def alg_exact(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    *,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
    work_cap: int = DEFAULT_WORK_CAP,
) -> EvalReport:
    """Expected value of the random-walk non-adaptive strategy.

    Outer sum over virtual root-leaf paths weighted by path probability;
    inner sum over fresh independent types for the probed elements.
    """
    validate_tree(tree, universe)
    meter = _WorkMeter(work_cap)
    inner_memo: dict[frozenset[str], Scalar] = {}
    total: Scalar = 0
    for steps, p_path in iter_tree_paths(tree, dist):
        elems = tuple(e for e, _ in steps)
        key = frozenset(elems)
        inner = inner_memo.get(key)
        if inner is None:
            inner = 0
            for combo, q in iter_type_profiles(universe, dist, elems, cap=assignment_cap):
                meter.spend()
                inner = inner + q * f(frozenset(combo))
            inner_memo[key] = inner
        total = total + p_path * inner
    return EvalReport(value=total, mode="exact")


def greedy_interleaved_exact(
    tree: DecisionTree,
    family: IndependenceOracle,
    universe: Universe,
    dist: TypeDistribution,
    *,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
    work_cap: int = DEFAULT_WORK_CAP,
    want_trace: bool = False,
) -> EvalReport:
    """Expected greedy count over the union of true and virtual path types.

    Scans the path elements in root-to-leaf order; at each element the true
    type is considered before the virtual type. Non-loops get contracted and
    counted, loops are skipped; equal draws collapse to one occurrence. The
    optional trace reports the online value that only counts true-type
    selections while still contracting virtual types.
    """
    validate_tree(tree, universe)
    meter = _WorkMeter(work_cap)
    total: Scalar = 0
    online_total: Scalar = 0
    for steps, p_path in iter_tree_paths(tree, dist):
        elems = tuple(e for e, _ in steps)
        for combo, q in iter_type_profiles(universe, dist, elems, cap=assignment_cap):
            meter.spend()
            contracted: frozenset[str] = frozenset()
            count = 0
            online = 0
            for (e, virtual_t), true_t in zip(steps, combo):
                for is_true, t in ((True, true_t), (False, virtual_t)):
                    if t in contracted:
                        continue
                    ext = contracted | {t}
                    if family.is_independent(ext):
                        contracted = ext
                        count += 1
                        if is_true:
                            online += 1
            weight = p_path * q
            total = total + weight * count
            online_total = online_total + weight * online
    trace = {"online_value": online_total} if want_trace else None
    return EvalReport(value=total, mode="exact", trace=trace)


def _mc_collect(
    trials: int,
    workers: int,
    fill_block,
) -> np.ndarray:
    values = np.empty(trials, dtype=np.float64)
    blocks = range((trials + MC_BLOCK - 1) // MC_BLOCK)
    if workers <= 1:
        for b in blocks:
            fill_block(b, values)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: fill_block(b, values), blocks))
    return values


def _finish_mc(values: np.ndarray, seed: int) -> EvalReport:
    trials = len(values)
    value = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EvalReport(
        value=value, mode="monte_carlo", trials=trials, seed=seed, stderr=stderr
    )


def adap_mc(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> EvalReport:
    """Unbiased Monte Carlo estimate of the adaptive value."""
    validate_tree(tree, universe)
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    index = {e: i for i, e in enumerate(universe.elements)}

    def fill_block(b: int, values: np.ndarray) -> None:
        start = b * MC_BLOCK
        stop = min(trials, start + MC_BLOCK)
        rows = sample_type_profiles(
            universe, dist, RandomStream(seed, stream=0, counter=b), stop - start
        )
        for i, row in enumerate(rows):
            node = tree
            got: list[str] = []
            while not node.is_leaf:
                t = row[index[node.element]]
                got.append(t)
                node = node.children[t]
            values[start + i] = float(f(frozenset(got)))

    return _finish_mc(_mc_collect(trials, workers, fill_block), seed)


def alg_mc(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> EvalReport:
    """Unbiased Monte Carlo estimate of the random-walk non-adaptive value."""
    validate_tree(tree, universe)
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    index = {e: i for i, e in enumerate(universe.elements)}

    def fill_block(b: int, values: np.ndarray) -> None:
        start = b * MC_BLOCK
        stop = min(trials, start + MC_BLOCK)
        n = stop - start
        virtual = sample_type_profiles(
            universe, dist, RandomStream(seed, stream=0, counter=b), n
        )
        true = sample_type_profiles(
            universe, dist, RandomStream(seed, stream=1, counter=b), n
        )
        for i in range(n):
            vrow = virtual[i]
            trow = true[i]
            node = tree
            got: list[str] = []
            while not node.is_leaf:
                j = index[node.element]
                got.append(trow[j])
                node = node.children[vrow[j]]
            values[start + i] = float(f(frozenset(got)))

    return _finish_mc(_mc_collect(trials, workers, fill_block), seed)


def best_nonadaptive_exact(
    universe: Universe,
    dist: TypeDistribution,
    f: ValuationFunction,
    constraint: ConstraintOracle,
    max_len: int,
    *,
    sequence_cap: int = DEFAULT_SEQUENCE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> tuple[tuple[str, ...], Scalar]:
    """Exhaustive best fixed probing set under the constraint.

    Feasibility is a property of the sequence; value depends only on the
    probed set. Returns the lexicographically smallest maximizing sequence.
    """
    order = sorted(universe.elements)
    value_memo: dict[frozenset[str], Scalar] = {}

    def set_value(key: frozenset[str]) -> Scalar:
        got = value_memo.get(key)
        if got is None:
            elems = tuple(e for e in universe.elements if e in key)
            got = 0
            for combo, p in iter_type_profiles(universe, dist, elems, cap=assignment_cap):
                got = got + p * f(frozenset(combo))
            value_memo[key] = got
        return got

    best_seq: tuple[str, ...] = ()
    best_val: Scalar = 0
    expanded = 0

    def extend(prefix: tuple[str, ...], used: frozenset[str]) -> None:
        nonlocal best_seq, best_val, expanded
        if len(prefix) >= max_len:
            return
        for e in order:
            if e in used or not constraint.may_extend(prefix, e):
                continue
            expanded += 1
            if expanded > sequence_cap:
                raise ExactCapExceeded(
                    f"more than {sequence_cap} feasible sequences; "
                    "use an instance-specific closed form"
                )
            seq = prefix + (e,)
            v = set_value(frozenset(seq))
            if v > best_val:
                best_val = v
                best_seq = seq
            extend(seq, used | {e})

    extend((), frozenset())
    return best_seq, best_val


def submodular_gap_report(
    tree: DecisionTree,
    f: ValuationFunction,
    universe: Universe,
    dist: TypeDistribution,
    tol: float = 1e-9,
) -> dict:
    """Check the submodular half-gap inequality alg >= adap/2 on one tree."""
    adap = adap_exact(tree, f, universe, dist).value
    alg = alg_exact(tree, f, universe, dist).value
    return {
        "adap": adap,
        "alg": alg,
        "bound": "alg >= adap/2",
        "ok": alg >= adap / 2 - tol,
    }


def kextendible_chain_report(
    tree: DecisionTree,
    family: IndependenceOracle,
    k: int,
    universe: Universe,
    dist: TypeDistribution,
    *,
    valuation: ValuationFunction | None = None,
    tol: float = 1e-9,
) -> dict:
    """Check adap <= k*greedy and greedy <= 2*alg for an unweighted rank."""
    f = valuation if valuation is not None else weighted_rank(family, unit_weights(family))
    adap = adap_exact(tree, f, universe, dist).value
    greedy = greedy_interleaved_exact(tree, family, universe, dist).value
    alg = alg_exact(tree, f, universe, dist).value
    return {
        "adap": adap,
        "greedy": greedy,
        "alg": alg,
        "bound": "adap <= k*greedy and greedy <= 2*alg",
        "ok_k": adap <= k * greedy + tol,
        "ok_2": greedy <= 2 * alg + tol,
        "ok": adap <= k * greedy + tol and greedy <= 2 * alg + tol,
    }
