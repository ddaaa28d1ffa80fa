"""Independent brute-force oracles the tests check the library against.

These deliberately avoid the library's evaluator code paths: everything is
computed by direct enumeration over full type vectors or subsets.
"""

import itertools

from smplab import enumerate_assignments
from smplab.strategy import random_walk_path


def powerset(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from (frozenset(c) for c in itertools.combinations(items, r))


def brute_max_weight_independent(is_independent, types, weights=None):
    """Max weight over ALL subsets, testing independence from scratch."""
    best = 0
    for sub in powerset(types):
        if not is_independent(sub):
            continue
        w = len(sub) if weights is None else sum(weights.get(t, 0) for t in sub)
        if w > best:
            best = w
    return best


def brute_max_matching(edges_by_type, types):
    """Max cardinality matching by subset enumeration."""

    def is_matching(sub):
        seen = set()
        for t in sub:
            u, v = edges_by_type[t]
            if u in seen or v in seen:
                return False
            seen.update((u, v))
        return True

    return max(len(s) for s in powerset(types) if is_matching(s))


def brute_adap(tree, f, universe, dist):
    """Adaptive value by full enumeration of total vectors plus tree walks."""
    total = 0
    for vec, p in enumerate_assignments(universe, dist, set(universe.elements)):
        path = random_walk_path(tree, vec)
        total = total + p * f(frozenset(path.types))
    return total


def brute_alg(tree, f, universe, dist):
    """Random-walk value by joint enumeration of virtual and true vectors."""
    total = 0
    for vx, px in enumerate_assignments(universe, dist, set(universe.elements)):
        path = random_walk_path(tree, vx)
        elems = path.elements
        for vt, pt in enumerate_assignments(universe, dist, set(universe.elements)):
            total = total + px * pt * f(frozenset(vt[e] for e in elems))
    return total


def brute_greedy_interleaved(tree, family, universe, dist):
    """Greedy count over joint enumeration, scanning true-then-virtual."""
    total = 0
    for vx, px in enumerate_assignments(universe, dist, set(universe.elements)):
        path = random_walk_path(tree, vx)
        for vt, pt in enumerate_assignments(universe, dist, set(universe.elements)):
            chosen = []
            for e in path.elements:
                for t in (vt[e], vx[e]):
                    if t in chosen:
                        continue
                    if family.is_independent(frozenset(chosen) | {t}):
                        chosen.append(t)
            total = total + px * pt * len(chosen)
    return total


def brute_best_nonadaptive(universe, dist, f, constraint, max_len):
    """Best fixed probing set by explicit sequence enumeration."""
    best = ((), 0)
    seen_sets = {}

    def set_value(elems):
        key = frozenset(elems)
        if key not in seen_sets:
            total = 0
            for vec, p in enumerate_assignments(universe, dist, key):
                total = total + p * f(vec.types)
            seen_sets[key] = total
        return seen_sets[key]

    def walk(prefix):
        nonlocal best
        for e in sorted(universe.elements):
            if e in prefix or not constraint.may_extend(prefix, e):
                continue
            seq = prefix + (e,)
            v = set_value(seq)
            if v > best[1]:
                best = (seq, v)
            if len(seq) < max_len:
                walk(seq)

    walk(())
    return best
