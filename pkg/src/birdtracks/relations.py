"""Primary reduction relations on three strands and their variants.

Each relation is a :class:`RewriteResult` that equals zero.  The e6 relation
reduces the sum of the three fourth-order trees sharing a lone output leg;
the e7 relation ties the second-order diagrams to first-order ones.
"""

from __future__ import annotations

import itertools

from .diagram import (Diagram, RewriteResult, apply_local_rewrites, bridge_orientation, compose, move_legs,
                      permutation, reflect, single, splice)
from .ratfunc import ONE, RationalFunc
from .symbols import from_lower, roster


def _apply(x: RewriteResult, fn) -> RewriteResult:
    out = RewriteResult()
    for d, c in x:
        out.extend(fn(d), c)
    return out


def relabel(x: RewriteResult, perm) -> RewriteResult:
    """Move the leg at boundary position ``t`` to position ``perm[t]``."""
    def one(d: Diagram) -> RewriteResult:
        d2, f = move_legs(d, list(perm), d.p)
        return RewriteResult() if d2 is None else single(d2, f)
    return _apply(x, one)


def mirror(x: RewriteResult) -> RewriteResult:
    return _apply(x, lambda d: single(reflect(d)))


def normalized(x: RewriteResult):
    """Hashable form of ``x`` up to an overall nonzero scalar (``None`` for zero)."""
    items = sorted(((d, c) for d, c in x if c), key=lambda t: str(t[0]))
    if not items:
        return None
    lead = items[0][1]
    return tuple((d, c / lead) for d, c in items)


def dedupe(rels):
    seen, out = set(), []
    for r in rels:
        key = normalized(r)
        if key is not None and key not in seen:
            seen.add(key)
            out.append(r)
    return out


# -- e6 ----------------------------------------------------------------------------

def e6_row_relation() -> RewriteResult:
    """``e11 + e12 + e13 - (eCA + eCB + eCC + eCJ)/(m+2)``."""
    R = roster("e6", 3)
    m = RationalFunc.var("m")
    lhs = R["e11"] + R["e12"] + R["e13"]
    rhs = (ONE / (m + 2)) * (R["eCA"] + R["eCB"] + R["eCC"] + R["eCJ"])
    return apply_local_rewrites(lhs - rhs)


def e6_variants() -> list[RewriteResult]:
    """All distinct images of the row relation under leg permutations and mirroring."""
    base = e6_row_relation()
    out = []
    for src in (base, mirror(base)):
        for pin in itertools.permutations((1, 2, 3)):
            for pout in itertools.permutations((1, 2, 3)):
                left = single(permutation("e6", pout))
                right = single(permutation("e6", pin))
                out.append(apply_local_rewrites(compose(compose(left, src), right)))
    return dedupe(out)


# -- e7 ----------------------------------------------------------------------------

def _second(pair_side, rest, bend=True):
    wiring = ([(("leg", q), (0, s)) for s, q in enumerate(pair_side)]
              + [(("leg", q), (1, s)) for s, q in enumerate(rest)] + [((0, 3), (1, 3))])
    return from_lower("e7", 3, ["d4", "d4"], wiring, bend)


def _first(quad, line, bend=True):
    wiring = [(("leg", q), (0, s)) for s, q in enumerate(quad)] + [(("leg", line[0]), ("leg", line[1]))]
    return from_lower("e7", 3, ["d4"], wiring, bend)


def brown_relation(pair, bend: bool = True) -> RewriteResult:
    """Quartic-invariant relation for the leg pair ``pair`` (lower form).

    Sum over the four ways of adding a third leg ``x`` to the pair on one
    vertex of a bridged pair (line oriented away from that vertex), minus
    three times the sum of single-vertex diagrams on four legs whose
    remaining line runs from a leg of the pair to one outside it.
    """
    a, b = pair
    others = [x for x in range(6) if x not in pair]
    out = RewriteResult()
    for x in others:
        side = (a, b, x)
        out = out + _second(side, [y for y in range(6) if y not in side], bend)
    for y in (a, b):
        for z in others:
            quad = [w for w in range(6) if w not in (y, z)]
            out = out - 3 * _first(quad, (y, z), bend)
    return apply_local_rewrites(out) if bend else out


def brown_base() -> RewriteResult:
    return brown_relation((0, 1))


def rotation(k: int):
    return [(t - k) % 6 for t in range(6)]


def _swap(i, j):
    perm = list(range(6))
    perm[i], perm[j] = j, i
    return perm


def _then(p, q):
    """Permutation ``q`` after ``p`` on positions."""
    return [q[p[t]] for t in range(6)]


E7_TRANSPOSITIONS = (list(range(6)), _swap(1, 2), _swap(5, 0), _then(_swap(1, 2), _swap(5, 0)))


def e7_variant_perms():
    """The 24 position maps: six rotations times four transposition choices."""
    return [_then(t, rotation(k)) for k in range(6) for t in E7_TRANSPOSITIONS]


def e7_variants() -> list[RewriteResult]:
    base = brown_base()
    return [apply_local_rewrites(relabel(base, perm)) for perm in e7_variant_perms()]


def e7_spliced(diagrams) -> list[RewriteResult]:
    """The relation glued in at every singly bridged vertex pair of each diagram.

    Products of relations with other diagrams only ever attach the relation
    to the rest through boundary-like contractions; splicing reaches every
    way a pair of vertices can sit inside a larger diagram.
    """
    lowers = [brown_relation(pair, bend=False) for pair in itertools.combinations(range(6), 2)]
    rows = []
    for d in diagrams:
        rank = d.rank
        nodes = [rank + k for k in range(len(d.vertices))]
        for u, w in itertools.combinations(nodes, 2):
            if bridge_orientation(d, u, w) is None:
                continue
            for rel in lowers:
                rows.append(apply_local_rewrites(splice(d, (u, w), rel)))
    return rows


def variants(family: str) -> list[RewriteResult]:
    if family == "e6":
        return e6_variants()
    if family == "e7":
        return e7_variants()
    return []
