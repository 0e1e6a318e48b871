"""Centralizer algebras End_g(V^p) for p = 2, 3 as explicit quotient algebras.

A basis of named diagrams is pinned per family.  Off-basis diagrams are
expressed over it through a reduction table obtained by exact row reduction
of the primary relations, their leg-permutation variants and their products
with low-order diagrams.  Products of high-order basis elements whose naive
concatenation would leave the range of the table are computed through a
factorization of the right factor into low-order diagrams.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from functools import lru_cache

from .diagram import (Diagram, DiagramError, RewriteResult, apply_local_rewrites, close_trace, compose,
                      deserialize, identity, serialize, signed, single, sort_key, tensor)
from .ratfunc import ONE, ZERO, RationalFunc, parse
from .relations import e7_spliced, variants
from .symbols import _pairings, quartic3, roster

SCHEMA = "birdtrack-centralizer/1"


class NotReducible(DiagramError):
    pass


class UnsupportedSignature(ValueError):
    pass


class AlgebraMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Series:
    family: str

    @property
    def parameterization(self) -> str:
        return {"e6": "n=3m+3", "e7": "n=6m+8"}.get(self.family, "n free")

    @property
    def oriented(self) -> bool:
        return self.family in ("su", "e6")

    @property
    def symplectic(self) -> bool:
        return signed(self.family)


# -- exact row reduction ---------------------------------------------------------------

class RowReducer:
    """Incremental reduced row echelon form over Q(m, u, v).

    Rows are dicts ``column -> coefficient``; ``key`` orders columns, and the
    pivot of each row is its smallest column under that order.
    """

    def __init__(self, key):
        self.key = key
        self.pivots: dict = {}

    def add(self, row: dict) -> bool:
        """Insert a row; returns whether it raised the rank."""
        row = {c: v for c, v in row.items() if v}
        # pivot rows carry no other pivot columns, so one pass clears them all
        for col in [c for c in row if c in self.pivots]:
            coef = row.get(col)
            if coef:
                for c2, v2 in self.pivots[col].items():
                    row[c2] = row.get(c2, ZERO) - coef * v2
        row = {c: v for c, v in row.items() if v}
        if not row:
            return False
        piv = min(row, key=self.key)
        inv = ONE / row[piv]
        row = {c: v * inv for c, v in row.items()}
        for other in self.pivots.values():
            coef = other.get(piv)
            if coef:
                for c2, v2 in row.items():
                    other[c2] = other.get(c2, ZERO) - coef * v2
                for c2 in [c for c, v in other.items() if not v]:
                    del other[c2]
        self.pivots[piv] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rank_of(rows, key=sort_key) -> int:
    rr = RowReducer(key)
    for r in rows:
        rr.add(dict(r))
    return rr.rank


# -- elements ----------------------------------------------------------------------------

class AlgebraElement:
    """Linear combination of basis elements with rational-function coefficients."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: "CentralizerAlgebra", coeffs=None):
        self.algebra = algebra
        self.coeffs = {i: RationalFunc.coerce(c) for i, c in (coeffs or {}).items() if c}

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.algebra is not self.algebra:
            raise AlgebraMismatch("elements belong to different algebras")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, ZERO) + c
        return AlgebraElement(self.algebra, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return AlgebraElement(self.algebra, {i: -c for i, c in self.coeffs.items()})

    def __rmul__(self, scalar):
        s = RationalFunc.coerce(scalar)
        return AlgebraElement(self.algebra, {i: s * c for i, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return self.algebra.multiply(self, other)
        return self.__rmul__(other)

    def __matmul__(self, other):
        return self.algebra.multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra is other.algebra and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted((i, str(c)) for i, c in self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, name_or_index) -> RationalFunc:
        i = name_or_index if isinstance(name_or_index, int) else self.algebra.names.index(name_or_index)
        return self.coeffs.get(i, ZERO)

    def subs(self, mapping) -> "AlgebraElement":
        return AlgebraElement(self.algebra, {i: c.subs(mapping) for i, c in self.coeffs.items()})

    def to_result(self) -> RewriteResult:
        out = RewriteResult()
        for i, c in self.coeffs.items():
            out.add(self.algebra.basis[i], c * self.algebra.signs[i])
        return out

    def items(self):
        return [(self.algebra.names[i], self.coeffs[i]) for i in sorted(self.coeffs)]

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for name, c in self.items():
            parts.append(f"({c})*{name}" if c != ONE else name)
        return " + ".join(parts)

    __repr__ = __str__


# -- algebra -----------------------------------------------------------------------------

def _order(d: Diagram) -> int:
    return d.order


class CentralizerAlgebra:
    """Quotient diagram algebra with a pinned, named basis."""

    def __init__(self, family: str, p: int, mixed: bool, named_basis, relation_rows, reducible_order):
        self.series = Series(family)
        self.family = family
        self.p = p
        self.mixed = mixed
        self.names = [nm for nm, _, _ in named_basis]
        self.basis = [d for _, d, _ in named_basis]
        self.signs = [s for _, _, s in named_basis]
        self.index = {d: i for i, d in enumerate(self.basis)}
        self.reducible_order = reducible_order
        self.table: dict[Diagram, dict[int, RationalFunc]] = {}
        self.relation_variants = 0
        self.variant_rank = 0
        self.relation_rank = 0
        self._products: dict[tuple[int, int], AlgebraElement] = {}
        self._factors = None
        self._build_table(relation_rows)
        one = identity(family, self.signature[0])
        self.one = self.reduce(single(one))

    # -- construction --------------------------------------------------------------

    @property
    def signature(self):
        d = self.basis[0]
        return d.sig_in, d.sig_out

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _build_table(self, rows):
        basis = set(self.basis)

        def key(d):
            return (d in basis, -d.order, sort_key(d))

        rr = RowReducer(key)
        for row in rows:
            rr.add({d: c for d, c in row})
        self.relation_rank = rr.rank
        for piv, row in rr.pivots.items():
            if piv in basis:
                raise DiagramError(f"relations make basis element {self.names[self.index[piv]]} dependent")
            if any(c != piv and c not in basis for c in row):
                continue
            self.table[piv] = {self.index[c]: -v * self.signs[self.index[c]] for c, v in row.items() if c != piv}

    def _lookup(self, d: Diagram) -> dict[int, RationalFunc]:
        i = self.index.get(d)
        if i is not None:
            return {i: RationalFunc.coerce(self.signs[i])}
        hit = self.table.get(d)
        if hit is None:
            raise NotReducible(f"no reduction for order-{d.order} diagram {serialize(d)}")
        return hit

    # -- operations -----------------------------------------------------------------

    def reduce(self, x) -> AlgebraElement:
        """Express a diagram combination over the basis."""
        if isinstance(x, AlgebraElement):
            if x.algebra is not self:
                raise AlgebraMismatch("element from another algebra")
            return x
        items = single(x) if isinstance(x, Diagram) else x
        out: dict[int, RationalFunc] = {}
        for d, c in apply_local_rewrites(items):
            if (d.sig_in, d.sig_out) != self.signature:
                raise AlgebraMismatch("diagram signature differs from the algebra's")
            for i, v in self._lookup(d).items():
                out[i] = out.get(i, ZERO) + c * v
        return AlgebraElement(self, out)

    def element(self, name: str) -> AlgebraElement:
        if name in self.names:
            return AlgebraElement(self, {self.names.index(name): ONE})
        ros = roster(self.family, self.p, self.mixed)
        if name not in ros:
            raise KeyError(name)
        return self.reduce(ros[name])

    def basis_element(self, i: int) -> AlgebraElement:
        return AlgebraElement(self, {i: ONE})

    def _basis_product(self, i: int, j: int) -> AlgebraElement:
        key = (i, j)
        hit = self._products.get(key)
        if hit is not None:
            return hit
        bi, bj = self.basis[i], self.basis[j]
        sign = self.signs[i] * self.signs[j]
        if self.reducible_order is None or bi.order + bj.order <= self.reducible_order:
            res = sign * self.reduce(compose(single(bi), single(bj)))
        else:
            res = self._factored_product(i, j)
        self._products[key] = res
        return res

    def _low_order(self):
        top = max(d.order for d in self.basis)
        return self.reducible_order - top

    def factorization(self):
        """Express each high-order basis element through products of low-order named diagrams.

        Returns ``{j: (coef_list, low_part)}`` with
        ``b_j = sum_k coef_k * (x_k y_k) - low_part``, every ``x_k``,
        ``y_k`` of order at most ``reducible_order - top order``.
        """
        if self._factors is not None:
            return self._factors
        limit = self._low_order()
        high = [i for i, d in enumerate(self.basis) if d.order > limit]
        ros = roster(self.family, self.p, self.mixed)
        small = []
        seen = set()
        for nm, el in ros.items():
            if len(el) != 1:
                continue
            (d, c), = el
            if d.order <= limit and d.order > 0 and d not in seen:
                seen.add(d)
                small.append((nm, d))
        high_set = set(high)
        cols = {h: k for k, h in enumerate(high)}
        rr = RowReducer(lambda c: (0, cols[c]) if isinstance(c, int) else (1, c))
        chosen = []
        for (nx, x), (ny, y) in ((a, b) for a in small for b in small):
            prod = self.reduce(compose(single(x), single(y)))
            hi = {h: prod.coeffs[h] for h in prod.coeffs if h in high_set}
            if not hi:
                continue
            tag = ("pair", len(chosen))
            if rr.add({**hi, tag: -ONE}):
                chosen.append((x, y, prod))
            if rr.rank == len(high) and all(h in rr.pivots for h in high):
                break
        if not all(h in rr.pivots for h in high):
            raise NotReducible("high-order basis elements do not factor through low-order products")
        factors = {}
        for h in high:
            row = rr.pivots[h]
            # the pivot row reads b_h + sum_k v_k (x_k y_k - low_k) = 0
            combo = []
            low = AlgebraElement(self, {})
            for c, v in row.items():
                if c == h:
                    continue
                if isinstance(c, int):
                    raise NotReducible("factorization left a free high-order column")
                k = c[1]
                x, y, prod = chosen[k]
                coef = -v
                combo.append((coef, x, y))
                lowpart = {i: cc for i, cc in prod.coeffs.items() if i not in high_set}
                low = low + coef * AlgebraElement(self, lowpart)
            factors[h] = (combo, low)
        self._factors = factors
        return factors

    def _factored_product(self, i: int, j: int) -> AlgebraElement:
        combo, low = self.factorization()[j]
        bi = self.basis_element(i)
        out = AlgebraElement(self, {})
        for coef, x, y in combo:
            bx = self.reduce(compose(single(self.basis[i]), single(x))) * RationalFunc.coerce(self.signs[i])
            bxy = self._times_diagram(bx, y)
            out = out + coef * bxy
        return out - self.multiply(bi, low)

    def _times_diagram(self, a: AlgebraElement, y: Diagram) -> AlgebraElement:
        out = AlgebraElement(self, {})
        for i, c in a.coeffs.items():
            out = out + (c * self.signs[i]) * self.reduce(compose(single(self.basis[i]), single(y)))
        return out

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        """``a`` after ``b`` (concatenation, then reduction)."""
        if a.algebra is not self or b.algebra is not self:
            raise AlgebraMismatch("elements belong to different algebras")
        out: dict[int, RationalFunc] = {}
        for i, ca in a.coeffs.items():
            for j, cb in b.coeffs.items():
                cc = ca * cb
                for k, v in self._basis_product(i, j).coeffs.items():
                    out[k] = out.get(k, ZERO) + cc * v
        return AlgebraElement(self, out)

    @lru_cache(maxsize=None)
    def _basis_trace(self, i: int) -> RationalFunc:
        return close_trace(self.basis[i]) * self.signs[i]

    def trace(self, a: AlgebraElement) -> RationalFunc:
        total = ZERO
        for i, c in a.coeffs.items():
            total = total + c * self._basis_trace(i)
        return total

    def structure_constants(self):
        """``table[i][j]`` is the product ``b_i b_j`` as an :class:`AlgebraElement`."""
        return [[self._basis_product(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def constants_at(self, point) -> list[list[list]]:
        """Structure constants of the raw basis diagrams, evaluated at ``point``.

        Entry ``[i][j][k]`` is the coefficient of diagram ``k`` in diagram
        ``i`` times diagram ``j`` (basis signs undone).
        """
        out = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                el = self._basis_product(i, j)
                s = self.signs[i] * self.signs[j]
                row.append([s * self.signs[k] * el.coeffs[k].evaluate(point) if k in el.coeffs else 0
                            for k in range(self.dim)])
            out.append(row)
        return out

    def to_json(self, products: bool = False) -> str:
        data = {
            "schema": SCHEMA,
            "family": self.family,
            "strands": self.p,
            "mixed": self.mixed,
            "parameterization": self.series.parameterization,
            "basis": [{"name": nm, "sign": s, "diagram": serialize(d), "order": d.order}
                      for nm, d, s in zip(self.names, self.basis, self.signs)],
            "relation_variants": self.relation_variants,
            "variant_rank": self.variant_rank,
            "reduction_table": [
                {"diagram": serialize(d), "value": {self.names[i]: str(c) for i, c in sorted(row.items())}}
                for d, row in sorted(self.table.items(), key=lambda t: sort_key(t[0]))],
        }
        if products:
            data["structure_constants"] = [
                [{self.names[k]: str(c) for k, c in sorted(el.coeffs.items())} for el in row]
                for row in self.structure_constants()]
        return json.dumps(data, indent=1, sort_keys=False)


def embed(algebra3: CentralizerAlgebra, a2: AlgebraElement, slot) -> AlgebraElement:
    """Tensor a two-strand element with an identity strand (slot 12 or 23)."""
    alg2 = a2.algebra
    if alg2.p != 2 or algebra3.p != 3 or alg2.family != algebra3.family:
        raise AlgebraMismatch("embed needs a two-strand element of the same family")
    ident = identity(alg2.family, ("V",))
    out = RewriteResult()
    for d, c in a2.to_result():
        t = tensor(d, ident) if str(slot) == "12" else tensor(ident, d)
        out.add(t, c)
    return algebra3.reduce(out)


# -- building ----------------------------------------------------------------------------

PINNED = {
    ("e6", 3): ["e11", "e12", "e21", "e22"],
    # four first-row splits and one consecutive split
    ("e7", 3): ["h013", "h035", "h014", "h034", "h012"],
}

SUPPORTED = {("su", 2), ("su", 3), ("so", 2), ("so", 3), ("sp", 2), ("sp", 3),
             ("e6", 2), ("e6", 3), ("e7", 2), ("e7", 3)}


def _named_basis(family: str, p: int, mixed: bool):
    ros = roster(family, p, mixed)
    pinned = set(PINNED.get((family, p), []))
    top = {("e6", 3): 4, ("e7", 3): 2}.get((family, p))
    out, seen = [], set()
    for nm, el in ros.items():
        if len(el) != 1:
            continue
        (d, c), = el
        if d in seen:
            continue
        if top is not None and d.order >= top and nm not in pinned:
            continue
        seen.add(d)
        out.append((nm, d, 1 if c == ONE else -1))
    out.sort(key=lambda t: (t[1].order, ros_index(ros, t[0])))
    return out


def ros_index(ros, name):
    return list(ros).index(name)


def _closure_rows(family: str, base):
    """Relations plus their products with low-order diagrams on either side."""
    ros = roster(family, 3)
    lift = {"e6": 2, "e7": 1}[family]
    small, seen = [], set()
    for el in ros.values():
        if len(el) != 1:
            continue
        (d, _), = el
        if d.order == lift and d not in seen:
            seen.add(d)
            small.append(d)
    rows = list(base)
    for rel in base:
        for d in small:
            rows.append(apply_local_rewrites(compose(single(d), rel)))
            rows.append(apply_local_rewrites(compose(rel, single(d))))
    if family == "e7":
        triangles = []
        for pairs in _pairings(list(range(6))):
            (d, _), = quartic3("e7", pairs)
            triangles.append(d)
        rows += e7_spliced(triangles)
    return rows


def build_algebra(family, p: int = 3, mixed: bool = False) -> CentralizerAlgebra:
    """Build the centralizer algebra of ``family`` on ``p`` strands.

    ``mixed=True`` selects the e6 algebra on V x Vbar (two strands only).
    Results are cached, so equal arguments give the same object.
    """
    if isinstance(family, Series):
        family = family.family
    return _build_algebra(family, int(p), bool(mixed))


@lru_cache(maxsize=None)
def _build_algebra(family: str, p: int, mixed: bool) -> CentralizerAlgebra:
    if mixed and (family, p) != ("e6", 2):
        raise UnsupportedSignature("mixed strands are supported for e6 on two strands only")
    if (family, p) not in SUPPORTED:
        raise UnsupportedSignature(f"unsupported family/strand count {family}/{p}")
    named = _named_basis(family, p, mixed)
    rows, base = [], []
    reducible = None
    if p == 3 and family in ("e6", "e7"):
        base = variants(family)
        rows = _closure_rows(family, _independent(base))
        reducible = {"e6": 6, "e7": 3}[family]
    alg = CentralizerAlgebra(family, p, mixed, named, rows, reducible)
    alg.relation_variants = len(base)
    alg.variant_rank = rank_of([dict(r) for r in base]) if base else 0
    return alg


def _independent(rels):
    rr = RowReducer(sort_key)
    out = []
    for r in rels:
        if rr.add(dict(r)):
            out.append(r)
    return out


def load_json(text: str) -> dict:
    """Parse a serialized algebra back into plain data with live diagrams."""
    data = json.loads(text)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"expected schema {SCHEMA}")
    for entry in data["basis"]:
        entry["diagram"], _ = deserialize(entry["diagram"])
    for entry in data["reduction_table"]:
        entry["diagram"], _ = deserialize(entry["diagram"])
        entry["value"] = {k: parse(v) for k, v in entry["value"].items()}
    return data


def timed_build(family, p=3, mixed=False):
    t0 = time.perf_counter()
    alg = build_algebra(family, p, mixed)
    return alg, time.perf_counter() - t0
