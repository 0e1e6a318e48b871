"""Rational R-matrices on V x V, their spectral data, and exact Yang-Baxter checks.

All R-matrices are the polynomial-in-``u`` rescalings (up to a single
rational factor) used throughout: an overall scalar function of ``u``
cancels from both sides of the Yang-Baxter equation, so nothing is lost.
"""

from __future__ import annotations

from fractions import Fraction

import json
import time
from dataclasses import dataclass, field

from flint import fmpq, fmpq_mat

from .centralizer import AlgebraElement, CentralizerAlgebra, build_algebra, embed
from .diagram import RewriteResult, compose, leg_transform, move_legs, permutation, single
from .ratfunc import ONE, ZERO, RationalFunc, parse
from .symbols import roster


class SpectralMismatch(AssertionError):
    def __init__(self, index, message):
        super().__init__(f"projector {index}: {message}")
        self.index = index


class ProportionalityFailure(AssertionError):
    pass


u = RationalFunc.var("u")
v = RationalFunc.var("v")
m = RationalFunc.var("m")
n = RationalFunc.var("n")

# coefficients of the named two-strand symbols
R_TERMS = {
    "su": {"id": 2 * ONE, "P": -u},
    "so": {"id": 2 * ONE, "P": -u, "C": 2 * u / (n - 2 - u)},
    "sp": {"id": 2 * ONE, "P": -u, "C": 2 * u / (n + 2 - u)},
    "e6": {"id": 4 * ONE, "P": -u, "eBA": (4 * m + 8) * u / (2 * m - u)},
    # the C sign is the one forced by R P4 = f4 P4 with P4 = -C/n (C C = -n C)
    "e7": {"id": 2 * m + 4 - u, "P": u * (u - m - 1), "C": -u * (2 + u) / (2 * m + 2 - u), "eeBA": u / 3},
}

# V x Vbar matrix for e6
R_MIXED = {"suBC": ONE, "eBB": -4 * (m + 2) / (u - m), "suBD": 4 / (u - 3 * m)}


def _projectors(family: str, mixed: bool = False) -> dict[str, dict[str, RationalFunc]]:
    half = ONE / 2
    if mixed:
        return {
            "P1": {"suBC": (m + 2) / (m + 4), "suBD": -(m + 2) / ((m + 4) * (m + 1)), "eBB": 2 * (m + 2) / (m + 4)},
            "P2": {"suBC": 2 / (m + 4), "suBD": 2 / (3 * (m + 4)), "eBB": -2 * (m + 2) / (m + 4)},
            "P3": {"suBD": ONE / (3 * m + 3)},
        }
    if family == "su":
        return {"P+": {"id": half, "P": half}, "P-": {"id": half, "P": -half}}
    if family == "so":
        return {"P+": {"id": half, "P": half, "C": -ONE / n},
                "P-": {"id": half, "P": -half},
                "P0": {"C": ONE / n}}
    if family == "sp":
        return {"P+": {"id": half, "P": half},
                "P-": {"id": half, "P": -half, "C": ONE / n},
                "P0": {"C": -ONE / n}}
    if family == "e6":
        return {"P1": {"id": half, "P": half, "eBA": -ONE},
                "P2": {"id": half, "P": -half},
                "P3": {"eBA": ONE}}
    if family == "e7":
        k = ONE / (6 * (m + 4))
        return {"P1": {"id": 3 * (m + 3) * k, "P": 3 * (m + 3) * k, "eeBA": -k},
                "P2": {"id": half, "P": -half, "C": ONE / (6 * m + 8)},
                "P3": {"id": 3 * k, "P": 3 * k, "eeBA": k},
                "P4": {"C": -ONE / (6 * m + 8)}}
    raise ValueError(f"unknown family {family!r}")


def element_from(alg: CentralizerAlgebra, coeffs: dict) -> AlgebraElement:
    out = AlgebraElement(alg, {})
    for name, c in coeffs.items():
        out = out + RationalFunc.coerce(c) * alg.element(name)
    return out


def projectors(family: str, mixed: bool = False) -> dict[str, AlgebraElement]:
    alg = build_algebra(family, 2, mixed)
    return {k: element_from(alg, c) for k, c in _projectors(family, mixed).items()}


@dataclass
class RMatrix:
    family: str
    element: AlgebraElement
    spectral: list = field(default_factory=list)  # (name, f_i, P_i)

    def at(self, value) -> AlgebraElement:
        """Substitute the spectral parameter."""
        return self.element.subs({"u": value})

    def eigenvalue(self, name: str) -> RationalFunc:
        for nm, f, _ in self.spectral:
            if nm == name:
                return f
        raise KeyError(name)


def build_R(family, mixed: bool = False) -> RMatrix:
    family = getattr(family, "family", family)
    alg = build_algebra(family, 2, mixed)
    terms = R_MIXED if mixed else R_TERMS[family]
    r = RMatrix(family, element_from(alg, terms))
    r.spectral = _spectral(r.element, projectors(family, mixed))
    return r


def _spectral(R: AlgebraElement, projs: dict[str, AlgebraElement]):
    out = []
    for name, P in projs.items():
        RP = R * P
        k = min(P.coeffs)
        f = RP.coeffs.get(k, ZERO) / P.coeffs[k]
        out.append((name, f, P))
    return out


def verify_spectral(r: RMatrix) -> dict:
    """Assert ``R P_i = f_i P_i`` and ``sum f_i P_i = R``; report each ``f_i``."""
    total = AlgebraElement(r.element.algebra, {})
    report = {"series": r.family, "eigenvalues": {}}
    for name, f, P in r.spectral:
        if r.element * P != f * P:
            raise SpectralMismatch(name, "R P is not a multiple of P")
        total = total + f * P
        report["eigenvalues"][name] = str(f)
    if total != r.element:
        raise SpectralMismatch("sum", "eigen-expansion does not reproduce R")
    fs = [f for _, f, _ in r.spectral]
    report["ratios"] = [str(fs[i + 1] / fs[i]) for i in range(len(fs) - 1)]
    return report


def check_projector_suite(family: str, mixed: bool = False) -> dict:
    """Idempotence, orthogonality, completeness and traces of the projectors."""
    alg = build_algebra(family, 2, mixed)
    projs = projectors(family, mixed)
    names = list(projs)
    ok = True
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            prod = projs[a] * projs[b]
            want = projs[a] if i == j else AlgebraElement(alg, {})
            ok &= prod == want
    total = AlgebraElement(alg, {})
    for P in projs.values():
        total = total + P
    complete = total == alg.one
    traces = {k: alg.trace(P) for k, P in projs.items()}
    return {"series": family, "mixed": mixed, "orthogonal_idempotents": ok, "complete": complete,
            "traces": {k: str(t) for k, t in traces.items()}, "_traces": traces,
            "pass": ok and complete}


# -- Yang-Baxter ---------------------------------------------------------------------

@dataclass
class YbeReport:
    series: str
    residual: AlgebraElement
    per_order: list
    elapsed_ms: float

    @property
    def residual_zero(self) -> bool:
        return self.residual.is_zero()

    def to_dict(self) -> dict:
        return {"series": self.series, "residual_zero": self.residual_zero,
                "per_order": self.per_order, "elapsed_ms": round(self.elapsed_ms, 1)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def transcript(self) -> str:
        lines = [f"series {self.series}: Yang-Baxter residual over the pinned basis"]
        for row in self.per_order:
            lines.append(f"  order {row['order']}: {row['basis_terms']} basis symbols, "
                         f"LHS support {row['lhs_terms']}, residual terms {row['residual_terms']}")
        lines.append("  residual: " + ("0" if self.residual_zero else str(self.residual)))
        return "\n".join(lines)


def ybe_sides(family: str, scale=(ONE, ONE), r: RMatrix | None = None):
    """Both sides of the braid-form Yang-Baxter equation in the three-strand algebra.

    ``scale = (mu, lam)`` replaces R(u) by mu * R(lam * u).
    """
    r = r or build_R(family)
    alg3 = build_algebra(family, 3)
    mu, lam = (RationalFunc.coerce(s) for s in scale)
    R = r.element

    def at(x):
        return mu * R.subs({"u": lam * x})

    a12 = lambda x: embed(alg3, at(x), 12)
    a23 = lambda x: embed(alg3, at(x), 23)
    lhs = a12(u) * a23(u + v) * a12(v)
    rhs = a23(v) * a12(u + v) * a23(u)
    return alg3, lhs, rhs


def ybe_residual(family, scale=(ONE, ONE)) -> YbeReport:
    family = getattr(family, "family", family)
    t0 = time.perf_counter()
    alg3, lhs, rhs = ybe_sides(family, scale)
    res = lhs - rhs
    per = {}
    for i, d in enumerate(alg3.basis):
        row = per.setdefault(d.order, {"order": d.order, "basis_terms": 0, "lhs_terms": 0, "residual_terms": 0})
        row["basis_terms"] += 1
        row["lhs_terms"] += i in lhs.coeffs
        row["residual_terms"] += i in res.coeffs
    return YbeReport(family, res, [per[k] for k in sorted(per)], (time.perf_counter() - t0) * 1000)


# -- crossing ------------------------------------------------------------------------

def cross(x: AlgebraElement, target: CentralizerAlgebra) -> AlgebraElement:
    """Quarter turn of a two-strand element, reduced in ``target``.

    For e6 the turn takes V x V to in-strands (V, Vbar) and out-strands
    (Vbar, V); the outputs are then swapped so the result lives on V x Vbar.
    """
    turned = leg_transform(x.to_result(), "cross")
    if x.algebra.family == "e6" and not x.algebra.mixed:
        out = RewriteResult()
        for d, c in turned:
            out = out + compose(single(permutation("e6", (2, 1), d.sig_out)), single(d, c))
        turned = out
    return target.reduce(turned)


def crossing_check() -> dict:
    """Cross(R_VV(3m - u)) against the V x Vbar R-matrix; reports the scalar."""
    mixed = build_algebra("e6", 2, mixed=True)
    r_vv = build_R("e6")
    r_vb = build_R("e6", mixed=True)
    crossed = cross(r_vv.at(3 * m - u), mixed)
    target = r_vb.element
    k = min(target.coeffs)
    scalar = crossed.coeffs.get(k, ZERO) / target.coeffs[k]
    if not scalar or crossed != scalar * target:
        raise ProportionalityFailure("Cross(R_VV(3m-u)) is not proportional to R_VVbar(u)")
    suite = check_projector_suite("e6", mixed=True)
    spectral = verify_spectral(r_vb)
    return {"series": "e6", "scalar": str(scalar), "_scalar": scalar, "projectors": suite["pass"],
            "traces": suite["traces"], "eigenvalues": spectral["eigenvalues"], "pass": suite["pass"]}


# -- objj / objh ---------------------------------------------------------------------

def _nullspace_dim(rows: list[list], ncols: int) -> tuple[int, list]:
    """Dimension and a basis vector of the null space of an integer matrix."""
    M = fmpq_mat(len(rows), ncols, [fmpq(x.numerator, x.denominator) if hasattr(x, "denominator") else x
                                    for r in rows for x in r])
    rref, rank = M.rref()
    pivots = []
    r = 0
    for c in range(ncols):
        if r < rank and rref[r, c] != 0:
            pivots.append(c)
            r += 1
    free = [c for c in range(ncols) if c not in pivots]
    vec = None
    if free:
        f = free[0]
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for i, c in enumerate(pivots):
            q = -rref[i, f]
            vec[c] = Fraction(int(q.p), int(q.q))
    return ncols - rank, vec


def _action_matrix(diagrams, fn):
    """Matrix of a signed relabelling on the span of ``diagrams`` (columns = images)."""
    idx = {d: i for i, d in enumerate(diagrams)}
    k = len(diagrams)
    M = [[0] * k for _ in range(k)]
    for j, d in enumerate(diagrams):
        for d2, c in fn(d):
            M[idx[d2]][j] += c.evaluate({})
    return M


def _eigen_rows(M, lam):
    k = len(M)
    return [[M[i][j] - (lam if i == j else 0) for j in range(k)] for i in range(k)]


def _proportional(vec, diagrams, combo: RewriteResult) -> bool:
    coeffs = dict(combo)
    ratios = set()
    for x, d in zip(vec, diagrams):
        c = coeffs.get(d)
        if (x != 0) != bool(c):
            return False
        if c:
            ratios.add(c.evaluate({}) / x)
    return len(ratios) == 1


def objj_check() -> dict:
    """T1(objj) = T2(objj) = -objj, and the common -1 eigenspace on fourth-order trees is a line."""
    R = roster("e6", 3)
    objj = R["objj"]
    t1 = leg_transform(objj, "T1") + objj
    t2 = leg_transform(objj, "T2") + objj
    trees = sorted({d for i in (1, 2, 3) for j in (1, 2, 3) for d, _ in R[f"e{i}{j}"]}, key=str)
    M1 = _action_matrix(trees, lambda d: leg_transform(single(d), "T1"))
    M2 = _action_matrix(trees, lambda d: leg_transform(single(d), "T2"))
    dim, vec = _nullspace_dim(_eigen_rows(M1, -1) + _eigen_rows(M2, -1), len(trees))
    proportional = dim == 1 and _proportional(vec, trees, objj)
    return {"T1": not t1, "T2": not t2, "eigenspace_dim": dim, "proportional": proportional,
            "pass": (not t1) and (not t2) and dim == 1 and proportional}


def _second_order_e7():
    R = roster("e7", 3)
    return sorted({d for nm, el in R.items() if nm.startswith("h") for d, _ in el}, key=str)


def objh_check() -> dict:
    """R60(objh) = objh, and the rotation-invariant second-order span is a line."""
    R = roster("e7", 3)
    objh = R["objh"]
    rot = leg_transform(objh, "R60") - objh
    hs = _second_order_e7()
    M = _action_matrix(hs, lambda d: leg_transform(single(d), "R60"))
    dim, vec = _nullspace_dim(_eigen_rows(M, 1), len(hs))
    proportional = dim == 1 and _proportional(vec, hs, objh)
    return {"R60": not rot, "eigenspace_dim": dim, "proportional": proportional,
            "pass": (not rot) and dim == 1 and proportional}


def objj_objh_checks() -> dict:
    j, h = objj_check(), objh_check()
    return {"objj": j, "objh": h, "pass": j["pass"] and h["pass"]}
