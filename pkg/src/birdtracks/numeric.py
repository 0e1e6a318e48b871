"""Explicit tensor realizations used as an independent numeric oracle.

Diagrams are evaluated by plain index contraction: a line is the identity,
a symplectic line oriented ``a -> b`` is ``J[a, b]``, and vertices are the
concrete invariant tensors built here from the division algebras.  Nothing
in this module uses the rewrite rules of :mod:`birdtracks.diagram`.

Axis order of an evaluated diagram is ``(in_1, ..., in_p, out_1, ..., out_p)``;
:func:`as_operator` reshapes it to a matrix acting on column vectors.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import flint
import numpy as np

from .diagram import Diagram, RewriteResult, single, signed
from .ratfunc import PoleAtPoint, RationalFunc, rf_eval


class UnsupportedM(ValueError):
    pass


class NormalizationFailure(RuntimeError):
    pass


# -- division algebras --------------------------------------------------------------

def _cd_conj(x):
    if len(x) == 1:
        return x.copy()
    h = len(x) // 2
    return np.concatenate([_cd_conj(x[:h]), -x[h:]])


def _cd_mul(x, y):
    # Cayley-Dickson doubling: (a, b)(c, d) = (ac - d*b, da + bc*)
    if len(x) == 1:
        return x * y
    h = len(x) // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    return np.concatenate([_cd_mul(a, c) - _cd_mul(_cd_conj(d), b),
                           _cd_mul(d, a) + _cd_mul(b, _cd_conj(c))])


@dataclass(frozen=True)
class DivisionAlgebra:
    """Real division algebra of dimension m with basis e_0 = 1, e_1, ..., e_{m-1}.

    ``table[i, j, k]`` is the coefficient of ``e_k`` in ``e_i e_j``; basis
    element ``e_{h+i}`` of the doubled algebra is ``(0, e_i)``.
    """

    m: int
    table: np.ndarray
    conj_signs: np.ndarray

    def mul(self, x, y):
        return np.einsum("...i,...j,ijk->...k", x, y, self.table)

    def conj(self, x):
        return x * self.conj_signs

    def norm2(self, x):
        return np.sum(x * x, axis=-1)


def build_division_algebra(m: int) -> DivisionAlgebra:
    if m not in (1, 2, 4, 8):
        raise UnsupportedM(f"no real division algebra of dimension {m}")
    eye = np.eye(m)
    table = np.zeros((m, m, m))
    for i in range(m):
        for j in range(m):
            table[i, j] = _cd_mul(eye[i], eye[j])
    return DivisionAlgebra(m, table, _cd_conj(np.ones(m)))


# -- invariant tensors --------------------------------------------------------------

@dataclass
class Realization:
    """Concrete tensors for one family at one value of the parameters."""

    family: str
    n: int
    m: int | None = None
    tensors: dict = field(default_factory=dict)
    exact: bool = False

    def point(self, **extra) -> dict:
        pt = {"n": self.n}
        if self.m is not None:
            pt["m"] = self.m
        pt.update(extra)
        return pt


def _jordan_det(alg: DivisionAlgebra, v: np.ndarray) -> np.ndarray:
    """Determinant of hermitian 3x3 matrices given in orthonormal coordinates.

    Coordinates are ``(a, b, c, x, y, z)`` with ``x`` the (2,3) entry, ``y``
    the (3,1) entry and ``z`` the (1,2) entry, each off-diagonal block
    scaled by ``sqrt(2)`` so that the trace form is the standard inner product.
    """
    m = alg.m
    a, b, c = v[..., 0], v[..., 1], v[..., 2]
    s = 1 / math.sqrt(2)
    x = v[..., 3:3 + m] * s
    y = v[..., 3 + m:3 + 2 * m] * s
    z = v[..., 3 + 2 * m:3 + 3 * m] * s
    xyz = alg.mul(alg.mul(x, y), z)[..., 0]
    return a * b * c + 2 * xyz - a * alg.norm2(x) - b * alg.norm2(y) - c * alg.norm2(z)


def cubic_raw(m: int) -> np.ndarray:
    """Full polarization of the Jordan determinant: ``d(X, X, X) = 6 det X``."""
    alg = build_division_algebra(m)
    n = 3 * m + 3
    e = np.eye(n)
    det = lambda v: _jordan_det(alg, v)
    A = e[:, None, None, :]
    B = e[None, :, None, :]
    C = e[None, None, :, :]
    return (det(A + B + C) - det(A + B) - det(A + C) - det(B + C)
            + det(A) + det(B) + det(C))


def _check_symmetric(t, tol, what):
    for perm in itertools.permutations(range(t.ndim)):
        if np.abs(t - t.transpose(perm)).max() > tol:
            raise NormalizationFailure(f"{what} is not totally symmetric")


def build_cubic(m: int) -> np.ndarray:
    """Cubic invariant on V (dim 3m+3), normalised so that sum_ef d_aef d_bef = delta_ab.

    The same real array serves as ``d3`` and ``d3bar``; with that choice the
    d-dbar pair is an idempotent on V x V.
    """
    if m not in (1, 2, 4, 8):
        raise UnsupportedM(f"m must be 1, 2, 4 or 8, got {m}")
    d = cubic_raw(m)
    _check_symmetric(d, 1e-12, "polarized determinant")
    bubble = np.einsum("aef,bef->ab", d, d)
    c = bubble[0, 0]
    if c <= 0 or np.abs(bubble - c * np.eye(len(d))).max() > 1e-10 * c:
        raise NormalizationFailure("contracted cubic form is not proportional to the identity")
    return d / math.sqrt(c)


def cubic_exact_m1():
    """Exact cubic pair at m = 1 over Q on the basis E11, E22, E33, E23+E32, E31+E13, E12+E21.

    That basis is orthogonal but not orthonormal (metric diag(1,1,1,2,2,2)),
    so the lower-index tensor ``d`` and the upper-index ``dbar`` differ;
    they are paired by plain index contraction.
    """
    n = 6

    def det(v):
        a, b, c, x, y, z = v
        return a * b * c + 2 * x * y * z - a * x * x - b * y * y - c * z * z

    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    add = lambda *vs: [sum(col, Fraction(0)) for col in zip(*vs)]
    raw = np.empty((n, n, n), dtype=object)
    for i, j, k in itertools.product(range(n), repeat=3):
        A, B, C = e[i], e[j], e[k]
        raw[i, j, k] = (det(add(A, B, C)) - det(add(A, B)) - det(add(A, C)) - det(add(B, C))
                        + det(A) + det(B) + det(C))
    ginv = [Fraction(1)] * 3 + [Fraction(1, 2)] * 3
    up = np.empty_like(raw)
    for i, j, k in itertools.product(range(n), repeat=3):
        up[i, j, k] = raw[i, j, k] * ginv[i] * ginv[j] * ginv[k]
    bubble = np.einsum("aef,bef->ab", raw, up)
    c = bubble[0, 0]
    for i in range(n):
        for j in range(n):
            if bubble[i, j] != (c if i == j else 0):
                raise NormalizationFailure("exact bubble is not proportional to the identity")
    low = np.empty_like(raw)
    for idx in itertools.product(range(n), repeat=3):
        low[idx] = raw[idx] / c
    return low, up


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def build_quartic_a5() -> tuple[np.ndarray, np.ndarray]:
    """Quartic invariant and symplectic form on V = Lambda^3 R^6 (n = 20).

    ``J`` pairs complementary triples through the 6-form.  For 3-forms
    ``rho``, ``sigma`` let ``K(rho, sigma)^x_y = eps^{x c1..c5} rho_{y c1 c2} sigma_{c3 c4 c5}``;
    the quartic is ``tr K(rho, sigma) K(tau, phi)`` symmetrised over its four
    arguments and rescaled by ``-1/24``, which gives the double-bridge
    coefficients 6(m+2) = 24 and 18(m+3) = 90 at m = 2.
    """
    triples = list(itertools.combinations(range(6), 3))
    index = {t: i for i, t in enumerate(triples)}
    n = len(triples)
    J = np.zeros((n, n))
    for a, t in enumerate(triples):
        comp = tuple(sorted(set(range(6)) - set(t)))
        J[a, index[comp]] = _perm_sign(t + comp)
    rho = np.zeros((n, 6, 6, 6))
    for a, t in enumerate(triples):
        for p in itertools.permutations(range(3)):
            rho[a][tuple(t[i] for i in p)] = _perm_sign(p)
    eps = np.zeros((6,) * 6)
    for p in itertools.permutations(range(6)):
        eps[p] = _perm_sign(p)
    tmp = np.einsum("xcdefg,befg->xcdb", eps, rho)
    K = np.einsum("aycd,xcdb->abxy", rho, tmp)
    T = np.einsum("abxy,cdyx->abcd", K, K)
    d = np.zeros_like(T)
    for p in itertools.permutations(range(4)):
        d += T.transpose(p)
    d *= -1.0 / 24 / 24
    if np.abs(J @ J + np.eye(n)).max() > 1e-12 or np.abs(J + J.T).max() > 1e-12:
        raise NormalizationFailure("pairing is not a complex structure")
    W = np.einsum("abst,sk,tl,klxy->abxy", d, J, J, d, optimize=True)
    JJ = np.einsum("ax,by->abxy", J, J) + np.einsum("ay,bx->abxy", J, J)
    if np.abs(W - 24 * d - 90 * JJ).max() > 1e-9:
        raise NormalizationFailure("double contraction of the quartic is off normalization")
    return d, J


def standard_symplectic(n: int) -> np.ndarray:
    if n % 2:
        raise UnsupportedM("symplectic forms need even dimension")
    r = n // 2
    J = np.zeros((n, n))
    J[:r, r:] = np.eye(r)
    J[r:, :r] = -np.eye(r)
    return J


_CACHE: dict = {}


def realization(family: str, m: int | None = None, n: int | None = None, exact: bool = False) -> Realization:
    """Tensors for ``family``: pass ``m`` for e6/e7 and ``n`` for su/so/sp."""
    key = (family, m, n, exact)
    if key in _CACHE:
        return _CACHE[key]
    if family in ("su", "so", "sp"):
        if n is None:
            raise ValueError("classical families need n")
        t = {"J": (np.array(standard_symplectic(n), dtype=object) if exact else standard_symplectic(n))} \
            if family == "sp" else {}
        real = Realization(family, n, None, t, exact)
    elif family == "e6":
        if exact:
            if m != 1:
                raise UnsupportedM("exact cubic only implemented at m = 1")
            low, up = cubic_exact_m1()
            real = Realization(family, 6, 1, {"d3": low, "d3bar": up}, True)
        else:
            d = build_cubic(m)
            real = Realization(family, 3 * m + 3, m, {"d3": d, "d3bar": d})
    elif family == "e7":
        if m != 2 or exact:
            raise UnsupportedM("e7 tensors are only realised for m = 2 (floating point)")
        d, J = build_quartic_a5()
        real = Realization(family, 20, 2, {"d4": d, "J": J})
    else:
        raise ValueError(f"unknown family {family!r}")
    _CACHE[key] = real
    return real


# -- evaluation --------------------------------------------------------------------

def _einsum_args(d: Diagram, real: Realization, fixed: Mapping[int, int]):
    n = real.n
    dtype = object if real.exact else float
    counter = itertools.count()
    ends: dict[int, list[int]] = {x: [] for x in range(d.node_count())}
    operands = []
    for a, b, j in d.edges:
        if j and signed(d.family):
            x, y = next(counter), next(counter)
            operands += [real.tensors["J"], [x, y]]
        elif a < d.rank and b < d.rank:
            x, y = next(counter), next(counter)
            eye = np.eye(n, dtype=int).astype(dtype)
            operands += [eye, [x, y]]
        else:
            x = y = next(counter)
        ends[a].append(x)
        ends[b].append(y)
    for k, vt in enumerate(d.vertices):
        operands += [real.tensors[vt], ends[d.rank + k]]
    out = []
    for port in range(d.rank):
        idx = ends[port][0]
        if port in fixed:
            vec = fixed[port]
            if not isinstance(vec, np.ndarray):
                vec = np.zeros(n, dtype=int).astype(dtype)
                vec[fixed[port]] = 1
            operands += [vec, [idx]]
        else:
            out.append(idx)
    return operands, out


def evaluate_diagram(d: Diagram, real: Realization, fixed: Mapping[int, int] | None = None) -> np.ndarray:
    """Dense tensor of ``d``.

    ``fixed`` maps some ports (node ids) to a basis index or to a vector that
    is contracted into that port.
    """
    fixed = fixed or {}
    operands, out = _einsum_args(d, real, fixed)
    if not operands:
        return np.ones(())
    if real.exact:
        return np.einsum(*operands, out, optimize=False)
    return np.einsum(*operands, out, optimize="greedy")


def coefficient_value(c: RationalFunc, real: Realization, **extra):
    val = rf_eval(c, real.point(**extra))
    return val if real.exact else float(val)


def evaluate(x: Diagram | RewriteResult, real: Realization, fixed=None, **extra) -> np.ndarray:
    """Evaluate a linear combination; spectral parameters go in ``extra``.

    An empty combination evaluates to a zero scalar, which broadcasts.
    """
    items = single(x) if isinstance(x, Diagram) else x
    total = None
    for d, c in items:
        term = evaluate_diagram(d, real, fixed) * coefficient_value(c, real, **extra)
        total = term if total is None else total + term
    return np.zeros(()) if total is None else total


def as_operator(t: np.ndarray, p: int) -> np.ndarray:
    """Matrix ``M[out, in]`` of a tensor with axes ``(in..., out...)``."""
    n = t.shape[0]
    return t.reshape((n ** p, n ** p)).T


def residual(lhs: RewriteResult, rhs: RewriteResult, real: Realization, block: int = 2_000_000, **extra) -> float:
    """Infinity-norm of ``lhs - rhs`` over all free indices.

    When the full tensor would exceed ``block`` entries, leading ports are
    fixed to each basis index in turn, so rank-six checks at n = 27 stay
    within memory.
    """
    diff = lhs - rhs
    if not diff:
        return 0.0
    rank = next(iter(diff))[0].rank
    k = 0
    while k < rank and real.n ** (rank - k) > block:
        k += 1
    worst = 0.0
    for idx in itertools.product(range(real.n), repeat=k):
        val = evaluate(diff, real, fixed=dict(enumerate(idx)), **extra)
        val = np.abs(np.asarray(val, dtype=float))
        worst = max(worst, float(val.max()) if val.size else 0.0)
    return worst


def _symmetrized(t: np.ndarray, k: int) -> np.ndarray:
    rest = tuple(range(k, t.ndim))
    out = np.zeros_like(t)
    for perm in itertools.permutations(range(k)):
        out += t.transpose(perm + rest)
    return out / math.factorial(k)


def identity_residual(identity_id: str, m: int) -> float:
    """Max abs residual of a named identity with explicit tensors at ``m``.

    The identity's two sides come from :func:`birdtracks.lemmas.statement`
    as unreduced diagram combinations.
    """
    from .lemmas import statement

    st = statement(identity_id)
    real = realization(st.family, m=m)
    if not st.symmetrize:
        return residual(st.lhs, st.rhs, real)
    lhs = _symmetrized(np.asarray(evaluate(st.lhs, real), dtype=float), st.symmetrize)
    rhs = _symmetrized(np.asarray(evaluate(st.rhs, real), dtype=float), st.symmetrize)
    return float(np.abs(lhs - rhs).max())


# -- Yang-Baxter --------------------------------------------------------------------

def r_operator(terms: RewriteResult, real: Realization, u) -> np.ndarray:
    """Dense ``n^2 x n^2`` matrix of a two-strand R-matrix at ``u``."""
    return as_operator(evaluate(terms, real, u=u), 2)


def _apply12(R, x, n):
    return (R @ x.reshape(n * n, n)).reshape(n, n, n)


def _apply23(R, x, n):
    return (x.reshape(n, n * n) @ R.T).reshape(n, n, n)


def ybe_numeric_residual(terms_of_u, real: Realization, u_val, v_val, trials: int = 5, seed: int = 0) -> float:
    """Max over random unit vectors of ``|(LHS - RHS) x|`` for the braid-form YBE.

    ``terms_of_u`` is the two-strand R-matrix as a linear combination with
    coefficients in u.  LHS = R12(u) R23(u+v) R12(v), RHS = R23(v) R12(u+v) R23(u),
    applied right to left without forming ``n^3 x n^3`` matrices.
    """
    u_val, v_val = Fraction(u_val), Fraction(v_val)
    n = real.n
    try:
        Ru = r_operator(terms_of_u, real, u_val)
        Rv = r_operator(terms_of_u, real, v_val)
        Ruv = r_operator(terms_of_u, real, u_val + v_val)
    except PoleAtPoint:
        raise
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal((n, n, n))
        x /= np.linalg.norm(x)
        lhs = _apply12(Ru, _apply23(Ruv, _apply12(Rv, x, n), n), n)
        rhs = _apply23(Rv, _apply12(Ruv, _apply23(Ru, x, n), n), n)
        scale = max(1.0, float(np.linalg.norm(lhs)))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)) / scale)
    return worst


def _fmpq_matrix(arr) -> flint.fmpq_mat:
    rows, cols = arr.shape
    return flint.fmpq_mat(rows, cols, [flint.fmpq(x.numerator, x.denominator) for x in arr.ravel()])


def _kron_id(M: flint.fmpq_mat, n: int, left: bool) -> flint.fmpq_mat:
    """``M x 1`` (``left``) or ``1 x M`` as an exact matrix."""
    k = M.nrows()
    N = k * n
    out = flint.fmpq_mat(N, N)
    for i in range(k):
        for j in range(k):
            v = M[i, j]
            if v == 0:
                continue
            for t in range(n):
                if left:
                    out[i * n + t, j * n + t] = v
                else:
                    out[t * k + i, t * k + j] = v
    return out


def ybe_exact_matrix(terms_of_u, real: Realization, u_val, v_val) -> bool:
    """Full ``n^3 x n^3`` YBE comparison in exact rational arithmetic."""
    if not real.exact:
        raise ValueError("needs an exact realization")
    u_val, v_val = Fraction(u_val), Fraction(v_val)
    n = real.n
    R = {key: _fmpq_matrix(as_operator(evaluate(terms_of_u, real, u=val), 2))
         for key, val in (("u", u_val), ("v", v_val), ("uv", u_val + v_val))}
    R12 = {k: _kron_id(M, n, True) for k, M in R.items()}
    R23 = {k: _kron_id(M, n, False) for k, M in R.items()}
    lhs = R12["u"] * R23["uv"] * R12["v"]
    rhs = R23["v"] * R12["uv"] * R23["u"]
    return lhs == rhs


# -- structure constants by brute force -------------------------------------------------

class DegenerateBasis(ValueError):
    """The basis diagrams are linearly dependent as operators at this n."""


def basis_operators(basis: list[Diagram], real: Realization) -> list[np.ndarray]:
    if basis and basis[0].p > 3:
        raise ValueError("at most three strands")
    p = basis[0].p
    return [as_operator(np.asarray(evaluate_diagram(d, real), dtype=float), p) for d in basis]


def oracle_structure_constants(basis: list[Diagram], real: Realization) -> np.ndarray:
    """``c[i, j, k]`` with ``b_i b_j = sum_k c[i, j, k] b_k`` from explicit matrices.

    Products are formed as matrix products and decomposed over the basis
    matrices.  Raises :class:`DegenerateBasis` when those matrices are
    dependent, since the constants are then not determined by the operators.
    """
    mats = basis_operators(basis, real)
    A = np.stack([M.ravel() for M in mats], axis=1)
    if np.linalg.matrix_rank(A) < len(basis):
        raise DegenerateBasis(f"{len(basis)} basis operators span a space of rank {np.linalg.matrix_rank(A)}")
    out = np.zeros((len(basis),) * 3)
    for i, Mi in enumerate(mats):
        for j, Mj in enumerate(mats):
            prod = (Mi @ Mj).ravel()
            coef, *_ = np.linalg.lstsq(A, prod, rcond=None)
            if np.abs(A @ coef - prod).max() > 1e-8:
                raise NormalizationFailure("product leaves the span of the basis")
            out[i, j] = coef
    return out


def product_residual(basis: list[Diagram], table, real: Realization) -> float:
    """Max over ``i, j`` of ``|M_i M_j - sum_k table[i, j, k] M_k|``; valid at any n."""
    mats = basis_operators(basis, real)
    worst = 0.0
    for i, Mi in enumerate(mats):
        for j, Mj in enumerate(mats):
            rhs = sum(table[i, j, k] * mats[k] for k in range(len(mats)) if table[i, j, k])
            worst = max(worst, float(np.abs(Mi @ Mj - rhs).max()))
    return worst


def report(series: str, m, identity: str, value: float, tolerance: float) -> dict:
    return {"series": series, "m": m, "identity": identity, "residual": value,
            "tolerance": tolerance, "pass": bool(value <= tolerance)}


def report_json(rep: dict) -> str:
    return json.dumps(rep, sort_keys=True)
