"""Exact arithmetic in Q(n, m, u, v).

Polynomials carry arbitrary-precision integer coefficients and are stored in
graded-lexicographic order over the fixed indeterminate tuple ``VARIABLES``.
A :class:`RationalFunc` is always kept in canonical form: numerator and
denominator coprime, integer content removed, and the leading coefficient of
the denominator positive.  Two canonical values are equal iff their
representations are identical, which is what every zero test downstream
relies on.

Multivariate gcd is delegated to FLINT (``python-flint``).
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Mapping, Union

import flint

VARIABLES = ("n", "m", "u", "v")

_CTX = flint.fmpz_mpoly_ctx.get(VARIABLES, "deglex")


class DivisionByZero(ZeroDivisionError):
    pass


class PoleAtPoint(ZeroDivisionError):
    pass


class ParseError(ValueError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


Scalar = Union[int, Fraction, "MultiPoly", "RationalFunc"]


class MultiPoly:
    """Polynomial in ``VARIABLES`` with integer coefficients (immutable)."""

    __slots__ = ("_p", "_hash")

    def __init__(self, value=0):
        if isinstance(value, MultiPoly):
            p = value._p
        elif isinstance(value, flint.fmpz_mpoly):
            p = value
        elif isinstance(value, int):
            p = _CTX.from_dict({(0,) * len(VARIABLES): value}) if value else _CTX.from_dict({})
        elif isinstance(value, Mapping):
            p = _CTX.from_dict({tuple(k): int(c) for k, c in value.items() if c})
        else:
            raise TypeError(f"cannot build MultiPoly from {type(value).__name__}")
        self._p = p
        self._hash = None

    @classmethod
    def var(cls, name: str) -> "MultiPoly":
        return cls(_CTX.gens()[VARIABLES.index(name)])

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(e) for e in k): int(c) for k, c in self._p.to_dict().items()}

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self._p.is_constant()

    def content(self) -> int:
        return reduce(gcd, (abs(c) for c in self.terms.values()), 0)

    def leading_coefficient(self) -> int:
        return int(self._p.leading_coefficient()) if not self.is_zero() else 0

    def degree(self, name: str) -> int:
        if self.is_zero():
            return -1
        return int(self._p.degrees()[VARIABLES.index(name)])

    def variables(self) -> set[str]:
        return {VARIABLES[i] for k in self.terms for i, e in enumerate(k) if e}

    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiPoly(self._p + other._p)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiPoly(self._p - other._p)

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return MultiPoly(self._p * other._p)

    __rmul__ = __mul__

    def __neg__(self):
        return MultiPoly(-self._p)

    def __pow__(self, k: int):
        return MultiPoly(self._p ** k)

    def __eq__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self._p == other._p

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items())))
        return self._hash

    def gcd(self, other: "MultiPoly") -> "MultiPoly":
        return MultiPoly(self._p.gcd(other._p))

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        q, r = divmod(self._p, other._p)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return MultiPoly(q)

    def divide_int(self, k: int) -> "MultiPoly":
        return MultiPoly({e: c // k for e, c in self.terms.items()})

    def subs(self, mapping: Mapping[str, "MultiPoly"]) -> "MultiPoly":
        gens = [MultiPoly(mapping[x])._p if x in mapping else g
                for x, g in zip(VARIABLES, _CTX.gens())]
        return MultiPoly(self._p.compose(*gens))

    def evaluate(self, point: Mapping[str, Union[int, Fraction]]) -> Fraction:
        total = Fraction(0)
        vals = [Fraction(point[x]) if x in point else None for x in VARIABLES]
        for exps, c in self.terms.items():
            term = Fraction(c)
            for val, e, name in zip(vals, exps, VARIABLES):
                if e:
                    if val is None:
                        raise KeyError(f"no value for indeterminate {name!r}")
                    term *= val ** e
            total += term
        return total

    def __str__(self):
        return str(self._p) if not self.is_zero() else "0"

    def __repr__(self):
        return f"MultiPoly({self})"


def _as_poly(x):
    if isinstance(x, MultiPoly):
        return x
    if isinstance(x, int):
        return MultiPoly(x)
    return NotImplemented


class RationalFunc:
    """Canonical element of Q(n, m, u, v)."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1, *, _canonical=False):
        if isinstance(num, Fraction):
            den = MultiPoly(den) * num.denominator
            num = num.numerator
        num = MultiPoly(num)
        den = MultiPoly(den)
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if not _canonical:
            num, den = _canonical_pair(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def var(cls, name: str) -> "RationalFunc":
        return cls(MultiPoly.var(name), 1, _canonical=True)

    @classmethod
    def coerce(cls, x) -> "RationalFunc":
        if isinstance(x, RationalFunc):
            return x
        if isinstance(x, (int, Fraction, MultiPoly)):
            return cls(x)
        if isinstance(x, str):
            return parse(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to RationalFunc")

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def variables(self) -> set[str]:
        return self.num.variables() | self.den.variables()

    def __add__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RationalFunc(self.num + other.num, self.den)
        return RationalFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_rf(other) - self

    def __neg__(self):
        return RationalFunc(-self.num, self.den, _canonical=True)

    def __mul__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        # cross-cancel first so the products stay small
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = self.num.exact_div(g1) * other.num.exact_div(g2)
        den = self.den.exact_div(g2) * other.den.exact_div(g1)
        return RationalFunc(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZero("division by zero rational function")
        return self * RationalFunc(other.den, other.num)

    def __rtruediv__(self, other):
        return _as_rf(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return (ONE / self) ** (-k)
        return RationalFunc(self.num ** k, self.den ** k, _canonical=True)

    def __eq__(self, other):
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def subs(self, mapping: Mapping[str, Scalar]) -> "RationalFunc":
        """Substitute indeterminates by rational functions."""
        mapping = {k: _as_rf(v) for k, v in mapping.items()}
        return _subs_poly(self.num, mapping) / _subs_poly(self.den, mapping)

    def evaluate(self, point: Mapping[str, Union[int, Fraction]]) -> Fraction:
        den = self.den.evaluate(point)
        if den == 0:
            raise PoleAtPoint(f"denominator {self.den} vanishes at {dict(point)}")
        return self.num.evaluate(point) / den

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        num = str(self.num)
        den = str(self.den)
        if len(self.num.terms) > 1:
            num = f"({num})"
        if len(self.den.terms) > 1 or not _is_atom(den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RationalFunc({self})"


def _is_atom(text: str) -> bool:
    return re.fullmatch(r"[0-9]+|[a-z]", text) is not None


def _subs_poly(p: MultiPoly, mapping: Mapping[str, RationalFunc]) -> RationalFunc:
    # polynomial substitution where possible (cheap), otherwise term by term
    if all(v.den == 1 for v in mapping.values()):
        return RationalFunc(p.subs({k: v.num for k, v in mapping.items()}), 1)
    total = ZERO
    for exps, c in p.terms.items():
        term = RationalFunc(c)
        for name, e in zip(VARIABLES, exps):
            if e:
                base = mapping.get(name, RationalFunc.var(name))
                term = term * base ** e
        total = total + term
    return total


def _as_rf(x):
    if isinstance(x, RationalFunc):
        return x
    if isinstance(x, (int, Fraction, MultiPoly)):
        return RationalFunc(x)
    return NotImplemented


def _canonical_pair(num: MultiPoly, den: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    if num.is_zero():
        return MultiPoly(0), MultiPoly(1)
    g = num.gcd(den)
    if not (g.is_constant() and abs(g.leading_coefficient()) == 1):
        num = num.exact_div(g)
        den = den.exact_div(g)
    c = gcd(num.content(), den.content())
    if c > 1:
        num = num.divide_int(c)
        den = den.divide_int(c)
    if den.leading_coefficient() < 0:
        num, den = -num, -den
    return num, den


ZERO = RationalFunc(0)
ONE = RationalFunc(1)


def rf(x) -> RationalFunc:
    """Shorthand coercion used throughout the package and its tests."""
    return RationalFunc.coerce(x)


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def rf_arith(a: RationalFunc, b: RationalFunc, op: str) -> RationalFunc:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown field operation {op!r}")


def rf_eval(a: RationalFunc, point: Mapping[str, Union[int, Fraction]]) -> Fraction:
    return a.evaluate(point)


_TOKEN = re.compile(r"\s*(?:(\d+)|([a-z])|(\*\*|[-+*/^()]))")


def parse(text: str) -> RationalFunc:
    """Parse a plain ASCII rational expression such as ``(4+u)/(4-u)``.

    Accepts integers, the indeterminates in ``VARIABLES``, ``+ - * /``,
    ``^`` or ``**`` with non-negative integer exponents, parentheses and
    implicit multiplication between adjacent factors (``2m``, ``3(m+1)``).
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = mt.start(mt.lastindex)
        tokens.append((mt.group(mt.lastindex), mt.lastindex, start))
        pos = mt.end()
    parser = _Parser(tokens, len(text))
    value = parser.expr()
    if parser.i != len(tokens):
        raise ParseError(f"unexpected token {tokens[parser.i][0]!r}", tokens[parser.i][2])
    return value


class _Parser:
    def __init__(self, tokens, end):
        self.tokens = tokens
        self.i = 0
        self.end = end

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, self.end)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self):
        sign = 1
        while self.peek()[0] in ("+", "-"):
            if self.take()[0] == "-":
                sign = -sign
        value = self.term() * sign
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.power()
        while True:
            tok, kind, _ = self.peek()
            if tok in ("*", "/"):
                self.take()
                rhs = self.power()
                value = value * rhs if tok == "*" else value / rhs
            elif kind in (1, 2) or tok == "(":
                value = value * self.power()
            else:
                return value

    def power(self):
        base = self.atom()
        if self.peek()[0] in ("^", "**"):
            self.take()
            tok, kind, where = self.take()
            if kind != 1:
                raise ParseError("exponent must be a non-negative integer", where)
            return base ** int(tok)
        return base

    def atom(self):
        tok, kind, where = self.take()
        if tok is None:
            raise ParseError("unexpected end of input", where)
        if kind == 1:
            return RationalFunc(int(tok))
        if kind == 2:
            if tok not in VARIABLES:
                raise ParseError(f"unknown indeterminate {tok!r}", where)
            return RationalFunc.var(tok)
        if tok == "(":
            value = self.expr()
            close = self.take()
            if close[0] != ")":
                raise ParseError("expected ')'", close[2])
            return value
        if tok == "-":
            return -self.power()
        raise ParseError(f"unexpected token {tok!r}", where)
