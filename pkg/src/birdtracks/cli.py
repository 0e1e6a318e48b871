"""Command-line front end.

Verbs: ``basis``, ``multtable``, ``projectors``, ``ybe``, ``crossing``,
``numeric``, ``reduce`` and ``lemma``.  Exit status is 0 when every check in
the selected suite passes, 1 on a failed check and 2 on a usage or parse
error.  Reports go to stdout; with ``--output`` (or the ``BIRDTRACKS_OUTPUT_DIR``
environment variable) they are also written to a file.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from .centralizer import AlgebraElement, CentralizerAlgebra, UnsupportedSignature, build_algebra
from .diagram import FAMILIES, DiagramError, leg_transform, loop_value, to_dot
from .ratfunc import RationalFunc
from .symbols import roster

REPORT_SCHEMA = "birdtrack-report/1"
OUTPUT_ENV = "BIRDTRACKS_OUTPUT_DIR"
SCALARS = ("m", "u", "v", "n")


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnknownSymbol(KeyError):
    pass


class UsageError(ValueError):
    pass


# -- expressions ---------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_.]*)|([-+*/^(),]))")


def _tokens(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        while text[pos].isspace():
            pos += 1
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = mt.start(mt.lastindex)
        kind = ("num", "name", "op")[mt.lastindex - 1]
        out.append((kind, mt.group(mt.lastindex), start))
        pos = mt.end()
    out.append(("end", "", len(text)))
    return out


class _Expr:
    """Recursive-descent evaluator; values are scalars or algebra elements."""

    def __init__(self, algebra: CentralizerAlgebra, text: str):
        self.alg = algebra
        self.toks = _tokens(text)
        self.i = 0
        self.subs = {"n": loop_value(algebra.family)} if algebra.family in ("e6", "e7") else {}

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def run(self):
        val = self.sum()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return val

    def sum(self):
        val = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.product()
            val = _add(self.alg, val, rhs if op == "+" else _neg(rhs))
        return val

    def product(self):
        val = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                val = _mul(val, rhs)
            else:
                if not isinstance(rhs, RationalFunc):
                    raise ParseError("can only divide by a scalar", pos)
                if rhs.is_zero():
                    raise ParseError("division by zero", pos)
                val = _mul(val, RationalFunc(1) / rhs)
        return val

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return _neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
        return self.power()

    def power(self):
        val = self.atom()
        if self.peek()[1] == "^":
            _, _, pos = self.take()
            kind, text, _ = self.take()
            if kind != "num":
                raise ParseError("exponents must be integers", pos)
            k = int(text)
            if isinstance(val, RationalFunc):
                return val ** k
            if k < 1:
                raise ParseError("elements only take positive powers", pos)
            base = val
            for _ in range(k - 1):
                val = val * base
        return val

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return RationalFunc(int(text))
        if text == "(":
            val = self.sum()
            self.take(")")
            return val
        if kind != "name":
            raise ParseError(f"unexpected {text or 'end of input'!r}", pos)
        if text in ("T1", "T2", "Cross", "rot60") and self.peek()[1] in ("(", "^"):
            steps = 1
            if self.peek()[1] == "^":
                if text != "rot60":
                    raise ParseError("only rot60 takes a power", self.peek()[2])
                self.take()
                k = self.take()
                if k[0] != "num":
                    raise ParseError("expected an integer", k[2])
                steps = int(k[1])
            self.take("(")
            arg = self.sum()
            self.take(")")
            return _transform(self.alg, text, steps, arg, pos)
        if text in SCALARS:
            x = RationalFunc.var(text)
            return self.subs.get(text, x)
        try:
            return self.alg.element(text)
        except KeyError:
            raise UnknownSymbol(f"{text!r} is not a symbol of {_label(self.alg)}") from None


def _label(alg: CentralizerAlgebra) -> str:
    return f"{alg.family}{' mixed' if alg.mixed else ''} on {alg.p} strands"


def _neg(x):
    return -x


def _add(alg, a, b):
    if isinstance(a, RationalFunc) and isinstance(b, RationalFunc):
        return a + b
    return _as_element(alg, a) + _as_element(alg, b)


def _as_element(alg, x):
    return x if isinstance(x, AlgebraElement) else x * alg.one


def _mul(a, b):
    if isinstance(a, AlgebraElement) and isinstance(b, AlgebraElement):
        return a * b
    if isinstance(a, AlgebraElement):
        return b * a
    return a * b


def _transform(alg: CentralizerAlgebra, kind: str, steps: int, arg, pos: int) -> AlgebraElement:
    x = _as_element(alg, arg).to_result()
    try:
        if kind == "rot60":
            res = leg_transform(x, "R60", steps % 6) if steps % 6 else x
            return alg.reduce(res)
        if kind in ("T1", "T2"):
            return alg.reduce(leg_transform(x, kind))
        from .rmatrix import cross
        if alg.family == "e6" and alg.mixed:
            raise UsageError("Cross is taken from V x V to V x Vbar only")
        target = build_algebra("e6", 2, True) if alg.family == "e6" else alg
        return cross(_as_element(alg, arg), target)
    except (DiagramError, UnsupportedSignature) as exc:
        raise ParseError(f"{kind} does not apply here: {exc}", pos) from None


def eval_expression(series: str, p: int, text: str, mixed: bool = False) -> AlgebraElement:
    """Evaluate an expression over the pinned basis of ``series`` on ``p`` strands."""
    alg = build_algebra(series, p, mixed)
    return _as_element(alg, _Expr(alg, text).run())


# -- reports ------------------------------------------------------------------------------

def _envelope(verb: str, args, passed: bool, report: dict) -> dict:
    return {"schema": REPORT_SCHEMA, "verb": verb, "series": getattr(args, "series", None),
            "pass": bool(passed), "report": report}


def _public(d):
    """Drop private ``_``-prefixed entries and stringify exact values for JSON."""
    if isinstance(d, dict):
        return {k: _public(v) for k, v in d.items() if not str(k).startswith("_")}
    if isinstance(d, (list, tuple)):
        return [_public(v) for v in d]
    if isinstance(d, (RationalFunc, Fraction)):
        return str(d)
    return d


def _text_lines(report: dict, indent: str = "") -> list[str]:
    out = []
    for k, v in report.items():
        if isinstance(v, dict):
            out.append(f"{indent}{k}:")
            out += _text_lines(v, indent + "  ")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            out.append(f"{indent}{k}:")
            for row in v:
                out.append(indent + "  - " + ", ".join(f"{a}={b}" for a, b in row.items()))
        elif isinstance(v, list):
            out.append(f"{indent}{k}: " + ", ".join(map(str, v)))
        else:
            out.append(f"{indent}{k}: {v}")
    return out


def _emit(args, env: dict, text: str | None = None) -> int:
    env = _public(env)
    if args.format == "json":
        body = json.dumps(env, indent=1, sort_keys=True)
    else:
        body = text if text is not None else "\n".join(_text_lines(env["report"]))
        body += f"\n{'PASS' if env['pass'] else 'FAIL'}"
    print(body)
    path = _output_path(args)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body + "\n")
    return 0 if env["pass"] else 1


def _output_path(args) -> Path | None:
    if args.output:
        return Path(args.output)
    base = os.environ.get(OUTPUT_ENV)
    if base:
        ext = "json" if args.format == "json" else "txt"
        return Path(base) / f"{args.verb}-{getattr(args, 'series', None) or 'all'}.{ext}"
    return None


def _failure(verb: str, exc: BaseException, code: int) -> int:
    rec = {"schema": REPORT_SCHEMA, "verb": verb, "pass": False,
           "error": {"type": type(exc).__name__, "message": str(exc.args[0]) if exc.args else str(exc)}}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    return code


# -- verbs --------------------------------------------------------------------------------

def _algebra(args) -> CentralizerAlgebra:
    return build_algebra(args.series, args.strands, args.mixed)


def _dot(args) -> str | None:
    if not getattr(args, "dot", None):
        return None
    ros = roster(args.series, args.strands, args.mixed)
    if args.dot not in ros:
        raise UnknownSymbol(f"{args.dot!r} is not a named diagram")
    return "\n".join(to_dot(d, args.dot) for d, _ in ros[args.dot])


def cmd_basis(args) -> int:
    alg = _algebra(args)
    groups: dict[int, list[str]] = {}
    for nm, d in zip(alg.names, alg.basis):
        groups.setdefault(d.order, []).append(nm)
    rep = {"dim": alg.dim, "by_order": {str(k): v for k, v in sorted(groups.items())},
           "counts": "/".join(str(len(v)) for _, v in sorted(groups.items()))}
    if alg.p == 3 and alg.family in ("e6", "e7"):
        rep["relation_variants"] = alg.relation_variants
        rep["variant_rank"] = alg.variant_rank
    text = None
    dot = _dot(args)
    if dot is not None:
        rep["dot"] = dot
        text = dot
    elif args.format == "text":
        text = "\n".join([f"{alg.family} on {alg.p} strands: dimension {alg.dim} ({rep['counts']})"]
                         + [f"  order {k}: {' '.join(v)}" for k, v in sorted(groups.items())])
    return _emit(args, _envelope("basis", args, True, rep), text)


def cmd_multtable(args) -> int:
    alg = _algebra(args)
    table = alg.structure_constants()
    if args.format == "json":
        rep = json.loads(alg.to_json(products=True))
        return _emit(args, _envelope("multtable", args, True, rep))
    lines = [f"{a} * {b} = {table[i][j]}" for i, a in enumerate(alg.names) for j, b in enumerate(alg.names)]
    return _emit(args, _envelope("multtable", args, True, {"dim": alg.dim}), "\n".join(lines))


def cmd_projectors(args) -> int:
    from .rmatrix import SpectralMismatch, build_R, check_projector_suite, verify_spectral
    rep = check_projector_suite(args.series, args.mixed)
    try:
        rep["spectral"] = verify_spectral(build_R(args.series, args.mixed))
        spectral_ok = True
    except SpectralMismatch as exc:
        rep["spectral"] = {"error": str(exc)}
        spectral_ok = False
    return _emit(args, _envelope("projectors", args, rep["pass"] and spectral_ok, rep))


def cmd_ybe(args) -> int:
    from .rmatrix import ybe_residual
    r = ybe_residual(args.series)
    rep = r.to_dict()
    rep["residual"] = "0" if r.residual_zero else str(r.residual)
    return _emit(args, _envelope("ybe", args, r.residual_zero, rep), r.transcript())


def cmd_crossing(args) -> int:
    from .rmatrix import ProportionalityFailure, crossing_check
    if args.series != "e6":
        raise UsageError("crossing is defined for the e6 series only")
    try:
        rep = crossing_check()
    except ProportionalityFailure as exc:
        return _emit(args, _envelope("crossing", args, False, {"error": str(exc)}))
    return _emit(args, _envelope("crossing", args, rep["pass"], rep))


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None


def cmd_numeric(args) -> int:
    from . import numeric
    from .rmatrix import build_R
    if args.identity:
        if args.series not in ("e6", "e7"):
            raise UsageError("identities are realised for e6 and e7 only")
        val = numeric.identity_residual(args.identity, args.m)
        tol = 1e-10 if args.m == 1 else 1e-9
        rep = numeric.report(args.series, args.m, args.identity, val, tol)
        return _emit(args, _envelope("numeric", args, rep["pass"], rep))
    if args.series in ("su", "so", "sp"):
        if args.n is None:
            raise UsageError("classical families need --n")
        real = numeric.realization(args.series, n=args.n)
    else:
        if args.m is None:
            raise UsageError("e6/e7 need --m")
        real = numeric.realization(args.series, m=args.m)
    terms = build_R(args.series).element.to_result()
    u, v = _fraction(args.u), _fraction(args.v)
    val = numeric.ybe_numeric_residual(terms, real, u, v, trials=args.trials, seed=args.seed)
    rep = numeric.report(args.series, args.m, "ybe", val, args.tolerance)
    rep.update(n=real.n, u=str(u), v=str(v), trials=args.trials, seed=args.seed)
    if args.exact:
        exact_real = numeric.realization(args.series, m=args.m, exact=True)
        rep["exact_matrix_identity"] = numeric.ybe_exact_matrix(terms, exact_real, u, v)
        rep["pass"] = rep["pass"] and rep["exact_matrix_identity"]
    return _emit(args, _envelope("numeric", args, rep["pass"], rep))


def cmd_reduce(args) -> int:
    dot = _dot(args)
    if dot is not None:
        return _emit(args, _envelope("reduce", args, True, {"dot": dot}), dot)
    if not args.expression:
        raise UsageError("reduce needs an expression (or --dot NAME)")
    el = eval_expression(args.series, args.strands, args.expression, args.mixed)
    rep = {"expression": args.expression, "value": str(el), "zero": el.is_zero()}
    return _emit(args, _envelope("reduce", args, True, rep), str(el))


def cmd_lemma(args) -> int:
    from .lemmas import prove
    rep = prove(args.name)
    text = "\n".join([f"{rep.key}:"] + [f"  {line}" for line in rep.transcript])
    return _emit(args, _envelope("lemma", args, rep.passed, rep.to_dict()), text)


VERBS = {"basis": cmd_basis, "multtable": cmd_multtable, "projectors": cmd_projectors, "ybe": cmd_ybe,
         "crossing": cmd_crossing, "numeric": cmd_numeric, "reduce": cmd_reduce, "lemma": cmd_lemma}


def build_parser() -> argparse.ArgumentParser:
    from .lemmas import KEYS
    parser = argparse.ArgumentParser(prog="birdtracks", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", help="also write the report here")
    series = argparse.ArgumentParser(add_help=False)
    series.add_argument("--series", choices=FAMILIES, required=True)
    strands = argparse.ArgumentParser(add_help=False)
    strands.add_argument("--strands", type=int, choices=(2, 3), default=3)
    strands.add_argument("--mixed", action="store_true", help="e6 on V x Vbar (two strands)")
    dot = argparse.ArgumentParser(add_help=False)
    dot.add_argument("--dot", metavar="NAME", help="print a named diagram in DOT format")

    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("basis", parents=[common, series, strands, dot])
    sub.add_parser("multtable", parents=[common, series, strands])
    p = sub.add_parser("projectors", parents=[common, series])
    p.add_argument("--mixed", action="store_true")
    sub.add_parser("ybe", parents=[common, series])
    p = sub.add_parser("crossing", parents=[common])
    p.add_argument("--series", choices=("e6",), default="e6")
    p = sub.add_parser("numeric", parents=[common, series])
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--u", default="1/3")
    p.add_argument("--v", default="1/5")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--identity", choices=[k for k in KEYS if k not in ("objj", "objh")])
    p.add_argument("--exact", action="store_true", help="also compare full exact matrices (e6, m = 1)")
    p = sub.add_parser("reduce", parents=[common, series, strands, dot])
    p.add_argument("expression", nargs="?")
    p = sub.add_parser("lemma", parents=[common])
    p.add_argument("name", choices=KEYS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "mixed", False) and (args.series != "e6" or getattr(args, "strands", 2) != 2):
        return _failure(args.verb, UsageError("--mixed needs --series e6 --strands 2"), 2)
    try:
        return VERBS[args.verb](args)
    except (ParseError, UnknownSymbol, UsageError, UnsupportedSignature) as exc:
        return _failure(args.verb, exc, 2)
    except Exception as exc:  # a failed check that raised rather than reported
        return _failure(args.verb, exc, 1)


if __name__ == "__main__":
    sys.exit(main())
