"""Named diagrams for every family at two and three strands.

Boundary positions of a ``p``-strand diagram run ``in_1, ..., in_p`` and then
``out_p, ..., out_1``, so that consecutive positions are neighbours on the
boundary circle.  Symplectic-family diagrams (``sp``, ``e7``) are written
first with all legs as lower indices ("lower form") and then turned into
operators by bending the last ``p`` positions to the output side; this
makes rotations pure relabellings.

Mnemonics:

* two strands: ``id``, ``P`` (crossing), ``C`` (cup-cap), ``eBA`` (e6 d-dbar
  pair), ``eeBA`` (e7 quartic with two bent legs), plus mixed e6 ``I``,
  ``K``, ``E`` on V x Vbar;
* e6, three strands: ``suCA..suCF`` (permutations), ``eCA..eCJ`` (second
  order) and ``e11..e33`` (fourth-order trees);
* Brauer diagrams on three strands are ``b`` followed by the position
  pairs, e.g. ``b05.14.23`` is the identity;
* e7 first order ``q`` + the four positions on the quartic vertex
  (``q0123``: the remaining two legs are joined by a line);
  second order ``h`` + the three positions on the vertex holding
  position 0 (``h012``).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .diagram import Diagram, RewriteResult, compose, make_diagram, move_legs, permutation, single

POS = {2: [("in", 1), ("in", 2), ("out", 2), ("out", 1)],
       3: [("in", 1), ("in", 2), ("in", 3), ("out", 3), ("out", 2), ("out", 1)]}


def _elem(pair) -> RewriteResult:
    d, f = pair
    return RewriteResult() if d is None else single(d, f)


def from_lower(family: str, p: int, vertices, wiring, bend: bool = True) -> RewriteResult:
    """Build an operator from a lower-form wiring.

    Ends are ``("leg", k)`` for boundary position ``k`` or ``(v, s)`` for a
    vertex slot; symplectic lines are oriented from the first end to the second.
    With ``bend=False`` the all-input diagram itself is returned.
    """
    def end(e):
        return ("in", e[1] + 1) if e[0] == "leg" else e

    d, f = make_diagram(family, (("V",) * (2 * p), ()), [(end(a), end(b)) for a, b in wiring], vertices)
    if d is None:
        return RewriteResult()
    if not bend:
        return single(d, f)
    d2, f2 = move_legs(d, list(range(2 * p)), p)
    return RewriteResult() if d2 is None else single(d2, f * f2)


def _pairings(items):
    if not items:
        yield []
        return
    a = items[0]
    for i in range(1, len(items)):
        for rest in _pairings(items[1:i] + items[i + 1:]):
            yield [(a, items[i])] + rest


def brauer(family: str, pairs, p: int) -> RewriteResult:
    """Lower-form Brauer diagram: each pair of boundary positions joined by a line."""
    return from_lower(family, p, [], [(("leg", a), ("leg", b)) for a, b in pairs])


def brauer_name(pairs) -> str:
    return "b" + ".".join(f"{a}{b}" for a, b in sorted(tuple(sorted(x)) for x in pairs))


def quartic1(family: str, quad, p: int = 3) -> RewriteResult:
    """e7 first order: quartic vertex on ``quad``, the other two positions joined."""
    rest = [x for x in range(2 * p) if x not in quad]
    wiring = [(("leg", q), (0, s)) for s, q in enumerate(quad)] + [(("leg", rest[0]), ("leg", rest[1]))]
    return from_lower(family, p, ["d4"], wiring)


def quartic2(family: str, triple, p: int = 3) -> RewriteResult:
    """e7 second order: two quartic vertices joined by a line oriented from the ``triple`` vertex."""
    rest = [x for x in range(2 * p) if x not in triple]
    wiring = ([(("leg", q), (0, s)) for s, q in enumerate(triple)]
              + [(("leg", q), (1, s)) for s, q in enumerate(rest)] + [((0, 3), (1, 3))])
    return from_lower(family, p, ["d4", "d4"], wiring)


def quartic3(family: str, pairs, p: int = 3) -> RewriteResult:
    """e7 third order: triangle of quartic vertices, vertex k carrying ``pairs[k]``.

    Internal lines run 0 -> 1, 1 -> 2 and 2 -> 0.
    """
    wiring = []
    for k, pair in enumerate(pairs):
        wiring += [(("leg", pair[0]), (k, 0)), (("leg", pair[1]), (k, 1))]
    wiring += [((0, 2), (1, 3)), ((1, 2), (2, 3)), ((2, 2), (0, 3))]
    return from_lower(family, p, ["d4"] * 3, wiring)


def x6(pin, pout) -> RewriteResult:
    """e6 second order: d3 on inputs ``pin``, d3bar on outputs ``pout``, a line for the rest."""
    (a, b), (c, e) = pin, pout
    t = ({1, 2, 3} - set(pin)).pop()
    s = ({1, 2, 3} - set(pout)).pop()
    wiring = [(("in", a), (0, 0)), (("in", b), (0, 1)), ((0, 2), (1, 2)),
              ((1, 0), ("out", c)), ((1, 1), ("out", e)), (("in", t), ("out", s))]
    return _elem(make_diagram("e6", ("V",) * 3, wiring, ["d3", "d3bar"]))


def e6_disconnected() -> RewriteResult:
    wiring = [(("in", k), (0, k - 1)) for k in (1, 2, 3)] + [((1, k - 1), ("out", k)) for k in (1, 2, 3)]
    return _elem(make_diagram("e6", ("V",) * 3, wiring, ["d3", "d3bar"]))


# permutations are given as images of inputs 1, 2, 3
_S3_NAMES = {"suCA": (1, 2, 3), "suCB": (2, 1, 3), "suCC": (1, 3, 2), "suCD": (3, 2, 1),
             "suCE": (2, 3, 1), "suCF": (3, 1, 2)}

_E6_SECOND = {"eCA": ((1, 2), (1, 2)), "eCB": ((1, 3), (1, 2)), "eCC": ((2, 3), (1, 2)),
              "eCD": ((1, 2), (1, 3)), "eCE": ((1, 3), (1, 3)), "eCF": ((2, 3), (1, 3)),
              "eCG": ((2, 3), (2, 3)), "eCH": ((1, 3), (2, 3)), "eCI": ((1, 2), (2, 3))}

# fourth-order trees as words in second-order symbols (row i, column j)
_E6_FOURTH = {"e11": ("eCA", "eCG"), "e12": ("eCA", "eCH"), "e13": ("eCA", "suCC", "eCA"),
              "e21": ("eCD", "eCG"), "e22": ("eCD", "suCC", "eCB"), "e23": ("eCF", "eCA"),
              "e31": ("eCG", "suCB", "eCG"), "e32": ("eCG", "eCB"), "e33": ("eCG", "eCA")}


def word(symbols: dict, names) -> RewriteResult:
    out = symbols[names[0]]
    for nm in names[1:]:
        out = compose(out, symbols[nm])
    return out


@lru_cache(maxsize=None)
def roster(family: str, p: int, mixed: bool = False) -> dict[str, RewriteResult]:
    """Named elements (each a single signed diagram) for ``family`` on ``p`` strands."""
    if mixed:
        if family != "e6" or p != 2:
            raise ValueError("mixed signature only for e6 on two strands")
        sig = ("V", "Vbar")
        E = [(("in", 1), (0, 0)), (("out", 2), (0, 1)), ((0, 2), (1, 2)),
             ((1, 0), ("out", 1)), ((1, 1), ("in", 2))]
        out = {
            "suBC": _elem(make_diagram("e6", sig, [(("in", 1), ("out", 1)), (("in", 2), ("out", 2))])),
            "suBD": _elem(make_diagram("e6", sig, [(("in", 1), ("in", 2)), (("out", 1), ("out", 2))])),
            "eBB": _elem(make_diagram("e6", sig, E, ["d3", "d3bar"])),
        }
        out["I"], out["K"], out["E"], out["id"] = out["suBC"], out["suBD"], out["eBB"], out["suBC"]
        return out
    out: dict[str, RewriteResult] = {}
    if p == 2:
        out["id"] = single(permutation(family, (1, 2)))
        out["P"] = single(permutation(family, (2, 1)))
        if family in ("so", "sp", "e7"):
            # cup-cap in lower form: J_{in1 in2} and J^{out1 out2} = J_{out2 out1}
            out["C"] = brauer(family, [(0, 1), (2, 3)], 2)
        if family == "e6":
            w = [(("in", 1), (0, 0)), (("in", 2), (0, 1)), ((0, 2), (1, 2)),
                 ((1, 0), ("out", 1)), ((1, 1), ("out", 2))]
            out["eBA"] = _elem(make_diagram("e6", ("V", "V"), w, ["d3", "d3bar"]))
        if family == "e7":
            w = [(("in", 1), (0, 0)), (("in", 2), (0, 1)), ((0, 2), ("out", 1)), ((0, 3), ("out", 2))]
            out["eeBA"] = _elem(make_diagram("e7", ("V", "V"), w, ["d4"]))
        aliases = {"su": {"suBA": "id", "suBB": "P"}, "e6": {"suBA": "id", "suBB": "P"},
                   "sp": {"spBA": "id", "spBB": "P", "spBC": "C"},
                   "e7": {"spBA": "id", "spBB": "P", "spBC": "C"}}.get(family, {})
        for a, b in aliases.items():
            out[a] = out[b]
        return out
    if p != 3:
        raise ValueError("only two or three strands")
    for nm, img in _S3_NAMES.items():
        out[nm] = single(permutation(family, img))
    out["id"] = out["suCA"]
    out["s1"], out["s2"] = out["suCB"], out["suCC"]
    if family in ("so", "sp", "e7"):
        for pairs in _pairings(list(range(6))):
            out[brauer_name(pairs)] = brauer(family, pairs, 3)
    if family == "e6":
        for nm, (pin, pout) in _E6_SECOND.items():
            out[nm] = x6(pin, pout)
        out["eCJ"] = e6_disconnected()
        for nm, w in _E6_FOURTH.items():
            out[nm] = word(out, w)
        out["objj"] = (out["e31"] - out["e13"] + out["e23"] - out["e32"] + out["e12"] - out["e21"])
    if family == "e7":
        for quad in itertools.combinations(range(6), 4):
            out["q" + "".join(map(str, quad))] = quartic1(family, quad)
        for tri in itertools.combinations(range(6), 3):
            if 0 in tri:
                out["h" + "".join(map(str, tri))] = quartic2(family, tri)
        out["objh"] = objh()
    return out


FIRST_ROW = [tuple(sorted((i, (i + 1) % 6, (i + 3) % 6))) for i in range(6)]


def objh() -> RewriteResult:
    """Sum of the six first-row splits, each oriented from its ``{i, i+1, i+3}`` part."""
    out = RewriteResult()
    for i in range(6):
        tri = (i % 6, (i + 1) % 6, (i + 3) % 6)
        out = out + quartic2("e7", tri)
    return out


def names_of(family: str, p: int, mixed: bool = False) -> dict[Diagram, tuple[str, object]]:
    """Reverse lookup ``diagram -> (name, coefficient)`` for single-diagram symbols."""
    out = {}
    for nm, el in roster(family, p, mixed).items():
        if len(el) == 1:
            (d, c), = el
            out.setdefault(d, (nm, c))
    return out
