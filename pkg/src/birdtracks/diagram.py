"""Birdtrack diagrams: wiring graphs of invariant tensors.

A diagram with ``p`` strands has ``2p`` external ports (``p`` in, ``p``
out) and a list of internal vertices (``d3``, ``d3bar``, ``d4``).  Every
edge joins two *ends* (a port or a vertex slot).  Each end carries an index
variance: an edge whose ends have opposite variance is a Kronecker delta;
one whose ends have equal variance is the symplectic form ``J``, stored
with an orientation (``J`` is antisymmetric, so reversing it costs a sign).

Variances of ends (the index the edge presents at that end):

========================  ============
end                       variance
========================  ============
in-port of a V strand      L
out-port of a V strand     U
in-port of a Vbar strand   U
out-port of a Vbar strand  L
slot of d3 / d4            U
slot of d3bar              L
========================  ============

For ``so`` the metric is symmetric and equals the identity, so equal-variance
edges are plain unsigned lines.  For ``su`` and ``e6`` equal-variance edges
are forbidden (:class:`OrientationClash`).

Vertices are totally symmetric, so a canonical diagram records edges between
*nodes* (ports and vertices) rather than slots.  Node numbering: in-ports
``0..p-1``, out-ports ``p..2p-1``, vertices from ``2p`` on.

Numerically (see :mod:`birdtracks.numeric`) a delta edge is the identity
matrix and a ``J`` edge oriented ``a -> b`` is the matrix ``J[a, b]``, with
``J @ J == -1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .ratfunc import ONE, ZERO, RationalFunc, parse

FAMILIES = ("su", "so", "sp", "e6", "e7")
ARITY = {"d3": 3, "d3bar": 3, "d4": 4}
FAMILY_VERTICES = {"su": (), "so": (), "sp": (), "e6": ("d3", "d3bar"), "e7": ("d4",)}
SERIAL_VERSION = "birdtrack-diagram/1"


class DiagramError(ValueError):
    pass


class MalformedWiring(DiagramError):
    pass


class OrientationClash(DiagramError):
    pass


class SignatureMismatch(DiagramError):
    pass


class RankMismatch(DiagramError):
    pass


class IrreducibleClosure(DiagramError):
    pass


def loop_value(family: str) -> RationalFunc:
    """Value of a closed index loop, with n eliminated for the exceptional series."""
    if family == "e6":
        return parse("3m+3")
    if family == "e7":
        return parse("6m+8")
    return RationalFunc.var("n")


def signed(family: str) -> bool:
    return family in ("sp", "e7")


def oriented(family: str) -> bool:
    return family in ("su", "e6")


def _vertex_variance(vtype: str) -> str:
    return "L" if vtype == "d3bar" else "U"


def _port_variance(strand: str, is_out: bool) -> str:
    if strand == "V":
        return "U" if is_out else "L"
    return "L" if is_out else "U"


# -- edge matrices ------------------------------------------------------------
# An edge value is a pair (s, j) meaning s * J**j read from its first end to
# its second.  For unsigned families J is the identity, so j collapses to 0.

def _compose(x, y, family):
    s = x[0] * y[0]
    j = x[1] + y[1]
    if j == 2:
        j = 0
        if signed(family):
            s = -s
    return (s, j)


def _reverse(x, family):
    if x[1] and signed(family):
        return (-x[0], 1)
    return x


@dataclass(frozen=True)
class Diagram:
    """Canonical, loop-free birdtrack diagram (immutable and hashable)."""

    family: str
    sig_in: tuple[str, ...]
    sig_out: tuple[str, ...]
    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int, int], ...]
    _adj: dict = field(default=None, compare=False, hash=False, repr=False)

    # -- basic properties ----------------------------------------------------
    @property
    def p(self) -> int:
        return len(self.sig_in)

    @property
    def rank(self) -> int:
        return len(self.sig_in) + len(self.sig_out)

    @property
    def order(self) -> int:
        return len(self.vertices)

    @property
    def signature(self):
        return (self.sig_in, self.sig_out)

    def node_count(self) -> int:
        return len(self.sig_in) + len(self.sig_out) + len(self.vertices)

    def vertex_node(self, k: int) -> int:
        return self.rank + k

    def neighbours(self, node: int) -> list[tuple[int, int, int]]:
        """Edges at ``node`` as ``(other, j, direction)``; direction +1 if stored from node."""
        if self._adj is None:
            adj = {i: [] for i in range(self.node_count())}
            for a, b, j in self.edges:
                adj[a].append((b, j, 1))
                if a != b:
                    adj[b].append((a, j, -1))
                else:
                    adj[a].append((a, j, -1))
            object.__setattr__(self, "_adj", adj)
        return self._adj[node]

    def variance(self, node: int) -> str:
        return _node_variance(self.sig_in, self.sig_out, self.vertices, node)

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"Diagram({serialize(self)!r})"

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)


def sort_key(d: Diagram):
    return (d.order, d.sig_in, d.sig_out, d.vertices, d.edges)


def _node_variance(sig_in, sig_out, vertices, node):
    p_in, p_out = len(sig_in), len(sig_out)
    if node < p_in:
        return _port_variance(sig_in[node], False)
    if node < p_in + p_out:
        return _port_variance(sig_out[node - p_in], True)
    return _vertex_variance(vertices[node - p_in - p_out])


class RewriteResult:
    """Finite linear combination of diagrams with rational-function coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Diagram, RationalFunc] | Iterable = ()):
        self.terms: dict[Diagram, RationalFunc] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for d, c in items:
            self.add(d, c)

    def add(self, d: Diagram, c) -> None:
        c = RationalFunc.coerce(c)
        if c.is_zero():
            return
        new = self.terms.get(d, ZERO) + c
        if new.is_zero():
            self.terms.pop(d, None)
        else:
            self.terms[d] = new

    def extend(self, other: "RewriteResult", scale=ONE) -> None:
        scale = RationalFunc.coerce(scale)
        for d, c in other.terms.items():
            self.add(d, c * scale)

    def scaled(self, scale) -> "RewriteResult":
        out = RewriteResult()
        out.extend(self, scale)
        return out

    def __add__(self, other):
        out = RewriteResult(self.terms)
        out.extend(other)
        return out

    def __sub__(self, other):
        out = RewriteResult(self.terms)
        out.extend(other, -ONE)
        return out

    def __neg__(self):
        return self.scaled(-ONE)

    def __rmul__(self, scale):
        return self.scaled(scale)

    def __iter__(self) -> Iterator[tuple[Diagram, RationalFunc]]:
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, RewriteResult):
            return NotImplemented
        return self.terms == other.terms

    def max_order(self) -> int:
        return max((d.order for d in self.terms), default=-1)

    def __repr__(self):
        inner = ", ".join(f"{c}: {serialize(d)}" for d, c in sorted(self.terms.items(), key=lambda t: sort_key(t[0])))
        return f"RewriteResult({{{inner}}})"


def single(d: Diagram, c=ONE) -> RewriteResult:
    return RewriteResult([(d, c)])


# -- networks: graphs with 2-valent junctions awaiting resolution ----------------

@dataclass
class _Network:
    """Scratch graph used while gluing or rewriting.

    ``segments`` are ``(end_a, end_b, (s, j))``.  An end is either a node id
    (``("n", i)``) or a junction (``("x", key)``) that must have exactly two
    incident segment ends; junctions are spliced away by :func:`_resolve`.
    """

    family: str
    sig_in: tuple[str, ...]
    sig_out: tuple[str, ...]
    vertices: list[str]
    segments: list = field(default_factory=list)

    def node(self, i):
        return ("n", i)

    def add_vertex(self, vtype):
        self.vertices.append(vtype)
        return self.rank() + len(self.vertices) - 1

    def rank(self):
        return len(self.sig_in) + len(self.sig_out)


def _resolve(net: _Network) -> tuple[Diagram | None, RationalFunc]:
    family = net.family
    incid: dict = {}
    for idx, (a, b, _) in enumerate(net.segments):
        incid.setdefault(a, []).append((idx, 0))
        incid.setdefault(b, []).append((idx, 1))
    for end, lst in incid.items():
        if end[0] == "x" and len(lst) != 2:
            raise MalformedWiring(f"junction {end[1]!r} has degree {len(lst)}")
    used = [False] * len(net.segments)
    factor = ONE
    edges = []

    def walk(idx, side):
        # traverse segment idx starting at its end `side`; follow junctions
        val = (1, 0)
        while True:
            used[idx] = True
            a, b, m = net.segments[idx]
            step = m if side == 0 else _reverse(m, family)
            val = _compose(val, step, family)
            far = b if side == 0 else a
            if far[0] == "n":
                return far[1], val
            nxt = [t for t in incid[far] if t != (idx, 1 - side)]
            if not nxt:
                nxt = [t for t in incid[far] if t[0] != idx]
            idx, side = nxt[0]

    for end, lst in incid.items():
        if end[0] != "n":
            continue
        for idx, side in lst:
            if used[idx]:
                continue
            far, val = walk(idx, side)
            edges.append((end[1], far, val))
    # the rest are closed loops through junctions only
    for idx in range(len(net.segments)):
        if used[idx]:
            continue
        a = net.segments[idx][0]
        start = a
        val = (1, 0)
        cur_idx, side = idx, 0
        while True:
            used[cur_idx] = True
            sa, sb, m = net.segments[cur_idx]
            step = m if side == 0 else _reverse(m, family)
            val = _compose(val, step, family)
            far = sb if side == 0 else sa
            if far == start:
                break
            nxt = [t for t in incid[far] if t != (cur_idx, 1 - side)]
            cur_idx, side = nxt[0]
        if val[1]:
            return None, ZERO
        factor = factor * loop_value(family) * val[0]
    return _canonical(family, net.sig_in, net.sig_out, tuple(net.vertices), edges, factor)


def _canonical(family, sig_in, sig_out, vertices, raw_edges, factor=ONE):
    """Build the canonical Diagram from node-level edges ``(a, b, (s, j))``."""
    rank = len(sig_in) + len(sig_out)
    degree = [0] * (rank + len(vertices))
    sign = 1
    cleaned = []
    for a, b, (s, j) in raw_edges:
        degree[a] += 1
        degree[b] += 1
        va = _node_variance(sig_in, sig_out, vertices, a)
        vb = _node_variance(sig_in, sig_out, vertices, b)
        want_j = 1 if va == vb else 0
        if oriented(family) and want_j:
            raise OrientationClash(f"edge {a}-{b} joins two {va} ends in family {family}")
        if not signed(family):
            j = 0
        elif j != want_j:
            raise OrientationClash(f"edge {a}-{b} has inconsistent symplectic type")
        sign *= s
        if a == b and j:
            # symmetric vertex traced with an antisymmetric form
            return None, ZERO
        cleaned.append((a, b, j))
    for node in range(rank):
        if degree[node] != 1:
            raise MalformedWiring(f"port {node} has degree {degree[node]}")
    for k, vt in enumerate(vertices):
        if degree[rank + k] != ARITY[vt]:
            raise MalformedWiring(f"vertex {k} ({vt}) has degree {degree[rank + k]}")
    best, best_sign, zero = _minimise(family, rank, vertices, cleaned)
    if zero:
        return None, ZERO
    d = Diagram(family, tuple(sig_in), tuple(sig_out), best[0], best[1])
    return d, factor * (sign * best_sign)


def _relabel(rank, perm, edges, family):
    out = []
    sign = 1
    for a, b, j in edges:
        a2 = a if a < rank else rank + perm[a - rank]
        b2 = b if b < rank else rank + perm[b - rank]
        if a2 > b2:
            a2, b2 = b2, a2
            if j and signed(family):
                sign = -sign
        out.append((a2, b2, j))
    out.sort()
    return tuple(out), sign


def _minimise(family, rank, vertices, edges):
    """Brute-force canonical labelling of the internal vertices.

    Vertices are split into classes by type and by the ports they touch,
    and only permutations inside classes are tried.  When two optimal
    labellings disagree on the sign the diagram equals its own negative.
    """
    nv = len(vertices)
    if nv == 0:
        e, s = _relabel(rank, [], edges, family)
        return ((), e), s, False
    ports_of = [[] for _ in range(nv)]
    vdeg = [0] * nv
    for a, b, j in edges:
        for x, y in ((a, b), (b, a)):
            if x >= rank:
                if y < rank:
                    ports_of[x - rank].append((y, j))
                else:
                    vdeg[x - rank] += 1
    inv = [(vertices[k], tuple(sorted(ports_of[k])), vdeg[k]) for k in range(nv)]
    classes: dict = {}
    for k in range(nv):
        classes.setdefault(inv[k], []).append(k)
    keys = sorted(classes)
    # target slots: class order decides the block of new labels
    blocks = []
    start = 0
    for key in keys:
        members = classes[key]
        blocks.append((members, list(range(start, start + len(members)))))
        start += len(members)
    new_vertices = tuple(key[0] for key in keys for _ in classes[key])
    best = None
    best_signs = set()
    for choice in itertools.product(*[itertools.permutations(tgt) for _, tgt in blocks]):
        perm = [0] * nv
        for (members, _), targets in zip(blocks, choice):
            for old, new in zip(members, targets):
                perm[old] = new
        e, s = _relabel(rank, perm, edges, family)
        if best is None or e < best:
            best = e
            best_signs = {s}
        elif e == best:
            best_signs.add(s)
    zero = len(best_signs) > 1
    return (new_vertices, best), next(iter(best_signs)), zero


def _network_from(d: Diagram, net: _Network, node_map) -> None:
    """Copy the edges of ``d`` into ``net`` with nodes mapped by ``node_map``."""
    for a, b, j in d.edges:
        net.segments.append((node_map(a), node_map(b), (1, j)))


# -- constructors ---------------------------------------------------------------

def _norm_sig(family, sig):
    sig = tuple(sig)
    if not oriented(family) and any(s != "V" for s in sig):
        raise DiagramError(f"family {family} has self-conjugate strands only")
    if any(s not in ("V", "Vbar") for s in sig):
        raise DiagramError(f"bad strand type in {sig}")
    return sig


def make_diagram(family: str, signature, wiring: Sequence, vertices: Sequence[str] = ()):
    """Build a canonical diagram from slot-level wiring.

    ``signature`` is either a tuple of strand types (used for both sides) or
    a pair ``(sig_in, sig_out)``.  Ends in ``wiring`` are ``("in", k)``,
    ``("out", k)`` (1-based strands) or ``(v, s)`` for slot ``s`` of vertex
    ``v`` (0-based).  Symplectic edges are oriented from the first end to
    the second.  Returns ``(diagram, factor)``; the factor collects signs
    and loop values and is zero when the diagram vanishes identically.
    """
    if family not in FAMILIES:
        raise DiagramError(f"unknown family {family!r}")
    if signature and isinstance(signature[0], (tuple, list)):
        sig_in, sig_out = (_norm_sig(family, s) for s in signature)
    else:
        sig_in = sig_out = _norm_sig(family, signature)
    vertices = list(vertices)
    for vt in vertices:
        if vt not in FAMILY_VERTICES[family]:
            raise DiagramError(f"vertex type {vt} not available in family {family}")
    p_in, p_out = len(sig_in), len(sig_out)
    rank = p_in + p_out
    seen = set()
    net = _Network(family, sig_in, sig_out, list(vertices))

    def end(e):
        if e in seen:
            raise MalformedWiring(f"end {e!r} used twice")
        seen.add(e)
        kind, k = e
        if kind == "in":
            if not 1 <= k <= p_in:
                raise MalformedWiring(f"no in-port {k}")
            return ("n", k - 1)
        if kind == "out":
            if not 1 <= k <= p_out:
                raise MalformedWiring(f"no out-port {k}")
            return ("n", p_in + k - 1)
        if not (0 <= kind < len(vertices)) or not (0 <= k < ARITY[vertices[kind]]):
            raise MalformedWiring(f"no slot {k} on vertex {kind}")
        return ("x", (kind, k))

    for a, b in wiring:
        ea, eb = end(a), end(b)
        va = _end_variance(net, a)
        vb = _end_variance(net, b)
        j = 1 if va == vb else 0
        if j and oriented(family):
            raise OrientationClash(f"{a}-{b} joins two {va} ends")
        net.segments.append((ea, eb, (1, j if signed(family) else 0)))
    expected = {("in", k) for k in range(1, p_in + 1)} | {("out", k) for k in range(1, p_out + 1)}
    expected |= {(v, s) for v, vt in enumerate(vertices) for s in range(ARITY[vt])}
    if seen != expected:
        raise MalformedWiring(f"unwired ends: {sorted(expected - seen, key=str)}")
    # bind slots to their vertex nodes
    for v, vt in enumerate(vertices):
        for s in range(ARITY[vt]):
            net.segments.append((("n", rank + v), ("x", (v, s)), (1, 0)))
    return _resolve(net)


def _end_variance(net, e):
    kind, k = e
    if kind == "in":
        return _port_variance(net.sig_in[k - 1], False)
    if kind == "out":
        return _port_variance(net.sig_out[k - 1], True)
    return _vertex_variance(net.vertices[kind])


def canonicalize(d: Diagram) -> tuple[Diagram | None, int]:
    """Recompute the canonical representative; returns ``(diagram, sign)``.

    The sign is 0 (and the diagram ``None``) for a diagram equal to its own
    negative.
    """
    raw = [(a, b, (1, j)) for a, b, j in d.edges]
    out, f = _canonical(d.family, d.sig_in, d.sig_out, d.vertices, raw)
    if out is None:
        return None, 0
    return out, 1 if f == ONE else -1


def identity(family: str, signature) -> Diagram:
    signature = tuple(signature)
    wiring = [(("in", k), ("out", k)) for k in range(1, len(signature) + 1)]
    return make_diagram(family, signature, wiring)[0]


def permutation(family: str, perm: Sequence[int], signature=None) -> Diagram:
    """Diagram sending input strand ``k`` to output strand ``perm[k]`` (1-based)."""
    p = len(perm)
    sig_in = tuple(signature) if signature else ("V",) * p
    sig_out = tuple(sig_in[perm.index(k)] for k in range(1, p + 1))
    wiring = [(("in", k + 1), ("out", perm[k])) for k in range(p)]
    return make_diagram(family, (sig_in, sig_out), wiring)[0]


def tensor(a: Diagram, b: Diagram) -> Diagram:
    """Juxtapose ``a`` (upper strands) and ``b`` (lower strands)."""
    if a.family != b.family:
        raise SignatureMismatch("families differ")
    sig_in = a.sig_in + b.sig_in
    sig_out = a.sig_out + b.sig_out
    pa_in, pa_out, pb_in, pb_out = a.p, len(a.sig_out), b.p, len(b.sig_out)
    rank = len(sig_in) + len(sig_out)

    def map_a(x):
        if x < pa_in:
            return x
        if x < pa_in + pa_out:
            return len(sig_in) + (x - pa_in)
        return rank + (x - a.rank)

    def map_b(x):
        if x < pb_in:
            return pa_in + x
        if x < pb_in + pb_out:
            return len(sig_in) + pa_out + (x - pb_in)
        return rank + len(a.vertices) + (x - b.rank)

    raw = [(map_a(x), map_a(y), (1, j)) for x, y, j in a.edges]
    raw += [(map_b(x), map_b(y), (1, j)) for x, y, j in b.edges]
    d, f = _canonical(a.family, sig_in, sig_out, a.vertices + b.vertices, raw)
    if d is None or f != ONE:
        raise DiagramError("tensor product of canonical diagrams must be canonical")
    return d


def concatenate_diagrams(a: Diagram, b: Diagram) -> tuple[Diagram | None, RationalFunc]:
    """Glue ``b`` below ``a`` (``b`` acts first), returning ``(diagram, factor)``."""
    if a.family != b.family:
        raise SignatureMismatch("families differ")
    if b.sig_out != a.sig_in:
        raise SignatureMismatch(f"cannot compose {b.sig_out} into {a.sig_in}")
    family = a.family
    p_mid = len(a.sig_in)
    net = _Network(family, b.sig_in, a.sig_out, list(b.vertices) + list(a.vertices))
    rank = len(b.sig_in) + len(a.sig_out)
    pb_in = len(b.sig_in)

    def map_b(x):
        if x < pb_in:
            return ("n", x)
        if x < pb_in + p_mid:
            return ("x", ("mid", x - pb_in))
        return ("n", rank + (x - b.rank))

    def map_a(x):
        if x < p_mid:
            return ("x", ("mid", x))
        if x < a.rank:
            return ("n", pb_in + (x - p_mid))
        return ("n", rank + len(b.vertices) + (x - a.rank))

    _network_from(b, net, map_b)
    _network_from(a, net, map_a)
    return _resolve(net)


def concatenate(a: Diagram, b: Diagram) -> RewriteResult:
    """``a`` after ``b``: glue, evaluate loops and J chains, canonicalise."""
    d, f = concatenate_diagrams(a, b)
    return RewriteResult() if d is None else single(d, f)


def compose(x: RewriteResult, y: RewriteResult) -> RewriteResult:
    """Bilinear extension of :func:`concatenate` (``x`` after ``y``)."""
    out = RewriteResult()
    for da, ca in x:
        for db, cb in y:
            d, f = concatenate_diagrams(da, db)
            if d is not None:
                out.add(d, ca * cb * f)
    return out


# -- local rewriting --------------------------------------------------------------

def _net_without(d: Diagram, drop: set[int]):
    """Network copy of ``d`` with the vertices in ``drop`` cut out.

    Returns ``(net, free, internal)``.  ``free[v]`` lists junctions standing
    for the slots of ``v`` whose edge leaves the dropped set; ``internal``
    lists ``(a, b, j, ja, jb)`` for edges running between dropped vertices
    (stored ``a -> b`` with slot junctions ``ja``, ``jb``).  Internal edges
    are not added to the network; a rule either consumes them or re-adds them.
    """
    rank = d.rank
    keep = [k for k in range(len(d.vertices)) if rank + k not in drop]
    renum = {i: i for i in range(rank)}
    for new, old in enumerate(keep):
        renum[rank + old] = rank + new
    net = _Network(d.family, d.sig_in, d.sig_out, [d.vertices[k] for k in keep])
    free: dict[int, list] = {v: [] for v in drop}
    internal = []
    counter = itertools.count()
    for a, b, j in d.edges:
        if a in drop and b in drop:
            internal.append((a, b, j, ("x", ("slot", next(counter))), ("x", ("slot", next(counter)))))
            continue
        ea = eb = None
        if a in drop:
            ea = ("x", ("slot", next(counter)))
            free[a].append(ea)
        if b in drop:
            eb = ("x", ("slot", next(counter)))
            free[b].append(eb)
        net.segments.append((ea or ("n", renum[a]), eb or ("n", renum[b]), (1, j)))
    return net, free, internal


def _finish(net, factor, extra=()):
    out = RewriteResult()
    n2 = _Network(net.family, net.sig_in, net.sig_out, list(net.vertices), list(net.segments) + list(extra))
    dd, f = _resolve(n2)
    if dd is not None:
        out.add(dd, f * factor)
    return out


def _bubble(d: Diagram):
    """e6: a d3/d3bar pair joined by two or three lines."""
    rank = d.rank
    for k, vt in enumerate(d.vertices):
        if vt != "d3":
            continue
        u = rank + k
        mult: dict[int, int] = {}
        for other, _, _ in d.neighbours(u):
            if other >= rank:
                mult[other] = mult.get(other, 0) + 1
        for w, cnt in sorted(mult.items()):
            if cnt < 2:
                continue
            net, free, internal = _net_without(d, {u, w})
            if cnt == 3:
                return _finish(net, loop_value(d.family))
            return _finish(net, ONE, [(free[u][0], free[w][0], (1, 0))])
    return None


def _square(d: Diagram):
    """e6 4-cycle d3 - d3bar - d3 - d3bar with one free leg per vertex."""
    rank = d.rank
    m = RationalFunc.var("m")
    coef_tree = -m / (2 * m + 4)
    coef_line = ONE / (2 * m + 4)
    ds = [rank + k for k, vt in enumerate(d.vertices) if vt == "d3"]
    nbrs = {x: {o for o, _, _ in d.neighbours(x) if o >= rank} for x in ds}
    for d1, d3 in itertools.combinations(ds, 2):
        for b2, b4 in itertools.combinations(sorted(nbrs[d1] & nbrs[d3]), 2):
            net, free, internal = _net_without(d, {d1, d3, b2, b4})
            if len(internal) != 4:
                continue
            fa, fb, fc, fd = (free[v][0] for v in (d1, b2, d3, b4))
            out = _finish(net, coef_line, [(fa, fb, (1, 0)), (fc, fd, (1, 0))])
            out.extend(_finish(net, coef_line, [(fa, fd, (1, 0)), (fc, fb, (1, 0))]))
            nd, nb = rank + len(net.vertices), rank + len(net.vertices) + 1
            net.vertices += ["d3", "d3bar"]
            tree = [(("n", nd), fa, (1, 0)), (("n", nd), fc, (1, 0)), (("n", nd), ("n", nb), (1, 0)),
                    (("n", nb), fb, (1, 0)), (("n", nb), fd, (1, 0))]
            out.extend(_finish(net, coef_tree, tree))
            return out
    return None


def _double_bridge(d: Diagram):
    """e7: two d4 vertices joined by two or more J lines."""
    rank = d.rank
    m = RationalFunc.var("m")
    c_vertex = 6 * (m + 2)
    c_lines = 18 * (m + 3)
    d4s = [rank + k for k, vt in enumerate(d.vertices) if vt == "d4"]
    for u, w in itertools.combinations(d4s, 2):
        if sum(1 for o, _, _ in d.neighbours(u) if o == w) < 2:
            continue
        net, free, internal = _net_without(d, {u, w})
        bridges = [e for e in internal if {e[0], e[1]} == {u, w}]
        # stored edges run from the lower node, and u < w, so both used
        # bridges are oriented u -> w as the rule requires
        kept = bridges[2:]
        extra = [(ja, jb, (1, j)) for _, _, j, ja, jb in kept]
        a, b = free[u] + [e[3] for e in kept]
        x, y = free[w] + [e[4] for e in kept]
        nz = rank + len(net.vertices)
        out = _finish(net, c_lines, extra + [(a, x, (1, 1)), (b, y, (1, 1))])
        out.extend(_finish(net, c_lines, extra + [(a, y, (1, 1)), (b, x, (1, 1))]))
        net.vertices.append("d4")
        out.extend(_finish(net, c_vertex, extra + [(("n", nz), e, (1, 0)) for e in (a, b, x, y)]))
        return out
    return None


def splice(d: Diagram, drop: Sequence[int], relation: RewriteResult) -> RewriteResult:
    """Cut the vertices ``drop`` out of ``d`` and glue in a lower-form combination.

    The severed ends are numbered vertex by vertex, in ``drop`` order and
    then in stored edge order, and are matched with the in-ports of every
    term of ``relation`` (terms with only inputs).  Edges running between
    dropped vertices are discarded: the caller accounts for the subgraph
    they formed.
    """
    net, free, _ = _net_without(d, set(drop))
    ends = [e for v in drop for e in free[v]]
    out = RewriteResult()
    for t, c in relation:
        if t.sig_out or t.p != len(ends):
            raise RankMismatch("replacement must have one input per severed end")
        n2 = _Network(net.family, net.sig_in, net.sig_out, list(net.vertices), list(net.segments))
        base = n2.rank() + len(n2.vertices)
        n2.vertices += list(t.vertices)

        def node(x, t=t, base=base):
            return ends[x] if x < t.rank else ("n", base + x - t.rank)

        _network_from(t, n2, node)
        dd, f = _resolve(n2)
        if dd is not None:
            out.add(dd, c * f)
    return out


def bridge_orientation(d: Diagram, u: int, w: int) -> int | None:
    """+1 / -1 for a single line stored u -> w / w -> u; None unless exactly one line joins them."""
    found = [(a, b) for a, b, _ in d.edges if {a, b} == {u, w}]
    if len(found) != 1:
        return None
    return 1 if found[0][0] == u else -1


RULES = {
    "e6": (_bubble, _square),
    "e7": (_double_bridge,),
}


def apply_local_rewrites(d: Diagram | RewriteResult) -> RewriteResult:
    """Rewrite to a fixed point of the local rule set.

    Loops and J chains are already evaluated during gluing; here the e6
    bubble and 4-cycle rules and the e7 double-bridge rule are applied
    until none matches.  Every rule lowers the
    vertex count, so this terminates.
    """
    todo = single(d) if isinstance(d, Diagram) else d
    out = RewriteResult()
    stack = list(todo)
    while stack:
        dia, coef = stack.pop()
        rules = RULES.get(dia.family, ())
        for rule in rules:
            res = rule(dia)
            if res is not None:
                stack.extend((d2, c2 * coef) for d2, c2 in res)
                break
        else:
            out.add(dia, coef)
    return out


# -- trace --------------------------------------------------------------------------

def close_trace(d: Diagram | RewriteResult) -> RationalFunc:
    """Join every output to the matching input and evaluate to a scalar."""
    total = ZERO
    items = single(d) if isinstance(d, Diagram) else d
    for dia, coef in items:
        if dia.sig_in != dia.sig_out:
            raise SignatureMismatch("trace needs equal in and out signatures")
        p = dia.p
        net = _Network(dia.family, (), (), list(dia.vertices))

        def node(x, dia=dia, p=p):
            if x < 2 * p:
                return ("x", ("tr", x % p))
            return ("n", x - 2 * p)

        _network_from(dia, net, node)
        closed, f = _resolve(net)
        if closed is None:
            continue
        for rest, c in apply_local_rewrites(closed):
            if rest.vertices:
                raise IrreducibleClosure(f"closed diagram {serialize(rest)} does not reduce")
            total = total + coef * f * c
    return total


# -- leg transforms -------------------------------------------------------------------

def _positions(p_in, p_out):
    """Boundary order: in_1..in_p then out_p..out_1, as port node ids."""
    return list(range(p_in)) + [p_in + k for k in reversed(range(p_out))]


def move_legs(d: Diagram, target: Sequence[int], p_in_new: int) -> tuple[Diagram | None, RationalFunc]:
    """Reattach external legs.

    ``target[t]`` is the new boundary position of the leg now at boundary
    position ``t`` (see :func:`_positions`).  The first ``p_in_new``
    positions of the new boundary are inputs.  A leg that crosses between
    the input and output sides is bent: for ``sp``/``e7`` this composes its
    line with ``J`` oriented from the input side towards the output side; for
    ``su``/``e6`` the strand becomes its conjugate.
    """
    family = d.family
    p_in, p_out = d.p, len(d.sig_out)
    nports = p_in + p_out
    if sorted(target) != list(range(nports)):
        raise RankMismatch("leg map must be a permutation of the boundary")
    p_out_new = nports - p_in_new
    old_pos = _positions(p_in, p_out)
    new_pos = _positions(p_in_new, p_out_new)
    strand = list(d.sig_in) + list(d.sig_out)
    new_strand: dict[int, str] = {}
    node_map: dict[int, tuple] = {}
    bends = []
    for t, old_node in enumerate(old_pos):
        new_node = new_pos[target[t]]
        was_in = old_node < p_in
        now_in = new_node < p_in_new
        s = strand[old_node]
        if was_in != now_in:
            if oriented(family):
                s = "Vbar" if s == "V" else "V"
            junction = ("x", ("leg", t))
            node_map[old_node] = junction
            # the bend is a J running from the input side to the output side,
            # so rotations commute with lowering every leg
            j = 1 if signed(family) else 0
            if was_in:
                bends.append((junction, ("n", new_node), (1, j)))
            else:
                bends.append((("n", new_node), junction, (1, j)))
        else:
            node_map[old_node] = ("n", new_node)
        new_strand[new_node] = s
    sig_in = tuple(new_strand[k] for k in range(p_in_new))
    sig_out = tuple(new_strand[p_in_new + k] for k in range(p_out_new))
    net = _Network(family, sig_in, sig_out, list(d.vertices))
    _network_from(d, net, lambda x: node_map[x] if x < nports else ("n", x))
    net.segments += bends
    return _resolve(net)


def rotate(d: Diagram, steps: int = 1) -> tuple[Diagram | None, RationalFunc]:
    """Rotate the boundary by ``steps`` leg positions (each leg moves back one place)."""
    n = d.rank
    target = [(t - steps) % n for t in range(n)]
    return move_legs(d, target, d.p)


def _as_result(pair):
    d, f = pair
    return RewriteResult() if d is None else single(d, f)


def leg_transform(x: Diagram | RewriteResult, kind: str, arg=None) -> RewriteResult:
    """Apply a boundary transformation linearly.

    ``kind`` is one of ``"T1"``, ``"T2"`` (conjugation by transpositions on
    three strands), ``"R60"`` (one-step rotation, ``arg`` = number of steps,
    rank six), ``"cross"`` (rank four, a quarter turn),
    ``"perm"`` (``arg = (in_perm, out_perm)``, 1-based images) or
    ``"conjugate"`` (e6 only: swap V and Vbar, d3 and d3bar).
    """
    items = single(x) if isinstance(x, Diagram) else x
    out = RewriteResult()
    for d, c in items:
        out.extend(_leg_transform_one(d, kind, arg), c)
    return out


def _leg_transform_one(d: Diagram, kind: str, arg) -> RewriteResult:
    if kind in ("T1", "T2"):
        if d.p != 3 or len(d.sig_out) != 3:
            raise RankMismatch(f"{kind} needs three strands")
        s12 = permutation(d.family, (2, 1, 3), d.sig_out)
        s23 = permutation(d.family, (1, 3, 2), d.sig_in)
        if kind == "T1":
            left, right = s12, s23
        else:
            left = permutation(d.family, (1, 3, 2), d.sig_out)
            right = permutation(d.family, (2, 1, 3), d.sig_in)
        return compose(compose(single(left), single(d)), single(right))
    if kind == "R60":
        if d.rank != 6:
            raise RankMismatch("R60 needs rank six")
        return _as_result(rotate(d, 1 if arg is None else arg))
    if kind == "cross":
        if d.rank != 4 or d.p != 2:
            raise RankMismatch("cross needs rank four")
        return _as_result(rotate(d, 1))
    if kind == "perm":
        in_perm, out_perm = arg
        res = single(d)
        if in_perm is not None:
            res = compose(res, single(permutation(d.family, _inverse(in_perm), d.sig_in)))
        if out_perm is not None:
            res = compose(single(permutation(d.family, out_perm, d.sig_out)), res)
        return res
    if kind == "conjugate":
        if d.family != "e6":
            raise DiagramError("conjugation is only defined for e6")
        flip = {"V": "Vbar", "Vbar": "V"}
        vt = {"d3": "d3bar", "d3bar": "d3"}
        raw = [(a, b, (1, j)) for a, b, j in d.edges]
        return _as_result(_canonical(d.family, tuple(flip[s] for s in d.sig_in),
                                     tuple(flip[s] for s in d.sig_out),
                                     tuple(vt[v] for v in d.vertices), raw))
    raise DiagramError(f"unknown transform {kind!r}")


def _inverse(perm):
    inv = [0] * len(perm)
    for k, image in enumerate(perm):
        inv[image - 1] = k + 1
    return tuple(inv)


# -- serialization ----------------------------------------------------------------------

def serialize(d: Diagram) -> str:
    """Versioned one-line text form, e.g. ``birdtrack-diagram/1 e6|V,V|V,V|d3,d3bar|0-4 1-4 4-5 2-5 3-5``.

    Edges are ``a-b`` for lines and ``a>b`` for symplectic forms oriented a to b.
    """
    edges = " ".join(f"{a}{'>' if j and signed(d.family) else '-'}{b}" for a, b, j in d.edges)
    return f"{SERIAL_VERSION} {d.family}|{','.join(d.sig_in)}|{','.join(d.sig_out)}|{','.join(d.vertices)}|{edges}"


def deserialize(text: str) -> tuple[Diagram | None, int]:
    """Parse :func:`serialize` output (any labelling); returns ``(diagram, sign)``."""
    text = text.strip()
    if not text.startswith(SERIAL_VERSION + " "):
        raise DiagramError(f"expected header {SERIAL_VERSION!r}")
    body = text[len(SERIAL_VERSION) + 1:]
    try:
        family, sin, sout, verts, edges = body.split("|")
    except ValueError as exc:
        raise DiagramError("expected five '|'-separated fields") from exc
    split = lambda s: tuple(x for x in s.split(",") if x)
    raw = []
    for tok in edges.split():
        sep = ">" if ">" in tok else "-"
        a, b = tok.split(sep)
        raw.append((int(a), int(b), (1, 1 if sep == ">" else 0)))
    sig_in, sig_out, vertices = split(sin), split(sout), split(verts)
    rank = len(sig_in) + len(sig_out)
    fixed = []
    for a, b, (s, j) in raw:
        va = _node_variance(sig_in, sig_out, vertices, a)
        vb = _node_variance(sig_in, sig_out, vertices, b)
        fixed.append((a, b, (s, 1 if (va == vb and signed(family)) else 0)))
    if any(x >= rank + len(vertices) for a, b, _ in raw for x in (a, b)):
        raise MalformedWiring("edge refers to a missing node")
    dia, f = _canonical(family, sig_in, sig_out, vertices, fixed)
    if dia is None:
        return None, 0
    return dia, 1 if f == ONE else -1


def to_dot(d: Diagram, name: str = "birdtrack") -> str:
    """Graphviz rendering; symplectic lines are drawn as arrows."""
    lines = [f"graph {name} {{", "  rankdir=LR;"]
    p_in, p_out = d.p, len(d.sig_out)
    for k in range(p_in):
        lines.append(f'  n{k} [shape=plaintext,label="in{k + 1}:{d.sig_in[k]}"];')
    for k in range(p_out):
        lines.append(f'  n{p_in + k} [shape=plaintext,label="out{k + 1}:{d.sig_out[k]}"];')
    for k, vt in enumerate(d.vertices):
        shape = "circle" if vt == "d3bar" else "point"
        lines.append(f'  n{d.rank + k} [shape={shape},label="",width=0.12];')
    for a, b, j in d.edges:
        attr = " [dir=forward]" if j and signed(d.family) else ""
        lines.append(f"  n{a} -- n{b}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def reflect(d: Diagram) -> Diagram:
    """Mirror a diagram, exchanging inputs with outputs.

    For e6 the vertex types are swapped as well, so the mirror image of a
    V-strand diagram is again a V-strand diagram.  Only defined for families
    where every edge stays a plain line (``su``, ``so``, ``e6``).
    """
    if signed(d.family):
        raise DiagramError("reflection is not a relabelling for symplectic families")
    p_in, p_out = d.p, len(d.sig_out)
    swap = {"d3": "d3bar", "d3bar": "d3", "d4": "d4"}

    def node(x):
        if x < p_in:
            return p_out + x
        if x < d.rank:
            return x - p_in
        return x

    # every variance flips together with the vertex types, so lines stay lines
    sig_in, sig_out = d.sig_out, d.sig_in
    raw = [(node(a), node(b), (1, j)) for a, b, j in d.edges]
    vertices = tuple(swap[v] for v in d.vertices) if d.family == "e6" else d.vertices
    out, _ = _canonical(d.family, sig_in, sig_out, vertices, raw)
    return out
