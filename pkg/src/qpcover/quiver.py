"""Quivers, paths, potentials and cyclic derivatives.

Paths are stored in traversal order: ``Path.arrows[0]`` is traversed first.
Products follow the convention ``p * q`` = "q, then p", so that
``compose(p, q)`` is defined when ``q`` ends where ``p`` starts.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple

from .errors import StructureError, ValidationError


class Path(NamedTuple):
    source: str
    target: str
    arrows: tuple = ()

    @property
    def length(self):
        return len(self.arrows)

    @property
    def is_lazy(self):
        return not self.arrows

    def is_cycle(self):
        return bool(self.arrows) and self.source == self.target

    def __str__(self):
        if not self.arrows:
            return f"e_{self.source}"
        # product notation, last traversed arrow first
        return "*".join(reversed(self.arrows))


def path_key(p):
    """Enumeration order: length, then arrow ids lexicographically."""
    return (len(p.arrows), p.arrows, p.source, p.target)


class Quiver:
    """A finite quiver whose vertices may be frozen.

    ``vertices`` takes ids or ``(id, frozen)`` pairs; ``arrows`` takes
    ``(id, source, target)`` triples.
    """

    def __init__(self, vertices: Iterable, arrows: Iterable = (), name: str | None = None):
        self.name = name
        vs, frozen = [], set()
        for v in vertices:
            if isinstance(v, tuple):
                v, fr = v
                if fr:
                    frozen.add(v)
            if v in vs:
                raise ValidationError(f"duplicate vertex {v!r}", witness=v)
            vs.append(v)
        self.vertices = tuple(vs)
        self.frozen = frozenset(frozen)
        self._vindex = {v: i for i, v in enumerate(self.vertices)}
        self.arrows = {}
        for a, s, t in arrows:
            if a in self.arrows:
                raise ValidationError(f"duplicate arrow {a!r}", witness=a)
            for end in (s, t):
                if end not in self._vindex:
                    raise ValidationError(f"arrow {a!r} uses undeclared vertex {end!r}", witness=a)
            self.arrows[a] = (s, t)
        self.out_arrows = {v: [] for v in self.vertices}
        self.in_arrows = {v: [] for v in self.vertices}
        for a in sorted(self.arrows):
            s, t = self.arrows[a]
            self.out_arrows[s].append(a)
            self.in_arrows[t].append(a)

    # basic data

    def __repr__(self):
        return f"Quiver({self.name or ''}: {len(self.vertices)} vertices, {len(self.arrows)} arrows)"

    def __eq__(self, other):
        return (isinstance(other, Quiver) and self.vertices == other.vertices
                and self.frozen == other.frozen and self.arrows == other.arrows)

    def __hash__(self):
        return hash((self.vertices, tuple(sorted(self.arrows.items()))))

    def vertex_index(self, v):
        return self._vindex[v]

    def unfrozen(self):
        return [v for v in self.vertices if v not in self.frozen]

    def source(self, a):
        return self.arrows[a][0]

    def target(self, a):
        return self.arrows[a][1]

    def has_vertex(self, v):
        return v in self._vindex

    # paths

    def lazy(self, v):
        if v not in self._vindex:
            raise StructureError(f"{v!r} is not a vertex")
        return Path(v, v, ())

    def path(self, arrows: Iterable[str], start: str | None = None) -> Path:
        """Build a path from arrows listed in traversal order."""
        arrows = tuple(arrows)
        if not arrows:
            if start is None:
                raise StructureError("a lazy path needs its vertex")
            return self.lazy(start)
        for a in arrows:
            if a not in self.arrows:
                raise StructureError(f"unknown arrow {a!r}")
        for a, b in zip(arrows, arrows[1:]):
            if self.target(a) != self.source(b):
                raise StructureError(f"arrows {a!r} and {b!r} do not compose")
        return Path(self.source(arrows[0]), self.target(arrows[-1]), arrows)

    def product(self, *factors: str) -> Path:
        """Path written in product notation: ``product('c', 'b', 'a')`` is c*b*a."""
        return self.path(reversed(factors))

    def check_path(self, p: Path):
        if p.arrows:
            q = self.path(p.arrows)
            if q != p:
                raise StructureError(f"path {p} does not belong to this quiver")
        elif p.source not in self._vindex or p.source != p.target:
            raise StructureError(f"path {p} does not belong to this quiver")

    def compose(self, p: Path, q: Path):
        """The product p*q (q first) or None when the endpoints do not match."""
        self.check_path(p)
        self.check_path(q)
        return concat(p, q)

    def enumerate_paths(self, source=None, target=None, max_len: int = 0):
        """All paths of length <= max_len, ordered by length then arrow ids."""
        if max_len < 0:
            raise ValueError("max_len must be nonnegative")
        starts = [source] if source is not None else list(self.vertices)
        layer = [self.lazy(v) for v in starts]
        found = list(layer)
        for _ in range(max_len):
            nxt = []
            for p in layer:
                for a in self.out_arrows[p.target]:
                    nxt.append(Path(p.source, self.target(a), p.arrows + (a,)))
            layer = nxt
            found.extend(layer)
        if target is not None:
            found = [p for p in found if p.target == target]
        found.sort(key=path_key)
        return found

    def opposite(self):
        return Quiver([(v, v in self.frozen) for v in self.vertices],
                      [(a, t, s) for a, (s, t) in self.arrows.items()],
                      name=(self.name + "^op") if self.name else None)

    def reverse_path(self, p: Path) -> Path:
        """The same arrows read in the opposite quiver."""
        return Path(p.target, p.source, tuple(reversed(p.arrows)))


def concat(p: Path, q: Path):
    """p*q without validation; None when t(q) != s(p)."""
    if q.target != p.source:
        return None
    if not q.arrows:
        return p
    if not p.arrows:
        return q
    return Path(q.source, p.target, q.arrows + p.arrows)


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class Element:
    """A finite linear combination of paths, optionally truncated at an order."""

    __slots__ = ("quiver", "terms", "order")

    def __init__(self, quiver: Quiver, terms=None, order: int | None = None):
        self.quiver = quiver
        self.order = order
        clean = {}
        for p, c in (terms or {}).items():
            if order is not None and len(p.arrows) > order:
                continue
            c = _frac(c)
            if c:
                clean[p] = clean.get(p, 0) + c
                if not clean[p]:
                    del clean[p]
        self.terms = clean

    @classmethod
    def of(cls, quiver, path, coeff=1, order=None):
        return cls(quiver, {path: coeff}, order)

    def _check(self, other):
        if not isinstance(other, Element) or other.quiver is not self.quiver and other.quiver != self.quiver:
            raise StructureError("elements live over different quivers")

    def _order_with(self, other):
        if self.order is None:
            return other.order
        if other.order is None:
            return self.order
        return min(self.order, other.order)

    def __add__(self, other):
        self._check(other)
        t = dict(self.terms)
        for p, c in other.terms.items():
            t[p] = t.get(p, 0) + c
        return Element(self.quiver, t, self._order_with(other))

    def __neg__(self):
        return Element(self.quiver, {p: -c for p, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, scalar):
        return Element(self.quiver, {p: scalar * c for p, c in self.terms.items()}, self.order)

    def __mul__(self, other):
        if not isinstance(other, Element):
            return self.__rmul__(other)
        self._check(other)
        order = self._order_with(other)
        out = {}
        for p, c in self.terms.items():
            for q, d in other.terms.items():
                r = concat(p, q)
                if r is None or (order is not None and len(r.arrows) > order):
                    continue
                out[r] = out.get(r, 0) + c * d
        return Element(self.quiver, out, order)

    def truncate(self, order: int):
        return Element(self.quiver, self.terms, order)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Element) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{p}" for p, c in sorted(self.terms.items(), key=lambda pc: path_key(pc[0])))


class Potential:
    """A finite rational combination of cycles.

    ``terms`` are ``(coefficient, cycle)`` pairs; cycles may be given as Path
    objects or as arrow sequences in traversal order.
    """

    def __init__(self, quiver: Quiver, terms: Iterable = ()):
        self.quiver = quiver
        merged = {}
        for c, cyc in terms:
            if not isinstance(cyc, Path):
                cyc = quiver.path(cyc)
            else:
                quiver.check_path(cyc)
            if not cyc.is_cycle():
                raise ValidationError(f"potential term {cyc} is not a closed path", witness=cyc)
            merged[cyc] = merged.get(cyc, 0) + _frac(c)
        self.terms = tuple((c, p) for p, c in merged.items() if c)

    @classmethod
    def zero(cls, quiver):
        return cls(quiver, ())

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        return Potential(self.quiver, self.terms + other.terms)

    def scaled(self, s):
        return Potential(self.quiver, [(s * c, p) for c, p in self.terms])

    def cyclic_normal_form(self):
        """Rotate each cycle to its smallest rotation and merge."""
        return Potential(self.quiver, [(c, canonical_rotation(self.quiver, p)) for c, p in self.terms])

    def equivalent(self, other):
        a = dict((p, c) for c, p in self.cyclic_normal_form().terms)
        b = dict((p, c) for c, p in other.cyclic_normal_form().terms)
        return a == b

    def __eq__(self, other):
        return isinstance(other, Potential) and dict((p, c) for c, p in self.terms) == dict(
            (p, c) for c, p in other.terms)

    def opposite(self, qop: Quiver | None = None):
        qop = qop or self.quiver.opposite()
        return Potential(qop, [(c, self.quiver.reverse_path(p)) for c, p in self.terms])

    def min_cycle_length(self):
        return min((len(p.arrows) for _, p in self.terms), default=None)

    def arrows_used(self):
        return sorted({a for _, p in self.terms for a in p.arrows})

    def __repr__(self):
        return "Potential(" + " + ".join(f"{c}*{p}" for c, p in self.terms) + ")"


def canonical_rotation(quiver: Quiver, p: Path) -> Path:
    """The lexicographically smallest rotation of a cycle."""
    arr = p.arrows
    best = min(range(len(arr)), key=lambda i: arr[i:] + arr[:i])
    v = quiver.source(arr[best])
    return Path(v, v, arr[best:] + arr[:best])


def cyclic_derivative(a: str, w: Potential) -> Element:
    """Sum over occurrences of ``a`` of the rotated remainder of each cycle."""
    q = w.quiver
    if a not in q.arrows:
        raise StructureError(f"unknown arrow {a!r}")
    out = {}
    for c, cyc in w.terms:
        arr = cyc.arrows
        for i, b in enumerate(arr):
            if b != a:
                continue
            rest = arr[i + 1:] + arr[:i]
            if rest:
                p = Path(q.target(a), q.source(a), rest)
            else:
                p = q.lazy(q.source(a))
            out[p] = out.get(p, 0) + c
    return Element(q, out)


def opposite(quiver: Quiver, potential: Potential | None = None):
    qop = quiver.opposite()
    if potential is None:
        return qop, Potential.zero(qop)
    return qop, potential.opposite(qop)
