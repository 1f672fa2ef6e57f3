"""Truncated Jacobian algebras CQ^l / <R^l> and their projective modules.

The relation space is computed separately for every source vertex k: it is the
span of all products u * (d_a W) * v with v starting at k, truncated at length
l.  Rows are kept in echelon form with the pivot at the latest path in the
enumeration order, so the paths that never become pivots are exactly the
greedy basis (earliest independent classes).
"""
from __future__ import annotations

import random
from fractions import Fraction

from .errors import StructureError, ValidationError
from .quiver import Element, Path, Potential, Quiver, cyclic_derivative


class _SourceBlock:
    """Relation space and normal forms for all paths starting at one vertex."""

    def __init__(self, alg: "TruncatedJacobianAlgebra", k: str, shuffle_seed=None):
        q, l = alg.quiver, alg.order
        self.paths = q.enumerate_paths(source=k, max_len=l)
        self.index = {p.arrows: i for i, p in enumerate(self.paths)}
        pivots = {}
        vectors = self._relation_vectors(alg, k)
        if shuffle_seed is not None:
            vectors = list(vectors)
            random.Random(shuffle_seed).shuffle(vectors)
        for vec in vectors:
            _insert(pivots, vec)
        # back-substitute so every row tail consists of non-pivot paths only
        for m in sorted(pivots):
            row = pivots[m]
            for i in [i for i in row if i != m and i in pivots]:
                c = row.get(i)
                if not c:
                    continue
                for j, v in pivots[i].items():
                    nv = row.get(j, 0) - c * v
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
        self.pivots = pivots
        self.basis_idx = [i for i in range(len(self.paths)) if i not in pivots]
        self.basis = [self.paths[i] for i in self.basis_idx]
        self.coord = {i: n for n, i in enumerate(self.basis_idx)}

    def _relation_vectors(self, alg, k):
        l = alg.order
        index = self.index
        for v in self.paths:
            lv = len(v.arrows)
            for r_terms, rmin, rtarget in alg._relations_from.get(v.target, ()):
                room = l - lv - rmin
                if room < 0:
                    continue
                for u in alg.paths_from(rtarget, room):
                    lu = len(u.arrows)
                    vec = {}
                    for p_arrows, c in r_terms:
                        if lv + len(p_arrows) + lu > l:
                            continue
                        key = index[v.arrows + p_arrows + u.arrows]
                        vec[key] = vec.get(key, 0) + c
                    vec = {i: c for i, c in vec.items() if c}
                    if vec:
                        yield vec

    def normal_form_index(self, i):
        """Coordinates (basis position -> coefficient) of the class of path i."""
        row = self.pivots.get(i)
        if row is None:
            return {self.coord[i]: Fraction(1)}
        return {self.coord[j]: -c for j, c in row.items() if j != i}


def _insert(pivots, vec):
    while vec:
        m = max(vec)
        row = pivots.get(m)
        if row is None:
            c = vec[m]
            if c != 1:
                vec = {i: x / c for i, x in vec.items()}
            pivots[m] = vec
            return True
        c = vec[m]
        for i, x in row.items():
            nv = vec.get(i, 0) - c * x
            if nv:
                vec[i] = nv
            else:
                vec.pop(i, None)
    return False


class TruncatedJacobianAlgebra:
    def __init__(self, quiver: Quiver, potential: Potential | None, order: int, shuffle_seed=None):
        if order < 1:
            raise ValidationError("order must be at least 1")
        potential = potential if potential is not None else Potential.zero(quiver)
        if potential.quiver != quiver:
            raise StructureError("potential lives over a different quiver")
        short = [p for _, p in potential.terms if len(p.arrows) < 3]
        if short:
            raise ValidationError(f"potential cycle {short[0]} has length < 3", witness=short[0])
        self.quiver = quiver
        self.potential = potential
        self.order = order
        self._shuffle_seed = shuffle_seed
        self.relations = {}
        self._relations_from = {}
        for a in sorted(quiver.arrows):
            r = cyclic_derivative(a, potential)
            if r.is_zero():
                continue
            self.relations[a] = r
            terms = tuple((p.arrows, c) for p, c in r.terms.items())
            rmin = min(len(p) for p, _ in terms)
            self._relations_from.setdefault(quiver.target(a), []).append((terms, rmin, quiver.source(a)))
        self._paths_from = {}
        self._blocks = {}

    def paths_from(self, v, max_len):
        cached = self._paths_from.get(v)
        if cached is None:
            cached = self.quiver.enumerate_paths(source=v, max_len=self.order)
            self._paths_from[v] = cached
        # cached list is sorted by length, so a prefix suffices
        out = []
        for p in cached:
            if len(p.arrows) > max_len:
                break
            out.append(p)
        return out

    def block(self, k) -> _SourceBlock:
        b = self._blocks.get(k)
        if b is None:
            if not self.quiver.has_vertex(k):
                raise StructureError(f"{k!r} is not a vertex")
            b = _SourceBlock(self, k, self._shuffle_seed)
            self._blocks[k] = b
        return b

    def dim(self) -> int:
        return sum(len(self.block(k).basis) for k in self.quiver.vertices)

    def dims_by_block(self) -> dict:
        out = {}
        for k in self.quiver.vertices:
            for p in self.block(k).basis:
                out[(k, p.target)] = out.get((k, p.target), 0) + 1
        return out

    def basis(self):
        return [p for k in self.quiver.vertices for p in self.block(k).basis]

    def normal_form(self, x: Element) -> Element:
        """Rewrite x in the chosen basis; paths longer than the order vanish."""
        out = {}
        for p, c in x.terms.items():
            if len(p.arrows) > self.order:
                continue
            blk = self.block(p.source)
            i = blk.index[p.arrows]
            for j, v in blk.normal_form_index(i).items():
                bp = blk.basis[j]
                out[bp] = out.get(bp, 0) + c * v
        return Element(self.quiver, out, self.order)

    def reduce(self, x: Element) -> Element:
        return self.normal_form(x)

    def projective(self, k) -> "ProjectiveModule":
        return ProjectiveModule(self, k)


def build_truncated_jacobian(quiver: Quiver, potential: Potential | None, order: int,
                             shuffle_seed=None) -> TruncatedJacobianAlgebra:
    return TruncatedJacobianAlgebra(quiver, potential, order, shuffle_seed)


class Module:
    """A finite-dimensional representation given by a basis and sparse arrow actions.

    ``actions[a]`` maps a basis position j to a dict {i: coefficient}, meaning
    a . b_j = sum_i coefficient * b_i.
    """

    def __init__(self, quiver: Quiver, labels, vertex_of, actions):
        self.quiver = quiver
        self.labels = list(labels)
        self.vertex_of = list(vertex_of)
        self.actions = {a: {j: dict(col) for j, col in cols.items() if col} for a, cols in actions.items()}
        for a in quiver.arrows:
            self.actions.setdefault(a, {})
        for a, cols in self.actions.items():
            s, t = quiver.arrows[a]
            for j, col in cols.items():
                if self.vertex_of[j] != s or any(self.vertex_of[i] != t for i in col):
                    raise ValidationError(f"action of {a} does not respect vertices", witness=a)

    @property
    def dim(self):
        return len(self.labels)

    def dim_vector(self) -> dict:
        out = {v: 0 for v in self.quiver.vertices}
        for v in self.vertex_of:
            out[v] += 1
        return out

    def dim_tuple(self):
        dv = self.dim_vector()
        return tuple(dv[v] for v in self.quiver.vertices)

    def matrix(self, a):
        n = self.dim
        m = [[Fraction(0)] * n for _ in range(n)]
        for j, col in self.actions[a].items():
            for i, c in col.items():
                m[i][j] = c
        return m

    def apply(self, a, vec: dict) -> dict:
        out = {}
        cols = self.actions[a]
        for j, c in vec.items():
            for i, x in cols.get(j, {}).items():
                out[i] = out.get(i, 0) + c * x
        return {i: c for i, c in out.items() if c}

    def apply_path(self, arrows, vec: dict) -> dict:
        for a in arrows:
            vec = self.apply(a, vec)
            if not vec:
                break
        return vec

    def apply_element(self, x: Element, vec: dict) -> dict:
        out = {}
        for p, c in x.terms.items():
            if p.arrows:
                w = self.apply_path(p.arrows, vec)
            else:
                w = {j: v for j, v in vec.items() if self.vertex_of[j] == p.source}
            for i, v in w.items():
                out[i] = out.get(i, 0) + c * v
        return {i: c for i, c in out.items() if c}

    def annihilated_by(self, x: Element) -> bool:
        return all(not self.apply_element(x, {j: Fraction(1)}) for j in range(self.dim))


class ProjectiveModule(Module):
    """P_k^l = A^l e_k with its greedy path basis."""

    def __init__(self, alg: TruncatedJacobianAlgebra, k):
        blk = alg.block(k)
        self.algebra = alg
        self.vertex = k
        self.basis = list(blk.basis)
        q = alg.quiver
        actions = {a: {} for a in q.arrows}
        for j, p in enumerate(self.basis):
            if len(p.arrows) >= alg.order:
                continue
            for a in q.out_arrows[p.target]:
                i = blk.index[p.arrows + (a,)]
                col = blk.normal_form_index(i)
                if col:
                    actions[a][j] = col
        super().__init__(q, [str(p) for p in self.basis], [p.target for p in self.basis], actions)

    def coordinates(self, x: Element) -> dict:
        """Coordinates of the class of x (paths starting at k) in this basis."""
        blk = self.algebra.block(self.vertex)
        out = {}
        for p, c in x.terms.items():
            if p.source != self.vertex:
                raise StructureError(f"path {p} does not start at {self.vertex}")
            if len(p.arrows) > self.algebra.order:
                continue
            for j, v in blk.normal_form_index(blk.index[p.arrows]).items():
                out[j] = out.get(j, 0) + c * v
        return {j: c for j, c in out.items() if c}

    def nilpotent_at_order(self) -> bool:
        """Every product of order+1 arrow actions vanishes."""
        frontier = [{j: Fraction(1)} for j in range(self.dim)]
        for _ in range(self.algebra.order + 1):
            nxt = []
            for vec in frontier:
                for a in self.quiver.arrows:
                    w = self.apply(a, vec)
                    if w:
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                return True
        return not frontier


def projective_presentation(alg: TruncatedJacobianAlgebra, k) -> ProjectiveModule:
    return ProjectiveModule(alg, k)


class SupportData:
    def __init__(self, vertices, arrows):
        self.vertices = frozenset(vertices)
        self.arrows = frozenset(arrows)

    def __repr__(self):
        return f"SupportData(vertices={sorted(self.vertices)}, arrows={sorted(self.arrows)})"

    def __eq__(self, other):
        return isinstance(other, SupportData) and (self.vertices, self.arrows) == (other.vertices, other.arrows)


def supports(m: Module) -> SupportData:
    return SupportData(set(m.vertex_of), [a for a, cols in m.actions.items() if cols])


def stabilization_order(quiver: Quiver, potential: Potential | None, l_max: int):
    """Smallest l <= l_max with dim A^l = dim A^(l+1); None when not reached."""
    if l_max < 2:
        raise ValidationError("l_max must be at least 2")
    prev = build_truncated_jacobian(quiver, potential, 1).dim()
    for l in range(1, l_max + 1):
        cur = build_truncated_jacobian(quiver, potential, l + 1).dim()
        if cur == prev:
            return l
        prev = cur
    return None


def projective_stabilization(quiver, potential, k, l_max: int):
    """Smallest l <= l_max with dim P_k^l = dim P_k^(l+1), with that module."""
    prev = build_truncated_jacobian(quiver, potential, 1).projective(k)
    for l in range(1, l_max + 1):
        cur = build_truncated_jacobian(quiver, potential, l + 1).projective(k)
        if cur.dim == prev.dim:
            return l, prev
        prev = cur
    return None, None
