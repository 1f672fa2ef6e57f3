"""Coverings of quivers: fibers, deck groups, lifts, sigma/pi and pullbacks."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import PreconditionError, StructureError, ValidationError
from .quiver import Element, Path, Potential, Quiver


@dataclass
class CoveringReport:
    problems: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.problems

    def add(self, kind, message, witness=None):
        self.problems.append((kind, message, witness))

    def __str__(self):
        if self.ok:
            return "valid covering"
        return "\n".join(f"{k}: {m}" for k, m, _ in self.problems)


def _compose_perm(g, h):
    """g after h on (vertex map, arrow map) pairs."""
    return ({v: g[0][h[0][v]] for v in h[0]}, {a: g[1][h[1][a]] for a in h[1]})


def _freeze(g):
    return (tuple(sorted(g[0].items())), tuple(sorted(g[1].items())))


class QuiverCovering:
    """pi: total -> base together with a deck group given by generators.

    ``generators`` is a list of (vertex permutation, arrow permutation) dicts.
    """

    def __init__(self, total: Quiver, base: Quiver, vmap: dict, amap: dict, deck_order: int,
                 generators=(), name: str | None = None):
        self.total = total
        self.base = base
        self.vmap = dict(vmap)
        self.amap = dict(amap)
        self.deck_order = deck_order
        self.generators = [(dict(gv), dict(ga)) for gv, ga in generators]
        self.name = name
        self._out = {}
        self._in = {}
        for a, (s, t) in total.arrows.items():
            ab = self.amap.get(a)
            self._out.setdefault((s, ab), []).append(a)
            self._in.setdefault((t, ab), []).append(a)
        self._group = None

    def __repr__(self):
        return f"QuiverCovering({self.name or ''}: {len(self.total.vertices)} -> {len(self.base.vertices)}, d={self.deck_order})"

    @property
    def d(self):
        return self.deck_order

    # fibers

    def fiber(self, vbar):
        return [v for v in self.total.vertices if self.vmap[v] == vbar]

    def arrow_fiber(self, abar):
        return [a for a in sorted(self.total.arrows) if self.amap[a] == abar]

    # deck group

    def identity_element(self):
        return ({v: v for v in self.total.vertices}, {a: a for a in self.total.arrows})

    def deck_elements(self, limit: int | None = None):
        """All group elements generated by the declared generators (identity first)."""
        if self._group is not None:
            return self._group
        limit = limit or max(4 * self.deck_order, 64)
        ident = self.identity_element()
        seen = {_freeze(ident): ident}
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            for h in self.generators:
                k = _compose_perm(h, g)
                key = _freeze(k)
                if key not in seen:
                    seen[key] = k
                    queue.append(k)
                    if len(seen) > limit:
                        raise ValidationError("deck group is larger than declared", witness=len(seen))
        self._group = list(seen.values())
        return self._group

    def act_path(self, g, p: Path) -> Path:
        return Path(g[0][p.source], g[0][p.target], tuple(g[1][a] for a in p.arrows))

    # validation

    def validate(self) -> CoveringReport:
        rep = CoveringReport()
        Q, B = self.total, self.base
        for v in Q.vertices:
            if v not in self.vmap:
                rep.add("vmap", f"vertex {v} has no image", v)
            elif not B.has_vertex(self.vmap[v]):
                rep.add("vmap", f"vertex {v} maps to unknown {self.vmap[v]}", v)
            elif (v in Q.frozen) != (self.vmap[v] in B.frozen):
                rep.add("frozen", f"vertex {v} and its image differ in frozen flag", v)
        for a in Q.arrows:
            ab = self.amap.get(a)
            if ab not in B.arrows:
                rep.add("amap", f"arrow {a} maps to unknown {ab}", a)
                continue
            s, t = Q.arrows[a]
            if self.vmap.get(s) != B.source(ab) or self.vmap.get(t) != B.target(ab):
                rep.add("amap", f"arrow {a} does not respect endpoints", a)
        if not rep.ok:
            return rep
        for vb in B.vertices:
            if not self.fiber(vb):
                rep.add("surjective", f"base vertex {vb} has an empty fiber", vb)
        # local bijection at every vertex
        for v in Q.vertices:
            vb = self.vmap[v]
            for ab in B.out_arrows[vb]:
                n = len(self._out.get((v, ab), []))
                if n != 1:
                    rep.add("local", f"{n} lifts of {ab} start at {v}", (v, ab))
            for ab in B.in_arrows[vb]:
                n = len(self._in.get((v, ab), []))
                if n != 1:
                    rep.add("local", f"{n} lifts of {ab} end at {v}", (v, ab))
        for gi, (gv, ga) in enumerate(self.generators):
            if sorted(gv) != sorted(Q.vertices) or sorted(gv.values()) != sorted(Q.vertices):
                rep.add("deck", f"generator {gi} is not a vertex permutation", gi)
                continue
            if sorted(ga) != sorted(Q.arrows) or sorted(ga.values()) != sorted(Q.arrows):
                rep.add("deck", f"generator {gi} is not an arrow permutation", gi)
                continue
            for a, (s, t) in Q.arrows.items():
                if Q.arrows[ga[a]] != (gv[s], gv[t]):
                    rep.add("deck", f"generator {gi} is not a quiver automorphism at {a}", (gi, a))
                    break
                if self.amap[ga[a]] != self.amap[a]:
                    rep.add("deck", f"generator {gi} does not commute with pi at {a}", (gi, a))
                    break
            for v in Q.vertices:
                if self.vmap[gv[v]] != self.vmap[v]:
                    rep.add("deck", f"generator {gi} does not commute with pi at {v}", (gi, v))
                    break
        if not rep.ok:
            return rep
        try:
            group = self.deck_elements()
        except ValidationError as e:
            rep.add("order", str(e), e.witness)
            return rep
        if len(group) != self.deck_order:
            rep.add("order", f"generated group has order {len(group)}, declared {self.deck_order}", len(group))
        for g in group[1:]:
            fixed = [v for v in Q.vertices if g[0][v] == v] + [a for a in Q.arrows if g[1][a] == a]
            if fixed:
                rep.add("free", f"a non-identity deck element fixes {fixed[0]}", fixed[0])
                break
        for vb in B.vertices:
            fib = self.fiber(vb)
            orbit = {g[0][fib[0]] for g in group} if fib else set()
            if set(fib) != orbit:
                rep.add("orbit", f"fiber over {vb} is not a single deck orbit", vb)
            if len(fib) != self.deck_order:
                rep.add("orbit", f"fiber over {vb} has size {len(fib)}, expected {self.deck_order}", vb)
        for ab in B.arrows:
            fib = self.arrow_fiber(ab)
            orbit = {g[1][fib[0]] for g in group} if fib else set()
            if set(fib) != orbit:
                rep.add("orbit", f"fiber over arrow {ab} is not a single deck orbit", ab)
        return rep

    def check(self):
        rep = self.validate()
        if not rep.ok:
            kind, msg, wit = rep.problems[0]
            raise ValidationError(f"invalid covering: {msg}", witness=wit)
        return self

    # paths

    def project_path(self, p: Path) -> Path:
        return Path(self.vmap[p.source], self.vmap[p.target], tuple(self.amap[a] for a in p.arrows))

    def lift_path(self, pbar: Path, start=None, end=None) -> Path:
        """The unique lift of pbar beginning at ``start`` (or finishing at ``end``)."""
        if (start is None) == (end is None):
            raise PreconditionError("give exactly one of start or end")
        if start is not None:
            if self.vmap.get(start) != pbar.source:
                raise PreconditionError(f"{start} is not over {pbar.source}")
            v, arrows = start, []
            for ab in pbar.arrows:
                cand = self._out.get((v, ab), [])
                if len(cand) != 1:
                    raise ValidationError(f"no unique lift of {ab} at {v}", witness=(v, ab))
                arrows.append(cand[0])
                v = self.total.target(cand[0])
            return Path(start, v, tuple(arrows))
        if self.vmap.get(end) != pbar.target:
            raise PreconditionError(f"{end} is not over {pbar.target}")
        v, arrows = end, []
        for ab in reversed(pbar.arrows):
            cand = self._in.get((v, ab), [])
            if len(cand) != 1:
                raise ValidationError(f"no unique lift of {ab} ending at {v}", witness=(v, ab))
            arrows.append(cand[0])
            v = self.total.source(cand[0])
        return Path(v, end, tuple(reversed(arrows)))

    def lifts(self, pbar: Path):
        return [self.lift_path(pbar, start=v) for v in self.fiber(pbar.source)]

    def sigma(self, x: Element) -> Element:
        """Sum of all lifts, extended linearly."""
        if x.quiver != self.base:
            raise StructureError("sigma expects an element over the base quiver")
        out = {}
        for p, c in x.terms.items():
            for lp in self.lifts(p):
                out[lp] = out.get(lp, 0) + c
        return Element(self.total, out, x.order)

    def pi(self, x: Element) -> Element:
        if x.quiver != self.total:
            raise StructureError("pi expects an element over the total quiver")
        out = {}
        for p, c in x.terms.items():
            pp = self.project_path(p)
            out[pp] = out.get(pp, 0) + c
        return Element(self.base, out, x.order)

    def sigma_potential(self, wbar: Potential) -> Potential:
        terms = []
        for c, cyc in wbar.terms:
            for lp in self.lifts(cyc):
                if lp.source != lp.target:
                    raise ValidationError(f"a lift of {cyc} is not closed", witness=lp)
                terms.append((c, lp))
        return Potential(self.total, terms)

    def project_potential(self, w: Potential) -> Potential:
        return Potential(self.base, [(c, self.project_path(p)) for c, p in w.terms])

    # deck rigidity

    def extend_deck(self, v0, w0):
        """The automorphism commuting with pi sending v0 to w0, if one exists.

        Built by propagating along arrows; requires the component of v0 to be
        all of the total quiver.
        """
        if self.vmap[v0] != self.vmap[w0]:
            return None
        Q = self.total
        vm, am = {v0: w0}, {}
        queue = deque([v0])
        while queue:
            u = queue.popleft()
            for a in Q.out_arrows[u]:
                cand = self._out.get((vm[u], self.amap[a]), [])
                if len(cand) != 1:
                    return None
                b = cand[0]
                if am.setdefault(a, b) != b:
                    return None
                t = Q.target(a)
                if t in vm:
                    if vm[t] != Q.target(b):
                        return None
                else:
                    vm[t] = Q.target(b)
                    queue.append(t)
            for a in Q.in_arrows[u]:
                cand = self._in.get((vm[u], self.amap[a]), [])
                if len(cand) != 1:
                    return None
                b = cand[0]
                if am.setdefault(a, b) != b:
                    return None
                s = Q.source(a)
                if s in vm:
                    if vm[s] != Q.source(b):
                        return None
                else:
                    vm[s] = Q.source(b)
                    queue.append(s)
        if len(vm) != len(Q.vertices) or len(set(vm.values())) != len(vm):
            return None
        return vm, am


def identity_covering(q: Quiver, name=None) -> QuiverCovering:
    return QuiverCovering(q, q, {v: v for v in q.vertices}, {a: a for a in q.arrows}, 1, [], name=name)


def components(q: Quiver):
    """Connected components of the underlying undirected graph."""
    adj = {v: set() for v in q.vertices}
    for s, t in q.arrows.values():
        adj[s].add(t)
        adj[t].add(s)
    seen, comps = set(), []
    for v in q.vertices:
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp, key=q.vertex_index))
    return comps


def compose_coverings(c1: QuiverCovering, c2: QuiverCovering, name=None) -> QuiverCovering:
    """c2 after c1; the deck group is recomputed from the composite map."""
    if c1.base != c2.total:
        raise StructureError("base of the first covering is not the total of the second")
    vmap = {v: c2.vmap[c1.vmap[v]] for v in c1.total.vertices}
    amap = {a: c2.amap[c1.amap[a]] for a in c1.total.arrows}
    comp = QuiverCovering(c1.total, c2.base, vmap, amap, 1, [], name=name)
    if len(components(c1.total)) != 1:
        raise StructureError("composition needs a connected total quiver")
    v0 = c1.total.vertices[0]
    elements = []
    for w in comp.fiber(vmap[v0]):
        g = comp.extend_deck(v0, w)
        if g is not None:
            elements.append(g)
    gens = []
    span = {_freeze(comp.identity_element())}
    for g in elements:
        if _freeze(g) in span:
            continue
        gens.append(g)
        trial = QuiverCovering(c1.total, c2.base, vmap, amap, len(elements), gens)
        span = {_freeze(h) for h in trial.deck_elements(limit=len(elements) + 1)}
    return QuiverCovering(c1.total, c2.base, vmap, amap, len(elements), gens, name=name)


class SheetLabeling:
    """Sheet numbers for a cyclic deck group, with the induced arrow shifts."""

    def __init__(self, covering: QuiverCovering, sheets: dict, generator=None):
        self.covering = covering
        self.d = covering.deck_order
        self.sheets = {v: int(s) % self.d for v, s in sheets.items()}
        missing = [v for v in covering.total.vertices if v not in self.sheets]
        if missing:
            raise ValidationError(f"vertices without sheet: {missing}", witness=missing)
        if generator is None:
            generator = self._find_generator()
        self.generator = generator
        if generator is None:
            raise ValidationError("no deck element shifts every sheet label by one")
        self.shifts = {}
        Q = covering.total
        for a, (s, t) in Q.arrows.items():
            ab = covering.amap[a]
            delta = (self.sheets[t] - self.sheets[s]) % self.d
            if self.shifts.setdefault(ab, delta) != delta:
                raise ValidationError(f"lifts of {ab} have different sheet shifts", witness=ab)
        for ab in covering.base.arrows:
            self.shifts.setdefault(ab, 0)

    def _find_generator(self):
        for g in self.covering.deck_elements():
            if all(self.sheets[g[0][v]] == (self.sheets[v] + 1) % self.d for v in self.sheets):
                return g
        return None

    def vertex_on_sheet(self, vbar, s):
        for v in self.covering.fiber(vbar):
            if self.sheets[v] == s % self.d:
                return v
        raise ValidationError(f"no vertex over {vbar} on sheet {s}")


def compute_sheet_labeling(c: QuiverCovering) -> SheetLabeling:
    """Label sheets by propagation from the first base vertex."""
    comps = components(c.total)
    if len(comps) != 1:
        raise ValidationError(f"sheet labeling is ambiguous: total quiver has components {comps}",
                              witness=comps)
    gen = None
    for g in c.deck_elements():
        v0 = c.total.vertices[0]
        orbit, v = [], v0
        for _ in range(c.d):
            orbit.append(v)
            v = g[0][v]
        if v == v0 and len(set(orbit)) == c.d:
            gen = g
            break
    if gen is None:
        raise ValidationError("deck group is not cyclic")
    sheets = {}

    def label_fiber(v):
        w = v
        for s in range(c.d):
            sheets[w] = s
            w = gen[0][w]

    B = c.base
    start = B.vertices[0]
    label_fiber(c.fiber(start)[0])
    done = {start}
    queue = deque([start])
    while queue:
        ub = queue.popleft()
        u0 = next(v for v in c.fiber(ub) if sheets[v] == 0)
        for ab in B.out_arrows[ub]:
            wb = B.target(ab)
            if wb not in done:
                w = c.lift_path(B.path([ab]), start=u0).target
                label_fiber(w)
                done.add(wb)
                queue.append(wb)
        for ab in B.in_arrows[ub]:
            wb = B.source(ab)
            if wb not in done:
                w = c.lift_path(B.path([ab]), end=u0).source
                label_fiber(w)
                done.add(wb)
                queue.append(wb)
    return SheetLabeling(c, sheets, gen)


def pullback_module(c: QuiverCovering, m, algebra=None, base_algebra=None):
    """The base module with V_kbar = sum of V_k and V_abar = sum of V_a.

    When both truncated algebras are given, the lifted base relations are first
    checked to vanish in the cover algebra.
    """
    from .jacobian import Module

    if m.quiver != c.total:
        raise StructureError("module lives over a different quiver")
    if algebra is not None and base_algebra is not None:
        for ab, r in base_algebra.relations.items():
            if not algebra.normal_form(c.sigma(r.truncate(algebra.order))).is_zero():
                raise ValidationError(f"lifted relation for {ab} is not in the cover ideal", witness=ab)
    actions = {ab: {} for ab in c.base.arrows}
    for a, cols in m.actions.items():
        ab = c.amap[a]
        for j, col in cols.items():
            tgt = actions[ab].setdefault(j, {})
            for i, x in col.items():
                tgt[i] = tgt.get(i, 0) + x
    vertex_of = [c.vmap[v] for v in m.vertex_of]
    out = Module(c.base, m.labels, vertex_of, actions)
    out.cover_vertex_of = list(m.vertex_of)
    return out


def lift_map(c: QuiverCovering, pbase, pcover):
    """Matrix (dict of columns) sending the base basis u_pbar to the class of its lift at k."""
    from .quiver import Element

    k = pcover.vertex
    cols = []
    for p in pbase.basis:
        lp = c.lift_path(p, start=k)
        cols.append(pcover.coordinates(Element(c.total, {lp: 1})))
    return cols


def sigma_pk_isomorphism(c: QuiverCovering, pbase, pcover) -> tuple:
    """Check that lifting at k identifies the base projective with the pullback.

    Returns (ok, reason).  The map u_pbar -> lift at k must be bijective and
    intertwine the base action with the pulled-back action.
    """
    from .seeds import matrix_rank

    pb = pullback_module(c, pcover)
    if pb.dim != pbase.dim:
        return False, f"dimensions differ: {pbase.dim} vs {pb.dim}"
    cols = lift_map(c, pbase, pcover)
    n = pb.dim
    mat = [[cols[j].get(i, Fraction(0)) for j in range(n)] for i in range(n)]
    if n and matrix_rank(mat) != n:
        return False, "lift map is not invertible"
    for ab in c.base.arrows:
        for j in range(n):
            lhs = pb.apply(ab, cols[j])
            rhs = {}
            for i, x in pbase.actions[ab].get(j, {}).items():
                for r, y in cols[i].items():
                    rhs[r] = rhs.get(r, 0) + x * y
            rhs = {r: v for r, v in rhs.items() if v}
            if lhs != rhs:
                return False, f"action of {ab} differs on basis element {pbase.labels[j]}"
    return True, "ok"


def check_sigma_injectivity(c: QuiverCovering, base_algebra, algebra) -> tuple:
    """Kernel test for the induced map from the base algebra to the cover algebra.

    Components of sigma over different sheets are deck translates of each
    other, so it suffices to test x -> sigma(x) e_k for one k per base vertex.
    Returns (injective, witness) where witness names a base vertex with a
    nonzero kernel.
    """
    from .seeds import matrix_rank

    for vb in c.base.vertices:
        k = c.fiber(vb)[0]
        pbase = base_algebra.projective(vb)
        pcover = algebra.projective(k)
        cols = lift_map(c, pbase, pcover)
        if not cols:
            continue
        mat = [[col.get(i, Fraction(0)) for col in cols] for i in range(pcover.dim)]
        if matrix_rank(mat) != len(cols):
            return False, vb
    return True, None


def cyclic_cover(base: Quiver, d: int, shifts: dict, name=None):
    """The d:1 cover with vertices v^s whose lift of abar from sheet s ends on sheet s + shift.

    Returns (covering, sheet labeling).
    """
    if d < 1:
        raise PreconditionError("d must be positive")

    def nm(x, s):
        return f"{x}^{s}"

    verts = [(nm(v, s), v in base.frozen) for s in range(d) for v in base.vertices]
    arrows = [(nm(ab, s), nm(src, s), nm(tgt, (s + shifts.get(ab, 0)) % d))
              for s in range(d) for ab, (src, tgt) in base.arrows.items()]
    total = Quiver(verts, arrows, name=name)
    vmap = {nm(v, s): v for s in range(d) for v in base.vertices}
    amap = {nm(ab, s): ab for s in range(d) for ab in base.arrows}
    gen = ({nm(v, s): nm(v, (s + 1) % d) for s in range(d) for v in base.vertices},
           {nm(ab, s): nm(ab, (s + 1) % d) for s in range(d) for ab in base.arrows})
    c = QuiverCovering(total, base, vmap, amap, d, [gen] if d > 1 else [], name=name).check()
    sheets = {nm(v, s): s for s in range(d) for v in base.vertices}
    return c, SheetLabeling(c, sheets, gen)
