"""Nice gradings on supports of projectives, non-wrapping assignments and extended covers."""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .covering import QuiverCovering, SheetLabeling
from .errors import PreconditionError, ResourceError, ValidationError
from .jacobian import Module, supports
from .quiver import Potential, Quiver


@dataclass
class NiceGrading:
    vertex_degrees: dict
    arrow_degrees: dict = field(default_factory=dict)
    bound: int | None = None


def _value_order(lo, hi):
    vals = sorted(range(lo, hi + 1), key=lambda v: (abs(v), v < 0))
    return vals


def check_nice_grading(c: QuiverCovering, m: Module | None, grading: dict, support=None):
    """Return (ok, violations) for the two nice-grading conditions.

    ``support`` overrides the support of ``m`` (pass the whole quiver to test a
    global grading).
    """
    supp = support or supports(m)
    missing = [v for v in supp.vertices if v not in grading]
    if missing:
        raise PreconditionError(f"grading undefined on {sorted(missing)}")
    problems = []
    for vb in c.base.vertices:
        seen = {}
        for v in c.fiber(vb):
            if v not in supp.vertices:
                continue
            val = grading[v]
            if val in seen:
                problems.append(("fiber", vb, (seen[val], v)))
            seen[val] = v
    for ab in c.base.arrows:
        degs = {}
        for a in c.arrow_fiber(ab):
            if a not in supp.arrows:
                continue
            s, t = c.total.arrows[a]
            degs[a] = grading[t] - grading[s]
        if len(set(degs.values())) > 1:
            problems.append(("arrow", ab, degs))
    return not problems, problems


def find_nice_grading(c: QuiverCovering, m: Module, bound: int, sheets: SheetLabeling | None = None,
                      support=None):
    """Bounded backtracking search; None when nothing exists inside the window."""
    if bound < 1:
        raise PreconditionError("bound must be at least 1")
    supp = support or supports(m)
    Q = c.total
    d = c.d
    base_arrows = sorted({c.amap[a] for a in supp.arrows}, key=lambda x: (sorted(c.base.arrows).index(x), x))
    domains = {}
    for ab in base_arrows:
        vals = _value_order(-bound * d, bound * d)
        if sheets is not None:
            vals = [v for v in vals if (v - sheets.shifts[ab]) % d == 0]
        domains[ab] = vals
    verts = [v for v in Q.vertices if v in supp.vertices]
    edges = [(a,) + Q.arrows[a] for a in sorted(supp.arrows)]
    fiber_of = {v: c.vmap[v] for v in verts}

    def propagate(assign):
        vals = {}
        for root in verts:
            if root in vals:
                continue
            vals[root] = 0
            queue = deque([root])
            while queue:
                u = queue.popleft()
                for a, s, t in edges:
                    ab = c.amap[a]
                    if ab not in assign:
                        continue
                    if s == u and t not in vals:
                        vals[t] = vals[u] + assign[ab]
                        queue.append(t)
                    elif t == u and s not in vals:
                        vals[s] = vals[u] - assign[ab]
                        queue.append(s)
        return vals

    def consistent(assign, vals):
        for a, s, t in edges:
            ab = c.amap[a]
            if ab in assign and vals[t] - vals[s] != assign[ab]:
                return False
        return True

    def search(i, assign):
        if i == len(base_arrows):
            vals = propagate(assign)
            if not consistent(assign, vals):
                return None
            seen = set()
            for v in verts:
                key = (fiber_of[v], vals[v])
                if key in seen:
                    return None
                seen.add(key)
            return vals
        ab = base_arrows[i]
        for val in domains[ab]:
            assign[ab] = val
            vals = propagate(assign)
            if consistent(assign, vals):
                res = search(i + 1, assign)
                if res is not None:
                    return res
            del assign[ab]
        return None

    assign = {}
    vals = search(0, assign)
    if vals is None:
        return None
    return NiceGrading(vals, dict(assign), bound)


def sheet_uniform_extensions(c: QuiverCovering, partial: dict, bound: int):
    """All gradings of the whole total quiver extending ``partial`` with values in the bound window."""
    from itertools import product

    free = [v for v in c.total.vertices if v not in partial]
    window = range(-bound * c.d, bound * c.d + 1)
    for vals in product(window, repeat=len(free)):
        g = dict(partial)
        g.update(zip(free, vals))
        yield g


@dataclass
class WrapAssignment:
    degrees: dict
    d: int


def check_non_wrapping(c: QuiverCovering, sheets: SheetLabeling, wbar: Potential, max_vars: int = 24,
                       allow_large: bool = False):
    """Search for degrees in {shift, shift - d} giving every potential term total zero."""
    d = c.d
    terms = [Counter(p.arrows) for _, p in wbar.terms]
    variables = sorted({a for t in terms for a in t})
    if len(variables) > max_vars and not allow_large:
        raise ResourceError(f"{len(variables)} binary variables exceed {max_vars}; "
                            "rerun with the branch-and-bound flag")
    choices = {a: (sheets.shifts[a], sheets.shifts[a] - d) for a in variables}
    pos = {a: i for i, a in enumerate(variables)}

    def feasible(assign):
        for t in terms:
            lo = hi = 0
            for a, k in t.items():
                if a in assign:
                    lo += k * assign[a]
                    hi += k * assign[a]
                else:
                    x, y = choices[a]
                    lo += k * min(x, y)
                    hi += k * max(x, y)
            if not lo <= 0 <= hi:
                return False
        return True

    def search(i, assign):
        if not feasible(assign):
            return None
        if i == len(variables):
            return dict(assign)
        a = variables[i]
        for val in choices[a]:
            assign[a] = val
            res = search(i + 1, assign)
            if res is not None:
                return res
            del assign[a]
        return None

    res = search(0, {})
    if res is None:
        return None
    for ab in c.base.arrows:
        res.setdefault(ab, sheets.shifts[ab])
    return WrapAssignment(dict(sorted(res.items(), key=lambda kv: pos.get(kv[0], len(pos)))), d)


@dataclass
class ExtendedCover:
    covering: QuiverCovering
    factor: QuiverCovering
    sheets: dict
    order: int


def build_extended_cyclic_cover(c: QuiverCovering, sheets: SheetLabeling, wa: WrapAssignment, l: int):
    """The 2ld:1 cover whose lift of abar from sheet s ends on sheet s + deg(abar)."""
    d = c.d
    if d <= 1:
        raise PreconditionError("the extended cover needs d > 1")
    if l < 1:
        raise PreconditionError("order must be at least 1")
    D = 2 * l * d
    B = c.base

    def name(x, s):
        return f"{x}^{s}"

    verts = [(name(v, s), v in B.frozen) for s in range(D) for v in B.vertices]
    arrows = []
    for s in range(D):
        for ab, (src, tgt) in B.arrows.items():
            deg = wa.degrees.get(ab, sheets.shifts[ab])
            if (deg - sheets.shifts[ab]) % d:
                raise ValidationError(f"degree of {ab} is not congruent to its shift", witness=ab)
            arrows.append((name(ab, s), name(src, s), name(tgt, (s + deg) % D)))
    total = Quiver(verts, arrows, name=f"{B.name or 'base'}-ext{D}")
    vmap = {name(v, s): v for s in range(D) for v in B.vertices}
    amap = {name(ab, s): ab for s in range(D) for ab in B.arrows}
    gen = ({name(v, s): name(v, (s + 1) % D) for s in range(D) for v in B.vertices},
           {name(ab, s): name(ab, (s + 1) % D) for s in range(D) for ab in B.arrows})
    ext = QuiverCovering(total, B, vmap, amap, D, [gen], name=total.name).check()
    fv, fa = {}, {}
    for s in range(D):
        for v in B.vertices:
            fv[name(v, s)] = sheets.vertex_on_sheet(v, s)
        for ab in B.arrows:
            start = sheets.vertex_on_sheet(B.source(ab), s)
            fa[name(ab, s)] = c.lift_path(B.path([ab]), start=start).arrows[0]
    fgen = ({name(v, s): name(v, (s + d) % D) for s in range(D) for v in B.vertices},
            {name(ab, s): name(ab, (s + d) % D) for s in range(D) for ab in B.arrows})
    factor = QuiverCovering(total, c.total, fv, fa, 2 * l, [fgen], name=f"{total.name}->{c.name}").check()
    labels = {name(v, s): s for s in range(D) for v in B.vertices}
    return ExtendedCover(ext, factor, labels, l)
