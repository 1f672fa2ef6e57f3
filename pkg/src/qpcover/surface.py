"""Triangulated surfaces: adjacency quivers, f/g maps, potentials and cyclic covers."""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .covering import QuiverCovering, SheetLabeling
from .errors import ValidationError
from .quiver import Path, Potential, Quiver


class Triangle(NamedTuple):
    """Arcs in cyclic order; ``arrows[i]`` goes from ``arcs[i]`` to ``arcs[i+1]``."""
    arcs: tuple
    arrows: tuple


class TriangulationData:
    def __init__(self, arcs, triangles, punctures: dict | None = None, name=None):
        self.name = name
        self.arcs = tuple(arcs)
        tris = []
        for n, t in enumerate(triangles):
            if not isinstance(t, Triangle):
                if len(t) == 2 and isinstance(t[0], (tuple, list)):
                    t = Triangle(tuple(t[0]), tuple(t[1]))
                else:
                    arcs3 = tuple(t)
                    t = Triangle(arcs3, tuple(f"t{n}_{i}" for i in range(3)))
            tris.append(t)
        self.triangles = tuple(tris)
        self._validate_triangles()
        q_arrows = []
        self._f = {}
        for t in self.triangles:
            for i in range(3):
                q_arrows.append((t.arrows[i], t.arcs[i], t.arcs[(i + 1) % 3]))
                self._f[t.arrows[i]] = t.arrows[(i + 1) % 3]
        self.quiver = Quiver(self.arcs, q_arrows, name=name)
        q = self.quiver
        for v in q.vertices:
            if len(q.out_arrows[v]) != 2 or len(q.in_arrows[v]) != 2:
                raise ValidationError(f"arc {v} does not have two arrows in and two out", witness=v)
        self._g = {}
        for a in q.arrows:
            outs = [b for b in q.out_arrows[q.target(a)] if b != self._f[a]]
            self._g[a] = outs[0]
        orbits = []
        seen = set()
        for a in sorted(q.arrows):
            if a in seen:
                continue
            orb, b = [], a
            while b not in seen:
                seen.add(b)
                orb.append(b)
                b = self._g[b]
            orbits.append(tuple(orb))
        if punctures is None:
            self.punctures = {f"p{i}": orb for i, orb in enumerate(orbits)}
        else:
            self.punctures = {}
            derived = {frozenset(o): o for o in orbits}
            used = set()
            for name_, rot in punctures.items():
                rot = tuple(rot)
                key = frozenset(rot)
                if key not in derived or len(rot) != len(derived[key]):
                    raise ValidationError(f"rotation at {name_} is not a puncture cycle", witness=name_)
                for x, y in zip(rot, rot[1:] + rot[:1]):
                    if self._g[x] != y:
                        raise ValidationError(f"rotation at {name_} is not in counterclockwise order",
                                              witness=name_)
                used |= key
                self.punctures[name_] = rot
            if used != set(q.arrows):
                raise ValidationError("rotations do not cover every arrow exactly once")

    def _validate_triangles(self):
        count = {a: 0 for a in self.arcs}
        names = []
        for t in self.triangles:
            if len(t.arcs) != 3 or len(t.arrows) != 3:
                raise ValidationError("triangles need three arcs and three arrows", witness=t)
            if len(set(t.arcs)) != 3:
                raise ValidationError(f"self-folded triangle {t.arcs}", witness=t.arcs)
            for a in t.arcs:
                if a not in count:
                    raise ValidationError(f"unknown arc {a}", witness=a)
                count[a] += 1
            names.extend(t.arrows)
        if len(set(names)) != len(names):
            raise ValidationError("arrow names repeat")
        bad = [a for a, c in count.items() if c != 2]
        if bad:
            raise ValidationError(f"arcs not bounding exactly two triangle sides: {bad}", witness=bad)

    def f(self, a):
        return self._f[a]

    def g(self, a):
        return self._g[a]

    def n(self, a):
        """Size of the puncture cycle containing a."""
        for orb in self.punctures.values():
            if a in orb:
                return len(orb)
        raise KeyError(a)

    def puncture_of(self, a):
        for name, orb in self.punctures.items():
            if a in orb:
                return name
        raise KeyError(a)

    def f_orbits(self):
        return [tuple(t.arrows) for t in self.triangles]

    def g_path(self, a, r) -> Path:
        """g^r(a) ... g(a) a, as a path in traversal order."""
        arrows, b = [a], a
        for _ in range(r):
            b = self._g[b]
            arrows.append(b)
        return self.quiver.path(arrows)


def adjacency_quiver(t: TriangulationData):
    return t.quiver, t.f, t.g


def surface_potential(t: TriangulationData, constants: dict | None = None) -> Potential:
    """Triangle cycles minus weighted puncture cycles, from the smallest arrow of each orbit."""
    constants = constants or {}
    for p, c in constants.items():
        if Fraction(c) == 0:
            raise ValidationError(f"puncture constant for {p} is zero", witness=p)
    terms = []
    for orb in t.f_orbits():
        a = min(orb)
        terms.append((1, (a, t.f(a), t.f(t.f(a)))))
    for name, orb in t.punctures.items():
        b = min(orb)
        terms.append((-Fraction(constants.get(name, 1)), t.g_path(b, len(orb) - 1).arrows))
    return Potential(t.quiver, terms)


class BasisOracle(NamedTuple):
    paths: list
    z_expressions: dict
    dimension: int
    zero_paths: list


def jacobian_basis_oracle(t: TriangulationData, constants: dict | None = None) -> BasisOracle:
    """The combinatorial basis: e_i, the puncture subpaths g^r(a)...a with r <= n_a - 2, and z_i.

    ``z_expressions[i]`` lists (coefficient, path) pairs whose classes all equal
    z_i; ``zero_paths`` lists the paths g f(a) f(a) a and f g(a) g(a) a.
    """
    constants = constants or {}
    q = t.quiver
    paths = [q.lazy(v) for v in q.vertices]
    for a in sorted(q.arrows):
        for r in range(t.n(a) - 1):
            paths.append(t.g_path(a, r))
    zexpr = {}
    for v in q.vertices:
        exprs = []
        for a in q.out_arrows[v]:
            exprs.append((Fraction(1), q.path([a, t.f(a), t.f(t.f(a))])))
            c = Fraction(constants.get(t.puncture_of(a), 1))
            exprs.append((c, t.g_path(a, t.n(a) - 1)))
        zexpr[v] = exprs
        paths.append(exprs[0][1])
    zeros = []
    for a in sorted(q.arrows):
        zeros.append(q.path([a, t.f(a), t.g(t.f(a))]))
        zeros.append(q.path([a, t.g(a), t.f(t.g(a))]))
    dim = 2 * len(q.vertices) + sum(t.n(a) - 1 for a in q.arrows)
    assert dim == len(paths)
    return BasisOracle(paths, zexpr, dim, zeros)


class SurfaceCoverSpec(NamedTuple):
    base: TriangulationData
    d: int
    cut: str


def _cut_stays_connected(t: TriangulationData, cut):
    tri_of = {}
    for n, tri in enumerate(t.triangles):
        for a in tri.arcs:
            tri_of.setdefault(a, []).append(n)
    adj = {n: set() for n in range(len(t.triangles))}
    for a, ts in tri_of.items():
        if a == cut:
            continue
        x, y = ts
        adj[x].add(y)
        adj[y].add(x)
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(t.triangles)


def sheet_name(x, s):
    return f"{x}^{s}"


def cyclic_surface_cover(spec: SurfaceCoverSpec, name=None):
    """d sheets glued along copies of the cut arc.

    The first triangle side along the cut (in triangle order) uses the copy on
    its own sheet; the second side uses the copy on the next sheet.  Returns
    (total triangulation, covering, sheet labeling).
    """
    base, d, cut = spec
    if d < 2:
        raise ValidationError("a cyclic surface cover needs d >= 2")
    if cut not in base.arcs:
        raise ValidationError(f"{cut} is not an arc", witness=cut)
    if len(base.punctures) != 1:
        raise ValidationError("cyclic covers are built only for once-punctured surfaces")
    if not _cut_stays_connected(base, cut):
        raise ValidationError(f"cutting along {cut} disconnects the surface", witness=cut)
    arcs = [sheet_name(a, s) for s in range(d) for a in base.arcs]
    tris = []
    seen_cut = 0
    offsets = []
    for tri in base.triangles:
        off = []
        for a in tri.arcs:
            if a == cut:
                off.append(seen_cut)
                seen_cut += 1
            else:
                off.append(0)
        offsets.append(off)
    for s in range(d):
        for tri, off in zip(base.triangles, offsets):
            tris.append(Triangle(tuple(sheet_name(a, (s + o) % d) for a, o in zip(tri.arcs, off)),
                                 tuple(sheet_name(x, s) for x in tri.arrows)))
    total = TriangulationData(arcs, tris, name=name)
    vmap = {sheet_name(a, s): a for s in range(d) for a in base.arcs}
    amap = {sheet_name(x, s): x for s in range(d) for x in base.quiver.arrows}
    gen = ({sheet_name(a, s): sheet_name(a, (s + 1) % d) for s in range(d) for a in base.arcs},
           {sheet_name(x, s): sheet_name(x, (s + 1) % d) for s in range(d) for x in base.quiver.arrows})
    cov = QuiverCovering(total.quiver, base.quiver, vmap, amap, d, [gen], name=name)
    cov.check()
    sheets = {sheet_name(a, s): s for s in range(d) for a in base.arcs}
    return total, cov, SheetLabeling(cov, sheets, gen)


def once_punctured_torus() -> TriangulationData:
    """Square with sides a (top/bottom), b (left/right) and diagonal c."""
    return TriangulationData(
        ["a", "b", "c"],
        [Triangle(("a", "b", "c"), ("alpha1", "beta1", "gamma1")),
         Triangle(("a", "b", "c"), ("alpha2", "beta2", "gamma2"))],
        name="torus1p")


def four_punctured_sphere() -> TriangulationData:
    """Boundary of a tetrahedron; arcs are its edges."""
    faces = [(1, 2, 3), (1, 3, 4), (1, 4, 2), (2, 4, 3)]

    def edge(i, j):
        return f"e{min(i, j)}{max(i, j)}"

    arcs = sorted({edge(i, j) for f in faces for i, j in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]})
    tris = []
    for n, (i, j, k) in enumerate(faces):
        tris.append(Triangle((edge(i, j), edge(j, k), edge(k, i)), (f"x{n}a", f"x{n}b", f"x{n}c")))
    return TriangulationData(arcs, tris, name="sphere4p")
