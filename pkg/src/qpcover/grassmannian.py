"""Euler characteristics of quiver Grassmannians and Quot schemes.

Two independent routes: torus localization (count coordinate submodules in a
weighted basis whose weight spaces are one-dimensional) and counting points
over finite fields followed by polynomial interpolation at q = 1.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm

import sympy

from .errors import InconclusiveError, PreconditionError
from .jacobian import Module, build_truncated_jacobian
from .quiver import Potential, Quiver, opposite

DEFAULT_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)


def oracle_primes():
    env = os.environ.get("QPCOVER_PRIMES")
    if env:
        return tuple(int(x) for x in env.replace(",", " ").split())
    return DEFAULT_PRIMES


@dataclass
class WeightedBasis:
    module: Module
    weights: list
    arrow_weights: dict


@dataclass
class EulerResult:
    value: int | None
    method: str
    certificate: dict = field(default_factory=dict)
    caveat: str | None = None

    @property
    def conclusive(self):
        return self.value is not None


def _nullspace(rows, ncols):
    """Basis of the rational nullspace of a matrix given as sparse row dicts."""
    m = [dict(r) for r in rows if r]
    pivots = {}
    order = []
    for r in m:
        for p, row in zip(order, [pivots[p] for p in order]):
            if p in r:
                c = r[p]
                for j, v in row.items():
                    nv = r.get(j, 0) - c * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        if not r:
            continue
        p = min(r)
        c = r[p]
        r = {j: v / c for j, v in r.items()}
        for q in order:
            row = pivots[q]
            if p in row:
                f = row[p]
                for j, v in r.items():
                    nv = row.get(j, 0) - f * v
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
        pivots[p] = r
        order.append(p)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for p, row in pivots.items():
            vec[p] = -row.get(f, Fraction(0))
        den = lcm(*[x.denominator for x in vec]) if vec else 1
        basis.append([int(x * den) for x in vec])
    return basis


def auto_weighting(m: Module, extra=()):
    """Solve w(b') - w(b) = w(a) for every nonzero action entry.

    ``extra`` holds additional per-basis-element integer coordinates (for
    example a nice grading read through each element's vertex); each must be
    arrow-homogeneous.  Returns a WeightedBasis, or None when some vertex still
    carries a weight space of dimension >= 2.
    """
    arrows = sorted(a for a, cols in m.actions.items() if cols)
    apos = {a: m.dim + i for i, a in enumerate(arrows)}
    rows = []
    entries = []
    for a in arrows:
        for j, col in m.actions[a].items():
            for i in col:
                rows.append({i: Fraction(1), j: Fraction(-1), apos[a]: Fraction(-1)})
                entries.append((a, j, i))
    basis = _nullspace(rows, m.dim + len(arrows))
    coords = [[vec[b] for vec in basis] for b in range(m.dim)]
    arrow_w = {a: tuple(vec[apos[a]] for vec in basis) for a in arrows}
    for ex in extra:
        ex = list(ex)
        degs = {}
        for a, j, i in entries:
            if degs.setdefault(a, ex[i] - ex[j]) != ex[i] - ex[j]:
                raise PreconditionError(f"extra grading is not homogeneous for arrow {a}")
        for b in range(m.dim):
            coords[b].append(ex[b])
        for a in arrows:
            arrow_w[a] = arrow_w[a] + (degs.get(a, 0),)
    weights = [tuple(c) for c in coords]
    seen = set()
    for b in range(m.dim):
        key = (m.vertex_of[b], weights[b])
        if key in seen:
            return None
        seen.add(key)
    return WeightedBasis(m, weights, arrow_w)


def _as_dim(m: Module, n):
    if isinstance(n, dict):
        return {v: n.get(v, 0) for v in m.quiver.vertices}
    return dict(zip(m.quiver.vertices, n))


def coordinate_submodules(m: Module, n):
    """Basis subsets with dimension vector n that are closed under all arrows."""
    n = _as_dim(m, n)
    by_vertex = {v: [b for b in range(m.dim) if m.vertex_of[b] == v] for v in m.quiver.vertices}
    if any(n[v] < 0 or n[v] > len(by_vertex[v]) for v in n):
        return []
    succ = [0] * m.dim
    for cols in m.actions.values():
        for j, col in cols.items():
            for i in col:
                succ[j] |= 1 << i
    choices = [list(combinations(by_vertex[v], n[v])) for v in m.quiver.vertices]
    found = []
    for pick in product(*choices):
        mask = 0
        for grp in pick:
            for b in grp:
                mask |= 1 << b
        ok = True
        for grp in pick:
            for b in grp:
                if succ[b] & ~mask:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            found.append(mask)
    return found


def euler_gr_localization(m: Module, n, weighting: WeightedBasis | None = None) -> EulerResult:
    wb = weighting or auto_weighting(m)
    if wb is None:
        return EulerResult(None, "localization", {"reason": "no multiplicity-free weighting"})
    subs = coordinate_submodules(m, n)
    return EulerResult(len(subs), "localization", {"fixed_points": len(subs)})


def euler_gr(m: Module, n, method: str = "auto", weighting=None, primes=None) -> EulerResult:
    """chi(Gr_n(m)); ``method`` is 'loc', 'ff' or 'auto' (localization, oracle as fallback)."""
    n = _as_dim(m, n)
    dv = m.dim_vector()
    if any(n[v] < 0 or n[v] > dv[v] for v in n):
        return EulerResult(0, "empty", {"reason": "dimension vector out of range"})
    if method in ("auto", "loc"):
        res = euler_gr_localization(m, n, weighting)
        if res.conclusive or method == "loc":
            return res
    return finite_field_count_oracle(m, n, primes)


# finite-field oracle

def _mod_matrix(m: Module, a, q):
    """Action of a as a dense matrix mod q between the local bases at its endpoints."""
    s, t = m.quiver.arrows[a]
    src = [b for b in range(m.dim) if m.vertex_of[b] == s]
    tgt = [b for b in range(m.dim) if m.vertex_of[b] == t]
    tpos = {b: i for i, b in enumerate(tgt)}
    mat = [[0] * len(src) for _ in tgt]
    for jj, j in enumerate(src):
        for i, x in m.actions[a].get(j, {}).items():
            x = Fraction(x)
            if x.denominator % q == 0:
                raise PreconditionError(f"denominator of an entry of {a} vanishes mod {q}")
            mat[tpos[i]][jj] = x.numerator * pow(x.denominator, -1, q) % q
    return mat


def _rref_subspaces(dim, k, q):
    """All k-dimensional subspaces of F_q^dim as reduced row echelon bases."""
    if k == 0:
        yield ()
        return
    for piv in combinations(range(dim), k):
        free = [(r, c) for r in range(k) for c in range(piv[r] + 1, dim) if c not in piv]
        for vals in product(range(q), repeat=len(free)):
            rows = [[0] * dim for _ in range(k)]
            for r in range(k):
                rows[r][piv[r]] = 1
            for (r, c), v in zip(free, vals):
                rows[r][c] = v
            yield tuple((piv[r], tuple(rows[r])) for r in range(k))


def _in_span(vec, basis, q):
    vec = list(vec)
    for p, row in basis:
        c = vec[p]
        if c:
            vec = [(x - c * y) % q for x, y in zip(vec, row)]
    return not any(vec)


def count_submodules(m: Module, n, q: int) -> int:
    n = _as_dim(m, n)
    verts = list(m.quiver.vertices)
    dv = m.dim_vector()
    mats = {a: _mod_matrix(m, a, q) for a in m.quiver.arrows if m.actions[a]}
    spaces = {v: list(_rref_subspaces(dv[v], n[v], q)) for v in verts}
    checks = {}
    for a, (s, t) in m.quiver.arrows.items():
        if a not in mats:
            continue
        later = max(verts.index(s), verts.index(t))
        checks.setdefault(later, []).append((a, s, t))

    def ok(a, s, t, chosen):
        mat = mats[a]
        for _, row in chosen[s]:
            img = [sum(mat[i][j] * row[j] for j in range(len(row))) % q for i in range(len(mat))]
            if not _in_span(img, chosen[t], q):
                return False
        return True

    def rec(i, chosen):
        if i == len(verts):
            return 1
        v = verts[i]
        total = 0
        for sp in spaces[v]:
            chosen[v] = sp
            if all(ok(a, s, t, chosen) for a, s, t in checks.get(i, ())):
                total += rec(i + 1, chosen)
        del chosen[v]
        return total

    return rec(0, {})


def finite_field_count_oracle(m: Module, n, primes=None, held_out: int = 2) -> EulerResult:
    n = _as_dim(m, n)
    primes = tuple(primes or oracle_primes())
    dv = m.dim_vector()
    deg_bound = sum(n[v] * (dv[v] - n[v]) for v in n)
    if len(primes) < deg_bound + 3 or len(primes) <= held_out:
        return EulerResult(None, "finite-field", {"reason": f"need at least {deg_bound + 3} primes"},
                           caveat="polynomial-count assumed")
    counts = {q: count_submodules(m, n, q) for q in primes}
    train = primes[:len(primes) - held_out]
    test = primes[len(primes) - held_out:]
    x = sympy.Symbol("q")
    poly = sympy.Poly(sympy.interpolate([(p, counts[p]) for p in train], x), x)
    residual = {p: counts[p] - poly.eval(p) for p in test}
    cert = {"counts": counts, "polynomial": str(poly.as_expr()), "held_out": residual}
    if any(residual.values()) or poly.degree() > deg_bound:
        return EulerResult(None, "finite-field", cert, caveat="polynomial-count assumed")
    val = poly.eval(1)
    return EulerResult(int(val), "finite-field", cert, caveat="polynomial-count assumed")


# Quot schemes

class QuotCalculator:
    """Caches truncated algebras so that many chi(Quot_n(P_k)) queries stay cheap."""

    def __init__(self, quiver: Quiver, potential: Potential | None = None, use_opposite: bool = False):
        if use_opposite:
            quiver, potential = opposite(quiver, potential)
        self.quiver = quiver
        self.potential = potential if potential is not None else Potential.zero(quiver)
        self._alg = {}
        self._proj = {}
        self._weights = {}

    def algebra(self, l):
        if l not in self._alg:
            self._alg[l] = build_truncated_jacobian(self.quiver, self.potential, l)
        return self._alg[l]

    def projective(self, k, l):
        key = (k, l)
        if key not in self._proj:
            self._proj[key] = self.algebra(l).projective(k)
        return self._proj[key]

    def weighting(self, k, l):
        key = (k, l)
        if key not in self._weights:
            self._weights[key] = auto_weighting(self.projective(k, l))
        return self._weights[key]

    def quot(self, k, n, method="auto", order=None) -> EulerResult:
        n = {v: n.get(v, 0) for v in self.quiver.vertices} if isinstance(n, dict) else dict(
            zip(self.quiver.vertices, n))
        total = sum(n.values())
        l = order if order is not None else max(total - 1, 1)
        p = self.projective(k, l)
        dv = p.dim_vector()
        comp = {v: dv[v] - n[v] for v in n}
        if any(x < 0 for x in comp.values()):
            return EulerResult(0, "empty", {"reason": "quotient larger than module", "order": l})
        w = self.weighting(k, l) if method in ("auto", "loc") else None
        res = euler_gr(p, comp, method=method, weighting=w)
        res.certificate["order"] = l
        return res


def euler_quot_nilp(quiver: Quiver, potential: Potential | None, k, n, method="auto") -> EulerResult:
    return QuotCalculator(quiver, potential).quot(k, n, method)


def fiber_dimension_vectors(c, nbar: dict):
    """All cover dimension vectors n with pi(n) = nbar."""
    per_vertex = []
    for vb in c.base.vertices:
        fib = c.fiber(vb)
        per_vertex.append([dict(zip(fib, comp)) for comp in _compositions(nbar.get(vb, 0), len(fib))])
    for pick in product(*per_vertex):
        out = {}
        for part in pick:
            out.update(part)
        yield out


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def verify_projection_euler(c, wbar: Potential | None, w: Potential | None, k, nbar: dict, mode="quot",
                            order=None, method="auto", base_calc=None, cover_calc=None):
    """Compare the base value at pi(k) with the sum over the cover dimension vectors above nbar."""
    base_calc = base_calc or QuotCalculator(c.base, wbar)
    cover_calc = cover_calc or QuotCalculator(c.total, w)
    kb = c.vmap[k]
    nbar = {v: nbar.get(v, 0) for v in c.base.vertices}
    l = order if order is not None else max(sum(nbar.values()) - 1, 1)
    rows = []
    if mode == "quot":
        base = base_calc.quot(kb, nbar, method)
        for n in fiber_dimension_vectors(c, nbar):
            r = cover_calc.quot(k, n, method)
            rows.append((n, r))
    elif mode == "gr":
        pb = base_calc.projective(kb, l)
        base = euler_gr(pb, nbar, method, weighting=base_calc.weighting(kb, l) if method != "ff" else None)
        pc = cover_calc.projective(k, l)
        wc = cover_calc.weighting(k, l) if method != "ff" else None
        for n in fiber_dimension_vectors(c, nbar):
            rows.append((n, euler_gr(pc, n, method, weighting=wc)))
    else:
        raise PreconditionError(f"unknown mode {mode}")
    values = [r.value for _, r in rows]
    if base.value is None or any(v is None for v in values):
        return {"base": base.value, "rows": rows, "sum": None, "equal": None, "conclusive": False}
    s = sum(values)
    return {"base": base.value, "rows": rows, "sum": s, "equal": s == base.value, "conclusive": True,
            "order": l}


def fixed_point_decomposition(c, pcover, nbar: dict, grading: dict):
    """Base fixed points of Gr_nbar(pullback), grouped by cover dimension vector.

    The pulled-back module is weighted by its own arrow weights plus the nice
    grading read at each element's cover vertex.
    """
    from .covering import pullback_module

    pb = pullback_module(c, pcover)
    extra = [[grading[v] for v in pb.cover_vertex_of]]
    wb = auto_weighting(pb, extra)
    if wb is None:
        raise InconclusiveError("nice grading does not separate the pulled-back weight spaces")
    groups = {}
    for mask in coordinate_submodules(pb, nbar):
        key = {}
        for b in range(pb.dim):
            if mask >> b & 1:
                v = pb.cover_vertex_of[b]
                key[v] = key.get(v, 0) + 1
        k = tuple(sorted(key.items()))
        groups[k] = groups.get(k, 0) + 1
    return groups
