"""Truncated wall-crossing automorphisms, stability operators and rank-2 scattering diagrams.

Conventions, all in one place:

* ``y^n`` for n in N^+ (supported on unfrozen indices) acts on ``x^m`` as the
  derivation ``x^m -> <n, m> x^m y^n``, with ``<e_k, f_i> = delta_ki / d_k``;
  on ``y^n'`` it acts by ``omega(n, n') = <n, p*(n')>``.
* An automorphism is stored as ``theta(x_i) = x_i * S_i(y)`` with ``S_i`` a
  truncated series indexed by n.  ``y^n`` maps to the monomial ``x^{p*(n)}``,
  so ``theta(y^n) = y^n * prod_j S_j^{p*(n)_j}``.
* ``a.compose(b)`` is ``a o b``; a path-ordered product applies the first
  crossing last, i.e. ``p_k o ... o p_1``.
* A wall with Hamiltonian ``sum_j c_j y^{j n0}`` has function
  ``f = exp(sum_j j c_j z^j)`` and crossing it with sign eps maps
  ``x^m -> x^m f^{eps <n0, m>}``.  The sign of a crossing is
  ``-sign <n0, gamma'>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from math import gcd

from .errors import InconclusiveError, PreconditionError, StructureError, ValidationError
from .seeds import Seed, SeedCovering, dimension_vectors, principal_seed, seed_covering, seed_from_quiver


class TruncatedSeries:
    """Power series in y^n, n in N^rank, keeping only |n| <= order."""

    __slots__ = ("rank", "order", "c")

    def __init__(self, rank: int, order: int, coeffs=None):
        self.rank = rank
        self.order = order
        self.c = {}
        for n, v in (coeffs or {}).items():
            n = tuple(n)
            if len(n) != rank:
                raise StructureError(f"exponent {n} has the wrong length")
            if sum(n) <= order and v:
                self.c[n] = self.c.get(n, 0) + Fraction(v)
        self.c = {n: v for n, v in self.c.items() if v}

    @classmethod
    def one(cls, rank, order):
        return cls(rank, order, {(0,) * rank: 1})

    @classmethod
    def monomial(cls, n, order, coeff=1):
        return cls(len(n), order, {tuple(n): coeff})

    def _same(self, other):
        if self.rank != other.rank:
            raise StructureError("series of different rank")
        return min(self.order, other.order)

    def __add__(self, other):
        out = dict(self.c)
        for n, v in other.c.items():
            out[n] = out.get(n, 0) + v
        return TruncatedSeries(self.rank, self._same(other), out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return TruncatedSeries(self.rank, self.order, {n: v * s for n, v in self.c.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        l = self._same(other)
        out = {}
        for n, v in self.c.items():
            dn = sum(n)
            if dn > l:
                continue
            for m, w in other.c.items():
                if dn + sum(m) > l:
                    continue
                k = tuple(a + b for a, b in zip(n, m))
                out[k] = out.get(k, 0) + v * w
        return TruncatedSeries(self.rank, l, out)

    __rmul__ = scale

    def constant(self):
        return self.c.get((0,) * self.rank, Fraction(0))

    def truncate(self, order):
        return TruncatedSeries(self.rank, min(order, self.order), self.c)

    def inverse(self):
        a0 = self.constant()
        if not a0:
            raise PreconditionError("series with zero constant term is not invertible")
        rest = (self - TruncatedSeries.one(self.rank, self.order).scale(a0)).scale(Fraction(-1) / a0)
        # 1/(a0 (1 - r)) = (1/a0) sum r^k
        out = TruncatedSeries.one(self.rank, self.order)
        term = out
        for _ in range(self.order):
            term = term * rest
            if not term.c:
                break
            out = out + term
        return out.scale(Fraction(1) / a0)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = TruncatedSeries.one(self.rank, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def exp(self):
        if self.constant():
            raise PreconditionError("exp needs a series without constant term")
        out = TruncatedSeries.one(self.rank, self.order)
        term = out
        for k in range(1, self.order + 1):
            term = (term * self).scale(Fraction(1, k))
            if not term.c:
                break
            out = out + term
        return out

    def log(self):
        if self.constant() != 1:
            raise PreconditionError("log needs constant term 1")
        u = self - TruncatedSeries.one(self.rank, self.order)
        out = TruncatedSeries(self.rank, self.order)
        term = TruncatedSeries.one(self.rank, self.order)
        for k in range(1, self.order + 1):
            term = term * u
            if not term.c:
                break
            out = out + term.scale(Fraction((-1) ** (k + 1), k))
        return out

    def homogeneous(self, degree):
        return {n: v for n, v in self.c.items() if sum(n) == degree}

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and self.rank == other.rank and self.c == other.c

    def __repr__(self):
        return f"TruncatedSeries({format_series(self)}, order={self.order})"


def format_series(s: TruncatedSeries, names=None) -> str:
    if not s.c:
        return "0"
    names = names or [f"y{i + 1}" for i in range(s.rank)]
    parts = []
    for n in sorted(s.c, key=lambda n: (sum(n), tuple(-x for x in n))):
        v = s.c[n]
        mono = "*".join(f"{nm}^{e}" if e > 1 else nm for nm, e in zip(names, n) if e)
        coef = format_rational(v)
        if not mono:
            parts.append(coef)
        elif v == 1:
            parts.append(mono)
        elif v == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{coef}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class TruncatedAutomorphism:
    """theta(x_i) = x_i * S_i for every seed index i, at a fixed order."""

    def __init__(self, seed: Seed, order: int, images: dict | None = None):
        self.seed = seed
        self.order = order
        r = len(seed.unfrozen)
        self.images = {i: TruncatedSeries.one(r, order) for i in seed.indices}
        for i, s in (images or {}).items():
            if i not in self.images:
                raise StructureError(f"{i!r} is not a seed index")
            if s.constant() != 1:
                raise ValidationError(f"image series of {i} must have constant term 1", witness=i)
            self.images[i] = s.truncate(order)
        self._pstar = [self._pstar_vector(k) for k in range(r)]
        self._pow_cache = {}

    def _pstar_vector(self, k):
        sd = self.seed
        col = sd.unfrozen[k]
        return {i: int(sd.b(i, col)) for i in sd.indices if sd.b(i, col)}

    @classmethod
    def identity(cls, seed, order):
        return cls(seed, order)

    @property
    def rank(self):
        return len(self.seed.unfrozen)

    def _power(self, j, e):
        key = (j, e)
        if key not in self._pow_cache:
            self._pow_cache[key] = self.images[j] ** e
        return self._pow_cache[key]

    def monomial_image(self, n) -> TruncatedSeries:
        """theta(y^n) / y^n."""
        exps = {}
        for k, nk in enumerate(n):
            if nk:
                for i, b in self._pstar[k].items():
                    exps[i] = exps.get(i, 0) + b * nk
        out = TruncatedSeries.one(self.rank, self.order - sum(n))
        for j, e in exps.items():
            if e:
                out = out * self._power(j, e)
        return out

    def apply_series(self, f: TruncatedSeries) -> TruncatedSeries:
        out = {}
        for n, v in f.c.items():
            if sum(n) > self.order:
                continue
            for m, w in self.monomial_image(n).c.items():
                k = tuple(a + b for a, b in zip(n, m))
                if sum(k) <= self.order:
                    out[k] = out.get(k, 0) + v * w
        return TruncatedSeries(self.rank, self.order, out)

    def compose(self, other: "TruncatedAutomorphism") -> "TruncatedAutomorphism":
        """self o other."""
        if self.seed != other.seed:
            raise StructureError("automorphisms over different seeds")
        l = min(self.order, other.order)
        imgs = {i: self.images[i] * self.apply_series(other.images[i]) for i in self.seed.indices}
        return TruncatedAutomorphism(self.seed, l, {i: s.truncate(l) for i, s in imgs.items()})

    def inverse(self) -> "TruncatedAutomorphism":
        # psi o self = id  <=>  T_i = 1 / psi(S_i), solved degree by degree
        cur = TruncatedAutomorphism(self.seed, self.order)
        for _ in range(self.order + 1):
            cur = TruncatedAutomorphism(self.seed, self.order,
                                        {i: cur.apply_series(self.images[i]).inverse()
                                         for i in self.seed.indices})
        return cur

    def truncate(self, order):
        return TruncatedAutomorphism(self.seed, min(order, self.order),
                                     {i: s.truncate(order) for i, s in self.images.items()})

    def is_identity(self):
        return all(s.c == {(0,) * self.rank: 1} for s in self.images.values())

    def __eq__(self, other):
        return (isinstance(other, TruncatedAutomorphism) and self.seed == other.seed
                and self.images == other.images)

    def discrepancies(self, other, indices=None):
        """(i, n, mine, theirs) for every differing coefficient."""
        out = []
        for i in indices or self.seed.indices:
            a, b = self.images[i].c, other.images[i].c
            for n in sorted(set(a) | set(b), key=lambda n: (sum(n), n)):
                if a.get(n, 0) != b.get(n, 0):
                    out.append((i, n, a.get(n, Fraction(0)), b.get(n, Fraction(0))))
        return out

    def as_laurent(self, i) -> dict:
        """S_i as a polynomial in x: the M-vector p*(n) -> summed coefficient."""
        out = {}
        for n, v in self.images[i].c.items():
            m = self.seed.p_star(n)
            key = tuple(m[j] for j in self.seed.indices)
            out[key] = out.get(key, 0) + v
        return {m: v for m, v in out.items() if v}

    def __repr__(self):
        body = ", ".join(f"{i}: {format_series(s)}" for i, s in self.images.items())
        return f"TruncatedAutomorphism(order={self.order}; {body})"


def _pair(seed: Seed, n, i):
    """<n, f_i> for n indexed over the unfrozen indices."""
    if i in seed.frozen:
        return Fraction(0)
    k = seed.unfrozen.index(i)
    return Fraction(n[k]) / seed.d[i]


def _omega(seed: Seed, n, n2):
    return seed.omega(dict(zip(seed.unfrozen, n)), dict(zip(seed.unfrozen, n2)))


def exp_action(seed: Seed, h: TruncatedSeries, order: int, sign=1) -> TruncatedAutomorphism:
    """exp(sign * ad_H) acting on every x_i, to the given order."""
    if h.constant():
        raise PreconditionError("Hamiltonian must have no constant term")
    r = len(seed.unfrozen)
    hs = [(n, v * sign) for n, v in h.c.items() if sum(n) <= order]
    omega = {}
    images = {}
    for i in seed.indices:
        total = TruncatedSeries.one(r, order)
        term = total
        for k in range(1, order + 1):
            nxt = {}
            for n, v in hs:
                pn = _pair(seed, n, i)
                for m, w in term.c.items():
                    key = (n, m)
                    if key not in omega:
                        omega[key] = _omega(seed, n, m)
                    coef = pn + omega[key]
                    if not coef:
                        continue
                    s = tuple(a + b for a, b in zip(n, m))
                    if sum(s) <= order:
                        nxt[s] = nxt.get(s, 0) + v * w * coef
            term = TruncatedSeries(r, order, nxt).scale(Fraction(1, k))
            if not term.c:
                break
            total = total + term
        images[i] = total
    return TruncatedAutomorphism(seed, order, images)


def dilog_hamiltonian(rank, k, d, order, n0=None) -> TruncatedSeries:
    """-d * Li2(-y^{n0}) truncated; n0 defaults to e_k."""
    n0 = n0 or tuple(1 if j == k else 0 for j in range(rank))
    out = {}
    j = 1
    while j * sum(n0) <= order:
        out[tuple(j * x for x in n0)] = -Fraction(d) * Fraction((-1) ** j, j * j)
        j += 1
    return TruncatedSeries(rank, order, out)


# stability operators


def theta_stability(quiver, potential, seed: Seed | None, order: int, principal=False, opposite=False,
                    method="auto", calculator=None) -> TruncatedAutomorphism:
    """S_i = sum over |n| <= order of chi(Quot_n^nilp(P_i)) y^n for unfrozen i."""
    from .grassmannian import QuotCalculator

    seed = seed or seed_from_quiver(quiver)
    if principal:
        seed = principal_seed(seed)
    uf = [v for v in quiver.vertices if v not in quiver.frozen]
    if list(seed.unfrozen) != uf:
        raise StructureError("seed unfrozen indices do not match the quiver's unfrozen vertices")
    calc = calculator or QuotCalculator(quiver, potential, use_opposite=opposite)
    r = len(uf)
    images = {}
    if order <= 0:
        return TruncatedAutomorphism(seed, max(order, 0))
    vecs = dimension_vectors(r, order)
    for i in uf:
        coeffs = {}
        for n in vecs:
            res = calc.quot(i, dict(zip(uf, n)), method)
            if res.value is None:
                raise InconclusiveError(f"Euler characteristic inconclusive at ({i}, {n})")
            if res.value:
                coeffs[n] = res.value
        images[i] = TruncatedSeries(r, order, coeffs)
    return TruncatedAutomorphism(seed, order, images)


def evaluate_principal_at_one(theta: TruncatedAutomorphism, seed: Seed) -> TruncatedAutomorphism:
    """Set the principal frozen variables to one; the n-indexed series are kept."""
    if tuple(seed.unfrozen) != tuple(theta.seed.unfrozen):
        raise StructureError("seeds have different unfrozen indices")
    return TruncatedAutomorphism(seed, theta.order, {i: theta.images[i] for i in seed.indices})


def pi_project_automorphism(sc: SeedCovering, theta: TruncatedAutomorphism) -> TruncatedAutomorphism:
    """Base automorphism with S_kbar = pi(S_k); pi sums exponents over each orbit."""
    if theta.seed != sc.total:
        raise StructureError("automorphism does not live over the covering's total seed")
    base = sc.base
    pos = {o: k for k, o in enumerate(base.unfrozen)}
    orbit_pos = [pos[sc.orbit_of[i]] for i in sc.total.unfrozen]
    r = len(base.unfrozen)

    def proj(s: TruncatedSeries):
        out = {}
        for n, v in s.c.items():
            m = [0] * r
            for k, x in zip(orbit_pos, n):
                m[k] += x
            m = tuple(m)
            out[m] = out.get(m, 0) + v
        return TruncatedSeries(r, s.order, out)

    images = {}
    for o, members in sc.orbits.items():
        projected = [proj(theta.images[i]) for i in members]
        if any(p != projected[0] for p in projected[1:]):
            raise ValidationError(f"images over orbit {o} project differently", witness=o)
        images[o] = projected[0]
    return TruncatedAutomorphism(base, theta.order, images)


@dataclass
class ThetaComparison:
    order: int
    table: list
    cover: TruncatedAutomorphism
    base: TruncatedAutomorphism

    @property
    def equivalent(self):
        return not self.table


def principal_folding(c, cover_seed: Seed | None = None) -> SeedCovering:
    """Fold the principal extension of the cover seed along the fibers of c."""
    sd = cover_seed or seed_from_quiver(c.total)
    prin = principal_seed(sd)
    orbit_of = {}
    for i in sd.indices:
        orbit_of[i] = c.vmap[i]
        orbit_of[f"{i}'"] = f"{c.vmap[i]}'"
    return seed_covering(prin, orbit_of)


def compare_theta_covering(c, wbar, w, order: int, opposite=True, method="auto") -> ThetaComparison:
    """Project the cover stability operator and compare with the base one, coefficient by coefficient."""
    cover_seed = seed_from_quiver(c.total)
    sc = principal_folding(c, cover_seed)
    cover = theta_stability(c.total, w, cover_seed, order, principal=True, opposite=opposite, method=method)
    projected = pi_project_automorphism(sc, cover)
    base_seed = seed_covering(cover_seed, {i: c.vmap[i] for i in cover_seed.indices}).base
    base = theta_stability(c.base, wbar, base_seed, order, principal=True, opposite=opposite, method=method)
    table = []
    for i in base_seed.unfrozen:
        a, b = projected.images[i].c, base.images[i].c
        for n in sorted(set(a) | set(b), key=lambda n: (sum(n), n)):
            if a.get(n, 0) != b.get(n, 0):
                table.append((i, n, a.get(n, Fraction(0)), b.get(n, Fraction(0))))
    return ThetaComparison(order, table, projected, base)


# rank-2 scattering diagrams


def _primitive(n):
    g = 0
    for x in n:
        g = gcd(g, int(x))
    if g == 0:
        raise PreconditionError("zero vector has no primitive direction")
    return tuple(int(x) // g for x in n), g


@dataclass
class Wall2D:
    """A line n0-perp or the ray spanned by ``direction``, with Hamiltonian sum_j c_j y^{j n0}."""

    n0: tuple
    kind: str
    direction: tuple | None
    hamiltonian: dict = field(default_factory=dict)
    initial: bool = False

    def __post_init__(self):
        p, g = _primitive(self.n0)
        if g != 1 or any(x < 0 for x in self.n0):
            raise ValidationError(f"wall normal {self.n0} must be primitive and non-negative", witness=self.n0)
        if self.kind not in ("line", "ray"):
            raise ValidationError(f"unknown wall kind {self.kind}")
        self.hamiltonian = {int(j): Fraction(v) for j, v in self.hamiltonian.items() if v}

    def is_trivial(self):
        return not self.hamiltonian

    def log_function(self, order):
        """log f = sum_j j c_j z^j as a univariate coefficient list (index j)."""
        top = order // sum(self.n0)
        return [Fraction(0)] + [j * self.hamiltonian.get(j, Fraction(0)) for j in range(1, top + 1)]

    def function(self, order):
        """Coefficients of f(z) = exp(log f), constant term first."""
        lg = self.log_function(order)
        s = TruncatedSeries(1, len(lg) - 1, {(j,): v for j, v in enumerate(lg)})
        e = s.exp()
        return [e.c.get((j,), Fraction(0)) for j in range(len(lg))]

    def incoming(self, seed: Seed):
        m = seed.p_star(dict(zip(seed.unfrozen, self.n0)))
        v = tuple(m[i] for i in seed.indices)
        if self.kind == "line":
            return True
        return _same_ray(v, self.direction)


def _same_ray(u, v):
    return u[0] * v[1] - u[1] * v[0] == 0 and u[0] * v[0] + u[1] * v[1] > 0


def _check_rank2(seed: Seed):
    if seed.frozen or len(seed.indices) != 2:
        raise PreconditionError("rank-2 diagrams need a seed with exactly two unfrozen and no frozen indices")


def initial_cluster_walls(seed: Seed, order: int):
    if len(seed.unfrozen) < 1:
        raise PreconditionError("seed has no unfrozen indices")
    walls = []
    r = len(seed.unfrozen)
    for k, i in enumerate(seed.unfrozen):
        n0 = tuple(1 if j == k else 0 for j in range(r))
        h = {j: -seed.d[i] * Fraction((-1) ** j, j * j) for j in range(1, order + 1)}
        walls.append(Wall2D(n0, "line", None, h, initial=True))
    return walls


def wall_crossing(seed: Seed, wall: Wall2D, eps: int, order: int) -> TruncatedAutomorphism:
    r = len(seed.unfrozen)
    lg = wall.log_function(order)
    base = TruncatedSeries(r, order, {tuple(j * x for x in wall.n0): v for j, v in enumerate(lg) if v})
    images = {}
    for i in seed.indices:
        p = _pair(seed, wall.n0, i)
        images[i] = base.scale(eps * p).exp() if p else TruncatedSeries.one(r, order)
    return TruncatedAutomorphism(seed, order, images)


def path_ordered_product(seed: Seed, crossings, order: int) -> TruncatedAutomorphism:
    """p_k^{eps_k} o ... o p_1^{eps_1} for crossings [(wall, eps), ...] listed in path order."""
    out = TruncatedAutomorphism.identity(seed, order)
    for wall, eps in crossings:
        if eps not in (1, -1):
            raise PreconditionError("crossing signs must be +1 or -1 (the path is tangent to a wall)")
        out = wall_crossing(seed, wall, eps, order).compose(out)
    return out


def _half(v):
    return 0 if v[1] > 0 or (v[1] == 0 and v[0] > 0) else 1


def _angle_cmp(u, v):
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return hu - hv
    cr = u[0] * v[1] - u[1] * v[0]
    return -1 if cr > 0 else (1 if cr < 0 else 0)


def angle_key(v):
    return cmp_to_key(_angle_cmp)(tuple(Fraction(x) for x in v))


def _line_direction(seed: Seed, n0):
    """A vector spanning n0-perp in M_R, in f-coordinates."""
    i, j = seed.indices
    # <n0, m> = n0_1 m_1 / d_1 + n0_2 m_2 / d_2
    return (-Fraction(n0[1]) / seed.d[j], Fraction(n0[0]) / seed.d[i])


def _sign(x):
    return (x > 0) - (x < 0)


def crossing_sign(seed: Seed, n0, v):
    """Sign for the counterclockwise circle passing through the point v."""
    tangent = (-v[1], v[0])
    i, j = seed.indices
    val = Fraction(n0[0]) * tangent[0] / seed.d[i] + Fraction(n0[1]) * tangent[1] / seed.d[j]
    s = -_sign(val)
    if s == 0:
        raise PreconditionError("path is tangent to a wall")
    return s


def wall_points(seed: Seed, wall: Wall2D):
    if wall.kind == "line":
        u = _line_direction(seed, wall.n0)
        return [u, (-u[0], -u[1])]
    return [tuple(Fraction(x) for x in wall.direction)]


class RankTwoDiagram:
    def __init__(self, seed: Seed, walls, order: int):
        _check_rank2(seed)
        self.seed = seed
        self.walls = list(walls)
        self.order = order

    def nontrivial(self):
        return [w for w in self.walls if not w.is_trivial()]

    def crossings(self, start=None, stop=None, clockwise=False):
        """Crossings of a circle arc, in path order, as (wall, sign, point) triples.

        Without bounds the arc is the full counterclockwise loop starting just
        before the positive first axis.
        """
        pts = []
        for w in self.walls:
            if w.is_trivial():
                continue
            for p in wall_points(self.seed, w):
                pts.append((p, w))
        pts.sort(key=lambda t: angle_key(t[0]))
        if start is not None:
            s, e = angle_key(start), angle_key(stop)
            if not clockwise:
                if s < e:
                    pts = [t for t in pts if s < angle_key(t[0]) < e]
                else:
                    pts = [t for t in pts if angle_key(t[0]) > s] + [t for t in pts if angle_key(t[0]) < e]
            else:
                if e < s:
                    pts = [t for t in pts if e < angle_key(t[0]) < s]
                else:
                    pts = [t for t in pts if angle_key(t[0]) < s] + [t for t in pts if angle_key(t[0]) > e]
                pts = pts[::-1]
        out = []
        for p, w in pts:
            sgn = crossing_sign(self.seed, w.n0, p)
            out.append((w, -sgn if clockwise else sgn, p))
        return out

    def loop_product(self, order=None) -> TruncatedAutomorphism:
        order = self.order if order is None else order
        return path_ordered_product(self.seed, [(w, e) for w, e, _ in self.crossings()], order)

    def theta_plus_minus(self, clockwise=False) -> TruncatedAutomorphism:
        """Half loop from the positive chamber direction (1,1) to (-1,-1)."""
        cr = self.crossings(start=(1, 1), stop=(-1, -1), clockwise=clockwise)
        return path_ordered_product(self.seed, [(w, e) for w, e, _ in cr], self.order)

    def truncate(self, order):
        walls = []
        for w in self.walls:
            top = order // sum(w.n0)
            h = {j: c for j, c in w.hamiltonian.items() if j <= top}
            walls.append(Wall2D(w.n0, w.kind, w.direction, h, w.initial))
        return RankTwoDiagram(self.seed, walls, order)

    def signature(self):
        """Sorted (n0, kind, direction, Hamiltonian) data of the nontrivial walls."""
        out = []
        for w in self.nontrivial():
            d = None if w.direction is None else tuple(format_rational(x) for x in w.direction)
            out.append((w.n0, w.kind, d, tuple(sorted((j, c) for j, c in w.hamiltonian.items()))))
        return sorted(out, key=lambda t: (t[0], t[1], str(t[2])))


def rank2_complete(seed: Seed, walls, order: int) -> RankTwoDiagram:
    """Insert outgoing rays degree by degree until the loop product is the identity."""
    _check_rank2(seed)
    for w in walls:
        if w.kind != "line":
            raise PreconditionError("incoming walls must be lines through the origin")
    diagram = RankTwoDiagram(seed, walls, order).truncate(order)
    rays = {}
    for deg in range(1, order + 1):
        loop = diagram.loop_product(deg)
        defect = {}
        for i in seed.indices:
            k = seed.unfrozen.index(i)
            for n, a in loop.images[i].homogeneous(deg).items():
                if n[k]:
                    g = a * seed.d[i] / n[k]
                    if defect.setdefault(n, g) != g:
                        raise StructureError(f"defect at {n} is not a Hamiltonian term")
        for n, g in sorted(defect.items()):
            if not g:
                continue
            n0, j = _primitive(n)
            m = seed.p_star(dict(zip(seed.unfrozen, n0)))
            direction = tuple(-m[i] for i in seed.indices)
            if not any(direction):
                raise StructureError(f"defect at {n} lies in the kernel of p*")
            eps = crossing_sign(seed, n0, direction)
            wall = rays.get(n0)
            if wall is None:
                wall = Wall2D(n0, "ray", direction, {})
                rays[n0] = wall
                diagram.walls.append(wall)
            wall.hamiltonian[j] = wall.hamiltonian.get(j, 0) - eps * g
            if not wall.hamiltonian[j]:
                del wall.hamiltonian[j]
        if not diagram.loop_product(deg).is_identity():
            raise StructureError(f"completion failed to cancel the degree {deg} defect")
    return diagram


# restriction along a seed covering


@dataclass
class CoverWall:
    """A wall over a higher-rank seed: support n0-perp, or the simplicial cone on ``cone``."""

    n0: tuple
    hamiltonian: dict
    cone: list | None = None


def initial_cover_walls(seed: Seed, order: int):
    r = len(seed.unfrozen)
    out = []
    for k, i in enumerate(seed.unfrozen):
        n0 = tuple(1 if j == k else 0 for j in range(r))
        out.append(CoverWall(n0, {j: -seed.d[i] * Fraction((-1) ** j, j * j) for j in range(1, order + 1)}))
    return out


def _solve(cols, v):
    """Exact solution of sum_j lam_j cols[j] = v, or None; columns must be independent."""
    n, k = len(v), len(cols)
    m = [[Fraction(cols[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    piv_cols, r = [], 0
    for c in range(k):
        p = next((i for i in range(r, n) if m[i][c]), None)
        if p is None:
            raise PreconditionError("cone generators must be linearly independent")
        m[r], m[p] = m[p], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(n):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(m[i][k] for i in range(r, n)):
        return None
    return [m[i][k] for i in range(k)]


def restrict_walls(sc: SeedCovering, walls, order: int):
    """Pull wall supports back along kappa and push functions forward along pi.

    The base must have rank 2 with no frozen indices.  Walls landing on the same
    support are merged by adding Hamiltonians.
    """
    base = sc.base
    if base.frozen or len(base.indices) != 2:
        raise PreconditionError("restriction is implemented for rank-2 bases only; compare theta operators instead")
    total = sc.total
    bpos = {o: k for k, o in enumerate(base.unfrozen)}
    merged = {}
    for w in walls:
        nb = [0, 0]
        for k, x in zip(total.unfrozen, w.n0):
            nb[bpos[sc.orbit_of[k]]] += x
        n0b, s = _primitive(nb)
        u = _line_direction(base, n0b)
        supports = []
        if w.cone is None:
            kind = "line"
        else:
            for cand in (u, (-u[0], -u[1])):
                m = sc.kappa(dict(zip(base.indices, cand)))
                lam = _solve(w.cone, [m[i] for i in total.indices])
                if lam is not None and all(x >= 0 for x in lam):
                    supports.append(cand)
            if not supports:
                continue
            kind = "line" if len(supports) == 2 else "ray"
        key = (n0b, kind, None if kind == "line" else angle_key(supports[0]))
        if key not in merged:
            merged[key] = Wall2D(n0b, kind, None if kind == "line" else tuple(supports[0]), {})
        h = merged[key].hamiltonian
        for j, c in w.hamiltonian.items():
            if j * s * sum(n0b) <= order:
                h[j * s] = h.get(j * s, 0) + Fraction(c)
    out = []
    for wall in merged.values():
        wall.hamiltonian = {j: c for j, c in wall.hamiltonian.items() if c}
        out.append(wall)
    return out


def same_walls(a, b, order):
    """Equality of wall lists as multisets of (normal, support, truncated Hamiltonian)."""
    def sig(ws):
        out = []
        for w in ws:
            top = order // sum(w.n0)
            h = tuple(sorted((j, c) for j, c in w.hamiltonian.items() if j <= top and c))
            if h:
                out.append((w.n0, w.kind, w.direction, h))
        return sorted(out, key=repr)
    return sig(a) == sig(b)
