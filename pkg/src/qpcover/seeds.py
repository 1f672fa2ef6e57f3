"""Seeds, the map p*, principal coefficients and coverings of seeds.

Conventions: ``B[i][j] = {e_j, e_i} * d_i`` and ``p*(e_k) = sum_i B[i][k] f_i``.
Lattice vectors n in N are dicts or tuples over the unfrozen indices; vectors
in M are dicts over all indices in the f-basis.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement

from .errors import ValidationError
from .quiver import Quiver


class Seed:
    def __init__(self, indices, B, d=None, frozen=()):
        self.indices = tuple(indices)
        if len(set(self.indices)) != len(self.indices):
            raise ValidationError("duplicate seed index")
        self.frozen = frozenset(frozen)
        self.unfrozen = tuple(i for i in self.indices if i not in self.frozen)
        self._pos = {i: k for k, i in enumerate(self.indices)}
        d = d or {}
        self.d = {i: Fraction(d.get(i, 1)) for i in self.indices}
        if isinstance(B, dict):
            self._B = [[Fraction(B.get((i, j), 0)) for j in self.indices] for i in self.indices]
        else:
            self._B = [[Fraction(x) for x in row] for row in B]
        self._validate()

    def _validate(self):
        n = len(self.indices)
        if len(self._B) != n or any(len(r) != n for r in self._B):
            raise ValidationError("B has the wrong shape")
        for i in self.indices:
            if self.d[i] <= 0:
                raise ValidationError(f"d_{i} must be positive", witness=i)
        for i in self.indices:
            for j in self.indices:
                bij = self.b(i, j)
                if bij * self.d[j] != -self.b(j, i) * self.d[i]:
                    raise ValidationError(f"B is not skew-symmetrizable at ({i}, {j})", witness=(i, j))
                if (i not in self.frozen or j not in self.frozen) and bij.denominator != 1:
                    raise ValidationError(f"B_{i},{j} must be an integer", witness=(i, j))

    def __eq__(self, other):
        return (isinstance(other, Seed) and self.indices == other.indices and self.frozen == other.frozen
                and self.d == other.d and self._B == other._B)

    def __repr__(self):
        return f"Seed({list(self.indices)}, frozen={sorted(self.frozen)})"

    def pos(self, i):
        return self._pos[i]

    def b(self, i, j) -> Fraction:
        return self._B[self._pos[i]][self._pos[j]]

    def matrix(self):
        return [list(r) for r in self._B]

    def bracket(self, i, j) -> Fraction:
        """{e_i, e_j}, recovered from B_ji = {e_i, e_j} d_j."""
        return self.b(j, i) / self.d[j]

    # lattice helpers

    def as_dict(self, n):
        if isinstance(n, dict):
            return {k: v for k, v in n.items() if v}
        return {k: v for k, v in zip(self.unfrozen, n) if v}

    def as_tuple(self, n):
        if isinstance(n, dict):
            return tuple(n.get(k, 0) for k in self.unfrozen)
        return tuple(n)

    def p_star(self, n) -> dict:
        """The M-vector sum_k n_k sum_i B_ik f_i, as a dict over all indices."""
        n = self.as_dict(n)
        for k in n:
            if k in self.frozen:
                raise ValidationError(f"n must be supported on unfrozen indices, got {k}", witness=k)
        return {i: sum((self.b(i, k) * c for k, c in n.items()), Fraction(0)) for i in self.indices}

    def pairing(self, n, m: dict) -> Fraction:
        """<n, m> with <e_k, f_i> = delta_ki / d_k."""
        n = self.as_dict(n)
        return sum((c * Fraction(m.get(k, 0)) / self.d[k] for k, c in n.items()), Fraction(0))

    def omega(self, n1, n2) -> Fraction:
        """<n1, p*(n2)>, the coefficient governing {y^n1, y^n2}."""
        return self.pairing(n1, self.p_star(n2))

    def p_star_rank(self):
        rows = [[self.b(i, k) for k in self.unfrozen] for i in self.indices]
        return matrix_rank(rows)


def matrix_rank(rows) -> int:
    """Rank of a rational matrix by exact elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((r for r in range(rank, len(m)) if m[r][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col]:
                f = m[r][col] / m[rank][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


def seed_from_quiver(q: Quiver) -> Seed:
    """Skew-symmetric seed with B_ij = #(i->j) - #(j->i) and all d_i = 1."""
    bad = []
    pairs = {}
    for a, (s, t) in q.arrows.items():
        if s == t:
            bad.append(a)
        pairs.setdefault((s, t), []).append(a)
    for (s, t), arrs in pairs.items():
        back = pairs.get((t, s))
        if s != t and back and (s not in q.frozen or t not in q.frozen):
            bad.extend(arrs)
    if bad:
        raise ValidationError(f"quiver has loops or 2-cycles: {sorted(set(bad))}", witness=sorted(set(bad)))
    B = {}
    for a, (s, t) in q.arrows.items():
        B[(s, t)] = B.get((s, t), 0) + 1
        B[(t, s)] = B.get((t, s), 0) - 1
    return Seed(q.vertices, B, frozen=q.frozen)


def prime(i) -> str:
    return f"{i}'"


def principal_seed(sd: Seed) -> Seed:
    """Append a frozen i' for every index with {e_i, e_j'} = delta_ij.

    The B-entries are expanded from the bracket, so B_{i'i} = {e_i, e_i'} d_i' = 1
    and B_{i i'} = {e_i', e_i} d_i = -d_i.
    """
    new = [prime(i) for i in sd.indices]
    idx = list(sd.indices) + new
    d = dict(sd.d)
    d.update({p: 1 for p in new})
    orig = set(sd.indices)

    def bracket(a, b):
        if a in orig and b in orig:
            return sd.bracket(a, b)
        if a in orig:
            return Fraction(1) if b == prime(a) else Fraction(0)
        if b in orig:
            return Fraction(-1) if a == prime(b) else Fraction(0)
        return Fraction(0)

    B = {(a, b): bracket(b, a) * d[a] for a in idx for b in idx}
    return Seed(idx, B, d=d, frozen=set(sd.frozen) | set(new))


class SeedCovering:
    """A seed together with an orbit partition satisfying the folding conditions."""

    def __init__(self, total: Seed, orbit_of: dict):
        self.total = total
        self.orbit_of = dict(orbit_of)
        missing = [i for i in total.indices if i not in self.orbit_of]
        if missing:
            raise ValidationError(f"indices without orbit: {missing}", witness=missing)
        base_idx = []
        for i in total.indices:
            if self.orbit_of[i] not in base_idx:
                base_idx.append(self.orbit_of[i])
        self.orbits = {o: [i for i in total.indices if self.orbit_of[i] == o] for o in base_idx}
        for o, mem in self.orbits.items():
            kinds = {i in total.frozen for i in mem}
            if len(kinds) > 1:
                raise ValidationError(f"orbit {o} mixes frozen and unfrozen indices", witness=o)
            ds = {total.d[i] for i in mem}
            if len(ds) > 1:
                raise ValidationError(f"d is not constant on orbit {o}", witness=o)
        for o, mem in self.orbits.items():
            for ob, jm in self.orbits.items():
                sums = [sum((total.b(i, j) for i in mem), Fraction(0)) for j in jm]
                for j, s in zip(jm, sums):
                    if s != sums[0]:
                        raise ValidationError(
                            f"orbit sums of B differ for orbit {o}: columns {jm[0]} and {j}",
                            witness=(o, jm[0], j))
        B = {(o, ob): sum((total.b(i, self.orbits[ob][0]) for i in mem), Fraction(0))
             for o, mem in self.orbits.items() for ob in self.orbits}
        d = {o: len(mem) * total.d[mem[0]] for o, mem in self.orbits.items()}
        frozen = {o for o, mem in self.orbits.items() if mem[0] in total.frozen}
        self.base = Seed(base_idx, B, d=d, frozen=frozen)

    def size(self, o):
        return len(self.orbits[o])

    def project_m(self, m: dict) -> dict:
        """pi on M: f_i -> f_ibar."""
        out = {o: Fraction(0) for o in self.base.indices}
        for i, v in m.items():
            out[self.orbit_of[i]] += v
        return out

    def project_n(self, n) -> tuple:
        n = self.total.as_dict(n)
        out = {}
        for k, v in n.items():
            o = self.orbit_of[k]
            out[o] = out.get(o, 0) + v
        return self.base.as_tuple(out)

    def kappa(self, mbar: dict) -> dict:
        """kappa(f_ibar) = (1/|ibar|) sum_{i in ibar} f_i."""
        out = {}
        for o, v in mbar.items():
            for i in self.orbits[o]:
                out[i] = Fraction(v) / len(self.orbits[o])
        return {i: out.get(i, Fraction(0)) for i in self.total.indices}


def seed_covering(sd: Seed, orbits) -> SeedCovering:
    """``orbits`` is either a map index -> orbit name or a list of index lists."""
    if isinstance(orbits, dict):
        return SeedCovering(sd, orbits)
    orbit_of = {}
    for block in orbits:
        block = list(block)
        name = block[0] if len(block) == 1 else "{" + ",".join(str(b) for b in block) + "}"
        for i in block:
            orbit_of[i] = name
    return SeedCovering(sd, orbit_of)


def dimension_vectors(rank: int, max_total: int, min_total: int = 0):
    """All n in N^rank with min_total <= |n| <= max_total, by total then lexicographically."""
    out = []
    for tot in range(min_total, max_total + 1):
        level = set()
        for combo in combinations_with_replacement(range(rank), tot):
            v = [0] * rank
            for k in combo:
                v[k] += 1
            level.add(tuple(v))
        out.extend(sorted(level, reverse=True))
    return out
