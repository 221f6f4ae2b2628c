"""Fat points: finite local algebra presentations and their simplicial shapes.

A fat point is k[y1..ys]/I with every generator nilpotent (so the algebra is
local with residue field k). Elements are handled as coefficient vectors over
the standard-monomial basis; a lazily built multiplication table keeps point
enumeration cheap.
"""

from __future__ import annotations

from fractions import Fraction

from .config import DEFAULT, Config
from .errors import CapExceeded, FieldMismatch, NotFinite, NotLocal, WorkbenchError
from .fields import Field
from .poly import Ideal, Poly, poly_str, tensor_product


class QuotientAlgebra:
    """Finite-dimensional quotient k[y]/I with vector arithmetic over its basis."""

    def __init__(self, ideal: Ideal):
        self.ideal = ideal
        self.field = ideal.field
        basis = ideal.quotient_basis()
        if basis is None:
            raise NotFinite("quotient algebra is infinite-dimensional")
        self.basis = basis                      # monomial Polys, grevlex-increasing
        self.basis_exps = [b.leading()[0] for b in basis]
        self.index = {e: i for i, e in enumerate(self.basis_exps)}
        self.dim = len(basis)
        self._table = {}

    @property
    def vars(self):
        return self.ideal.vars

    def zero_vector(self):
        return (self.field.zero,) * self.dim

    def unit_vector(self):
        one = (0,) * len(self.vars)
        if one not in self.index:
            raise WorkbenchError("zero algebra has no unit")
        out = list(self.zero_vector())
        out[self.index[one]] = self.field.one
        return tuple(out)

    def nf_vector(self, p: Poly):
        r = self.ideal.normal_form(p)
        out = list(self.zero_vector())
        for e, c in r.terms.items():
            out[self.index[e]] = c
        return tuple(out)

    def to_poly(self, vec) -> Poly:
        out = Poly.zero(self.vars, self.field)
        for c, b in zip(vec, self.basis):
            if c:
                out = out + b.scale(c)
        return out

    def add(self, u, v):
        f = self.field
        return tuple(f.add(a, b) for a, b in zip(u, v))

    def scale(self, u, c):
        f = self.field
        c = f.of(c)
        return tuple(f.mul(a, c) for a in u)

    def _pair(self, i: int, j: int):
        key = (i, j) if i <= j else (j, i)
        got = self._table.get(key)
        if got is None:
            prod = Poly.monomial(
                tuple(a + b for a, b in zip(self.basis_exps[i], self.basis_exps[j])),
                1, self.vars, self.field)
            got = self.nf_vector(prod)
            self._table[key] = got
        return got

    def mul(self, u, v):
        f = self.field
        out = [f.zero] * self.dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                ab = f.mul(a, b)
                for k, c in enumerate(self._pair(i, j)):
                    if c:
                        out[k] = f.add(out[k], f.mul(ab, c))
        return tuple(out)

    def power(self, u, n: int):
        acc = self.unit_vector()
        base = u
        while n:
            if n & 1:
                acc = self.mul(acc, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return acc

    def eval_poly(self, p: Poly, images: dict):
        """Evaluate p with variables sent to algebra vectors."""
        f = self.field
        powers = {}

        def pw(name, k):
            cache = powers.setdefault(name, {0: self.unit_vector()})
            while k not in cache:
                top = max(cache)
                cache[top + 1] = self.mul(cache[top], images[name])
            return cache[k]

        out = list(self.zero_vector())
        for e, c in p.terms.items():
            term = self.unit_vector()
            for i, k in enumerate(e):
                if k:
                    term = self.mul(term, pw(p.vars[i], k))
            for idx, t in enumerate(term):
                if t:
                    out[idx] = f.add(out[idx], f.mul(f.of(c), t))
        return tuple(out)

    def residue(self, vec):
        """Coefficient of the basis monomial 1."""
        one = (0,) * len(self.vars)
        return vec[self.index[one]]

    def is_unit(self, vec) -> bool:
        # local algebra: unit iff the residue is nonzero
        return bool(self.residue(vec))

    def is_zero_vec(self, vec) -> bool:
        return not any(vec)


class FatPoint:
    """A validated finite local algebra point."""

    def __init__(self, algebra: QuotientAlgebra, name: str = ""):
        self.algebra = algebra
        self.name = name

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def ideal(self) -> Ideal:
        return self.algebra.ideal

    @property
    def length(self) -> int:
        return self.algebra.dim

    def presentation_key(self):
        return (self.field, self.ideal.vars,
                tuple(g.key() for g in self.ideal.basis()))

    def __eq__(self, other):
        return isinstance(other, FatPoint) and self.presentation_key() == other.presentation_key()

    def __hash__(self):
        return hash(self.presentation_key())

    def __repr__(self):
        base = repr(self.field)
        if not self.ideal.vars:
            return base
        inside = ", ".join(poly_str(g) for g in self.ideal.gens) or "0"
        return "%s[%s]/(%s)" % (base, ", ".join(self.ideal.vars), inside)


def _nilpotent(alg: QuotientAlgebra, vec) -> bool:
    """Repeated squaring: nilpotent iff the first power of 2 past dim kills it."""
    n = 1
    v = vec
    while n <= alg.dim:
        v = alg.mul(v, v)
        n *= 2
    return alg.is_zero_vec(v)


def make_fat_point(vars, field: Field, gens, name: str = "",
                   cfg: Config = DEFAULT) -> FatPoint:
    """Validate and build a fat point; raises NotFinite or NotLocal."""
    ideal = Ideal(vars, field, gens, cfg)
    if ideal.is_unit():
        raise NotLocal("unit ideal presents the zero ring, not a point")
    alg = QuotientAlgebra(ideal)
    for v in ideal.vars:
        if not _nilpotent(alg, alg.nf_vector(Poly.variable(v, ideal.vars, field))):
            raise NotLocal("generator %r is not nilpotent" % v)
    return FatPoint(alg, name=name)


def base_point(field: Field) -> FatPoint:
    """The one-dimensional point with no coordinates."""
    return FatPoint(QuotientAlgebra(Ideal((), field, [])), name="k")


def tensor_points(a: FatPoint, b: FatPoint) -> FatPoint:
    """Tensor presentation on the disjoint union of coordinate lists.

    Locality is inherited: each generator stays nilpotent in the tensor.
    """
    ideal, _, _ = tensor_product(a.ideal, b.ideal)
    return FatPoint(QuotientAlgebra(ideal))


class SimplicialFatPoint:
    """A level rule over a base fat point: constant, power, or orbit-power."""

    TAGS = ("trivial", "fiber", "sym")

    def __init__(self, tag: str, base: FatPoint, truncation: int = DEFAULT.skeletal_level):
        if tag not in self.TAGS:
            raise WorkbenchError("unknown simplicial tag %r" % tag)
        self.tag = tag
        self.base = base
        self.truncation = truncation
        self._levels = {}

    def level(self, n: int) -> FatPoint:
        """Fat point at level n; the symmetric shape has no ambient algebra."""
        if n < 0:
            raise WorkbenchError("negative level")
        if self.tag == "trivial":
            return self.base
        if self.tag == "sym":
            raise WorkbenchError("symmetric shape carries no ambient algebra; "
                                 "levels exist only as orbit sets")
        if n not in self._levels:
            if n == 0:
                self._levels[0] = self.base
            else:
                self._levels[n] = tensor_points(self.level(n - 1), self.base)
        return self._levels[n]

    def __repr__(self):
        return "%s(%r)@%d" % (self.tag, self.base, self.truncation)


class PointSystem:
    """A directed system of fat points, explicit or rule-generated.

    Explicit systems are finite lists; rule systems materialize members
    1..horizon from a callable index -> FatPoint.
    """

    def __init__(self, members=None, rule=None, label: str = ""):
        if (members is None) == (rule is None):
            raise WorkbenchError("give exactly one of members / rule")
        self.explicit = list(members) if members is not None else None
        self.rule = rule
        self.label = label

    @property
    def finite(self) -> bool:
        return self.explicit is not None

    def materialize(self, horizon: int):
        if self.finite:
            return list(self.explicit)
        return [self.rule(i) for i in range(1, horizon + 1)]

    def chain_check(self, horizon: int):
        """Consecutive members must present decreasing ideals (I_{n+1} <= I_n).

        Returns (ok, failing index, message).
        """
        ms = self.materialize(horizon)
        for i in range(len(ms) - 1):
            small, big = ms[i], ms[i + 1]
            if small.ideal.vars != big.ideal.vars or small.field != big.field:
                return False, i, "ambient presentation mismatch at %d" % i
            for g in big.ideal.gens:
                if not small.ideal.contains(g):
                    return False, i, ("generator %s of member %d escapes member %d"
                                      % (poly_str(g), i + 1, i))
        return True, None, "chain of length %d" % len(ms)


def jet_rule(field: Field, var: str = "t", cfg: Config = DEFAULT):
    """index -> k[var]/(var^index), the standard jet chain (index starts at 1)."""

    def rule(i: int) -> FatPoint:
        v = Poly.variable(var, (var,), field)
        return make_fat_point((var,), field, [v ** i],
                              name="%s^%d" % (var, i), cfg=cfg)

    return rule


def truncation_compatible(small: FatPoint, big: FatPoint) -> bool:
    """Is `small` a closed subpoint of `big` (same coordinates, larger ideal)?"""
    if small.ideal.vars != big.ideal.vars or small.field != big.field:
        return False
    return all(small.ideal.contains(g) for g in big.ideal.gens)
