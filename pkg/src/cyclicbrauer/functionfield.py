"""Cyclic-algebra classes (a, f) over k(t): residues, pullback, fiber values.

The scheme attached to (a, f) is never materialized: every computation is
fiberwise through the generic fiber, which is legitimate because the Brauer
group of a Severi-Brauer bundle is vertical.  A fiber over t (away from the
zero locus of f) has a k_v-point iff (a, f(t)) splits, and the obstruction
class evaluates there to inv_v(a, f1(t)).
"""

from __future__ import annotations

from dataclasses import dataclass

from .cyclotomic import CycElt, get_field
from .errors import (
    ConstantG,
    EvaluationAtRamification,
    WildPlace,
    ZeroAtCenter,
    ZeroPolynomial,
)
from .factorization import factor_poly, homogenize_p, is_pth_power_free
from .localring import LocalElement
from .places import Place, valuation
from .polynomials import Poly
from .powerclasses import wild_threshold
from .symbols import CyclicPair, InvariantValue, SymbolCertificate, inv_local


@dataclass(frozen=True)
class P1Point:
    """A closed point of P^1_k: a monic irreducible polynomial or infinity."""

    kind: str  # "finite" | "infinity"
    poly: Poly | None = None

    @staticmethod
    def finite(poly: Poly) -> P1Point:
        return P1Point("finite", poly.monic())

    @staticmethod
    def infinity() -> P1Point:
        return P1Point("infinity", None)

    def encode(self) -> str:
        return "inf" if self.kind == "infinity" else self.poly.encode()


class FunctionFieldClass:
    """(a, f) in Br k(t)[p] with the factorization of f carried along."""

    def __init__(self, a: CycElt, f: Poly, p: int, factors=None):
        if a.is_zero():
            raise ValueError("a must be nonzero")
        if f.is_zero():
            raise ZeroPolynomial("f must be nonzero")
        self.a = a
        self.f = f
        self.p = p
        self.field = f.field
        if factors is None:
            factors = factor_poly(f)
        self.factors = factors
        for g, m in factors:
            if not (0 < m < p):
                raise ValueError("f must be p-th-power-free with multiplicities < p")

    def __repr__(self) -> str:
        return f"FunctionFieldClass(a={self.a.encode()}, deg f={self.f.degree})"

    def multiplicity_at(self, pt: P1Point) -> int:
        """v_t(f): the order of f at the closed point."""
        if pt.kind == "infinity":
            return -self.f.degree
        q = pt.poly
        mult = 0
        rem = self.f
        while True:
            quo, r = rem.divmod(q)
            if not r.is_zero():
                return mult
            mult += 1
            rem = quo


@dataclass
class ResidueClass:
    """The class of a^(v_t(f)) in kappa(t)^x / kappa(t)^(x p)."""

    point: P1Point
    exponent: int          # v_t(f) mod p
    a: CycElt
    trivial: bool
    certificate: dict

    def encode(self) -> dict:
        return {
            "point": self.point.encode(),
            "exponent": self.exponent,
            "a": self.a.encode(),
            "trivial": self.trivial,
            "certificate": self.certificate,
        }


def residue_at(cls: FunctionFieldClass, pt: P1Point, prime_bound: int = 400) -> ResidueClass:
    """The purity residue of (a, f) at a closed point of P^1."""
    from .extensions import is_pth_power_in_extension
    from .factorization import exact_pth_root_in_k

    p = cls.p
    v_t = cls.multiplicity_at(pt)
    e = v_t % p
    if e == 0:
        return ResidueClass(pt, 0, cls.a, True, {"reason": "p divides v_t(f)"})
    if pt.kind == "infinity" or pt.poly.degree == 1:
        root = exact_pth_root_in_k(cls.a, p)
        trivial = root is not None
        cert = {"kind": "k_level", "root": root.encode() if root else None}
        return ResidueClass(pt, e, cls.a, trivial, cert)
    is_power, cert = is_pth_power_in_extension(cls.a, pt.poly, p, prime_bound)
    return ResidueClass(pt, e, cls.a, is_power, dict(cert, kind_outer="extension"))


def ramification_locus(cls: FunctionFieldClass) -> list[tuple[P1Point, ResidueClass]]:
    """Closed points with nontrivial residue (subset of factors of f plus infinity)."""
    out = []
    for g, _ in cls.factors:
        pt = P1Point.finite(g)
        rc = residue_at(cls, pt)
        if not rc.trivial:
            out.append((pt, rc))
    inf = P1Point.infinity()
    rc = residue_at(cls, inf)
    if not rc.trivial:
        out.append((inf, rc))
    return out


def pullback(cls: FunctionFieldClass, g: Poly) -> FunctionFieldClass:
    """The class (a, f(g(t))), renormalized to p-th-power-free form."""
    if g.degree < 1:
        raise ConstantG("pullback along a constant map")
    fg = cls.f.compose(g)
    if fg.is_zero():
        raise ZeroPolynomial("f(g) is zero")
    factors = factor_poly(fg)
    lead = fg
    reduced = Poly(cls.field, [1])
    new_factors = []
    for q, m in factors:
        lead = lead  # constant tracked below
        if m % cls.p:
            reduced = reduced * q ** (m % cls.p)
            new_factors.append((q, m % cls.p))
    # keep the constant: (a, c*prod) and (a, prod) differ by (a, c)
    const = fg
    for q, m in factors:
        const = const.exact_div(q**m)
    assert const.degree == 0
    reduced = reduced * const.coeff(0)
    return FunctionFieldClass(cls.a, reduced, cls.p, new_factors)


def mobius_flip_poly(h: Poly, c: CycElt, p: int) -> Poly:
    """The chart change t -> c + 1/t on the class polynomial h.

    Returns rev(h(c + u)) * t^((-deg h) mod p); the resulting polynomial has
    degree divisible by p, so the flipped class is unramified at infinity.
    Requires h(c) != 0.
    """
    if h.is_zero():
        raise ZeroPolynomial("flip of zero")
    if h(c).is_zero():
        raise EvaluationAtRamification("flip center is a root of the polynomial")
    shifted = h.shift(c)
    rev = shifted.reverse()
    j = (-h.degree) % p
    t_power = Poly(h.field, [0, 1]) ** j
    return rev * t_power


def mobius_flip(cls: FunctionFieldClass, c: CycElt) -> FunctionFieldClass:
    """Pull (a, f) back along the Mobius map t -> c + 1/t (c not a root of f)."""
    flipped = mobius_flip_poly(cls.f, c, cls.p)
    return FunctionFieldClass(cls.a, flipped, cls.p)


INFINITY = "infinity"


def fiber_invariant(
    total: FunctionFieldClass,
    f1: Poly,
    t,
    place: Place,
) -> InvariantValue | None:
    """Evaluate the obstruction class on the fiber over t in P^1(k_v).

    Returns None when the fiber has no k_v-point (total class nonsplit),
    Some(inv_v(a, f1(t))) otherwise.  t may be a global element, the string
    "infinity", or an integral LocalElement.
    """
    p = total.p
    if t == INFINITY or (isinstance(t, P1Point) and t.kind == "infinity"):
        if total.f.degree % p != 0:
            raise EvaluationAtRamification(
                "the total class is ramified at infinity (p does not divide deg f)"
            )
        tot = inv_local(CyclicPair(total.a, total.f.lc, p), place)[0]
        if not tot.is_zero:
            return None
        if f1.degree % p != 0:
            raise EvaluationAtRamification(
                "the obstruction factor is ramified at infinity"
            )
        return inv_local(CyclicPair(total.a, f1.lc, p), place)[0]
    if isinstance(t, LocalElement):
        return _fiber_invariant_local(total, f1, t, place)
    ft = total.f(t)
    if ft.is_zero():
        raise EvaluationAtRamification("f(t) = 0 exactly")
    tot = inv_local(CyclicPair(total.a, ft, p), place)[0]
    if not tot.is_zero:
        return None
    f1t = f1(t)
    if f1t.is_zero():
        raise EvaluationAtRamification("f1(t) = 0 exactly while f(t) != 0")
    return inv_local(CyclicPair(total.a, f1t, p), place)[0]


def _fiber_invariant_local(
    total: FunctionFieldClass, f1: Poly, t: LocalElement, place: Place
) -> InvariantValue | None:
    """Fiberwise evaluation at a finite-precision integral point."""
    from .localring import build_model
    from .powerclasses import pth_power_class
    from .symbols import _wild_gram, tame_symbol

    if t.valuation is not None and t.valuation < 0:
        raise EvaluationAtRamification(
            "local points outside the integral chart must be evaluated after a flip"
        )
    p = total.p
    need = wild_threshold(place) if place.is_wild else 1
    budget = need + max(total.f.degree, 1) * max(t.precision, 1) + 6
    model = build_model(place, budget)
    tv = model.from_digits(t.unit_digits)
    if t.valuation:
        pi_img = model.from_cyc(place.uniformizer())
        for _ in range(t.valuation):
            tv = model.mul(tv, pi_img)
    for h, is_total in ((total.f, True), (f1, False)):
        coeffs = [model.from_cyc(c) for c in h.coeffs]
        acc = model.zero
        for c in reversed(coeffs):
            acc = model.add(model.mul(acc, tv), c)
        v_acc = model.pi_valuation(acc, cap=budget - 2)
        if v_acc is None:
            raise EvaluationAtRamification("h(t) vanishes to working precision")
        unit = acc
        for _ in range(v_acc):
            unit = model.pi_divide(unit)
        ht_local = LocalElement(place, v_acc, model.digits(unit, need), need)
        val = _inv_mixed(total.a, ht_local, place, p)
        if is_total:
            if not val.is_zero:
                return None
        else:
            return val
    raise AssertionError("unreachable")


def _inv_mixed(a: CycElt, b_local: LocalElement, place: Place, p: int) -> InvariantValue:
    """inv_v(a, b) with global a and finite-precision local b."""
    from .powerclasses import pth_power_class
    from .symbols import _wild_gram

    if place.is_wild:
        if p == 2:
            raise WildPlace("local-element evaluation at 2 is routed via charts")
        gram = _wild_gram(place)
        x = gram.group.coordinates(a)
        y = gram.group.table[
            (
                pth_power_class(b_local, place).val_mod_p,
                pth_power_class(b_local, place).unit_key,
            )
        ]
        total = 0
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                total += xi * gram.gram[i][j] * yj
        return InvariantValue(total, p)
    va = valuation(a, place)
    vb = b_local.valuation
    rf = place.residue_field
    from .localring import embed_unit

    _, a_digits = embed_unit(a, place, 1)
    ua = _digit_residue(a_digits[0], rf)
    ub = _digit_residue(b_local.unit_digits[0], rf)
    t_res = rf.mul(rf.pow(ua, vb % (rf.q - 1)), rf.pow(rf.inv(ub), va % (rf.q - 1)))
    if (va * vb) % 2 == 1:
        t_res = rf.neg(t_res)
    idx = rf.pth_power_index(t_res, p, place.zeta_bar)
    return InvariantValue(idx, p)


def _digit_residue(digit: int, rf):
    coords = []
    v = digit
    for _ in range(max(1, rf.deg)):
        coords.append(v % rf.l)
        v //= rf.l
    return rf.make(coords)


def constancy_radius(h: Poly, t0: CycElt, place: Place) -> int:
    """Smallest r with: v(t - t0) >= r implies h(t)/h(t0) = 1 mod pi^m(v).

    m(v) is 1 at tame places and the wild threshold at places over p, so the
    conclusion forces h(t) and h(t0) into the same p-th-power class.
    """
    if h.degree <= 0:
        if h.is_zero() or h.coeff(0).is_zero():
            raise ZeroAtCenter("constant zero polynomial")
        return 0
    c = h.taylor_coefficients(t0)
    if c[0].is_zero():
        raise ZeroAtCenter("h(t0) = 0")
    m = wild_threshold(place) if place.is_wild else 1
    v0 = valuation(c[0], place)
    r = 0
    for j in range(1, len(c)):
        if c[j].is_zero():
            continue
        vj = valuation(c[j], place)
        need = v0 + m - vj
        if need > 0:
            r = max(r, -(-need // j))  # ceil
    return r
