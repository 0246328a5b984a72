"""Places of k = Q(zeta_p) (and of Q for the p = 2 regime).

A finite place over a rational prime l != p corresponds to an irreducible
factor of Phi_p mod l; the place over p is the single totally ramified one
with uniformizer 1 - zeta.  Places are immutable shareable constants.

Identifiers: "l.index" with the factor index taken in the deterministic
ordering of cyclotomic_factors_mod (roots ascending when the factors are
linear), "real" for the real place of Q, "complex" for the archimedean
marker of a totally complex cyclotomic field.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

from .cyclotomic import CycElt, CyclotomicField, get_field
from .errors import PrecisionUnrepresentable
from .finitefield import ResidueField, cyclotomic_factors_mod


@dataclass(frozen=True)
class Place:
    kind: str                      # "finite" | "real" | "complex"
    p: int                         # the ambient field's prime (k = Q(zeta_p))
    l: int = 0                     # rational prime below (finite places)
    index: int = 0
    e: int = 1                     # ramification index
    f_deg: int = 1                 # residue degree
    q: int = 0                     # residue field size l^f_deg
    factor: tuple[int, ...] = ()   # irreducible factor of Phi_p mod l
    _residue: ResidueField | None = dc_field(default=None, compare=False, repr=False)

    @property
    def id(self) -> str:
        if self.kind == "finite":
            return f"{self.l}.{self.index}"
        return self.kind

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_wild(self) -> bool:
        """Divides p (degree-p phenomena are wild here)."""
        return self.kind == "finite" and self.l == self.p

    @property
    def residue_field(self) -> ResidueField:
        if self._residue is None:
            raise ValueError(f"no residue field at {self.id}")
        return self._residue

    @property
    def zeta_bar(self):
        """Reduction of the global zeta; order p at tame places, 1 at wild."""
        rf = self.residue_field
        if self.is_wild and self.p > 2:
            return rf.one  # zeta = 1 - pi == 1 mod pi
        if self.p == 2:
            return rf.make([-1])
        return rf.make([0, 1])

    def uniformizer(self) -> CycElt:
        k = get_field(self.p)
        if not self.is_finite:
            raise ValueError("uniformizer of an archimedean place")
        if self.is_wild and self.p > 2:
            return k.one - k.zeta  # 1 - zeta
        return k.from_rational(self.l)

    @property
    def ideal_generators(self) -> tuple[str, str]:
        """Two-element description (l, g(zeta)) of the prime ideal."""
        if not self.is_finite:
            raise ValueError("archimedean place has no ideal")
        if self.is_wild and self.p > 2:
            return (str(self.l), "1-zeta")
        coeffs = ",".join(str(c) for c in self.factor)
        return (str(self.l), f"poly[{coeffs}](zeta)")

    def __repr__(self) -> str:
        if self.kind == "finite":
            return f"Place({self.id}, e={self.e}, f={self.f_deg}, q={self.q})"
        return f"Place({self.kind})"


@lru_cache(maxsize=None)
def factor_rational_prime(p: int, l: int) -> tuple[Place, ...]:
    """All places of Q(zeta_p) over the rational prime l, in canonical order."""
    if l < 2:
        raise ValueError("l must be a prime")
    if p == 2:
        rf = ResidueField(l, (1, 1))  # F_l as F_l[z]/(z+1)
        return (
            Place(kind="finite", p=2, l=l, index=0, e=1, f_deg=1, q=l,
                  factor=(1, 1), _residue=rf),
        )
    if l == p:
        # totally ramified: e = p-1, residue field F_p, uniformizer 1-zeta
        rf = ResidueField(p, tuple([1, 1]))
        return (
            Place(kind="finite", p=p, l=p, index=0, e=p - 1, f_deg=1, q=p,
                  factor=(), _residue=rf),
        )
    factors = cyclotomic_factors_mod(p, l)
    places = []
    for i, fac in enumerate(factors):
        rf = ResidueField(l, fac)
        places.append(
            Place(kind="finite", p=p, l=l, index=i, e=1, f_deg=len(fac) - 1,
                  q=l ** (len(fac) - 1), factor=fac, _residue=rf)
        )
    return tuple(places)


def archimedean_places(p: int) -> tuple[Place, ...]:
    if p == 2:
        return (Place(kind="real", p=2),)
    return (Place(kind="complex", p=p),)


def place_by_id(p: int, place_id: str) -> Place:
    if place_id == "real":
        return Place(kind="real", p=p)
    if place_id == "complex":
        return Place(kind="complex", p=p)
    l_str, idx_str = place_id.split(".")
    places = factor_rational_prime(p, int(l_str))
    return places[int(idx_str)]


# -- valuations and residues ---------------------------------------------------


def rational_valuation(x: Fraction, l: int) -> int | None:
    """l-adic valuation of a rational; None encodes +infinity (x = 0)."""
    if x == 0:
        return None
    v = 0
    n = x.numerator
    while n % l == 0:
        n //= l
        v += 1
    d = x.denominator
    while d % l == 0:
        d //= l
        v -= 1
    return v


def valuation(x: CycElt, place: Place) -> int | None:
    """Exact valuation of x at a finite place (None for x = 0)."""
    if not place.is_finite:
        raise ValueError("valuation at an archimedean place")
    if x.is_zero():
        return None
    if x.is_rational():
        return rational_valuation(x.rational_value(), place.l) * place.e
    if place.is_wild:
        # single place over p with f = 1, so v(x) = v_p(Norm(x))
        return rational_valuation(x.norm(), place.p)
    return _unramified_valuation(x, place)


def _unramified_valuation(x: CycElt, place: Place) -> int:
    from .localring import unramified_model  # local import to avoid a cycle

    den = x.denominator_lcm()
    x_int = x * den
    nrm = x_int.norm()
    vl_den = rational_valuation(Fraction(den), place.l)
    bound = rational_valuation(nrm, place.l)
    model = unramified_model(place, bound + 1)
    vec = model.from_integral_cyc(x_int)
    v = model.vector_valuation(vec)
    if v is None:
        raise PrecisionUnrepresentable("valuation exceeded its norm bound")
    return v - vl_den


def residue(x: CycElt, place: Place):
    """Image of a v-unit x in the residue field of a finite place."""
    if not place.is_finite:
        raise ValueError("no residue field at an archimedean place")
    rf = place.residue_field
    l = place.l
    if place.is_wild and place.p > 2:
        # reduction sends zeta to 1; coefficients must be p-integral
        num = Fraction(0)
        den_total = 1
        total = Fraction(0)
        for c in x.coords:
            total += c
        num, den_total = total.numerator, total.denominator
        if den_total % l == 0:
            raise PrecisionUnrepresentable("denominator not invertible at the wild place")
        return rf.make([num * pow(den_total, -1, l)])
    coords = []
    for c in x.coords:
        if c.denominator % l == 0:
            raise PrecisionUnrepresentable("denominator not invertible at this place")
        coords.append(c.numerator * pow(c.denominator, -1, l) % l)
    return rf.make(coords)


def unit_residue(x: CycElt, place: Place):
    """Residue of the unit part x / pi^v(x); exact at any finite place."""
    v = valuation(x, place)
    if v is None:
        raise ValueError("unit part of zero")
    if v == 0:
        return residue(x, place)
    pi = place.uniformizer()
    y = x * pi.inverse() ** v if v > 0 else x * pi ** (-v)
    return residue(y, place)


def support_places(x: CycElt, include_wild: bool = True) -> list[Place]:
    """All finite places where v(x) != 0, via the norm's prime support."""
    import sympy

    if x.is_zero():
        raise ValueError("support of zero")
    p = x.field.p
    den = x.denominator_lcm()
    nrm = (x * den).norm()
    primes = set(sympy.factorint(abs(nrm.numerator)).keys()) if abs(nrm.numerator) != 1 else set()
    primes |= set(sympy.factorint(den).keys())
    out = []
    for l in sorted(primes):
        if l == p and not include_wild:
            continue
        for place in factor_rational_prime(p, l):
            if valuation(x, place) != 0:
                out.append(place)
    return out
