"""The construction pipeline: search for (c, v), h, a, the flip center, the
pullback polynomial g, and assembly of the counterexample certificate.

Existence steps of the source argument (Faltings, weak approximation) are
replaced by bounded deterministic searches with explicit SearchExhausted
failures; candidate enumeration is totally ordered so identical configs give
byte-identical certificates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .cyclotomic import CycElt, CyclotomicField, get_field
from .errors import (
    DegenerateH,
    DegreeTooSmall,
    ObstructionNotEstablished,
    PropertyFailed,
    SearchExhausted,
)
from .factorization import exact_pth_root_in_k, is_irreducible, is_pth_power_free
from .extensions import is_pth_power_in_extension
from .functionfield import (
    INFINITY,
    FunctionFieldClass,
    fiber_invariant,
    mobius_flip_poly,
    pullback,
)
from .imagesets import ImageSet, ImageSetPolicy, image_set
from .places import (
    Place,
    archimedean_places,
    factor_rational_prime,
    place_by_id,
    support_places,
    valuation,
)
from .polynomials import Poly, poly_gcd, poly_resultant, squarefree_part
from .powerclasses import is_pth_power_local, pth_power_class, wild_threshold
from .symbols import CyclicPair, InvariantValue, inv_local, tame_symbol


@dataclass
class SearchConfig:
    p: int = 3
    field_regime: str = "cyclotomic"  # "Q" for the p = 2 oracle
    g0: str | None = None             # encoded polynomial; default per regime
    c_height: int = 12
    a_multiplier_height: int = 6
    prime_scan_bound: int = 500
    g_degree_max: int = 3
    g_perturbation_height: int = 2
    g_modulus_extra: int = 2
    depth_cap: int = 40
    degree_cap: int = 24
    norm_degree_cap: int = 64
    witness_prime_bound: int = 400
    witness_tries: int = 4000
    factor_limit: int = 200000

    @staticmethod
    def default_for(p: int) -> "SearchConfig":
        if p == 2:
            return SearchConfig(p=2, field_regime="Q")
        return SearchConfig(p=p, field_regime="cyclotomic")

    def field(self) -> CyclotomicField:
        if self.field_regime == "Q":
            if self.p != 2:
                raise ValueError("regime Q requires p = 2")
            return get_field(2)
        return get_field(self.p)

    def g0_poly(self) -> Poly:
        k = self.field()
        if self.g0 is not None:
            return Poly.decode(k, self.g0)
        return Poly(k, [1, 1, 0, 0, 1])  # u^4 + u + 1, irreducible over both regimes

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "field_regime": self.field_regime,
            "g0": self.g0,
            "c_height": self.c_height,
            "a_multiplier_height": self.a_multiplier_height,
            "prime_scan_bound": self.prime_scan_bound,
            "g_degree_max": self.g_degree_max,
            "g_perturbation_height": self.g_perturbation_height,
            "g_modulus_extra": self.g_modulus_extra,
            "depth_cap": self.depth_cap,
            "degree_cap": self.degree_cap,
            "norm_degree_cap": self.norm_degree_cap,
            "witness_prime_bound": self.witness_prime_bound,
            "witness_tries": self.witness_tries,
            "factor_limit": self.factor_limit,
        }

    @staticmethod
    def from_dict(d: dict) -> "SearchConfig":
        cfg = SearchConfig()
        for key, value in d.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key}")
            setattr(cfg, key, value)
        return cfg


@dataclass
class ConstructionData:
    g0: Poly
    c: CycElt
    v_star: Place
    l_elt: CycElt
    h: Poly
    f: Poly
    a: CycElt
    certificates: dict = dc_field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.certificates.get("p")

    def total_class(self, p: int) -> FunctionFieldClass:
        return FunctionFieldClass(self.a, self.f, p)


# -- element streams -----------------------------------------------------------------


def small_elements(field: CyclotomicField, height: int, include_zero: bool = False):
    """Deterministic height-ordered stream of elements of k."""
    if include_zero:
        yield field.zero
    if field.p == 2:
        for h in range(1, height + 1):
            yield field.from_rational(h)
            yield field.from_rational(-h)
    else:
        z = field.zeta
        for h in range(1, height + 1):
            for x in range(-h, h + 1):
                for y in range(-h, h + 1):
                    if max(abs(x), abs(y)) == h:
                        yield field.from_rational(x) + z * y


def _primes_stream(bound: int):
    import sympy

    l = 1
    while l < bound:
        l = int(sympy.nextprime(l))
        yield l


# -- Lemma 4.1: find c and v_star ------------------------------------------------------


def find_c_and_v(g0: Poly, cfg: SearchConfig) -> tuple[CycElt, Place, dict]:
    """c with g0(c) not a global p-th power, then a tame place where the
    value is a unit with non-p-th-power residue (so k_v(g0(c)^(1/p)) is the
    unramified degree-p extension and the Prop 4.2(b) norm argument applies)."""
    p = cfg.p
    field = cfg.field()
    if g0.degree <= 3:
        raise DegreeTooSmall("deg g0 must exceed 3")
    for c in small_elements(field, cfg.c_height, include_zero=True):
        gc = g0(c)
        if gc.is_zero():
            continue
        if exact_pth_root_in_k(gc, p) is not None:
            continue
        for l in _primes_stream(cfg.prime_scan_bound):
            if l == p or (field.p > 2 and l == field.p):
                continue
            for place in factor_rational_prime(field.p, l):
                if valuation(gc, place) != 0:
                    continue
                ok, cert = is_pth_power_local(gc, place)
                if not ok and cert.get("residue_index", 0) != 0:
                    return c, place, {
                        "c": c.encode(),
                        "g0_at_c": gc.encode(),
                        "place": place.id,
                        "residue_certificate": cert,
                    }
    raise SearchExhausted("no (c, v_star) within the configured bounds")


def build_h(g0: Poly, c: CycElt, v_star: Place, cfg: SearchConfig) -> tuple[CycElt, Poly, Poly]:
    """l = g0(c)^(p-1) makes f(c) = g0(c)^p a global p-th power; h = x - c + l."""
    p = cfg.p
    field = cfg.field()
    gc = g0(c)
    for perturb in small_elements(field, cfg.a_multiplier_height, include_zero=False):
        l_elt = gc ** (p - 1) * perturb**p
        h = Poly(field, [l_elt - c, 1])
        if h(c).is_zero():
            continue
        f = g0 * h
        if poly_gcd(g0, h).degree != 0:
            continue
        if not is_pth_power_free(f, p):
            continue
        if poly_gcd(f, f.derivative()).degree != 0:
            continue  # keep f separable
        return l_elt, h, f
    raise DegenerateH("no valid h within the perturbation bounds")


def choose_a(
    data_f: Poly,
    factors,
    v_star: Place,
    cfg: SearchConfig,
    prefer_power_places: list[Place] | None = None,
) -> tuple[CycElt, dict]:
    """a with v_star(a) = 1 and a not a p-th power in k[u]/(f_i) for every i.

    Among admissible candidates, prefer those that are local p-th powers at
    the given places (large collision primes): that empties their fiberwise
    images and keeps the pullback congruence modulus small.  Falls back to
    the first admissible candidate when the preference cannot be met.
    """
    p = cfg.p
    field = cfg.field()
    pi = field.from_rational(v_star.l)
    fallback = None
    for mult in small_elements(field, cfg.a_multiplier_height, include_zero=False):
        a = pi * mult
        if a.is_zero():
            continue
        if valuation(a, v_star) != 1:
            continue
        ok_all = True
        factor_certs = []
        for (f_i, _) in factors:
            is_power, cert = _a_power_in_factor_field(a, f_i, p, cfg)
            factor_certs.append({"factor": f_i.encode(), "is_power": is_power, "cert": cert})
            if is_power:
                ok_all = False
                break
        if not ok_all:
            continue
        certs = {"factor_checks": factor_certs, "valuation_at_v_star": 1}
        if fallback is None:
            fallback = (a, dict(certs, preference_met=False))
        if prefer_power_places:
            if all(is_pth_power_local(a, w)[0] for w in prefer_power_places):
                certs["preference_met"] = True
                certs["preferred_places"] = [w.id for w in prefer_power_places]
                return a, certs
        else:
            return a, certs
    if fallback is not None:
        return fallback
    raise SearchExhausted("no admissible a within the configured bounds")


def _a_power_in_factor_field(a: CycElt, f_i: Poly, p: int, cfg: SearchConfig) -> tuple[bool, dict]:
    """Is a a p-th power in k[u]/(f_i)?  Exact, with the degree shortcut."""
    if f_i.degree == 1 or f_i.degree % p != 0:
        root = exact_pth_root_in_k(a, p)
        return root is not None, {
            "kind": "k_level",
            "degree_shortcut": f_i.degree % p != 0,
            "root": root.encode() if root else None,
        }
    return is_pth_power_in_extension(
        a, f_i, p, cfg.witness_prime_bound, cfg.norm_degree_cap
    )


# -- Prop 4.2 verification --------------------------------------------------------------


def find_value_witness(
    total: FunctionFieldClass,
    f1: Poly,
    place: Place,
    want_zero: bool,
    tries: int,
) -> tuple | None:
    """A global t with split fiber whose value is (non)zero, plus the value."""
    field = total.field

    def candidates():
        if total.f.degree % total.p == 0 and f1.degree % total.p == 0:
            yield INFINITY
        denominators = [1, 2, 3, 4, 5, 6, 8, 12]
        if place.is_finite:
            denominators.extend([place.l, place.l**2])
        for h in range(0, 41):
            for d in denominators:
                for x in small_elements(field, h, include_zero=(h == 0)):
                    if x.height() != h and h > 0:
                        continue
                    yield x * Fraction(1, d)

    count = 0
    for t in candidates():
        count += 1
        if count > tries:
            break
        try:
            val = fiber_invariant(total, f1, t, place)
        except Exception:
            continue
        if val is None:
            continue
        if val.is_zero == want_zero:
            t_enc = "inf" if t == INFINITY else t.encode()
            return t_enc, val
    return None


def verify_prop42(data: ConstructionData, cfg: SearchConfig, bad_places: list[Place]) -> dict:
    """The three local properties of the base construction, fiberwise."""
    p = cfg.p
    field = cfg.field()
    report: dict = {"p": p}
    total = data.total_class(p)
    f1 = data.g0

    # (a) archimedean invariants of (a, f1(t)) vanish on split fibers
    if p % 2 == 1:
        report["archimedean"] = {"pass": True, "reason": "totally complex field"}
    else:
        real = archimedean_places(2)[0]
        iset = image_set(total, f1, real)
        ok = set(iset.values) <= {"0"}
        report["archimedean"] = {"pass": ok, "values": iset.values}
        if not ok:
            raise PropertyFailed("a", f"real-place values {iset.values}")

    # (b) the v_star mechanism: v(a) = 1, residue of f1(c) generates a
    # nontrivial class, total fiber at c splits
    f1c = f1(data.c)
    sym = tame_symbol(CyclicPair(data.a, f1c, p), data.v_star)
    total_at_c = inv_local(CyclicPair(data.a, data.f(data.c), p), data.v_star)[0]
    ok_b = (not sym.is_zero) and total_at_c.is_zero and valuation(data.a, data.v_star) == 1
    report["v_star"] = {
        "pass": ok_b,
        "place": data.v_star.id,
        "inv_f1_at_c": sym.encode(),
        "inv_total_at_c": total_at_c.encode(),
        "v_star_of_a": valuation(data.a, data.v_star),
    }
    if not ok_b:
        raise PropertyFailed("b", json.dumps(report["v_star"]))

    # (c) 0 lies in the fiberwise image at every relevant place
    zero_witnesses = {}
    for place in bad_places:
        found = find_value_witness(total, f1, place, want_zero=True, tries=cfg.witness_tries)
        if found is None:
            raise PropertyFailed("c", f"no zero-value witness at {place.id}")
        zero_witnesses[place.id] = {"t": found[0], "value": found[1].encode()}
    report["zero_witnesses"] = zero_witnesses
    report["pass"] = True
    return report


# -- the conservative bad place set ------------------------------------------------------


def _norm_int(x: CycElt) -> int:
    den = x.denominator_lcm()
    n = (x * den).norm()
    return abs(n.numerator) * den


def _bounded_factor(n: int, limit: int) -> tuple[set[int], list[int]]:
    """(prime factors found, unfactored composite cofactors), bounded work.

    Trial division up to the limit, then full factorization only for small
    leftovers; giant composite cofactors are returned for the family
    certificate instead of risking an unbounded factorization.
    """
    import sympy

    n = abs(n)
    if n <= 1:
        return set(), []
    primes: set[int] = set()
    for l in sympy.primerange(2, limit):
        if l * l > n:
            break
        while n % l == 0:
            primes.add(int(l))
            n //= l
    if n == 1:
        return primes, []
    if sympy.isprime(n):
        primes.add(int(n))
        return primes, []
    if n.bit_length() <= 160:
        for base in sympy.factorint(n):
            primes.add(int(base))
        return primes, []
    return primes, [n]


def _full_factor(n: int) -> set[int]:
    """Complete prime support; raises SearchExhausted on intractable inputs
    so a search candidate is rejected instead of stalling."""
    import sympy

    n = abs(n)
    if n <= 1:
        return set()
    primes: set[int] = set()
    for l in sympy.primerange(2, 200000):
        if l * l > n:
            break
        while n % l == 0:
            primes.add(int(l))
            n //= l
    if n > 1:
        if sympy.isprime(n):
            primes.add(int(n))
        elif n.bit_length() <= 220:
            for base in sympy.factorint(n):
                primes.add(int(base))
        else:
            raise SearchExhausted(f"cannot fully factor a {n.bit_length()}-bit integer")
    return primes


def _support_with_hint(n: int, hint: set[int]) -> set[int]:
    """Prime support of n, dividing out known primes first (exact)."""
    n = abs(n)
    out: set[int] = set()
    for l in sorted(hint):
        while n % l == 0:
            n //= l
            out.add(l)
    out |= _full_factor(n)
    return out


def _chart_blocks(total_f: Poly, f1: Poly, p: int, blocks) -> dict:
    """Per-chart block polynomial lists [(poly, m, m1)], s-pad included."""
    from .factorization import homogenize_p
    from .imagesets import ClassBlocks

    field = total_f.field
    hom_f = homogenize_p(total_f, p)
    hom_f1 = homogenize_p(f1, p)
    from .polynomials import primitive_part

    out = {"t": list(blocks.blocks), "s": []}
    for (b, m, m1) in blocks.blocks:
        rev = Poly(field, list(reversed(b.coeffs)))
        if rev.degree >= 1:
            out["s"].append((primitive_part(rev), m, m1))
    pad_f = hom_f.degree - total_f.degree
    pad_f1 = hom_f1.degree - f1.degree
    if pad_f or pad_f1:
        out["s"].append((Poly(field, [0, 1]), pad_f, pad_f1))
    out["charts"] = {
        "t": (total_f, f1),
        "s": (hom_f.dehomogenize_s(), hom_f1.dehomogenize_s()),
    }
    return out


def bad_place_set(
    a: CycElt,
    total_f: Poly,
    f1: Poly,
    p: int,
    cfg: SearchConfig,
    blocks=None,
    cross_hint: set[int] | None = None,
) -> tuple[list[Place], dict]:
    """Conservative finite S outside which the good-place schema proves im = {0}.

    Cross-BLOCK resultants need their full prime support; for pullback data
    the caller passes a hint (support of the base resultants and of lc(g),
    valid by Res(F(g), G(g)) = lc(g)^(mnd) Res(F, G)^deg g), and the division
    is verified exactly.  Block self-discriminants may stay unfactored: those
    places satisfy the schema and are covered by family gcd evidence.
    """
    from .imagesets import ClassBlocks

    field = a.field
    if blocks is None:
        blocks = ClassBlocks.from_factors(FunctionFieldClass(a, total_f, p), f1)
    primes: set[int] = {p}
    if field.p > 2:
        primes.add(field.p)
    cofactor_data: list[dict] = []

    primes |= _full_factor(_norm_int(a))
    deg_bound = max(total_f.degree, 1)
    hint = set(cross_hint or set()) | set(primes)

    chart_data = _chart_blocks(total_f, f1, p, blocks)
    cross_res_norms = []
    lc_norms = []
    disc_norms = []
    for name in ("t", "s"):
        h, h1 = chart_data["charts"][name]
        if (h * h1).degree < 1:
            continue
        lc_norms.append(_norm_int(h.lc))
        lc_norms.append(_norm_int(h1.lc))
        for c in list(h.coeffs) + list(h1.coeffs):
            if not c.is_zero():
                primes |= _full_factor(c.denominator_lcm())
        bl = chart_data[name]
        for (b, _, _) in bl:
            for c in b.coeffs:
                if not c.is_zero():
                    primes |= _full_factor(c.denominator_lcm())
        for i in range(len(bl)):
            for j in range(i + 1, len(bl)):
                res = poly_resultant(bl[i][0], bl[j][0])
                cross_res_norms.append(_norm_int(res))
        for (b, _, _) in bl:
            rad = squarefree_part(b)
            if rad.degree >= 1:
                disc = poly_resultant(rad, rad.derivative())
                if not disc.is_zero():
                    disc_norms.append(_norm_int(disc))

    for n in lc_norms:
        primes |= _full_factor(n)
    for n in cross_res_norms:
        primes |= _support_with_hint(n, hint | primes)
    for n in disc_norms:
        found, cofs = _bounded_factor(n, cfg.factor_limit)
        primes |= found
        for cof in cofs:
            # strip every enumerated prime; the remainder is coprime to all
            # protected data (a, leading coefficients, cross-resultants have
            # fully enumerated supports), hence family-excusable
            for l in sorted(primes):
                while cof % l == 0:
                    cof //= l
            if cof == 1:
                continue
            if not family_cofactor_ok(cof, a, lc_norms, cross_res_norms, deg_bound, p):
                primes |= _full_factor(cof)  # last resort; may raise
            else:
                cofactor_data.append({"cofactor": str(cof)})

    import sympy

    for l in sympy.primerange(2, deg_bound + 1):
        primes.add(int(l))

    places: list[Place] = list(archimedean_places(field.p))
    for l in sorted(primes):
        for place in factor_rational_prime(field.p, int(l)):
            places.append(place)
    info = {
        "primes": sorted(primes),
        "family_cofactors": cofactor_data,
        "degree_bound": deg_bound,
    }
    return places, info


def _gcd_int(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def family_cofactor_ok(
    cof: int, a: CycElt, lc_norms: list[int], cross_res_norms: list[int],
    deg_bound: int, p: int,
) -> bool:
    """Schema premises hold at every place over the cofactor (gcd evidence).

    Requires: no prime of cof divides p, the field prime, the norm or
    denominator of a, any leading-coefficient norm, or any cross-block
    resultant norm; and every prime of cof exceeds the degree bound.
    """
    import sympy

    field_p = a.field.p
    if _gcd_int(cof, p * field_p) != 1:
        return False
    if _gcd_int(cof, _norm_int(a)) != 1:
        return False
    for n in lc_norms + cross_res_norms:
        if _gcd_int(cof, n) != 1:
            return False
    for l in sympy.primerange(2, deg_bound + 1):
        if cof % int(l) == 0:
            return False
    return True


# -- good-place schema verification -------------------------------------------------------


def good_place_schema_check(
    a: CycElt, total_f: Poly, f1: Poly, p: int, place: Place, blocks=None
) -> dict | None:
    """Premises making im(phi_v) = {0} provable without disk enumeration.

    tame place; a a v-unit; chart data v-integral with unit leading
    coefficients; block polynomials pairwise coprime mod v; every block has
    0 < m < p (or m = m1 = 0).  Then for any t at most one block has positive
    valuation, v(f(t)) = m v(B(t)) and v(f1(t)) = m1 v(B(t)), so a split
    fiber forces ind * m1 * v(B(t)) = 0.  Collisions inside one block are
    harmless because the exponent pair is shared.  q > deg f guarantees a
    unit-value residue class, hence a split fiber with value 0.
    """
    from .imagesets import ClassBlocks

    if not place.is_finite or place.is_wild:
        return None
    if valuation(a, place) != 0:
        return None
    if blocks is None:
        try:
            blocks = ClassBlocks.from_factors(FunctionFieldClass(a, total_f, p), f1)
        except Exception:
            return None
    data = {"place": place.id, "checks": []}
    chart_data = _chart_blocks(total_f, f1, p, blocks)
    for name in ("t", "s"):
        h, h1 = chart_data["charts"][name]
        if (h * h1).degree < 1:
            continue
        for c in list(h.coeffs) + list(h1.coeffs):
            if not c.is_zero() and valuation(c, place) < 0:
                return None
        if valuation(h.lc, place) != 0 or valuation(h1.lc, place) != 0:
            return None
        bl = chart_data[name]
        for (b, m, m1) in bl:
            if m == 0 and m1 > 0:
                return None
            for c in b.coeffs:
                if not c.is_zero() and valuation(c, place) < 0:
                    return None
            if valuation(b.lc, place) != 0:
                return None
        for i in range(len(bl)):
            for j in range(i + 1, len(bl)):
                if not _coprime_mod_v(bl[i][0], bl[j][0], place):
                    return None
        data["checks"].append({"chart": name, "blocks": len(bl)})
    if place.q <= max(total_f.degree, 1):
        return None  # witness existence not generic; enumerate instead
    return data


def _mult_in(h: Poly, q: Poly) -> int:
    mult = 0
    rem = h
    while rem.degree >= q.degree:
        quo, r = rem.divmod(q)
        if not r.is_zero():
            break
        mult += 1
        rem = quo
    return mult


def _coprime_mod_v(b1: Poly, b2: Poly, place: Place) -> bool:
    """gcd of the residue-field reductions is 1 (the honest schema premise;
    the resultant valuation can be polluted by normalization scalings)."""
    from .generic_poly import ResidueFieldOps, gp_gcd, gp_trim
    from .localring import residue_or_zero

    rf = place.residue_field
    ops = ResidueFieldOps(rf)
    r1 = gp_trim(ops, [residue_or_zero(c, place) for c in b1.coeffs])
    r2 = gp_trim(ops, [residue_or_zero(c, place) for c in b2.coeffs])
    if len(r1) - 1 != b1.degree or len(r2) - 1 != b2.degree:
        return False  # degree dropped: leading coefficient vanished
    return len(gp_gcd(ops, r1, r2)) - 1 == 0


# -- weak approximation: congruence-constrained search ------------------------------------


def _place_congruence(place: Place, center: CycElt, r: int) -> list[tuple]:
    """Linear conditions a*x + b*y = t mod l^m encoding c = center mod pi^r.

    Coordinates (x, y) refer to c = x + y*zeta (y = 0 when k = Q).
    """
    field_p = place.p
    cx = center.coords[0]
    cy = center.coords[1] if len(center.coords) > 1 else Fraction(0)
    assert cx.denominator == 1 and cy.denominator == 1, "centers are integral"
    cx, cy = int(cx), int(cy)
    l = place.l
    if field_p == 2:
        return [(l, r, 1, 0, cx)]
    if place.is_wild:
        m = (r + 1) // 2  # pi^(2m) = (p^m); rounding up strengthens the condition
        return [(l, m, 1, 0, cx), (l, m, 0, 1, cy)]
    if place.f_deg == 1:
        from .localring import unramified_model

        model = unramified_model(place, r)
        root = model.factor  # z - root_lift: factor = [-root, 1] mod l^r
        root_lift = (-root[0]) % (l**r)
        target = (cx + cy * root_lift) % (l**r)
        return [(l, r, 1, root_lift, target)]
    # inert: componentwise congruence
    return [(l, r, 1, 0, cx), (l, r, 0, 1, cy)]


def _solve_congruences(conditions: list[tuple], height_shells: int = 2):
    """All (x, y) satisfying grouped linear congruences, by per-prime
    enumeration and CRT; yields candidates ordered by lattice shell."""
    from collections import defaultdict

    by_prime: dict[int, list[tuple]] = defaultdict(list)
    for (l, m, al, be, ta) in conditions:
        by_prime[l].append((m, al, be, ta))
    moduli = []
    solution_lists = []
    for l, conds in sorted(by_prime.items()):
        m_max = max(m for m, _, _, _ in conds)
        mod = l**m_max
        sols = []
        for x in range(mod):
            for y in range(mod):
                ok = True
                for (m, al, be, ta) in conds:
                    if (al * x + be * y - ta) % (l**m) != 0:
                        ok = False
                        break
                if ok:
                    sols.append((x, y))
        if not sols:
            return
        moduli.append(mod)
        solution_lists.append(sols)
    total_mod = 1
    for m in moduli:
        total_mod *= m

    def crt_pair(idx_list):
        x, y, mod = 0, 0, 1
        for (m, (sx, sy)) in zip(moduli, idx_list):
            # solve z = cur mod mod, z = s mod m
            inv = pow(mod, -1, m)
            x = x + mod * ((sx - x) * inv % m)
            y = y + mod * ((sy - y) * inv % m)
            mod *= m
        return x % mod, y % mod

    import itertools

    combos = list(itertools.product(*solution_lists))
    seen = []
    for combo in combos:
        x0, y0 = crt_pair(list(combo))
        seen.append((x0, y0))
    for shell in range(height_shells + 1):
        out = []
        for (x0, y0) in seen:
            for dx in range(-shell, shell + 1):
                for dy in range(-shell, shell + 1):
                    if max(abs(dx), abs(dy)) != shell:
                        continue
                    x = x0 - total_mod * ((x0 + total_mod // 2) // total_mod) + dx * total_mod
                    y = y0 - total_mod * ((y0 + total_mod // 2) // total_mod) + dy * total_mod
                    out.append((x, y))
        out.sort(key=lambda t: (max(abs(t[0]), abs(t[1])), t))
        yield from out


def _decode_center(field: CyclotomicField, s: str) -> CycElt:
    return field.decode(s)


def find_flip_center(
    data: ConstructionData,
    cfg: SearchConfig,
    ctrl_places: list[Place],
    image_sets_orig: dict[str, ImageSet],
    nu1: Place,
) -> tuple[CycElt, dict]:
    """A global c* with value != 0 at nu1 and value 0 (split) at every other
    controlled place: the paper's weak-approximation step, by CRT search."""
    p = cfg.p
    field = cfg.field()
    total = data.total_class(p)
    f1 = data.g0

    target_options: dict[str, list[dict]] = {}
    for place in ctrl_places:
        iset = image_sets_orig[place.id]
        opts = []
        for entry in iset.cover:
            if entry.get("kind") != "value" or entry.get("chart") != "t":
                continue
            is_zero = entry["value"] == "0"
            if (place.id == nu1.id) == (not is_zero):
                opts.append(entry)
        opts.sort(key=lambda e: (e["radius_exp"], e["center"]))
        if not opts:
            raise SearchExhausted(f"no t-chart target disk at {place.id}")
        target_options[place.id] = opts[:3]

    import itertools

    option_lists = [[(pl, o) for o in target_options[pl.id]] for pl in ctrl_places]
    for combo in itertools.product(*option_lists):
        conditions = []
        for place, entry in combo:
            center = _decode_center(field, entry["center"])
            conditions.extend(_place_congruence(place, center, entry["radius_exp"]))
        for (x, y) in _solve_congruences(conditions):
            c_star = field.from_rational(x) + field.zeta * y if field.p > 2 else field.from_rational(x)
            if data.f(c_star).is_zero() or data.g0(c_star).is_zero():
                continue
            ok = True
            checks = {}
            for place in ctrl_places:
                try:
                    val = fiber_invariant(total, f1, c_star, place)
                except Exception:
                    ok = False
                    break
                if val is None:
                    ok = False
                    break
                if place.id == nu1.id and val.is_zero:
                    ok = False
                    break
                if place.id != nu1.id and not val.is_zero:
                    ok = False
                    break
                checks[place.id] = val.encode()
            if ok:
                return c_star, {"c_star": c_star.encode(), "values": checks}
    raise SearchExhausted("no flip center satisfied the controlled-place conditions")


# -- Theorem 4.3 data: split places and the pullback search --------------------------------


def find_split_place(a: CycElt, theta_poly: Poly, used_ids: set[str], cfg: SearchConfig) -> Place:
    """First finite place splitting completely in k(a^(1/p), theta)."""
    from .generic_poly import ResidueFieldOps, gp_gcd, gp_sub, gp_pow_mod, gp_trim
    from .localring import residue_or_zero

    p = cfg.p
    field = cfg.field()
    for l in _primes_stream(cfg.prime_scan_bound):
        if l == p or (field.p > 2 and l == field.p):
            continue
        for place in factor_rational_prime(field.p, l):
            if place.id in used_ids:
                continue
            if valuation(a, place) != 0:
                continue
            rf = place.residue_field
            if (rf.q - 1) % p != 0:
                continue
            ok_a, _ = is_pth_power_local(a, place)
            if not ok_a:
                continue
            if theta_poly.degree >= 1:
                if valuation(theta_poly.lc, place) != 0:
                    continue
                if any(
                    not c.is_zero() and valuation(c, place) < 0 for c in theta_poly.coeffs
                ):
                    continue
                ops = ResidueFieldOps(rf)
                mbar = gp_trim(ops, [residue_or_zero(c, place) for c in theta_poly.coeffs])
                if len(mbar) - 1 != theta_poly.degree:
                    continue
                deriv = [rf.mul(mbar[i], rf.make([i])) for i in range(1, len(mbar))]
                if len(gp_gcd(ops, mbar, gp_trim(ops, list(deriv)))) - 1 != 0:
                    continue
                xq = gp_pow_mod(ops, [rf.zero, rf.one], rf.q, mbar)
                diff = gp_sub(ops, xq, [rf.zero, rf.one])
                if gp_trim(ops, diff) and len(gp_gcd(ops, diff, mbar)) - 1 != theta_poly.degree:
                    continue
            return place
    raise SearchExhausted("no completely split place within the scan bound")


def _g_candidates(field: CyclotomicField, tau: CycElt, modulus: int, cfg: SearchConfig):
    """Deterministic stream of pullback candidates g = tau + M*(x^d + lower)."""
    for d in range(2, cfg.g_degree_max + 1):
        for extra in range(cfg.g_modulus_extra + 1):
            m_scaled = modulus ** (1 + extra)
            perturbs = [field.zero] + [
                e for e in small_elements(field, cfg.g_perturbation_height)
            ]
            for e1 in perturbs:
                coeffs = [tau] + [field.zero] * (d - 1) + [field.from_rational(m_scaled)]
                if d >= 2:
                    coeffs[1] = e1 * m_scaled
                yield Poly(field, coeffs)


def find_pullback_g(
    a: CycElt,
    total_flip: FunctionFieldClass,
    f1_flip: Poly,
    ctrl_places: list[Place],
    nu1: Place,
    flip_targets: dict[str, dict],
    cfg: SearchConfig,
):
    """Search for g realizing conditions (1)-(3) on the flipped data, with a
    posteriori verification of every condition via image sets."""
    p = cfg.p
    field = cfg.field()

    conditions = []
    prime_exps: dict[int, int] = {}
    for place in ctrl_places:
        entry = flip_targets[place.id]
        center = _decode_center(field, entry["center"])
        conditions.extend(_place_congruence(place, center, entry["radius_exp"]))
        need = entry["radius_exp"] + (1 if place.is_wild else 0)
        prime_exps[place.l] = max(prime_exps.get(place.l, 0), need)
    modulus = 1
    for l, m in prime_exps.items():
        modulus *= l**m
    solutions = list(_solve_congruences(conditions, height_shells=1))
    if not solutions:
        raise SearchExhausted("no CRT solution for the g constant term")
    x0, y0 = solutions[0]
    tau = field.from_rational(x0) + (field.zeta * y0 if field.p > 2 else field.zero)

    # support hint for the pullback cross-resultants, from the composition
    # identity Res(F(g), G(g)) = lc(g)^(mnd) Res(F, G)^(deg g) together with
    # the content/denominator scalings of the factors involved
    cross_hint: set[int] = {p, field.p}
    flip_factors = [q for q, _ in total_flip.factors]
    for i in range(len(flip_factors)):
        cross_hint |= _full_factor(_norm_int(flip_factors[i].lc))
        for c in flip_factors[i].coeffs:
            if not c.is_zero():
                cross_hint |= _full_factor(c.denominator_lcm())
        for j in range(i + 1, len(flip_factors)):
            cross_hint |= _full_factor(
                _norm_int(poly_resultant(flip_factors[i], flip_factors[j]))
            )
    cross_hint |= _full_factor(_norm_int(total_flip.f.lc))
    cross_hint |= _full_factor(_norm_int(f1_flip.lc))

    from .errors import HeightCapExceeded

    probes = [field.zero, field.one, -field.one, field.from_rational(2)]
    for g in _g_candidates(field, tau, modulus, cfg):
        try:
            result = _verify_g_candidate(
                a, total_flip, f1_flip, g, ctrl_places, nu1, probes, cfg, cross_hint
            )
        except HeightCapExceeded:
            continue
        if result is not None:
            return g, result
    raise SearchExhausted("no pullback polynomial within the configured bounds")


def _verify_g_candidate(
    a: CycElt,
    total_flip: FunctionFieldClass,
    f1_flip: Poly,
    g: Poly,
    ctrl_places: list[Place],
    nu1: Place,
    probes,
    cfg: SearchConfig,
    cross_hint: set[int],
):
    from .errors import DegreeBoundExceeded, SearchExhausted, SubdivisionDepthExceeded
    from .imagesets import ClassBlocks, _factor_memo

    p = cfg.p
    # cheap probe screen at the controlled places
    for place in ctrl_places:
        for t in probes:
            try:
                val = fiber_invariant(total_flip, f1_flip, g(t), place)
            except Exception:
                continue
            if val is None:
                continue
            if place.id == nu1.id and val.is_zero:
                return None
            if place.id != nu1.id and not val.is_zero:
                return None

    # condition (1): factor compositions stay irreducible and a stays a non-power
    f1_flip_mults = {q.encode(): m for q, m in _factor_memo(f1_flip)}
    cond1 = []
    block_list = []
    for (q_i, m_i) in total_flip.factors:
        comp = q_i.compose(g)
        try:
            irred = is_irreducible(comp, cfg.degree_cap)
        except DegreeBoundExceeded:
            return None
        if not irred:
            return None
        is_power, cert = _a_power_in_factor_field(a, comp, p, cfg)
        if is_power:
            return None
        cond1.append(
            {"factor": q_i.encode(), "degree": comp.degree, "a_nonpower_cert": cert}
        )
        from .polynomials import primitive_part

        block_list.append((primitive_part(comp), m_i, f1_flip_mults.get(q_i.encode(), 0)))
    block_list.sort(key=lambda b: (b[0].degree, b[0].encode()))
    blocks = ClassBlocks(block_list)

    total_pb = FunctionFieldClass(
        a, total_flip.f.compose(g), p,
        factors=[(b, m) for (b, m, _) in block_list],
    )
    f1_pb = f1_flip.compose(g)
    # extend the hint with the composition contents and the blocks' extreme
    # coefficients (they control the s-chart resultants of reversed blocks)
    from .polynomials import content_and_denominator

    hint = set(cross_hint)
    try:
        hint |= _full_factor(_norm_int(g.lc))
        num_g, den_g = content_and_denominator(g)
        hint |= _full_factor(num_g) | _full_factor(den_g)
        for (q_i, _) in total_flip.factors:
            comp0 = q_i.compose(g)
            num_c, den_c = content_and_denominator(comp0)
            hint |= _full_factor(num_c) | _full_factor(den_c)
        for (b, _, _) in block_list:
            hint |= _full_factor(_norm_int(b.lc))
            if not b.coeff(0).is_zero():
                hint |= _full_factor(_norm_int(b.coeff(0)))
        places, support_info = bad_place_set(
            a, total_pb.f, f1_pb, p, cfg, blocks=blocks, cross_hint=hint
        )
    except SearchExhausted:
        return None
    support_info["cross_hint"] = sorted(hint)

    image_sets: dict[str, dict] = {}
    witnesses: dict[str, dict] = {}
    for place in places:
        want_zero = place.id != nu1.id
        schema = None
        if place.id not in {pl.id for pl in ctrl_places}:
            schema = good_place_schema_check(a, total_pb.f, f1_pb, p, place, blocks=blocks)
        if schema is not None and want_zero:
            iset = ImageSet(place.id, p, ["0"], [dict(schema, kind="good_place_schema")])
        else:
            try:
                iset = image_set(total_pb, f1_pb, place, ImageSetPolicy(cfg.depth_cap), blocks=blocks)
            except SubdivisionDepthExceeded:
                return None
        image_sets[place.id] = iset.to_dict()
        if iset.caveats:
            return None
        vals = set(iset.values)
        if want_zero and vals != {"0"}:
            return None
        if not want_zero and ("0" in vals or not vals):
            return None
        found = find_value_witness(total_pb, f1_pb, place, want_zero, cfg.witness_tries)
        if found is None:
            return None
        witnesses[place.id] = {"t": found[0], "value": found[1].encode()}
    return {
        "condition1": cond1,
        "total_pullback": total_pb,
        "f1_pullback": f1_pb,
        "blocks": [(b.encode(), m, m1) for (b, m, m1) in block_list],
        "places": places,
        "support_info": support_info,
        "image_sets": image_sets,
        "witnesses": witnesses,
    }


# -- orchestration --------------------------------------------------------------------

LARGE_COLLISION_BOUND = 20


def _large_collision_places(f: Poly, g0: Poly, h: Poly, p: int, cfg: SearchConfig) -> list[Place]:
    """Places over large primes dividing cross-resultants of the factor pairs.

    A nontrivial residue class of a at such a place would put it on the
    nonconstant list and force an expensive congruence on the pullback.
    """
    from .factorization import homogenize_p

    field = f.field
    norms = [_norm_int(poly_resultant(g0, h.monic()))]
    g0_s = homogenize_p(g0, p).dehomogenize_s()
    h_s = homogenize_p(h.monic(), p).dehomogenize_s()
    if g0_s.degree >= 1 and h_s.degree >= 1:
        norms.append(_norm_int(poly_resultant(g0_s.monic(), h_s.monic())))
    primes: set[int] = set()
    for n in norms:
        primes |= _full_factor(n)
    out = []
    for l in sorted(primes):
        if l <= LARGE_COLLISION_BOUND or l == p or (field.p > 2 and l == field.p):
            continue
        out.extend(factor_rational_prime(field.p, l))
    return out


def run_search(cfg: SearchConfig) -> dict:
    """The end-to-end construction: returns a certificate dict with verdict
    OBSTRUCTED, already checked by the independent verifier."""
    from .certificate import assemble_search_certificate, verify_certificate

    p = cfg.p
    field = cfg.field()
    g0 = cfg.g0_poly().monic()
    if g0.degree <= 3:
        raise DegreeTooSmall("deg g0 must exceed 3")
    if not is_irreducible(g0, cfg.degree_cap):
        raise ValueError("g0 must be irreducible over k")

    c, v_star, cert_cv = find_c_and_v(g0, cfg)
    l_elt, h, f = build_h(g0, c, v_star, cfg)
    factors = sorted([(g0, 1), (h.monic(), 1)], key=lambda fm: (fm[0].degree, fm[0].encode()))
    prefer = _large_collision_places(f, g0, h, p, cfg)
    a, cert_a = choose_a(f, factors, v_star, cfg, prefer_power_places=prefer)
    data = ConstructionData(g0, c, v_star, l_elt, h, f, a, {"p": p})

    total = FunctionFieldClass(a, f, p, factors=factors)
    bad0, info0 = bad_place_set(a, f, g0, p, cfg)
    prop42 = verify_prop42(data, cfg, bad0)

    image_sets_orig: dict[str, ImageSet] = {}
    for place in bad0:
        image_sets_orig[place.id] = image_set(total, g0, place, ImageSetPolicy(cfg.depth_cap))
    nu_list = [pl for pl in bad0 if set(image_sets_orig[pl.id].values) != {"0"}]
    if v_star.id not in {pl.id for pl in nu_list}:
        raise PropertyFailed("b", "v_star does not appear in the nonconstant place list")

    ctrl_ids = {pl.id for pl in nu_list}
    for pl in support_places(a):
        ctrl_ids.add(pl.id)
    if field.p > 2:
        ctrl_ids.add(factor_rational_prime(field.p, field.p)[0].id)
    else:
        ctrl_ids.add(factor_rational_prime(2, 2)[0].id)
    ctrl_places = sorted(
        (place_by_id(field.p, pid) for pid in ctrl_ids if pid not in ("real", "complex")),
        key=lambda pl: (pl.l, pl.index),
    )
    for place in ctrl_places:
        if place.id not in image_sets_orig:
            image_sets_orig[place.id] = image_set(total, g0, place, ImageSetPolicy(cfg.depth_cap))

    c_star, cert_cstar = find_flip_center(data, cfg, ctrl_places, image_sets_orig, v_star)

    f_flip = mobius_flip_poly(f, c_star, p)
    f1_flip = mobius_flip_poly(g0, c_star, p)
    total_flip = FunctionFieldClass(a, f_flip, p)

    flip_targets: dict[str, dict] = {}
    for place in ctrl_places:
        iset = image_set(total_flip, f1_flip, place, ImageSetPolicy(cfg.depth_cap))
        want_zero = place.id != v_star.id
        # the g-image may also sit in nonsplit disks: the infinity point of
        # the pullback always contributes the flip-infinity value
        preferred, fallback = None, None
        for entry in iset.cover:
            if entry.get("chart") != "t":
                continue
            if entry.get("kind") == "value" and (entry["value"] == "0") == want_zero:
                preferred = preferred or entry
            elif entry.get("kind") == "nonsplit":
                fallback = fallback or entry
        chosen = preferred or fallback
        if chosen is None:
            raise SearchExhausted(f"no target disk for g at {place.id}")
        flip_targets[place.id] = chosen

    g, gres = find_pullback_g(a, total_flip, f1_flip, ctrl_places, v_star, flip_targets, cfg)

    used = {pl.id for pl in gres["places"]}
    split_places = {}
    for (q_i, _) in total_flip.factors:
        w = find_split_place(a, q_i, used, cfg)
        used.add(w.id)
        split_places[q_i.encode()] = w.id

    cert = assemble_search_certificate(
        cfg=cfg,
        data=data,
        cert_cv=cert_cv,
        cert_a=cert_a,
        prop42=prop42,
        c_star=c_star,
        cert_cstar=cert_cstar,
        f_flip=f_flip,
        f1_flip=f1_flip,
        g=g,
        gres=gres,
        split_places=split_places,
        nu1=v_star,
    )
    ok, reasons = verify_certificate(cert)
    if not ok:
        raise ObstructionNotEstablished("verifier", json.dumps(reasons))
    return cert


def certify_given(a: CycElt, f: Poly, f1: Poly, cfg: SearchConfig) -> dict:
    """Certify an explicitly given class (a, f) with obstruction factor f1."""
    from .certificate import assemble_given_certificate, verify_certificate

    p = cfg.p
    from .imagesets import ClassBlocks

    total = FunctionFieldClass(a, f, p)
    f1_norm = f1
    blocks = ClassBlocks.from_factors(total, f1_norm)
    places, support_info = bad_place_set(a, f, f1_norm, p, cfg, blocks=blocks)
    image_sets: dict[str, dict] = {}
    value_sets: dict[str, set] = {}
    for place in places:
        schema = good_place_schema_check(a, f, f1_norm, p, place, blocks=blocks)
        if schema is not None:
            iset = ImageSet(place.id, p, ["0"], [dict(schema, kind="good_place_schema")])
        else:
            iset = image_set(total, f1_norm, place, ImageSetPolicy(cfg.depth_cap), blocks=blocks)
        if iset.caveats:
            raise ObstructionNotEstablished(place.id, "caveats in the image cover")
        image_sets[place.id] = iset.to_dict()
        value_sets[place.id] = set(iset.values)
    nu_candidates = [pid for pid, vals in value_sets.items() if vals != {"0"}]
    if len(nu_candidates) != 1:
        raise ObstructionNotEstablished(
            ",".join(nu_candidates) or "none",
            "need exactly one place with nontrivial image",
        )
    nu1_id = nu_candidates[0]
    if "0" in value_sets[nu1_id] or not value_sets[nu1_id]:
        raise ObstructionNotEstablished(nu1_id, "image at nu1 must omit 0 and be nonempty")
    witnesses = {}
    for place in places:
        want_zero = place.id != nu1_id
        found = find_value_witness(total, f1_norm, place, want_zero, cfg.witness_tries)
        if found is None:
            raise ObstructionNotEstablished(place.id, "missing local point witness")
        witnesses[place.id] = {"t": found[0], "value": found[1].encode()}
    cert = assemble_given_certificate(
        cfg=cfg,
        a=a,
        f=f,
        f1=f1_norm,
        places=places,
        support_info=support_info,
        image_sets=image_sets,
        witnesses=witnesses,
        nu1_id=nu1_id,
        blocks=blocks,
    )
    ok, reasons = verify_certificate(cert)
    if not ok:
        raise ObstructionNotEstablished("verifier", json.dumps(reasons))
    return cert
