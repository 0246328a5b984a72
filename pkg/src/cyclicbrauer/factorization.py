"""Exact factorization and irreducibility over k, p-th roots, homogenization.

Over Q the heavy lifting is sympy's exact factor_list; over k = Q(zeta_p) we
run Trager's method: shift so the conjugate-product norm is squarefree, factor
the norm over Q, pull factors back with gcds over k.  A cheap mod-l
irreducibility certificate short-circuits the common case in search loops.
"""

from __future__ import annotations

from fractions import Fraction

from .cyclotomic import CycElt, CyclotomicField
from .errors import DegreeBoundExceeded, ZeroPolynomial
from .finitefield import poly_gcd_fl, poly_mod_pow, _trim
from .polynomials import Poly, poly_gcd, squarefree_part

DEFAULT_DEGREE_CAP = 24


# -- sympy bridge (rational coefficients only) ---------------------------------


def _to_sympy(coeffs: list[Fraction]):
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(coeffs))
    return sympy.Poly(expr, x, domain="QQ")


def _from_sympy(field: CyclotomicField, spoly) -> Poly:
    coeffs = list(reversed(spoly.all_coeffs()))
    return Poly(field, [Fraction(c.p, c.q) for c in coeffs])


def factor_rational_poly(f: Poly) -> list[tuple[Poly, int]]:
    """Irreducible monic factors over Q with multiplicities (f has coeffs in Q)."""
    rat = []
    for c in f.coeffs:
        rat.append(c.rational_value())
    _, factors = _to_sympy(rat).factor_list()
    out = []
    for sp, mult in factors:
        g = _from_sympy(f.field, sp).monic()
        if g.degree >= 1:
            out.append((g, int(mult)))
    out.sort(key=_factor_sort_key)
    return out


def _factor_sort_key(fm):
    g, m = fm
    return (g.degree, [tuple(c.coords) for c in g.coeffs], m)


# -- norms of polynomials over the cyclotomic field ------------------------------


def conjugate_poly(f: Poly, j: int) -> Poly:
    return f.map_coeffs(lambda c: c.conjugate(j))


def norm_poly(f: Poly) -> Poly:
    """prod_sigma sigma(f): a polynomial with rational coefficients."""
    field = f.field
    if field.p == 2:
        return f
    out = Poly(field, [1])
    for j in range(1, field.p):
        out = out * conjugate_poly(f, j)
    for c in out.coeffs:
        if not c.is_rational():
            raise AssertionError("norm polynomial must have rational coefficients")
    return out


# -- mod-l irreducibility certificate --------------------------------------------


def _sub_x(poly: list[int], l: int) -> list[int]:
    """poly - x mod l."""
    out = list(poly) + [0] * max(0, 2 - len(poly))
    out[1] = (out[1] - 1) % l
    return _trim(out)


def _is_irreducible_mod_l(coeffs: list[int], l: int) -> bool:
    """Exact irreducibility of an integer polynomial modulo l.

    Standard criterion: x^(l^n) = x mod f and gcd(x^(l^(n/t)) - x, f) = 1 for
    every prime t dividing n = deg f.
    """
    import sympy

    f = _trim([c % l for c in coeffs])
    n = len(f) - 1
    if n <= 0:
        return False
    inv = pow(f[-1], -1, l)
    f = [c * inv % l for c in f]
    if _sub_x(poly_mod_pow([0, 1], l**n, f, l), l):
        return False
    for t in set(sympy.primefactors(n)):
        diff = _sub_x(poly_mod_pow([0, 1], l ** (n // t), f, l), l)
        if not diff:
            return False  # f divides x^(l^(n/t)) - x, so all factors are small
        if len(poly_gcd_fl(diff, f, l)) - 1 != 0:
            return False
    return True


def _integer_coeff_vector(f: Poly) -> list[int] | None:
    """Integer coefficient list if every coefficient is a rational integer-able."""
    out = []
    scale = 1
    for c in f.coeffs:
        if not c.is_rational():
            return None
        scale = scale * c.rational_value().denominator
    for c in f.coeffs:
        v = c.rational_value() * scale
        out.append(int(v))
    return out


def _mod_l_certificate(f: Poly) -> bool:
    """True if some small l certifies irreducibility of f (rational coeffs)."""
    ints = _integer_coeff_vector(f)
    if ints is None or len(ints) < 3:
        return False
    lc = ints[-1]
    for l in (3, 5, 7, 11, 13, 17, 19, 23):
        if lc % l == 0:
            continue
        if _is_irreducible_mod_l(ints, l):
            return True
    return False


# -- factorization over k ----------------------------------------------------------


def factor_poly(f: Poly) -> list[tuple[Poly, int]]:
    """Monic irreducible factors of f over k with multiplicities."""
    if f.is_zero():
        raise ZeroPolynomial("factor of zero")
    if f.degree == 0:
        return []
    field = f.field
    if field.p == 2:
        return factor_rational_poly(f)
    radical = squarefree_part(f)
    rad_factors = _factor_squarefree_cyclotomic(radical)
    out = []
    for g in rad_factors:
        mult = 0
        rem = f
        while True:
            q, r = rem.divmod(g)
            if not r.is_zero():
                break
            mult += 1
            rem = q
        out.append((g, mult))
    out.sort(key=_factor_sort_key)
    return out


def _factor_squarefree_cyclotomic(f: Poly) -> list[Poly]:
    """Trager factorization of a squarefree polynomial over Q(zeta_p)."""
    field = f.field
    f = f.monic()
    if f.degree == 1:
        return [f]
    zeta = field.zeta
    for s in _shift_stream():
        shifted = f.shift(zeta * (-s)) if s else f  # g(u) = f(u - s*zeta)
        nrm = norm_poly(shifted)
        # squarefree norm?
        if poly_gcd(nrm, nrm.derivative()).degree == 0:
            q_factors = factor_rational_poly(nrm)
            out = []
            for (nf, mult) in q_factors:
                assert mult == 1
                g = poly_gcd(shifted, nf)
                if g.degree >= 1:
                    out.append(g.shift(zeta * s).monic() if s else g.monic())
            assert sum(g.degree for g in out) == f.degree, "Trager factors must cover f"
            return out
    raise AssertionError("no squarefree shift found")


def _shift_stream():
    yield 0
    s = 1
    while s < 64:
        yield s
        yield -s
        s += 1


def is_irreducible(f: Poly, degree_cap: int = DEFAULT_DEGREE_CAP) -> bool:
    """Exact irreducibility of f over k; never probabilistic.

    Degree-1 polynomials are irreducible; non-squarefree ones of higher degree
    are not.  A mod-l certificate (on f over Q, or on a squarefree norm over
    Q(zeta_p)) settles most inputs cheaply, otherwise exact factorization
    decides.
    """
    if f.degree < 1:
        raise ZeroPolynomial("irreducibility of a constant")
    if f.degree > degree_cap:
        raise DegreeBoundExceeded(f"deg {f.degree} > cap {degree_cap}")
    if f.degree == 1:
        return True
    if poly_gcd(f, f.derivative()).degree > 0:
        return False
    field = f.field
    if field.p == 2:
        if _mod_l_certificate(f):
            return True
        return len(factor_rational_poly(f)) == 1
    # cyclotomic field: an irreducible norm certifies irreducibility
    nrm = norm_poly(f)
    if poly_gcd(nrm, nrm.derivative()).degree == 0 and _mod_l_certificate(nrm):
        return True
    return len(_factor_squarefree_cyclotomic(f.monic())) == 1


# -- p-th powers in k ------------------------------------------------------------


def _integer_nth_root(n: int, p: int) -> int | None:
    if n == 0:
        return 0
    neg = n < 0
    if neg and p % 2 == 0:
        return None
    m = -n if neg else n
    r = round(m ** (1.0 / p))
    for cand in (r - 1, r, r + 1, r + 2):
        if cand >= 0 and cand**p == m:
            return -cand if neg else cand
    # float guess can be off for big ints; fall back to bisection
    lo, hi = 0, 1 << ((m.bit_length() + p - 1) // p + 1)
    while lo <= hi:
        mid = (lo + hi) // 2
        t = mid**p
        if t == m:
            return -mid if neg else mid
        if t < m:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


def rational_pth_root(x: Fraction, p: int) -> Fraction | None:
    num = _integer_nth_root(x.numerator, p)
    den = _integer_nth_root(x.denominator, p)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def exact_pth_root_in_k(x: CycElt, p: int) -> CycElt | None:
    """y with y^p = x in k, or None; exact via factoring T^p - x."""
    if x.is_zero():
        raise ValueError("p-th root of zero")
    field = x.field
    if x.is_rational():
        r = rational_pth_root(x.rational_value(), p)
        if r is not None:
            return field.from_rational(r)
        # No rational p-th root: none in k either.  For p = 2 that is k = Q;
        # for odd p, a root would give [k(x^(1/p)) : k] dividing p - 1 while
        # T^p - x is irreducible over Q of degree p coprime to p - 1.
        return None
    kt = Poly(field, [-x] + [0] * (p - 1) + [1])  # T^p - x
    for g in _factor_squarefree_cyclotomic(kt):
        if g.degree == 1:
            root = -(g.coeff(0) / g.coeff(1))
            assert root**p == x
            return root
    return None


def is_pth_power_free(f: Poly, p: int) -> bool:
    """No irreducible factor with multiplicity >= p (iterated gcd test)."""
    if f.is_zero():
        raise ZeroPolynomial("p-th-power-free test on zero")
    g = f
    for _ in range(p - 1):
        if g.degree == 0:
            return True
        g = poly_gcd(g, g.derivative())
    return g.degree == 0


# -- homogenization ----------------------------------------------------------------


class HomogeneousForm:
    """F(u0, u1) of degree p*ceil(deg f / p) with F(u, 1) = f(u)."""

    def __init__(self, f: Poly, p: int):
        if f.is_zero():
            raise ZeroPolynomial("homogenization of zero")
        self.p = p
        self.f = f
        self.degree = p * ((f.degree + p - 1) // p) if f.degree > 0 else 0
        if f.degree == 0:
            self.degree = 0
        self.table = {}
        for i in range(f.degree + 1):
            c = f.coeff(i)
            if not c.is_zero():
                self.table[(i, self.degree - i)] = c
        self.infinity_in_locus = self.degree > f.degree

    def dehomogenize_t(self) -> Poly:
        """F(u, 1) = f(u)."""
        coeffs = [self.f.field.zero] * (self.degree + 1)
        for (i, _), c in self.table.items():
            coeffs[i] = c
        return Poly(self.f.field, coeffs[: self.f.degree + 1])

    def dehomogenize_s(self) -> Poly:
        """F(1, s): the class in the coordinate-flipped chart s = 1/t."""
        coeffs = [self.f.field.zero] * (self.degree + 1)
        for (_, j), c in self.table.items():
            coeffs[j] = c
        return Poly(self.f.field, coeffs)


def homogenize_p(f: Poly, p: int) -> HomogeneousForm:
    if f.is_zero():
        raise ZeroPolynomial("homogenization of zero")
    return HomogeneousForm(f, p)
