"""Residue field arithmetic: F_q = F_l[z]/(g) for g an irreducible factor of Phi_p mod l.

Elements are int tuples (coordinates in the z-power basis, lowest first), kept
reduced mod l.  q stays desk-sized, so the p-th power test is plain
exponentiation to (q-1)/p, no discrete logs.
"""

from __future__ import annotations

import random
from functools import lru_cache


# -- F_l[x] helpers (coefficient lists of ints, lowest degree first) ----------


def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def poly_mod_mul(a: list[int], b: list[int], mod: list[int], l: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % l
    return poly_mod_reduce(out, mod, l)


def poly_mod_reduce(a: list[int], mod: list[int], l: int) -> list[int]:
    a = [x % l for x in a]
    d = len(mod) - 1
    inv_lc = pow(mod[-1], -1, l)
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            c = c * inv_lc % l
            for j in range(d + 1):
                a[i - d + j] = (a[i - d + j] - c * mod[j]) % l
    return _trim(a[:d] if len(a) > d else a)


def poly_mod_pow(a: list[int], e: int, mod: list[int], l: int) -> list[int]:
    out = [1]
    base = poly_mod_reduce(list(a), mod, l)
    while e:
        if e & 1:
            out = poly_mod_mul(out, base, mod, l)
        base = poly_mod_mul(base, base, mod, l)
        e >>= 1
    return out


def poly_gcd_fl(a: list[int], b: list[int], l: int) -> list[int]:
    a, b = _trim([x % l for x in a]), _trim([x % l for x in b])
    while b:
        # a mod b
        inv = pow(b[-1], -1, l)
        r = list(a)
        while len(r) >= len(b) and r:
            c = r[-1] * inv % l
            shift = len(r) - len(b)
            for j in range(len(b)):
                r[shift + j] = (r[shift + j] - c * b[j]) % l
            r = _trim(r)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, l)
        a = [x * inv % l for x in a]
    return a


def poly_derivative_fl(a: list[int], l: int) -> list[int]:
    return _trim([a[i] * i % l for i in range(1, len(a))])


def factor_squarefree_equal_degree(f: list[int], d: int, l: int, seed: int) -> list[list[int]]:
    """Cantor-Zassenhaus split of a squarefree product of degree-d irreducibles.

    Deterministic via a seeded generator; l must be odd.
    """
    f = _trim([x % l for x in f])
    n = len(f) - 1
    if n == d:
        inv = pow(f[-1], -1, l)
        return [[x * inv % l for x in f]]
    rng = random.Random(seed)
    while True:
        r = [rng.randrange(l) for _ in range(n)]
        r = _trim(r)
        if len(r) < 2 and (not r or d > 1):
            continue
        h = poly_mod_pow(r, (l**d - 1) // 2, f, l)
        h = list(h)
        if h:
            h[0] = (h[0] - 1) % l
        g = poly_gcd_fl(h, f, l)
        if 0 < len(g) - 1 < n:
            lhs = factor_squarefree_equal_degree(g, d, l, seed + 1)
            cof = _exact_div_fl(f, g, l)
            rhs = factor_squarefree_equal_degree(cof, d, l, seed + 2)
            return lhs + rhs


def _exact_div_fl(a: list[int], b: list[int], l: int) -> list[int]:
    q = [0] * (len(a) - len(b) + 1)
    r = list(a)
    inv = pow(b[-1], -1, l)
    while len(r) >= len(b) and _trim(list(r)):
        r = _trim(r)
        if len(r) < len(b):
            break
        c = r[-1] * inv % l
        shift = len(r) - len(b)
        q[shift] = c
        for j in range(len(b)):
            r[shift + j] = (r[shift + j] - c * b[j]) % l
    return _trim(q)


def multiplicative_order(a: int, n: int) -> int:
    """Order of a modulo n (a coprime to n); brute force, n is tiny here."""
    x = a % n
    for k in range(1, n + 1):
        if x == 1:
            return k
        x = x * a % n
    raise ValueError(f"{a} not invertible mod {n}")


@lru_cache(maxsize=None)
def cyclotomic_factors_mod(p: int, l: int) -> tuple[tuple[int, ...], ...]:
    """Monic irreducible factors of Phi_p modulo l (l != p), sorted.

    All factors share the degree d = ord_l in (Z/p)^x; sorted lexicographically
    on coefficient tuples so downstream place indexing is deterministic.
    """
    if p == 2:
        return ((1, 1),)  # x + 1
    if l == p:
        raise ValueError("Phi_p mod p is (x-1)^(p-1); handled by the ramified place")
    d = multiplicative_order(l, p)
    phi = [1] * p
    if d == 1:
        # roots of Phi_p = the nontrivial p-th roots of unity in F_l,
        # obtained from h^((l-1)/p) for a deterministic seeded h
        rng = random.Random(0xBADA55 + 7 * l + p)
        g0 = 1
        while g0 == 1:
            h = rng.randrange(2, l)
            g0 = pow(h, (l - 1) // p, l)
        roots = sorted(pow(g0, j, l) for j in range(1, p))
        assert len(set(roots)) == p - 1
        return tuple((((-r) % l), 1) for r in roots)
    factors = factor_squarefree_equal_degree(phi, d, l, seed=0xC0FFEE + 31 * l + p)
    return tuple(sorted(tuple(f) for f in factors))


class ResidueField:
    """F_q presented as F_l[z]/(g), with q = l^deg(g)."""

    def __init__(self, l: int, modulus: tuple[int, ...]):
        self.l = l
        self.modulus = list(modulus)
        self.deg = len(modulus) - 1
        self.q = l**self.deg

    def __repr__(self) -> str:
        return f"F_{self.q}"

    # elements are tuples of ints, length <= deg, trimmed

    def make(self, coords) -> tuple[int, ...]:
        return tuple(_trim(poly_mod_reduce([int(c) for c in coords], self.modulus, self.l)))

    @property
    def zero(self) -> tuple[int, ...]:
        return ()

    @property
    def one(self) -> tuple[int, ...]:
        return (1,)

    def add(self, a, b):
        n = max(len(a), len(b))
        out = [0] * n
        for i, x in enumerate(a):
            out[i] = x
        for i, y in enumerate(b):
            out[i] = (out[i] + y) % self.l
        return tuple(_trim(out))

    def neg(self, a):
        return tuple((-x) % self.l for x in a) if a else ()

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        return tuple(poly_mod_mul(list(a), list(b), self.modulus, self.l))

    def pow(self, a, e: int):
        if not a:
            if e == 0:
                return (1,)
            return ()
        if e < 0:
            return self.pow(self.inv(a), -e)
        return tuple(poly_mod_pow(list(a), e, self.modulus, self.l))

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero in residue field")
        return self.pow(a, self.q - 2)

    def element_index(self, a) -> int:
        """Pack coordinates base-l into an integer in [0, q)."""
        out = 0
        for i in reversed(range(self.deg)):
            out = out * self.l + (a[i] if i < len(a) else 0)
        return out

    def all_elements(self):
        for idx in range(self.q):
            coords = []
            v = idx
            for _ in range(self.deg):
                coords.append(v % self.l)
                v //= self.l
            yield tuple(_trim(coords))

    def pth_power_index(self, a, p: int, zeta_bar) -> int:
        """The unique i in Z/p with a^((q-1)/p) = zeta_bar^i.

        Requires q = 1 mod p and zeta_bar of exact order p (the reduction of
        the global zeta); a must be nonzero.
        """
        assert (self.q - 1) % p == 0
        t = self.pow(a, (self.q - 1) // p)
        acc = self.one
        for i in range(p):
            if t == acc:
                return i
            acc = self.mul(acc, zeta_bar)
        raise AssertionError("pth-power map landed outside mu_p")

    def is_pth_power(self, a, p: int) -> bool:
        if not a:
            return True
        if (self.q - 1) % p != 0:
            # raising to p is a bijection on F_q^x
            return True
        return self.pow(a, (self.q - 1) // p) == self.one
