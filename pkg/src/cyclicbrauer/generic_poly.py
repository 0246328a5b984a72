"""Polynomial helpers over an abstract field given by an ops adapter.

Used for F_q[x] (residue-field coefficients) and K[T] (relative-extension
coefficients), where the dedicated Poly class does not apply.  Coefficient
lists are lowest degree first and trimmed.
"""

from __future__ import annotations


class FieldOps:
    """Adapter protocol: zero/one properties and add/sub/mul/inv/is_zero/eq."""

    zero = None
    one = None

    def add(self, a, b):  # pragma: no cover - interface
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def eq(self, a, b) -> bool:
        raise NotImplementedError


def gp_trim(ops, c: list) -> list:
    while c and ops.is_zero(c[-1]):
        c.pop()
    return c


def gp_add(ops, a, b):
    out = list(a) + [ops.zero] * max(0, len(b) - len(a))
    for i, y in enumerate(b):
        out[i] = ops.add(out[i], y)
    return gp_trim(ops, out)


def gp_sub(ops, a, b):
    out = list(a) + [ops.zero] * max(0, len(b) - len(a))
    for i, y in enumerate(b):
        out[i] = ops.sub(out[i], y)
    return gp_trim(ops, out)


def gp_mul(ops, a, b):
    if not a or not b:
        return []
    out = [ops.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if ops.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = ops.add(out[i + j], ops.mul(x, y))
    return gp_trim(ops, out)


def gp_scale(ops, a, c):
    return gp_trim(ops, [ops.mul(x, c) for x in a])


def gp_divmod(ops, a, b):
    if not b:
        raise ZeroDivisionError("generic poly division by zero")
    q = [ops.zero] * max(1, len(a) - len(b) + 1)
    r = list(a)
    inv_lc = ops.inv(b[-1])
    while r and len(r) >= len(b):
        r = gp_trim(ops, r)
        if len(r) < len(b) or not r:
            break
        c = ops.mul(r[-1], inv_lc)
        shift = len(r) - len(b)
        q[shift] = c
        for j, y in enumerate(b):
            r[shift + j] = ops.sub(r[shift + j], ops.mul(c, y))
        r = gp_trim(ops, r)
    return gp_trim(ops, q), r


def gp_gcd(ops, a, b):
    a, b = gp_trim(ops, list(a)), gp_trim(ops, list(b))
    while b:
        a, b = b, gp_divmod(ops, a, b)[1]
    if a:
        a = gp_scale(ops, a, ops.inv(a[-1]))
    return a


def gp_eval(ops, a, x):
    out = ops.zero
    for c in reversed(a):
        out = ops.add(ops.mul(out, x), c)
    return out


def gp_pow_mod(ops, a, e: int, mod):
    out = [ops.one]
    base = gp_divmod(ops, list(a), mod)[1]
    while e:
        if e & 1:
            out = gp_divmod(ops, gp_mul(ops, out, base), mod)[1]
        base = gp_divmod(ops, gp_mul(ops, base, base), mod)[1]
        e >>= 1
    return out


class ResidueFieldOps(FieldOps):
    def __init__(self, rf):
        self.rf = rf
        self.zero = rf.zero
        self.one = rf.one

    def add(self, a, b):
        return self.rf.add(a, b)

    def sub(self, a, b):
        return self.rf.sub(a, b)

    def mul(self, a, b):
        return self.rf.mul(a, b)

    def inv(self, a):
        return self.rf.inv(a)

    def is_zero(self, a):
        return a == self.rf.zero

    def eq(self, a, b):
        return a == b


def gp_distinct_roots(ops_rf, poly, seed: int) -> list:
    """All roots in F_q of a polynomial over F_q (each root once).

    Splits gcd(x^q - x, f) with seeded Cantor-Zassenhaus; q odd.
    """
    import random

    rf = ops_rf.rf
    f = gp_trim(ops_rf, list(poly))
    if not f:
        raise ValueError("zero polynomial")
    xq = gp_pow_mod(ops_rf, [rf.zero, rf.one], rf.q, f)
    lin = gp_gcd(ops_rf, gp_sub(ops_rf, xq, [rf.zero, rf.one]), f)
    roots = []
    rng = random.Random(seed)

    def split(g):
        if len(g) - 1 == 0:
            return
        if len(g) - 1 == 1:
            # monic x + c -> root -c
            roots.append(rf.neg(g[0]))
            return
        while True:
            shift = rf.make([rng.randrange(rf.l) for _ in range(rf.deg)])
            probe = [shift, rf.one]  # x + shift
            h = gp_pow_mod(ops_rf, probe, (rf.q - 1) // 2, g)
            h = gp_sub(ops_rf, h, [rf.one])
            d = gp_gcd(ops_rf, h, g)
            if 0 < len(d) - 1 < len(g) - 1:
                split(d)
                split(gp_divmod(ops_rf, g, d)[0])
                return

    split(lin)
    return roots
