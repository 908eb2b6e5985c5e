"""Brute-force reference implementations over explicit Python lists.

These follow the definitions literally and share no code with the package.
"""

from fractions import Fraction


def into_list(b, a):
    """{a_{b_0} < a_{b_1} < ...} for sorted lists a, b (finite prefixes)."""
    return [a[i] for i in b if i < len(a)]


def within_list(b, a):
    bs = set(b)
    return [n for n, x in enumerate(a) if x in bs]


def join_list(a, b, n):
    return sorted([2 * x for x in a if 2 * x < n] + [2 * x + 1 for x in b if 2 * x + 1 < n])


def distinct_factorials_below(n):
    out, k, f = [], 1, 1
    while f < n:
        if not out or out[-1] != f:
            out.append(f)
        k += 1
        f *= k
    return out


def long_division_bits(p, q, k):
    """First k binary digits of p/q by schoolbook long division."""
    bits = []
    for _ in range(k):
        p *= 2
        if p >= q:
            bits.append(1)
            p -= q
        else:
            bits.append(0)
    return bits


def density(members, n):
    return Fraction(sum(1 for x in members if x < n), n)
