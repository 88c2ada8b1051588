"""Independent reference computations used by several test modules."""

import itertools
from fractions import Fraction


def ip_success_by_enumeration(p, n):
    """P(protocol output is right) with n independent boxes each failing w.p. 1-p.

    Enumerates every failure pattern; the output is right iff an even number fail.
    """
    p = Fraction(p)
    total = Fraction(0)
    for pattern in itertools.product((0, 1), repeat=n):
        k = sum(pattern)
        if k % 2 == 0:
            total += (1 - p) ** k * p ** (n - k)
    return total


def inner_product(x, y):
    return sum(a & b for a, b in zip(x, y)) % 2
