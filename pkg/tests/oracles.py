"""Frozen reference values for the subleading coefficients.

These are never regenerated from the code under test.  Entries are sympy
expressions in ``n`` (number of insertions) and ``p0, p1, p2`` (multiplicities).
"""

from fractions import Fraction

import sympy

n, p0, p1, p2 = sympy.symbols("n p0 p1 p2")
R = sympy.Rational


def ff(x, k):
    out = sympy.Integer(1)
    for j in range(k):
        out *= x - j
    return out


# P_{k,n}: coefficient of m_nu (squared variables), keyed by stripped partition
P_TABLE = {
    0: {(): sympy.Integer(1)},
    1: {
        (): -(17 - 15 * n + 3 * n**2) / R(12),
        (1,): -(3 - n) / R(2),
        (1, 1): -R(1, 2),
    },
    2: {
        (): (1225 - 1632 * n + 741 * n**2 - 138 * n**3 + 9 * n**4) / R(288),
        (1,): (105 - 98 * n + 30 * n**2 - 3 * n**3) / R(24),
        (2,): 3 * (10 - 7 * n + n**2) / R(8),
        (1, 1): (59 - 51 * n + 9 * n**2) / R(24),
        (3,): R(5, 8),
        (2, 1): 3 * (4 - n) / R(4),
        (1, 1, 1): (7 - 3 * n) / R(4),
        (2, 1, 1): R(3, 4),
        (1, 1, 1, 1): R(3, 4),
    },
}

# Q_{k,n} for the Theta family (reference values, unverified entries kept verbatim)
Q_TABLE = {
    0: {(): sympy.Integer(1)},
    1: {(): -R(1, 4)},
    2: {(): (9 - 4 * n) / R(8), (1,): R(1, 8)},
    3: {
        (): -(57 - 44 * n + 8 * n**2) / R(128),
        (1,): -(13 - 4 * n) / R(32),
        (1, 1): -R(1, 8),
    },
}

ALPHA_TABLE = {
    0: sympy.Integer(1),
    1: -(17 - 15 * n + 3 * n**2) / R(12) - (3 - n) * (n - p0) / R(2) - ff(n - p0, 2) / R(4),
    2: (1225 - 1632 * n + 741 * n**2 - 138 * n**3 + 9 * n**4) / R(288)
    + (105 - 98 * n + 30 * n**2 - 3 * n**3) * (n - p0) / R(24)
    + 3 * (10 - 7 * n + n**2) * (n - p0 - p1) / R(8)
    + (59 - 51 * n + 9 * n**2) * ff(n - p0, 2) / R(48)
    + 5 * (n - p0 - p1 - p2) / R(8)
    + 3 * (4 - n) * (n - p0 - 1) * (n - p0 - p1) / R(4)
    + (7 - 3 * n) * ff(n - p0, 3) / R(24)
    + 3 * ff(n - p0 - 1, 2) * (n - p0 - p1) / R(48)
    + 3 * ff(n - p0, 4) / R(96),
}

BETA_TABLE = {
    0: sympy.Integer(1),
    1: -R(1, 4),
    2: (9 - 4 * n) / R(8) + (n - p0) / R(8),
    3: -(57 - 44 * n + 8 * n**2) / R(128) - (13 - 4 * n) * (n - p0) / R(32) - ff(n - p0, 2) / R(16),
}

# two-point values: (k, d_1) -> alpha_k at n = 2 with d = (d_1, large)
TWO_POINT_ALPHA = {
    (1, 0): Fraction(-5, 12),
    (1, 1): Fraction(-17, 12),
    (2, 0): Fraction(205, 288),
    (2, 1): Fraction(613, 288),
    (2, 2): Fraction(1045, 288),
    (2, 3): Fraction(1225, 288),
}

ONE_POINT_PSI = {1: Fraction(1, 24), 4: Fraction(1, 1152), 7: Fraction(1, 82944)}
W_G1 = {1: Fraction(-1, 32), 2: Fraction(-105, 2048), 3: Fraction(-25025, 65536)}
