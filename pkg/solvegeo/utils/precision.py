"""
Extended-precision evaluation of the closed-form ratio bound.

Near both ends of (1/sqrt(3), 1) the numerator and the denominator of the
bound vanish together, so it is evaluated with mpmath.
"""

import mpmath

from solvegeo.config.settings import Config


def ratio_bound(x0: float, dps: int = Config.MPMATH_PRECISION) -> float:
    """Closed rational/radical form of the squared-ratio bound; must stay below 1"""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x0)
        x2 = x * x
        r = mpmath.sqrt(4 - 3 * x2)
        quartic_root = mpmath.root(4 - 3 * x2, 4)
        first = 27 * x ** 6 - 36 * x ** 4 - 3 * x2 + 8 * quartic_root + 4
        second = -3 * x2 + r * x + 2
        inner = (-27 * x ** 8 + 72 * x ** 6 - 57 * x ** 4 + 12 * x2 + 6 * r * x
                 - 9 * r * x ** 7 + 18 * r * x ** 5 - 17 * r * x ** 3 + 2)
        value = first ** 2 * second ** 4 / (64 * r * inner ** 2)
        return float(value)
