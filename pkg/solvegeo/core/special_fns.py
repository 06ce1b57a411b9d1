"""
Complete elliptic integrals and the Jacobi dn function.

All functions use the parameter m (the square of the modulus), the
convention of Mathematica's EllipticK / EllipticE / JacobiDN.
"""

import math
from typing import List, Tuple

from solvegeo.core.errors import DomainError

AGM_TOL = 4e-16
AGM_MAX_ITER = 64
M_UPPER_GUARD = 1.0 - 1e-12


def _agm_sequence(m: float) -> Tuple[List[float], List[float], List[float]]:
    """Arithmetic-geometric mean sequences started at (1, sqrt(1-m)).

    c holds c_n^2 with c_0^2 = m, so negative m is handled without
    complex arithmetic.
    """
    a, b = 1.0, math.sqrt(1.0 - m)
    a_seq, b_seq, c_sq = [a], [b], [m]
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) <= AGM_TOL * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        b_seq.append(b)
        c_sq.append(c * c)
    return a_seq, b_seq, c_sq


def agm(a: float, b: float) -> float:
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) <= AGM_TOL * max(a, b):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def ellip_K(m: float) -> float:
    """Complete elliptic integral of the first kind K(m), m < 1"""
    m = float(m)
    if not m < M_UPPER_GUARD:
        raise DomainError(f"K(m) requires m < 1, got {m}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - m)))


def ellip_E(m: float) -> float:
    """Complete elliptic integral of the second kind E(m), m <= 1"""
    m = float(m)
    if m > 1.0:
        raise DomainError(f"E(m) requires m <= 1, got {m}")
    if m == 1.0:
        return 1.0
    if m >= M_UPPER_GUARD:
        # E is continuous at m = 1; first-order expansion in m1 = 1 - m
        m1 = 1.0 - m
        return 1.0 + 0.5 * m1 * (math.log(4.0 / math.sqrt(m1)) - 0.5)
    a_seq, _, c_sq = _agm_sequence(m)
    total = sum(2.0 ** (n - 1) * c2 for n, c2 in enumerate(c_sq))
    return math.pi / (2.0 * a_seq[-1]) * (1.0 - total)


def ellip_K_derivative(m: float) -> float:
    """dK/dm, with a series guard near m = 0 where the closed form cancels"""
    m = float(m)
    if abs(m) < 1e-3:
        return 0.5 * math.pi * (0.25 + 9.0 * m / 32.0 + 75.0 * m ** 2 / 256.0 + 1225.0 * m ** 3 / 4096.0)
    return (ellip_E(m) - (1.0 - m) * ellip_K(m)) / (2.0 * m * (1.0 - m))


def _dn_nonnegative(u: float, m: float) -> float:
    # descending Landen: phi_N = 2^N a_N u, then recur backwards
    if m == 0.0:
        return 1.0
    a_seq, _, c_sq = _agm_sequence(m)
    n = len(a_seq) - 1
    phi = 2.0 ** n * a_seq[n] * u
    for k in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(math.sqrt(c_sq[k]) / a_seq[k] * math.sin(phi)))
    sn = math.sin(phi)
    return math.sqrt(1.0 - m * sn * sn)


def jacobi_dn(u: float, m: float) -> float:
    """Jacobi dn(u | m).

    Accepts m in [0, 1) directly and m < 0 through the imaginary-modulus
    transformation dn(u|m) = 1 / dn(u sqrt(1-m) | -m/(1-m)).
    """
    u, m = float(u), float(m)
    if not m < 1.0:
        raise DomainError(f"dn(u, m) requires m < 1, got {m}")
    if m >= 0.0:
        return _dn_nonnegative(u, m)
    scale = math.sqrt(1.0 - m)
    return 1.0 / _dn_nonnegative(u * scale, -m / (1.0 - m))


def imaginary_modulus_K(m_neg: float) -> float:
    """K(m) for m < 0 via K(m) = K(m/(m-1)) / sqrt(1-m)"""
    m_neg = float(m_neg)
    if not m_neg < 0.0:
        raise DomainError(f"imaginary-modulus path requires m < 0, got {m_neg}")
    return ellip_K(m_neg / (m_neg - 1.0)) / math.sqrt(1.0 - m_neg)


def K_bounds(r: float) -> Tuple[float, float]:
    """Elementary bounds (pi/2) sqrt(artanh r / r) < K(r^2) < (pi/2) artanh r / r"""
    r = float(r)
    if not 0.0 < r < 1.0:
        raise DomainError(f"K_bounds requires 0 < r < 1, got {r}")
    ratio = math.atanh(r) / r
    return 0.5 * math.pi * math.sqrt(ratio), 0.5 * math.pi * ratio


def legendre_residual(m: float) -> float:
    """E(m)K(1-m) + E(1-m)K(m) - K(m)K(1-m) - pi/2"""
    k, e = ellip_K(m), ellip_E(m)
    k1, e1 = ellip_K(1.0 - m), ellip_E(1.0 - m)
    return e * k1 + e1 * k - k * k1 - 0.5 * math.pi
