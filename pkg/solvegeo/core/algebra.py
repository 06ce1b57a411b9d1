"""
Closed-form data of the groups G_alpha.

G_alpha is R^3 with the product
    (x, y, z) * (x', y', z') = (x' e^z + x, y' e^{-alpha z} + y, z' + z)
and the left-invariant metric e^{-2z} dx^2 + e^{2 alpha z} dy^2 + dz^2.
Tangent directions are expressed in the orthonormal frame
X = e^z d/dx, Y = e^{-alpha z} d/dy, Z = d/dz.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from solvegeo.core.errors import DomainError

ALPHA_MIN = -1.0
ALPHA_MAX = 1.0
UNIT_NORM_SLACK = 1e-6


def check_alpha(alpha: float, positive: bool = False) -> float:
    """Validate the family parameter.

    Args:
        alpha: the family parameter
        positive: require alpha in (0, 1] instead of [-1, 1]

    Returns:
        alpha as a float
    """
    alpha = float(alpha)
    if positive:
        if not 0.0 < alpha <= ALPHA_MAX:
            raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    elif not ALPHA_MIN <= alpha <= ALPHA_MAX:
        raise DomainError(f"alpha must lie in [-1, 1], got {alpha}")
    return alpha


@dataclass(frozen=True)
class GroupPoint:
    """A point of G_alpha in exponential coordinates"""
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "GroupPoint":
        return cls(float(values[0]), float(values[1]), float(values[2]))


IDENTITY = GroupPoint(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SphereState:
    """A unit tangent direction (u1, u2, u3) in the frame {X, Y, Z}"""
    u1: float
    u2: float
    u3: float

    def __post_init__(self):
        norm_sq = self.u1 ** 2 + self.u2 ** 2 + self.u3 ** 2
        if abs(norm_sq - 1.0) > 1e-12:
            raise DomainError(f"SphereState must be unit length, |u|^2={norm_sq!r}")

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "SphereState":
        """Normalize a nearly-unit vector; badly scaled input is rejected"""
        v = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(v))
        if not (1.0 - UNIT_NORM_SLACK) <= norm <= (1.0 + UNIT_NORM_SLACK):
            raise DomainError(f"Direction norm {norm} is not within {UNIT_NORM_SLACK} of 1")
        v = v / norm
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @classmethod
    def from_direction(cls, vector: Sequence[float]) -> "SphereState":
        """Direction of an arbitrary nonzero vector"""
        v = np.asarray(vector, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise DomainError("Zero vector has no direction")
        return cls.from_vector(v / norm)

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.u3], dtype=float)


@dataclass(frozen=True)
class CurvatureRow:
    plane: str
    sectional: float
    intrinsic: float
    extrinsic: float
    mean: float


@dataclass(frozen=True)
class CurvatureTable:
    alpha: float
    rows: Tuple[CurvatureRow, ...]

    def row(self, plane: str) -> CurvatureRow:
        for r in self.rows:
            if r.plane == plane:
                return r
        raise KeyError(plane)

    def to_records(self) -> List[Dict[str, float]]:
        return [
            {"plane": r.plane, "sectional": r.sectional, "intrinsic": r.intrinsic,
             "extrinsic": r.extrinsic, "mean": r.mean}
            for r in self.rows
        ]


def _xyz(p) -> Tuple[float, float, float]:
    if isinstance(p, GroupPoint):
        return p.x, p.y, p.z
    return float(p[0]), float(p[1]), float(p[2])


def group_mul(p, q, alpha: float) -> GroupPoint:
    """Group product p * q"""
    px, py, pz = _xyz(p)
    qx, qy, qz = _xyz(q)
    return GroupPoint(qx * math.exp(pz) + px, qy * math.exp(-alpha * pz) + py, qz + pz)


def group_inv(p, alpha: float) -> GroupPoint:
    px, py, pz = _xyz(p)
    return GroupPoint(-px * math.exp(-pz), -py * math.exp(alpha * pz), -pz)


# Levi-Civita connection in the frame: CONNECTION[(A, B)] = nabla_A B as (X, Y, Z) coefficients.
def connection_table(alpha: float) -> Dict[Tuple[str, str], Tuple[float, float, float]]:
    zero = (0.0, 0.0, 0.0)
    return {
        ("X", "X"): (0.0, 0.0, 1.0),
        ("X", "Y"): zero,
        ("X", "Z"): (-1.0, 0.0, 0.0),
        ("Y", "X"): zero,
        ("Y", "Y"): (0.0, 0.0, -alpha),
        ("Y", "Z"): (0.0, alpha, 0.0),
        ("Z", "X"): zero,
        ("Z", "Y"): zero,
        ("Z", "Z"): zero,
    }


def covariant_derivative(u: Sequence[float], v: Sequence[float], alpha: float) -> np.ndarray:
    """nabla_u v for constant-coefficient left-invariant fields u, v"""
    table = connection_table(alpha)
    names = ("X", "Y", "Z")
    out = np.zeros(3)
    for i, a in enumerate(names):
        for j, b in enumerate(names):
            if u[i] and v[j]:
                out += u[i] * v[j] * np.asarray(table[(a, b)])
    return out


def structure_field(s, alpha: float) -> np.ndarray:
    """Sigma_alpha(u) = -nabla_u u, the field whose flowlines develop geodesics.

    Accepts a SphereState or an array whose leading axis holds (u1, u2, u3).
    """
    u = s.as_array() if isinstance(s, SphereState) else np.asarray(s, dtype=float)
    u1, u2, u3 = u[0], u[1], u[2]
    return np.array([u1 * u3, -alpha * u2 * u3, alpha * u2 * u2 - u1 * u1])


def level_value(s, alpha: float) -> float:
    """H(u) = |u1|^alpha u2, constant along flowlines of Sigma_alpha"""
    alpha = check_alpha(alpha, positive=True)
    u = s.as_array() if isinstance(s, SphereState) else np.asarray(s, dtype=float)
    u1 = abs(float(u[0]))
    # continuous extension on the plane u1 = 0
    base = 0.0 if u1 == 0.0 else u1 ** alpha
    return base * float(u[1])


def equilibria(alpha: float) -> List[np.ndarray]:
    """Zeros of Sigma_alpha on the unit sphere (the flat directions need alpha > 0)"""
    points = [np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])]
    if alpha > 0:
        ex, ey = equilibrium_abscissa(alpha), 1.0 / math.sqrt(1.0 + alpha)
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                points.append(np.array([sx * ex, sy * ey, 0.0]))
    return points


def equilibrium_abscissa(alpha: float) -> float:
    """x-coordinate sqrt(alpha/(1+alpha)) of the flat equilibrium in the positive sector"""
    return math.sqrt(alpha / (1.0 + alpha))


def curvature_table(alpha: float) -> CurvatureTable:
    """Sectional, intrinsic, extrinsic and mean curvature of the coordinate planes"""
    alpha = check_alpha(alpha)
    rows = (
        CurvatureRow("XY", alpha, 0.0, -alpha, (1.0 - alpha) / 2.0),
        CurvatureRow("XZ", -1.0, -1.0, 0.0, 0.0),
        CurvatureRow("YZ", -alpha ** 2, -alpha ** 2, 0.0, 0.0),
    )
    return CurvatureTable(alpha, rows)


def scalar_curvature(alpha: float) -> float:
    alpha = check_alpha(alpha)
    return 2.0 * alpha - 2.0 - 2.0 * alpha ** 2
