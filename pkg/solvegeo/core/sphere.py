"""
Geodesic spheres: a latitude-longitude direction grid pushed through the
exponential map at a fixed radius, and Wavefront OBJ export.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from solvegeo.config.settings import Config
from solvegeo.core.algebra import check_alpha
from solvegeo.core.errors import DomainError, IntegratorError
from solvegeo.core.flow import DEFAULT_CONFIG, IntegratorConfig, exp_map, exp_map_batch
from solvegeo.utils.parallel import sweep

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirectionGrid:
    """Latitude-longitude directions.

    Vertex 0 is the north pole (0, 0, 1), the last vertex the south pole.
    Ring i (1 <= i < n_theta) sits at polar angle i pi / n_theta and holds
    n_phi directions at azimuths 2 pi j / n_phi.
    """
    n_theta: int
    n_phi: int
    directions: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def build(cls, n_theta: int, n_phi: int) -> "DirectionGrid":
        if n_theta < 2 or n_phi < 4 or n_phi % 2:
            raise DomainError(f"Grid needs n_theta >= 2 and an even n_phi >= 4, got {n_theta}x{n_phi}")
        theta = math.pi * np.arange(1, n_theta) / n_theta
        phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
        sin_t, cos_t = np.sin(theta)[:, None], np.cos(theta)[:, None]
        ring = np.stack([
            sin_t * np.cos(phi)[None, :],
            sin_t * np.sin(phi)[None, :],
            np.broadcast_to(cos_t, (n_theta - 1, n_phi)),
        ], axis=-1).reshape(-1, 3)
        directions = np.vstack([[0.0, 0.0, 1.0], ring, [0.0, 0.0, -1.0]])
        return cls(n_theta, n_phi, directions)

    @property
    def resolution(self) -> Tuple[int, int]:
        return self.n_theta, self.n_phi

    @property
    def size(self) -> int:
        return (self.n_theta - 1) * self.n_phi + 2

    def index(self, ring: int, j: int) -> int:
        return 1 + (ring - 1) * self.n_phi + j % self.n_phi

    @property
    def south(self) -> int:
        return self.size - 1

    def faces(self) -> List[Tuple[int, ...]]:
        """Triangles at the poles, quads between rings, all counter-clockwise seen from outside"""
        n = self.n_phi
        faces: List[Tuple[int, ...]] = []
        for j in range(n):
            faces.append((0, self.index(1, j), self.index(1, j + 1)))
        for ring in range(1, self.n_theta - 1):
            for j in range(n):
                faces.append((self.index(ring, j), self.index(ring + 1, j),
                              self.index(ring + 1, j + 1), self.index(ring, j + 1)))
        last = self.n_theta - 1
        for j in range(n):
            faces.append((self.index(last, j), self.south, self.index(last, j + 1)))
        return faces

    def reflection(self, axis: str) -> np.ndarray:
        """Index permutation induced by x -> -x ("x") or y -> -y ("y")"""
        n = self.n_phi
        j = np.arange(n)
        if axis == "y":
            image = (n - j) % n
        elif axis == "x":
            image = (n // 2 - j) % n
        else:
            raise DomainError(f"Unknown reflection axis {axis!r}")
        perm = np.arange(self.size)
        for ring in range(1, self.n_theta):
            start = self.index(ring, 0)
            perm[start:start + n] = start + image
        return perm


@dataclass(frozen=True)
class SphereMesh:
    alpha: float
    radius: float
    vertices: np.ndarray = field(repr=False)
    faces: Tuple[Tuple[int, ...], ...] = field(repr=False)
    failed: Tuple[int, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.failed


def _chunk(args) -> Tuple[np.ndarray, List[int]]:
    alpha, vectors, offset, cfg = args
    try:
        return exp_map_batch(vectors, alpha, cfg), []
    except IntegratorError as e:
        logger.warning(f"Batch at offset {offset} failed ({e}); integrating its vertices one by one")
    out = np.full((len(vectors), 3), np.nan)
    failed = []
    for k, v in enumerate(vectors):
        try:
            out[k] = exp_map(v, alpha, cfg).as_array()
        except IntegratorError as e:
            logger.error(f"❌ Vertex {offset + k} failed: {e}")
            failed.append(offset + k)
    return out, failed


def geodesic_sphere(alpha: float, radius: float = Config.SPHERE_RADIUS,
                    grid: Optional[DirectionGrid] = None,
                    cfg: IntegratorConfig = DEFAULT_CONFIG,
                    chunk_size: int = Config.SPHERE_CHUNK_SIZE) -> SphereMesh:
    """Image of radius * grid under the exponential map.

    Faces touching a failed vertex are dropped; the failed indices are kept on the mesh.
    """
    alpha = check_alpha(alpha)
    if not radius > 0.0:
        raise DomainError(f"radius must be positive, got {radius}")
    grid = grid or DirectionGrid.build(*Config.SPHERE_RESOLUTION)
    vectors = radius * grid.directions
    jobs = [(alpha, vectors[i:i + chunk_size], i, cfg) for i in range(0, len(vectors), chunk_size)]
    logger.info(f"Integrating {len(vectors)} geodesics of length {radius} for alpha={alpha} in {len(jobs)} chunks")
    results = sweep(_chunk, jobs)
    vertices = np.vstack([r[0] for r in results])
    failed = tuple(i for r in results for i in r[1])
    bad = set(failed)
    faces = tuple(f for f in grid.faces() if not bad.intersection(f))
    if failed:
        logger.warning(f"{len(failed)} vertices failed; mesh has {len(grid.faces()) - len(faces)} missing faces")
    return SphereMesh(alpha, float(radius), vertices, faces, failed)


def reflection_residual(mesh: SphereMesh, grid: DirectionGrid, axis: str) -> float:
    """Max deviation of the vertex set from its mirror image across the XZ ("y") or YZ ("x") plane"""
    flip = np.array([-1.0, 1.0, 1.0]) if axis == "x" else np.array([1.0, -1.0, 1.0])
    mirrored = mesh.vertices[grid.reflection(axis)] * flip
    return float(np.nanmax(np.abs(mirrored - mesh.vertices)))


def sector_violations(mesh: SphereMesh, grid: DirectionGrid) -> int:
    """Vertices with u1, u2 > 0 whose image leaves the open quadrant x, y > 0"""
    d = grid.directions
    inside = (d[:, 0] > 1e-12) & (d[:, 1] > 1e-12)
    v = mesh.vertices[inside]
    return int(np.sum(~((v[:, 0] > 0.0) & (v[:, 1] > 0.0))))


def lobe_extent(mesh: SphereMesh) -> float:
    """Half-width of the mesh in the y-direction"""
    return float(np.nanmax(np.abs(mesh.vertices[:, 1])))


# ---------------------------------------------------------------------------
# OBJ
# ---------------------------------------------------------------------------

def export_mesh(mesh: Optional[SphereMesh], fmt: str = "OBJ") -> bytes:
    """Wavefront OBJ bytes: header comment, v lines, then 1-based f lines.

    Failed vertices are written at the origin and listed in the header.
    """
    if fmt.upper() != "OBJ":
        raise DomainError(f"Unsupported mesh format {fmt!r}")
    digits = Config.OBJ_SIGNIFICANT_DIGITS
    lines = ["# solvegeo geodesic sphere"]
    if mesh is None or len(mesh.vertices) == 0:
        return ("\n".join(lines) + "\n").encode("ascii")
    lines.append(f"# alpha {mesh.alpha:.{digits}g} radius {mesh.radius:.{digits}g}")
    if mesh.failed:
        lines.append("# failed " + " ".join(str(i + 1) for i in mesh.failed))
    for x, y, z in np.nan_to_num(mesh.vertices, nan=0.0):
        lines.append(f"v {x:.{digits}g} {y:.{digits}g} {z:.{digits}g}")
    for face in mesh.faces:
        lines.append("f " + " ".join(str(i + 1) for i in face))
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_obj(data: bytes) -> Tuple[np.ndarray, List[Tuple[int, ...]]]:
    """Vertices (n, 3) and 0-based faces of an OBJ stream written by export_mesh"""
    vertices, faces = [], []
    for line in data.decode("ascii").splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            vertices.append([float(p) for p in parts[1:4]])
        elif parts[0] == "f":
            faces.append(tuple(int(p.split("/")[0]) - 1 for p in parts[1:]))
    return np.array(vertices, dtype=float).reshape(-1, 3), faces


def write_mesh(mesh: SphereMesh, path: str):
    with open(path, "wb") as f:
        f.write(export_mesh(mesh))
    logger.info(f"✅ Wrote {len(mesh.vertices)} vertices and {len(mesh.faces)} faces to {path}")


def face_indices_valid(mesh: SphereMesh) -> bool:
    n = len(mesh.vertices)
    return all(0 <= i < n for face in mesh.faces for i in face)


def unique_directions(grid: DirectionGrid, decimals: int = 12) -> bool:
    rounded = np.round(grid.directions, decimals) + 0.0
    return len(np.unique(rounded, axis=0)) == grid.size

