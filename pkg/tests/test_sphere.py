import numpy as np
import pytest
from numpy.testing import assert_allclose

from solvegeo.core import sphere
from solvegeo.core.errors import DomainError, IntegratorError
from solvegeo.core.sphere import (
    DirectionGrid,
    SphereMesh,
    export_mesh,
    face_indices_valid,
    geodesic_sphere,
    lobe_extent,
    parse_obj,
    reflection_residual,
    sector_violations,
    unique_directions,
    write_mesh,
)

SMALL = DirectionGrid.build(8, 16)


class TestDirectionGrid:
    def test_size_and_poles(self):
        assert SMALL.size == 7 * 16 + 2
        assert SMALL.directions.shape == (SMALL.size, 3)
        assert_allclose(SMALL.directions[0], [0.0, 0.0, 1.0])
        assert_allclose(SMALL.directions[SMALL.south], [0.0, 0.0, -1.0])
        assert_allclose(np.linalg.norm(SMALL.directions, axis=1), 1.0)

    def test_directions_are_unique(self):
        assert unique_directions(SMALL)
        assert unique_directions(DirectionGrid.build(128, 256))

    def test_faces(self):
        faces = SMALL.faces()
        triangles = [f for f in faces if len(f) == 3]
        quads = [f for f in faces if len(f) == 4]
        assert len(triangles) == 2 * 16
        assert len(quads) == 6 * 16
        used = {i for f in faces for i in f}
        assert used == set(range(SMALL.size))

    @pytest.mark.parametrize("axis, flip", [("x", [-1.0, 1.0, 1.0]), ("y", [1.0, -1.0, 1.0])])
    def test_reflection_permutation(self, axis, flip):
        perm = SMALL.reflection(axis)
        assert_allclose(perm[perm], np.arange(SMALL.size))
        assert_allclose(SMALL.directions[perm] * np.array(flip), SMALL.directions, atol=1e-15)

    @pytest.mark.parametrize("shape", [(1, 16), (8, 3), (8, 15)])
    def test_rejects_bad_resolution(self, shape):
        with pytest.raises(DomainError):
            DirectionGrid.build(*shape)

    def test_rejects_unknown_axis(self):
        with pytest.raises(DomainError):
            SMALL.reflection("z")


@pytest.fixture(scope="module")
def small_mesh():
    return geodesic_sphere(0.5, 2.0, SMALL)


def test_small_sphere_poles_and_symmetry(small_mesh):
    assert small_mesh.complete
    assert face_indices_valid(small_mesh)
    assert_allclose(small_mesh.vertices[0], [0.0, 0.0, 2.0], atol=1e-12)
    assert_allclose(small_mesh.vertices[SMALL.south], [0.0, 0.0, -2.0], atol=1e-12)
    assert reflection_residual(small_mesh, SMALL, "x") < 1e-9
    assert reflection_residual(small_mesh, SMALL, "y") < 1e-9
    assert sector_violations(small_mesh, SMALL) == 0
    assert lobe_extent(small_mesh) > 0.0


def test_negative_alpha_sphere():
    mesh = geodesic_sphere(-1.0, 1.5, DirectionGrid.build(6, 12))
    grid = DirectionGrid.build(6, 12)
    both = grid.reflection("x")[grid.reflection("y")]
    assert_allclose(mesh.vertices[both] * np.array([-1.0, -1.0, 1.0]), mesh.vertices, atol=1e-9)
    assert np.all(np.abs(mesh.vertices[:, 2]) <= 1.5 + 1e-12)


def test_chunked_and_single_pass_agree():
    whole = geodesic_sphere(0.75, 1.0, DirectionGrid.build(4, 8))
    chunked = geodesic_sphere(0.75, 1.0, DirectionGrid.build(4, 8), chunk_size=5)
    assert_allclose(chunked.vertices, whole.vertices, atol=1e-10)


def test_sphere_rejects_radius():
    with pytest.raises(DomainError):
        geodesic_sphere(0.5, 0.0, SMALL)


def test_failed_vertices_are_reported(monkeypatch):
    def failing_batch(vectors, alpha, cfg=None):
        raise IntegratorError("step size too small", t_reached=0.1)

    original = sphere.exp_map

    def failing_north(v, alpha, cfg=None):
        if v[0] == 0.0 and v[1] == 0.0 and v[2] > 0.0:
            raise IntegratorError("step size too small", t_reached=0.2)
        return original(v, alpha)

    monkeypatch.setattr(sphere, "exp_map_batch", failing_batch)
    monkeypatch.setattr(sphere, "exp_map", failing_north)
    grid = DirectionGrid.build(3, 4)
    mesh = geodesic_sphere(0.5, 1.0, grid)
    assert mesh.failed == (0,)
    assert not mesh.complete
    assert len(mesh.faces) == len(grid.faces()) - 4
    assert np.isnan(mesh.vertices[0]).all()
    text = export_mesh(mesh).decode("ascii").splitlines()
    assert text[2] == "# failed 1"
    assert text[3] == "v 0 0 0"


def test_empty_export_is_the_header():
    assert export_mesh(None) == b"# solvegeo geodesic sphere\n"


def test_golden_export():
    mesh = SphereMesh(
        alpha=0.5,
        radius=5.0,
        vertices=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.5]]),
        faces=((0, 1, 2), (1, 3, 2)),
    )
    expected = (
        b"# solvegeo geodesic sphere\n"
        b"# alpha 0.5 radius 5\n"
        b"v 0 0 0\n"
        b"v 1 0 0\n"
        b"v 0 1 0\n"
        b"v 1 1 0.5\n"
        b"f 1 2 3\n"
        b"f 2 4 3\n"
    )
    assert export_mesh(mesh) == expected
    with pytest.raises(DomainError):
        export_mesh(mesh, fmt="PLY")


def test_written_mesh_parses_back(small_mesh, tmp_path):
    path = tmp_path / "sphere.obj"
    write_mesh(small_mesh, str(path))
    vertices, faces = parse_obj(path.read_bytes())
    assert_allclose(vertices, small_mesh.vertices, rtol=1e-8, atol=1e-9)
    assert faces == [tuple(f) for f in small_mesh.faces]
    assert b"\r\n" not in path.read_bytes()
