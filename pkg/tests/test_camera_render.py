import numpy as np
import pytest

from partbench.camera import Camera, grid_to_tiles, make_rig, novel_cameras, tiles_to_grid
from partbench.errors import EmptyForegroundError, GeometryError
from partbench.render import (
    MarchConfig,
    derive_masks,
    foreground_psnr,
    render_part_tiles,
    render_views,
    sphere_trace,
)
from partbench.scene import Asset

from conftest import sphere


def test_rig_layout():
    rig = make_rig(32, 32)
    assert [c.azimuth for c in rig] == [0, 90, 180, 270]
    assert all(c.elevation == 20 for c in rig)
    for c in rig:
        right, up, forward = c.basis()
        assert np.allclose(np.cross(right, up), -forward)
        assert np.allclose(forward, -c.position / np.linalg.norm(c.position))


def test_projection_inverts_rays():
    cam = Camera(33.0, 12.0, 2.7, 40.0, 24, 32)
    origin, dirs = cam.rays()
    pts = origin + 1.7 * dirs
    row, col, dist = cam.project(pts.reshape(-1, 3))
    rr, cc = np.meshgrid(np.arange(24), np.arange(32), indexing="ij")
    assert np.allclose(row, rr.ravel(), atol=1e-9)
    assert np.allclose(col, cc.ravel(), atol=1e-9)
    assert np.allclose(dist, 1.7)


def test_origin_projects_to_image_centre():
    cam = Camera(123.0, 31.0, 2.7, 40.0, 64, 64)
    row, col, _ = cam.project(np.zeros((1, 3)))
    assert row[0] == pytest.approx(31.5) and col[0] == pytest.approx(31.5)


def test_grid_round_trip():
    tiles = [np.full((3, 4), k) for k in range(4)]
    grid = tiles_to_grid(tiles)
    assert grid.shape == (6, 8) and grid[0, 4] == 1 and grid[3, 0] == 2
    assert all(np.array_equal(a, b) for a, b in zip(grid_to_tiles(grid), tiles))


def test_novel_cameras_are_seeded():
    like = make_rig(16, 16)[0]
    a, b = novel_cameras(5, 3, like), novel_cameras(5, 3, like)
    assert a == b
    assert all(0 <= c.elevation <= 40 for c in a)


def test_sphere_trace_matches_analytic_intersection():
    cam = Camera(0.0, 20.0, 2.7, 40.0, 32, 32)
    a = Asset("ball", [[sphere((0.1, -0.05, 0.0), 0.5)]])
    t, _ = render_part_tiles(a, 0, cam, MarchConfig())
    origin, dirs = cam.rays()
    oc = origin - np.array([0.1, -0.05, 0.0])
    b = dirs @ oc
    disc = b * b - (oc @ oc - 0.25)
    exact = np.where(disc >= 0, -b - np.sqrt(np.maximum(disc, 0)), np.inf)
    clear = np.abs(disc) > 1e-2  # stay away from grazing rays
    assert np.array_equal(np.isfinite(t)[clear], np.isfinite(exact)[clear])
    hit = np.isfinite(t) & np.isfinite(exact)
    # the march stops within the hit epsilon, just short of the surface
    pts = origin + t[hit, None] * dirs[hit]
    assert np.all(np.abs(a.part_distance(0, pts)) <= MarchConfig().hit_epsilon)
    assert np.all(exact[hit] - t[hit] >= -1e-9)
    assert np.max(exact[hit] - t[hit]) < 5e-3


def test_sphere_trace_flags_nan_geometry():
    origin = np.zeros(3) + np.array([0, 0, 3.0])
    dirs = np.array([[0, 0, -1.0]])
    with pytest.raises(GeometryError):
        sphere_trace(lambda p: np.full(p.shape[0], np.nan), origin, dirs, 1.0, MarchConfig())


def test_masks_partition_foreground(bundle0):
    m = bundle0.masks
    assert np.all(m.sum(axis=0) <= 1)
    assert np.array_equal(m.any(axis=0), bundle0.foreground)
    # composite takes each pixel from its owning part
    for k in range(bundle0.n_parts):
        assert np.array_equal(bundle0.rgb[m[k]], bundle0.part_rgb[k][m[k]])


def test_derive_masks_ties_go_to_lowest_index():
    d = np.array([[[1.0, np.inf]], [[1.0, np.inf]]])
    m = derive_masks(d)
    assert m[0, 0, 0] and not m[1, 0, 0]
    assert not m[:, 0, 1].any()


def test_rig_symmetry_of_symmetric_asset():
    # a sphere at the origin looks the same from every rig camera
    a = Asset("ball", [[sphere((0, 0, 0), 0.5)]])
    b = render_views(a, make_rig(32, 32))
    tiles = grid_to_tiles(b.rgb)
    for t in tiles[1:]:
        assert np.allclose(t, tiles[0], atol=1e-6)


def test_foreground_psnr():
    x = np.zeros((4, 4, 3))
    y = x.copy()
    y[0, 0] = 0.1
    mask = np.zeros((4, 4), bool)
    mask[:2, :2] = True
    assert foreground_psnr(x, y, mask) == pytest.approx(10 * np.log10(1 / (0.01 / 4)))
    assert foreground_psnr(x, x, mask) == 99.0
    with pytest.raises(EmptyForegroundError):
        foreground_psnr(x, y, np.zeros((4, 4), bool))
