import numpy as np
import pytest

from partbench.camera import Camera
from partbench.compose import Assembly, compose_render, merge_fields, part_weights
from partbench.recon import PartField, render_field

from test_recon import _random_field

CAM = Camera(40.0, 25.0, 2.7, 40.0, 16, 16)
STEP = 0.02


def _disjointish(seed):
    return [_random_field(res=32, seed=seed + k, fill=0.04) for k in range(3)]


def test_single_part_equals_field_render():
    f = _random_field(res=32, seed=1, fill=0.05)
    comp, alpha, vis = compose_render(Assembly([f]), CAM, STEP)
    rgb, a = render_field(f, CAM, STEP)
    assert np.max(np.abs(comp - rgb)) <= 1e-6
    assert np.max(np.abs(alpha - a)) <= 1e-6
    assert np.allclose(vis[0], alpha, atol=1e-9)


def test_merge_equivalence():
    fields = _disjointish(5)
    comp, alpha, _ = compose_render(Assembly(fields), CAM, STEP)
    rgb, a = render_field(merge_fields(Assembly(fields)), CAM, STEP)
    assert np.max(np.abs(comp - rgb)) <= 1e-5
    assert np.max(np.abs(alpha - a)) <= 1e-5


def test_permutation_invariance():
    fields = _disjointish(9)
    a, _, va = compose_render(Assembly(fields), CAM, STEP)
    b, _, vb = compose_render(Assembly(fields[::-1]), CAM, STEP)
    assert np.max(np.abs(a - b)) <= 1e-6
    assert np.max(np.abs(va - vb[::-1])) <= 1e-6


def test_part_visibility_sums_to_alpha():
    _, alpha, vis = compose_render(Assembly(_disjointish(2)), CAM, STEP)
    assert np.allclose(vis.sum(axis=0), alpha, atol=1e-9)


def test_part_weights():
    s = np.array([[1.0, 0.0, 2.0], [3.0, 0.0, 0.0]])
    w = part_weights(s)
    assert np.allclose(w[:, 0], [0.25, 0.75])
    assert np.all(w[:, 1] == 0)
    assert np.allclose(w.sum(axis=0)[[0, 2]], 1.0, atol=1e-12)


def test_merge_resamples_other_lattices():
    a = _random_field(res=32, seed=1)
    b = PartField(a.sigma, a.color, a.bbox * 1.01)
    merged = merge_fields(Assembly([a, b]))
    assert merged.same_lattice(a)


def test_assembly_rejects_bad_fields():
    with pytest.raises(ValueError):
        Assembly([])
