import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from partbench import sdf
from partbench.errors import EmptyAssetError, GeneratorError
from partbench.scene import (
    ASSET_RADIUS,
    Asset,
    GeneratorSpec,
    filter_asset,
    generate_asset,
    part_volume_fractions,
    sdf_eval,
)

from conftest import box, sphere


def test_primitive_distances_on_known_points():
    f = sdf.primitive_sdf
    assert np.allclose(f("sphere", np.array([[2.0, 0, 0], [0, 0, 0]]), np.array([1.0, 1, 1])), [1.0, -1.0])
    assert np.allclose(f("box", np.array([[3.0, 0, 0], [2.0, 3.0, 0]]), np.array([1.0, 1, 1])), [2.0, np.sqrt(5)])
    # capsule along z with radius 0.5 and half-length 1
    assert np.allclose(f("capsule", np.array([[0, 0, 3.0], [1.0, 0, 0]]), np.array([0.5, 0.5, 1.0])), [1.5, 0.5])
    # torus in the xy plane, major 1, minor 0.25
    assert np.allclose(f("torus", np.array([[1.0, 0, 0], [0, 0, 0]]), np.array([1.0, 0.25, 0.1])), [-0.25, 0.75])
    # rounded cone: r1 at z=-h/2, r2 at z=+h/2
    cone = np.array([0.4, 0.2, 1.0])
    assert np.allclose(f("rounded-cone", np.array([[0, 0, -1.5], [0, 0, 1.5]]), cone), [0.6, 0.8])


@pytest.mark.parametrize("kind", sdf.KINDS)
def test_bounding_radius_encloses_surface(kind):
    scale = np.array([0.4, 0.25, 0.6])
    rng = np.random.default_rng(1)
    dirs = rng.normal(size=(500, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = sdf.bounding_radius(kind, scale)
    assert np.all(sdf.primitive_sdf(kind, dirs * (r + 1e-6), scale) > 0)


def test_union_attribution_prefers_lowest_index_on_ties():
    a = Asset("tie", [[sphere((0, 0, 0), 0.3)], [sphere((0, 0, 0), 0.3)]])
    d, idx, _ = sdf_eval(a, np.array([[0.0, 0, 0], [0.5, 0, 0]]))
    assert np.allclose(d, [-0.3, 0.2])
    assert idx.tolist() == [0, 0]


def test_volume_fractions_match_analytic_ratio():
    a = Asset("pair", [[sphere((-0.5, 0, 0), 0.2)], [sphere((0.5, 0, 0), 0.4)]])
    f = part_volume_fractions(a, 200_000, seed=3)
    assert f.sum() == pytest.approx(1.0)
    assert f[0] == pytest.approx(1 / 9, abs=0.01)


def test_volume_standard_error_shrinks_like_root_n():
    # the estimator's spread over seeds shrinks by ~sqrt(2) per doubling
    a = Asset("pair", [[sphere((-0.5, 0, 0), 0.2)], [box((0.5, 0, 0), (0.3, 0.3, 0.3))]])
    spread = [np.std([part_volume_fractions(a, n, seed=s)[0] for s in range(40)]) for n in (10_000, 40_000)]
    assert spread[0] / spread[1] == pytest.approx(2.0, rel=0.35)


def test_volume_fraction_errors():
    a = Asset("pair", [[sphere((-0.5, 0, 0), 0.2)], [sphere((0.5, 0, 0), 0.4)]])
    with pytest.raises(ValueError):
        part_volume_fractions(a, 100)
    empty = Asset("empty", [[sphere((0, 0, 0), 0.2)]], bounds=np.array([[5.0, 5, 5], [6, 6, 6]]))
    with pytest.raises(EmptyAssetError):
        part_volume_fractions(empty, 10_000)


def test_filter_culls_then_rejects():
    a = Asset("three", [[sphere((x, 0, 0), 0.2)] for x in (-0.5, 0, 0.5)])
    r = filter_asset(a, [0.48, 0.04, 0.48])
    assert r.accepted and r.culled == (1,) and r.asset.n_parts == 2
    assert filter_asset(a, [0.92, 0.04, 0.04]).reason == "monolithic"
    many = Asset("many", [[sphere((0.1 * i, 0, 0), 0.05)] for i in range(11)])
    assert filter_asset(many, np.full(11, 1 / 11)).reason == "too-many-parts"


def test_generator_is_seeded_and_normalised():
    spec = GeneratorSpec(volume_samples=20_000)
    a, b = generate_asset(7, spec), generate_asset(7, spec)
    assert a.dumps() == b.dumps()
    assert a.radius() <= ASSET_RADIUS + 1e-9
    assert 2 <= a.n_parts <= 8


@pytest.mark.parametrize("template", ["stack", "body+limbs", "vehicle", "table"])
def test_templates_pass_filter(template):
    spec = GeneratorSpec(template=template, volume_samples=20_000)
    a = generate_asset(11, spec)
    assert filter_asset(a, part_volume_fractions(a, 20_000, 11)).accepted


def test_infeasible_spec():
    with pytest.raises(GeneratorError):
        GeneratorSpec(template="stack", min_parts=7, max_parts=8).validate()
    with pytest.raises(GeneratorError):
        GeneratorSpec(min_parts=1).validate()


def test_asset_serialisation_round_trip(asset0):
    again = Asset.loads(asset0.dumps())
    assert again.dumps() == asset0.dumps()
    pts = np.random.default_rng(0).uniform(-1, 1, (200, 3))
    assert np.allclose(sdf_eval(again, pts)[0], sdf_eval(asset0, pts)[0], atol=1e-7)


def test_rotation_preserves_distances(asset0):
    R = Rotation.from_euler("xyz", [20, -35, 50], degrees=True).as_matrix()
    rot = asset0.transformed(R)
    pts = np.random.default_rng(0).uniform(-1, 1, (200, 3))
    assert np.allclose(sdf_eval(rot, pts @ R.T)[0], sdf_eval(asset0, pts)[0], atol=1e-9)
