import math

import numpy as np
import pytest

from rislab.codebook import (
    Codebook,
    OracleTooLarge,
    binarize,
    binarize_signs,
    build_codebook,
    exhaustive_optimum,
    phase_profile,
    propagation_phase,
)
from rislab.fieldsim import SimConfig, path_terms, received_power
from rislab.geometry import Pose, Scene
from rislab.pattern import complement, random_pattern, uniform
from rislab.sweep import SweepPlan, plan_2d, single_pose_plan


def test_phase_profile_single_element():
    prof = phase_profile(Scene(rows=1, cols=1), Pose(33.3, 9))
    assert len(prof) == 1
    assert 0 <= prof.phases[0] < 2 * math.pi


def test_phase_profile_mirror_symmetry(scene):
    ph = phase_profile(scene, Pose(90, 0)).phases.reshape(16, 16)
    # equal path sums, so phases agree up to reduction round-off
    diff = np.angle(np.exp(1j * (ph - ph[:, ::-1])))
    assert np.max(np.abs(diff)) < 1e-9


def test_phase_scales_with_frequency():
    a = Scene(element_spacing=0.027)
    b = Scene(element_spacing=0.027, frequency=11e9)
    np.testing.assert_allclose(propagation_phase(b, Pose(70, 9)), 2 * propagation_phase(a, Pose(70, 9)), rtol=1e-14)


def test_binarize_aligned():
    signs, mag = binarize_signs(np.full(7, 1.3))
    assert np.all(signs == 1) and mag == pytest.approx(7)


def test_binarize_anti_aligned_pair():
    signs, mag = binarize_signs([0.0, math.pi])
    assert list(signs) == [1, -1]
    assert mag == pytest.approx(2.0)


def test_exhaustive_small_cases():
    assert exhaustive_optimum([0.4])[1] == pytest.approx(1.0)
    assert exhaustive_optimum([0.0, math.pi])[1] == pytest.approx(2.0)
    with pytest.raises(OracleTooLarge):
        exhaustive_optimum(np.zeros(21))


def test_exhaustive_beats_random_signs(rng):
    ph = rng.uniform(0, 2 * math.pi, 10)
    best = exhaustive_optimum(ph)[1]
    z = np.exp(1j * ph)
    for _ in range(100):
        s = rng.choice([-1.0, 1.0], size=10)
        assert abs(np.sum(s * z)) <= best + 1e-12


def test_exhaustive_signs_reach_reported_magnitude(rng):
    ph = rng.uniform(0, 2 * math.pi, 20)
    s, mag = exhaustive_optimum(ph)
    assert abs(np.sum(s * np.exp(1j * ph))) == pytest.approx(mag, rel=1e-12)


def test_binarize_matches_exhaustive_random(rng):
    for _ in range(100):
        n = int(rng.integers(1, 17))
        ph = rng.uniform(0, 2 * math.pi, n)
        assert abs(binarize_signs(ph)[1] - exhaustive_optimum(ph)[1]) < 1e-9


def test_binarize_matches_exhaustive_weighted(rng):
    for _ in range(50):
        n = int(rng.integers(1, 15))
        ph = rng.uniform(0, 2 * math.pi, n)
        w = rng.uniform(0.2, 2.0, n)
        assert abs(binarize_signs(ph, w)[1] - exhaustive_optimum(ph, w)[1]) < 1e-9


def test_binarize_degenerate_phases(rng):
    # Repeated and opposite phases create coincident arc boundaries.
    for _ in range(50):
        ph = rng.choice([0.0, math.pi / 2, math.pi, 3 * math.pi / 2], size=int(rng.integers(2, 13)))
        assert abs(binarize_signs(ph)[1] - exhaustive_optimum(ph)[1]) < 1e-9


def test_binarize_4x4_plate():
    small = Scene(rows=4, cols=4)
    for pose in (Pose(90, 0), Pose(61.2, 9), Pose(150, -27)):
        prof = phase_profile(small, pose)
        assert abs(binarize_signs(prof.phases)[1] - exhaustive_optimum(prof)[1]) < 1e-9


def test_binarize_pattern_and_complement(scene):
    prof = phase_profile(scene, Pose(45, 0))
    p, mag = binarize(prof)
    z = np.exp(1j * prof.phases)
    assert abs(np.sum(p.signs() * z)) == pytest.approx(mag, rel=1e-12)
    assert abs(np.sum(complement(p).signs() * z)) == pytest.approx(mag, rel=1e-12)
    assert p[0, 0] == 0  # normalised representative


def test_binarize_requires_full_plate():
    with pytest.raises(ValueError):
        binarize(phase_profile(Scene(rows=4, cols=4), Pose(90, 0)))


def test_single_target(scene):
    cb = build_codebook(scene, single_pose_plan(Pose(90, 0)))
    assert len(cb) == 1
    e = cb[Pose(90, 0)]
    uni = received_power(scene, Pose(90, 0), uniform(1)).power
    assert e.predicted_power >= uni - 1e-9


@pytest.fixture(scope="module")
def codebook_2d():
    return build_codebook(Scene(), plan_2d())


def test_codebook_2d(codebook_2d):
    scene = Scene()
    assert len(codebook_2d) == 101
    for e in codebook_2d:
        assert received_power(scene, e.pose, e.pattern).power == pytest.approx(e.predicted_power, abs=1e-9)
        assert e.predicted_power >= received_power(scene, e.pose, uniform(1)).power - 1e-9


def test_codebook_dominates_random(codebook_2d):
    scene = Scene()
    randoms = [random_pattern(s) for s in range(50)]
    for e in list(codebook_2d)[::10]:
        best_random = max(received_power(scene, e.pose, p).power for p in randoms)
        assert e.predicted_power >= best_random - 1e-9


def test_codebook_specular_gain(codebook_2d):
    scene = Scene()
    gain = codebook_2d[Pose(90, 0)].predicted_power - received_power(scene, Pose(90, 0), uniform(1)).power
    # near-field curvature: the binarised pattern beats the flat plate here
    assert gain == pytest.approx(2.229, abs=0.01)


def test_codebook_is_sorted_and_deterministic():
    scene = Scene()
    plan = SweepPlan(60, 120, 30, -9, 9, 9)
    a, b = build_codebook(scene, plan), build_codebook(scene, plan)
    keys = [e.pose.sort_key() for e in a]
    assert keys == sorted(keys)
    assert [e.pattern for e in a] == [e.pattern for e in b]


def test_weighted_objective_is_exact_optimum():
    scene = Scene(rows=16, cols=16)
    cfg = SimConfig(element_factor_exponent=2.0)
    cb = build_codebook(scene, single_pose_plan(Pose(70.2, 0)), cfg, weighted=True)
    e = cb[Pose(70.2, 0)]
    amp, phase = path_terms(scene, e.pose, cfg)
    _, mag = binarize_signs(phase, amp)
    assert abs(received_power(scene, e.pose, e.pattern, cfg).complex_sum) == pytest.approx(mag, rel=1e-12)


def test_lookup_nearest(codebook_2d):
    assert codebook_2d.lookup(Pose(90, 0)).pose == Pose(90.0, 0.0)
    assert codebook_2d.lookup(Pose(89.5, 0)).pose == Pose(90.0, 0.0)
    assert codebook_2d.lookup(Pose(89.0, 0)).pose == Pose(88.2, 0.0)  # 0.8 deg away vs 1.0
    assert codebook_2d.lookup(Pose(0.5, 20)).pose == Pose(0.0, 0.0)


def test_json_round_trip(codebook_2d, tmp_path):
    path = tmp_path / "cb.json"
    codebook_2d.save(path)
    back = Codebook.load(path)
    assert len(back) == 101
    for a, b in zip(codebook_2d, back):
        assert a == b


def test_codebook_requires_full_plate():
    with pytest.raises(ValueError):
        build_codebook(Scene(rows=4, cols=4), plan_2d())
