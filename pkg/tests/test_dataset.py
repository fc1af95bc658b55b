import numpy as np
import pytest

from vlcris.config import ScenarioConfig
from vlcris.ris_assign import (
    generate_dataset,
    read_dataset,
    reference_scene,
    write_dataset,
)
from vlcris.ris_assign import brute_force_assign, coordinate_ascent_assign
from vlcris.ris_assign.dataset import label_instance
from vlcris.scene import push_out


@pytest.fixture(scope="module")
def cfg():
    return ScenarioConfig()


@pytest.fixture(scope="module")
def small(cfg):
    return generate_dataset(cfg, 40, seed=5)


def test_shapes_and_ranges(cfg, small):
    assert len(small) == 40
    assert small.xi.shape == (40, cfg.aps.count)
    assert small.labels.shape == (40, cfg.ris.elements)
    assert np.all((small.xi >= 0) & (small.xi <= 1))
    assert np.all((small.position >= 0) & (small.position <= 5))


def test_labels_within_unblocked_set(small):
    for xi, lab, cands in zip(small.xi, small.labels, small.candidates):
        assert len(cands) >= 2
        assert set(lab.tolist()) <= set(cands)
        assert set(cands) == {i + 1 for i in np.flatnonzero(xi < 0.5)}
    assert set(small.oracle) == {"brute"}


def test_deterministic(cfg, small):
    again = generate_dataset(cfg, 40, seed=5)
    np.testing.assert_array_equal(again.xi, small.xi)
    np.testing.assert_array_equal(again.labels, small.labels)
    first = generate_dataset(cfg, 1, seed=5)
    np.testing.assert_array_equal(first.labels[0], small.labels[0])
    np.testing.assert_array_equal(first.position[0], small.position[0])


def test_label_rederivable_from_scene(cfg, small):
    scene = reference_scene(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(5))
    xy = rng.uniform((0, 0), (5, 5))
    centers = push_out(rng.uniform((0, 0), (5, 5), size=(cfg.mobility.blockers, 2)), xy, 0.4)
    ch = scene.channel(xy, centers)
    assert (ch.xi < 0.5).sum() >= 2  # the first draw of this seed is a soft instance
    np.testing.assert_array_equal(small.position[0], xy)
    blocked = ch.xi >= 0.5
    expected = brute_force_assign(small.candidates[0], ch.problem(np.where(blocked, 0.0, 1.0)))
    np.testing.assert_array_equal(small.labels[0], expected)


def test_csv_round_trip(tmp_path, small):
    path = write_dataset(small, tmp_path / "d.csv")
    header = path.read_text().splitlines()[0].split(",")
    assert header[:4] == ["xi_1", "xi_2", "xi_3", "xi_4"]
    assert header[4:6] == ["x", "y"]
    assert header[6:12] == [f"X_{j}" for j in range(1, 7)]
    back = read_dataset(path)
    np.testing.assert_array_equal(back.xi, small.xi)
    np.testing.assert_array_equal(back.position, small.position)
    np.testing.assert_array_equal(back.labels, small.labels)
    assert back.candidates == small.candidates and back.oracle == small.oracle


def test_ascent_oracle_above_guard():
    from vlcris.ris_assign import AssignmentProblem
    p = AssignmentProblem(np.full(4, 1e-6), np.full((4, 11), 1e-7), 3.0, 0.5, 1e-15, 20e6)
    x, name = label_instance([1, 2, 3, 4], p, 11)
    assert name == "ascent"
    np.testing.assert_array_equal(x, coordinate_ascent_assign([1, 2, 3, 4], p))
    x, name = label_instance([1, 2], p, 11)
    assert name == "brute"


def test_count_validated(cfg):
    with pytest.raises(ValueError):
        generate_dataset(cfg, 0)


def test_subset(small):
    sub = small.subset([0, 2])
    assert len(sub) == 2 and sub.candidates[1] == small.candidates[2]
