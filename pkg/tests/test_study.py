import numpy as np
import pytest

from animqa.study import (
    derive_seed,
    distortion_grid,
    make_sources,
    max_workers,
    planted_labels,
    rank_labels,
    single_distortion_set,
    to_dataset,
)


@pytest.fixture(scope="module")
def tiny_sources():
    return make_sources(2, seed=5, frame_count=16, joint_count=6)


def test_derive_seed_is_stable_and_keyed():
    assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
    assert len({derive_seed(0, 1, 2), derive_seed(0, 2, 1), derive_seed(1, 1, 2)}) == 3
    assert 0 <= derive_seed(7) < 2**63


def test_max_workers_env(monkeypatch):
    monkeypatch.setenv("ANIMQA_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("ANIMQA_THREADS", "junk")
    assert max_workers() >= 1


def test_sources_have_spread_scales(tiny_sources):
    assert [s.rig.scale for s in tiny_sources] == [0.85, 1.15]
    assert tiny_sources[0].name == "src00"


def test_grid_layout_and_thread_independence(tiny_sources, monkeypatch):
    grid = distortion_grid(tiny_sources, kinds=("FootContact", "Smoothness"), threads=4)
    assert len(grid) == 2 * 2 * 5
    assert grid[0].stimulus_id == "src00/FootContact/0"
    serial = distortion_grid(tiny_sources, kinds=("FootContact", "Smoothness"), threads=1)
    for a, b in zip(grid, serial):
        np.testing.assert_array_equal(a.features.as_array(), b.features.as_array())


def test_labels(tiny_sources):
    grid = distortion_grid(tiny_sources, kinds=("FootGlide",), threads=1)
    w = np.arange(1.0, 8.0)
    y0 = planted_labels(grid, w)
    X = np.array([s.features.as_array() for s in grid])
    np.testing.assert_allclose(y0, X @ w)
    y = rank_labels(grid, sigma=0.0)
    assert list(y) == [1.0, 2.0, 3.0, 4.0, 5.0] * 2
    assert np.all((rank_labels(grid, sigma=5.0) >= 1) & (rank_labels(grid, sigma=5.0) <= 5))
    assert len(to_dataset(grid, y)) == 10


def test_single_distortion_set(tiny_sources):
    out = single_distortion_set(tiny_sources, threads=1)
    assert len(out) == 2 and [s.source for s in out] == ["src00", "src01"]
