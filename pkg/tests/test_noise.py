import numpy as np
import pytest

from monofilter.dataset import dataset_from_arrays, make_monotone_dataset
from monofilter.errors import ConfigError
from monofilter.noise import inject_noise, noisy_count, restore_labels


def test_noisy_count_rounds_half_up():
    assert noisy_count(0.3, 10) == 3
    assert noisy_count(0.25, 10) == 3
    assert noisy_count(0.05, 10) == 1
    assert noisy_count(0.0, 10) == 0


def test_zero_noise_is_identity():
    ds = make_monotone_dataset(30, seed=1)
    noisy, mask = inject_noise(ds, 0.0, seed=4)
    assert mask.corrupted_indices == [] and mask.original_labels == {}
    assert np.array_equal(noisy.y, ds.y)


@pytest.mark.parametrize("seed", range(100))
def test_adjacent_labels_with_wrap(seed):
    ds = dataset_from_arrays(np.arange(10), np.arange(10) % 4, c=4)
    noisy, mask = inject_noise(ds, 0.3, seed)
    changed = np.flatnonzero(noisy.y != ds.y)
    assert changed.tolist() == mask.corrupted_indices
    assert len(changed) == 3
    for i in changed:
        assert (int(noisy.y[i]) - int(ds.y[i])) % 4 in (1, 3)
        assert mask.original_labels[int(i)] == ds.y[i]
    assert np.array_equal(noisy.X, ds.X)


def test_binary_classes_always_flip():
    ds = dataset_from_arrays(np.arange(20), np.arange(20) // 10)
    noisy, mask = inject_noise(ds, 0.5, seed=3)
    idx = mask.corrupted_indices
    assert np.array_equal(noisy.y[idx], 1 - ds.y[idx])


def test_same_seed_same_mask():
    ds = make_monotone_dataset(50, c=3, seed=0)
    a, ma = inject_noise(ds, 0.2, 9)
    b, mb = inject_noise(ds, 0.2, 9)
    assert ma == mb and np.array_equal(a.y, b.y)


def test_restore_labels():
    ds = make_monotone_dataset(40, c=3, seed=2)
    noisy, mask = inject_noise(ds, 0.4, 1)
    assert np.array_equal(restore_labels(noisy, mask).y, ds.y)


def test_rejects_bad_input():
    ds = make_monotone_dataset(10, seed=0)
    with pytest.raises(ConfigError):
        inject_noise(ds, 1.5, 0)
    with pytest.raises(ConfigError):
        inject_noise(ds, -0.1, 0)
