from __future__ import annotations
import logging
import math
import numpy as np
from .errors import ConfigError, DataError
from .models import NoiseMask, OrdinalDataset

log = logging.getLogger(__name__)


def noisy_count(noise_fraction: float, n: int) -> int:
    # round half up
    return int(math.floor(noise_fraction * n + 0.5))


def inject_noise(ds: OrdinalDataset, noise_fraction: float, seed: int) -> tuple[OrdinalDataset, NoiseMask]:
    """Move round(fraction·n) randomly chosen labels one class up or down; the class scale wraps around."""
    if not 0.0 <= noise_fraction <= 1.0:
        raise ConfigError(f"noise fraction {noise_fraction} outside [0, 1]")
    c = ds.class_count
    if c < 2:
        raise DataError("label noise needs at least 2 classes")
    m = noisy_count(noise_fraction, ds.n)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(ds.n, size=m, replace=False))
    step = rng.choice(np.array([-1, 1]), size=m)
    y = ds.y.copy()
    y[idx] = (y[idx] + step) % c
    mask = NoiseMask(corrupted_indices=idx.tolist(), original_labels={int(i): int(ds.y[i]) for i in idx},
                     noise_fraction=noise_fraction, seed=seed)
    log.debug("%s: corrupted %d of %d labels (seed %d)", ds.name, m, ds.n, seed)
    return ds.with_labels(y), mask


def restore_labels(ds: OrdinalDataset, mask: NoiseMask) -> OrdinalDataset:
    y = ds.y.copy()
    for i, label in mask.original_labels.items():
        y[int(i)] = label
    return ds.with_labels(y)
