"""Shared fixtures: small synthetic images and a pooled encoding of them."""

import numpy as np
import pytest

from dnapix.distance import warm_up
from dnapix.image import Image
from dnapix.pool import build_pool
from dnapix.primers import generate_registry


@pytest.fixture(scope="session", autouse=True)
def _jit_warm():
    # compile the numba kernels once, outside any timed assertion
    warm_up()


def smooth_noise(rng, height=96, width=96):
    base = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    acc = (
        base.astype(np.int32)
        + np.roll(base, 1, 0)
        + np.roll(base, 1, 1)
        + np.roll(base, (1, 1), (0, 1))
    )
    return (acc // 4).astype(np.uint8)


@pytest.fixture(scope="session")
def tiny_images():
    rng = np.random.default_rng(7)
    return [Image(smooth_noise(rng)[None]) for _ in range(4)]


@pytest.fixture(scope="session")
def registry():
    return generate_registry(5, 4, 42)


@pytest.fixture(scope="session")
def tiny_pool(tiny_images, registry):
    return build_pool(
        list(enumerate(tiny_images)), num_levels=5, q=1, registry=registry
    )
