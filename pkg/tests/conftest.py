import numpy as np
import pytest

from ucsaddle.problem import Box, make_bilinear_coupling, sin_quadratic_field


def bilinear(q=2.0, dim=10, seed=0, sigma=1.0, halfwidth=1.0, composite=None):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) / np.sqrt(dim)
    phi = sin_quadratic_field(dim, rng)
    return make_bilinear_coupling(dim, dim, a, phi, sigma, q,
                                  Box.cube(dim, -halfwidth, halfwidth), composite)


@pytest.fixture
def make_bilinear():
    return bilinear
