import numpy as np
import pytest

from gamealg import matcore as mc


def rand_complex(d, rng, scale=1.0):
    return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))


def rand_psd(d, rng):
    a = rand_complex(d, rng)
    return a @ mc.dagger(a)


def rand_state(d, rng):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def rand_lam(d, rng, rank=None):
    """Density factor of a Haar-random pure state on C^d (x) C^d, in a random basis."""
    w = np.abs(rng.standard_normal(d)) + 1e-3
    if rank is not None:
        w[rank:] = 0
    w = w / np.linalg.norm(w)
    u = mc.random_unitary(d, rng)
    return mc.density_factor((u * w) @ mc.dagger(u), normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
