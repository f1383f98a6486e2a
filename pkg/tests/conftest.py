import numpy as np
import pytest

from crw_router.model import SystemParams


@pytest.fixture
def base():
    return SystemParams()


@pytest.fixture
def asym():
    return SystemParams().with_values(
        g_a1=0.57, g_a2=0.33, g_b3=0.79, g_b4=0.37, g_c1=0.98, g_c3=0.41,
        g_d2=0.9, g_d4=0.93, Omega1=0.48, Omega2=0.87, delta_es1=-0.46,
        delta_es4=0.46, l=3, phi=np.pi / 2)


def random_params(rng, symmetric=True):
    """Random draw with couplings in [0, 1] and level shifts in [-0.5, 0.5]."""
    if symmetric:
        g_a, g_s = rng.uniform(0, 1, 2)
        return SystemParams.symmetric(
            g_a=g_a, g_s=g_s, Omega1=rng.uniform(0, 1), Omega2=rng.uniform(0, 1),
            phi=rng.uniform(0, 2 * np.pi), l=int(rng.integers(1, 21)))
    names = ("g_a1", "g_a2", "g_b3", "g_b4", "g_c1", "g_c3", "g_d2", "g_d4",
             "Omega1", "Omega2")
    values = dict(zip(names, rng.uniform(0, 1, len(names))))
    values.update(delta_es1=rng.uniform(-0.5, 0.5), delta_es4=rng.uniform(-0.5, 0.5),
                  phi=rng.uniform(0, 2 * np.pi), l=int(rng.integers(1, 21)))
    return SystemParams().with_values(**values)
