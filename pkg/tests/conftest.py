"""Shared fixtures: the bundled device and cached heavy artifacts."""
import numpy as np
import pytest

from twinpdc import build_jsa, decompose
from twinpdc import config as cfgmod
from twinpdc.jsa import FrequencyGrid


@pytest.fixture(scope="session")
def bundled_config():
    return cfgmod.load_config(cfgmod.default_config_path())


@pytest.fixture(scope="session")
def device(bundled_config):
    return cfgmod.device_from_config(bundled_config)


@pytest.fixture(scope="session")
def pump(bundled_config):
    return cfgmod.pump_from_config(bundled_config)


@pytest.fixture(scope="session")
def unfiltered_jsa(bundled_config, device, pump):
    """Full-resolution unfiltered joint amplitude from the bundled config."""
    grid = cfgmod.grid_from_config(bundled_config)
    return build_jsa(device, pump, grid,
                     cfgmod.approximation_from_config(bundled_config))


@pytest.fixture(scope="session")
def unfiltered_schmidt(unfiltered_jsa):
    return decompose(unfiltered_jsa)


@pytest.fixture(scope="session")
def doubling_overlap_pair(bundled_config, device, pump, unfiltered_jsa):
    """Unfiltered |O| at the configured resolution and with the step halved."""
    from twinpdc import spectral_overlap

    grid = cfgmod.grid_from_config(bundled_config)
    doubled = build_jsa(device, pump,
                        FrequencyGrid.square(2 * grid.n_s - 1, grid.span_s),
                        cfgmod.approximation_from_config(bundled_config))
    return abs(spectral_overlap(unfiltered_jsa)), abs(spectral_overlap(doubled))


@pytest.fixture(scope="session")
def filter_base_jsa(bundled_config, device, pump):
    """Mid-resolution amplitude on the filtered-study span (cheap SVDs)."""
    grid = FrequencyGrid.square(1024, cfgmod.grid_from_config(
        bundled_config, filtered=True).span_s)
    return build_jsa(device, pump, grid,
                     cfgmod.approximation_from_config(bundled_config))


def gaussian_mode(nu, center, width):
    """Normalized Gaussian mode function on a discrete axis."""
    g = np.exp(-((nu - center) / width) ** 2)
    return g / np.sqrt(np.sum(np.abs(g) ** 2) * (nu[1] - nu[0]))


def separable_jsa(n=128, span=5.0, width_s=1.0, width_i=1.0, center_s=0.0,
                  center_i=0.0):
    """Rank-1 product Gaussian amplitude, normalized on its grid."""
    from twinpdc import JointAmplitude

    grid = FrequencyGrid.square(n, span)
    gs = gaussian_mode(grid.axis_signal, center_s, width_s)
    gi = gaussian_mode(grid.axis_idler, center_i, width_i)
    values = np.outer(gs, gi).astype(complex)
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * grid.step_signal * grid.step_idler)
    return JointAmplitude(grid=grid, values=values / norm, normalized=True)
