"""Joint-amplitude assembly, filters, marginals and linewidths."""
import math

import numpy as np
import pytest

from twinpdc import (FilterSpec, FrequencyGrid, PumpSpec, apply_filter, build_jsa,
                     device_spec, fwhm, jsi_linewidth, marginals, pm_function,
                     pump_envelope)
from twinpdc.dispersion import delta_k
from twinpdc.errors import RangeError, ResolutionError
from twinpdc.jsa import JointAmplitude, dump_grid, load_grid
from twinpdc.units import angular_to_thz, bandwidth_nm_to_angular

from conftest import separable_jsa


def symmetric_spec(length=500.0, kappa=-2.0e-3):
    return device_spec(length_um=length, gamma=0.193, pump_center=10.0,
                       kappa_s=kappa, kappa_i=kappa)


# --- pump envelope ---------------------------------------------------------

def test_pump_envelope_peak():
    pump = PumpSpec(sigma=0.7)
    assert pump_envelope(pump, 0.3, -0.3) == pytest.approx(1.0)


def test_pump_envelope_width_point():
    pump = PumpSpec(sigma=0.7)
    assert pump_envelope(pump, 0.7, 0.0) == pytest.approx(math.exp(-1.0))


def test_pump_envelope_energy_conserving_line():
    pump = PumpSpec(sigma=0.5)
    nus = np.linspace(-30, 30, 17)
    assert np.allclose(pump_envelope(pump, nus, -nus), 1.0)


def test_pump_fwhm_conversion_measured_on_grid():
    """The nm -> sigma conversion must put the stated intensity FWHM on a grid."""
    pump = PumpSpec.from_fwhm_nm(0.25, 772.0)
    nu = np.linspace(-3, 3, 4001)
    intensity = pump_envelope(pump, nu, 0.0) ** 2
    width, _ = fwhm(nu, intensity)
    assert width == pytest.approx(bandwidth_nm_to_angular(0.25, 772.0), rel=1e-5)


# --- phasematching function ------------------------------------------------

def test_pm_function_unity_at_phasematching():
    spec = symmetric_spec()
    for approx in ("sinc", "gaussian"):
        assert pm_function(spec, 0.0, 0.0, approx) == pytest.approx(1.0 + 0.0j)


def test_pm_function_first_sinc_zero():
    spec = symmetric_spec()
    # along nu_s with nu_i = 0: L/2 * kappa_s * nu = pi at nu = ...
    nu = 2 * math.pi / (spec.length_um * spec.kappa_s)
    assert abs(pm_function(spec, nu, 0.0, "sinc")) == pytest.approx(0.0, abs=1e-12)


def test_pm_gaussian_matches_sinc_amplitude_at_half_intensity():
    """1-D scan: where sinc^2 = 1/2 the two amplitude envelopes agree to 2e-2.

    Scanning x = L dk / 2 with the quoted width factor, the half-intensity
    point of the sinc sits at x = 1.39156 where |sinc| = 0.70711 and the
    Gaussian envelope is exp(-0.193 x^2) = 0.68816, a gap of 0.0189.
    """
    spec = symmetric_spec()
    nu = np.linspace(0.0, 3.0, 200001)
    x = 0.5 * spec.length_um * delta_k(spec, nu, 0.0)
    sinc_amp = np.abs(pm_function(spec, nu, 0.0, "sinc"))
    idx = np.argmin(np.abs(sinc_amp**2 - 0.5))
    assert abs(x[idx]) == pytest.approx(1.39156, abs=1e-3)
    gauss_amp = np.abs(pm_function(spec, nu[idx], 0.0, "gaussian"))
    assert abs(gauss_amp - sinc_amp[idx]) == pytest.approx(0.0189, abs=1e-3)
    assert abs(gauss_amp - sinc_amp[idx]) < 2e-2


def test_pm_phase_equals_half_length_mismatch():
    spec = symmetric_spec()
    nus = np.linspace(-2, 2, 41)
    x = 0.5 * spec.length_um * delta_k(spec, nus, 0.5)
    for approx in ("sinc", "gaussian"):
        vals = pm_function(spec, nus, 0.5, approx)
        # the complex factor is a real envelope times exp(i x): rotating the
        # phase away must leave a real number (negative in sinc side lobes)
        assert np.max(np.abs(np.imag(vals * np.exp(-1j * x)))) < 1e-14


# --- build_jsa --------------------------------------------------------------

def test_build_symmetric_construction():
    spec = symmetric_spec()
    pump = PumpSpec(sigma=0.8)
    grid = FrequencyGrid.square(256, 4.0)
    jsa = build_jsa(spec, pump, grid)
    assert np.allclose(jsa.intensity(), jsa.intensity().T, rtol=0, atol=1e-15)


def test_build_normalization():
    spec = symmetric_spec()
    jsa = build_jsa(spec, PumpSpec(sigma=0.8), FrequencyGrid.square(200, 4.0))
    assert jsa.norm_squared() == pytest.approx(1.0, abs=1e-9)
    jsa.check_normalized()


def test_build_underresolved_grid_rejected():
    spec = symmetric_spec()
    with pytest.raises(ResolutionError):
        build_jsa(spec, PumpSpec(sigma=0.8), FrequencyGrid.square(16, 40.0))


def test_build_phase_matches_mismatch_pointwise(device, pump):
    grid = FrequencyGrid.square(128, 1.0)
    for approx in ("gaussian", "sinc"):
        jsa = build_jsa(device, pump, grid, approx)
        ns, ni = grid.meshes()
        x = 0.5 * device.length_um * delta_k(device, ns, ni)
        rotated = jsa.values * np.exp(-1j * x)
        assert np.max(np.abs(np.imag(rotated))) < 1e-12


def test_bundled_device_linewidth_and_marginals(device, pump, unfiltered_jsa):
    lam = device.degeneracy_wavelength_nm
    width = jsi_linewidth(unfiltered_jsa, "antidiagonal")
    width_nm = angular_to_thz(width) * lam**2 / 299792.458
    assert width_nm == pytest.approx(0.6, abs=0.1)

    diag = jsi_linewidth(unfiltered_jsa, "diagonal")
    assert diag / width > 100.0  # two orders of magnitude broader

    sig, idl = marginals(unfiltered_jsa)
    step = unfiltered_jsa.grid.step_idler
    assert np.sum(sig) * unfiltered_jsa.grid.step_signal == pytest.approx(1.0, abs=1e-9)
    assert np.sum(idl) * step == pytest.approx(1.0, abs=1e-9)
    for axis, dens in ((unfiltered_jsa.grid.axis_signal, sig),
                       (unfiltered_jsa.grid.axis_idler, idl)):
        w, _ = fwhm(axis, dens)
        w_nm = angular_to_thz(w) * lam**2 / 299792.458
        assert w_nm == pytest.approx(90.0, abs=10.0)


def test_marginal_centers_land_on_stated_bands(device, unfiltered_jsa):
    f_deg = angular_to_thz(device.pump_center) / 2.0
    sig, idl = marginals(unfiltered_jsa)
    _, c_s = fwhm(unfiltered_jsa.grid.axis_signal, sig)
    _, c_i = fwhm(unfiltered_jsa.grid.axis_idler, idl)
    lam_s = 299792.458 / (f_deg + angular_to_thz(c_s))
    lam_i = 299792.458 / (f_deg + angular_to_thz(c_i))
    assert lam_s == pytest.approx(1567.0, abs=3.0)
    assert lam_i == pytest.approx(1535.0, abs=3.0)


# --- filters ----------------------------------------------------------------

def test_identity_rectangular_filter():
    jsa = separable_jsa()
    filt = FilterSpec(shape="rectangular", bandwidth=1e6)
    out, transmitted = apply_filter(jsa, filt)
    assert transmitted == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(out.values - jsa.values)) < 1e-12


def test_far_detuned_filter_flagged():
    jsa = separable_jsa(width_s=0.5, width_i=0.5)
    filt = FilterSpec(shape="gaussian", bandwidth=0.4, center=4.5)
    with pytest.warns(UserWarning, match="transmits only"):
        out, transmitted = apply_filter(jsa, filt)
    assert transmitted < 1e-6
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_filter_renormalizes():
    jsa = separable_jsa()
    out, transmitted = apply_filter(jsa, FilterSpec(shape="gaussian", bandwidth=1.0))
    assert 0.0 < transmitted < 1.0
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-9)


def test_filter_single_axis_only_touches_that_axis():
    jsa = separable_jsa(width_s=1.0, width_i=1.0)
    out, _ = apply_filter(jsa, FilterSpec(shape="gaussian", bandwidth=1.0,
                                          applies_to="signal"))
    sig0, idl0 = marginals(jsa)
    sig1, idl1 = marginals(out)
    w0, _ = fwhm(jsa.grid.axis_signal, sig0)
    w1, _ = fwhm(out.grid.axis_signal, sig1)
    assert w1 < 0.8 * w0
    wi0, _ = fwhm(jsa.grid.axis_idler, idl0)
    wi1, _ = fwhm(out.grid.axis_idler, idl1)
    assert wi1 == pytest.approx(wi0, rel=1e-9)  # untouched axis


def test_supergaussian_amplitude_fwhm_convention():
    for order in (1, 2, 4):
        filt = FilterSpec(shape="supergaussian" if order > 1 else "gaussian",
                          bandwidth=2.0, order=order)
        # intensity = amplitude^2 falls to 1/2 exactly at +- bandwidth/2
        assert filt.amplitude(1.0) ** 2 == pytest.approx(0.5, rel=1e-12)
        assert filt.amplitude(-1.0) ** 2 == pytest.approx(0.5, rel=1e-12)


def test_too_narrow_filter_rejected():
    jsa = separable_jsa(n=64)
    step = jsa.grid.step_signal
    with pytest.raises(ResolutionError):
        apply_filter(jsa, FilterSpec(shape="gaussian", bandwidth=1.5 * step))


# --- marginals / linewidth helpers ------------------------------------------

def test_separable_marginal_width_matches_construction():
    width = 1.3
    jsa = separable_jsa(n=256, span=6.0, width_s=width, width_i=width)
    sig, _ = marginals(jsa)
    w, _ = fwhm(jsa.grid.axis_signal, sig)
    # intensity of exp(-(nu/w)^2) has FWHM w*sqrt(2 ln 2)
    assert w == pytest.approx(width * math.sqrt(2 * math.log(2)),
                              abs=jsa.grid.step_signal)


def test_fwhm_raises_without_crossing():
    x = np.linspace(0, 1, 64)
    with pytest.raises(RangeError):
        fwhm(x, np.ones_like(x))


def test_linewidth_arc_length_definition():
    # an isotropic Gaussian has the same cut width in any direction, and the
    # radial parameterization makes it the 1-D intensity FWHM
    width = 0.9
    jsa = separable_jsa(n=512, span=5.0, width_s=width, width_i=width)
    expected = width * math.sqrt(2 * math.log(2))
    for axis in ("antidiagonal", "diagonal"):
        assert jsi_linewidth(jsa, axis) == pytest.approx(expected, abs=0.02)


# --- grid dump roundtrip -----------------------------------------------------

def test_dump_and_load_roundtrip(tmp_path):
    jsa = separable_jsa(n=32, span=3.0)
    path = tmp_path / "grid.txt"
    dump_grid(jsa, path, header_lines=["roundtrip test"])
    back = load_grid(path)
    assert back.grid == jsa.grid
    assert back.normalized
    assert np.allclose(back.values, jsa.values, rtol=0, atol=1e-16)


def test_grid_convergence_of_overlap(doubling_overlap_pair):
    """Doubling the resolution moves the unfiltered overlap by < 1e-3."""
    o1, o2 = doubling_overlap_pair
    assert abs(o1 - o2) < 1e-3
