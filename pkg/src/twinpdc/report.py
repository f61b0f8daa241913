"""End-to-end verification report on the bundled (or a user) configuration.

Chains the joint-amplitude build, overlap evaluations, Schmidt decomposition,
visibility identities, estimator Monte Carlo and the fit round trip, checking
every headline number against its tolerance band.  Used by the `report` CLI
command; the test suite performs the same checks independently.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from .dispersion import pm_tilt_deviation
from .jsa import FrequencyGrid, apply_filter, build_jsa, fwhm, jsi_linewidth, marginals
from .montecarlo import (SimConfig, efficiency_sweep, equal_mode_spectrum,
                         extrapolate_zero_power, simulate)
from .schmidt import (decompose, delay_compensated_overlap, gain_for_mean_n,
                      schmidt_spectral_overlap, spectral_overlap)
from .twinstats import (DetectionSpec, mean_n_from_cross, visibility_approx,
                        visibility_full)
from .fit import fit_overlap, points_from_arrays
from .units import angular_to_thz, thz_to_wavelength_nm

ESTIMATOR_MEAN_N = (0.1, 0.25, 0.5)
ESTIMATOR_ETA = (0.02, 0.03, 0.04)
ESTIMATOR_MODES = (1, 4, 20)
SWEEP_MEAN_N = (0.05, 0.1, 0.15, 0.2, 0.3, 0.4)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    low: float
    high: float

    @property
    def passed(self) -> bool:
        return self.low <= self.value <= self.high

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: {self.value:.6g} "
                f"(allowed {self.low:g} .. {self.high:g})")


def _marginal_geometry(device, jsa_obj):
    """Widths (nm) and band centers (nm) of the two marginals."""
    sig, idl = marginals(jsa_obj)
    out = []
    f_deg = angular_to_thz(device.pump_center) / 2.0
    for axis, dens in ((jsa_obj.grid.axis_signal, sig), (jsa_obj.grid.axis_idler, idl)):
        width, center = fwhm(axis, dens)
        f_lo = f_deg + angular_to_thz(center - width / 2.0)
        f_hi = f_deg + angular_to_thz(center + width / 2.0)
        width_nm = thz_to_wavelength_nm(f_lo) - thz_to_wavelength_nm(f_hi)
        center_nm = thz_to_wavelength_nm(f_deg + angular_to_thz(center))
        out.append((width_nm, center_nm))
    return out


def run_report(cfg, include_montecarlo=True, mc_seed=None, progress=None):
    """Evaluate all verification checks; returns a list of CheckResult."""
    def note(msg):
        if progress is not None:
            progress(msg)

    checks = []
    device = cfgmod.device_from_config(cfg)
    pump = cfgmod.pump_from_config(cfg)
    approx = cfgmod.approximation_from_config(cfg)
    lam_deg = device.degeneracy_wavelength_nm

    checks.append(CheckResult("phasematching tilt deviation (deg)",
                              pm_tilt_deviation(device), 0.4, 0.6))

    note("building unfiltered joint amplitude")
    grid = cfgmod.grid_from_config(cfg)
    unfiltered = build_jsa(device, pump, grid, approx)

    o_plain = abs(spectral_overlap(unfiltered))
    checks.append(CheckResult("unfiltered spectral overlap |O|", o_plain, 0.24, 0.28))

    note("grid-doubling convergence")
    doubled = build_jsa(device, pump,
                        FrequencyGrid.square(2 * grid.n_s - 1, grid.span_s), approx)
    checks.append(CheckResult("overlap change under grid doubling",
                              abs(abs(spectral_overlap(doubled)) - o_plain),
                              0.0, 0.003))
    del doubled

    note("delay-compensated overlap")
    span = 3.0 * abs(device.group_delay_ps())
    _, o_comp = delay_compensated_overlap(unfiltered, (-span, span))
    checks.append(CheckResult("delay-compensated overlap", o_comp, 0.74, 0.78))

    lw = jsi_linewidth(unfiltered, "antidiagonal")
    lw_nm = angular_to_thz(lw) * lam_deg**2 / 299792.458
    checks.append(CheckResult("anti-diagonal linewidth (nm)", lw_nm, 0.5, 0.7))
    lw_diag = jsi_linewidth(unfiltered, "diagonal")
    checks.append(CheckResult("diagonal/anti-diagonal width ratio",
                              lw_diag / lw, 100.0, math.inf))

    (w_s, c_s), (w_i, c_i) = _marginal_geometry(device, unfiltered)
    checks.append(CheckResult("signal marginal width (nm)", w_s, 80.0, 100.0))
    checks.append(CheckResult("idler marginal width (nm)", w_i, 80.0, 100.0))
    checks.append(CheckResult("signal marginal center (nm)", c_s, 1564.0, 1570.0))
    checks.append(CheckResult("idler marginal center (nm)", c_i, 1532.0, 1538.0))

    note("filtered overlaps")
    fgrid = cfgmod.grid_from_config(cfg, filtered=True)
    filtered_jsa = build_jsa(device, pump, fgrid, approx)
    g12, _ = apply_filter(filtered_jsa, cfgmod.filter_preset("g12", device, cfg))
    checks.append(CheckResult("12 nm Gaussian overlap", abs(spectral_overlap(g12)),
                              0.96, 1.0))
    sg40, _ = apply_filter(filtered_jsa, cfgmod.filter_preset("sg40", device, cfg))
    checks.append(CheckResult("40 nm flat-top overlap", abs(spectral_overlap(sg40)),
                              0.81, 0.85))
    del g12, sg40, filtered_jsa

    note("Schmidt decomposition of the unfiltered amplitude")
    sd = decompose(unfiltered)
    checks.append(CheckResult("effective mode number K", sd.mode_number, 10.0, math.inf))
    checks.append(CheckResult("grid vs Schmidt-basis overlap difference",
                              abs(abs(schmidt_spectral_overlap(sd)) - o_plain),
                              0.0, 1e-3))
    del sd, unfiltered

    note("visibility identities")
    ov, nn = np.meshgrid(np.linspace(0, 1, 100), np.linspace(0, 2, 100))
    diff = np.max(np.abs(visibility_full(ov, nn, 0.31, 0.31)
                         - visibility_approx(ov, nn)))
    checks.append(CheckResult("balanced full model vs approx (max diff)",
                              float(diff), 0.0, 1e-12))
    checks.append(CheckResult("visibility at O=0, n=0 (offset from 1/3)",
                              abs(visibility_approx(0.0, 0.0) - 1.0 / 3.0), 0.0, 0.0))
    checks.append(CheckResult("visibility at O=1, n=0 (offset from 1)",
                              abs(visibility_approx(1.0, 0.0) - 1.0), 0.0, 0.0))

    note("fit round trips")
    n_grid = np.linspace(0.05, 0.5, 12)
    exact = visibility_approx(0.95, n_grid)
    res = fit_overlap(points_from_arrays(n_grid, exact, np.full(12, 0.01)))
    checks.append(CheckResult("noiseless fit round-trip error",
                              abs(res.overlap - 0.95), 0.0, 1e-6))
    rng = np.random.default_rng(11)
    errs = []
    for target in (0.95, 0.816):
        exact = visibility_approx(target, n_grid)
        for _ in range(50):
            noisy = exact + rng.normal(0.0, 0.01, 12)
            r = fit_overlap(points_from_arrays(n_grid, noisy, np.full(12, 0.01)))
            errs.append(r.overlap - target)
    checks.append(CheckResult("noisy fit RMS error",
                              float(np.sqrt(np.mean(np.square(errs)))), 0.0, 0.01))

    if include_montecarlo:
        checks.extend(montecarlo_checks(cfg, mc_seed, note))
    return checks


def montecarlo_checks(cfg, mc_seed=None, note=lambda msg: None):
    """Estimator-oracle Monte Carlo checks (statistical, seed-pinned)."""
    checks = []
    seed = mc_seed if mc_seed is not None else int(cfg["sim"]["seed"])
    gate_rate = cfgmod.gate_rate_from_config(cfg)

    note("estimator consistency matrix (27 cells at 1e6 gates)")
    worst = 0.0
    cell = 0
    for k_modes in ESTIMATOR_MODES:
        lam = equal_mode_spectrum(k_modes)
        for mean_n in ESTIMATOR_MEAN_N:
            gain = gain_for_mean_n(mean_n, lam)
            for eta in ESTIMATOR_ETA:
                cell += 1
                det = DetectionSpec(eta1=eta, eta2=eta, gate_rate=gate_rate)
                rec = simulate(SimConfig(source=lam, gain=gain, det=det,
                                         n_gates=1_000_000, seed=seed + cell))
                est = mean_n_from_cross(rec)
                expected = 1.0 + 1.0 / k_modes + 1.0 / mean_n
                sigma = est.cross_correlation * math.sqrt(
                    1.0 / rec.coincidences + 1.0 / rec.singles_signal
                    + 1.0 / rec.singles_idler)
                worst = max(worst, abs(est.cross_correlation - expected) / sigma)
    checks.append(CheckResult("worst |C/A - (1 + 1/K + 1/n)| in sigma units",
                              worst, 0.0, 3.0))

    note("zero-power Klyshko extrapolation")
    lam = equal_mode_spectrum(20)
    det = DetectionSpec(eta1=0.060, eta2=0.056, gate_rate=gate_rate)
    base = SimConfig(source=lam, gain=1.0, det=det, n_gates=20_000_000,
                     seed=seed + 1000)
    powers = [gain_for_mean_n(n, lam) ** 2 for n in SWEEP_MEAN_N]
    points = efficiency_sweep(base, powers)
    for label, target, vals, sigs in (
            ("signal", 0.060,
             [p.corrected_signal for p in points], [p.sigma_signal for p in points]),
            ("idler", 0.056,
             [p.corrected_idler for p in points], [p.sigma_idler for p in points])):
        intercept, _, _ = extrapolate_zero_power(powers, vals, sigs)
        checks.append(CheckResult(
            f"extrapolated Klyshko efficiency error, {label} (pp)",
            abs(intercept - target) * 100.0, 0.0, 0.2))
    return checks
