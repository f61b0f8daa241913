"""Joint spectral amplitude on a detuning grid.

The normalized complex amplitude of a photon pair is assembled as

    f(nu_s, nu_i) = pump(nu_s + nu_i) * pm(nu_s, nu_i) / N

with a Gaussian pump envelope exp(-(nu_s + nu_i)^2 / sigma^2), a
phasematching factor sinc(L dk / 2) exp(i L dk / 2) (or its Gaussian
approximation exp(-gamma L^2 dk^2 / 4) with the same phase), and N fixed by
the discrete normalization sum |f|^2 dnu_s dnu_i = 1.

Everything operates on detunings from the mode carriers; absolute axes are
reconstructed only for display.  All transforms are pure and return new
values.
"""
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .dispersion import DeviceSpec, delta_k
from .errors import ConfigError, GridShapeError, RangeError, ResolutionError
from .units import bandwidth_nm_to_angular

NORMALIZATION_TOL = 1e-9

# minimum number of grid steps across the narrowest intensity feature
MIN_POINTS_PER_WIDTH = 8

# half-max factor for sinc^2: sinc(x)^2 = 1/2 at x = X_HALF_SINC_SQ
X_HALF_SINC_SQ = 1.3915573


@dataclass(frozen=True)
class PumpSpec:
    """Pump envelope exp(-(nu/sigma)^2) with sigma the 1/e field half-width in rad/ps."""

    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("pump sigma must be positive")

    @classmethod
    def from_fwhm_nm(cls, fwhm_nm, center_nm):
        """Build from the intensity FWHM of the pump spectrum in wavelength.

        The intensity |exp(-(nu/sigma)^2)|^2 has angular-frequency FWHM
        sigma * sqrt(2 ln 2); invert that after converting nm to rad/ps.
        """
        dw = bandwidth_nm_to_angular(fwhm_nm, center_nm)
        return cls(sigma=dw / math.sqrt(2.0 * math.log(2.0)))

    @property
    def intensity_fwhm(self) -> float:
        """Angular-frequency intensity FWHM in rad/ps."""
        return self.sigma * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform detuning grid centered on (0, 0), spans are half-widths in rad/ps."""

    n_s: int
    n_i: int
    span_s: float
    span_i: float

    def __post_init__(self):
        if self.n_s < 2 or self.n_i < 2:
            raise ConfigError("grid needs at least 2 points per axis")
        if self.span_s <= 0 or self.span_i <= 0:
            raise ConfigError("grid spans must be positive")

    @classmethod
    def square(cls, n, span):
        return cls(n, n, span, span)

    @property
    def axis_signal(self):
        return np.linspace(-self.span_s, self.span_s, self.n_s)

    @property
    def axis_idler(self):
        return np.linspace(-self.span_i, self.span_i, self.n_i)

    @property
    def step_signal(self):
        return 2.0 * self.span_s / (self.n_s - 1)

    @property
    def step_idler(self):
        return 2.0 * self.span_i / (self.n_i - 1)

    @property
    def is_square(self):
        return self.n_s == self.n_i and self.span_s == self.span_i

    def meshes(self):
        """Signal/idler detuning meshes with 'ij' indexing (rows = signal)."""
        return np.meshgrid(self.axis_signal, self.axis_idler, indexing="ij")


@dataclass(frozen=True)
class FilterSpec:
    """Band-pass filter acting on one or both detuning axes.

    bandwidth is the intensity FWHM in rad/ps; the amplitude transmission is
    the square root of the intensity profile.  Shapes: 'gaussian',
    'supergaussian' (flat-top of the given order), 'rectangular'.
    """

    shape: str
    bandwidth: float
    center: float = 0.0
    order: int = 4
    applies_to: str = "both"

    def __post_init__(self):
        if self.shape not in ("gaussian", "supergaussian", "rectangular"):
            raise ConfigError(f"unknown filter shape {self.shape!r}")
        if self.bandwidth <= 0:
            raise ConfigError("filter bandwidth must be positive")
        if self.order < 1:
            raise ConfigError("supergaussian order must be >= 1")
        if self.applies_to not in ("signal", "idler", "both"):
            raise ConfigError(f"invalid applies_to {self.applies_to!r}")

    def amplitude(self, nu):
        """Amplitude transmission at detuning nu (sqrt of the intensity profile)."""
        u = 2.0 * (np.asarray(nu, dtype=float) - self.center) / self.bandwidth
        if self.shape == "rectangular":
            return np.where(np.abs(u) <= 1.0, 1.0, 0.0)
        m = 1 if self.shape == "gaussian" else self.order
        return np.exp(-0.5 * math.log(2.0) * np.abs(u) ** (2 * m))


@dataclass(frozen=True)
class JointAmplitude:
    """Complex joint amplitude sampled on a FrequencyGrid (rows = signal axis)."""

    grid: FrequencyGrid
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        if self.values.shape != (self.grid.n_s, self.grid.n_i):
            raise GridShapeError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_s}, {self.grid.n_i})"
            )

    def intensity(self):
        return np.abs(self.values) ** 2

    @property
    def cell_area(self):
        return self.grid.step_signal * self.grid.step_idler

    def norm_squared(self) -> float:
        """Discrete norm sum |f|^2 dnu_s dnu_i."""
        return float(np.sum(self.intensity()) * self.cell_area)

    def check_normalized(self, tol=NORMALIZATION_TOL):
        err = abs(self.norm_squared() - 1.0)
        if err > tol:
            raise ValueError(f"normalization off by {err:.2e}")


def pump_envelope(pump: PumpSpec, nu_s, nu_i):
    """Pump amplitude exp(-(nu_s + nu_i)^2 / sigma^2); real, positive, <= 1."""
    s = np.asarray(nu_s) + np.asarray(nu_i)
    return np.exp(-((s / pump.sigma) ** 2))


def pm_function(spec: DeviceSpec, nu_s, nu_i, approximation="sinc"):
    """Complex phasematching factor.

    'sinc' returns sinc(L dk / 2) exp(i L dk / 2); 'gaussian' replaces the
    real envelope with exp(-gamma (L dk / 2)^2) of matched amplitude FWHM,
    keeping the identical phase factor.  Equals 1 at dk = 0.
    """
    x = 0.5 * spec.length_um * delta_k(spec, nu_s, nu_i)
    if approximation == "sinc":
        env = np.sinc(x / np.pi)  # np.sinc(z) = sin(pi z)/(pi z)
    elif approximation == "gaussian":
        env = np.exp(-spec.gamma * x**2)
    else:
        raise ConfigError(f"unknown phasematching approximation {approximation!r}")
    return env * np.exp(1j * x)


def _principal_widths(spec: DeviceSpec, pump: PumpSpec):
    """Per-axis intensity FWHMs of the two principal features (pump, PM)."""
    pump_width = pump.intensity_fwhm
    # sinc^2 half-width in dk maps to a per-axis detuning width via kappa
    dk_fwhm = 4.0 * X_HALF_SINC_SQ / spec.length_um
    pm_widths = [dk_fwhm / abs(k) for k in (spec.kappa_s, spec.kappa_i) if k != 0]
    return pump_width, min(pm_widths) if pm_widths else math.inf


def build_jsa(spec: DeviceSpec, pump: PumpSpec, grid: FrequencyGrid,
              approximation="sinc") -> JointAmplitude:
    """Assemble the normalized joint spectral amplitude on the grid.

    The amplitude carries the full complex phase exp(i L dk / 2).

    Raises:
        ResolutionError: if the grid resolves the narrower of the pump and
            phasematching intensity widths with fewer than 8 steps.
    """
    pump_width, pm_width = _principal_widths(spec, pump)
    narrow = min(pump_width, pm_width)
    step = max(grid.step_signal, grid.step_idler)
    if narrow / step < MIN_POINTS_PER_WIDTH:
        raise ResolutionError(
            f"grid step {step:.4g} rad/ps resolves the narrowest feature "
            f"({narrow:.4g} rad/ps) with {narrow / step:.1f} < "
            f"{MIN_POINTS_PER_WIDTH} points; refine the grid or shrink the span"
        )
    nu_s, nu_i = grid.meshes()
    values = pump_envelope(pump, nu_s, nu_i) * pm_function(spec, nu_s, nu_i, approximation)
    norm = math.sqrt(np.sum(np.abs(values) ** 2) * grid.step_signal * grid.step_idler)
    return JointAmplitude(grid=grid, values=values / norm, normalized=True)


def apply_filter(jsa: JointAmplitude, filt: FilterSpec):
    """Apply a band-pass filter and renormalize.

    Returns:
        (filtered JointAmplitude, transmitted fraction), the fraction being
        the pre-renormalization intensity transmission (heralding-relevant).

    Raises:
        ResolutionError: if the filter bandwidth spans fewer than 2 grid steps.
    """
    jsa.check_normalized()
    if filt.bandwidth < 2.0 * max(jsa.grid.step_signal, jsa.grid.step_idler):
        raise ResolutionError(
            f"filter bandwidth {filt.bandwidth:.4g} rad/ps narrower than two "
            "grid steps; refine the grid"
        )
    values = jsa.values
    if filt.applies_to in ("signal", "both"):
        values = values * filt.amplitude(jsa.grid.axis_signal)[:, None]
    if filt.applies_to in ("idler", "both"):
        values = values * filt.amplitude(jsa.grid.axis_idler)[None, :]
    transmitted = float(np.sum(np.abs(values) ** 2) * jsa.cell_area)
    if transmitted < 1e-6:
        warnings.warn(
            f"filter transmits only {transmitted:.2e} of the intensity; "
            "renormalized output is dominated by numerical tails",
            stacklevel=2,
        )
    out = JointAmplitude(grid=jsa.grid, values=values / math.sqrt(transmitted),
                         normalized=True)
    return out, transmitted


def marginals(jsa: JointAmplitude):
    """Signal and idler marginal intensity densities, each integrating to 1."""
    inten = jsa.intensity()
    sig = inten.sum(axis=1) * jsa.grid.step_idler
    idl = inten.sum(axis=0) * jsa.grid.step_signal
    return sig, idl


def fwhm(x, y):
    """Full width at half maximum of a sampled profile, linearly interpolated.

    Returns:
        (width, center) where center is the midpoint of the half-max crossings.

    Raises:
        RangeError: if the profile does not cross half maximum inside the range.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    half = y.max() / 2.0
    above = np.flatnonzero(y >= half)
    if above.size == 0:
        raise RangeError("profile has no points above half maximum")
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(y) - 1:
        raise RangeError("half-maximum crossing falls outside the sampled range")
    left = x[lo - 1] + (half - y[lo - 1]) * (x[lo] - x[lo - 1]) / (y[lo] - y[lo - 1])
    right = x[hi] + (half - y[hi]) * (x[hi + 1] - x[hi]) / (y[hi + 1] - y[hi])
    return right - left, 0.5 * (left + right)


def jsi_linewidth(jsa: JointAmplitude, axis="antidiagonal") -> float:
    """Intensity FWHM of the JSI along a cut through the grid center.

    The 'antidiagonal' cut runs along nu_s = nu_i (across the spectrally
    anti-correlated ridge), the 'diagonal' cut along nu_s = -nu_i (along the
    ridge).  The profile is parameterized by the signed Euclidean distance
    from the center in the detuning plane, so the returned width is a length
    in rad/ps measured in the 2-D frequency plane.
    """
    if not jsa.grid.is_square:
        raise GridShapeError("linewidth cuts require a square grid")
    n = jsa.grid.n_s
    inten = jsa.intensity()
    if axis == "antidiagonal":
        profile = np.diagonal(inten)
    elif axis == "diagonal":
        profile = inten[np.arange(n), n - 1 - np.arange(n)]
    else:
        raise ConfigError(f"unknown cut axis {axis!r}")
    t = jsa.grid.axis_signal * math.sqrt(2.0)
    width, _ = fwhm(t, profile)
    return width


def dump_grid(jsa: JointAmplitude, path, header_lines=()):
    """Write the amplitude as a text header plus row-major 're im' pairs."""
    g = jsa.grid
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(f"# n_s={g.n_s} n_i={g.n_i} span_s={g.span_s!r} span_i={g.span_i!r}\n")
        fh.write(f"# normalized={jsa.normalized}\n")
        fh.write("# units: detuning rad/ps, amplitude (rad/ps)^-1; "
                 "row-major over (signal, idler); one 're im' pair per line\n")
        for val in jsa.values.ravel():
            fh.write(f"{val.real:.17g} {val.imag:.17g}\n")


def load_grid(path) -> JointAmplitude:
    """Read an amplitude written by dump_grid."""
    meta = {}
    data = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, _, v = tok.partition("=")
                        meta[k] = v
                continue
            re_, im_ = line.split()
            data.append(complex(float(re_), float(im_)))
    try:
        grid = FrequencyGrid(int(meta["n_s"]), int(meta["n_i"]),
                             float(meta["span_s"]), float(meta["span_i"]))
    except KeyError as exc:
        raise ConfigError(f"grid dump missing header field {exc}") from exc
    values = np.array(data, dtype=complex).reshape(grid.n_s, grid.n_i)
    return JointAmplitude(grid=grid, values=values,
                          normalized=meta.get("normalized") == "True")
