"""Spectral-overlap extraction from visibility-vs-mean-photon-number data.

The overlap O in [0, 1] is the sole shape parameter of the balanced
visibility model V = (1 + O) / (3 - O + 4 n), so the weighted least-squares
problem reduces to bounded scalar minimization (golden section with
parabolic refinement).  The unbalanced model adds the arm-transmission ratio
as an optional second bounded parameter.  Mean photon numbers are treated as
exact abscissae; the reported standard error is statistical, from the
chi-square curvature at the minimum.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import FitConvergenceError, IllPosedError
from .twinstats import VisibilityPoint, visibility_approx, visibility_full

BOUNDARY_MARGIN = 1e-6
RATIO_BOUNDS = (0.1, 10.0)


def model_visibility(overlap, mean_n, model="approx", eta_ratio=1.0):
    """Visibility model evaluated at one or more mean photon numbers."""
    mean_n = np.asarray(mean_n, dtype=float)
    if model == "approx":
        return visibility_approx(overlap, mean_n)
    if model == "full":
        return visibility_full(overlap, mean_n, eta_ratio, 1.0)
    raise ValueError(f"unknown visibility model {model!r}")


@dataclass(frozen=True)
class FitResult:
    """Weighted fit outcome for the spectral overlap."""

    overlap: float
    sigma: float
    residuals: np.ndarray
    chi_square: float
    n_points: int
    model: str
    eta_ratio: float
    at_boundary: bool

    @property
    def reduced_chi_square(self):
        dof = max(self.n_points - 1, 1)
        return self.chi_square / dof


def _validate(points):
    if len(points) < 3:
        raise IllPosedError(f"need at least 3 points, got {len(points)}")
    n = np.array([p.mean_n for p in points])
    v = np.array([p.visibility for p in points])
    s = np.array([p.sigma for p in points])
    if np.any(s <= 0):
        raise IllPosedError("all points need sigma_V > 0 for weighting")
    if n.max() - n.min() <= 0:
        raise IllPosedError("points must span a nonzero mean-photon-number range")
    return n, v, s


def fit_overlap(points, model="approx", eta_ratio=None) -> FitResult:
    """Fit the overlap to visibility points by weighted least squares.

    Args:
        points: VisibilityPoint sequence (>= 3, spanning a mean_n range).
        model: 'approx' for the balanced formula, 'full' for the unbalanced one.
        eta_ratio: fixed transmission ratio for the full model; None fits it
            as a second bounded parameter (ignored for 'approx').

    Returns:
        FitResult with the estimate, curvature standard error, per-point
        residuals (V_i - V_model) and the boundary flag.

    Raises:
        IllPosedError: on degenerate input.
        FitConvergenceError: if the bounded minimization does not converge.
    """
    n, v, s = _validate(points)
    fit_ratio = model == "full" and eta_ratio is None
    ratio = 1.0 if eta_ratio is None else float(eta_ratio)

    def chi2(overlap, r):
        return float(np.sum(((v - model_visibility(overlap, n, model, r)) / s) ** 2))

    if fit_ratio:
        # the (overlap, ratio) surface has a long shallow valley: multi-start
        # with tight tolerances keeps the minimizer from stalling on it
        candidates = []
        for r0 in (0.5, 1.0, 2.0):
            res = minimize(lambda p: chi2(p[0], p[1]), x0=(0.8, r0),
                           bounds=[(0.0, 1.0), RATIO_BOUNDS], method="L-BFGS-B",
                           options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
            if res.success:
                candidates.append(res)
        if not candidates:
            raise FitConvergenceError("full-model fit failed from all starts",
                                      trace=[res])
        res = min(candidates, key=lambda r: r.fun)
        best, ratio = float(res.x[0]), float(res.x[1])
    else:
        res = minimize_scalar(lambda o: chi2(o, ratio), bounds=(0.0, 1.0),
                              method="bounded",
                              options={"xatol": 1e-12, "maxiter": 500})
        if not res.success:
            raise FitConvergenceError(f"overlap fit failed: {res.message}",
                                      trace=[res])
        best = float(res.x)

    # the bounded minimizer never lands exactly on a bound: snap and flag
    at_boundary = best <= BOUNDARY_MARGIN or best >= 1.0 - BOUNDARY_MARGIN
    if chi2(0.0, ratio) <= chi2(best, ratio):
        best, at_boundary = 0.0, True
    if chi2(1.0, ratio) <= chi2(best, ratio):
        best, at_boundary = 1.0, True

    sigma = _curvature_sigma(lambda o: chi2(o, ratio), best)
    residuals = v - model_visibility(best, n, model, ratio)
    return FitResult(overlap=best, sigma=sigma, residuals=residuals,
                     chi_square=chi2(best, ratio), n_points=len(points),
                     model=model, eta_ratio=ratio, at_boundary=at_boundary)


def _curvature_sigma(chi2, best, step=1e-5):
    """Standard error from the chi-square curvature, sigma^2 = 2 / chi2''.

    Uses a central difference, one-sided at the parameter bounds.
    """
    lo, hi = max(best - step, 0.0), min(best + step, 1.0)
    c0, cl, ch = chi2(best), chi2(lo), chi2(hi)
    if hi - best < step / 2:  # upper boundary: curve from two interior points
        c2 = chi2(best - 2 * step)
        second = (c0 - 2 * cl + c2) / step**2
    elif best - lo < step / 2:
        c2 = chi2(best + 2 * step)
        second = (c0 - 2 * ch + c2) / step**2
    else:
        second = (cl - 2 * c0 + ch) / step**2
    if second <= 0:
        return math.inf
    return math.sqrt(2.0 / second)


def points_from_arrays(mean_n, visibility, sigma):
    return [VisibilityPoint(float(a), float(b), float(c))
            for a, b, c in zip(mean_n, visibility, sigma)]
