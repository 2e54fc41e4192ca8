"""Lorenz-system pipeline: integrate, extract successive z-maxima, build
the "next maximum of z" return map, and fit a two-branch piecewise model
over the cusp.

The fitted map is deliberately NOT fed into the contraction analysis
automatically — its Hölder exponent is a statistical estimate, so the CLI
prints a config the user may pass on explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ToolError
from .maps import make_map


class IntegrationError(ToolError):
    """Trajectory blew up (non-finite state)."""


class InsufficientDataError(ToolError):
    """Too few samples or maxima to continue the pipeline."""


class DegenerateRangeError(ToolError):
    """All maxima coincide; the return interval has zero length."""


class FitError(ToolError):
    """Piecewise fit is impossible on the given data."""


@dataclass(frozen=True)
class LorenzConfig:
    sigma: float = 10.0
    rho: float = 28.0
    beta_param: float = 8.0 / 3.0
    x0: float = 1.0
    y0: float = 1.0
    z0: float = 1.0
    dt: float = 0.001
    t_max: float = 2000.0
    transient: float = 50.0

    def __post_init__(self):
        if not (0.0 < self.dt <= 0.01):
            raise ConfigError(
                f"dt must lie in (0, 0.01], got {self.dt}")
        if self.t_max <= self.transient:
            raise ConfigError(
                f"t_max ({self.t_max}) must exceed the transient "
                f"({self.transient})")


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    xyz: np.ndarray  # shape (len(t), 3)

    @property
    def z(self) -> np.ndarray:
        return self.xyz[:, 2]


@dataclass(frozen=True, eq=False)
class ReturnMapData:
    maxima: np.ndarray
    pairs: np.ndarray             # (z_k, z_{k+1}) rows
    normalized_pairs: np.ndarray  # affinely rescaled into [0,1]^2
    cusp_estimate: float          # abscissa of the peak ordinate
    z_min: float
    z_max: float


@dataclass(frozen=True, eq=False)
class FitDiagnostics:
    branch_domains: tuple
    point_counts: tuple
    residual_rms: tuple
    min_abs_slope_central: tuple  # min |fit'| over the central 80%
    holder_estimates: tuple
    holder_exponent: float
    caveat: str = ("Hölder exponent is estimated from second differences of "
                   "scattered data; treat it as indicative, not as a verdict.")


def integrate(config: LorenzConfig) -> Trajectory:
    """Fixed-step RK4 trajectory, with the transient dropped.

    Deterministic: identical configs give bitwise-identical output.
    """
    nsteps = int(round(config.t_max / config.dt))
    state = np.array([config.x0, config.y0, config.z0])
    out = kernels.lorenz_rk4(state, config.sigma, config.rho,
                             config.beta_param, config.dt, nsteps)
    if not np.all(np.isfinite(out)):
        first = int(np.argmax(~np.isfinite(out).all(axis=1)))
        raise IntegrationError(
            f"state became non-finite at t = {first * config.dt:g}")
    t = np.arange(nsteps + 1) * config.dt
    keep = int(np.searchsorted(t, config.transient - 1e-12))
    return Trajectory(t=t[keep:], xyz=out[keep:])


def extract_z_maxima(traj: Trajectory) -> np.ndarray:
    """Interior local maxima of z, each refined by the quadratic through
    its three samples (the parabola peak of (a, b, c) is b - S²/(8Q) with
    S = c - a and Q = a - 2b + c)."""
    z = traj.z
    if len(z) < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {len(z)}")
    left, mid, right = z[:-2], z[1:-1], z[2:]
    is_max = (left < mid) & (mid >= right)
    S = right - left
    Q = left - 2.0 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        refined = np.where(Q < 0.0, mid - S * S / (8.0 * Q), mid)
    maxima = refined[is_max]
    if len(maxima) < 2:
        raise InsufficientDataError(
            f"found {len(maxima)} z-maxima; need at least 2 for a return map")
    return maxima


def build_return_map(maxima: np.ndarray) -> ReturnMapData:
    """Pairs (z_k, z_{k+1}) with their affine normalization to [0,1]²."""
    maxima = np.asarray(maxima, dtype=float)
    if len(maxima) < 3:
        raise InsufficientDataError(
            f"need at least 3 maxima, got {len(maxima)}")
    z_min = float(np.min(maxima))
    z_max = float(np.max(maxima))
    if z_max - z_min < 1e-12:
        raise DegenerateRangeError(
            f"maxima are all {z_min:g}; cannot normalize a zero-length range")
    pairs = np.column_stack([maxima[:-1], maxima[1:]])
    normalized = (pairs - z_min) / (z_max - z_min)
    cusp = float(normalized[np.argmax(normalized[:, 1]), 0])
    return ReturnMapData(maxima=maxima, pairs=pairs,
                         normalized_pairs=normalized,
                         cusp_estimate=cusp, z_min=z_min, z_max=z_max)


def _poly_formula(coeffs: np.ndarray) -> str:
    """Ascending-order coefficients to an expression string; the unary
    minus keeps negative coefficients parseable mid-sum."""
    terms = []
    for k, c in enumerate(coeffs):
        if k == 0:
            terms.append(f"{c:.17g}")
        elif k == 1:
            terms.append(f"{c:.17g}*x")
        else:
            terms.append(f"{c:.17g}*x^{k}")
    return " + ".join(terms)


def _second_difference_exponent(xs: np.ndarray, ys: np.ndarray) -> float:
    """Heuristic derivative-Hölder exponent of scattered graph data:
    resample to a uniform grid, measure mean |y(x+h) - 2y(x) + y(x-h)| at
    dyadic lags, and read the exponent off the log-log slope minus 1."""
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    grid_n = 257
    gx = np.linspace(xs[0], xs[-1], grid_n)
    gy = np.interp(gx, xs, ys)
    step = gx[1] - gx[0]
    lags, means = [], []
    for lag in (2, 4, 8, 16, 32):
        if 2 * lag >= grid_n:
            break
        d2 = np.abs(gy[2 * lag:] - 2.0 * gy[lag:-lag] + gy[:-2 * lag])
        m = float(np.mean(d2))
        if m > 0:
            lags.append(lag * step)
            means.append(m)
    if len(lags) < 3:
        return 1.0
    slope = np.polyfit(np.log(lags), np.log(means), 1)[0]
    return float(min(max(slope - 1.0, 0.05), 1.0))


def fit_piecewise(data: ReturnMapData, degree: int):
    """Two least-squares polynomial branches split at the cusp.

    Returns (map, diagnostics); the map is built leniently and may well
    fail validation (slopes dip below 1 near the cusp) — that is reported,
    not hidden.
    """
    pts = data.normalized_pairs
    if len(pts) < 100:
        raise ConfigError(
            f"need at least 100 normalized pairs to fit, got {len(pts)}")
    if not (1 <= degree <= 6):
        raise ConfigError(f"degree must lie in [1, 6], got {degree}")
    cusp = data.cusp_estimate
    xs, ys = pts[:, 0], pts[:, 1]
    masks = (xs <= cusp, xs > cusp)
    domains = ((0.0, cusp), (cusp, 1.0))
    specs = []
    counts, rms_list, slopes, holders = [], [], [], []
    for (lo, hi), mask in zip(domains, masks):
        bx, by = xs[mask], ys[mask]
        if len(bx) < 10:
            raise FitError(
                f"branch on [{lo:.4g}, {hi:.4g}] has only {len(bx)} points "
                "(needs 10); the two-branch cusp model does not fit this data")
        coeffs = np.polynomial.polynomial.polyfit(bx, by, degree)
        fit_vals = np.polynomial.polynomial.polyval(bx, coeffs)
        rms = float(np.sqrt(np.mean((fit_vals - by) ** 2)))
        dcoeffs = np.polynomial.polynomial.polyder(coeffs)
        width = hi - lo
        central = np.linspace(lo + 0.1 * width, hi - 0.1 * width, 201)
        deriv = np.polynomial.polynomial.polyval(central, dcoeffs)
        specs.append({"lo": lo, "hi": hi, "formula": _poly_formula(coeffs)})
        counts.append(len(bx))
        rms_list.append(rms)
        slopes.append(float(np.min(np.abs(deriv))))
        holders.append(_second_difference_exponent(bx, by))
    epsilon = min(holders)
    pmap = make_map(specs, epsilon=epsilon)
    diagnostics = FitDiagnostics(
        branch_domains=tuple(domains),
        point_counts=tuple(counts),
        residual_rms=tuple(rms_list),
        min_abs_slope_central=tuple(slopes),
        holder_estimates=tuple(holders),
        holder_exponent=epsilon)
    return pmap, diagnostics
