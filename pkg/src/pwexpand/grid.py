"""Piecewise-constant functions on a uniform grid over [0,1], with the
oscillation profiles, L^q oscillation norms, and generalized variations
that make up the bounded-variation machinery.

Conventions:
  * cell k covers [k/n, (k+1)/n) and carries one value;
  * integrals are cell averages (mean of values);
  * a cell belongs to the window S_r(x) iff its midpoint does, so the
    window around cell k is the index range |j - k| <= ceil(r*n) - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr, kernels
from .errors import ConfigError

#: geometric spacing of the radius grid used to approximate sup over r
RADIUS_RATIO = 1.2

#: default radius cap
DEFAULT_A = 0.125


@dataclass(frozen=True, eq=False)
class GridFunction:
    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.n < 2:
            raise ConfigError(f"grid needs at least 2 cells, got {self.n}")
        if vals.shape != (self.n,):
            raise ConfigError(
                f"expected {self.n} cell values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ConfigError("grid values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        return cls(n=len(values), values=values)

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) / self.n

    def integral(self) -> float:
        return float(np.mean(self.values))

    def norm_lq(self, lq: float) -> float:
        """L^q norm on [0,1] in mean-power form; lq=inf gives the sup norm."""
        if math.isinf(lq):
            return float(np.max(np.abs(self.values)))
        return float(np.mean(np.abs(self.values) ** lq) ** (1.0 / lq))


@dataclass(frozen=True, eq=False)
class VariationReport:
    lq_exponent: float
    p: float
    A: float
    radii: np.ndarray
    variation: float
    lq_norm: float
    bv_norm: float
    argmax_radius: float


def project(e, n: int) -> GridFunction:
    """Cell averages of an expression, by 3-point Gauss–Legendre per cell
    (exact through degree 5, so linear and quadratic tests are exact)."""
    if n < 2:
        raise ConfigError(f"grid needs at least 2 cells, got {n}")
    mids = (np.arange(n) + 0.5) / n
    delta = math.sqrt(0.6) / (2.0 * n)
    left = expr.evaluate(e, mids - delta)
    center = expr.evaluate(e, mids)
    right = expr.evaluate(e, mids + delta)
    return GridFunction(n=n, values=(5.0 * left + 8.0 * center + 5.0 * right) / 18.0)


def window_half_width(r: float, n: int) -> int:
    """Cells j with |j-k| <= half have midpoints within distance < r of
    cell k's midpoint; half = ceil(r*n) - 1 realizes the open window."""
    return max(int(math.ceil(r * n)) - 1, 0)


def _osc_values(values: np.ndarray, half: int) -> np.ndarray:
    if half <= 0:
        return np.zeros_like(values)
    lo, hi = kernels.sliding_minmax(values, half)
    return hi - lo


def osc_profile(f: GridFunction, r: float) -> GridFunction:
    """Oscillation (sup - inf) of f over the radius-r window at each cell."""
    if not (0.0 < r <= 1.0):
        raise ConfigError(f"radius must lie in (0,1], got {r}")
    return GridFunction(n=f.n, values=_osc_values(f.values, window_half_width(r, f.n)))


def osc_q(f: GridFunction, r: float, lq: float) -> float:
    """L^lq norm of the oscillation profile at radius r."""
    if not math.isinf(lq) and lq < 1:
        raise ConfigError(f"lq must be >= 1 or inf, got {lq}")
    return osc_profile(f, r).norm_lq(lq)


def radius_grid(n: int, A: float, radii_count=None) -> np.ndarray:
    """Geometric radii from one cell width up to A (ratio about 1.2 unless
    an explicit count is requested)."""
    r_min = 1.0 / n
    if A <= r_min:
        return np.array([A])
    if radii_count is None:
        radii_count = max(4, int(math.ceil(math.log(A * n) / math.log(RADIUS_RATIO))) + 1)
    return np.geomspace(r_min, A, radii_count)


def variation(f: GridFunction, lq: float, p: float, A: float = DEFAULT_A,
              radii_count=None) -> VariationReport:
    """Generalized variation: sup over 0 < r <= A of osc_q(f,r)/r^(1/p),
    approximated by a max over a geometric radius grid."""
    if not (0.0 < A <= 1.0):
        raise ConfigError(f"A must lie in (0,1], got {A}")
    if radii_count is not None and radii_count < 4:
        raise ConfigError(f"radii_count must be at least 4, got {radii_count}")
    if p < 1:
        raise ConfigError(f"p must be at least 1, got {p}")
    if not math.isinf(lq) and lq < 1:
        raise ConfigError(f"lq must be >= 1 or inf, got {lq}")

    radii = radius_grid(f.n, A, radii_count)
    best = -1.0
    best_r = radii[0]
    inf_q = math.isinf(lq)
    for r in radii:
        prof = _osc_values(f.values, window_half_width(r, f.n))
        if inf_q:
            nrm = float(np.max(prof))
        else:
            nrm = float(np.mean(prof ** lq) ** (1.0 / lq))
        ratio = nrm / r ** (1.0 / p)
        if ratio > best:
            best = ratio
            best_r = float(r)
    lq_norm = f.norm_lq(lq)
    return VariationReport(
        lq_exponent=lq, p=p, A=A, radii=radii,
        variation=best, lq_norm=lq_norm, bv_norm=best + lq_norm,
        argmax_radius=best_r)
