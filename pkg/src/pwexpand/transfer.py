"""Transfer (Frobenius–Perron) operator: pointwise action on grid
functions, exact Ulam discretization, invariant densities, and leading
spectrum.

The pointwise action at a cell midpoint x sums f(y)/|τ'(y)| over the
branch preimages y of x.  The Ulam matrix is assembled from exact interval
preimages of the bin edges, so its rows are stochastic to rounding error,
not to Monte-Carlo error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import expr
from .errors import ConfigError, ToolError
from .grid import GridFunction, variation
from .maps import PiecewiseMap, invert_branch_array


class AssemblyError(ToolError):
    """Ulam assembly failed (root finder or stochasticity check)."""


class ConvergenceError(ToolError):
    """Power iteration failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class SpectralError(ToolError):
    """Eigenvalue computation failed or produced no unit eigenvalue."""


@dataclass(frozen=True, eq=False)
class UlamOperator:
    n: int
    matrix: sp.csr_matrix  # row i, col j: m(B_i ∩ τ⁻¹B_j)/m(B_i)


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray  # complex, sorted by decreasing modulus
    unit_multiplicity: int
    spectral_gap: float
    invariant_density: GridFunction


@dataclass(frozen=True, eq=False)
class IterateSeries:
    norms: np.ndarray
    l1_initial: float
    C: object       # float, or None when no contraction constant exists
    bound: object   # C * ||f||_1, or None
    flags: object   # per-n "within bound", or None
    n0: object      # first index from which the bound always holds, or None


def _fp_stencil(pmap: PiecewiseMap, n: int):
    """Per-branch (target cells, source cells, weights) for the pointwise
    FP action on an n-cell grid; cached on the map."""
    key = ("fp", n)
    cached = pmap._cache.get(key)
    if cached is not None:
        return cached
    mids = (np.arange(n) + 0.5) / n
    stencil = []
    for br in pmap.branches:
        img = br.image
        mask = (mids >= img.lo) & (mids <= img.hi)
        cells = np.nonzero(mask)[0]
        if cells.size == 0:
            stencil.append((cells, cells, np.empty(0)))
            continue
        ys = np.clip(mids[cells], img.lo, img.hi)
        xs = invert_branch_array(br, ys)
        _, ders = expr.eval_with_derivative(br.expression, xs)
        weights = 1.0 / np.abs(ders)
        src = np.clip(np.floor(xs * n).astype(int), 0, n - 1)
        stencil.append((cells, src, weights))
    pmap._cache[key] = stencil
    return stencil


def apply_fp(pmap: PiecewiseMap, f: GridFunction) -> GridFunction:
    """One application of the transfer operator to a grid function."""
    out = np.zeros(f.n)
    for cells, src, weights in _fp_stencil(pmap, f.n):
        if cells.size:
            out[cells] += f.values[src] * weights
    return GridFunction(n=f.n, values=out)


def apply_fp_power(pmap: PiecewiseMap, f: GridFunction, n_times: int) -> GridFunction:
    for _ in range(n_times):
        f = apply_fp(pmap, f)
    return f


def ulam_matrix(pmap: PiecewiseMap, n: int) -> UlamOperator:
    """Row-stochastic Ulam discretization on n uniform bins, assembled
    from exact branch preimages of the bin edges."""
    if n < 2:
        raise ConfigError(f"need at least 2 bins, got {n}")
    edges = np.arange(n + 1) / n
    rows, cols, vals = [], [], []
    for br in pmap.branches:
        img = br.image
        lo_x = br.domain.lo if br.monotone_sign > 0 else br.domain.hi
        hi_x = br.domain.hi if br.monotone_sign > 0 else br.domain.lo
        ys = np.clip(edges, img.lo, img.hi)
        try:
            xs = invert_branch_array(br, ys)
        except ToolError as err:
            raise AssemblyError(
                f"edge inversion failed on branch {br.formula!r}: {err}") from err
        # pin clipped edges to the exact domain endpoints so that row sums
        # telescope exactly
        xs = np.where(ys == img.lo, lo_x, xs)
        xs = np.where(ys == img.hi, hi_x, xs)
        for j in range(n):
            if br.monotone_sign > 0:
                xa, xb = xs[j], xs[j + 1]
            else:
                xa, xb = xs[j + 1], xs[j]
            if xb <= xa:
                continue
            ia = min(max(int(np.floor(xa * n)), 0), n - 1)
            ib = min(max(int(np.floor(xb * n)), 0), n - 1)
            for i in range(ia, ib + 1):
                lo = max(xa, i / n)
                hi = min(xb, (i + 1) / n)
                w = (hi - lo) * n
                if w > 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(w)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    worst = float(np.max(np.abs(row_sums - 1.0)))
    if worst > 1e-12:
        bad = int(np.argmax(np.abs(row_sums - 1.0)))
        raise AssemblyError(
            f"row {bad} sums to {row_sums[bad]!r} (off by {worst:g}); "
            "branch images may not cover the bin")
    return UlamOperator(n=n, matrix=mat)


def _power_iteration(mat_t, n: int, tol: float, max_iters: int):
    """Fixed point of the density action h -> P^T h, started uniform."""
    h = np.ones(n)
    residual = np.inf
    for _ in range(max_iters):
        h2 = mat_t @ h
        mean = float(np.mean(h2))
        if mean <= 0:
            break
        h2 = h2 / mean
        residual = float(np.mean(np.abs(h2 - h)))
        h = h2
        if residual < tol:
            return h, True, residual
    return h, False, residual


def invariant_density(op: UlamOperator, tol: float = 1e-12,
                      max_iters: int = 5000) -> GridFunction:
    """Invariant density of the Ulam operator by power iteration from the
    uniform density, in the L¹ metric."""
    mat_t = op.matrix.transpose().tocsr()
    h, converged, residual = _power_iteration(mat_t, op.n, tol, max_iters)
    if not converged:
        raise ConvergenceError(
            f"power iteration stalled at L1 residual {residual:g} after "
            f"{max_iters} iterations; the unit eigenvalue may not be simple "
            "(inspect the spectrum)", residual)
    h = np.maximum(h, 0.0)
    h = h / np.mean(h)
    return GridFunction(n=op.n, values=h)


# dense eigensolve cutoff; above this only the top-k via ARPACK
DENSE_EIG_LIMIT = 4096

_UNIT_TOL = 1e-8


def spectrum(op: UlamOperator, k: int) -> SpectralReport:
    """Top-k eigenvalues by modulus, unit-circle multiplicity, spectral
    gap, and the invariant density."""
    if k < 2:
        raise ConfigError(f"need k >= 2 eigenvalues, got {k}")
    n = op.n
    if n <= DENSE_EIG_LIMIT:
        try:
            eigvals = np.linalg.eigvals(op.matrix.toarray().T)
        except np.linalg.LinAlgError as err:
            raise SpectralError(f"dense eigensolve failed: {err}") from err
        moduli = np.abs(eigvals)
        order = np.argsort(-moduli, kind="stable")
        eigvals = eigvals[order]
        moduli = moduli[order]
        unit_mult = int(np.sum(np.abs(moduli - 1.0) < _UNIT_TOL))
        top = eigvals[: min(k, n)]
    else:
        from scipy.sparse.linalg import ArpackNoConvergence, eigs

        try:
            vals = eigs(op.matrix.transpose().tocsc(), k=min(k, n - 2),
                        which="LM", return_eigenvectors=False)
        except ArpackNoConvergence as err:
            raise SpectralError(f"iterative eigensolve failed: {err}") from err
        moduli = np.abs(vals)
        order = np.argsort(-moduli, kind="stable")
        eigvals = vals[order]
        moduli = moduli[order]
        unit_mult = int(np.sum(np.abs(moduli - 1.0) < _UNIT_TOL))
        top = eigvals
    if abs(moduli[0] - 1.0) > _UNIT_TOL:
        raise SpectralError(
            f"leading eigenvalue {eigvals[0]!r} is not on the unit circle")
    below = moduli[moduli < moduli[0] - _UNIT_TOL]
    gap = float(1.0 - below[0]) if below.size else 0.0

    mat_t = op.matrix.transpose().tocsr()
    if unit_mult == 1:
        h, converged, residual = _power_iteration(mat_t, n, 1e-13, 20000)
        if not converged and residual > 1e-8:
            raise ConvergenceError(
                f"invariant density did not converge (residual {residual:g}) "
                "despite a simple unit eigenvalue", residual)
    else:
        # multiple ergodic components: average the iterates (the running
        # mean converges even when the iterates themselves cycle)
        h = np.ones(n)
        acc = np.zeros(n)
        for _ in range(2000):
            h = mat_t @ h
            h = h / float(np.mean(h))
            acc += h
        h = acc / 2000.0
    h = np.maximum(h, 0.0)
    h = h / np.mean(h)
    return SpectralReport(
        eigenvalues=top,
        unit_multiplicity=unit_mult,
        spectral_gap=gap,
        invariant_density=GridFunction(n=n, values=h))


def iterate_norm_series(pmap: PiecewiseMap, f: GridFunction, p: float,
                        A: float, n_max: int) -> IterateSeries:
    """BV norms of P^n f for n = 0..n_max, compared against the a-priori
    bound C * ||f||_1 that holds for all large n."""
    from . import analysis  # local import: analysis builds on this module

    consts = analysis.ly_constants(pmap, p=p, t=1.0, A=A)
    norms = np.empty(n_max + 1)
    g = f
    for i in range(n_max + 1):
        norms[i] = variation(g, 1.0, p, A).bv_norm
        if i < n_max:
            g = apply_fp(pmap, g)
    l1 = float(np.mean(np.abs(f.values)))
    if not consts.admissible:
        # alpha >= 1 at this A: no contraction constant, so the series is
        # reported without a bound (the norms themselves are still useful).
        return IterateSeries(norms=norms, l1_initial=l1, C=None,
                             bound=None, flags=None, n0=None)
    bound = consts.C * l1
    flags = norms <= bound + 1e-12
    n0 = None
    for i in range(n_max, -1, -1):
        if not flags[i]:
            break
        n0 = i
    return IterateSeries(norms=norms, l1_initial=l1, C=consts.C,
                         bound=bound, flags=flags, n0=n0)
