"""Transfer-operator tests: pointwise action, Ulam matrices, invariant
densities, spectra, and iterate-norm series.

Linear full-branch maps with dyadic/triadic breakpoints are grid-exact,
so several oracles here hold to rounding error rather than O(1/n).
"""

import numpy as np
import pytest

import pwexpand
from pwexpand import transfer
from pwexpand.errors import ConfigError
from pwexpand.grid import GridFunction, project


# ---------------------------------------------------------------- apply_fp

def test_apply_fp_preserves_constant_one_exactly(tripling):
    f = GridFunction(n=729, values=np.ones(729))
    out = transfer.apply_fp(tripling, f)
    # 1/3 + 1/3 + 1/3 rounds to exactly 1.0, cell by cell
    assert np.all(out.values == 1.0)


def test_apply_fp_linear_pullback(tripling):
    # P x = ((x/3) + (x+1)/3 + (x+2)/3) / 3 = (x + 1) / 3
    n = 243
    out = transfer.apply_fp(tripling, project(pwexpand.parse("x"), n))
    expect = project(pwexpand.parse("(x + 1)/3"), n)
    assert np.max(np.abs(out.values - expect.values)) <= 2.0 / n


def test_apply_fp_preserves_integral(tripling, tent, nonlinear):
    f_expr = pwexpand.parse("exp(x)*sin(3*x) + 2")
    for pmap, tol_scale in [(tripling, 1e-9), (tent, 1e-9), (nonlinear, 0.05)]:
        for n in (256, 1024):
            f = project(f_expr, n)
            g = transfer.apply_fp(pmap, f)
            assert abs(g.integral() - f.integral()) <= tol_scale / n


def test_apply_fp_positivity(markov, nonlinear):
    rng = np.random.default_rng(5)
    f = GridFunction(n=512, values=rng.random(512))
    for pmap in (markov, nonlinear):
        out = transfer.apply_fp(pmap, f)
        assert np.all(out.values >= 0.0)


def test_apply_fp_composes_like_the_composed_map(doubling):
    # doubling twice is the quadrupling map; both are grid-exact on a
    # dyadic grid, so the two routes agree to rounding error
    quadrupling = pwexpand.make_map(
        [{"lo": k / 4, "hi": (k + 1) / 4, "formula": f"4*x - {k}",
          "min_slope": 4.0, "holder_constant": 0.0} for k in range(4)],
        epsilon=1.0)
    n = 1024
    f = project(pwexpand.parse("sin(2*pi*x) + x"), n)
    twice = transfer.apply_fp_power(doubling, f, 2)
    once = transfer.apply_fp(quadrupling, f)
    assert np.max(np.abs(twice.values - once.values)) <= 1e-10


# ------------------------------------------------------------- ulam_matrix

def test_ulam_doubling_two_bins(doubling):
    mat = transfer.ulam_matrix(doubling, 2).matrix.toarray()
    assert np.max(np.abs(mat - 0.5)) <= 1e-15


def test_ulam_tripling_three_bins(tripling):
    mat = transfer.ulam_matrix(tripling, 3).matrix.toarray()
    assert np.max(np.abs(mat - 1.0 / 3.0)) <= 1e-15


def test_ulam_markov_three_bins(markov):
    # bin [0,1/3): branch 0 maps it linearly onto [0,1/2) -> (2/3, 1/3, 0)
    # bin [1/3,2/3): onto [1/2,1) -> (0, 1/3, 2/3)
    # bin [2/3,1): branch 1 onto [0,2/3) -> (1/2, 1/2, 0)
    mat = transfer.ulam_matrix(markov, 3).matrix.toarray()
    expect = np.array([[2 / 3, 1 / 3, 0.0],
                       [0.0, 1 / 3, 2 / 3],
                       [1 / 2, 1 / 2, 0.0]])
    assert np.max(np.abs(mat - expect)) <= 1e-12


def test_ulam_row_is_pushforward_frequency(markov):
    # row 0 is the distribution of tau(x) for x uniform in bin 0; the bin
    # sits inside branch 0, so tau(x) = 1.5 x can be sampled directly
    mat = transfer.ulam_matrix(markov, 3).matrix.toarray()
    rng = np.random.default_rng(42)
    xs = rng.random(10 ** 6) / 3.0
    ys = 1.5 * xs
    freq = np.bincount(np.minimum((ys * 3).astype(int), 2), minlength=3) / 1e6
    # 3 sigma for a Bernoulli frequency at 10^6 samples
    sigma = np.sqrt(np.maximum(mat[0] * (1 - mat[0]), 0.25 / 9) / 1e6)
    assert np.all(np.abs(freq - mat[0]) <= 3.0 * sigma)


def test_ulam_rows_stochastic(tripling, doubling, tent, markov, nonlinear,
                              threshold_map):
    for pmap in (tripling, doubling, tent, markov, nonlinear, threshold_map):
        for n in (37, 64, 300):
            mat = transfer.ulam_matrix(pmap, n).matrix
            sums = np.asarray(mat.sum(axis=1)).ravel()
            assert np.max(np.abs(sums - 1.0)) <= 1e-12
            dense = mat.toarray()
            assert dense.min() >= -1e-15
            assert dense.max() <= 1.0 + 1e-15


def test_ulam_row_support_is_a_few_intervals(markov, nonlinear):
    # a bin maps onto at most branch_count intervals, so each row's
    # nonzero columns form at most branch_count (+2 for edge cells) runs
    for pmap in (markov, nonlinear):
        dense = transfer.ulam_matrix(pmap, 64).matrix.toarray()
        for row in dense:
            nz = row > 0
            runs = int(np.sum(nz[1:] & ~nz[:-1])) + int(nz[0])
            assert runs <= pmap.branch_count + 2


def test_ulam_rejects_tiny_grid(tripling):
    with pytest.raises(ConfigError):
        transfer.ulam_matrix(tripling, 1)


# ------------------------------------------------------- invariant_density

def test_invariant_density_tripling_uniform(tripling):
    h = transfer.invariant_density(transfer.ulam_matrix(tripling, 243))
    assert np.max(np.abs(h.values - 1.0)) <= 1e-10


def test_invariant_density_doubling_uniform(doubling):
    h = transfer.invariant_density(transfer.ulam_matrix(doubling, 64))
    assert np.max(np.abs(h.values - 1.0)) <= 1e-10


def test_invariant_density_markov_exact(markov):
    # the invariant density is piecewise constant: 9/8 on [0,2/3),
    # 3/4 on [2/3,1); n = 300 puts a cell edge exactly at 2/3
    h = transfer.invariant_density(transfer.ulam_matrix(markov, 300))
    assert np.max(np.abs(h.values[:200] - 9 / 8)) <= 1e-10
    assert np.max(np.abs(h.values[200:] - 3 / 4)) <= 1e-10
    assert abs(h.integral() - 1.0) <= 1e-12


def test_invariant_density_absorbing_support(absorbing):
    # mass drains into [0,1/2]; density is 2 on the left half, 0 on the right
    h = transfer.invariant_density(transfer.ulam_matrix(absorbing, 128))
    assert np.max(np.abs(h.values[:64] - 2.0)) <= 1e-8
    assert np.max(h.values[64:]) <= 1e-8


def test_invariant_density_convergence_error_carries_residual(markov):
    op = transfer.ulam_matrix(markov, 300)
    with pytest.raises(transfer.ConvergenceError) as exc:
        transfer.invariant_density(op, tol=1e-13, max_iters=2)
    assert exc.value.residual > 0.0


# ---------------------------------------------------------------- spectrum

def test_spectrum_markov_three_bins(markov):
    # the 3x3 matrix has eigenvalues 1, 1/3, -1/3 (exact arithmetic)
    rep = transfer.spectrum(transfer.ulam_matrix(markov, 3), 3)
    assert abs(rep.eigenvalues[0] - 1.0) <= 1e-12
    rest = sorted(rep.eigenvalues[1:], key=lambda z: z.real)
    assert abs(rest[0] + 1 / 3) <= 1e-12
    assert abs(rest[1] - 1 / 3) <= 1e-12
    assert rep.unit_multiplicity == 1
    assert abs(rep.spectral_gap - 2 / 3) <= 1e-12
    expect_h = np.array([9 / 8, 9 / 8, 3 / 4])
    assert np.max(np.abs(rep.invariant_density.values - expect_h)) <= 1e-10


def test_spectrum_tripling_has_a_large_gap(tripling):
    # the exact-arithmetic matrix at n = 3^4 is "averaging + nilpotent":
    # everything below the unit eigenvalue is numerically ~0
    rep = transfer.spectrum(transfer.ulam_matrix(tripling, 81), 4)
    assert rep.unit_multiplicity == 1
    assert abs(rep.eigenvalues[1]) <= 0.05
    assert rep.spectral_gap >= 0.95


def test_spectrum_matches_dense_eigvals(doubling):
    op = transfer.ulam_matrix(doubling, 64)
    rep = transfer.spectrum(op, 6)
    oracle = np.linalg.eigvals(op.matrix.toarray().T)
    oracle = oracle[np.argsort(-np.abs(oracle), kind="stable")][:6]
    assert np.max(np.abs(np.abs(rep.eigenvalues) - np.abs(oracle))) <= 1e-10


def test_spectrum_block_map_double_unit_eigenvalue(block_map):
    # two ergodic components -> unit eigenvalue of multiplicity 2; the
    # averaged density is still the (bistochastic) uniform one
    rep = transfer.spectrum(transfer.ulam_matrix(block_map, 64), 6)
    assert rep.unit_multiplicity == 2
    assert rep.spectral_gap >= 0.9
    assert np.max(np.abs(rep.invariant_density.values - 1.0)) <= 1e-12


def test_spectrum_iterative_path_above_dense_limit(markov):
    n = transfer.DENSE_EIG_LIMIT + 404
    rep = transfer.spectrum(transfer.ulam_matrix(markov, n), 5)
    assert abs(abs(rep.eigenvalues[0]) - 1.0) <= 1e-8
    assert rep.unit_multiplicity == 1
    assert 0.3 <= rep.spectral_gap <= 0.45


def test_spectrum_rejects_k_below_two(tripling):
    with pytest.raises(ConfigError):
        transfer.spectrum(transfer.ulam_matrix(tripling, 9), 1)


# ------------------------------------------------------ iterate_norm_series

def test_iterates_of_constant_stay_at_the_bound_floor(tripling):
    f = GridFunction(n=243, values=np.ones(243))
    series = transfer.iterate_norm_series(tripling, f, p=1.0, A=0.125,
                                          n_max=10)
    assert np.all(series.norms == 1.0)
    assert series.l1_initial == 1.0
    assert abs(series.C - 10.0) <= 1e-12
    assert np.all(series.flags)
    assert series.n0 == 0


def test_iterates_of_indicator_collapse_to_its_mean(tripling):
    # P maps the indicator of [0,1/3) to the constant 1/3 in one step
    n = 243
    f = GridFunction(n=n, values=np.where(np.arange(n) < 81, 1.0, 0.0))
    series = transfer.iterate_norm_series(tripling, f, p=1.0, A=0.125,
                                          n_max=12)
    assert series.norms[0] > 2.0  # ~ 1/3 + var ~ 2.33
    assert np.max(np.abs(series.norms[1:] - 1 / 3)) <= 1e-9
    assert series.bound == pytest.approx(10.0 / 3.0, abs=1e-9)
    assert np.all(series.flags)
    assert series.n0 == 0


def test_iterates_without_contraction_still_report_norms(markov):
    # slope 3/2 fails the admissibility condition at every p, so there is
    # no bound -- but the norms themselves stay modest and decay
    f = project(pwexpand.parse("sin(2*pi*x) + 0.3*cos(4*pi*x)"), 1024)
    series = transfer.iterate_norm_series(markov, f, p=1.0, A=0.125,
                                          n_max=50)
    assert series.C is None
    assert series.bound is None
    assert series.flags is None
    assert series.n0 is None
    assert series.norms.max() < 50.0
    assert series.norms[-1] < 0.01
