import numpy as np
import pytest

from tflab._validation import PreconditionError, TFLabError
from tflab.grid import SampledSignal, gaussian, make_grid, random_signal
from tflab.ops import (
    OperatorMatrix,
    TAU_PROBES,
    check_weight_condition,
    constant_symbol,
    gaussian_mixture_corpus,
    gaussian_symbol,
    kernel_equality_check,
    localization_matrix,
    matrix_element_identity_check,
    random_grid_probes,
    relative_error,
    schur_bound,
    stft_expansion_check,
    subexp_symbol,
    tau_quantization_matrix,
    weak_form_check,
)
from tflab.spectral import singular_values
from tflab.tfr import stft, tf_shift
from tflab.weights import Const, SubExp


def quantization_oracle(sigma, tau, grid):
    """Scalar-loop kernel k(x_j, x_l) = dw sum_k sigma(x_j - tau d, w_k) e^{2 pi i d w_k},
    with d the minimal periodic image of x_j - x_l in [-L/2, L/2)."""
    n, L = grid.n, grid.L
    out = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for l in range(n):
            d = (grid.x[j] - grid.x[l] + L / 2) % L - L / 2
            total = 0j
            for w in grid.w:
                total += complex(sigma(np.array(grid.x[j] - tau * d), np.array(w))) * np.exp(2j * np.pi * d * w)
            out[j, l] = grid.dw * total
    return out


def localization_oracle(a, phi1, phi2):
    """Action matrix of f -> sum_z a(z) V_phi1 f(z) pi(z) phi2 dx dw, one column per delta."""
    grid = phi1.grid
    n = grid.n
    avals = a.sample(grid)
    cols = []
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        V = stft(SampledSignal(grid, e), phi1).values * avals
        col = np.zeros(n, dtype=complex)
        for m in range(n):
            for k in range(n):
                if V[m, k] != 0:
                    col += V[m, k] * tf_shift(phi2, (grid.x[m], grid.w[k])).samples
        cols.append(grid.dx * grid.dw * col)
    return np.array(cols).T


@pytest.mark.parametrize("tau", [0.0, 0.5, 0.75])
def test_quantization_matches_scalar_oracle(grid16, tau):
    sigma = gaussian_symbol(1.0, 0.8, 0.3, -0.2, c=0.5 + 0.5j)
    op = tau_quantization_matrix(sigma, tau, grid16)
    np.testing.assert_allclose(op.entries, quantization_oracle(sigma, tau, grid16), atol=1e-12)


def test_localization_matches_synthesis_oracle(grid16):
    phi1 = gaussian(grid16, 0.2)
    phi2 = gaussian(grid16, -0.1, 0.3, 1.2)
    a = gaussian_symbol(0.9, 1.1, 0.4, 0.1)
    op = localization_matrix(a, phi1, phi2)
    np.testing.assert_allclose(op.action_matrix(), localization_oracle(a, phi1, phi2), atol=1e-12)


def test_kernel_and_rank_one_routes_agree(grid64, g0_64):
    a = gaussian_symbol()
    phi2 = gaussian(grid64, 0.3, 0.2)
    k = localization_matrix(a, g0_64, phi2, method="kernel")
    r = localization_matrix(a, g0_64, phi2, method="rank_one")
    assert relative_error(k, r) < 1e-12


def test_constant_symbol_gives_identity(grid64, g0_64):
    op = localization_matrix(constant_symbol(1.0), g0_64, g0_64)
    assert relative_error(op, OperatorMatrix.identity(grid64)) <= 1e-10
    for tau in TAU_PROBES:
        q = tau_quantization_matrix(constant_symbol(1.0), tau, grid64)
        assert relative_error(q, OperatorMatrix.identity(grid64)) <= 1e-12


def test_identity_action(grid16):
    f = random_signal(grid16, np.random.default_rng(0))
    np.testing.assert_allclose(OperatorMatrix.identity(grid16).apply(f).samples, f.samples, atol=1e-14)


def test_operator_algebra(grid16):
    I = OperatorMatrix.identity(grid16)
    two = I + I
    assert relative_error(two - I, I) == 0.0
    assert relative_error(I * 3.0, two + I) < 1e-15
    assert I.frobenius() == pytest.approx(np.sqrt(grid16.n))


def test_weyl_adjoint_is_swapped_tau(grid64):
    sigma = gaussian_symbol(1.0, 1.2, 0.2, 0.1, c=1 + 2j)
    lhs = tau_quantization_matrix(sigma, 0.25, grid64).adjoint()
    conj = gaussian_symbol(1.0, 1.2, 0.2, 0.1, c=1 - 2j)
    rhs = tau_quantization_matrix(conj, 0.75, grid64)
    assert relative_error(lhs, rhs) < 1e-12


def test_real_weyl_symbol_gives_hermitian(grid64):
    # needs a kernel that is negligible at the unpaired lag -L/2; a smooth symbol has that
    op = tau_quantization_matrix(gaussian_symbol(0.8, 1.2, 0.3, -0.4), 0.5, grid64)
    assert relative_error(op.adjoint(), op) < 1e-13


def test_rough_symbol_hermitian_defect_is_from_the_lag_edge(grid64):
    # e^{-(|x|+|w|)} has a kernel decaying like 1/d^2, so the lag -L/2 sample matters
    coarse = tau_quantization_matrix(subexp_symbol(1.0), 0.5, grid64)
    wide = tau_quantization_matrix(subexp_symbol(1.0), 0.5, make_grid(64, 16.0))
    assert relative_error(wide.adjoint(), wide) < relative_error(coarse.adjoint(), coarse)


def test_weyl_gaussian_top_singular_value(grid64):
    # regression from the first verified build; the exact value is 2/3
    s = singular_values(tau_quantization_matrix(gaussian_symbol(), 0.5, grid64)).s
    assert s[0] == pytest.approx(2 / 3, rel=1e-10)
    assert s[1] == pytest.approx(2 / 9, rel=1e-9)


def test_kernel_equality(g0_64):
    rep = kernel_equality_check(gaussian_symbol(), g0_64, g0_64)
    assert rep["max_rel_error"] <= 1e-6
    assert set(rep["errors"]) == set(TAU_PROBES)


@pytest.mark.parametrize("tau", TAU_PROBES)
def test_weak_form(grid64, tau):
    f = gaussian(grid64, 0.3, -0.2)
    g = gaussian(grid64, -0.4, 0.1, 1.2)
    assert weak_form_check(gaussian_symbol(1.0, 0.9, 0.1), f, g, tau) <= 1e-8


@pytest.mark.parametrize("tau", TAU_PROBES)
def test_matrix_element_identity(grid64, g0_64, tau):
    probes = random_grid_probes(grid64, 10, seed=1)
    assert matrix_element_identity_check(gaussian_symbol(), g0_64, tau, probes) <= 1e-6


@pytest.mark.parametrize("tau", TAU_PROBES)
def test_stft_expansion(grid64, g0_64, tau):
    f = random_signal(grid64, np.random.default_rng(2), bandlimit=2.0)
    assert stft_expansion_check(gaussian_symbol(), tau, f, g0_64) <= 1e-8


def test_stft_expansion_needs_unit_window(grid64, g0_64):
    with pytest.raises(PreconditionError):
        stft_expansion_check(gaussian_symbol(), 0.5, g0_64, g0_64.scaled(2.0))


def test_schur_bound_regressions(grid64):
    # gram-route values frozen from the first verified build
    assert schur_bound(gaussian_symbol(), tau=0.5, grid=grid64) == pytest.approx(4 / 3, rel=1e-9)
    assert schur_bound(gaussian_symbol(), tau=0.0, grid=grid64) == pytest.approx(1.29099, rel=1e-5)


def test_schur_routes_agree(grid64):
    sigma = gaussian_symbol()
    gram = schur_bound(sigma, tau=0.5, grid=grid64, route="gram")
    sym = schur_bound(sigma, tau=0.5, grid=grid64, route="symbol")
    assert abs(gram - sym) / gram <= 1e-3


def test_schur_dominates_operator_norm(grid64):
    for sym in gaussian_mixture_corpus(grid64, count=4, seed=3):
        bound = schur_bound(sym, tau=0.25, grid=grid64)
        assert singular_values(tau_quantization_matrix(sym, 0.25, grid64)).s[0] <= bound


def test_schur_weight_condition_failure(grid64):
    with pytest.raises(PreconditionError):
        check_weight_condition(Const(1.0, dim=4), Const(1.0, dim=2), SubExp(1.0, 5.0, dim=2), 0.5, grid64)


def test_weighted_schur_bound(grid64):
    # m2 / m1 = e^{-|w|/2} <= 1 = m0 holds pointwise
    m1 = SubExp(1.0, 0.5, dim=2)
    bound = schur_bound(gaussian_symbol(), m0=Const(1.0, dim=4), m1=m1, m2=Const(1.0, dim=2),
                        tau=0.5, grid=grid64)
    assert bound == pytest.approx(4 / 3, rel=1e-9)


def test_corpus_is_seeded(grid64):
    a = gaussian_mixture_corpus(grid64, 3, seed=4)
    b = gaussian_mixture_corpus(grid64, 3, seed=4)
    for s, t in zip(a, b):
        np.testing.assert_array_equal(s.sample(grid64), t.sample(grid64))


def test_window_grid_mismatch():
    with pytest.raises(TFLabError):
        localization_matrix(gaussian_symbol(), gaussian(make_grid(16)), gaussian(make_grid(32)))
