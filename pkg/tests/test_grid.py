import math
import warnings

import numpy as np
import pytest

from tflab._validation import TFLabError
from tflab.grid import (
    AliasingWarning,
    SampledSignal,
    box,
    dft,
    dilate,
    evaluate,
    fractional_shift,
    gaussian,
    idft,
    inner,
    make_grid,
    norm,
    random_signal,
    reflect,
)


def brute_dft(f):
    grid = f.grid
    phase = np.exp(-2j * np.pi * np.outer(grid.w, grid.x))
    return grid.dx * phase @ f.samples


def test_grid_geometry():
    grid = make_grid(64)
    assert grid.L == 8.0
    assert grid.dx == pytest.approx(0.125)
    assert grid.dw == pytest.approx(0.125)
    assert grid.x[grid.origin] == 0.0
    assert grid.x[0] == pytest.approx(-4.0)
    np.testing.assert_allclose(np.diff(grid.x), grid.dx)


def test_explicit_period():
    grid = make_grid(32, 4.0)
    assert grid.dx == pytest.approx(0.125)
    assert grid.dw == pytest.approx(0.25)


@pytest.mark.parametrize("n", [0, 3, 12, 100, 4.5])
def test_rejects_bad_sizes(n):
    with pytest.raises(TFLabError):
        make_grid(n)


def test_dft_matches_direct_sum():
    grid = make_grid(32)
    f = random_signal(grid, np.random.default_rng(1))
    np.testing.assert_allclose(dft(f).samples, brute_dft(f), atol=1e-13)


def test_dft_roundtrip_and_plancherel():
    grid = make_grid(64)
    f = random_signal(grid, np.random.default_rng(2))
    F = dft(f)
    np.testing.assert_allclose(idft(F).samples, f.samples, atol=1e-13)
    assert norm(F) == pytest.approx(norm(f), rel=1e-13)


def test_gaussian_is_unit_norm_and_self_dual(g0_64):
    assert norm(g0_64) == pytest.approx(1.0, abs=1e-13)
    np.testing.assert_allclose(dft(g0_64).samples, g0_64.samples, atol=1e-13)


def test_modulated_gaussian_moves_spectrum(grid64):
    f = gaussian(grid64, center=0.0, freq=1.0)
    peak = grid64.w[np.argmax(np.abs(dft(f).samples))]
    assert peak == pytest.approx(1.0)


def test_inner_product_is_conjugate_linear_in_second_slot(grid64, g0_64):
    f = gaussian(grid64, 0.5)
    assert inner(f, g0_64.scaled(2j)) == pytest.approx(-2j * inner(f, g0_64))


def test_box_unit_norm(grid16):
    b = box(grid16, 4)
    assert norm(b) == pytest.approx(1.0)
    assert np.count_nonzero(b.samples) == 4
    with pytest.raises(TFLabError):
        box(grid16, 0)


def test_evaluate_reproduces_samples(grid64):
    f = random_signal(grid64, np.random.default_rng(3), bandlimit=2.0)
    np.testing.assert_allclose(evaluate(f, grid64.x), f.samples, atol=1e-12)


def test_integer_shift_is_roll(grid64):
    f = random_signal(grid64, np.random.default_rng(4))
    shifted = fractional_shift(f, 3 * grid64.dx)
    np.testing.assert_allclose(shifted.samples, np.roll(f.samples, 3), atol=1e-12)


def test_fractional_shift_of_gaussian(grid64, g0_64):
    s = 0.3
    expected = gaussian(grid64, center=s)
    np.testing.assert_allclose(fractional_shift(g0_64, s).samples, expected.samples, atol=1e-10)


def test_reflect_is_involution(grid64):
    f = random_signal(grid64, np.random.default_rng(5))
    np.testing.assert_allclose(reflect(reflect(f)).samples, f.samples)
    g = gaussian(grid64, 0.7)
    np.testing.assert_allclose(reflect(g).samples, gaussian(grid64, -0.7).samples, atol=1e-14)


def test_dilate_gaussian(grid64, g0_64):
    # g0(x / 2) is sqrt(2) times the unit-norm Gaussian of width 2
    out = dilate(g0_64, 0.5, warn=False)
    expected = math.sqrt(2.0) * gaussian(grid64, width=2.0).samples
    np.testing.assert_allclose(out.samples, expected, atol=1e-10)


def test_dilate_warns_on_wraparound(grid64):
    wide = gaussian(grid64, width=2.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dilate(wide, 0.5)
    assert any(issubclass(w.category, AliasingWarning) for w in caught)


def test_random_signal_is_seeded(grid64):
    a = random_signal(grid64, np.random.default_rng(9))
    b = random_signal(grid64, np.random.default_rng(9))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert norm(a) == pytest.approx(1.0)


def test_signal_rejects_wrong_length(grid16):
    with pytest.raises(TFLabError):
        SampledSignal(grid16, np.ones(8))
    with pytest.raises(TFLabError):
        SampledSignal(grid16, np.full(16, math.nan))
