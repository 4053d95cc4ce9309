"""Periodic discretization of the real line.

Continuum objects are replaced by their periodization with period ``L``,
sampled on ``n`` centered nodes ``x_j = (j - n/2) dx``.  The discrete Fourier
transform is scaled so that it approximates

    f_hat(w) = int exp(-2 pi i x w) f(x) dx

on the centered frequency nodes ``w_k = (k - n/2) dw`` with ``dw = 1/L``.
All off-grid evaluation goes through the trigonometric (band-limited periodic)
interpolant built on these centered frequencies.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import TFLabError, check_power_of_two, check_samples


class AliasingWarning(UserWarning):
    """Signal energy reaches the edge of the period after a dilation."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    L: float

    @property
    def dx(self):
        return self.L / self.n

    @property
    def dw(self):
        return 1.0 / self.L

    @property
    def x(self):
        return (np.arange(self.n) - self.n // 2) * self.dx

    @property
    def w(self):
        return (np.arange(self.n) - self.n // 2) * self.dw

    @property
    def origin(self):
        """Index of the node at x = 0."""
        return self.n // 2

    def dual(self):
        """Grid on which the Fourier transform of a signal on this grid lives."""
        return GridSpec(self.n, self.n / self.L)


def make_grid(n, L=None):
    """Build a grid of ``n`` nodes over a period ``L`` (default ``sqrt(n)``).

    With the default period, time and frequency spacings coincide.
    """
    n = check_power_of_two(n)
    if L is None:
        L = math.sqrt(n)
    L = float(L)
    if not L > 0 or not math.isfinite(L):
        raise TFLabError(f"period L must be positive, got {L}")
    return GridSpec(n, L)


class SampledSignal:
    """Complex samples of a function on a :class:`GridSpec`."""

    __slots__ = ("grid", "samples")

    def __init__(self, grid, samples):
        self.grid = grid
        self.samples = check_samples(samples, grid.n)

    def __repr__(self):
        return f"SampledSignal(n={self.grid.n}, L={self.grid.L:g})"

    def __len__(self):
        return self.grid.n

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, np.asarray(func(grid.x), dtype=complex))

    def copy(self):
        return SampledSignal(self.grid, self.samples.copy())

    def norm(self):
        return norm(self)

    def scaled(self, c):
        return SampledSignal(self.grid, c * self.samples)

    def normalized(self):
        nrm = norm(self)
        if nrm == 0:
            raise TFLabError("cannot normalize the zero signal")
        return self.scaled(1.0 / nrm)


class PhaseSpaceField:
    """Complex values on the (x, w) grid; ``values[m, k] ~ F(x_m, w_k)``.

    Rows are time shifts, columns frequencies.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.n, grid.n):
            raise TFLabError(
                f"field must have shape {(grid.n, grid.n)}, got {values.shape}"
            )
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"PhaseSpaceField(n={self.grid.n}, L={self.grid.L:g})"

    @property
    def cell(self):
        return self.grid.dx * self.grid.dw


def inner(f, g):
    """L2 inner product <f, g> = int f conj(g), linear in the first slot."""
    _check_same_grid(f, g)
    return f.grid.dx * np.vdot(g.samples, f.samples)


def norm(f):
    return math.sqrt(f.grid.dx) * float(np.linalg.norm(f.samples))


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise TFLabError(f"grid mismatch: {f.grid} vs {g.grid}")


def _centered_fft(a, axis=-1):
    return np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis
    )


def _centered_ifft(a, axis=-1):
    return np.fft.fftshift(
        np.fft.ifft(np.fft.ifftshift(a, axes=axis), axis=axis), axes=axis
    )


def dft(f):
    """Discrete Fourier transform; the result lives on ``f.grid.dual()``."""
    grid = f.grid
    return SampledSignal(grid.dual(), grid.dx * _centered_fft(f.samples))


def idft(F):
    """Inverse of :func:`dft`."""
    grid = F.grid.dual()
    return SampledSignal(grid, _centered_ifft(F.samples) / grid.dx)


def spectrum(samples, grid, axis=-1):
    """Array form of :func:`dft` along ``axis``."""
    return grid.dx * _centered_fft(samples, axis=axis)


def inverse_spectrum(coeffs, grid, axis=-1):
    return _centered_ifft(coeffs, axis=axis) / grid.dx


def interpolation_matrix(grid, points):
    """Matrix ``E`` with ``E @ f.samples`` = trigonometric interpolant at ``points``."""
    points = np.asarray(points, dtype=float)
    x, w = grid.x, grid.w
    synth = np.exp(2j * np.pi * np.multiply.outer(points, w))
    analysis = np.exp(-2j * np.pi * np.multiply.outer(w, x))
    return (synth @ analysis) / grid.n


def evaluate(f, points, periodic=True):
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary real points.

    With ``periodic=False`` the interpolant is restricted to its principal
    period ``[-L/2, L/2)`` and extended by zero.
    """
    points = np.asarray(points, dtype=float)
    grid = f.grid
    coeffs = spectrum(f.samples, grid)
    phase = np.exp(2j * np.pi * np.multiply.outer(points, grid.w))
    vals = grid.dw * (phase @ coeffs)
    if not periodic:
        half = grid.L / 2.0
        vals = np.where((points >= -half) & (points < half), vals, 0.0)
    return vals


def fractional_shift(f, s):
    """Samples of ``t -> f(t - s)`` via a phase ramp in the frequency domain."""
    grid = f.grid
    s = float(s)
    if s == 0.0:
        return f.copy()
    ratio = s / grid.dx
    if ratio == round(ratio):
        return SampledSignal(grid, np.roll(f.samples, int(round(ratio))))
    coeffs = spectrum(f.samples, grid) * np.exp(-2j * np.pi * s * grid.w)
    return SampledSignal(grid, inverse_spectrum(coeffs, grid))


def reflect(f):
    """Samples of ``t -> f(-t)``; exact on the centered grid."""
    n = f.grid.n
    return SampledSignal(f.grid, f.samples[(-np.arange(n)) % n])


def dilate(f, c, warn=True):
    """Samples of ``t -> f(c t)`` by evaluating the interpolant at ``c x_j``.

    For ``|c| > 1`` the interpolant is taken on its principal period only.

    Emits :class:`AliasingWarning` when more than 1e-6 of the energy of the
    result sits in the outer eighth of the period.
    """
    c = float(c)
    if c == 0:
        raise TFLabError("dilation factor must be nonzero")
    if c == 1.0:
        return f.copy()
    if c == -1.0:
        return reflect(f)
    grid = f.grid
    # |c| > 1 would fold several periods into one; keep the principal period only
    out = SampledSignal(grid, evaluate(f, c * grid.x, periodic=abs(c) < 1))
    if warn:
        energy = np.abs(out.samples) ** 2
        total = energy.sum()
        edge = np.abs(grid.x) >= 7.0 * grid.L / 16.0
        if total > 0 and energy[edge].sum() > 1e-6 * total:
            warnings.warn(
                f"dilation by {c:g} leaves {energy[edge].sum() / total:.2e} of the "
                "energy in the outer eighth of the period",
                AliasingWarning,
                stacklevel=2,
            )
    return out


def gaussian(grid, center=0.0, freq=0.0, width=1.0):
    """Unit-norm Gaussian ``2^(1/4) width^(-1/2) exp(-pi ((t - center)/width)^2)``,
    modulated to ``freq``."""
    t = grid.x - center
    vals = 2 ** 0.25 / math.sqrt(width) * np.exp(-np.pi * (t / width) ** 2)
    vals = vals * np.exp(2j * np.pi * freq * grid.x)
    return SampledSignal(grid, vals)


def box(grid, width):
    """Unit-norm indicator of ``width`` consecutive samples starting at x = 0."""
    if not 1 <= width <= grid.n:
        raise TFLabError(f"box width must lie in [1, {grid.n}], got {width}")
    vals = np.zeros(grid.n, dtype=complex)
    start = grid.origin
    vals[(start + np.arange(width)) % grid.n] = 1.0
    return SampledSignal(grid, vals / math.sqrt(width * grid.dx))


def random_signal(grid, rng, bandlimit=None):
    """Seeded complex test signal; optionally band-limited and Gaussian-tapered."""
    vals = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    if bandlimit is not None:
        coeffs = spectrum(vals, grid)
        coeffs[np.abs(grid.w) > bandlimit] = 0
        vals = inverse_spectrum(coeffs, grid) * np.exp(-np.pi * (grid.x / 2.0) ** 2)
    sig = SampledSignal(grid, vals)
    return sig.normalized()
