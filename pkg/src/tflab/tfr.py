"""Time-frequency shifts, short-time Fourier transform and tau-Wigner distributions."""

from dataclasses import dataclass

import numpy as np

from ._validation import TFLabError, check_tau
from .grid import (
    PhaseSpaceField,
    SampledSignal,
    _check_same_grid,
    dft,
    dilate,
    evaluate,
    fractional_shift,
    reflect,
    spectrum,
)


@dataclass(frozen=True)
class TFPoint:
    x: float
    w: float

    def __sub__(self, other):
        return TFPoint(self.x - other.x, self.w - other.w)


def _as_point(z):
    if isinstance(z, TFPoint):
        return z
    x, w = z
    return TFPoint(float(x), float(w))


def tf_shift(f, z):
    """pi(z) f = M_w T_x f."""
    z = _as_point(z)
    shifted = fractional_shift(f, z.x) if z.x != 0 else f.copy()
    if z.w != 0:
        shifted.samples = shifted.samples * np.exp(2j * np.pi * z.w * f.grid.x)
    return shifted


def translation_table(g):
    """Rows ``G[m, j] = g(x_j - x_m)`` (circular)."""
    n = g.grid.n
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None] + n // 2) % n
    return g.samples[idx]


def stft(f, g):
    """V_g f on the full grid: ``values[m, k] = <f, pi(x_m, w_k) g>``."""
    _check_same_grid(f, g)
    if not np.any(g.samples):
        raise TFLabError("STFT window must be nonzero")
    products = f.samples[None, :] * np.conj(translation_table(g))
    return PhaseSpaceField(f.grid, spectrum(products, f.grid, axis=1))


def stft_at(f, g, x, w):
    """V_g f at arbitrary points (x, w), window evaluated by interpolation."""
    _check_same_grid(f, g)
    grid = f.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    shifted = evaluate(g, grid.x[None, :] - x[:, None])
    phase = np.exp(-2j * np.pi * w[:, None] * grid.x[None, :])
    return grid.dx * np.sum(f.samples[None, :] * np.conj(shifted) * phase, axis=1)


def _shift_matrix(f, offsets, scale):
    """Interpolated samples ``f(offsets[m] + scale * t_j)`` as an (m, j) array."""
    grid = f.grid
    coeffs = spectrum(f.samples, grid)
    shifted = coeffs[None, :] * np.exp(2j * np.pi * np.multiply.outer(offsets, grid.w))
    if scale == 1.0:
        return grid.dw * np.fft.fftshift(
            np.fft.ifft(np.fft.ifftshift(shifted, axes=1), axis=1), axes=1
        ) * grid.n
    synth = np.exp(2j * np.pi * scale * np.multiply.outer(grid.w, grid.x))
    return grid.dw * (shifted @ synth)


def tau_wigner(f, g, tau):
    """Cross tau-Wigner distribution W_tau(f, g) on the full grid.

    ``values[m, k] = dx sum_j exp(-2 pi i t_j w_k) f(x_m + tau t_j) conj(g(x_m - (1 - tau) t_j))``
    with off-grid values from trigonometric interpolation.  For tau in {0, 1}
    the Rihaczek closed forms are returned.
    """
    tau = check_tau(tau)
    _check_same_grid(f, g)
    grid = f.grid
    x, w = grid.x, grid.w
    if tau == 0.0:
        ghat = dft(g).samples
        vals = np.exp(-2j * np.pi * np.outer(x, w)) * f.samples[:, None] * np.conj(ghat)[None, :]
        return PhaseSpaceField(grid, vals)
    if tau == 1.0:
        fhat = dft(f).samples
        vals = np.exp(2j * np.pi * np.outer(x, w)) * np.conj(g.samples)[:, None] * fhat[None, :]
        return PhaseSpaceField(grid, vals)
    fx = _shift_matrix(f, x, tau)
    gx = _shift_matrix(g, x, -(1.0 - tau))
    products = fx * np.conj(gx)
    return PhaseSpaceField(grid, spectrum(products, grid, axis=1))


def tau_wigner_direct(f, g, tau, x, w):
    """Defining sum of W_tau(f, g) at arbitrary points; slow reference path."""
    tau = check_tau(tau)
    grid = f.grid
    t = grid.x
    out = np.empty(len(x), dtype=complex)
    for i, (xi, wi) in enumerate(zip(x, w)):
        fv = evaluate(f, xi + tau * t)
        gv = evaluate(g, xi - (1.0 - tau) * t)
        out[i] = grid.dx * np.sum(np.exp(-2j * np.pi * t * wi) * fv * np.conj(gv))
    return out


def time_dilation_window(g, tau):
    """A_tau g(t) = g(((tau - 1)/tau) t)."""
    tau = check_tau(tau, open_interval=True)
    c = (tau - 1.0) / tau
    if c == -1.0:
        return reflect(g)
    return dilate(g, c, warn=False)


def _default_probes(grid, tau):
    """Grid points whose mapped STFT arguments stay inside the resolved band."""
    x, w = grid.x, grid.w
    xmax = grid.L / 4.0
    wmax = grid.n * grid.dw / 4.0
    if tau != 0.5:
        wmax = wmax / 2.0
    xs = np.flatnonzero(np.abs(x / (1.0 - tau)) <= xmax)
    ws = np.flatnonzero(np.abs(w / tau) <= wmax)
    mm, kk = np.meshgrid(xs, ws, indexing="ij")
    return mm.ravel(), kk.ravel()


def check_wigner_stft_relation(f, g, tau, probes=None):
    """Max |W_tau(f,g) - tau^-1 e^{2 pi i w x / tau} V_{A_tau g} f(x/(1-tau), w/tau)|.

    ``probes`` is a pair of index arrays into the grid.  At tau = 1/2 the
    mapped points are grid points and the STFT is read from the full field;
    otherwise it is evaluated off-grid with an interpolated window.
    """
    tau = check_tau(tau, open_interval=True)
    _check_same_grid(f, g)
    grid = f.grid
    if probes is None:
        probes = _default_probes(grid, tau)
    mi, ki = (np.asarray(p, dtype=int) for p in probes)
    if mi.size == 0:
        raise TFLabError("empty probe set")
    if not np.any(f.samples):
        return 0.0
    lhs = tau_wigner(f, g, tau).values[mi, ki]
    x, w = grid.x[mi], grid.w[ki]
    if tau == 0.5:
        n = grid.n
        tm = 2 * (mi - n // 2) + n // 2
        tk = 2 * (ki - n // 2) + n // 2
        if np.any((tm < 0) | (tm >= n) | (tk < 0) | (tk >= n)):
            raise TFLabError("probe maps outside the grid at tau = 1/2")
        vals = stft(f, reflect(g)).values[tm, tk]
    else:
        vals = _dilated_stft_at(f, g, tau, x / (1.0 - tau), w / tau)
    rhs = np.exp(2j * np.pi * w * x / tau) * vals / tau
    return float(np.max(np.abs(lhs - rhs)))


def _dilated_stft_at(f, g, tau, px, pw):
    """V_{A_tau g} f at off-grid points, evaluating g at c (t - px) directly."""
    grid = f.grid
    c = (tau - 1.0) / tau
    t = grid.x
    out = np.empty(len(px), dtype=complex)
    for i, (a, b) in enumerate(zip(px, pw)):
        window = evaluate(g, c * (t - a), periodic=abs(c) < 1)
        out[i] = grid.dx * np.sum(f.samples * np.conj(window) * np.exp(-2j * np.pi * t * b))
    return out


def roll_field(field, dm, dk):
    """Field shifted by a grid vector: result(m, k) = field(m - dm, k - dk)."""
    return PhaseSpaceField(field.grid, np.roll(field.values, (dm, dk), axis=(0, 1)))


def phase_space_energy(field):
    return float(np.sum(np.abs(field.values) ** 2) * field.cell)

