"""Gabor systems on separable lattices, frames, dual windows and mixed norms."""

import math
import re
from dataclasses import dataclass

import numpy as np

from ._validation import PreconditionError, TFLabError, check_exponent
from .grid import SampledSignal, _check_same_grid
from .ops import OperatorMatrix
from .spectral import jacobi_eigh
from .tfr import stft
from .weights import Product, Reciprocal, Restrict, Tensor, WeightSpec, is_trivial


class FrameError(PreconditionError):
    """The frame operator is numerically singular."""

    def __init__(self, message, min_eig, max_eig):
        super().__init__(message)
        self.min_eig = min_eig
        self.max_eig = max_eig


@dataclass(frozen=True)
class Lattice:
    """Separable lattice ``alpha Z x beta Z`` with alpha = a_step dx, beta = b_step dw.

    Lattice nodes are the grid indices congruent to the origin node modulo the
    stride, so the origin is always a lattice point.
    """

    a_step: int
    b_step: int
    grid: object

    def __post_init__(self):
        n = self.grid.n
        for name, step in (("a_step", self.a_step), ("b_step", self.b_step)):
            if step < 1 or n % step:
                raise TFLabError(f"{name} = {step} must be a positive divisor of n = {n}")

    @property
    def alpha(self):
        return self.a_step * self.grid.dx

    @property
    def beta(self):
        return self.b_step * self.grid.dw

    @property
    def redundancy(self):
        return self.grid.n / (self.a_step * self.b_step)

    @property
    def time_indices(self):
        n = self.grid.n
        idx = np.arange(n)
        return idx[(idx - n // 2) % self.a_step == 0]

    @property
    def freq_indices(self):
        n = self.grid.n
        idx = np.arange(n)
        return idx[(idx - n // 2) % self.b_step == 0]

    @property
    def shape(self):
        return (self.grid.n // self.a_step, self.grid.n // self.b_step)

    def points(self):
        """Array of shape (rows, cols, 2) with the (x, w) coordinates of each node."""
        xs = self.grid.x[self.time_indices]
        ws = self.grid.w[self.freq_indices]
        return np.stack(np.meshgrid(xs, ws, indexing="ij"), axis=-1)


def lattice_from_physical(grid, alpha, beta):
    """Lattice with spacings ``alpha`` (time) and ``beta`` (frequency) on ``grid``."""
    a = alpha / grid.dx
    b = beta / grid.dw
    if abs(a - round(a)) > 1e-9 or abs(b - round(b)) > 1e-9:
        raise TFLabError(f"alpha = {alpha}, beta = {beta} are not multiples of dx, dw")
    return Lattice(int(round(a)), int(round(b)), grid)


def parse_lattice(text, grid):
    """Parse ``lat:a=4,b=4`` (strides in samples)."""
    m = re.fullmatch(r"\s*lat\s*:\s*a\s*=\s*(\d+)\s*,\s*b\s*=\s*(\d+)\s*", text)
    if not m:
        raise TFLabError(f"bad lattice spec {text!r}; expected lat:a=<int>,b=<int>")
    return Lattice(int(m.group(1)), int(m.group(2)), grid)


@dataclass(frozen=True)
class GaborSystem:
    window: SampledSignal
    lattice: Lattice

    def __post_init__(self):
        if self.window.grid != self.lattice.grid:
            raise TFLabError("window and lattice live on different grids")
        if not np.any(self.window.samples):
            raise TFLabError("Gabor window must be nonzero")

    def atoms(self):
        """Matrix whose columns are pi(lambda) g, in row-major lattice order."""
        grid = self.window.grid
        g = self.window.samples
        ti, ki = self.lattice.time_indices, self.lattice.freq_indices
        shifted = np.stack([np.roll(g, i - grid.n // 2) for i in ti])  # [m, j]
        mod = np.exp(2j * np.pi * np.outer(grid.x, grid.w[ki]))  # [j, k]
        return (shifted.T[:, :, None] * mod[:, None, :]).reshape(grid.n, -1)


@dataclass
class CoefArray:
    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.lattice.shape:
            raise TFLabError(
                f"coefficients must have shape {self.lattice.shape}, got {self.values.shape}"
            )


def analysis(f, sys):
    """Lattice coefficients <f, pi(lambda) g>."""
    _check_same_grid(f, sys.window)
    lat = sys.lattice
    full = stft(f, sys.window).values
    return CoefArray(lat, full[np.ix_(lat.time_indices, lat.freq_indices)])


def synthesis(coefs, window):
    """sum_lambda c_lambda pi(lambda) h."""
    sys = GaborSystem(window, coefs.lattice)
    return SampledSignal(window.grid, sys.atoms() @ coefs.values.reshape(-1))


def frame_operator(sys):
    """S f = sum_lambda <f, pi(lambda) g> pi(lambda) g as an :class:`OperatorMatrix`."""
    U = sys.atoms()
    return OperatorMatrix(sys.window.grid, U @ U.conj().T)


def mixed_frame_operator(sys, dual):
    """S_{g,h} f = sum_lambda <f, pi(lambda) g> pi(lambda) h."""
    U = sys.atoms()
    V = GaborSystem(dual, sys.lattice).atoms()
    return OperatorMatrix(sys.window.grid, V @ U.conj().T)


def frame_bounds(sys):
    """Extreme eigenvalues (A, B) of the frame operator."""
    vals, _, _ = jacobi_eigh(frame_operator(sys).action_matrix())
    return float(vals[0]), float(vals[-1])


def dual_window(sys, rcond=1e-10):
    """Canonical dual window h = S^-1 g.

    Raises :class:`FrameError` when the smallest eigenvalue of S falls below
    ``rcond`` times the largest.
    """
    S = frame_operator(sys).action_matrix()
    lo, hi = frame_bounds(sys)
    if not lo > rcond * hi:
        raise FrameError(
            f"frame operator is singular: min eigenvalue {lo:.3e}, max {hi:.3e}", lo, hi
        )
    g = sys.window.samples
    n = sys.window.grid.n
    if n <= 256:
        h = np.linalg.solve(S, g)
    else:
        from scipy.sparse.linalg import cg

        h, info = cg(S, g, rtol=1e-12, atol=0.0, maxiter=10 * n)
        if info:
            raise FrameError(f"conjugate gradient stopped with info={info}", lo, hi)
    return SampledSignal(sys.window.grid, h)


def parseval_box(grid, a_step):
    """Unit box of ``a_step`` samples with b_step = n / a_step: an orthonormal Gabor basis."""
    from .grid import box

    if grid.n % a_step:
        raise TFLabError(f"a_step = {a_step} must divide n = {grid.n}")
    return GaborSystem(box(grid, a_step), Lattice(a_step, grid.n // a_step, grid))


# ---------------------------------------------------------------------------
# weighted sequence norms


def _lp(values, p, axis):
    """l^p (quasi-)norm along ``axis``; p = inf is the exact supremum."""
    a = np.abs(values)
    if p == math.inf:
        return a.max(axis=axis)
    top = a.max(axis=axis, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return np.squeeze(safe, axis=axis) * np.sum((a / safe) ** p, axis=axis) ** (1.0 / p)


def _check_index(p, name):
    if p == math.inf:
        return p
    return check_exponent(p, name)


def seq_norm(coefs, p, q, m=None):
    """Mixed norm (sum_k (sum_m |c[m, k]|^p m(lambda)^p)^(q/p))^(1/q).

    The inner index runs over time shifts, the outer over frequencies.
    """
    p, q = _check_index(p, "p"), _check_index(q, "q")
    vals = np.abs(coefs.values)
    if m is not None and not is_trivial(m):
        vals = vals * m(coefs.lattice.points())
    return float(_lp(_lp(vals, p, axis=0), q, axis=0))


def mod_norm(f, g, lat, p, q, m=None):
    """Discrete modulation norm ||(<f, pi(lambda) g>)||_{l^{p,q}_m}."""
    return seq_norm(analysis(f, GaborSystem(g, lat)), p, q, m)


def lp_norm(a, p, weights=None):
    """Weighted l^p (quasi-)norm of a one-dimensional sequence."""
    p = _check_index(p, "p")
    vals = np.abs(np.asarray(a))
    if weights is not None:
        vals = vals * weights
    if vals.size == 0:
        return 0.0
    return float(_lp(vals, p, axis=0))


# ---------------------------------------------------------------------------
# Young and Hoelder on Z


def _inv(p):
    return 0.0 if p == math.inf else 1.0 / p


def check_young_indices(p, q, r):
    p, q, r = (_check_index(v, k) for v, k in ((p, "p"), (q, "q"), (r, "r")))
    if r >= 1:
        if abs(_inv(p) + _inv(q) - 1.0 - _inv(r)) > 1e-12:
            raise TFLabError(f"need 1/p + 1/q = 1 + 1/r for r >= 1, got ({p}, {q}, {r})")
    elif not p == q == r:
        raise TFLabError(f"need p = q = r for r < 1, got ({p}, {q}, {r})")
    return p, q, r


def check_holder_indices(p, q, r):
    p, q, r = (_check_index(v, k) for v, k in ((p, "p"), (q, "q"), (r, "r")))
    if abs(_inv(p) + _inv(q) - _inv(r)) > 1e-12:
        raise TFLabError(f"need 1/p + 1/q = 1/r, got ({p}, {q}, {r})")
    return p, q, r


def _random_sequence(rng, max_support=24):
    """Finitely supported sequence on Z: (start index, values)."""
    length = int(rng.integers(1, max_support + 1))
    start = int(rng.integers(-max_support, max_support + 1))
    kind = rng.integers(3)
    if kind == 0:
        vals = rng.exponential(size=length)
    elif kind == 1:
        vals = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    else:
        vals = np.zeros(length)
        vals[rng.integers(length)] = rng.standard_normal() + 1.0
    return start, vals


def _weights_at(m, start, length):
    if m is None or is_trivial(m):
        return None
    idx = np.arange(start, start + length, dtype=float)[:, None]
    return m(idx)


@dataclass
class SequenceReport:
    trials: int
    violations: int
    worst_C: float
    tolerance: float

    @property
    def passed(self):
        return self.violations == 0

    def as_dict(self):
        return {"trials": self.trials, "violations": self.violations,
                "worst_C": self.worst_C, "tolerance": self.tolerance}


def young_pair(a, b, p, q, r, m=None, v=None):
    """Return (||a * b||_{r,m}, ||a||_{p,m} ||b||_{q,v}) for sequences (start, values)."""
    (sa, va), (sb, vb) = a, b
    conv = np.convolve(va, vb)
    lhs = lp_norm(conv, r, _weights_at(m, sa + sb, len(conv)))
    rhs = lp_norm(va, p, _weights_at(m, sa, len(va))) * lp_norm(vb, q, _weights_at(v, sb, len(vb)))
    return lhs, rhs


def young_check(p, q, r, m=None, v=None, trials=1000, seed=0, C=1.0, tol=1e-12):
    """Sample ||a * b||_{l^r_m} <= C ||a||_{l^p_m} ||b||_{l^q_v} on finitely supported
    sequences on Z (exact linear convolution)."""
    p, q, r = check_young_indices(p, q, r)
    rng = np.random.default_rng(seed)
    worst, violations = 0.0, 0
    for _ in range(trials):
        lhs, rhs = young_pair(_random_sequence(rng), _random_sequence(rng), p, q, r, m, v)
        if rhs == 0:
            continue
        ratio = lhs / rhs
        worst = max(worst, ratio)
        violations += ratio > C * (1.0 + tol)
    return SequenceReport(trials, int(violations), worst, tol)


def holder_check(p, q, r, m=None, trials=1000, seed=0, tol=1e-12):
    """Sample ||a b||_{l^r} <= ||a||_{l^p_m} ||b||_{l^q_{1/m}}."""
    p, q, r = check_holder_indices(p, q, r)
    rng = np.random.default_rng(seed)
    recip = None if m is None else Reciprocal(m)
    worst, violations = 0.0, 0
    for _ in range(trials):
        start, a = _random_sequence(rng)
        b = rng.standard_normal(len(a)) + 1j * rng.standard_normal(len(a))
        b[rng.random(len(a)) < 0.2] = 0.0
        lhs = lp_norm(a * b, r)
        rhs = lp_norm(a, p, _weights_at(m, start, len(a))) * lp_norm(
            b, q, _weights_at(recip, start, len(a))
        )
        if rhs == 0:
            violations += lhs > 0
            continue
        ratio = lhs / rhs
        worst = max(worst, ratio)
        violations += ratio > 1.0 + tol
    return SequenceReport(trials, int(violations), worst, tol)


# ---------------------------------------------------------------------------
# convolution relation


def periodic_convolution(f, h):
    """(f * h)(x_j) = dx sum_l f(x_l) h(x_j - x_l)."""
    _check_same_grid(f, h)
    grid = f.grid
    F = np.fft.fft(np.fft.ifftshift(f.samples))
    H = np.fft.fft(np.fft.ifftshift(h.samples))
    return SampledSignal(grid, grid.dx * np.fft.fftshift(np.fft.ifft(F * H)))


def convolution_weights(m, v, nu):
    """The three weights of the convolution relation: (m|1 (x) nu, v|1 (x) v|2 nu^-1, m)."""
    left = Tensor(Restrict(m, 1), nu)
    right = Tensor(Restrict(v, 1), Product(Restrict(v, 2), Reciprocal(nu)))
    return left, right, m


def convolution_relation_check(f, h, indices, m, v, nu, sys):
    """Ratio ||f * h||_{M^{r,gamma}_m} / (||f||_{M^{p,u}_{m|1 (x) nu}} ||h||_{M^{q,t}_{...}})."""
    p, q, r = check_young_indices(indices["p"], indices["q"], indices["r"])
    u, t, gam = check_holder_indices(indices["u"], indices["t"], indices["gamma"])
    w_f, w_h, w_out = convolution_weights(m, v, nu)
    g, lat = sys.window, sys.lattice
    num = mod_norm(periodic_convolution(f, h), g, lat, r, gam, w_out)
    den = mod_norm(f, g, lat, p, u, w_f) * mod_norm(h, g, lat, q, t, w_h)
    if den == 0:
        raise TFLabError("denominator vanishes; f and h must be nonzero")
    return {"ratio": num / den, "numerator": num, "denominator": den}
