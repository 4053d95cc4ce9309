"""Localization operators, tau-quantizations and the identities tying them together.

An :class:`OperatorMatrix` stores a discrete kernel ``k(x_j, x_l)``; it acts by
``(Op f)[j] = sum_l entries[j, l] f[l] dx``.  Both the localization operator
with symbol ``a == 1`` and the quantization of ``sigma == 1`` are exactly the
identity in this convention.
"""

import math
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np

from ._validation import PreconditionError, TFLabError, check_tau
from .grid import (
    PhaseSpaceField,
    SampledSignal,
    _centered_fft,
    _centered_ifft,
    _check_same_grid,
    inner,
    norm,
    spectrum,
)
from .tfr import stft, tau_wigner, tf_shift, translation_table
from .weights import Const, WeightSpec, is_trivial


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class Symbol:
    """A function on phase space, given in closed form or as sampled field.

    ``func(x, w)`` must broadcast over arrays.  Field-backed symbols are
    evaluated off-grid by trigonometric interpolation.
    """

    func: object = None
    field: PhaseSpaceField = None
    name: str = "symbol"
    params: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.func is None) == (self.field is None):
            raise TFLabError("a symbol needs exactly one of func or field")

    def __call__(self, x, w):
        if self.func is not None:
            return np.asarray(self.func(np.asarray(x, float), np.asarray(w, float)), dtype=complex)
        return _interpolate_field(self.field, x, w)

    def sample(self, grid):
        """Values on the full (x, w) grid of ``grid``."""
        if self.field is not None and self.field.grid == grid:
            return self.field.values.copy()
        xx, ww = np.meshgrid(grid.x, grid.w, indexing="ij")
        return np.broadcast_to(self(xx, ww), (grid.n, grid.n)).astype(complex)

    def sample_shifted(self, grid, shifts):
        """``out[i, j, k] = sigma(x_j - shifts[i], w_k)``."""
        shifts = np.asarray(shifts, dtype=float)
        if self.field is not None and self.field.grid == grid:
            coeffs = spectrum(self.field.values, grid, axis=0)
            ramp = np.exp(-2j * np.pi * np.multiply.outer(shifts, grid.w))
            return np.fft.fftshift(
                np.fft.ifft(np.fft.ifftshift(coeffs[None] * ramp[:, :, None], axes=1), axis=1),
                axes=1,
            ) / grid.dx
        xs = grid.x[None, :, None] - shifts[:, None, None]
        return np.broadcast_to(self(xs, grid.w[None, None, :]), (len(shifts), grid.n, grid.n))

    def is_real(self, grid):
        return bool(np.all(np.abs(np.imag(self.sample(grid))) == 0))

    def scaled(self, c):
        if self.field is not None:
            return Symbol(field=PhaseSpaceField(self.field.grid, c * self.field.values),
                          name=self.name, params=self.params)
        f = self.func
        return Symbol(lambda x, w: c * f(x, w), name=self.name, params=self.params)

    def __add__(self, other):
        f, g = self, other
        return Symbol(lambda x, w: f(x, w) + g(x, w), name=f"{f.name}+{g.name}")


def _interpolate_field(fld, x, w):
    """2-d trigonometric interpolant of a sampled field at points (x, w)."""
    grid = fld.grid
    x, w = np.broadcast_arrays(np.asarray(x, float), np.asarray(w, float))
    coeffs = _centered_fft(_centered_fft(fld.values, axis=0), axis=1) / grid.n ** 2
    fx = np.exp(2j * np.pi * np.multiply.outer(x.ravel(), grid.w))
    # frequency variable dual to w runs over the x-grid with spacing 1/(n dw) = dx
    fw = np.exp(2j * np.pi * np.multiply.outer(w.ravel(), grid.x))
    vals = np.einsum("pm,mk,pk->p", fx, coeffs, fw)
    return vals.reshape(x.shape)


def gaussian_symbol(sx=1.0, sw=1.0, x0=0.0, w0=0.0, c=1.0):
    """c exp(-pi ((x - x0)^2 / sx^2 + (w - w0)^2 / sw^2))."""
    def func(x, w):
        return c * np.exp(-np.pi * (((x - x0) / sx) ** 2 + ((w - w0) / sw) ** 2))
    return Symbol(func, name="gauss2d", params={"sx": sx, "sw": sw, "x0": x0, "w0": w0, "c": c})


def constant_symbol(c=1.0):
    def func(x, w):
        return np.full(np.broadcast(x, w).shape, c, dtype=complex)
    return Symbol(func, name="const", params={"c": c})


def subexp_symbol(k=1.0):
    """exp(-k (|x| + |w|))."""
    def func(x, w):
        return np.exp(-k * (np.abs(x) + np.abs(w)))
    return Symbol(func, name="subexp2d", params={"k": k})


def field_symbol(fld, name="field"):
    return Symbol(field=fld, name=name)


def gaussian_mixture_corpus(grid, count=20, seed=0, components=3):
    """Seeded real Gaussian-mixture symbols centered well inside the period."""
    rng = np.random.default_rng(seed)
    reach = grid.L / 8.0
    corpus = []
    for _ in range(count):
        parts = [
            gaussian_symbol(
                sx=rng.uniform(0.6, 1.4), sw=rng.uniform(0.6, 1.4),
                x0=rng.uniform(-reach, reach), w0=rng.uniform(-reach, reach),
                c=rng.uniform(-1.0, 1.0),
            )
            for _ in range(components)
        ]
        sym = parts[0]
        for p in parts[1:]:
            sym = sym + p
        corpus.append(sym)
    return corpus


# ---------------------------------------------------------------------------
# operators


class OperatorMatrix:
    """Discrete kernel on a grid; the dx quadrature weight belongs to the action."""

    __slots__ = ("grid", "entries")

    def __init__(self, grid, entries):
        entries = np.array(entries, dtype=complex)
        if entries.shape != (grid.n, grid.n):
            raise TFLabError(f"operator must have shape {(grid.n, grid.n)}, got {entries.shape}")
        entries.setflags(write=False)
        self.grid = grid
        self.entries = entries

    def __repr__(self):
        return f"OperatorMatrix(n={self.grid.n}, L={self.grid.L:g})"

    @classmethod
    def from_action(cls, grid, matrix):
        return cls(grid, np.asarray(matrix) / grid.dx)

    @classmethod
    def identity(cls, grid):
        return cls.from_action(grid, np.eye(grid.n))

    def action_matrix(self):
        return self.entries * self.grid.dx

    def apply(self, f):
        if f.grid != self.grid:
            raise TFLabError("operator and signal live on different grids")
        return SampledSignal(self.grid, self.grid.dx * (self.entries @ f.samples))

    def adjoint(self):
        return OperatorMatrix(self.grid, self.entries.conj().T)

    def frobenius(self):
        """Hilbert-Schmidt norm of the action."""
        return float(np.linalg.norm(self.entries)) * self.grid.dx

    def __add__(self, other):
        return OperatorMatrix(self.grid, self.entries + other.entries)

    def __sub__(self, other):
        return OperatorMatrix(self.grid, self.entries - other.entries)

    def __mul__(self, c):
        return OperatorMatrix(self.grid, c * self.entries)

    __rmul__ = __mul__


def relative_error(A, B):
    """||A - B||_F / ||B||_F on the actions."""
    ref = B.frobenius()
    diff = (A - B).frobenius()
    return diff / ref if ref > 0 else diff


def _check_windows(phi1, phi2):
    _check_same_grid(phi1, phi2)
    if not np.any(phi1.samples):
        raise TFLabError("analysis window phi1 must be nonzero")


def _symbol_values(a, grid):
    if isinstance(a, PhaseSpaceField):
        return a.values
    if isinstance(a, Symbol):
        return a.sample(grid)
    return np.asarray(a, dtype=complex)


def _time_frequency_atoms(phi):
    """``atoms[m][j, k] = (pi(x_m, w_k) phi)(x_j)``."""
    grid = phi.grid
    mod = np.exp(2j * np.pi * np.outer(grid.x, grid.w))
    return translation_table(phi)[:, :, None] * mod[None, :, :]


def localization_matrix(a, phi1, phi2, method="kernel"):
    """Localization operator with symbol ``a`` (Symbol, field or n x n array).

    ``method="rank_one"`` sums ``dx dw a(x_m, w_k) (pi phi2)(pi phi1)^H`` over
    the full phase-space grid.  ``method="kernel"`` transforms ``a`` along w
    and then convolves each kernel diagonal, ``O(n^2 log n)``.
    """
    _check_windows(phi1, phi2)
    grid = phi1.grid
    vals = _symbol_values(a, grid)
    cell = grid.dx * grid.dw
    n = grid.n
    if method == "rank_one":
        atoms1 = _time_frequency_atoms(phi1)
        atoms2 = _time_frequency_atoms(phi2)
        entries = np.zeros((n, n), dtype=complex)
        for m in range(n):
            entries += (atoms2[m] * vals[m][None, :]) @ atoms1[m].conj().T
        return OperatorMatrix(grid, cell * entries)
    if method != "kernel":
        raise TFLabError(f"unknown method {method!r}")
    # ahat[m, d] = sum_k a(x_m, w_k) exp(2 pi i w_k d dx) for offsets d = 0..n-1
    ahat = n * np.fft.ifft(np.fft.ifftshift(vals, axes=1), axis=1)
    offsets = np.arange(n)
    # window index arrays relative to the origin node
    p2 = np.fft.ifftshift(phi2.samples)
    p1 = np.fft.ifftshift(phi1.samples)
    a_rows = np.fft.ifftshift(ahat, axes=0)
    entries = np.empty((n, n), dtype=complex)
    jj = np.arange(n)
    for d in offsets:
        prod = p2 * np.conj(np.roll(p1, d))
        diag = np.fft.ifft(np.fft.fft(a_rows[:, d]) * np.fft.fft(prod))
        # diag[i] lives at i relative to origin; node j = i + n/2
        entries[(jj + n // 2) % n, (jj + n // 2 - d) % n] = diag
    return OperatorMatrix(grid, cell * entries)


def _min_image_offsets(grid):
    """Offsets d_delta = wrap(delta dx) in [-L/2, L/2) for delta = 0..n-1."""
    n = grid.n
    delta = np.arange(n)
    return np.where(delta < n // 2, delta, delta - n) * grid.dx


def tau_quantization_matrix(sigma, tau, grid=None):
    """Kernel ``dw sum_k sigma(x_j - tau d, w_k) exp(2 pi i d w_k)`` with ``d = x_j - x_l``.

    ``d`` is the minimal periodic image of ``x_j - x_l``, so the evaluation
    point ``x_j - tau d`` is the interpolation point (1 - tau) x_j + tau x_l
    on the short arc between the two nodes.  ``grid`` defaults to the grid of
    a field-backed symbol.
    """
    tau = check_tau(tau)
    if grid is None:
        if sigma.field is None:
            raise TFLabError("a closed-form symbol needs an explicit grid")
        grid = sigma.field.grid
    n = grid.n
    d = _min_image_offsets(grid)
    vals = sigma.sample_shifted(grid, tau * d)  # [delta, j, k]
    phase = np.exp(2j * np.pi * np.outer(d, grid.w))  # [delta, k]
    diag = grid.dw * np.einsum("djk,dk->dj", vals, phase)
    entries = np.empty((n, n), dtype=complex)
    jj = np.arange(n)
    for delta in range(n):
        entries[jj, (jj - delta) % n] = diag[delta]
    return OperatorMatrix(grid, entries)


def phase_space_convolution(a_vals, b_vals, grid):
    """Periodic 2-d convolution ``dx dw sum a(z') b(z - z')`` of two grid fields."""
    A = np.fft.ifftshift(a_vals)
    B = np.fft.ifftshift(b_vals)
    return grid.dx * grid.dw * np.fft.fftshift(np.fft.ifft2(np.fft.fft2(A) * np.fft.fft2(B)))


def weyl_symbol_of_locop(a, phi1, phi2, tau):
    """tau-symbol of the localization operator: ``a * W_tau(phi2, phi1)`` as a field."""
    _check_windows(phi1, phi2)
    grid = phi1.grid
    wig = tau_wigner(phi2, phi1, tau).values
    vals = phase_space_convolution(_symbol_values(a, grid), wig, grid)
    return field_symbol(PhaseSpaceField(grid, vals), name=f"locop_tau{check_tau(tau):g}")


TAU_PROBES = (0.0, 0.25, 0.5, 0.75, 1.0)


def kernel_equality_check(a, phi1, phi2, tau_list=TAU_PROBES):
    """Relative Frobenius gap between the localization operator and the
    tau-quantization of its tau-symbol, for each tau."""
    gamma = localization_matrix(a, phi1, phi2)
    errors = {}
    for tau in tau_list:
        sigma = weyl_symbol_of_locop(a, phi1, phi2, tau)
        errors[float(tau)] = relative_error(tau_quantization_matrix(sigma, tau), gamma)
    return {"errors": errors, "max_rel_error": max(errors.values())}


def phase_space_inner(F, G, grid):
    """<F, G> = dx dw sum F conj(G)."""
    return grid.dx * grid.dw * np.vdot(G, F)


def weak_form_check(sigma, f, g, tau):
    """|<Op_tau(sigma) f, g> - <sigma, W_tau(g, f)>|."""
    grid = f.grid
    op = tau_quantization_matrix(sigma, tau, grid)
    lhs = inner(op.apply(f), g)
    rhs = phase_space_inner(sigma.sample(grid), tau_wigner(g, f, tau).values, grid)
    return float(abs(lhs - rhs))


def T_map(w, z, tau):
    """T_tau(w, z) = ((1 - tau) w_1 + tau z_1, tau w_2 + (1 - tau) z_2)."""
    w, z = np.asarray(w, float), np.asarray(z, float)
    return np.stack([(1 - tau) * w[..., 0] + tau * z[..., 0], tau * w[..., 1] + (1 - tau) * z[..., 1]], -1)


def J_map(z):
    """J(z) = (z_2, -z_1)."""
    z = np.asarray(z, float)
    return np.stack([z[..., 1], -z[..., 0]], -1)


def symbol_stft_at(sigma_vals, g, tau, P, Q):
    """V_Phi sigma(P, Q) with window Phi = W_tau(g, g), summed over the phase-space grid.

    The shifted window Phi(. - P) is W_tau(pi(P) g, pi(P) g), which is exact
    covariance and needs only a one-dimensional fractional shift of g.
    """
    grid = g.grid
    xx, ww = np.meshgrid(grid.x, grid.w, indexing="ij")
    out = np.empty(len(P), dtype=complex)
    for i, (p, q) in enumerate(zip(P, Q)):
        gp = tf_shift(g, p)
        window = tau_wigner(gp, gp, tau).values
        phase = np.exp(-2j * np.pi * (q[0] * xx + q[1] * ww))
        out[i] = grid.dx * grid.dw * np.sum(sigma_vals * np.conj(window) * phase)
    return out


def matrix_element_identity_check(sigma, g, tau, probes):
    """max | |<Op_tau(sigma) pi(z) g, pi(w) g>| - |V_Phi sigma(T_tau(w, z), J(w - z))| |.

    ``probes`` is a sequence of ``(z, w)`` pairs of phase-space points.
    """
    grid = g.grid
    op = tau_quantization_matrix(sigma, tau, grid)
    sig_vals = sigma.sample(grid)
    z = np.array([p[0] for p in probes], dtype=float)
    w = np.array([p[1] for p in probes], dtype=float)
    lhs = np.array([abs(inner(op.apply(tf_shift(g, zi)), tf_shift(g, wi))) for zi, wi in zip(z, w)])
    rhs = np.abs(symbol_stft_at(sig_vals, g, tau, T_map(w, z, tau), J_map(w - z)))
    return float(np.max(np.abs(lhs - rhs)))


def random_grid_probes(grid, count, seed, reach=None):
    """Seeded pairs (z, w) of grid points with coordinates in [-reach, reach]."""
    rng = np.random.default_rng(seed)
    reach = grid.L / 8.0 if reach is None else reach
    nodes = grid.x[np.abs(grid.x) <= reach]
    picks = rng.choice(nodes, size=(count, 2, 2))
    return [(tuple(p[0]), tuple(p[1])) for p in picks]


def stft_expansion_check(sigma, tau, f, g):
    """Relative L2 gap between Op_tau(sigma) f and dx dw sum_z V_g f(z) Op_tau(sigma) pi(z) g."""
    if abs(norm(g) - 1.0) > 1e-10:
        raise PreconditionError(f"window must have unit norm, got {norm(g):.12g}")
    grid = f.grid
    op = tau_quantization_matrix(sigma, tau, grid)
    coeffs = stft(f, g).values
    atoms = _time_frequency_atoms(g)  # [m, j, k]
    images = op.action_matrix() @ atoms.transpose(1, 0, 2).reshape(grid.n, -1)
    rhs = grid.dx * grid.dw * (images @ coeffs.reshape(-1))
    direct = op.apply(f).samples
    ref = np.linalg.norm(direct)
    err = np.linalg.norm(rhs - direct)
    return float(err / ref) if ref > 0 else float(err)


# ---------------------------------------------------------------------------
# Schur test


def _weight_probes(grid, count=400, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-grid.L / 2, grid.L / 2, size=(count, 4))


def check_weight_condition(m0, m1, m2, tau, grid, constant=1.0, probes=None):
    """Check m2(x, w) / m1(y, eta) <= C m0(T, omega - eta, y - x) on probe points.

    Raises :class:`PreconditionError` with the worst witness on failure.
    """
    if m0.dim != 4 or m1.dim != 2 or m2.dim != 2:
        raise TFLabError("need m0 on R^4 and m1, m2 on R^2")
    pts = _weight_probes(grid) if probes is None else np.asarray(probes, float)
    x, w, y, eta = pts.T
    lhs = m2.log_eval(np.stack([x, w], -1)) - m1.log_eval(np.stack([y, eta], -1))
    arg = np.stack([(1 - tau) * x + tau * y, tau * w + (1 - tau) * eta, w - eta, y - x], -1)
    rhs = math.log(constant) + m0.log_eval(arg)
    excess = lhs - rhs
    i = int(np.argmax(excess))
    if excess[i] > 1e-12 * (1 + abs(lhs[i]) + abs(rhs[i])):
        raise PreconditionError(
            f"weight condition fails at (x, w, y, eta) = {tuple(np.round(pts[i], 6))}: "
            f"ratio exceeds C m0 by a factor {math.exp(excess[i]):.6g}"
        )
    return float(math.exp(excess[i]))


def _wrap_offsets(grid, idx):
    n = grid.n
    return ((idx + n // 2) % n) - n // 2


def schur_majorant(sigma, g, tau, m0, grid, route="gram"):
    """Q(z, w) = |V_Phi sigma(T_tau(w, z), J(w - z))| m0(T_tau(w, z), J(w - z)).

    Returned with shape (n, n, n, n) indexed [z_x, z_w, w_x, w_w].  ``route="gram"``
    reads |V_Phi sigma| off the matrix elements <Op pi(z) g, pi(w) g> (one STFT
    per z); ``route="symbol"`` evaluates the symbol STFT directly (slow, small n).
    Differences w - z use the minimal periodic image.
    """
    n = grid.n
    x, w = grid.x, grid.w
    idx = np.arange(n)
    if route == "gram":
        op = tau_quantization_matrix(sigma, tau, grid).action_matrix()
        atoms = _time_frequency_atoms(g)  # [m, j, k]
        mag = np.empty((n, n, n, n))
        table = np.conj(translation_table(g))
        for m in range(n):
            images = op @ atoms[m]  # columns: Op pi(x_m, w_k) g
            prods = images.T[:, None, :] * table[None, :, :]
            mag[m] = np.abs(spectrum(prods, grid, axis=2))
    elif route == "symbol":
        # for each offset D = w - z the map z -> V_Phi sigma(z + c_D, J D) is a
        # periodic correlation over z with the window shifted by c_D
        sig_vals = sigma.sample(grid)
        xx, ww = np.meshgrid(x, w, indexing="ij")
        offs = _wrap_offsets(grid, idx)
        zm, zk = np.meshgrid(idx, idx, indexing="ij")
        cell = grid.dx * grid.dw
        mag = np.empty((n, n, n, n))
        for a_ in range(n):
            for b_ in range(n):
                d1, d2 = offs[a_] * grid.dx, offs[b_] * grid.dw
                gp = tf_shift(g, ((1 - tau) * d1, tau * d2))
                window = tau_wigner(gp, gp, tau).values
                modulated = sig_vals * np.exp(-2j * np.pi * (d2 * xx - d1 * ww))
                corr = np.fft.ifft2(
                    np.fft.fft2(np.fft.ifftshift(modulated))
                    * np.conj(np.fft.fft2(np.fft.ifftshift(window)))
                )
                vals = np.abs(cell * np.fft.fftshift(corr))  # indexed by z
                mag[zm, zk, (zm + offs[a_]) % n, (zk + offs[b_]) % n] = vals
    else:
        raise TFLabError(f"unknown route {route!r}")
    if is_trivial(m0):
        return mag
    zx, zw, wx, ww_ = np.meshgrid(idx, idx, idx, idx, indexing="ij")
    dxo = _wrap_offsets(grid, wx - zx) * grid.dx
    dwo = _wrap_offsets(grid, ww_ - zw) * grid.dw
    arg = np.stack([x[zx] + (1 - tau) * dxo, w[zw] + tau * dwo, dwo, -dxo], -1)
    return mag * m0(arg)


def schur_bound(sigma, m0=None, m1=None, m2=None, tau=0.5, g=None, grid=None, route="gram"):
    """Schur-test majorant of the weighted norm of Op_tau(sigma).

    ``max(sup_z sum_w Q dx dw, sup_w sum_z Q dx dw)``.  With trivial weights
    this bounds the L2 operator norm.  The weight condition linking m0, m1,
    m2 is checked on probes first.
    """
    if g is None:
        if grid is None:
            raise TFLabError("schur_bound needs a window or a grid")
        from .grid import gaussian
        g = gaussian(grid)
    grid = g.grid
    m0 = Const(1.0, dim=4) if m0 is None else m0
    m1 = Const(1.0, dim=2) if m1 is None else m1
    m2 = Const(1.0, dim=2) if m2 is None else m2
    check_weight_condition(m0, m1, m2, tau, grid)
    Q = schur_majorant(sigma, g, tau, m0, grid, route)
    n = grid.n
    Q = Q.reshape(n * n, n * n)
    cell = grid.dx * grid.dw
    rows = Q.sum(axis=1).max() * cell
    cols = Q.sum(axis=0).max() * cell
    return float(max(rows, cols))

