"""Jacobi eigen/singular decompositions, Schatten quasi-norms, Hermite functions
and decay-envelope fits."""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import StructuralError, TFLabError, check_exponent
from .grid import SampledSignal, dft
from .ops import OperatorMatrix

DEFAULT_GAMMA_GRID = (0.4, 0.5, 0.75, 1.0, 1.5, 2.0)
DEFAULT_FLOOR = 1e-10


# ---------------------------------------------------------------------------
# Jacobi machinery


def _round_robin(n):
    """Tournament schedule: n - 1 rounds of n/2 disjoint pairs covering all pairs once."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        half = n // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _rotation(app, aqq, apq, tiny):
    """Parameters of the 2x2 unitary G = [[c, s], [-s e, c e]] (e = exp(-i phi))
    with G^H [[app, apq], [conj(apq), aqq]] G diagonal."""
    r = np.abs(apq)
    active = r > tiny
    safe_r = np.where(active, r, 1.0)
    zeta = (aqq - app) / (2.0 * safe_r)
    sign = np.where(zeta >= 0, 1.0, -1.0)
    t = sign / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    e = np.where(active, np.conj(apq) / safe_r, 1.0)
    c = np.where(active, c, 1.0)
    s = np.where(active, s, 0.0)
    return c, s, e


def _rotate_columns(X, p, q, c, s, e):
    xp, xq = X[:, p], X[:, q]
    X[:, p] = xp * c - xq * (s * e)
    X[:, q] = xp * s + xq * (c * e)


def _rotate_rows(X, p, q, c, s, e):
    xp, xq = X[p, :], X[q, :]
    ce = np.conj(e)[:, None]
    X[p, :] = xp * c[:, None] - xq * (s[:, None] * ce)
    X[q, :] = xp * s[:, None] + xq * (c[:, None] * ce)


def _off_norm(A):
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _pad_even(A):
    n = A.shape[0]
    if n % 2 == 0:
        return A, n
    B = np.zeros((n + 1, n + 1), dtype=A.dtype)
    B[:n, :n] = A
    return B, n


def jacobi_eigh(A, tol=1e-12, max_sweeps=60):
    """Eigen-decomposition of a Hermitian array by cyclic Jacobi rotations.

    Each sweep runs a tournament ordering so the n/2 rotations of a round
    touch disjoint index pairs and are applied together.  Stops once the
    off-diagonal Frobenius norm is below ``tol * ||A||_F``.  Returns
    ``(values, vectors, sweeps)`` with ascending values and unit columns.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise TFLabError(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.conj().T)
    W, n = _pad_even(A)
    m = W.shape[0]
    V = np.eye(m, dtype=complex)
    scale = float(np.linalg.norm(W))
    if m < 2 or scale == 0.0:
        return np.real(np.diag(W))[:n], V[:n, :n], 0
    target = tol * scale
    tiny = 1e-300
    rounds = _round_robin(m)
    sweeps = 0
    while _off_norm(W) > target:
        if sweeps >= max_sweeps:
            raise TFLabError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
        sweeps += 1
        for p, q in rounds:
            app = np.real(W[p, p])
            aqq = np.real(W[q, q])
            c, s, e = _rotation(app, aqq, W[p, q], tiny)
            _rotate_columns(W, p, q, c, s, e)
            _rotate_rows(W, p, q, c, s, e)
            W[p, q] = 0.0
            W[q, p] = 0.0
            _rotate_columns(V, p, q, c, s, e)
    values = np.real(np.diag(W))
    if m != n:
        # the padding index carries the zero dummy eigenvalue; drop its column
        keep = np.argsort(np.abs(V[n, :]))[:n]
        values, V = values[keep], V[:n, keep]
    order = np.argsort(values, kind="stable")
    return values[order], V[:, order], sweeps


def jacobi_svd(M, tol=1e-14, max_sweeps=80):
    """Singular values of ``M`` by one-sided (Hestenes) Jacobi orthogonalization.

    Column pairs are rotated until every pair is orthogonal to ``tol``
    relative to the product of their norms; the singular values are then the
    column norms.  Small singular values keep their relative accuracy, which
    the ``sqrt(eig(M^H M))`` route loses to squaring.
    """
    X = np.array(M, dtype=complex)
    if X.ndim != 2:
        raise TFLabError(f"expected a matrix, got shape {X.shape}")
    if X.shape[1] % 2:
        X = np.concatenate([X, np.zeros((X.shape[0], 1), complex)], axis=1)
    m = X.shape[1]
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            xp, xq = X[:, p], X[:, q]
            alpha = np.sum(np.abs(xp) ** 2, axis=0)
            beta = np.sum(np.abs(xq) ** 2, axis=0)
            gamma = np.sum(np.conj(xp) * xq, axis=0)
            needs = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not np.any(needs):
                continue
            rotated = True
            c, s, e = _rotation(alpha, beta, np.where(needs, gamma, 0.0), 0.0)
            _rotate_columns(X, p, q, c, s, e)
        if not rotated:
            break
    else:
        raise TFLabError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    s = np.linalg.norm(X, axis=0)[: np.asarray(M).shape[1]]
    return np.sort(s)[::-1]


# ---------------------------------------------------------------------------
# operator-level API


@dataclass
class EigenPair:
    value: complex
    vector: SampledSignal

    def residual(self, op):
        return float(np.linalg.norm(op.apply(self.vector).samples - self.value * self.vector.samples))


@dataclass
class SingularSpectrum:
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise TFLabError("singular values must be nonnegative and nonincreasing")
        self.s = s

    def __len__(self):
        return len(self.s)


def _phase_normalize(v):
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0:
        return v
    return v * (np.abs(v[i]) / v[i])


def check_hermitian(op, rtol=1e-10):
    M = op.entries
    scale = float(np.linalg.norm(M))
    defect = float(np.linalg.norm(M - M.conj().T))
    if defect > rtol * max(scale, np.finfo(float).tiny):
        raise StructuralError(
            f"operator is not Hermitian (relative defect {defect / scale:.2e}); "
            "use singular_values for general operators"
        )


def hermitian_eig(op, tol=1e-12):
    """Eigenpairs of a Hermitian :class:`OperatorMatrix`, sorted by |lambda| descending.

    Eigenvalues are those of the action ``f -> entries f dx``.  Vectors are
    L2-normalized on the grid (``norm(v) == 1``) and phase-fixed so the
    largest entry is real and positive.
    """
    check_hermitian(op)
    grid = op.grid
    values, vectors, _ = jacobi_eigh(op.action_matrix(), tol=tol)
    order = np.argsort(-np.abs(values), kind="stable")
    pairs = []
    for i in order:
        u = _phase_normalize(vectors[:, i]) / math.sqrt(grid.dx)
        pairs.append(EigenPair(float(values[i]), SampledSignal(grid, u)))
    return pairs


def reconstruct(pairs, grid):
    """Entries of sum_k lambda_k v_k v_k^H for L2-normalized eigenvectors."""
    entries = np.zeros((grid.n, grid.n), dtype=complex)
    for p in pairs:
        v = p.vector.samples
        entries += p.value * np.outer(v, np.conj(v))
    return OperatorMatrix(grid, entries)


def singular_values(op, method="jacobi"):
    """Singular values of the action of ``op`` (or of a plain array).

    ``method="jacobi"`` uses one-sided Jacobi; ``"gram"`` takes square roots of
    the eigenvalues of ``M^H M`` from :func:`jacobi_eigh`.
    """
    M = op.action_matrix() if isinstance(op, OperatorMatrix) else np.asarray(op, dtype=complex)
    if method == "jacobi":
        s = jacobi_svd(M)
    elif method == "gram":
        vals, _, _ = jacobi_eigh(M.conj().T @ M)
        s = np.sqrt(np.clip(vals, 0.0, None))[::-1]
    else:
        raise TFLabError(f"unknown method {method!r}")
    return SingularSpectrum(np.sort(s)[::-1])


def schatten_quasi_norm(spec, p):
    """(sum s_k^p)^(1/p), with p = inf giving the largest singular value."""
    s = spec.s if isinstance(spec, SingularSpectrum) else np.asarray(spec, dtype=float)
    if p != math.inf:
        p = check_exponent(p)
    if s.size == 0:
        return 0.0
    if p == math.inf:
        return float(s[0])
    top = float(s[0]) if s[0] > 0 else 1.0
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def schatten_tail(spec, p, start):
    """Relative tail (sum_{k >= start} s_k^p / sum_k s_k^p) of the Schatten sum."""
    s = spec.s if isinstance(spec, SingularSpectrum) else np.asarray(spec, dtype=float)
    p = check_exponent(p)
    powered = (s / s[0]) ** p
    return float(powered[start:].sum() / powered.sum())


def geometric_fit(s, count):
    """Least-squares line through (k, log s_k) for the first ``count`` values.

    Returns ``(ratio, r2)`` where ``ratio = exp(slope)``.
    """
    s = np.asarray(s[:count], dtype=float)
    if np.any(s <= 0):
        raise TFLabError("geometric fit needs positive values")
    k = np.arange(len(s), dtype=float)
    y = np.log(s)
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (slope * k + intercept)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / tss if tss > 0 else 1.0
    return math.exp(slope), r2


def hermite_functions(count, grid):
    """L2-normalized Hermite functions h_0..h_{count-1} by three-term recurrence."""
    if count < 1 or count > grid.n // 4:
        raise TFLabError(f"count must lie in [1, {grid.n // 4}] for n = {grid.n}")
    u = math.sqrt(2.0 * math.pi) * grid.x
    h = [2 ** 0.25 * np.exp(-np.pi * grid.x ** 2)]
    if count > 1:
        h.append(math.sqrt(2.0) * u * h[0])
    for k in range(1, count - 1):
        h.append(math.sqrt(2.0 / (k + 1)) * u * h[k] - math.sqrt(k / (k + 1)) * h[k - 1])
    return [SampledSignal(grid, v) for v in h[:count]]


# ---------------------------------------------------------------------------
# decay fits


@dataclass
class DecayFit:
    """Envelope ``log|f(x)| ~ logC - k_hat |x|^(1/gamma_hat)`` over ``fit_region``."""

    gamma_hat: float
    k_hat: float
    logC: float
    r2: float
    fit_region: tuple
    domain: str = "time"
    decaying: bool = True
    residuals: dict = field(default_factory=dict, repr=False)

    def as_dict(self):
        return {
            "gamma_hat": self.gamma_hat,
            "k_hat": self.k_hat,
            "logC": self.logC,
            "r2": self.r2,
            "domain": self.domain,
            "decaying": self.decaying,
        }


def fit_envelope(r, values, gamma_grid=DEFAULT_GAMMA_GRID, floor=DEFAULT_FLOOR,
                 r_min=0.0, domain="time"):
    """Least-squares decay envelope of nonnegative ``values`` sampled at radii ``r``.

    Points with ``values > floor * max`` and ``|r| > r_min`` enter the fit.
    For each gamma the model is linear in (logC, k); the gamma with the least
    residual wins.  The fit counts as decaying only when ``k_hat > 0`` and the
    fitted envelope drops at least one decade across the region.
    """
    r = np.abs(np.asarray(r, dtype=float))
    values = np.abs(np.asarray(values, dtype=float))
    top = float(values.max()) if values.size else 0.0
    if top == 0:
        raise TFLabError("cannot fit the decay of the zero function")
    if not 0 < floor < 1:
        raise TFLabError(f"floor must lie in (0, 1), got {floor}")
    mask = (values > floor * top) & (r > r_min)
    idx = np.flatnonzero(mask)
    if idx.size < 8:
        raise TFLabError(f"only {idx.size} usable samples; need at least 8")
    y = np.log(values[idx])
    rr = r[idx]
    tss = float(np.sum((y - y.mean()) ** 2))
    best = None
    residuals = {}
    for gamma in gamma_grid:
        design = np.column_stack([np.ones_like(rr), -rr ** (1.0 / gamma)])
        coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        rss = float(np.sum((y - design @ coef) ** 2))
        residuals[float(gamma)] = rss
        if best is None or rss < best[0]:
            best = (rss, float(gamma), float(coef[0]), float(coef[1]))
    rss, gamma, logc, k = best
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    drop = k * (rr.max() ** (1.0 / gamma) - rr.min() ** (1.0 / gamma))
    decaying = bool(k > 0 and drop >= math.log(10.0))
    return DecayFit(gamma, k, logc, r2, (int(idx.min()), int(idx.max())), domain, decaying, residuals)


def decay_fit(f, gamma_grid=DEFAULT_GAMMA_GRID, floor=DEFAULT_FLOOR, domain="time"):
    """Fit the decay envelope of |f| against |x|, skipping the node at the origin."""
    return fit_envelope(f.grid.x, np.abs(f.samples), gamma_grid, floor, f.grid.dx, domain)


def frequency_decay_fit(f, gamma_grid=DEFAULT_GAMMA_GRID, floor=DEFAULT_FLOOR):
    return decay_fit(dft(f), gamma_grid, floor, domain="frequency")


def radial_profile(field):
    """Per radial bin (width dx) the radius and value of the largest |F|."""
    grid = field.grid
    xx, ww = np.meshgrid(grid.x, grid.w, indexing="ij")
    radius = np.hypot(xx, ww).ravel()
    mag = np.abs(field.values).ravel()
    inside = radius <= grid.L / 2.0
    radius, mag = radius[inside], mag[inside]
    bins = np.floor(radius / grid.dx).astype(int)
    order = np.lexsort((-mag, bins))
    first = np.ones(order.size, dtype=bool)
    first[1:] = bins[order][1:] != bins[order][:-1]
    pick = order[first]
    return radius[pick], mag[pick]


def phase_space_decay_fit(f, gamma_grid=DEFAULT_GAMMA_GRID, floor=DEFAULT_FLOOR, window=None):
    """Decay envelope of the radial maxima of |V_g f| (g the unit Gaussian by default)."""
    from .grid import gaussian
    from .tfr import stft

    g = gaussian(f.grid) if window is None else window
    r, mag = radial_profile(stft(f, g))
    return fit_envelope(r, mag, gamma_grid, floor, f.grid.dx, domain="phase_space")
