"""Symbolic weights on R^d and samplable checks of the inequalities they satisfy.

Weights are evaluated in the log domain so that subexponential weights with
large arguments never overflow.  Points are arrays whose last axis has length
``spec.dim``.
"""

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._validation import TFLabError, check_tau


def _as_points(points, dim):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0:
        pts = pts[None]
    if pts.shape[-1] != dim:
        raise TFLabError(f"weight of dimension {dim} evaluated at points of dimension {pts.shape[-1]}")
    return pts


class WeightSpec:
    """Base class.  Subclasses implement ``dim`` and ``_log(points)``."""

    dim = 1

    def log_eval(self, points):
        return self._log(_as_points(points, self.dim))

    def __call__(self, points):
        return np.exp(self.log_eval(points))

    def __mul__(self, other):
        return Product(self, other)


@dataclass(frozen=True)
class SubExp(WeightSpec):
    """w(x) = exp(k |x|^(1/gamma)), Euclidean norm on R^dim."""

    gamma: float = 1.0
    k: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if not self.gamma > 0:
            raise TFLabError(f"gamma must be positive, got {self.gamma}")
        if self.k < 0:
            raise TFLabError(f"k must be nonnegative, got {self.k}")

    def _log(self, pts):
        if self.k == 0:
            return np.zeros(pts.shape[:-1])
        return self.k * np.linalg.norm(pts, axis=-1) ** (1.0 / self.gamma)


@dataclass(frozen=True)
class Poly(WeightSpec):
    """v_u(x) = (1 + |x|^2)^(u/2)."""

    u: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if self.u < 0:
            raise TFLabError(f"u must be nonnegative, got {self.u}")

    def _log(self, pts):
        return 0.5 * self.u * np.log1p(np.sum(pts * pts, axis=-1))


@dataclass(frozen=True)
class MTau(WeightSpec):
    """m(x, w, y, eta) = (1 + |x - tau eta| + |w + (1 - tau) y|)^u on R^4."""

    tau: float = 0.5
    u: float = 0.0
    dim: int = field(default=4, init=False)

    def __post_init__(self):
        check_tau(self.tau)
        if self.u < 0:
            raise TFLabError(f"u must be nonnegative, got {self.u}")

    def _log(self, pts):
        x, w, y, eta = np.moveaxis(pts, -1, 0)
        base = 1.0 + np.abs(x - self.tau * eta) + np.abs(w + (1.0 - self.tau) * y)
        return self.u * np.log(base)


@dataclass(frozen=True)
class Const(WeightSpec):
    c: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not self.c > 0:
            raise TFLabError(f"constant weight must be positive, got {self.c}")

    def _log(self, pts):
        return np.full(pts.shape[:-1], math.log(self.c))


@dataclass(frozen=True)
class Tensor(WeightSpec):
    """(a (x) b)(p, q) = a(p) b(q)."""

    left: WeightSpec
    right: WeightSpec

    @property
    def dim(self):
        return self.left.dim + self.right.dim

    def _log(self, pts):
        d = self.left.dim
        return self.left._log(pts[..., :d]) + self.right._log(pts[..., d:])


@dataclass(frozen=True)
class Product(WeightSpec):
    """Pointwise product of two weights of the same dimension."""

    left: WeightSpec
    right: WeightSpec

    def __post_init__(self):
        if self.left.dim != self.right.dim:
            raise TFLabError("pointwise product needs weights of equal dimension")

    @property
    def dim(self):
        return self.left.dim

    def _log(self, pts):
        return self.left._log(pts) + self.right._log(pts)


@dataclass(frozen=True)
class Reciprocal(WeightSpec):
    inner: WeightSpec

    @property
    def dim(self):
        return self.inner.dim

    def _log(self, pts):
        return -self.inner._log(pts)


@dataclass(frozen=True)
class Restrict(WeightSpec):
    """m|_1(x) = m(x, 0) and m|_2(w) = m(0, w) for a weight on R^(2d)."""

    inner: WeightSpec
    axis: int = 1

    def __post_init__(self):
        if self.axis not in (1, 2):
            raise TFLabError(f"restriction axis must be 1 or 2, got {self.axis}")
        if self.inner.dim % 2:
            raise TFLabError("restriction needs a weight of even dimension")

    @property
    def dim(self):
        return self.inner.dim // 2

    def _log(self, pts):
        zeros = np.zeros_like(pts)
        full = np.concatenate((pts, zeros) if self.axis == 1 else (zeros, pts), axis=-1)
        return self.inner._log(full)


def eval_weight(spec, point):
    """Value of ``spec`` at one point (or an array of points)."""
    val = spec(point)
    return float(val) if np.ndim(val) == 0 else val


def is_trivial(spec):
    """True when ``spec`` is identically one by construction."""
    if isinstance(spec, Const):
        return spec.c == 1.0
    if isinstance(spec, SubExp):
        return spec.k == 0
    if isinstance(spec, Poly):
        return spec.u == 0
    if isinstance(spec, MTau):
        return spec.u == 0
    if isinstance(spec, (Tensor, Product)):
        return is_trivial(spec.left) and is_trivial(spec.right)
    if isinstance(spec, (Reciprocal, Restrict)):
        return is_trivial(spec.inner)
    return False


# ---------------------------------------------------------------------------
# spec string grammar

_ATOMS = {
    "subexp": (SubExp, {"gamma": float, "k": float, "dim": int}),
    "poly": (Poly, {"u": float, "dim": int}),
    "mtau": (MTau, {"tau": float, "u": float}),
    "const": (Const, {"c": float, "dim": int}),
}
_KV = re.compile(r"^\s*[A-Za-z_]\w*\s*=")


def _split_top(text):
    """Split on commas at paren depth zero."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise TFLabError(f"unbalanced parentheses in {text!r}")
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    if depth:
        raise TFLabError(f"unbalanced parentheses in {text!r}")
    parts.append(text[start:])
    # "subexp:gamma=1,k=2" is split into two pieces; glue key=value tails back on
    merged = []
    for part in parts:
        if merged and "(" not in part and ":" not in part and _KV.match(part):
            merged[-1] += "," + part
        else:
            merged.append(part)
    return [p.strip() for p in merged]


def _parse_params(body, allowed, name):
    params = {}
    if not body.strip():
        return params
    for item in body.split(","):
        if "=" not in item:
            raise TFLabError(f"expected key=value in {name} parameters, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in allowed:
            raise TFLabError(f"unknown parameter {key!r} for {name}; allowed: {sorted(allowed)}")
        try:
            params[key] = allowed[key](val)
        except ValueError as exc:
            raise TFLabError(f"bad value for {name}.{key}: {val!r}") from exc
    return params


def parse_weight(text):
    """Parse a weight spec string such as ``tensor(subexp:gamma=1,k=1,const:c=1)``."""
    text = text.strip()
    m = re.fullmatch(r"(\w+)\((.*)\)", text, flags=re.S)
    if m:
        head, inner = m.group(1).lower(), m.group(2)
        args = [parse_weight(a) for a in _split_top(inner)]
        if head in ("tensor", "prod"):
            if len(args) != 2:
                raise TFLabError(f"{head}() takes two weights, got {len(args)}")
            return Tensor(*args) if head == "tensor" else Product(*args)
        if len(args) != 1:
            raise TFLabError(f"{head}() takes one weight, got {len(args)}")
        if head == "recip":
            return Reciprocal(args[0])
        if head in ("restrict1", "restrict2"):
            return Restrict(args[0], int(head[-1]))
        raise TFLabError(f"unknown weight combinator {head!r}")
    name, _, body = text.partition(":")
    name = name.strip().lower()
    if name not in _ATOMS:
        raise TFLabError(f"unknown weight {name!r}; expected one of {sorted(_ATOMS)}")
    cls, allowed = _ATOMS[name]
    if name == "const" and body.strip() and "=" not in body:
        body = "c=" + body
    return cls(**_parse_params(body, allowed, name))


def format_weight(spec):
    """Inverse of :func:`parse_weight`."""
    if isinstance(spec, SubExp):
        s = f"subexp:gamma={spec.gamma:g},k={spec.k:g}"
    elif isinstance(spec, Poly):
        s = f"poly:u={spec.u:g}"
    elif isinstance(spec, MTau):
        return f"mtau:tau={spec.tau:g},u={spec.u:g}"
    elif isinstance(spec, Const):
        s = f"const:c={spec.c:g}"
    elif isinstance(spec, Tensor):
        return f"tensor({format_weight(spec.left)},{format_weight(spec.right)})"
    elif isinstance(spec, Product):
        return f"prod({format_weight(spec.left)},{format_weight(spec.right)})"
    elif isinstance(spec, Reciprocal):
        return f"recip({format_weight(spec.inner)})"
    elif isinstance(spec, Restrict):
        return f"restrict{spec.axis}({format_weight(spec.inner)})"
    else:
        raise TFLabError(f"cannot format {spec!r}")
    return s + (f",dim={spec.dim}" if spec.dim != 1 else "")


# ---------------------------------------------------------------------------
# randomized inequality checks

@dataclass
class InequalityReport:
    trials: int
    violations: int
    worst: float
    witness: tuple = None

    @property
    def passed(self):
        return self.violations == 0

    def as_dict(self):
        return {
            "trials": self.trials,
            "violations": self.violations,
            "worst": self.worst,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
        }


def _slack(*terms):
    return 1e-10 * (1.0 + sum(np.abs(t) for t in terms))


def _box(rng, radius, trials, dim):
    return rng.uniform(-radius, radius, size=(trials, dim))


def _report(excess, slack, witnesses, worst_log):
    """Count ``excess > slack`` and locate the worst sample."""
    bad = excess > slack
    i = int(np.argmax(worst_log))
    witness = tuple(np.concatenate([w[i] for w in witnesses]))
    return int(bad.sum()), float(np.exp(worst_log[i])), witness


def check_submultiplicative(spec, box_radius=20.0, trials=100_000, seed=0):
    """Sample m(x + y) <= m(x) m(y); ``worst`` is the largest ratio seen."""
    if trials < 1:
        raise TFLabError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    x = _box(rng, box_radius, trials, spec.dim)
    y = _box(rng, box_radius, trials, spec.dim)
    lhs = spec.log_eval(x + y)
    rhs = spec.log_eval(x) + spec.log_eval(y)
    excess = lhs - rhs
    violations, worst, witness = _report(excess, _slack(lhs, rhs), (x, y), excess)
    return InequalityReport(trials, violations, worst, witness)


def check_moderate(m, v, box_radius=20.0, trials=100_000, seed=0):
    """Sampled sup of m(x + y) / (v(x) m(y)), reported as ``worst``.

    Moderateness shows up as a value that stays put as ``box_radius`` grows.
    """
    if m.dim != v.dim:
        raise TFLabError(f"dimension mismatch: {m.dim} vs {v.dim}")
    rng = np.random.default_rng(seed)
    x = _box(rng, box_radius, trials, m.dim)
    y = _box(rng, box_radius, trials, m.dim)
    excess = m.log_eval(x + y) - v.log_eval(x) - m.log_eval(y)
    i = int(np.argmax(excess))
    return InequalityReport(trials, 0, float(np.exp(excess[i])), tuple(np.concatenate([x[i], y[i]])))


def unit_ball_lattice(dim, per_axis=None):
    """Lattice points of the closed unit ball, always including the sphere's poles."""
    if per_axis is None:
        per_axis = {1: 4001, 2: 401, 3: 61, 4: 25}.get(dim, 11)
    ticks = np.linspace(-1.0, 1.0, per_axis)
    pts = np.array(list(itertools.product(ticks, repeat=dim))) if dim > 1 else ticks[:, None]
    return pts[np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12]


def exponential_dominator(v, C=1.0, eps=1e-6):
    """Exponent k with v-moderate weights bounded by exp(k|x|) weights.

    ``k = max(0, a) + eps`` where ``a = log sup_{|t| <= 1} C v(t)`` over a
    unit-ball lattice.
    """
    if C < 1:
        raise TFLabError(f"moderateness constant must be >= 1, got {C}")
    a = math.log(C) + float(np.max(v.log_eval(unit_ball_lattice(v.dim))))
    return max(0.0, a) + eps


def lemma_t_threshold(gamma, r, s, tau):
    """Smallest admissible t in the subexponential change-of-variables estimate."""
    if gamma < 1:
        raise TFLabError(f"gamma must be >= 1, got {gamma}")
    if r < 0 or s < 0:
        raise TFLabError("r and s must be nonnegative")
    tau = check_tau(tau)
    if tau >= 0.5:
        return r + s * tau ** (1.0 / gamma)
    return r + s * (1.0 + tau * tau) ** (1.0 / (2.0 * gamma))


def lemma24_sides(gamma, r, s, tau, t, x, w, y, eta):
    """Log of both sides of w_{r+s}(x, w) / w_r(y, eta) <= (w_s (x) w_t)(P, Q)."""
    inv = 1.0 / gamma
    lhs = (r + s) * np.hypot(x, w) ** inv - r * np.hypot(y, eta) ** inv
    p = np.hypot((1.0 - tau) * x + tau * y, tau * w + (1.0 - tau) * eta)
    q = np.hypot(w - eta, y - x)
    rhs = s * p ** inv + t * q ** inv
    return lhs, rhs


def check_lemma24(gamma, r, s, tau, t=None, box_radius=20.0, trials=100_000, seed=0):
    """Sample the estimate at (x, w, y, eta) uniform in a box (d = 1).

    Refuses ``t`` below :func:`lemma_t_threshold`, where the estimate is not
    claimed.
    """
    t_min = lemma_t_threshold(gamma, r, s, tau)
    if t is None:
        t = t_min
    if t < t_min * (1 - 1e-15):
        raise TFLabError(f"t = {t} is below the threshold {t_min}")
    rng = np.random.default_rng(seed)
    pts = _box(rng, box_radius, trials, 4)
    lhs, rhs = lemma24_sides(gamma, r, s, tau, t, *pts.T)
    excess = lhs - rhs
    violations, worst, witness = _report(excess, _slack(lhs, rhs), (pts,), excess)
    return InequalityReport(trials, violations, worst, witness)


LEMMA24_GAMMAS = (1.0, 1.5, 2.0)
TAUS = (0.0, 0.25, 0.5, 0.75, 1.0)
BETAS = (0.25, 0.5, 0.75, 1.0)
LEMMA24_RS = (0.0, 1.0, 3.0)


def lemma24_sweep(trials=100_000, seed=0, box_radius=20.0):
    """Run :func:`check_lemma24` over the full (gamma, tau, r, s) grid at t = t_min."""
    results = []
    for i, (gamma, tau, r, s) in enumerate(
        itertools.product(LEMMA24_GAMMAS, TAUS, LEMMA24_RS, LEMMA24_RS)
    ):
        rep = check_lemma24(gamma, r, s, tau, None, box_radius, trials, seed + i)
        results.append(({"gamma": gamma, "tau": tau, "r": r, "s": s}, rep))
    return results


def check_appendix_inequalities(trials=100_000, seed=0, max_dim=6):
    """Sample the four elementary inequalities behind the subexponential estimates.

    * ``norm_order``: ||z||_q <= ||z||_p for 0 < p <= q
    * ``power_sum``: |sum z_i|^beta <= sum |z_i|^beta for 0 < beta <= 1
    * ``power_difference``: |x|^beta - |y|^beta <= |x - y|^beta
    * ``scaled_pair``: |(tau z, (1 - tau) w)|^(1/gamma) against the tau-dependent factor

    Returns a dict of :class:`InequalityReport` keyed by those names.
    """
    rng = np.random.default_rng(seed)
    out = {}

    dims = rng.integers(1, max_dim + 1, size=trials)
    z = rng.standard_normal((trials, max_dim)) * rng.uniform(0.01, 20.0, size=(trials, 1))
    z[np.arange(max_dim)[None, :] >= dims[:, None]] = 0.0
    az = np.abs(z)

    p = rng.uniform(0.05, 4.0, size=trials)
    q = p + rng.uniform(0.0, 4.0, size=trials)
    lq = _log_lp(az, q)
    lp = _log_lp(az, p)
    excess = lq - lp
    out["norm_order"] = _wrap(excess, _slack(lq, lp), (z, p[:, None], q[:, None]), trials)

    beta = rng.choice(BETAS, size=trials)
    lhs = np.abs(z.sum(axis=1)) ** beta
    rhs = np.sum(az ** beta[:, None], axis=1)
    out["power_sum"] = _wrap(lhs - rhs, _slack(lhs, rhs), (z, beta[:, None]), trials)

    x = rng.standard_normal((trials, 3)) * 10.0
    y = rng.standard_normal((trials, 3)) * 10.0
    nx, ny, nxy = (np.linalg.norm(v, axis=1) for v in (x, y, x - y))
    lhs = nx ** beta - ny ** beta
    rhs = nxy ** beta
    out["power_difference"] = _wrap(lhs - rhs, _slack(lhs, rhs), (x, y, beta[:, None]), trials)

    tau = rng.choice(TAUS, size=trials)
    gamma = rng.choice(LEMMA24_GAMMAS, size=trials)
    zz = rng.standard_normal((trials, 2)) * 10.0
    ww = rng.standard_normal((trials, 2)) * 10.0
    inv = 1.0 / gamma
    scaled = np.hypot(
        np.linalg.norm(tau[:, None] * zz, axis=1), np.linalg.norm((1 - tau)[:, None] * ww, axis=1)
    )
    full = np.hypot(np.linalg.norm(zz, axis=1), np.linalg.norm(ww, axis=1))
    factor = np.where(tau >= 0.5, tau ** inv, (1.0 + tau * tau) ** (0.5 * inv))
    lhs = scaled ** inv
    rhs = factor * full ** inv
    out["scaled_pair"] = _wrap(
        lhs - rhs, _slack(lhs, rhs), (zz, ww, tau[:, None], gamma[:, None]), trials
    )
    return out


def _log_lp(az, p):
    """log ||z||_p computed stably (rows of ``az`` with zero padding)."""
    top = az.max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    scaled = az / safe[:, None]
    return np.log(safe) + np.log(np.sum(scaled ** p[:, None], axis=1)) / p


def _wrap(excess, slack, witnesses, trials):
    violations, _, witness = _report(excess, slack, witnesses, excess)
    return InequalityReport(trials, violations, float(np.max(excess)), witness)


def mtau_domination_constant(tau, u, radius=6.0, steps=13, polish=20):
    """Estimate of sup m^tau_u(P, Q) / (v_u(P) v_u(Q)) over R^4.

    A coarse lattice search over a box, then Nelder-Mead from the ``polish``
    best lattice points; the lattice alone misses the maximum near |P| ~ 0.7.
    Never exceeds the analytic bound 2^u.
    """
    from scipy.optimize import minimize

    ticks = np.linspace(-radius, radius, steps)
    pts = np.array(list(itertools.product(ticks, repeat=4)))
    m = MTau(tau, u)
    v = Tensor(Poly(u, dim=2), Poly(u, dim=2))

    def log_ratio(p):
        p = np.atleast_2d(p)
        return m.log_eval(p) - v.log_eval(p)

    vals = log_ratio(pts)
    best = float(vals.max())
    for start in pts[np.argsort(vals)[::-1][:polish]]:
        res = minimize(lambda p: -log_ratio(p)[0], start * 0.25, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return math.exp(best)
