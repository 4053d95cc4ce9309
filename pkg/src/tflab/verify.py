"""Verification suites.  Each returns a JSON-ready report

    {"suite", "passed", "metrics", "tolerances", "seed", "config"}

and contains no timing or other run-dependent values, so reruns with the same
seed are byte-identical.
"""

import math

import numpy as np

from ._validation import TFLabError
from .gabor import (
    FrameError,
    GaborSystem,
    Lattice,
    analysis,
    convolution_relation_check,
    dual_window,
    frame_bounds,
    holder_check,
    lattice_from_physical,
    mod_norm,
    parseval_box,
    synthesis,
    young_check,
)
from .grid import SampledSignal, gaussian, make_grid, norm, random_signal
from .ops import (
    TAU_PROBES,
    gaussian_mixture_corpus,
    gaussian_symbol,
    kernel_equality_check,
    localization_matrix,
    matrix_element_identity_check,
    random_grid_probes,
    schur_bound,
    stft_expansion_check,
    subexp_symbol,
    tau_quantization_matrix,
    weak_form_check,
)
from .spectral import (
    decay_fit,
    frequency_decay_fit,
    geometric_fit,
    hermite_functions,
    hermitian_eig,
    phase_space_decay_fit,
    schatten_quasi_norm,
    schatten_tail,
    singular_values,
)
from .tfr import check_wigner_stft_relation, tf_shift
from .weights import (
    SubExp,
    Const,
    Tensor,
    check_appendix_inequalities,
    lemma24_sweep,
)
from .grid import inner

SUITES = {}


def suite(name):
    def register(fn):
        SUITES[name] = fn
        return fn
    return register


def _report(name, passed, metrics, tolerances, seed, config):
    return {
        "suite": name,
        "passed": bool(passed),
        "metrics": metrics,
        "tolerances": tolerances,
        "seed": seed,
        "config": config,
    }


def run_suite(name, **config):
    if name not in SUITES:
        raise TFLabError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    return SUITES[name](**config)


@suite("weights")
def verify_weights(seed=0, trials=100_000, **_):
    sweep = lemma24_sweep(trials=trials, seed=seed)
    lemma_viol = sum(rep.violations for _, rep in sweep)
    worst = max(rep.worst for _, rep in sweep)
    appendix = check_appendix_inequalities(trials=trials, seed=seed + 10_000)
    app_viol = {k: rep.violations for k, rep in appendix.items()}
    metrics = {
        "lemma_configurations": len(sweep),
        "lemma_violations": lemma_viol,
        "lemma_worst_ratio": worst,
        "appendix_violations": app_viol,
        "violations": lemma_viol + sum(app_viol.values()),
    }
    passed = metrics["violations"] == 0
    return _report("weights", passed, metrics, {"relative_slack": 1e-10}, seed,
                   {"trials": trials, "box_radius": 20.0})


@suite("wigner-stft")
def verify_wigner_stft(n=128, seed=0, **_):
    grid = make_grid(n)
    g0 = gaussian(grid)
    shifted = gaussian(grid, center=0.5, freq=-0.25)
    metrics = {
        "tau_half_gaussian": check_wigner_stft_relation(g0, g0, 0.5),
        "tau_half_shifted": check_wigner_stft_relation(shifted, g0, 0.5),
        "tau_quarter_gaussian": check_wigner_stft_relation(g0, g0, 0.25),
        "tau_three_quarter_gaussian": check_wigner_stft_relation(g0, g0, 0.75),
    }
    tol = {"grid_probes": 1e-8, "interpolated_probes": 1e-6}
    passed = (
        max(metrics["tau_half_gaussian"], metrics["tau_half_shifted"]) <= tol["grid_probes"]
        and max(metrics["tau_quarter_gaussian"], metrics["tau_three_quarter_gaussian"])
        <= tol["interpolated_probes"]
    )
    return _report("wigner-stft", passed, metrics, tol, seed, {"n": n})


def kernel_equality_errors(n):
    grid = make_grid(n)
    g0 = gaussian(grid)
    return kernel_equality_check(gaussian_symbol(), g0, g0, TAU_PROBES)


@suite("kernel-equality")
def verify_kernel_equality(n=64, seed=0, **_):
    rep = kernel_equality_errors(n)
    finer = kernel_equality_errors(2 * n)
    metrics = {
        "errors": {str(k): v for k, v in rep["errors"].items()},
        "max_rel_error": rep["max_rel_error"],
        "max_rel_error_2n": finer["max_rel_error"],
        "decreasing_with_n": finer["max_rel_error"] < rep["max_rel_error"],
    }
    tol = {"max_rel_error": 1e-6}
    passed = rep["max_rel_error"] <= tol["max_rel_error"]
    return _report("kernel-equality", passed, metrics, tol, seed, {"n": n})


@suite("frames")
def verify_frames(n=64, seed=0, a_step=4, b_step=4, **_):
    grid = make_grid(n)
    rng = np.random.default_rng(seed)
    sys = GaborSystem(gaussian(grid), Lattice(a_step, b_step, grid))
    A, B = frame_bounds(sys)
    h = dual_window(sys)
    recon = 0.0
    for _ in range(20):
        f = random_signal(grid, rng)
        back = synthesis(analysis(f, sys), h)
        recon = max(recon, norm(SampledSignal(grid, back.samples - f.samples)) / norm(f))
    sandwich_viol = 0
    for _ in range(100):
        f = random_signal(grid, rng)
        energy = float(np.sum(np.abs(analysis(f, sys).values) ** 2))
        nf2 = norm(f) ** 2
        sandwich_viol += not (A * nf2 - 1e-10 <= energy <= B * nf2 + 1e-10)
    critical = GaborSystem(gaussian(grid), Lattice(int(math.isqrt(n)), int(math.isqrt(n)), grid))
    try:
        dual_window(critical)
        critical_failure, critical_min = False, None
    except FrameError as exc:
        critical_failure, critical_min = True, exc.min_eig
    pb = parseval_box(grid, a_step)
    f = random_signal(grid, rng)
    parseval_gap = abs(mod_norm(f, pb.window, pb.lattice, 2, 2) - norm(f))
    metrics = {
        "frame_bounds": [A, B],
        "bound_ratio": B / A,
        "reconstruction_error": recon,
        "sandwich_violations": sandwich_viol,
        "critical_gaussian_frame_failure": critical_failure,
        "critical_min_eigenvalue": critical_min,
        "parseval_norm_gap": parseval_gap,
    }
    tol = {"reconstruction": 1e-9, "sandwich_slack": 1e-10, "parseval": 1e-10}
    passed = (
        recon <= tol["reconstruction"]
        and sandwich_viol == 0
        and critical_failure
        and parseval_gap <= tol["parseval"]
    )
    return _report("frames", passed, metrics, tol, seed,
                   {"n": n, "a_step": a_step, "b_step": b_step})


@suite("young-holder")
def verify_young_holder(seed=0, trials=2000, **_):
    young = {}
    for i, (p, q, r) in enumerate([(1, 1, 1), (2, 1, 2), (0.5, 0.5, 0.5)]):
        young[f"{p:g},{q:g},{r:g}"] = young_check(p, q, r, trials=trials, seed=seed + i).as_dict()
    holder = {
        "2,2,1": holder_check(2, 2, 1, trials=trials, seed=seed + 10).as_dict(),
        "2,2,1,subexp": holder_check(2, 2, 1, SubExp(1.0, 1.0), trials=trials, seed=seed + 11).as_dict(),
        "1,inf,1,subexp": holder_check(1, math.inf, 1, SubExp(1.0, 1.0), trials=trials, seed=seed + 12).as_dict(),
    }
    tol = {"young_C": 1.0 + 1e-12}
    passed = all(r["worst_C"] <= tol["young_C"] for r in young.values()) and all(
        r["violations"] == 0 for r in holder.values()
    )
    return _report("young-holder", passed, {"young": young, "holder": holder}, tol, seed,
                   {"trials": trials})


@suite("matrix-element")
def verify_matrix_element(n=64, seed=0, **_):
    grid = make_grid(n)
    g0 = gaussian(grid)
    sigma = gaussian_symbol()
    probes = random_grid_probes(grid, 25, seed)
    f = gaussian(grid, 0.3, -0.2)
    h = gaussian(grid, -0.4, 0.1, 1.2)
    me = {str(t): matrix_element_identity_check(sigma, g0, t, probes) for t in TAU_PROBES}
    weak = {str(t): weak_form_check(sigma, f, h, t) for t in TAU_PROBES}
    tol = {"matrix_element": 1e-6, "weak_form": 1e-8}
    passed = max(me.values()) <= tol["matrix_element"] and max(weak.values()) <= tol["weak_form"]
    return _report("matrix-element", passed, {"matrix_element": me, "weak_form": weak}, tol, seed,
                   {"n": n, "probes": 25})


@suite("stft-expansion")
def verify_stft_expansion(n=64, seed=0, **_):
    grid = make_grid(n)
    g0 = gaussian(grid)
    rng = np.random.default_rng(seed)
    f = random_signal(grid, rng, bandlimit=grid.n * grid.dw / 4)
    sigma = gaussian_symbol()
    errs = {}
    for t in TAU_PROBES:
        errs[f"{t:g}/random"] = stft_expansion_check(sigma, t, f, g0)
        errs[f"{t:g}/window"] = stft_expansion_check(sigma, t, g0, g0)
    tol = {"relative_error": 1e-8}
    return _report("stft-expansion", max(errs.values()) <= tol["relative_error"], {"errors": errs},
                   tol, seed, {"n": n})


@suite("schur")
def verify_schur(n=64, seed=0, count=20, tau=0.5, **_):
    grid = make_grid(n)
    g0 = gaussian(grid)
    rows = []
    violations = 0
    for sym in gaussian_mixture_corpus(grid, count, seed):
        bound = schur_bound(sym, tau=tau, g=g0)
        opnorm = float(singular_values(tau_quantization_matrix(sym, tau, grid)).s[0])
        violations += opnorm > bound
        rows.append({"bound": bound, "opnorm": opnorm})
    metrics = {"violations": violations, "corpus": rows,
               "min_margin": min(r["bound"] - r["opnorm"] for r in rows)}
    return _report("schur", violations == 0, metrics, {"domination": 0.0}, seed,
                   {"n": n, "count": count, "tau": tau})


def weyl_gaussian_spectrum(n):
    grid = make_grid(n)
    op = tau_quantization_matrix(gaussian_symbol(), 0.5, grid)
    return op, singular_values(op)


@suite("schatten")
def verify_schatten(n=128, seed=0, **_):
    op, spec = weyl_gaussian_spectrum(n)
    ratio, r2 = geometric_fit(spec.s, 20)
    tail = schatten_tail(spec, 0.5, 30)
    hs_gap = abs(schatten_quasi_norm(spec, 2) - op.frobenius())
    metrics = {
        "first_singular_values": spec.s[:8],
        "geometric_ratio": ratio,
        "geometric_r2": r2,
        "p_half_tail_beyond_30": tail,
        "p_half_norm": schatten_quasi_norm(spec, 0.5),
        "hilbert_schmidt_gap": hs_gap,
    }
    tol = {"r2": 0.95, "tail": 1e-6, "hilbert_schmidt": 1e-9}
    passed = r2 >= tol["r2"] and tail <= tol["tail"] and hs_gap <= tol["hilbert_schmidt"]
    return _report("schatten", passed, metrics, tol, seed, {"n": n})


def _physical_bandlimited(grid, coeffs, freqs):
    """sum_k c_k exp(2 pi i w_k x) tapered by exp(-pi (x/2)^2); depends only on the physical grid."""
    x = grid.x
    vals = (np.exp(2j * np.pi * np.outer(x, freqs)) @ coeffs) * np.exp(-np.pi * (x / 2.0) ** 2)
    return SampledSignal(grid, vals)


def conv_relation_corpus(grid, seed, count=50):
    """Seeded corpus defined by physical parameters, identical across n at fixed L."""
    rng = np.random.default_rng(seed)
    freqs = np.arange(-8, 9) / 8.0
    corpus = []
    for _ in range(count):
        c = rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))
        corpus.append(_physical_bandlimited(grid, c, freqs))
    corpus.append(gaussian(grid))
    corpus.extend(hermite_functions(4, grid)[1:])
    return corpus


CONV_INDICES = {"p": math.inf, "q": 1, "r": math.inf, "u": math.inf, "t": 1, "gamma": 1}


def conv_relation_weights():
    m = Tensor(SubExp(1.0, 1.0), Const(1.0))
    v = Tensor(SubExp(1.0, 2.0), SubExp(1.0, 1.0))
    return m, v, Const(1.0)


def conv_relation_ratios(n, seed, L=8.0, alpha=0.5, beta=0.5):
    grid = make_grid(n, L)
    sys = GaborSystem(gaussian(grid), lattice_from_physical(grid, alpha, beta))
    m, v, nu = conv_relation_weights()
    corpus = conv_relation_corpus(grid, seed)
    h = gaussian(grid)
    return [convolution_relation_check(f, h, CONV_INDICES, m, v, nu, sys)["ratio"] for f in corpus], sys


@suite("conv-relation")
def verify_conv_relation(seed=0, **_):
    r64, sys = conv_relation_ratios(64, seed)
    r128, _ = conv_relation_ratios(128, seed)
    grid = sys.window.grid
    m, v, nu = conv_relation_weights()
    f = conv_relation_corpus(grid, seed)[0]
    h = gaussian(grid)
    base = convolution_relation_check(f, h, CONV_INDICES, m, v, nu, sys)["ratio"]
    scaled = convolution_relation_check(f.scaled(3.7), h, CONV_INDICES, m, v, nu, sys)["ratio"]
    scale_gap = abs(scaled - base) / base
    max64, max128 = max(r64), max(r128)
    stability = abs(max128 - max64) / max64
    metrics = {
        "max_ratio_n64": max64,
        "max_ratio_n128": max128,
        "finite": bool(np.all(np.isfinite(r64 + r128))),
        "scale_invariance_gap": scale_gap,
        "stability_gap": stability,
        "corpus_size": len(r64),
    }
    tol = {"scale_invariance": 1e-12, "stability": 0.2}
    passed = metrics["finite"] and scale_gap <= tol["scale_invariance"] and stability <= tol["stability"]
    return _report("conv-relation", passed, metrics, tol, seed,
                   {"L": 8.0, "alpha": 0.5, "beta": 0.5, "indices": CONV_INDICES})


def daubechies_benchmark(n=128, symbol=None):
    grid = make_grid(n)
    g0 = gaussian(grid)
    op = localization_matrix(gaussian_symbol() if symbol is None else symbol, g0, g0)
    return grid, op, hermitian_eig(op)


@suite("decay")
def verify_decay(n=128, seed=0, **_):
    grid, _, pairs = daubechies_benchmark(n)
    herm = hermite_functions(6, grid)
    overlaps = [abs(inner(pairs[k].vector, herm[k])) for k in range(6)]
    top = decay_fit(pairs[0].vector)
    _, _, sub_pairs = daubechies_benchmark(n, subexp_symbol(1.0))
    v = sub_pairs[0].vector
    fits = [decay_fit(v), frequency_decay_fit(v), phase_space_decay_fit(v)]
    values = [p.value for p in pairs[:6]]
    metrics = {
        "eigenvalues": values,
        "overlaps": overlaps,
        "gaussian_fit": top.as_dict(),
        "subexp_fits": [f.as_dict() for f in fits],
    }
    tol = {"overlap": 0.99, "exponent_range": [1.8, 2.2], "r2": 0.99}
    passed = (
        min(overlaps) >= tol["overlap"]
        and all(a > b > 0 for a, b in zip(values, values[1:]))
        and top.gamma_hat == 0.5
        and 1.8 <= 1.0 / top.gamma_hat <= 2.2
        and top.r2 >= tol["r2"]
        and all(f.k_hat > 0 and f.decaying for f in fits)
    )
    return _report("decay", passed, metrics, tol, seed, {"n": n})
