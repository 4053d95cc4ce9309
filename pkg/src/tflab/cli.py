"""``tflab`` command-line front end.

Exit codes: 0 success (or suite passed), 1 suite failed, 2 usage or parse
error, 3 numerical precondition failure, 4 structural precondition failure.
"""

import argparse
import math
import os
import sys
from dataclasses import asdict, dataclass, field

from . import io
from ._validation import PreconditionError, StructuralError, TFLabError, check_tau
from .gabor import parse_lattice, mod_norm
from .grid import make_grid
from .ops import localization_matrix, tau_quantization_matrix
from .spectral import (
    decay_fit,
    frequency_decay_fit,
    hermite_functions,
    hermitian_eig,
    phase_space_decay_fit,
    singular_values,
)
from .grid import inner
from .specs import parse_symbol, parse_window
from .tfr import stft, tau_wigner
from .verify import SUITES, run_suite
from .weights import format_weight, parse_weight

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_PRECONDITION, EXIT_STRUCTURAL = 0, 1, 2, 3, 4


@dataclass
class ExperimentConfig:
    n: int = 64
    L: float = None
    phi1: str = "gauss"
    phi2: str = "gauss"
    symbol: str = "gauss2d:sx=1,sw=1"
    tau_list: list = field(default_factory=lambda: [0.5])
    lattice: str = "lat:a=4,b=4"
    weights: dict = field(default_factory=dict)
    indices: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "."
    formats: tuple = ("json", "csv")

    def grid(self):
        return make_grid(self.n, self.L)


def _formats(text):
    items = tuple(s.strip().lower() for s in text.split(",") if s.strip())
    bad = set(items) - {"json", "csv"}
    if bad or not items:
        raise argparse.ArgumentTypeError(f"formats must be a subset of json,csv, got {text!r}")
    return items


def _index(text):
    return math.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def read_config_file(path):
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise TFLabError(f"cannot read config {path}: {exc}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise TFLabError(f"{path}:{num}: expected key=value, got {raw.strip()!r}")
        values[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return values


def _common(p):
    p.add_argument("--config", help="key=value file; flags override its values")
    p.add_argument("--n", type=int, default=None, help="grid size, a power of two (default 64)")
    p.add_argument("--L", type=float, default=None, help="period length (default sqrt(n))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory (default $TFLAB_OUT or .)")
    p.add_argument("--format", dest="formats", type=_formats, default=("json", "csv"))


def build_parser():
    parser = argparse.ArgumentParser(prog="tflab", description="Time-frequency analysis lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stft", help="short-time Fourier transform of a signal")
    _common(p)
    p.add_argument("--signal", default="gauss")
    p.add_argument("--window", default="gauss")

    p = sub.add_parser("wigner", help="cross tau-Wigner distribution")
    _common(p)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--f", default="gauss")
    p.add_argument("--g", default="gauss")

    p = sub.add_parser("locop", help="localization operator or tau-quantization")
    _common(p)
    p.add_argument("--symbol", default="gauss2d:sx=1,sw=1")
    p.add_argument("--phi1", default="gauss")
    p.add_argument("--phi2", default="gauss")
    p.add_argument("--tau", type=float, default=None,
                   help="build Op_tau(symbol) instead of the localization operator")
    p.add_argument("--eig", type=_bool, nargs="?", const=True, default=False,
                   help="Hermitian eigendecomposition, Hermite overlaps and decay fits")
    p.add_argument("--count", type=int, default=6, help="number of eigenpairs reported")

    p = sub.add_parser("modnorm", help="discrete weighted modulation norm")
    _common(p)
    p.add_argument("--signal", default="gauss")
    p.add_argument("--window", default="gauss")
    p.add_argument("--lattice", default="lat:a=4,b=4")
    p.add_argument("--p", type=_index, default=2.0)
    p.add_argument("--q", type=_index, default=2.0)
    p.add_argument("--weight", default="const:1")

    p = sub.add_parser("verify", help="run a verification suite")
    _common(p)
    p.add_argument("suite", help="one of: " + ", ".join(sorted(SUITES)))
    p.add_argument("--trials", type=int, default=None)
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        file_values = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        names = {}
        for action in sub._actions:
            names[action.dest] = action.dest
            for opt in action.option_strings:
                names[opt.lstrip("-").replace("-", "_")] = action.dest
        unknown = set(file_values) - set(names) - {"config", "help"}
        if unknown:
            raise TFLabError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{names[k]: v for k, v in file_values.items()})
        args = parser.parse_args(argv)
    if args.n is None and args.command != "verify":
        args.n = 64
    return args


def _outdir(args):
    return io.output_dir(args.out)


def _emit_field(args, stem, fld, meta):
    out = _outdir(args)
    written = []
    if "json" in args.formats:
        path = os.path.join(out, f"{stem}.json")
        io.write_json(path, {**io.field_to_dict(fld), "meta": meta})
        written.append(path)
    if "csv" in args.formats:
        path = os.path.join(out, f"{stem}.csv")
        io.write_field_csv(path, fld, magnitude_only=True)
        written.append(path)
    return written


def cmd_stft(args):
    grid = make_grid(args.n, args.L)
    f, g = parse_window(args.signal, grid), parse_window(args.window, grid)
    fld = stft(f, g)
    o = grid.origin
    meta = {"signal": args.signal, "window": args.window, "center_value": fld.values[o, o]}
    return _emit_field(args, "stft", fld, meta)


def cmd_wigner(args):
    tau = check_tau(args.tau)
    grid = make_grid(args.n, args.L)
    f, g = parse_window(args.f, grid), parse_window(args.g, grid)
    fld = tau_wigner(f, g, tau)
    return _emit_field(args, f"wigner_tau{tau:g}", fld, {"f": args.f, "g": args.g, "tau": tau})


def _safe_fit(fit, f, domain):
    # flat eigenvectors (e.g. of the identity) have no envelope to fit
    try:
        return fit(f).as_dict()
    except TFLabError as exc:
        return {"domain": domain, "error": str(exc)}


def cmd_locop(args):
    grid = make_grid(args.n, args.L)
    sigma = parse_symbol(args.symbol)
    if args.tau is None:
        op = localization_matrix(sigma, parse_window(args.phi1, grid), parse_window(args.phi2, grid))
        kind = "localization"
    else:
        op = tau_quantization_matrix(sigma, check_tau(args.tau), grid)
        kind = f"tau_quantization:{args.tau:g}"
    out = _outdir(args)
    written = [os.path.join(out, "operator.json")]
    io.save_operator(written[0], op)
    cfg = experiment_config(args)
    report = {"kind": kind, "config": {k: v for k, v in asdict(cfg).items() if k != "out_dir"}}
    if args.eig:
        pairs = hermitian_eig(op)
        count = min(args.count, grid.n // 4)
        herm = hermite_functions(count, grid)
        top = pairs[:count]
        overlaps = [abs(inner(p.vector, h)) for p, h in zip(top, herm)]
        report.update(io.spectrum_report([p.value for p in pairs], overlaps, []))
        report["decay_fits"] = [_safe_fit(fit, pairs[0].vector, dom) for fit, dom in (
            (decay_fit, "time"), (frequency_decay_fit, "frequency"), (phase_space_decay_fit, "phase_space"))]
    else:
        report["singular_values"] = singular_values(op).s
    if "json" in args.formats:
        path = os.path.join(out, "spectrum.json")
        io.write_json(path, report)
        written.append(path)
    if "csv" in args.formats:
        path = os.path.join(out, "spectrum.csv")
        values = report.get("eigenvalues", report.get("singular_values"))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# n={grid.n} L={grid.L!r}\nk,value\n")
            for k, v in enumerate(values):
                fh.write(f"{k},{float(v)!r}\n")
        written.append(path)
    return written


def cmd_modnorm(args):
    grid = make_grid(args.n, args.L)
    f, g = parse_window(args.signal, grid), parse_window(args.window, grid)
    lat = parse_lattice(args.lattice, grid)
    weight = parse_weight(args.weight)
    value = mod_norm(f, g, lat, args.p, args.q, weight)
    report = {
        "signal": args.signal, "window": args.window, "lattice": args.lattice,
        "p": args.p, "q": args.q, "weight": format_weight(weight), "value": value,
    }
    path = os.path.join(_outdir(args), "modnorm.json")
    io.write_json(path, report)
    return [path]


def cmd_verify(args):
    if args.suite not in SUITES:
        raise TFLabError(f"unknown suite {args.suite!r}; expected one of {sorted(SUITES)}")
    config = {"seed": args.seed}
    if args.trials is not None:
        config["trials"] = args.trials
    if args.n is not None:
        config["n"] = args.n
    report = run_suite(args.suite, **config)
    path = os.path.join(_outdir(args), f"verify_{args.suite}.json")
    io.write_json(path, report)
    return report


COMMANDS = {"stft": cmd_stft, "wigner": cmd_wigner, "locop": cmd_locop, "modnorm": cmd_modnorm}


def experiment_config(args):
    """The ExperimentConfig view of parsed arguments (recorded for provenance)."""
    cfg = ExperimentConfig(n=args.n, L=args.L, seed=args.seed, out_dir=args.out,
                           formats=tuple(args.formats))
    for name in ("phi1", "phi2", "symbol", "lattice"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "tau", None) is not None:
        cfg.tau_list = [args.tau]
    return cfg


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        if args.command == "verify":
            report = cmd_verify(args)
            status = "PASS" if report["passed"] else "FAIL"
            print(f"{status} {report['suite']}")
            return EXIT_OK if report["passed"] else EXIT_FAILED
        for path in COMMANDS[args.command](args):
            print(path)
        return EXIT_OK
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except StructuralError as exc:
        print(f"tflab: structural precondition failed: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except PreconditionError as exc:
        print(f"tflab: numerical precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TFLabError as exc:
        print(f"tflab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
