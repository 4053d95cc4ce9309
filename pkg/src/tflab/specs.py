"""Parsers for window and symbol spec strings used by the CLI and config files.

Windows: ``gauss``, ``gauss:width=1,x0=0,w0=0``, ``hermite:k=3``, ``box:w=4``.
Symbols: ``gauss2d:sx=1,sw=1``, ``const:1``, ``subexp2d:k=1``, ``field:path.json``.
``gauss2d`` also takes ``x0``, ``w0`` and a possibly complex amplitude ``c``.
"""

from ._validation import TFLabError
from .grid import box, gaussian
from .ops import constant_symbol, field_symbol, gaussian_symbol, subexp_symbol


def _params(body, allowed, name):
    out = {}
    body = body.strip()
    if not body:
        return out
    for item in body.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep:
            raise TFLabError(f"expected key=value in {name!r} spec, got {item!r}")
        if key not in allowed:
            raise TFLabError(f"unknown parameter {key!r} for {name!r}; allowed: {sorted(allowed)}")
        try:
            out[key] = allowed[key](val.strip())
        except ValueError as exc:
            raise TFLabError(f"bad value {val!r} for {name}.{key}") from exc
    return out


def parse_window(text, grid):
    from .spectral import hermite_functions

    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    if name == "gauss":
        kw = _params(body, {"width": float, "x0": float, "w0": float}, name)
        return gaussian(grid, kw.get("x0", 0.0), kw.get("w0", 0.0), kw.get("width", 1.0))
    if name == "hermite":
        k = _params(body, {"k": int}, name).get("k", 0)
        if k < 0:
            raise TFLabError(f"Hermite order must be nonnegative, got {k}")
        return hermite_functions(k + 1, grid)[k]
    if name == "box":
        return box(grid, _params(body, {"w": int}, name).get("w", 1))
    raise TFLabError(f"unknown window {name!r}; expected gauss, hermite or box")


def parse_symbol(text):
    name, _, body = text.strip().partition(":")
    name = name.strip().lower()
    if name == "gauss2d":
        kw = _params(body, {"sx": float, "sw": float, "x0": float, "w0": float, "c": complex}, name)
        if "c" in kw and kw["c"].imag == 0:
            kw["c"] = kw["c"].real
        return gaussian_symbol(**kw)
    if name == "const":
        body = body.strip()
        if body.startswith("c="):
            body = body[2:]
        try:
            c = complex(body) if body else 1.0
        except ValueError as exc:
            raise TFLabError(f"bad constant {body!r}") from exc
        return constant_symbol(c.real if isinstance(c, complex) and c.imag == 0 else c)
    if name == "subexp2d":
        return subexp_symbol(_params(body, {"k": float}, name).get("k", 1.0))
    if name == "field":
        from .io import load_field

        path = body.strip()
        if not path:
            raise TFLabError("field symbol needs a path: field:<file.json>")
        return field_symbol(load_field(path), name=f"field:{path}")
    raise TFLabError(f"unknown symbol {name!r}; expected gauss2d, const, subexp2d or field")
