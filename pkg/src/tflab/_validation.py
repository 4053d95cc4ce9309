"""Input validation helpers shared by the functional and estimator APIs."""

import numpy as np


class TFLabError(ValueError):
    """Base class for invalid inputs and failed numerical preconditions."""


class PreconditionError(TFLabError):
    """A numerical precondition (invertibility, normalization, ...) failed."""


class StructuralError(TFLabError):
    """A structural precondition (e.g. Hermitian symmetry) failed."""


def is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


def check_power_of_two(n, minimum=8):
    if int(n) != n:
        raise TFLabError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n < minimum or not is_power_of_two(n):
        raise TFLabError(f"n must be a power of two >= {minimum}, got {n}")
    return n


def check_tau(tau, open_interval=False):
    tau = float(tau)
    if open_interval:
        if not 0.0 < tau < 1.0:
            raise TFLabError(f"tau must lie in (0, 1), got {tau}")
    elif not 0.0 <= tau <= 1.0:
        raise TFLabError(f"tau must lie in [0, 1], got {tau}")
    return tau


def check_samples(samples, n):
    arr = np.asarray(samples, dtype=complex)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise TFLabError(f"expected a length-{n} vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise TFLabError("samples contain non-finite values")
    return arr


def check_signal_batch(X, n=None):
    """Coerce ``X`` to a complex 2-D array of shape (n_signals, n)."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise TFLabError(f"expected a 2-D array of signals, got ndim={arr.ndim}")
    arr = arr.astype(complex)
    if n is not None and arr.shape[1] != n:
        raise TFLabError(f"expected signals of length {n}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise TFLabError("signals contain non-finite values")
    return arr


def check_exponent(p, name="p"):
    p = float(p)
    if not p > 0:
        raise TFLabError(f"{name} must be positive (or inf), got {p}")
    return p
