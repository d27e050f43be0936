"""Helpers for the dual numeric backend (exact rationals / doubles).

Exact mode stores entries as ``fractions.Fraction`` inside object-dtype numpy
arrays; double mode uses plain float64 arrays.  JSON inputs follow one rule:
strings of the form ``"num/den"`` are exact rationals, and in rational mode
plain JSON numbers are read as the decimal they were written as (``0.4`` means
2/5, not the nearest binary double).
"""

from fractions import Fraction

import numpy as np

from .errors import ConfigurationError

Number = int | float | Fraction


def parse_number(value, exact: bool = False) -> Number:
    """Parse a JSON-level scalar.  ``"3/7"`` is always exact; in exact mode a
    plain number is interpreted as its decimal literal."""
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"expected a number, got {value!r}")
    if exact:
        # str() of a float is its shortest decimal repr, so this recovers the
        # decimal the user typed ('0.4' -> 2/5) rather than the binary double.
        return Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    return value


def format_number(value: Number):
    """JSON-friendly form: Fractions become "num/den" strings (integers stay
    plain), floats pass through."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    return value


def to_exact(value: Number) -> Fraction:
    """Exact Fraction view of a scalar.  Floats convert exactly (they are
    dyadic rationals)."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def grid_to_array(rows, exact: bool) -> np.ndarray:
    """Build a 2-d matrix from nested sequences, honoring the backend."""
    if exact:
        data = [[to_exact(parse_number(v, exact=True) if isinstance(v, str) else v)
                 for v in row] for row in rows]
        arr = np.empty((len(data), len(data[0])), dtype=object)
        for i, row in enumerate(data):
            arr[i] = row
        return arr
    return np.asarray(rows, dtype=float)


def is_exact_array(arr: np.ndarray) -> bool:
    return arr.dtype == object


def array_to_float(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return np.asarray([[float(v) for v in row] for row in arr], dtype=float)
    return np.asarray(arr, dtype=float)


def array_to_exact(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return arr
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for k, v in enumerate(np.asarray(arr, dtype=float).reshape(-1)):
        flat[k] = Fraction(v)
    return out
