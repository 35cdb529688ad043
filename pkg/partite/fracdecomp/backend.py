"""Numeric backend definitions."""

from fractions import Fraction
from typing import Any, Dict, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "BACKENDS",
    "EXACT_BACKEND",
    "FLOAT_BACKEND",
    "NumericBackend",
    "Scalar",
    "get_backend",
]

Scalar = Union[Fraction, float]


class NumericBackend:
    """
    Scalar arithmetic used for clique weights.

    The exact backend stores :class:`fractions.Fraction` values in numpy
    object arrays and compares with zero tolerance. The float backend
    stores float64 values and compares within a tolerance.
    """

    def __init__(
            self,
            name: str,
            *,
            exact: bool,
            tolerance: float,
            verify_tolerance: float,
    ) -> None:
        self.name = name
        self.exact = exact
        self.tolerance = tolerance
        self.verify_tolerance = verify_tolerance

    def __repr__(self) -> str:
        return f"NumericBackend({self.name!r})"

    @property
    def dtype(self) -> Any:
        """The numpy dtype of weight vectors."""
        return object if self.exact else np.float64

    def scalar(self, value: Union[Fraction, int, float]) -> Scalar:
        """Convert a value into this backend's scalar type."""
        if self.exact:
            if isinstance(value, float):
                return Fraction(*value.as_integer_ratio())
            return Fraction(value)
        return float(value)

    def zero(self) -> Scalar:
        """The additive identity."""
        return self.scalar(0)

    def zeros(self, size: int) -> np.ndarray:
        """A zero vector of the given length."""
        if self.exact:
            return np.full(size, Fraction(0), dtype=object)
        return np.zeros(size, dtype=np.float64)

    def array(self, values: Any) -> np.ndarray:
        """Convert a sequence of numbers into a vector of scalars."""
        return np.array([self.scalar(v) for v in values], dtype=self.dtype)

    def is_zero(self, value: Scalar, *, tolerance: Union[float, None] = None) -> bool:
        """Whether a scalar is zero, within tolerance for the float backend."""
        if self.exact:
            return bool(value == 0)
        limit = self.tolerance if tolerance is None else tolerance
        return bool(abs(value) <= limit)

    def zero_mask(self, values: np.ndarray) -> np.ndarray:
        """Elementwise :meth:`is_zero` over a vector."""
        if self.exact:
            return np.asarray(values == 0, dtype=bool)
        return np.asarray(np.abs(values) <= self.tolerance, dtype=bool)

    def equal(self, a: Scalar, b: Scalar) -> bool:
        """Whether two scalars are equal under this backend."""
        return self.is_zero(a - b)

    def format(self, value: Scalar) -> str:
        """Render a scalar for text output."""
        if self.exact:
            frac = Fraction(value)
            if frac.denominator == 1:
                return str(frac.numerator)
            return f"{frac.numerator}/{frac.denominator}"
        return repr(float(value))


EXACT_BACKEND = NumericBackend("exact", exact=True, tolerance=0.0, verify_tolerance=0.0)
FLOAT_BACKEND = NumericBackend(
    "float",
    exact=False,
    tolerance=1e-9,
    verify_tolerance=1e-6,
)

BACKENDS: Dict[str, NumericBackend] = {
    backend.name: backend
    for backend in (EXACT_BACKEND, FLOAT_BACKEND)
}


def get_backend(name: Union[str, NumericBackend]) -> NumericBackend:
    """
    Look up a backend by name.

    :param name: ``exact`` or ``float``, or a backend object.
    :returns: The backend.
    :raises DomainError: The name is not a known backend.
    """
    if isinstance(name, NumericBackend):
        return name
    try:
        return BACKENDS[name]
    except KeyError:
        raise DomainError(
            f"Unknown backend {name!r}, expected one of {sorted(BACKENDS)}",
        ) from None
