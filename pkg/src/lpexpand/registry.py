"""Named right-hand sides available to configuration files."""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import ConfigError
from .olver import ComplexPolynomial


@dataclass(frozen=True)
class Rhs:
    name: str
    linear: bool
    g: Optional[Callable] = None
    poly: Optional[ComplexPolynomial] = None
    f: Optional[Callable] = None
    lipschitz: Optional[float] = None


def _unit(z):
    return np.ones_like(np.asarray(z, dtype=complex))


def _zero(z):
    return np.zeros_like(np.asarray(z, dtype=complex))


def _linear(z):
    return np.asarray(z, dtype=complex)


def _cos(z, y):
    return np.cos(y)


REGISTRY = {
    "unit": Rhs("unit", True, g=_unit, poly=ComplexPolynomial([1])),
    "zero": Rhs("zero", True, g=_zero, poly=ComplexPolynomial([0])),
    "linear": Rhs("linear", True, g=_linear, poly=ComplexPolynomial([0, 1])),
    "cos": Rhs("cos", False, f=_cos, lipschitz=1.0),
}


def lookup(name: str) -> Rhs:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown rhs {name!r}; choose one of {', '.join(sorted(REGISTRY))}"
        ) from None
