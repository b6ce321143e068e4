"""Polynomial truncation of Arrhenius-type exponentials.

The mobility terms of the conserved-field models carry a factor
exp(-Q / (kB T)) that couples a learnable activation energy Q to the
temperature field. Truncating the exponential series in x = Q/(kB T)
around 0 splits each term into a parameter vector [D0, D0*Q, D0*Q^2, ...]
and temperature-only weights, which is the inner-product form the
learner needs. The truncation error is controlled by the Lagrange
remainder: every derivative of exp(-x) has magnitude at most 1 for
x >= 0, so the error after order n is at most x^(n+1)/(n+1)!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class TaylorDecomposition:
    """A truncated expansion around `center` in inner-product form.

    param_terms[i] describes the parameter-side factor (theta - a)^i / i!;
    feature_scalers[i] is the i-th derivative of the expanded function at
    the center. Evaluating the inner product reproduces the partial sum.
    """

    center: float
    order: int
    param_terms: tuple[str, ...]
    feature_scalers: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        if len(self.param_terms) != self.order + 1 or len(self.feature_scalers) != self.order + 1:
            raise ValueError("param_terms and feature_scalers must have order+1 entries")

    def evaluate(self, theta: float) -> float:
        acc = 0.0
        for i, deriv in enumerate(self.feature_scalers):
            acc += (theta - self.center) ** i / math.factorial(i) * deriv
        return acc


@dataclass(frozen=True)
class RemainderBound:
    """Worst-case truncation error of an order-n partial sum."""

    order: int
    bound_value: float

    def __post_init__(self) -> None:
        if self.bound_value < 0.0:
            raise ValueError(f"bound must be >= 0, got {self.bound_value}")


def expand_exp_ratio(order: int) -> Callable[[np.ndarray], np.ndarray]:
    """Rule x -> sum_{i=0..order} (-x)^i / i!, the truncated exp(-x).

    Accepts scalars or arrays; terms are accumulated in index order so the
    result is reproducible bitwise.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    inv_fact = [1.0 / math.factorial(i) for i in range(order + 1)]

    def partial_sum(x):
        x = np.asarray(x, dtype=np.float64)
        acc = np.full(x.shape, inv_fact[0])
        term = np.ones_like(acc)
        for i in range(1, order + 1):
            term = term * (-x)
            acc = acc + term * inv_fact[i]
        return acc if acc.shape else float(acc)

    return partial_sum


def remainder_bound_exp(x: float, order: int) -> RemainderBound:
    """Lagrange bound x^(n+1)/(n+1)! for the order-n truncation of exp(-x).

    Valid for x >= 0, where all derivatives of exp(-x) are bounded by 1 on
    the expansion interval.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if not (x >= 0.0):
        raise ValueError(f"x must be >= 0 for the monotone derivative bound, got {x}")
    return RemainderBound(order, float(x) ** (order + 1) / math.factorial(order + 1))


def arrhenius_param_vector(d0: float, q: float, order: int) -> np.ndarray:
    """Parameter-side factors [d0, d0*q, d0*q^2, ..., d0*q^order]."""
    return d0 * np.power(float(q), np.arange(order + 1, dtype=np.float64))


def arrhenius_mobility_weights(
    kb_t: np.ndarray, order: int, vm: float = 1.0
) -> list[np.ndarray]:
    """Temperature-side factors (-1)^i * vm / (i! * (kB T)^(i+1)).

    kb_t is the pointwise product kB*T; pairing weight i with parameter
    d0*q^i and summing reproduces the truncated mobility
    d0 * exp(-q/(kB T)) * vm / (kB T).
    """
    kb_t = np.asarray(kb_t, dtype=np.float64)
    inv = vm / kb_t
    weights = []
    sign = 1.0
    for i in range(order + 1):
        weights.append(sign / math.factorial(i) * inv)
        inv = inv / kb_t
        sign = -sign
    return weights


def decompose_arrhenius_term(
    d0: float, q: float, order: int, kb: float, vm: float = 1.0
) -> tuple[Callable[[float, float], np.ndarray], Callable[[np.ndarray, np.ndarray], list[np.ndarray]]]:
    """Split d0 * exp(-q/(kB T)) * vm/(kB T) * base into inner-product form.

    Returns (param_builder, feature_builder). param_builder(d0, q) gives
    the parameter vector [d0 * q^i]; feature_builder(T, base_field) gives
    the matching state-only fields. Their inner product reproduces the
    truncated term, with error bounded by remainder_bound_exp at
    x = q/(kB T) scaled by d0 * vm/(kB T).
    """
    if d0 <= 0.0:
        raise ValueError(f"prefactor must be > 0, got {d0}")
    if q < 0.0:
        raise ValueError(f"activation energy must be >= 0, got {q}")
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if kb <= 0.0:
        raise ValueError(f"kB must be > 0, got {kb}")

    def param_builder(d0_val: float = d0, q_val: float = q) -> np.ndarray:
        return arrhenius_param_vector(d0_val, q_val, order)

    def feature_builder(temperature: np.ndarray, base_field: np.ndarray) -> list[np.ndarray]:
        weights = arrhenius_mobility_weights(kb * np.asarray(temperature), order, vm=vm)
        return [w * base_field for w in weights]

    return param_builder, feature_builder
