"""Finite-difference stencils and small linear-algebra helpers shared across modules."""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple[int, ...], k: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) / h**k ~ f^(k)(x)."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    if k >= n:
        raise ValueError(f"need more than {k} points for derivative order {k}")
    vander = np.array([x**q / factorial(q) for q in range(n)])
    rhs = np.zeros(n)
    rhs[k] = 1.0
    return np.linalg.solve(vander, rhs)


def central_offsets(k: int, accuracy: int) -> tuple[int, ...]:
    half = (2 * ((k + 1) // 2) - 1 + accuracy) // 2
    return tuple(range(-half, half + 1))


def grid_derivative(values: np.ndarray, h: float, k: int = 1, accuracy: int = 4) -> np.ndarray:
    """Central k-th derivative of uniformly sampled values along axis 0.

    Samples where the stencil does not fit are NaN.
    """
    values = np.asarray(values, dtype=float)
    offsets = central_offsets(k, accuracy)
    w = fd_weights(offsets, k)
    half = offsets[-1]
    n = values.shape[0]
    out = np.full(values.shape, np.nan)
    if n <= 2 * half:
        return out
    acc = np.zeros((n - 2 * half,) + values.shape[1:])
    for o, wj in zip(offsets, w):
        acc += wj * values[half + o : n - half + o]
    out[half : n - half] = acc / h**k
    return out


def callable_derivative(
    f: Callable[[np.ndarray], np.ndarray],
    s: np.ndarray,
    k: int = 1,
    h: float = 2e-3,
    accuracy: int = 6,
) -> np.ndarray:
    """Central k-th derivative of a vectorized function of one variable."""
    s = np.asarray(s, dtype=float)
    offsets = central_offsets(k, accuracy)
    w = fd_weights(offsets, k)
    total = None
    for o, wj in zip(offsets, w):
        if wj == 0.0:
            continue
        term = wj * np.asarray(f(s + o * h))
        total = term if total is None else total + term
    return total / h**k


def is_uniform(grid: np.ndarray, rtol: float = 1e-9) -> bool:
    d = np.diff(grid)
    return bool(d.size) and np.allclose(d, d[0], rtol=rtol, atol=0.0)


def ginner(g: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Batched u^T g v over a leading sample axis."""
    return np.einsum("ni,nij,nj->n", u, g, v)
