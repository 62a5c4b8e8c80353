"""Closed-form derivative callbacks generated with sympy."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import sympy as sp

_LOCALS = {"log": sp.log, "exp": sp.exp, "sqrt": sp.sqrt, "pi": sp.pi}


def parse(expr, symbol: str = "s") -> sp.Expr:
    if isinstance(expr, sp.Expr):
        return expr
    if isinstance(expr, (int, float)):
        return sp.Float(expr)
    return sp.sympify(expr, locals={symbol: sp.Symbol(symbol, real=True), **_LOCALS})


def _vectorize(fn: Callable, n_args: int = 1) -> Callable:
    def wrapped(*args):
        out = fn(*args)
        shape = np.broadcast(*[np.asarray(a) for a in args]).shape
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    return wrapped


def scalar_function(expr, symbol: str = "s", order: int = 2) -> list[Callable]:
    """[f, f', ..., f^(order)] as vectorized numpy callables."""
    x = sp.Symbol(symbol, real=True)
    e = parse(expr, symbol).subs(sp.Symbol(symbol), x)
    fns = []
    for _ in range(order + 1):
        fns.append(_vectorize(sp.lambdify(x, e, "numpy")))
        e = sp.diff(e, x)
    return fns


def vector_derivatives(exprs: Sequence, symbol: str = "t", max_order: int = 4) -> Callable:
    """Callback (s, k) -> k-th derivative of the component expressions, shape (n, m)."""
    x = sp.Symbol(symbol, real=True)
    comps = [parse(e, symbol).subs(sp.Symbol(symbol), x) for e in exprs]
    table = []
    for _ in range(max_order + 1):
        table.append([_vectorize(sp.lambdify(x, c, "numpy")) for c in comps])
        comps = [sp.diff(c, x) for c in comps]

    def derivative(s, k: int) -> np.ndarray:
        if k > max_order:
            raise ValueError(f"derivatives available up to order {max_order}, asked for {k}")
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.stack([f(s) for f in table[k]], axis=1)

    return derivative
