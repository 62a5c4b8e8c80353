"""Frame decompositions along curves and the generic Frenet-derivative residual."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import ginner, grid_derivative, is_uniform
from .curvegeo import FrenetData

FD_ACCURACY = 6


class SystemMismatchError(ValueError):
    """Order or dimension mismatch for a characterizing system."""


@dataclass
class SystemResiduals:
    name: str
    lines: dict = field(default_factory=dict)  # line label -> max |LHS| over interior samples
    reduced: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def max(self) -> float:
        vals = [v for v in self.lines.values() if np.isfinite(v)]
        return float(max(vals)) if vals else float("nan")

    def passed(self, tol: float) -> bool:
        return bool(self.lines) and self.max() < tol

    def to_dict(self) -> dict:
        return {"name": self.name, "lines": dict(self.lines), "reduced": list(self.reduced), "notes": list(self.notes)}


def line_labels(count: int) -> list[str]:
    return ["T"] + [f"N{j + 1}" for j in range(1, count)]


def components(frenet: FrenetData, vectors: np.ndarray) -> np.ndarray:
    """<X, E_j> for every frame vector, shape (n, frame count)."""
    g = frenet.metric.g(frenet.points)
    return np.einsum("ni,nij,nkj->nk", vectors, g, frenet.frames)


def reconstruction_error(frenet: FrenetData, vectors: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    g = frenet.metric.g(frenet.points)
    diff = vectors - np.einsum("nk,nki->ni", coeffs, frenet.frames)
    return np.sqrt(np.maximum(ginner(g, diff, diff), 0.0))


def arclength_derivative(frenet: FrenetData, values: np.ndarray) -> np.ndarray:
    s = frenet.samples
    if not is_uniform(s):
        raise SystemMismatchError("system residuals need a uniform arc-length grid")
    return grid_derivative(np.asarray(values, dtype=float), s[1] - s[0], 1, FD_ACCURACY)


def curvature_table(frenet: FrenetData, count: int) -> np.ndarray:
    """kappa_1..kappa_count per sample, zero beyond the detected order."""
    n = len(frenet.samples)
    cols = [frenet.kappa(i) if i < frenet.dim else np.zeros(n) for i in range(1, count + 1)]
    return np.stack(cols, axis=1) if cols else np.zeros((n, 0))


def frenet_derivative_components(frenet: FrenetData, coeffs: np.ndarray, frozen: tuple = ()) -> np.ndarray:
    """Frame components of nabla_T (sum_j F_j E_j) using the Frenet formulas.

    Columns listed in ``frozen`` are treated as constants (no derivative term).
    """
    n, k = coeffs.shape
    kap = curvature_table(frenet, k)
    out = np.zeros((n, k))
    for j in range(k):
        if j not in frozen:
            out[:, j] += arclength_derivative(frenet, coeffs[:, j])
        if j > 0:
            out[:, j] += kap[:, j - 1] * coeffs[:, j - 1]
        if j + 1 < k:
            out[:, j] -= kap[:, j] * coeffs[:, j + 1]
    return out


def max_interior(values: np.ndarray) -> float:
    vals = np.abs(np.asarray(values, dtype=float))
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else float("nan")


def reduced_lines(frenet: FrenetData, count: int) -> list[str]:
    """Lines whose curvature terms vanish identically because the curve has lower order."""
    labels = line_labels(count)
    return [labels[j] for j in range(count) if j + 1 >= frenet.order]
