"""Coupling-strength distributions from atomic positions in a TEM00 mode.

An atom crossing the cavity at transverse offset y and longitudinal offset z
sees g(y, z) = g_max |cos(2 pi z / lambda_c)| exp(-y^2 / w^2).  Integrating
uniform position densities through this map gives the distribution P(g); a
rectangular mask restricts the positions to a window around an antinode and
concentrates P(g) near g_max, while the unmasked beam piles density up at
low coupling.  Everything is deterministic grid quadrature so regression
runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .observables import W2Value, mixture_w2

# position-quadrature resolution for the change of variables to P(g)
_POSITION_CELLS = 1200


class EmptySupportError(ValueError):
    """No probability mass survives the low-coupling cutoff."""


class NodeEvaluationError(RuntimeError):
    """An evaluator failed at a specific grid node."""

    def __init__(self, node, original: BaseException):
        self.node = node
        self.original = original
        super().__init__(f"evaluator failed at node {node}: {original}")


@dataclass(frozen=True)
class CouplingDistribution:
    """Discrete quadrature of P(g) on [F g_max, g_max]."""

    g_max: float
    cutoff_fraction: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    provenance: str = "custom-table"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights < 0):
            raise ValueError("weights must be >= 0")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        lo = self.cutoff_fraction * self.g_max
        if np.any(nodes < lo - 1e-12) or np.any(nodes > self.g_max + 1e-12):
            raise ValueError("nodes outside [F g_max, g_max]")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def density(self) -> np.ndarray:
        """kappa P(g) per node (weight divided by local bin width)."""
        edges = _node_edges(self.nodes, self.cutoff_fraction * self.g_max, self.g_max)
        return self.weights / np.diff(edges)

    def mean(self) -> float:
        return float(np.dot(self.nodes, self.weights))


@dataclass(frozen=True)
class CouplingGrid:
    """Outer-product quadrature over two coupling strengths."""

    nodes1: np.ndarray = field(repr=False)
    nodes2: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)  # shape (len(nodes1), len(nodes2))
    symmetric: bool = False


def _node_edges(nodes: np.ndarray, lo: float, hi: float) -> np.ndarray:
    mids = 0.5 * (nodes[1:] + nodes[:-1])
    return np.concatenate(([lo], mids, [hi]))


def _position_histogram(g_of_yz: Callable, y_span: tuple[float, float],
                        z_span: tuple[float, float], g_max: float,
                        cutoff: float, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    y = np.linspace(*y_span, _POSITION_CELLS + 1)
    z = np.linspace(*z_span, _POSITION_CELLS + 1)
    ym = 0.5 * (y[1:] + y[:-1])
    zm = 0.5 * (z[1:] + z[:-1])
    g = g_of_yz(ym[:, None], zm[None, :]).ravel()
    lo = cutoff * g_max
    edges = np.linspace(lo, g_max, resolution + 1)
    hist, _ = np.histogram(g, bins=edges)
    weights = hist.astype(float)
    total = weights.sum()
    if total == 0:
        raise EmptySupportError(
            f"no probability mass above the cutoff F = {cutoff}")
    nodes = 0.5 * (edges[1:] + edges[:-1])
    keep = weights > 0
    weights = weights[keep] / total
    # histogram floor can leave a 1e-16 shortfall; pin the sum exactly
    weights /= weights.sum()
    return nodes[keep], weights


def build_distribution(kind: str, g_max: float, cutoff_fraction: float | None = None,
                       resolution: int = 24, g0: float | None = None) -> CouplingDistribution:
    """P(g) for a given beam geometry.

    Parameters
    ----------
    kind : {"uniform-beam", "masked-beam", "delta"}
        uniform-beam: positions uniform over half a wavelength and |y| <= 2w.
        masked-beam: rectangular mask |y| <= w/4, |z - z_antinode| <= lambda/16.
        delta: a frozen atom at coupling ``g0``.
    cutoff_fraction : float, optional
        Lower support cutoff F in (0, 1); defaults to 0.1 (uniform) or 0.5
        (masked).
    resolution : int
        Number of quadrature nodes (>= 8 except for delta).
    """
    if g_max <= 0:
        raise ValueError("g_max must be > 0")
    if kind == "delta":
        g0 = g_max if g0 is None else g0
        if not 0 < g0 <= g_max:
            raise ValueError("delta distribution needs 0 < g0 <= g_max")
        frac = 0.0 if cutoff_fraction is None else cutoff_fraction
        return CouplingDistribution(
            g_max=g_max, cutoff_fraction=frac,
            nodes=np.array([g0]), weights=np.array([1.0]), provenance="delta")
    if resolution < 8:
        raise ValueError("resolution must be >= 8 nodes")

    def g_of_yz(y, z):
        return g_max * np.abs(np.cos(2 * np.pi * z)) * np.exp(-y * y)

    if kind == "uniform-beam":
        frac = 0.1 if cutoff_fraction is None else cutoff_fraction
        spans = ((-2.0, 2.0), (0.0, 0.5))
    elif kind == "masked-beam":
        frac = 0.5 if cutoff_fraction is None else cutoff_fraction
        spans = ((-0.25, 0.25), (0.0, 1.0 / 16.0))
    else:
        raise ValueError(f"unknown distribution kind {kind!r}")
    if not 0 < frac < 1:
        raise ValueError("cutoff fraction must satisfy 0 < F < 1")
    nodes, weights = _position_histogram(g_of_yz, spans[0], spans[1],
                                         g_max, frac, resolution)
    return CouplingDistribution(g_max=g_max, cutoff_fraction=frac,
                                nodes=nodes, weights=weights, provenance=kind)


def product_distribution(d1: CouplingDistribution,
                         d2: CouplingDistribution) -> CouplingGrid:
    """Factorized two-atom grid P(g1) P(g2)."""
    w = np.outer(d1.weights, d2.weights)
    symmetric = (d1.nodes.shape == d2.nodes.shape
                 and np.array_equal(d1.nodes, d2.nodes)
                 and np.array_equal(d1.weights, d2.weights))
    return CouplingGrid(nodes1=d1.nodes.copy(), nodes2=d2.nodes.copy(),
                        weights=w, symmetric=symmetric)


def average_w2(grid: CouplingDistribution | CouplingGrid,
               evaluator: Callable) -> W2Value:
    """Quadrature of an evaluator over the coupling distribution.

    The reduction runs in ascending node order so repeated runs sum in the
    same sequence bit for bit.  Evaluator exceptions are re-raised with the
    offending node attached.
    """
    terms: list[tuple[float, W2Value]] = []
    if isinstance(grid, CouplingDistribution):
        for g, p in zip(grid.nodes, grid.weights):
            try:
                terms.append((float(p), evaluator(float(g))))
            except Exception as exc:  # noqa: BLE001 - annotate and rethrow
                raise NodeEvaluationError(float(g), exc) from exc
    else:
        for i, g1 in enumerate(grid.nodes1):
            for j, g2 in enumerate(grid.nodes2):
                p = float(grid.weights[i, j])
                try:
                    terms.append((p, evaluator(float(g1), float(g2))))
                except Exception as exc:  # noqa: BLE001
                    raise NodeEvaluationError((float(g1), float(g2)), exc) from exc
    return mixture_w2(terms)
