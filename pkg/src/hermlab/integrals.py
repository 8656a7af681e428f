"""Wiener integrals against simulated Hermite sheets and the mixed limit
object that appears when part of the Hurst index is driven to 1."""
from __future__ import annotations

import numpy as np

from .core import (
    DomainError,
    GridSpec,
    Integrand,
    LimitScenario,
    RandomField,
    TruncationError,
    cell_increments,
)

MASS_TOL = 0.01


def riemann_weights(f: Integrand, grid: GridSpec) -> np.ndarray:
    """Integrand values at every grid-cell midpoint (the fixed part of the
    Riemann-Stieltjes sum; reuse across replicates of the same grid)."""
    if f.d != grid.d:
        raise DomainError("integrand and grid dimension mismatch")
    mids = [grid.axis_mids(a) for a in range(grid.d)]
    pts = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
    return f.eval(pts)


def covered_mass_fraction(f: Integrand, grid: GridSpec, panels: int = 128) -> float:
    """Fraction of the L1 mass of f captured inside the grid box."""
    lo_f, hi_f = f.support()
    if np.isscalar(panels):
        panels = [panels] * f.d
    mids, widths = [], []
    for a in range(f.d):
        edges = np.linspace(lo_f[a], hi_f[a], panels[a] + 1)
        mids.append(0.5 * (edges[:-1] + edges[1:]))
        widths.append(edges[1] - edges[0])
    pts = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
    vals = np.abs(f.eval(pts))
    total = float(vals.sum())
    if total == 0.0:
        return 1.0
    lo_g, hi_g = grid.lo(), grid.hi()
    inside = np.all((pts >= lo_g) & (pts <= hi_g), axis=-1)
    return float(vals[inside].sum()) / total


def wiener_hermite_integral(f: Integrand, field: RandomField, mass_tol: float = MASS_TOL) -> float:
    """Riemann-Stieltjes sum sum_cells f(midpoint) * rectangle increment.

    Exact for grid-aligned step functions; raises TruncationError when more
    than mass_tol of the L1 mass of f falls outside the field's domain.
    """
    if f.d != field.grid.d:
        raise DomainError("integrand and field dimension mismatch")
    covered = covered_mass_fraction(f, field.grid)
    if covered < 1.0 - mass_tol:
        raise TruncationError(
            f"field domain captures only {covered:.4f} of the integrand mass"
        )
    return float(np.sum(riemann_weights(f, field.grid) * cell_increments(field.values)))


def mixed_limit_sampler(
    f: Integrand,
    scenario: LimitScenario,
    lower_field: RandomField,
    outer_panels: int = 64,
) -> float:
    """Sample of the H->1 limit object: the A_k coordinates of f are
    integrated deterministically, the remaining coordinates go against a
    lower-dimensional Hermite sheet,

        X = int du_{A_k} ( int f(u_{A_k}, .) dZ^(q, d-k) ).
    """
    d = f.d
    k = scenario.k
    if k < 1:
        raise DomainError("mixed limit needs at least one axis driven to 1")
    if k >= d:
        raise DomainError(
            "all axes driven to 1: the limit is (int f) * H_q(Z)/sqrt(q!), "
            "use sample_hermite_limit_rv"
        )
    outer = sorted(scenario.a_axes)
    inner = [a for a in range(d) if a not in outer]
    if lower_field.grid.d != d - k:
        raise DomainError("lower field dimension must be d - k")

    lo, hi = f.support()
    axis_coords, outer_widths = [], []
    for a in range(d):
        if a in outer:
            edges = np.linspace(lo[a], hi[a], outer_panels + 1)
            axis_coords.append(0.5 * (edges[:-1] + edges[1:]))
            outer_widths.append(edges[1] - edges[0])
        else:
            axis_coords.append(lower_field.grid.axis_mids(inner.index(a)))
    pts = np.stack(np.meshgrid(*axis_coords, indexing="ij"), axis=-1)
    F = f.eval(pts)
    dz = cell_increments(lower_field.values)
    Fm = np.moveaxis(F, outer, range(k))
    inner_integrals = np.tensordot(Fm, dz, axes=(range(k, k + d - k), range(d - k)))
    return float(np.sum(inner_integrals)) * float(np.prod(outer_widths))
