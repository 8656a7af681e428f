"""Hermite Ornstein-Uhlenbeck processes: simulation of the nonstationary and
stationary solutions of the Langevin equation driven by a Hermite process,
and their limit laws as the Hurst index approaches 1 or 1/2."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    DomainError,
    FieldMeta,
    GridSpec,
    HermiteSpec,
    HurstMultiIndex,
    RandomField,
)
from .fields import hermite_poly, simulate_hermite_sheet

XiSpec = Union[float, tuple]


@dataclass(frozen=True)
class OUSpec:
    """Langevin parameters: dX = -lam X dt + sigma dZ^q_H, initial condition
    xi (a constant or ("gaussian", mean, var)), optional stationary mode with
    truncation horizon M for the infinite-past window."""

    lam: float
    sigma: float
    q: int
    H: float
    xi: XiSpec = 0.0
    stationary: bool = False
    M: Optional[float] = None

    def __post_init__(self):
        if self.lam <= 0 or self.sigma <= 0:
            raise DomainError("need lam > 0 and sigma > 0")
        if self.q < 1:
            raise DomainError("chaos order must be >= 1")
        if not 0.5 < self.H < 1.0:
            raise DomainError(f"H={self.H} not in (1/2, 1)")

    def horizon(self) -> float:
        return self.M if self.M is not None else 10.0 / self.lam


def draw_xi(xi: XiSpec, stream: np.random.Generator) -> float:
    if isinstance(xi, tuple):
        kind = xi[0]
        if kind == "const":
            return float(xi[1])
        if kind == "gaussian":
            _, mean, var = xi
            if var < 0:
                raise DomainError("xi variance must be >= 0")
            return float(mean) + math.sqrt(var) * float(stream.standard_normal())
        raise DomainError(f"unknown initial-condition kind {kind!r}")
    return float(xi)


def simulate_hou(
    spec: OUSpec,
    grid: GridSpec,
    stream: np.random.Generator,
    n_internal: int = 2**14,
) -> RandomField:
    """Nonstationary solution Y(t) = e^(-lam t) (xi + sigma int_0^t e^(lam u) dZ)
    on a one-parameter grid over [0, T].

    xi is drawn first (once per replicate, independent of the driving sheet),
    then one Hermite path on the grid; the integral is a midpoint
    Riemann-Stieltjes cumulative sum.
    """
    if spec.stationary:
        raise DomainError("spec is stationary; use simulate_stationary_hou")
    if grid.d != 1 or abs(grid.origins[0]) > 1e-12:
        raise DomainError("need a one-parameter grid starting at 0")
    xi = draw_xi(spec.xi, stream)
    z = simulate_hermite_sheet(
        HermiteSpec(spec.q, HurstMultiIndex(spec.H)), grid, n_internal, stream
    )
    dz = np.diff(z.values)
    mids = grid.axis_mids(0)
    integ = np.concatenate([[0.0], np.cumsum(np.exp(spec.lam * mids) * dz)])
    nodes = grid.axis_nodes(0)
    y = np.exp(-spec.lam * nodes) * (xi + spec.sigma * integ)
    meta = FieldMeta(spec=z.meta.spec, seed=z.meta.seed, method="hou",
                     internal=z.meta.internal)
    return RandomField(grid=grid, values=y, meta=meta)


def simulate_stationary_hou(
    spec: OUSpec,
    grid: GridSpec,
    stream: np.random.Generator,
    n_internal: int = 2**14,
) -> RandomField:
    """Stationary solution X(t) = sigma int_(-M)^t e^(-lam (t-u)) dZ(u) on a
    grid over [0, T]; the driving Hermite path lives on [-M, T].

    Refuses horizons with lam*M < 5 (truncated tail mass above e^-5).
    """
    if not spec.stationary:
        raise DomainError("spec is nonstationary; use simulate_hou")
    if grid.d != 1 or abs(grid.origins[0]) > 1e-12:
        raise DomainError("need a one-parameter grid starting at 0")
    M = spec.horizon()
    if spec.lam * M < 5.0:
        raise DomainError(f"truncation refused: lam*M = {spec.lam * M:.2f} < 5")
    h = grid.mesh[0]
    m_cells = int(math.ceil(M / h - 1e-12))
    path_grid = GridSpec(-m_cells * h, m_cells * h + grid.extents[0],
                         m_cells + grid.steps[0])
    z = simulate_hermite_sheet(
        HermiteSpec(spec.q, HurstMultiIndex(spec.H)), path_grid, n_internal, stream
    )
    dz = np.diff(z.values)
    mids = path_grid.axis_mids(0)
    integ = np.concatenate([[0.0], np.cumsum(np.exp(spec.lam * mids) * dz)])
    nodes = grid.axis_nodes(0)
    x = spec.sigma * np.exp(-spec.lam * nodes) * integ[m_cells + np.arange(grid.steps[0] + 1)]
    meta = FieldMeta(spec=z.meta.spec, seed=z.meta.seed, method="hou_stationary",
                     internal=z.meta.internal)
    return RandomField(grid=grid, values=x, meta=meta)


def ou_limit_covariance(kind: str, t: float, s: float, lam: float, sigma: float) -> float:
    """H->1/2 limit covariances: the standard (nonstationary) and stationary
    Ornstein-Uhlenbeck Gaussian processes."""
    if t < 0 or s < 0:
        raise DomainError("t and s must be >= 0")
    if lam <= 0 or sigma <= 0:
        raise DomainError("need lam > 0 and sigma > 0")
    base = sigma**2 / (2.0 * lam)
    if kind == "nonstationary":
        return base * (math.exp(-lam * abs(t - s)) - math.exp(-lam * (t + s)))
    if kind == "stationary":
        return base * math.exp(-lam * abs(t - s))
    raise DomainError(f"unknown OU kind {kind!r}")


def ou_limit_rv_H1(
    kind: str,
    t: float,
    lam: float,
    sigma: float,
    xi: XiSpec,
    q: int,
    stream: np.random.Generator,
) -> float:
    """Sample of the H->1 limit law: e^(-lam t) xi + sigma (1-e^(-lam t))
    H_q(Z)/sqrt(q!) in the nonstationary case, (sigma/lam) H_q(Z)/sqrt(q!)
    (time-independent) in the stationary case."""
    if q < 1:
        raise DomainError("chaos order must be >= 1")
    if lam <= 0 or sigma <= 0:
        raise DomainError("need lam > 0 and sigma > 0")
    if kind == "nonstationary":
        xi_val = draw_xi(xi, stream)
        z = float(stream.standard_normal())
        hq = float(hermite_poly(q, z)) / math.sqrt(math.factorial(q))
        return math.exp(-lam * t) * xi_val + sigma * (1.0 - math.exp(-lam * t)) * hq
    if kind == "stationary":
        z = float(stream.standard_normal())
        return sigma / lam * float(hermite_poly(q, z)) / math.sqrt(math.factorial(q))
    raise DomainError(f"unknown OU kind {kind!r}")


def ou_window(spec: OUSpec, t: float):
    """The deterministic window whose Wiener integral gives the OU value at t
    (for quadrature oracles): exp(-lam (t-u)) on [0,t] or on [-M,t]."""
    from .core import ExpWindow

    lo = -spec.horizon() if spec.stationary else 0.0
    return ExpWindow(spec.lam, t, lo=lo)
