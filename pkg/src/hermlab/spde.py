"""Linear stochastic heat equation driven by Hermite noise: Green function,
existence condition, mild-solution sampling, covariance quadrature, and the
limit laws when the Hurst multi-index approaches 1 or 1/2.

The mild solution is a Wiener integral of the window
F(u, y) = 1_{(0,t)}(u) G(t-u, x-y) against a (d+1)-parameter Hermite sheet
with Hurst (H0, H); its covariance reduces by a Parseval identity to a
singular double time integral handled in quadrature.fbm_time_kernel_integral.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.special import erf, gamma as gamma_fn

from .core import (
    DomainError,
    GridSpec,
    HeatWindow,
    HermiteSpec,
    HurstMultiIndex,
    LimitScenario,
    RandomField,
    UnsupportedError,
    cell_increments,
)
from .fields import sample_hermite_limit_rv, simulate_hermite_sheet
from .integrals import mixed_limit_sampler, riemann_weights
from .quadrature import (
    fbm_time_kernel_integral,
    limit_constant,
    limit_covariance_bifractional,
    q_alpha,
)


def green(t, x, d: int = 1):
    """Heat kernel (2 pi t)^(-d/2) exp(-|x|^2/(2t)) for t > 0, else 0.

    x has shape (..., d) (or is scalar when d=1); t broadcasts against it.
    """
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != d:
        raise DomainError(f"spatial point dimension {x.shape[-1]} != {d}")
    t = np.asarray(t, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    safe = np.where(t > 0.0, t, 1.0)
    g = (2.0 * math.pi * safe) ** (-d / 2.0) * np.exp(-r2 / (2.0 * safe))
    out = np.where(t > 0.0, g, 0.0)
    return float(out) if out.ndim == 0 else out


class ExistenceReport(NamedTuple):
    ok: bool
    gamma_cond: float


def existence_condition(h0: float, H, d: int) -> ExistenceReport:
    """A unique mild solution exists iff d < 4 H0 + sum_i (2 H_i - 1)."""
    Hs = H.values if isinstance(H, HurstMultiIndex) else tuple(np.atleast_1d(H))
    gamma_cond = 4.0 * h0 + sum(2.0 * h - 1.0 for h in Hs)
    return ExistenceReport(bool(d < gamma_cond), float(gamma_cond))


@dataclass(frozen=True)
class HeatSpec:
    """Heat equation with additive Hermite noise of order q and Hurst
    (H0, H); spatial truncation half-width and grid resolutions control the
    discretized mild-solution sampler."""

    q: int
    h0: float
    h: tuple[float, ...]
    trunc: Optional[float] = None
    t_steps: int = 256
    x_steps: int = 256
    n_internal: int = 512

    def __init__(self, q, h0, h, trunc=None, t_steps=256, x_steps=256, n_internal=512):
        h = tuple(float(v) for v in np.atleast_1d(h))
        object.__setattr__(self, "q", int(q))
        object.__setattr__(self, "h0", float(h0))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "trunc", None if trunc is None else float(trunc))
        object.__setattr__(self, "t_steps", int(t_steps))
        object.__setattr__(self, "x_steps", int(x_steps))
        object.__setattr__(self, "n_internal", int(n_internal))
        if self.q < 1:
            raise DomainError("chaos order must be >= 1")
        if not 0.5 < self.h0 < 1.0 or any(not 0.5 < v < 1.0 for v in h):
            raise DomainError("Hurst entries must lie in (1/2, 1)")
        ok, gamma_cond = existence_condition(self.h0, h, len(h))
        if not ok:
            raise DomainError(
                f"no mild solution: d={len(h)} >= 4*H0 + sum(2H-1) = {gamma_cond}"
            )

    @property
    def d(self) -> int:
        return len(self.h)

    def half_width(self, t: float) -> float:
        return self.trunc if self.trunc is not None else 6.0 * math.sqrt(t)


def window_coverage(t: float, half_width: float, d: int, panels: int = 512) -> float:
    """Fraction of int_0^t int G(t-u, y) dy du captured by |y_a| <= half_width."""
    u = (np.arange(panels) + 0.5) * (t / panels)
    frac = erf(half_width / np.sqrt(2.0 * u)) ** d
    return float(np.mean(frac))


@functools.lru_cache(maxsize=64)
def _mild_setup(spec: HeatSpec, t: float, x: tuple) -> tuple:
    L = spec.half_width(t)
    cov = window_coverage(t, L, spec.d)
    if cov < 0.99:
        raise DomainError(
            f"spatial truncation keeps only {cov:.4f} of the kernel mass; widen trunc"
        )
    origins = [0.0] + [xa - L for xa in x]
    extents = [t] + [2.0 * L] * spec.d
    steps = [spec.t_steps] + [spec.x_steps] * spec.d
    grid = GridSpec(origins, extents, steps)
    window = HeatWindow(t, x, L)
    weights = riemann_weights(window, grid)
    return grid, weights


def sample_mild_solution(spec: HeatSpec, t: float, x, stream: np.random.Generator) -> float:
    """One draw of the discretized mild solution u(t, x): a Riemann-Stieltjes
    sum of the heat window against increments of a simulated (d+1)-parameter
    Hermite sheet on [0,t] x [x-L, x+L]^d."""
    x = tuple(float(v) for v in np.atleast_1d(x))
    if len(x) != spec.d:
        raise DomainError("spatial point dimension mismatch")
    if t < 0:
        raise DomainError("t must be >= 0")
    if t == 0:
        return 0.0
    grid, weights = _mild_setup(spec, float(t), x)
    sheet_spec = HermiteSpec(spec.q, HurstMultiIndex((spec.h0,) + spec.h))
    field = simulate_hermite_sheet(sheet_spec, grid, spec.n_internal, stream)
    return float(np.sum(weights * cell_increments(field.values)))


# ---------------------------------------------------------------------------
# Covariance quadrature (d = 1)
# ---------------------------------------------------------------------------

def heat_covariance_quadrature(spec: HeatSpec, t: float, s: float, x=None) -> float:
    """E u(t,x) u(s,x) for the d=1 heat equation via the spectral reduction:

        H0(2H0-1) * prod_a [ H_a(2H_a-1) q_(2H_a-1) 2^(1-H_a) Gamma(1-H_a) ]
        * int_0^t int_0^s |u-v|^(2H0-2) (t+s-u-v)^(sum H - d) du dv,

    where 2^(1-H) Gamma(1-H) = int |tau|^(1-2H) e^(-tau^2/2) dtau.  The value
    does not depend on x (spatial stationarity).
    """
    if spec.d != 1:
        raise UnsupportedError("covariance quadrature implemented for d = 1")
    if t < 0 or s < 0:
        raise DomainError("t and s must be >= 0")
    if t == 0 or s == 0:
        return 0.0
    h0 = spec.h0
    pref = h0 * (2.0 * h0 - 1.0)
    for ha in spec.h:
        pref *= (
            ha * (2.0 * ha - 1.0)
            * q_alpha(2.0 * ha - 1.0)
            * 2.0 ** (1.0 - ha)
            * float(gamma_fn(1.0 - ha))
        )
    gexp = sum(spec.h) - spec.d
    return pref * fbm_time_kernel_integral(t, s, h0, gexp)


# ---------------------------------------------------------------------------
# Limit covariances and limit samplers
# ---------------------------------------------------------------------------

def heat_limit_covariance(
    scenario: LimitScenario,
    h0: Optional[float],
    t: float,
    s: float,
) -> float:
    """Limit of E u(t,x)u(s,x) when the spatial axes in A_k (and the time
    index, unless h0 is given) are driven to 1/2.

    h0 = None: time index driven to 1/2 (cases 1 and 3), returning the
    bifractional covariance with exponent 1-gamma0 and the white-noise-limit
    prefactor.  h0 = value: time index fixed (case 2); the fractional time
    kernel is kept and integrated against (t+s-u-v)^(-gamma0).
    """
    k = scenario.k
    if k < 1:
        raise DomainError("at least one spatial axis must be driven to 1/2")
    fixed_h = [scenario.fixed[a] for a in sorted(scenario.fixed)]
    d = k + len(scenario.b_axes) + len(fixed_h)
    targets = scenario.target(0.5, d)
    gamma0 = d - 0.5 * k - sum(targets[a] for a in range(d) if a not in scenario.a_axes)
    scale = limit_constant(fixed_h, k)
    if h0 is None:
        return limit_covariance_bifractional(t, s, gamma0, scale)
    if not 0.5 < h0 < 1.0:
        raise DomainError(f"fixed H0={h0} not in (1/2, 1)")
    if t == 0 or s == 0:
        return 0.0
    time_part = h0 * (2.0 * h0 - 1.0) * fbm_time_kernel_integral(t, s, h0, -gamma0)
    return scale * time_part


def heat_limit_sampler_H1(
    scenario: LimitScenario,
    h0: Optional[float],
    t: float,
    x,
    lower: Union[RandomField, np.random.Generator],
    q: Optional[int] = None,
    outer_panels: int = 64,
) -> float:
    """Sample of the limit law of u(t,x) when Hurst components tend to 1.

    h0 = None drives the time index to 1.  If every spatial axis is driven to
    1 as well (case 3) the limit is t * H_q(Z)/sqrt(q!) and `lower` must be a
    stream; otherwise `lower` is a Hermite sheet over the remaining axes
    (time first when h0 is fixed) and the collapsed coordinates of the heat
    window are integrated deterministically.
    """
    x = tuple(float(v) for v in np.atleast_1d(x))
    d = len(x)
    a_spatial = scenario.a_axes
    for a in a_spatial:
        if not 0 <= a < d:
            raise DomainError(f"spatial axis {a} out of range")
    all_spatial_to_one = len(a_spatial) == d
    if h0 is None and all_spatial_to_one:
        if q is None:
            raise DomainError("case 3 needs the chaos order q")
        if not isinstance(lower, np.random.Generator):
            raise DomainError("case 3 samples from a stream, not a field")
        return t * sample_hermite_limit_rv(q, lower)
    if not isinstance(lower, RandomField):
        raise DomainError("cases 1 and 2 need the lower-dimensional Hermite sheet")
    lo, hi = lower.grid.lo(), lower.grid.hi()
    sp_off = 0 if h0 is None else 1
    # spatial half-width available on the lower grid around x fixes the window
    # truncation on the axes that stay stochastic
    fixed_spatial = [a for a in range(d) if a not in a_spatial]
    widths = [min(x[a] - lo[sp_off + i], hi[sp_off + i] - x[a])
              for i, a in enumerate(fixed_spatial)]
    trunc = min(widths) if widths else 6.0 * math.sqrt(t)
    window = HeatWindow(t, x, trunc)
    if h0 is None:
        mixed_axes = (0,) + tuple(1 + a for a in a_spatial)
    else:
        mixed_axes = tuple(1 + a for a in a_spatial)
    lower_hurst = lower.meta.spec.hurst.values if lower.meta.spec else None
    fixed_map = {}
    if h0 is not None:
        fixed_map[0] = h0
    for i, a in enumerate(fixed_spatial):
        fixed_map[1 + a] = lower_hurst[sp_off + i] if lower_hurst else 0.75
    mixed = LimitScenario(a_axes=mixed_axes, fixed=fixed_map)
    return mixed_limit_sampler(window, mixed, lower, outer_panels=outer_panels)
