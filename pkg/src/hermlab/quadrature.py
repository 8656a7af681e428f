"""Deterministic quadrature for the singular-kernel inner products and every
closed-form constant used by the limit theorems.

The weight |u-v|^(2H-2) is integrated exactly over each panel pair through its
double antiderivative |w|^(2H)/(2H(2H-1)); integrand values are sampled at
panel midpoints.  This removes the diagonal singularity without adaptive
machinery and makes indicator integrands exact for any panel count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as beta_fn, betainc, gamma as gamma_fn

from .core import (
    DomainError,
    HurstMultiIndex,
    Integrand,
    LimitScenario,
    UnsupportedError,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureConfig:
    """Panel counts and diagonal handling for the singular-kernel quadrature.

    mode "exact_cell" integrates |u-v|^(2H-2) exactly over every panel pair;
    mode "midpoint" keeps the exact treatment only on and next to the
    diagonal and uses midpoint kernel values elsewhere (cross-check mode).
    """

    panels: int = 256
    mode: str = "exact_cell"
    tol: float = 1e-6

    def __post_init__(self):
        if self.panels < 8:
            raise DomainError("quadrature needs at least 8 panels per axis")
        if self.tol <= 0:
            raise DomainError("tolerance must be positive")
        if self.mode not in ("exact_cell", "midpoint"):
            raise DomainError(f"unknown diagonal mode {self.mode!r}")


DEFAULT_CFG = QuadratureConfig()


# ---------------------------------------------------------------------------
# Singular-kernel panel masses
# ---------------------------------------------------------------------------

def abs_pow_cell_masses(edges_u: np.ndarray, edges_v: np.ndarray, c: float) -> np.ndarray:
    """Exact integrals of |u-v|^c over all panel pairs, c in (-1, 0].

    Uses the double antiderivative Psi(w) = |w|^(c+2) / ((c+1)(c+2)):
    the mass of cell pair [a,b] x [p,q] is Psi(b-p)+Psi(a-q)-Psi(b-q)-Psi(a-p).
    """
    if c <= -1.0:
        raise DomainError(f"exponent {c} not integrable across the diagonal")

    def psi(w):
        return np.abs(w) ** (c + 2.0) / ((c + 1.0) * (c + 2.0))

    au, bu = edges_u[:-1, None], edges_u[1:, None]
    av, bv = edges_v[None, :-1], edges_v[None, 1:]
    return psi(bu - av) + psi(au - bv) - psi(bu - bv) - psi(au - av)


def _axis_kernel(edges_u, edges_v, H, mode):
    """Panel-pair masses of |u-v|^(2H-2) for one axis (no H(2H-1) prefactor)."""
    c = 2.0 * H - 2.0
    exact = abs_pow_cell_masses(edges_u, edges_v, c)
    if mode == "exact_cell":
        return exact
    mu = 0.5 * (edges_u[:-1] + edges_u[1:])
    mv = 0.5 * (edges_v[:-1] + edges_v[1:])
    hu = np.diff(edges_u)[:, None]
    hv = np.diff(edges_v)[None, :]
    diff = np.abs(mu[:, None] - mv[None, :])
    near = diff <= (hu + hv)  # on or next to the diagonal: keep exact masses
    mid = np.where(near, 1.0, diff) ** c * hu * hv
    return np.where(near, exact, mid)


def _panel_edges(f: Integrand, panels) -> list[np.ndarray]:
    lo, hi = f.support()
    if np.isscalar(panels):
        panels = [int(panels)] * f.d
    return [np.linspace(lo[a], hi[a], panels[a] + 1) for a in range(f.d)]


def _midpoint_values(f: Integrand, edges: Sequence[np.ndarray]) -> np.ndarray:
    mids = [0.5 * (e[:-1] + e[1:]) for e in edges]
    pts = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
    return f.eval(pts)


def _bilinear_form(F: np.ndarray, G: np.ndarray, mats: Sequence[np.ndarray]) -> float:
    """sum_{I,J} F[I] G[J] prod_a W_a[i_a, j_a] via successive contractions."""
    T = F
    for W in mats:
        T = np.tensordot(T, W, axes=(0, 0))
    return float(np.sum(T * G))


def _as_hurst_tuple(H) -> tuple[float, ...]:
    if isinstance(H, HurstMultiIndex):
        return H.values
    if np.isscalar(H):
        return (float(H),)
    return tuple(float(v) for v in H)


# ---------------------------------------------------------------------------
# The <f,g> inner product and the H-bar norm
# ---------------------------------------------------------------------------

def inner_product_HH(f: Integrand, g: Integrand, H, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Weighted double integral
    prod_a H_a(2H_a-1) * int int f(u) g(v) prod_a |u_a-v_a|^(2H_a-2) du dv.

    Equals the covariance of the Wiener integrals of f and g against a
    Hermite sheet of any order.  Exact for indicator integrands.
    """
    Hs = _as_hurst_tuple(H)
    if f.d != g.d or len(Hs) != f.d:
        raise DomainError("f, g and H must share one dimension")
    for h in Hs:
        if not 0.5 < h < 1.0:
            raise DomainError(f"Hurst entry {h} not in (1/2, 1)")
    ef = _panel_edges(f, cfg.panels)
    eg = _panel_edges(g, cfg.panels)
    F = _midpoint_values(f, ef)
    G = _midpoint_values(g, eg)
    mats = [_axis_kernel(ef[a], eg[a], Hs[a], cfg.mode) for a in range(f.d)]
    pref = float(np.prod([h * (2.0 * h - 1.0) for h in Hs]))
    return pref * _bilinear_form(F, G, mats)


def hbar_norm(
    f: Integrand,
    H,
    scenario: LimitScenario,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> float:
    """Norm controlling the H->1 limit of Wiener integrals.

    Sum over prefixes A_j of the scenario's A_k (in the given enumeration
    order) of

        int du_{A_j} | int int |f(u,v)| |f(u,w)|
                        prod_{a not in A_j} |v_a-w_a|^(2H_a-2) dv dw |^(1/2);

    when A_k covers every axis the L1 norm of f is added and the sum stops
    at j = d-1.  No H(2H-1) prefactor on the inner kernel.
    """
    Hs = _as_hurst_tuple(H)
    d = f.d
    if len(Hs) != d:
        raise DomainError("H must have one entry per axis")
    a_axes = scenario.a_axes
    k = len(a_axes)
    if k < 1 or k > d:
        raise DomainError("scenario must send at least one axis to the limit")
    if d > 3 or min(k, d - 1) > 2:
        raise UnsupportedError("hbar norm supports d <= 3 and k <= 2 prefix terms")

    edges = _panel_edges(f, cfg.panels)
    widths = [float(e[1] - e[0]) for e in edges]
    total = 0.0
    if k == d:
        _, vals, vol = _support_abs_mesh(f, edges)
        total += float(np.sum(vals)) * vol

    for j in range(1, min(k, d - 1) + 1):
        outer = sorted(a_axes[:j])
        inner = [a for a in range(d) if a not in outer]
        Fa = np.abs(_midpoint_values(f, edges))
        # outer axes to the front, then flatten them
        Fm = np.moveaxis(Fa, outer, range(j))
        m = int(np.prod(Fm.shape[:j]))
        inner_shape = Fm.shape[j:]
        F2 = Fm.reshape(m, *inner_shape)
        T = F2
        for a in inner:
            W = _axis_kernel(edges[a], edges[a], Hs[a], cfg.mode)
            T = np.tensordot(T, W, axes=(1, 0))
        inner_vals = np.sum(T * F2, axis=tuple(range(1, 1 + len(inner))))
        outer_vol = float(np.prod([widths[a] for a in outer]))
        total += float(np.sum(np.sqrt(np.maximum(inner_vals, 0.0)))) * outer_vol
    return total


def _support_abs_mesh(f, edges):
    vals = np.abs(_midpoint_values(f, edges))
    vol = float(np.prod([e[1] - e[0] for e in edges]))
    return edges, vals, vol


# ---------------------------------------------------------------------------
# L^p admissibility
# ---------------------------------------------------------------------------

class LpReport(NamedTuple):
    l1: float
    l2: float
    l_1_over_h: float
    admissible: bool


def lp_admissibility(f: Integrand, H, cfg: QuadratureConfig = DEFAULT_CFG) -> LpReport:
    """L1, L2 and mixed L^(1/H) norms over the support box, plus the
    membership flag from the inclusion chain L1 n L2 c L^(1/H) c |H_H|.

    The 1/H norm is the iterated (mixed) norm with exponent 1/H_a on axis a,
    integrating axis 0 innermost.
    """
    Hs = _as_hurst_tuple(H)
    if len(Hs) != f.d:
        raise DomainError("H must have one entry per axis")
    edges = _panel_edges(f, cfg.panels)
    vals = np.abs(_midpoint_values(f, edges))
    widths = [float(e[1] - e[0]) for e in edges]
    vol = float(np.prod(widths))
    l1 = float(np.sum(vals)) * vol
    l2 = math.sqrt(float(np.sum(vals**2)) * vol)
    A = vals
    for a in range(f.d):
        p = 1.0 / Hs[a]
        A = (np.sum(A**p, axis=0) * widths[a]) ** (1.0 / p)
    lh = float(A)
    ok = bool(np.isfinite(l1) and np.isfinite(l2))
    return LpReport(l1, l2, lh, ok)


# ---------------------------------------------------------------------------
# Closed-form constants
# ---------------------------------------------------------------------------

def q_alpha(alpha: float) -> float:
    """(2^(1-a) sqrt(pi))^(-1) Gamma(a/2) / Gamma((1-a)/2) for a in (0,1)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    return float(
        gamma_fn(alpha / 2.0) / (2.0 ** (1.0 - alpha) * math.sqrt(math.pi) * gamma_fn((1.0 - alpha) / 2.0))
    )


class EffectiveExponents(NamedTuple):
    gamma: float
    gamma0: float


def effective_exponents(H0: Optional[float], H, scenario: LimitScenario) -> EffectiveExponents:
    """Spatial decay exponents at the limit, with the sign fixed so that the
    all-axes-to-1/2 case in d=1 yields gamma = 1/2:

        gamma  = d - sum_a H_a^lim
        gamma0 = d - k/2 - sum_{a not in A_k} H_a^lim

    H supplies the ambient dimension; axis limits come from the scenario
    (A_k -> 1/2, B_p -> 1, fixed values otherwise).  H0 is accepted for
    interface symmetry with the heat-equation module and does not enter.
    """
    Hs = _as_hurst_tuple(H)
    d = len(Hs)
    targets = scenario.target(0.5, d)
    gamma = d - sum(targets)
    k = scenario.k
    gamma0 = d - 0.5 * k - sum(targets[a] for a in range(d) if a not in scenario.a_axes)
    return EffectiveExponents(float(gamma), float(gamma0))


def limit_constant(H_fixed: Sequence[float], k: int) -> float:
    """Prefactor of the limit covariance when k axes collapse to white noise:
    (2 pi)^(-k/2) * prod_fixed q_(2H-1) * Gamma(1-H), using
    int exp(-tau^2) |tau|^(1-2H) dtau = Gamma(1-H)."""
    if k < 0:
        raise DomainError("k must be >= 0")
    out = TWO_PI ** (-0.5 * k)
    for h in H_fixed:
        if not 0.5 < h < 1.0:
            raise DomainError(f"fixed Hurst {h} not in (1/2, 1)")
        out *= q_alpha(2.0 * h - 1.0) * float(gamma_fn(1.0 - h))
    return float(out)


def limit_covariance_bifractional(t: float, s: float, gamma0: float, scale: float) -> float:
    """scale * (1/2) (1/(1-gamma0)) ((t+s)^(1-gamma0) - |t-s|^(1-gamma0))."""
    if t < 0 or s < 0:
        raise DomainError("t and s must be >= 0")
    K = 1.0 - gamma0
    if not 0.0 < K <= 1.0:
        raise DomainError(f"covariance exponent 1-gamma0={K} outside (0, 1]")
    return float(scale * 0.5 / K * ((t + s) ** K - abs(t - s) ** K))


# ---------------------------------------------------------------------------
# Limit variance and contraction norms
# ---------------------------------------------------------------------------

def sigma_limit(f: Integrand, scenario: LimitScenario, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Limit of inner_product_HH(f, f, H) as the A_k axes go to 1/2.

    On an A_k axis the weight H(2H-1)|u-v|^(2H-2) collapses to a point mass
    on the diagonal (that coordinate contributes int f(u,.) f(u,.) du); a
    B_p axis (H -> 1) contributes the plain product integral; fixed axes
    keep the singular kernel.
    """
    if scenario.k == 0:
        raise DomainError("sigma limit needs at least one axis going to 1/2")
    d = f.d
    scenario.target(0.5, d)  # validates that every axis has a role
    edges = _panel_edges(f, cfg.panels)
    F = _midpoint_values(f, edges)
    mats = []
    pref = 1.0
    for a in range(d):
        h = np.diff(edges[a])
        if a in scenario.a_axes:
            mats.append(np.diag(h))
        elif a in scenario.b_axes:
            mats.append(np.outer(h, h))
        else:
            Ha = float(scenario.fixed[a])
            mats.append(_axis_kernel(edges[a], edges[a], Ha, cfg.mode))
            pref *= Ha * (2.0 * Ha - 1.0)
    return pref * _bilinear_form(F, F, mats)


def contraction_norm_sq(
    f: Integrand,
    H: float,
    q: int,
    r: int,
    cfg: QuadratureConfig = DEFAULT_CFG,
) -> float:
    """Squared L2 norm of the r-th contraction of the Wiener-integral kernel
    (d=1 only): the 4-fold integral

        (1/q!^2) (H(2H-1))^2 * int^4 f(u)f(v)f(u')f(v')
            |u-v|^a |u'-v'|^a |u-u'|^b |v-v'|^b,
        a = 2(H-1)r/q, b = 2(H-1)(q-r)/q.

    Vanishing contractions certify the central limit via the fourth-moment
    criterion.  Panels are capped at 64 per dimension (4-fold integral).
    """
    if f.d != 1:
        raise UnsupportedError("contraction norm implemented for d=1 only")
    if q < 2 or q > 4:
        raise UnsupportedError("contraction norm supports 2 <= q <= 4")
    if not 1 <= r <= q - 1:
        raise DomainError(f"contraction order r={r} outside 1..q-1")
    if not 0.5 < H < 1.0:
        # formal endpoint H=1 allowed: all exponents vanish
        if H != 1.0:
            raise DomainError(f"H={H} not in (1/2, 1]")
    n = min(cfg.panels, 64)
    edges = _panel_edges(f, n)[0]
    mids = 0.5 * (edges[:-1] + edges[1:])
    Fv = f.eval(mids.reshape(-1, 1))
    a_exp = 2.0 * (H - 1.0) * r / q
    b_exp = 2.0 * (H - 1.0) * (q - r) / q
    A = abs_pow_cell_masses(edges, edges, a_exp)
    # A carries the du dv measure of its pair; the b-kernel must carry none,
    # so divide its exact masses by the cell areas to get panel averages.
    hw = np.diff(edges)
    Bbar = abs_pow_cell_masses(edges, edges, b_exp) / np.outer(hw, hw)
    Gm = Fv[:, None] * Fv[None, :] * A
    total = float(np.sum(Gm * (Bbar.T @ Gm @ Bbar)))
    pref = (H * (2.0 * H - 1.0)) ** 2 / math.factorial(q) ** 2
    return pref * total


# ---------------------------------------------------------------------------
# Singular time integral for the heat-equation covariance
# ---------------------------------------------------------------------------

def fbm_time_kernel_integral(t: float, s: float, h0: float, gexp: float) -> float:
    """int_0^t int_0^s |u-v|^(2*h0-2) (t+s-u-v)^gexp du dv.

    Rotating to p = u-v reduces the inner integral to the closed form
    E(p) = ((T-|p|)^G - |D-p|^G) / (2G) with T=t+s, D=t-s, G=gexp+1, leaving

        I = (1/2G) [ int |p|^c (T-|p|)^G dp - int |p|^c |D-p|^G dp ],
        c = 2*h0 - 2,

    whose pieces are incomplete Beta integrals plus one smooth 1-D integral,
    all evaluated to near machine precision.
    """
    if t < 0 or s < 0:
        raise DomainError("t and s must be >= 0")
    if t == 0 or s == 0:
        return 0.0
    if not 0.5 < h0 < 1.0:
        raise DomainError(f"h0={h0} not in (1/2, 1)")
    G = gexp + 1.0
    if G <= 0:
        raise DomainError("time exponent not integrable")
    t, s = max(t, s), min(t, s)  # symmetric in (t, s)
    T, D = t + s, t - s
    c = 2.0 * h0 - 2.0

    def beta_piece(L):
        # int_0^L x^c (T-x)^G dx = T^(c+G+1) B(L/T; c+1, G+1)
        return T ** (c + G + 1.0) * float(
            betainc(c + 1.0, G + 1.0, L / T) * beta_fn(c + 1.0, G + 1.0)
        )

    i1 = beta_piece(s) + beta_piece(t)

    if D == 0.0:
        i2 = (s ** (c + G + 1.0) + t ** (c + G + 1.0)) / (c + G + 1.0)
    else:
        # p in [0, D]: a complete Beta integral
        i2 = D ** (c + G + 1.0) * float(beta_fn(c + 1.0, G + 1.0))
        # p in [-s, 0] and [D, t]: int_0^s x^a (D+x)^b dx, smooth away from 0
        for a, b in ((c, G), (G, c)):
            val, _ = quad(
                lambda x, a=a, b=b: x**a * (D + x) ** b, 0.0, s,
                limit=200, epsabs=1e-12, epsrel=1e-11,
            )
            i2 += val
    return (i1 - i2) / (2.0 * G)
