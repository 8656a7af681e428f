"""Samplers for fractional Gaussian sheets and Hermite sheets, Hermite
polynomials, the limit variable H_q(Z)/sqrt(q!), and a brute-force multiple
Wiener-Ito integral oracle.

The production Hermite-sheet sampler uses the Hermite-rank construction:
a long-range-dependent Gaussian array with per-axis transformed Hurst value
H' = 1 + (H-1)/q is pushed through H_q pointwise and cumulatively summed.
The base correlation is chosen so the transformed increments carry the exact
fractional-sheet covariance, making Var Z(node) = node^(2H) at every grid
node in expectation.  Direct discretization of the chaos kernel is
O(cells^q) and lives only in the ChaosKernel oracle.
"""
from __future__ import annotations

import functools
import math
import os
import threading
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.fft as sfft

from .core import (
    DomainError,
    FieldMeta,
    GridSpec,
    HermiteSpec,
    HurstMultiIndex,
    RandomField,
    ResourceError,
)

_CACHE_LOCK = threading.Lock()
_FFT_WORKERS = max(1, os.cpu_count() or 1)
_EIG_CACHE: dict = {}


CHAOS_CELL_CAP = 2**21


# ---------------------------------------------------------------------------
# Hermite polynomials and the limit variable
# ---------------------------------------------------------------------------

def hermite_poly(q: int, x):
    """Probabilists' Hermite polynomial H_q via the three-term recurrence
    H_{q+1}(x) = x H_q(x) - q H_{q-1}(x)."""
    if q < 0:
        raise DomainError("Hermite polynomial degree must be >= 0")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if q == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for n in range(1, q):
        h, h_prev = x * h - n * h_prev, h
    return h if h.ndim else float(h)


def sample_hermite_limit_rv(q: int, stream: np.random.Generator) -> float:
    """One draw of H_q(Z)/sqrt(q!) with Z standard normal (unit variance)."""
    if q < 1:
        raise DomainError("chaos order must be >= 1")
    z = stream.standard_normal()
    return float(hermite_poly(q, z)) / math.sqrt(math.factorial(q))


# ---------------------------------------------------------------------------
# Circulant embedding of fractional Gaussian noise
# ---------------------------------------------------------------------------

def fgn_autocov(H: float, n: int) -> np.ndarray:
    """Autocovariance of unit-variance fGn at lags 0..n."""
    k = np.arange(n + 1, dtype=float)
    return 0.5 * ((k + 1.0) ** (2 * H) - 2.0 * k ** (2 * H) + np.abs(k - 1.0) ** (2 * H))


def _circulant_eigs_from_cov(rho: np.ndarray, key) -> np.ndarray:
    """Eigenvalues of the even circulant extension of an autocovariance
    sequence rho at lags 0..n; negatives below -1e-10 relative are an error,
    above are clamped to 0."""
    with _CACHE_LOCK:
        eig = _EIG_CACHE.get(key)
    if eig is not None:
        return eig
    n = len(rho) - 1
    c = np.concatenate([rho[:n], [rho[n]], rho[n - 1:0:-1]])
    eig = np.fft.fft(c).real
    floor = -1e-10 * eig.max()
    if eig.min() < floor:
        raise RuntimeError(
            f"circulant embedding not nonnegative ({key}): "
            f"min eigenvalue {eig.min():.3e}"
        )
    eig = np.maximum(eig, 0.0)
    with _CACHE_LOCK:
        _EIG_CACHE[key] = eig
    return eig


def _circulant_eigs(H: float, n: int) -> np.ndarray:
    return _circulant_eigs_from_cov(fgn_autocov(H, n), (round(H, 12), n))


_SQRT_EIG_CACHE: dict = {}


def _sqrt_eig_tensor(eigs: Sequence[np.ndarray], key) -> np.ndarray:
    with _CACHE_LOCK:
        sq = _SQRT_EIG_CACHE.get(key)
    if sq is None:
        sq = np.sqrt(functools.reduce(np.multiply.outer, eigs))
        with _CACHE_LOCK:
            if len(_SQRT_EIG_CACHE) > 8:
                _SQRT_EIG_CACHE.clear()
            _SQRT_EIG_CACHE[key] = sq
    return sq


def _stationary_unit_field(
    eigs: Sequence[np.ndarray], stream: np.random.Generator, cache_key=None
) -> np.ndarray:
    """Unit-variance stationary Gaussian array with separable correlation
    prod_a rho_a, sampled by d-dimensional circulant embedding."""
    if cache_key is not None:
        sq = _sqrt_eig_tensor(eigs, cache_key)
    else:
        sq = np.sqrt(functools.reduce(np.multiply.outer, eigs))
    shape = sq.shape
    z = stream.standard_normal(shape) + 1j * stream.standard_normal(shape)
    x = sfft.ifftn(sq * z, workers=_FFT_WORKERS) * math.sqrt(np.prod(shape))
    out = x.real[tuple(slice(0, m // 2) for m in shape)]
    return np.ascontiguousarray(out)


def _meta_seed(stream):
    bg = getattr(stream, "bit_generator", None)
    ss = getattr(bg, "seed_seq", None)
    if ss is None:
        return None
    return (ss.entropy, tuple(ss.spawn_key))


def _padded_cumsum(incr: np.ndarray) -> np.ndarray:
    out = incr
    for a in range(incr.ndim):
        out = np.cumsum(out, axis=a)
    padded = np.zeros(tuple(s + 1 for s in incr.shape))
    padded[tuple(slice(1, None) for _ in range(incr.ndim))] = out
    return padded


def simulate_fractional_gaussian_sheet(
    H: Union[float, Sequence[float], HurstMultiIndex],
    grid: GridSpec,
    stream: np.random.Generator,
) -> RandomField:
    """Gaussian field with covariance prod_a R_{H_a}(t_a, s_a) on the grid
    nodes (anchored at the low corner), built per axis by circulant
    embedding of fGn and cumulative summation, tensored across axes."""
    if isinstance(H, HurstMultiIndex):
        Hs = H.values
    else:
        Hs = tuple(float(v) for v in np.atleast_1d(H))
    if len(Hs) != grid.d:
        raise DomainError("Hurst index and grid dimension mismatch")
    for h in Hs:
        if not 0.0 < h < 1.0:
            raise DomainError(f"Hurst exponent {h} not in (0, 1)")
    key = tuple((round(h, 12), n) for h, n in zip(Hs, grid.steps))
    eigs = [_circulant_eigs(Hs[a], grid.steps[a]) for a in range(grid.d)]
    x = _stationary_unit_field(eigs, stream, cache_key=key)
    scale = float(np.prod([m**h for m, h in zip(grid.mesh, Hs)]))
    values = _padded_cumsum(x * scale)
    spec = None
    if all(0.5 < h < 1.0 for h in Hs):
        spec = HermiteSpec(1, HurstMultiIndex(Hs))
    meta = FieldMeta(spec=spec, seed=_meta_seed(stream), method="circulant", internal=0)
    return RandomField(grid=grid, values=values, meta=meta)


# ---------------------------------------------------------------------------
# Hermite sheets via the Hermite-rank construction
# ---------------------------------------------------------------------------

def simulate_hermite_sheet(
    spec: HermiteSpec,
    grid: GridSpec,
    n_internal: int,
    stream: np.random.Generator,
) -> RandomField:
    """Approximate sample of a Hermite sheet on the grid nodes.

    The base Gaussian array carries the per-axis correlation rho_H(k)^(1/q)
    (tail exponent 2(H'-1) with H' = 1 + (H-1)/q), which makes the
    H_q-transformed increments match the fBm-sheet increment covariance
    q! prod_a rho_(H_a)(k_a) exactly at every lag.  The normalization
    c = prod_a mesh_a^(H_a) / sqrt(q!) then gives Var Z(node) = node^(2H)
    exactly in expectation at every grid node; higher-order structure
    converges with the fine mesh.

    n_internal is the fine-mesh size per axis; it is rounded to a multiple of
    the output step count so grid nodes land on fine-mesh nodes.
    """
    if spec.d != grid.d:
        raise DomainError("spec and grid dimension mismatch")
    if n_internal < 64:
        raise DomainError("internal fine mesh must have at least 64 cells per axis")
    Hs = spec.hurst.values
    q = spec.q
    strides = [max(1, round(n_internal / s)) for s in grid.steps]
    N = [st * s for st, s in zip(strides, grid.steps)]
    key = tuple(("hr", round(h, 12), q, n) for h, n in zip(Hs, N))
    eigs = [
        _circulant_eigs_from_cov(fgn_autocov(h, n) ** (1.0 / q), k)
        for (h, n), k in zip(zip(Hs, N), key)
    ]
    xi = _stationary_unit_field(eigs, stream, cache_key=key)
    fine_mesh = [e / n for e, n in zip(grid.extents, N)]
    c = float(np.prod([m**h for m, h in zip(fine_mesh, Hs)])) / math.sqrt(math.factorial(q))
    fine = _padded_cumsum(hermite_poly(q, xi)) * c
    values = fine[tuple(slice(None, None, st) for st in strides)]
    meta = FieldMeta(spec=spec, seed=_meta_seed(stream), method="hermite_rank",
                     internal=max(N))
    return RandomField(grid=grid, values=np.ascontiguousarray(values), meta=meta)


# ---------------------------------------------------------------------------
# Brute-force multiple-integral oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChaosKernel:
    """Discretized kernel of a q-th multiple Wiener-Ito integral on a small
    grid: values at all q-tuples of cell midpoints."""

    q: int
    grid: GridSpec
    table: np.ndarray

    def __post_init__(self):
        if self.q < 1:
            raise DomainError("chaos order must be >= 1")
        cells = int(np.prod(self.grid.steps))
        if cells**self.q > CHAOS_CELL_CAP:
            raise ResourceError(
                f"{cells}^{self.q} kernel nodes exceed the oracle cap {CHAOS_CELL_CAP}"
            )
        if self.table.shape != (cells,) * self.q:
            raise DomainError("kernel table must have shape (cells,)*q")

    @classmethod
    def from_function(cls, q: int, grid: GridSpec, func) -> "ChaosKernel":
        """Tabulate func(y_1, ..., y_q), each y_i in R^d, at cell midpoints."""
        mids = np.stack(
            np.meshgrid(*[grid.axis_mids(a) for a in range(grid.d)], indexing="ij"),
            axis=-1,
        ).reshape(-1, grid.d)
        m = mids.shape[0]
        if m**q > CHAOS_CELL_CAP:
            raise ResourceError(f"{m}^{q} kernel nodes exceed the oracle cap")
        idx = np.stack(np.meshgrid(*[np.arange(m)] * q, indexing="ij"), axis=-1)
        args = [mids[idx[..., j]] for j in range(q)]
        table = np.asarray(func(*args), dtype=float)
        return cls(q=q, grid=grid, table=table)

    @functools.cached_property
    def _offdiag_table(self) -> np.ndarray:
        """Kernel with all tuples having a repeated cell zeroed out."""
        m = int(np.prod(self.grid.steps))
        mask = np.ones((m,) * self.q, dtype=bool)
        ax = [np.arange(m).reshape((1,) * j + (m,) + (1,) * (self.q - 1 - j))
              for j in range(self.q)]
        for i in range(self.q):
            for j in range(i + 1, self.q):
                mask &= ax[i] != ax[j]
        return np.where(mask, self.table, 0.0)

    def offdiag_norm_sq(self) -> float:
        """Discrete squared L2 norm of the kernel over off-diagonal tuples."""
        vol = self.grid.cell_volume()
        return float(np.sum(self._offdiag_table**2)) * vol**self.q


def chaos_oracle_sample(kernel: ChaosKernel, stream: np.random.Generator) -> float:
    """Brute-force draw of I_q(f): independent N(0, cell volume) white-noise
    increments on the kernel grid, summed against the kernel over q-tuples of
    pairwise-distinct cells."""
    m = int(np.prod(kernel.grid.steps))
    dw = stream.standard_normal(m) * math.sqrt(kernel.grid.cell_volume())
    wq = functools.reduce(np.multiply.outer, [dw] * kernel.q) if kernel.q > 1 else dw
    return float(np.sum(kernel._offdiag_table * wq))
