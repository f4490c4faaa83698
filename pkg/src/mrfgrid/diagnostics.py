"""Posterior and interpolation quality metrics.

Histogram-based KL divergence between sample sets, interpolation RMSE of
a grid against direct estimates, and posterior summaries. All functions
are pure and operate on immutable arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import DensityTable, exact_expected_stat
from .models import ModelSpec
from .samplers import STREAM_TEST, estimate_moments, stream_rng
from .surrogate import SurrogateGrid

KL_EPSILON = 1e-12
DEFAULT_BINS = {1: 100, 2: 30}


@dataclass
class KlEstimate:
    """Histogram KL divergence KL(p || q) in nats."""

    value: float
    bins: tuple[int, ...]
    support: np.ndarray  # (dim, 2)
    epsilon: float = KL_EPSILON


@dataclass
class RmseReport:
    """Per-component interpolation RMSE over random test points."""

    rmse: np.ndarray
    n_test: int
    seed: int | None = None


@dataclass
class Summary:
    """Componentwise posterior summary of a chain."""

    mean: np.ndarray
    mode: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


def _as_samples(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("samples must be a nonempty 1-D or 2-D array")
    return arr


def _histogram_probs(samples, edges):
    hist, _ = np.histogramdd(samples, bins=edges)
    probs = hist / samples.shape[0]
    probs = np.maximum(probs, KL_EPSILON)
    return probs / probs.sum()


def kl_divergence(samples_p, samples_q, bins: int | tuple[int, ...] | None = None) -> KlEstimate:
    """Histogram estimate of KL(p || q) from two sample sets.

    Both histograms share equal-width bins over the pooled range of the
    two sets; empty cells are floored at a small epsilon before
    normalization, which caps the estimate for disjoint samples.
    """
    p = _as_samples(samples_p)
    q = _as_samples(samples_q)
    if p.shape[1] != q.shape[1]:
        raise ValueError("sample sets have different dimensions")
    dim = p.shape[1]
    if bins is None:
        bins = (DEFAULT_BINS[dim],) * dim
    elif isinstance(bins, int):
        bins = (bins,) * dim
    if any(b < 2 for b in bins):
        raise ValueError("need at least 2 bins per dimension")
    pooled = np.vstack([p, q])
    lo = pooled.min(axis=0)
    hi = pooled.max(axis=0)
    if np.any(hi <= lo):
        raise ValueError("degenerate (single-valued) samples")
    edges = [np.linspace(lo[j], hi[j], bins[j] + 1) for j in range(dim)]
    hp = _histogram_probs(p, edges)
    hq = _histogram_probs(q, edges)
    value = float((hp * np.log(hp / hq)).sum())
    return KlEstimate(value=max(value, 0.0), bins=tuple(bins),
                      support=np.stack([lo, hi], axis=1))


def kl_samples_vs_density(samples, table: DensityTable, bins: int = 100) -> KlEstimate:
    """KL(sample histogram || tabulated density), 1-D tables only.

    The density table is integrated over each histogram bin by trapezoid
    quadrature on the table's own grid resolution.
    """
    if table.dim != 1:
        raise ValueError("density comparison implemented for 1-D tables")
    s = _as_samples(samples)[:, 0]
    xs, dens = table.axes[0], table.density
    edges = np.linspace(xs[0], xs[-1], bins + 1)
    fine = np.linspace(xs[0], xs[-1], max(4 * bins, xs.shape[0]) + 1)
    fd = np.interp(fine, xs, dens)
    mass = np.empty(bins)
    for j in range(bins):
        inside = (fine >= edges[j]) & (fine <= edges[j + 1])
        grid = np.unique(np.concatenate([[edges[j]], fine[inside], [edges[j + 1]]]))
        mass[j] = np.trapezoid(np.interp(grid, xs, dens), grid)
    mass = np.maximum(mass / mass.sum(), KL_EPSILON)
    mass /= mass.sum()
    hist, _ = np.histogram(s, bins=edges)
    probs = np.maximum(hist / max(s.shape[0], 1), KL_EPSILON)
    probs /= probs.sum()
    value = float((probs * np.log(probs / mass)).sum())
    return KlEstimate(value=max(value, 0.0), bins=(bins,),
                      support=np.array([[edges[0], edges[-1]]]))


def interpolation_rmse(
    grid: SurrogateGrid,
    scheme: str,
    model: ModelSpec,
    n_test: int = 1000,
    seed: int = 0,
    exact: bool = False,
    n_samples: int = 1000,
    burn_in: int = 500,
) -> RmseReport:
    """RMSE of interpolated vs directly estimated statistic means.

    Draws n_test parameters uniformly over the box; the direct estimate
    is exhaustive enumeration when exact=True, otherwise a fresh Monte
    Carlo moment estimate per point.
    """
    if n_test < 1:
        raise ValueError("need at least one test point")
    rng = stream_rng(seed, STREAM_TEST)
    lo, hi = model.bounds_array().T
    points = lo + (hi - lo) * rng.random((n_test, model.dim))
    sq = np.zeros(model.dim)
    for i, beta in enumerate(points):
        if exact:
            direct = exact_expected_stat(model, beta).value
        else:
            direct = estimate_moments(
                model, beta, stream_rng(seed, STREAM_TEST, i),
                n_samples=n_samples, burn_in=burn_in,
            ).mean
        resid = grid.interpolate(beta, scheme) - direct
        sq += resid**2
    return RmseReport(rmse=np.sqrt(sq / n_test), n_test=n_test, seed=seed)


def summarize(samples, burn_in: int = 0, bins: int = 100) -> Summary:
    """Componentwise mean, histogram mode, and central 95% interval."""
    arr = _as_samples(getattr(samples, "beta", samples))
    if burn_in >= arr.shape[0]:
        raise ValueError("burn-in leaves no retained draws")
    arr = arr[burn_in:]
    mean = arr.mean(axis=0)
    mode = np.empty(arr.shape[1])
    for j in range(arr.shape[1]):
        col = arr[:, j]
        if col.max() > col.min():
            hist, edges = np.histogram(col, bins=bins)
            b = int(np.argmax(hist))
            mode[j] = 0.5 * (edges[b] + edges[b + 1])
        else:
            mode[j] = col[0]
    ci_low = np.quantile(arr, 0.025, axis=0)
    ci_high = np.quantile(arr, 0.975, axis=0)
    return Summary(mean=mean, mode=mode, ci_low=ci_low, ci_high=ci_high)
