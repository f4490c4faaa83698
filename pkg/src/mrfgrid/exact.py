"""Exhaustive-enumeration reference computations for tiny lattices.

All quantities are derived from the exact distribution of the sufficient
statistic: one pass over every label configuration tabulates how many
configurations share each statistic value, after which normalizers,
moments, and posterior tables at any parameter point are cheap log-space
reductions over that table. The pass is chunked and integer-exact, so
results do not depend on chunk size.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLargeError
from .models import POTTS, LabelField, ModelSpec, StatVector, sufficient_stat

ENUMERATION_CAP = 1 << 24  # configurations
_CHUNK = 1 << 16


def _check_enumerable(model: ModelSpec, cap: int | None = None) -> int:
    cap = ENUMERATION_CAP if cap is None else cap
    k = model.k if model.family == POTTS else 2
    if model.n * math.log2(max(k, 2)) > math.log2(cap) + 1e-9 and k > 1:
        raise EnumerationTooLargeError(
            f"{k}^{model.n} configurations exceed the enumeration cap ({cap})"
        )
    return k**model.n


@functools.lru_cache(maxsize=16)
def _stat_table(model: ModelSpec):
    """Exact statistic distribution: (values (m, dim), counts (m,) int64)."""
    total = _check_enumerable(model)
    lat = model.lattice
    n, k = model.n, (model.k if model.family == POTTS else 2)
    e0, e1 = lat.edges[:, 0], lat.edges[:, 1]
    n_edges = lat.n_edges
    divisors = k ** np.arange(n, dtype=np.int64)

    if model.family == POTTS:
        counts = np.zeros(n_edges + 1, dtype=np.int64)
    else:
        counts = np.zeros((n + 1) * (n_edges + 1), dtype=np.int64)

    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // divisors) % k
        if n_edges:
            s_match = (digits[:, e0] == digits[:, e1]).sum(axis=1)
        else:
            s_match = np.zeros(idx.shape[0], dtype=np.int64)
        if model.family == POTTS:
            counts += np.bincount(s_match, minlength=n_edges + 1)
        else:
            plus = digits.sum(axis=1)  # number of +1 labels
            counts += np.bincount(
                plus * (n_edges + 1) + s_match, minlength=counts.shape[0]
            )

    if model.family == POTTS:
        nz = counts.nonzero()[0]
        values = nz.astype(np.float64)[:, None]
        return values, counts[nz]
    nz = counts.nonzero()[0]
    plus, s_match = np.divmod(nz, n_edges + 1)
    values = np.stack([2.0 * plus - n, s_match.astype(np.float64)], axis=1)
    return values, counts[nz]


def _shifted_terms(model: ModelSpec, beta):
    """(values, shift m, counts * exp(beta'S - m)) with m = max(beta'S).

    Keeping the integer counts out of the log preserves exactness at
    beta = 0, where the terms reduce to the counts themselves.
    """
    values, counts = _stat_table(model)
    t = values @ model.beta_array(beta)
    m = float(t.max())
    return values, m, counts.astype(np.float64) * np.exp(t - m)


def exact_log_normalizer(model: ModelSpec, beta) -> float:
    """log of the normalizing constant, by exhaustive enumeration."""
    _, m, terms = _shifted_terms(model, beta)
    return float(m + np.log(terms.sum()))


def exact_normalizer(model: ModelSpec, beta) -> float:
    """Normalizing constant C(beta) = sum over configurations of exp(beta'S).

    Exact (k^n) at beta = 0; may overflow to inf for extreme beta, in
    which case exact_log_normalizer is the usable form.
    """
    _, m, terms = _shifted_terms(model, beta)
    return float(math.exp(m) * terms.sum())


def exact_expected_stat(model: ModelSpec, beta) -> StatVector:
    """Exact mean and covariance of the sufficient statistic at beta."""
    values, _, terms = _shifted_terms(model, beta)
    w = terms / terms.sum()
    mean = w @ values
    centered = values - mean
    cov = (centered * w[:, None]).T @ centered
    return StatVector(value=mean, mean=mean, cov=cov)


@dataclass(eq=False)
class DensityTable:
    """A normalized posterior density tabulated on a parameter grid."""

    axes: tuple[np.ndarray, ...]
    density: np.ndarray  # (m,) for dim 1, (m1, m2) for dim 2

    @property
    def dim(self) -> int:
        return len(self.axes)

    def to_csv(self, path) -> None:
        cols = ["beta_1"] + (["beta_2"] if self.dim == 2 else []) + ["density"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            if self.dim == 1:
                for b, d in zip(self.axes[0], self.density):
                    fh.write(f"{b!r},{d!r}\n")
            else:
                for i, b1 in enumerate(self.axes[0]):
                    for j, b2 in enumerate(self.axes[1]):
                        fh.write(f"{b1!r},{b2!r},{self.density[i, j]!r}\n")


def _trapz_normalize(axes, density):
    norm = density
    for ax in reversed(axes):
        if ax.shape[0] > 1:
            norm = np.trapezoid(norm, ax, axis=-1)
        else:
            norm = norm.sum(axis=-1)
    total = float(norm)
    if total <= 0:
        raise ValueError("posterior density is identically zero on the grid")
    return density / total


def exact_posterior_density(model: ModelSpec, data, beta_grid, prior=None) -> DensityTable:
    """Posterior density of beta given observed labels, on a grid.

    Parameters
    ----------
    data : LabelField, StatVector, or array-like
        Observed configuration or its sufficient statistic.
    beta_grid : array (dim 1) or pair of arrays (dim 2)
        Grid axes on which the density is tabulated.
    prior : callable or None
        Prior density of beta; None means uniform.

    The table is normalized by trapezoid quadrature over the grid; a
    single-point grid normalizes to density 1 at that point.
    """
    if isinstance(data, LabelField):
        stat = sufficient_stat(data).value
    elif isinstance(data, StatVector):
        stat = data.value
    else:
        stat = np.atleast_1d(np.asarray(data, dtype=np.float64))
    if stat.shape != (model.dim,):
        raise ValueError(f"statistic must have dimension {model.dim}")

    if model.dim == 1:
        axes = (np.atleast_1d(np.asarray(beta_grid, dtype=np.float64)),)
        points = axes[0][:, None]
    else:
        ax1, ax2 = (np.atleast_1d(np.asarray(g, dtype=np.float64)) for g in beta_grid)
        axes = (ax1, ax2)
        points = np.stack(np.meshgrid(ax1, ax2, indexing="ij"), axis=-1).reshape(-1, 2)

    values, counts = _stat_table(model)
    logc = np.log(counts.astype(np.float64))
    # log C(beta) for every grid point in one pass
    x = logc[None, :] + points @ values.T
    m = x.max(axis=1)
    log_norm = m + np.log(np.exp(x - m[:, None]).sum(axis=1))
    log_post = points @ stat - log_norm
    if prior is not None:
        pri = np.array([prior(p) for p in points], dtype=np.float64)
        with np.errstate(divide="ignore"):
            log_post = log_post + np.log(pri)
    log_post -= log_post.max()
    density = np.exp(log_post)
    shape = tuple(ax.shape[0] for ax in axes)
    density = density.reshape(shape)
    if all(s == 1 for s in shape):
        density = np.ones_like(density)
    else:
        density = _trapz_normalize(axes, density)
    return DensityTable(axes=axes, density=density)
