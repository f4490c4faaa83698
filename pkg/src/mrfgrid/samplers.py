"""Forward simulation from the models and Monte Carlo moment estimation.

Potts fields are advanced with cluster updates (bonds opened with
probability 1 - exp(-beta) between matching neighbors, connected
components relabeled uniformly); autologistic fields use raster-order
single-site Gibbs sweeps. Hot loops are numba-compiled and consume
pre-generated uniforms, so every draw comes from one numpy Generator in
a fixed order: identical (seed, stream) reproduces identical chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import UnsupportedModelError
from .models import AUTOLOGISTIC, POTTS, LabelField, ModelSpec, random_field

# Named sub-streams hung off the user-facing seed.
STREAM_GRID = 0
STREAM_CHAIN = 1
STREAM_AUX = 2
STREAM_TEST = 3
STREAM_SIM = 4


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream id)."""

    seed: int
    stream: int = 0

    def generator(self, *key) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence((self.seed, self.stream, *key)))


def stream_rng(seed: int, *key) -> np.random.Generator:
    """Generator for the sub-stream (seed, *key)."""
    return np.random.default_rng(np.random.SeedSequence((seed, *key)))


@dataclass
class MomentEstimate:
    """Sample moments of the sufficient statistic at a fixed parameter."""

    beta: np.ndarray
    mean: np.ndarray  # (dim,)
    cov: np.ndarray  # (dim, dim) sample covariance, ddof=1
    n_samples: int
    burn_in: int
    std_error: np.ndarray  # sqrt(cov_ii / n_samples); treats draws as independent


@njit(cache=True, nogil=True)
def _uf_find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, nogil=True)
def _sw_steps(labels, e0, e1, p_bond, k, u_bond, u_label):
    # u_bond: (steps, n_edges), u_label: (steps, n); in [0, 1)
    steps = u_bond.shape[0]
    n = labels.shape[0]
    m = e0.shape[0]
    parent = np.empty(n, np.int64)
    for t in range(steps):
        for i in range(n):
            parent[i] = i
        for e in range(m):
            a = e0[e]
            b = e1[e]
            if labels[a] == labels[b] and u_bond[t, e] < p_bond:
                ra = _uf_find(parent, a)
                rb = _uf_find(parent, b)
                if ra != rb:
                    parent[rb] = ra
        for i in range(n):
            labels[i] = 1 + np.int64(u_label[t, _uf_find(parent, i)] * k)


@njit(cache=True, nogil=True)
def _gibbs_sweeps_potts(labels, nbr, cnt, beta, k, u):
    # raster-order sweeps; u: (sweeps, n)
    n = labels.shape[0]
    w = np.empty(k, np.float64)
    for t in range(u.shape[0]):
        for i in range(n):
            for j in range(k):
                w[j] = 0.0
            for a in range(cnt[i]):
                w[labels[nbr[i, a]] - 1] += 1.0
            mx = 0.0
            for j in range(k):
                if w[j] > mx:
                    mx = w[j]
            tot = 0.0
            for j in range(k):
                w[j] = np.exp(beta * (w[j] - mx))
                tot += w[j]
            r = u[t, i] * tot
            acc = 0.0
            lab = k
            for j in range(k):
                acc += w[j]
                if r < acc:
                    lab = j + 1
                    break
            labels[i] = lab


@njit(cache=True, nogil=True)
def _gibbs_sweeps_auto(labels, nbr, cnt, b1, b2, u):
    n = labels.shape[0]
    for t in range(u.shape[0]):
        for i in range(n):
            diff = 0
            for a in range(cnt[i]):
                diff += labels[nbr[i, a]]  # sum of +-1 = (#equal +1) - (#equal -1)
            logit = 2.0 * b1 + b2 * diff
            p = 1.0 / (1.0 + np.exp(-logit))
            labels[i] = 1 if u[t, i] < p else -1


@njit(cache=True, nogil=True)
def _stat_match(labels, e0, e1):
    s = 0
    for e in range(e0.shape[0]):
        if labels[e0[e]] == labels[e1[e]]:
            s += 1
    return s


def _advance(labels, model: ModelSpec, beta, n_steps: int, rng: np.random.Generator):
    """Advance a label array in place by n_steps sampler steps at beta."""
    if n_steps <= 0:
        return
    lat = model.lattice
    b = model.beta_array(beta)
    if model.family == POTTS:
        if b[0] < 0:
            raise ValueError("Potts cluster updates require beta >= 0")
        p_bond = -np.expm1(-b[0])
        u_bond = rng.random((n_steps, max(lat.n_edges, 1)))
        u_label = rng.random((n_steps, lat.n))
        _sw_steps(labels, lat.edges[:, 0], lat.edges[:, 1], p_bond, model.k, u_bond, u_label)
    else:
        nbr, cnt = lat.neighbor_table
        u = rng.random((n_steps, lat.n))
        _gibbs_sweeps_auto(labels, nbr, cnt, b[0], b[1], u)


def gibbs_sweep(field: LabelField, beta, rng: np.random.Generator) -> LabelField:
    """One full raster-order sweep of single-site conditional updates."""
    field.validate()
    b = field.model.beta_array(beta)
    lat = field.lattice
    nbr, cnt = lat.neighbor_table
    labels = field.labels.copy()
    u = rng.random((1, lat.n))
    if field.model.family == POTTS:
        _gibbs_sweeps_potts(labels, nbr, cnt, b[0], field.model.k, u)
    else:
        _gibbs_sweeps_auto(labels, nbr, cnt, b[0], b[1], u)
    return LabelField(labels, field.model)


def swendsen_wang_step(field: LabelField, beta, rng: np.random.Generator) -> LabelField:
    """One cluster update of a Potts field.

    Raises UnsupportedModelError for autologistic models: the external
    field term breaks the plain bond/cluster construction.
    """
    if field.model.family != POTTS:
        raise UnsupportedModelError(
            "cluster updates support Potts models only; use gibbs_sweep"
        )
    field.validate()
    labels = field.labels.copy()
    _advance(labels, field.model, beta, 1, rng)
    return LabelField(labels, field.model)


def _sampler_stat(labels, model: ModelSpec) -> np.ndarray:
    lat = model.lattice
    s = float(_stat_match(labels, lat.edges[:, 0], lat.edges[:, 1]))
    if model.family == POTTS:
        return np.array([s])
    return np.array([float(labels.sum()), s])


def estimate_moments(
    model: ModelSpec,
    beta,
    rng: np.random.Generator,
    n_samples: int = 1000,
    burn_in: int = 500,
    thin: int = 1,
) -> MomentEstimate:
    """Monte Carlo mean/covariance of the sufficient statistic at beta.

    Runs burn_in steps from a uniform random field, then n_samples * thin
    further steps, retaining every thin-th statistic. Potts models use
    cluster updates, autologistic models Gibbs sweeps.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a covariance")
    if burn_in < 0 or thin < 1:
        raise ValueError("invalid burn_in or thin")
    b = model.beta_array(beta)
    labels = random_field(model, rng).labels
    _advance(labels, model, b, burn_in, rng)
    stats = np.empty((n_samples, model.dim))
    for s in range(n_samples):
        _advance(labels, model, b, thin, rng)
        stats[s] = _sampler_stat(labels, model)
    mean = stats.mean(axis=0)
    cov = np.atleast_2d(np.cov(stats, rowvar=False, ddof=1))
    return MomentEstimate(
        beta=b,
        mean=mean,
        cov=cov,
        n_samples=n_samples,
        burn_in=burn_in,
        std_error=np.sqrt(np.diag(cov) / n_samples),
    )


def simulate_field(
    model: ModelSpec,
    beta,
    rng: np.random.Generator,
    sweeps: int = 1000,
    init: LabelField | None = None,
) -> LabelField:
    """Draw an (approximate) sample from the model at beta."""
    labels = (init.copy() if init is not None else random_field(model, rng)).labels
    _advance(labels, model, beta, sweeps, rng)
    return LabelField(labels, model)


def add_gaussian_noise(
    field: LabelField, mu, sigma, rng: np.random.Generator
) -> np.ndarray:
    """Observed pixel values y_i ~ Normal(mu[z_i], sigma[z_i]^2).

    mu and sigma are per-label arrays (sigma may be scalar). Returns a
    (height, width) float array.
    """
    field.validate()
    k = field.model.k if field.model.family == POTTS else 2
    mu = np.broadcast_to(np.asarray(mu, dtype=np.float64), (k,))
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (k,))
    if field.model.family == POTTS:
        cls = field.labels - 1
    else:
        cls = (field.labels + 1) // 2
    y = mu[cls] + sigma[cls] * rng.standard_normal(field.model.n)
    return y.reshape(field.model.height, field.model.width)
