"""Posterior samplers for the coupling parameters (and noise parameters).

Three random-walk Metropolis variants over beta, all in log domain with a
uniform prior on the parameter box:

* exchange sampler: each proposal is scored against an auxiliary field
  simulated at the proposed parameter for a fixed number of sampler
  steps, so the intractable normalizers cancel from the acceptance
  ratio;
* amortized sampler: the log-normalizer ratio is read off a precomputed
  surrogate grid, with no forward simulation inside the loop;
* hidden-model block-Gibbs: interleaves checkerboard label updates and
  conjugate Normal/Inverse-Gamma noise-parameter updates with either
  beta step above.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .models import (
    POTTS,
    LabelField,
    ModelSpec,
    StatVector,
    random_field,
    sufficient_stat,
)
from .samplers import (
    STREAM_AUX,
    STREAM_CHAIN,
    _advance,
    _sampler_stat,
    stream_rng,
)
from .surrogate import SurrogateGrid, check_grid_model

TARGET_RATE = {1: 0.44, 2: 0.234}


@dataclass
class ProposalSpec:
    """Gaussian random-walk proposal with optional burn-in scale adaptation."""

    sd: np.ndarray
    adapt: bool = True
    target_rate: float | None = None
    window: int = 50

    def __post_init__(self):
        self.sd = np.atleast_1d(np.asarray(self.sd, dtype=np.float64))
        if (self.sd <= 0).any():
            raise ValueError("proposal standard deviations must be positive")

    @classmethod
    def for_model(cls, model: ModelSpec) -> "ProposalSpec":
        widths = np.array([hi - lo for lo, hi in model.bounds])
        return cls(sd=0.1 * widths, target_rate=TARGET_RATE[model.dim])


@dataclass
class RunConfig:
    """Everything that determines one posterior run besides the data."""

    iterations: int
    burn_in: int = 0
    seed: int = 0
    aux_sweeps: int = 100
    proposal: ProposalSpec | None = None
    init_beta: np.ndarray | None = None
    theta_prior: "NormalInverseGamma | None" = None

    def __post_init__(self):
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if not (0 <= self.burn_in < self.iterations):
            raise ValueError("need iterations > burn_in >= 0")
        if self.aux_sweeps < 1:
            raise ValueError("aux_sweeps must be positive")


@dataclass
class ChainRecord:
    """One retained MCMC draw."""

    iteration: int
    beta: np.ndarray
    stat: np.ndarray
    accepted: bool
    theta: tuple[np.ndarray, np.ndarray] | None = None  # (mu, sigma2) per label


@dataclass(eq=False)
class Chain:
    """A full MCMC run: per-iteration parameters, statistics, flags."""

    beta: np.ndarray  # (T, dim)
    stat: np.ndarray  # (T, dim)
    accepted: np.ndarray  # (T,) bool
    mu: np.ndarray | None = None  # (T, k)
    sigma2: np.ndarray | None = None  # (T, k)
    burn_in: int = 0

    def __len__(self):
        return self.beta.shape[0]

    def acceptance_rate(self, burn_in: int | None = None) -> float:
        b = self.burn_in if burn_in is None else burn_in
        return float(self.accepted[b:].mean())

    def post(self, burn_in: int | None = None) -> np.ndarray:
        b = self.burn_in if burn_in is None else burn_in
        return self.beta[b:]

    def record(self, i: int) -> ChainRecord:
        theta = None
        if self.mu is not None:
            theta = (self.mu[i], self.sigma2[i])
        return ChainRecord(i + 1, self.beta[i], self.stat[i], bool(self.accepted[i]), theta)

    def to_csv(self, path) -> None:
        dim = self.beta.shape[1]
        cols = ["iter"]
        cols += [f"beta_{j + 1}" for j in range(dim)]
        cols += [f"stat_{j + 1}" for j in range(dim)]
        cols += ["accepted"]
        parts = [np.arange(1, len(self) + 1)[:, None], self.beta, self.stat,
                 self.accepted[:, None].astype(int)]
        if self.mu is not None:
            k = self.mu.shape[1]
            cols += [f"mu_{j + 1}" for j in range(k)]
            cols += [f"sigma2_{j + 1}" for j in range(k)]
            parts += [self.mu, self.sigma2]
        data = np.hstack([np.asarray(p, dtype=np.float64) for p in parts])
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            np.savetxt(fh, data, delimiter=",", fmt="%.12g")


def chain_from_csv(path) -> Chain:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(io.StringIO(fh.read()), delimiter=",", ndmin=2)
    dim = sum(1 for c in header if c.startswith("beta_"))
    k = sum(1 for c in header if c.startswith("mu_"))
    beta = data[:, 1 : 1 + dim]
    stat = data[:, 1 + dim : 1 + 2 * dim]
    accepted = data[:, 1 + 2 * dim].astype(bool)
    mu = sigma2 = None
    if k:
        mu = data[:, 2 + 2 * dim : 2 + 2 * dim + k]
        sigma2 = data[:, 2 + 2 * dim + k : 2 + 2 * dim + 2 * k]
    return Chain(beta=beta, stat=stat, accepted=accepted, mu=mu, sigma2=sigma2)


# ---------------------------------------------------------------------------
# Shared random-walk machinery


class _AdaptiveWalk:
    """Scale adaptation during burn-in only (frozen afterwards)."""

    def __init__(self, proposal: ProposalSpec, dim: int, burn_in: int):
        self.sd = proposal.sd.copy()
        if self.sd.shape[0] == 1 and dim > 1:
            self.sd = np.repeat(self.sd, dim)
        self.adapt = proposal.adapt
        self.target = proposal.target_rate or TARGET_RATE[dim]
        self.window = proposal.window
        self.burn_in = burn_in
        self._hits = 0
        self._count = 0
        self._windows = 0

    def propose(self, beta, rng):
        return beta + self.sd * rng.standard_normal(beta.shape[0])

    def update(self, iteration, accepted):
        if not self.adapt or iteration >= self.burn_in:
            return
        self._hits += accepted
        self._count += 1
        if self._count >= self.window:
            self._windows += 1
            rate = self._hits / self._count
            gain = min(0.5, 2.0 / np.sqrt(self._windows))
            self.sd *= np.exp(gain * (rate - self.target))
            self._hits = 0
            self._count = 0


def _init_beta(model: ModelSpec, config: RunConfig) -> np.ndarray:
    if config.init_beta is not None:
        b = model.beta_array(config.init_beta)
        if not model.contains(b):
            raise ValueError("initial parameter outside the parameter space")
        return b
    return model.bounds_array().mean(axis=1)


def _exchange_log_ratio(model, beta, beta_prop, stat_z, labels_z, aux_sweeps, rng_aux):
    """Auxiliary-variable log acceptance ratio (normalizers cancel)."""
    w = labels_z.copy()
    _advance(w, model, beta_prop, aux_sweeps, rng_aux)
    stat_w = _sampler_stat(w, model)
    return float((beta_prop - beta) @ (stat_z - stat_w))


def run_aea(model: ModelSpec, data: LabelField, config: RunConfig) -> Chain:
    """Exchange sampler for beta given fully observed labels.

    The auxiliary field is initialized at the data and advanced for
    config.aux_sweeps sampler steps at the proposed parameter.
    """
    data.validate()
    stat_z = sufficient_stat(data).value
    rng = stream_rng(config.seed, STREAM_CHAIN)
    rng_aux = stream_rng(config.seed, STREAM_AUX)
    walk = _AdaptiveWalk(config.proposal or ProposalSpec.for_model(model), model.dim, config.burn_in)
    beta = _init_beta(model, config)
    T = config.iterations
    out_beta = np.empty((T, model.dim))
    out_acc = np.zeros(T, dtype=bool)
    for t in range(T):
        prop = walk.propose(beta, rng)
        accepted = False
        if model.contains(prop):
            log_rho = _exchange_log_ratio(
                model, beta, prop, stat_z, data.labels, config.aux_sweeps, rng_aux
            )
            if np.log(rng.random()) < min(0.0, log_rho):
                beta = prop
                accepted = True
        out_beta[t] = beta
        out_acc[t] = accepted
        walk.update(t, accepted)
    stat = np.broadcast_to(stat_z, (T, model.dim)).copy()
    return Chain(beta=out_beta, stat=stat, accepted=out_acc, burn_in=config.burn_in)


def run_surrogate(
    model: ModelSpec,
    data: LabelField,
    grid: SurrogateGrid,
    scheme: str,
    config: RunConfig,
) -> Chain:
    """Amortized sampler: grid interpolation replaces forward simulation."""
    data.validate()
    check_grid_model(grid, model)
    stat_z = sufficient_stat(data).value
    rng = stream_rng(config.seed, STREAM_CHAIN)
    walk = _AdaptiveWalk(config.proposal or ProposalSpec.for_model(model), model.dim, config.burn_in)
    beta = _init_beta(model, config)
    T = config.iterations
    out_beta = np.empty((T, model.dim))
    out_acc = np.zeros(T, dtype=bool)
    for t in range(T):
        prop = walk.propose(beta, rng)
        accepted = False
        if model.contains(prop):
            # log C(beta)/C(prop) + (prop - beta)'S(z)
            log_rho = float((prop - beta) @ stat_z) - grid.log_normalizer_ratio(beta, prop, scheme)
            if np.log(rng.random()) < min(0.0, log_rho):
                beta = prop
                accepted = True
        out_beta[t] = beta
        out_acc[t] = accepted
        walk.update(t, accepted)
    stat = np.broadcast_to(stat_z, (T, model.dim)).copy()
    return Chain(beta=out_beta, stat=stat, accepted=out_acc, burn_in=config.burn_in)


# ---------------------------------------------------------------------------
# Hidden model: labels observed only through Gaussian noise


@dataclass
class NormalInverseGamma:
    """Conjugate per-label prior: sigma2 ~ InvGamma(a, b), mu | sigma2 ~
    Normal(mu0, sigma2 / kappa0)."""

    mu0: np.ndarray  # (k,)
    kappa0: float
    a0: float
    b0: float


def default_theta_prior(y: np.ndarray, k: int) -> NormalInverseGamma:
    """Data-driven hyperparameters: label means anchored at equally spaced
    quantiles of y with weak precision; noise-variance prior mean
    (range(y) / (2k))^2."""
    y = np.asarray(y, dtype=np.float64).ravel()
    qs = (np.arange(1, k + 1) - 0.5) / k
    mu0 = np.quantile(y, qs)
    spread = (np.ptp(y) / (2.0 * k)) ** 2 if np.ptp(y) > 0 else 1.0
    a0 = 3.0
    b0 = spread * (a0 - 1.0)
    return NormalInverseGamma(mu0=mu0, kappa0=0.01, a0=a0, b0=b0)


def _hidden_label_sweep(labels, model, beta, mu, sigma2, y, rng):
    """One checkerboard (two-color) sweep of label conditionals.

    Same-color sites share no edges, so each color updates as one
    vectorized block; colors alternate in fixed order.
    """
    lat = model.lattice
    nbr, cnt = lat.neighbor_table
    k = mu.shape[0]
    b = beta[0]
    log_norm = -0.5 * np.log(sigma2)
    for sites in lat.color_sites:
        if sites.size == 0:
            continue
        neigh = labels[nbr[sites]]  # (m, 4), padded entries read arbitrary labels
        valid = nbr[sites] >= 0
        counts = ((neigh[:, :, None] == np.arange(1, k + 1)) & valid[:, :, None]).sum(axis=1)
        log_w = b * counts + log_norm - 0.5 * (y[sites, None] - mu) ** 2 / sigma2
        log_w -= log_w.max(axis=1, keepdims=True)
        w = np.exp(log_w)
        cdf = np.cumsum(w, axis=1)
        u = rng.random(sites.shape[0]) * cdf[:, -1]
        labels[sites] = 1 + (u[:, None] > cdf).sum(axis=1).clip(0, k - 1)


def _theta_update(labels, y, k, prior: NormalInverseGamma, rng):
    """Conjugate draw of (mu_j, sigma2_j) per label class."""
    mu = np.empty(k)
    sigma2 = np.empty(k)
    for j in range(k):
        mask = labels == j + 1
        n_j = int(mask.sum())
        if n_j == 0:
            kappa_n, mu_n, a_n, b_n = prior.kappa0, prior.mu0[j], prior.a0, prior.b0
        else:
            yj = y[mask]
            ybar = yj.mean()
            ss = float(((yj - ybar) ** 2).sum())
            kappa_n = prior.kappa0 + n_j
            mu_n = (prior.kappa0 * prior.mu0[j] + n_j * ybar) / kappa_n
            a_n = prior.a0 + 0.5 * n_j
            b_n = (
                prior.b0
                + 0.5 * ss
                + 0.5 * prior.kappa0 * n_j * (ybar - prior.mu0[j]) ** 2 / kappa_n
            )
        sigma2[j] = b_n / rng.gamma(a_n)
        mu[j] = mu_n + np.sqrt(sigma2[j] / kappa_n) * rng.standard_normal()
    return mu, sigma2


def _quantile_labels(y: np.ndarray, k: int) -> np.ndarray:
    """Initial labels from quantile bins of the observed pixels."""
    if k == 1:
        return np.ones(y.shape[0], dtype=np.int64)
    edges = np.quantile(y, np.arange(1, k) / k)
    return 1 + np.searchsorted(edges, y).astype(np.int64)


def run_hidden_potts(
    y: np.ndarray,
    model: ModelSpec,
    config: RunConfig,
    grid: SurrogateGrid | None = None,
    scheme: str = "hermite",
    init_theta: tuple[np.ndarray, np.ndarray] | None = None,
) -> Chain:
    """Block-Gibbs over (labels, noise parameters, beta) given an image.

    Per iteration: (i) checkerboard label sweep combining the neighbor
    term with the Gaussian pixel likelihood, (ii) conjugate
    Normal/Inverse-Gamma update of each label's (mu, sigma2), (iii) one
    beta step, amortized through `grid` when given, otherwise an
    exchange step with an auxiliary chain started at the current labels.
    """
    if model.family != POTTS:
        raise ValueError("the hidden observation model is defined for Potts labels")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.height, model.width):
        raise ValueError(f"image shape {y.shape} does not match model "
                         f"{model.height}x{model.width}")
    if grid is not None:
        check_grid_model(grid, model)
    y = y.ravel()
    k = model.k
    prior = config.theta_prior or default_theta_prior(y, k)
    rng = stream_rng(config.seed, STREAM_CHAIN)
    rng_aux = stream_rng(config.seed, STREAM_AUX)
    walk = _AdaptiveWalk(config.proposal or ProposalSpec.for_model(model), model.dim, config.burn_in)
    beta = _init_beta(model, config)
    labels = _quantile_labels(y, k)
    if init_theta is not None:
        mu = np.asarray(init_theta[0], dtype=np.float64).copy()
        sigma2 = np.asarray(init_theta[1], dtype=np.float64).copy()
    else:
        mu = prior.mu0.copy()
        sigma2 = np.full(k, prior.b0 / max(prior.a0 - 1.0, 0.5))

    T = config.iterations
    out_beta = np.empty((T, model.dim))
    out_stat = np.empty((T, model.dim))
    out_acc = np.zeros(T, dtype=bool)
    out_mu = np.empty((T, k))
    out_s2 = np.empty((T, k))
    for t in range(T):
        _hidden_label_sweep(labels, model, beta, mu, sigma2, y, rng)
        mu, sigma2 = _theta_update(labels, y, k, prior, rng)
        stat_z = _sampler_stat(labels, model)
        prop = walk.propose(beta, rng)
        accepted = False
        if model.contains(prop):
            if grid is not None:
                log_rho = float((prop - beta) @ stat_z) - grid.log_normalizer_ratio(
                    beta, prop, scheme
                )
            else:
                log_rho = _exchange_log_ratio(
                    model, beta, prop, stat_z, labels, config.aux_sweeps, rng_aux
                )
            if np.log(rng.random()) < min(0.0, log_rho):
                beta = prop
                accepted = True
        out_beta[t] = beta
        out_stat[t] = stat_z
        out_acc[t] = accepted
        out_mu[t] = mu
        out_s2[t] = sigma2
        walk.update(t, accepted)
    return Chain(
        beta=out_beta,
        stat=out_stat,
        accepted=out_acc,
        mu=out_mu,
        sigma2=out_s2,
        burn_in=config.burn_in,
    )


# ---------------------------------------------------------------------------
# Starting-point search


def find_beta_crit(
    model: ModelSpec,
    stat_target,
    rng: np.random.Generator,
    iterations: int = 600,
    gain: float = 3.0,
    decay: float = 0.7,
    steps_per_iter: int = 5,
    tol: float = 1e-5,
) -> np.ndarray:
    """Stochastic-approximation match of E[S](beta) to a target statistic.

    Robbins-Monro iteration beta <- beta + (gain/m^decay) * (target - S_hat)
    in range-normalized statistic units, with S_hat averaged over a short
    persistent forward simulation; the answer is the average of the last
    half of the iterates, clamped to the box.
    """
    target = np.atleast_1d(np.asarray(stat_target, dtype=np.float64))
    if target.shape != (model.dim,):
        raise ValueError(f"target statistic must have dimension {model.dim}")
    lat = model.lattice
    n = model.n
    if model.family == POTTS:
        lo_s, scale = np.array([0.0]), np.array([float(lat.n_edges)])
    else:
        lo_s = np.array([-float(n), 0.0])
        scale = np.array([2.0 * n, float(lat.n_edges)])
    u_target = (target - lo_s) / scale
    if (u_target <= 0).any() or (u_target >= 1).any():
        raise ValueError("target statistic outside the attainable range")

    lo, hi = model.bounds_array().T
    widths = hi - lo
    beta = model.bounds_array().mean(axis=1)
    labels = random_field(model, rng).labels
    tail = []
    for m in range(1, iterations + 1):
        stat = np.zeros(model.dim)
        for _ in range(steps_per_iter):
            _advance(labels, model, beta, 1, rng)
            stat += _sampler_stat(labels, model)
        u_hat = (stat / steps_per_iter - lo_s) / scale
        step = (gain / m**decay) * widths * (u_target - u_hat)
        beta = np.clip(beta + step, lo, hi)
        if m > iterations // 2:
            tail.append(beta.copy())
        if np.linalg.norm(step) < tol and m > 10:
            tail.append(beta.copy())
            break
    return np.mean(tail, axis=0)
