"""Precomputed statistic grids and their interpolation.

A surrogate grid stores, at a set of parameter knots, the estimated mean
of the sufficient statistic together with its estimated Jacobian (the
statistic covariance, by the exponential-family identity
d E[S] / d beta = Cov(S)). Two constructions are provided:

* equidistant tensor grids over the parameter box, and
* gradient-informed grids grown outward from a critical starting point,
  where the local step length n = exp(-kappa * g / g_ref) shrinks where
  the statistic changes fast and stretches where it is flat.

Interpolation of the knot means (piecewise-linear or piecewise-cubic
Hermite, the latter using the knot Jacobians as slopes) replaces forward
simulation inside MCMC acceptance ratios; the log-ratio of normalizing
constants between two parameter values is the line integral of the
interpolated mean statistic, evaluated in closed form for 1-D grids and
by 16-node Gauss-Legendre quadrature along the segment for 2-D grids.

Two-dimensional grids are organized as a spine of knots along the
leading direction d1, each spine knot owning a trail of knots along d2;
queries are answered in direction coordinates (a, b) with
beta = beta_crit + a*d1 + b*d2 by interpolating along the two bracketing
trails in b and then across the spine in a.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InfeasibleError
from .exact import exact_expected_stat
from .models import AUTOLOGISTIC, POTTS, ModelSpec
from .samplers import STREAM_GRID, MomentEstimate, estimate_moments, stream_rng

GRID_FORMAT_VERSION = 1
EQUIDISTANT = "equidistant"
GRADIENT = "gradient"
SCHEMES = ("linear", "hermite")

_MIN_GRAD = 1e-12
_MAX_TRAIL_KNOTS = 10000

# 16-node Gauss-Legendre rule mapped to [0, 1].
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_T = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def step_scale(grad_norm: float, grad_ref: float, kappa: float) -> float:
    """Step length n = exp(-kappa * grad_norm / grad_ref).

    Strictly positive, at most 1 for nonnegative grad_norm, monotonically
    decreasing in grad_norm, and finite (equal to 1) where the gradient
    vanishes.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if grad_ref <= 0:
        raise ValueError("grad_ref must be positive")
    if grad_norm < 0:
        raise ValueError("grad_norm must be nonnegative")
    return math.exp(-kappa * grad_norm / grad_ref)


@dataclass
class GridKnot:
    """One grid point: parameter, statistic mean, and estimated Jacobian."""

    beta: np.ndarray  # (dim,)
    mean: np.ndarray  # (dim,)
    grad: np.ndarray  # (dim, dim), symmetric
    n_samples: int  # 0 marks exact (enumerated) knots
    std_error: np.ndarray  # (dim,)


def _knot_from_moments(m: MomentEstimate) -> GridKnot:
    grad = 0.5 * (m.cov + m.cov.T)
    return GridKnot(
        beta=np.asarray(m.beta, dtype=np.float64),
        mean=np.asarray(m.mean, dtype=np.float64),
        grad=np.asarray(grad, dtype=np.float64),
        n_samples=int(m.n_samples),
        std_error=np.asarray(m.std_error, dtype=np.float64),
    )


def mc_estimator(model: ModelSpec, seed: int, n_samples=1000, burn_in=500, thin=1):
    """Monte Carlo knot estimator; each knot gets its own random stream."""

    def estimate(beta, stream_id: int) -> MomentEstimate:
        rng = stream_rng(seed, STREAM_GRID, stream_id)
        return estimate_moments(
            model, beta, rng, n_samples=n_samples, burn_in=burn_in, thin=thin
        )

    estimate.budget = {"burn_in": burn_in, "n_samples": n_samples, "thin": thin, "seed": seed}
    return estimate


def exact_estimator(model: ModelSpec):
    """Exact knot estimator backed by exhaustive enumeration (tiny lattices)."""

    def estimate(beta, stream_id: int) -> MomentEstimate:
        stat = exact_expected_stat(model, beta)
        return MomentEstimate(
            beta=model.beta_array(beta),
            mean=stat.mean,
            cov=stat.cov,
            n_samples=0,
            burn_in=0,
            std_error=np.zeros(model.dim),
        )

    estimate.budget = None
    return estimate


# ---------------------------------------------------------------------------
# 1-D piecewise interpolation along a trail


def _hermite_value(t, h, p0, p1, m0, m1):
    t2 = t * t
    t3 = t2 * t
    return (
        (2 * t3 - 3 * t2 + 1) * p0
        + (t3 - 2 * t2 + t) * h * m0
        + (-2 * t3 + 3 * t2) * p1
        + (t3 - t2) * h * m1
    )


def _hermite_partial_integral(t, h, p0, p1, m0, m1):
    # antiderivatives of the four cubic basis polynomials on [0, t]
    t2 = t * t
    t3 = t2 * t
    t4 = t2 * t2
    i00 = 0.5 * t4 - t3 + t
    i10 = 0.25 * t4 - (2.0 / 3.0) * t3 + 0.5 * t2
    i01 = t3 - 0.5 * t4
    i11 = 0.25 * t4 - t3 / 3.0
    return h * (p0 * i00 + h * m0 * i10 + p1 * i01 + h * m1 * i11)


class Trail:
    """An ordered run of knots along one direction, ready to interpolate."""

    def __init__(self, spine: float, knots: list[GridKnot], offsets, slopes, spine_slopes):
        order = np.argsort(offsets)
        self.spine = float(spine)
        self.knots = [knots[i] for i in order]
        self.offsets = np.asarray(offsets, dtype=np.float64)[order]
        self.means = np.stack([k.mean for k in self.knots])
        self.slopes = np.asarray(slopes, dtype=np.float64)[order]
        self.spine_slopes = (
            np.asarray(spine_slopes, dtype=np.float64)[order]
            if spine_slopes is not None
            else None
        )
        if np.any(np.diff(self.offsets) <= 0):
            raise ValueError("trail knots must have strictly increasing positions")
        self._prefix = {}

    def __len__(self):
        return len(self.knots)

    def _bracket(self, x: float):
        xs = self.offsets
        x = min(max(x, xs[0]), xs[-1])
        j = int(np.searchsorted(xs, x, side="right")) - 1
        j = min(max(j, 0), xs.shape[0] - 2)
        h = xs[j + 1] - xs[j]
        return j, h, (x - xs[j]) / h

    def value(self, x: float, scheme: str) -> np.ndarray:
        j, h, t = self._bracket(x)
        p0, p1 = self.means[j], self.means[j + 1]
        if scheme == "linear":
            return (1.0 - t) * p0 + t * p1
        return _hermite_value(t, h, p0, p1, self.slopes[j], self.slopes[j + 1])

    def spine_slope(self, x: float) -> np.ndarray:
        j, _, t = self._bracket(x)
        return (1.0 - t) * self.spine_slopes[j] + t * self.spine_slopes[j + 1]

    def _prefix_integrals(self, scheme: str) -> np.ndarray:
        # cumulative integral of the scalar interpolant up to each knot
        if scheme not in self._prefix:
            hs = np.diff(self.offsets)
            p = self.means[:, 0]
            if scheme == "linear":
                parts = hs * 0.5 * (p[:-1] + p[1:])
            else:
                m = self.slopes[:, 0]
                parts = hs * (0.5 * (p[:-1] + p[1:]) + hs * (m[:-1] - m[1:]) / 12.0)
            self._prefix[scheme] = np.concatenate([[0.0], np.cumsum(parts)])
        return self._prefix[scheme]

    def integral_upto(self, x: float, scheme: str) -> float:
        """Integral of the scalar interpolant from the first knot to x."""
        prefix = self._prefix_integrals(scheme)
        j, h, t = self._bracket(x)
        p0, p1 = self.means[j, 0], self.means[j + 1, 0]
        if scheme == "linear":
            part = h * (p0 * t + 0.5 * (p1 - p0) * t * t)
        else:
            part = _hermite_partial_integral(t, h, p0, p1, self.slopes[j, 0], self.slopes[j + 1, 0])
        return float(prefix[j] + part)


def _make_trail(spine, knots, beta_crit, d_trail, d_spine) -> Trail:
    offsets = [float(d_trail @ (k.beta - beta_crit)) for k in knots]
    slopes = [k.grad @ d_trail for k in knots]
    spine_slopes = [k.grad @ d_spine for k in knots] if d_spine is not None else None
    return Trail(spine, knots, offsets, slopes, spine_slopes)


# ---------------------------------------------------------------------------
# The grid


@dataclass(eq=False)
class SurrogateGrid:
    """A precomputed, interpolation-ready grid of statistic moments."""

    model: ModelSpec
    kind: str
    beta_crit: np.ndarray
    directions: np.ndarray  # (dim, dim), rows are the direction basis
    kappa: float | None
    grad_ref: float | None
    trails: list[Trail]
    sampler_budget: dict | None = None

    @property
    def dim(self) -> int:
        return self.model.dim

    def knot_count(self) -> int:
        return sum(len(t) for t in self.trails)

    def iter_knots(self):
        for trail in self.trails:
            yield from trail.knots

    @property
    def spine_coords(self) -> np.ndarray:
        return np.array([t.spine for t in self.trails])

    def matches(self, model: ModelSpec) -> bool:
        a, b = self.model, model
        return (
            a.family == b.family
            and a.k == b.k
            and a.height == b.height
            and a.width == b.width
            and np.allclose(a.bounds_array(), b.bounds_array())
        )

    # -- queries ------------------------------------------------------------

    def interpolate(self, beta, scheme: str = "hermite") -> np.ndarray:
        """Interpolated statistic mean at beta (must lie in the box)."""
        _check_scheme(scheme)
        b = self.model.beta_array(beta)
        if not self.model.contains(b):
            raise ValueError(f"parameter {b} outside the grid's parameter space")
        if self.dim == 1:
            return self.trails[0].value(float(b[0] - self.beta_crit[0]), scheme)
        delta = b - self.beta_crit
        d1, d2 = self.directions
        a = float(d1 @ delta)
        bb = float(d2 @ delta)
        spines = self.spine_coords
        a = min(max(a, spines[0]), spines[-1])
        j = int(np.searchsorted(spines, a, side="right")) - 1
        j = min(max(j, 0), spines.shape[0] - 2)
        lo, hi = self.trails[j], self.trails[j + 1]
        h = spines[j + 1] - spines[j]
        t = (a - spines[j]) / h
        v_lo, v_hi = lo.value(bb, scheme), hi.value(bb, scheme)
        if scheme == "linear":
            return (1.0 - t) * v_lo + t * v_hi
        return _hermite_value(t, h, v_lo, v_hi, lo.spine_slope(bb), hi.spine_slope(bb))

    def log_normalizer_ratio(self, beta_from, beta_to, scheme: str = "hermite") -> float:
        """log C(beta_to) - log C(beta_from) via the interpolated statistic.

        1-D grids integrate the piecewise interpolant in closed form
        (exact per-interval antiderivatives); 2-D grids evaluate the line
        integral of the interpolated vector field along the straight
        segment with 16-node Gauss-Legendre quadrature.
        """
        _check_scheme(scheme)
        bf = self.model.beta_array(beta_from)
        bt = self.model.beta_array(beta_to)
        for b in (bf, bt):
            if not self.model.contains(b):
                raise ValueError(f"endpoint {b} outside the grid's parameter space")
        if self.dim == 1:
            trail = self.trails[0]
            x0 = float(bf[0] - self.beta_crit[0])
            x1 = float(bt[0] - self.beta_crit[0])
            return trail.integral_upto(x1, scheme) - trail.integral_upto(x0, scheme)
        delta = bt - bf
        if not delta.any():
            return 0.0
        total = 0.0
        for t, w in zip(_GL_T, _GL_W):
            total += w * float(delta @ self.interpolate(bf + t * delta, scheme))
        return total

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        knots = []
        for si, trail in enumerate(self.trails):
            for ti, k in enumerate(trail.knots):
                rec = {
                    "beta": k.beta.tolist(),
                    "mean": k.mean.tolist(),
                    "grad": k.grad.ravel().tolist(),
                    "n_samples": int(k.n_samples),
                    "std_error": k.std_error.tolist(),
                }
                if self.dim == 2:
                    rec["spine_index"] = si
                    rec["trail_index"] = ti
                knots.append(rec)
        return {
            "format_version": GRID_FORMAT_VERSION,
            "model": {
                "family": self.model.family,
                "k": self.model.k,
                "height": self.model.height,
                "width": self.model.width,
                "bounds": [list(b) for b in self.model.bounds],
            },
            "kind": self.kind,
            "beta_crit": self.beta_crit.tolist(),
            "directions": self.directions.tolist(),
            "kappa": self.kappa,
            "grad_ref": self.grad_ref,
            "sampler_budget": self.sampler_budget,
            "knots": knots,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown interpolation scheme {scheme!r}; use one of {SCHEMES}")


def load_grid(path) -> SurrogateGrid:
    with open(path) as fh:
        payload = json.load(fh)
    return grid_from_dict(payload)


def grid_from_dict(payload: dict) -> SurrogateGrid:
    version = payload.get("format_version")
    if version != GRID_FORMAT_VERSION:
        raise ValueError(f"unsupported grid format_version {version!r}")
    m = payload["model"]
    model = ModelSpec(
        family=m["family"],
        height=int(m["height"]),
        width=int(m["width"]),
        k=int(m["k"]),
        bounds=tuple(tuple(b) for b in m["bounds"]),
    )
    dim = model.dim
    beta_crit = np.asarray(payload["beta_crit"], dtype=np.float64)
    directions = np.asarray(payload["directions"], dtype=np.float64).reshape(dim, dim)
    knots = [
        GridKnot(
            beta=np.asarray(rec["beta"], dtype=np.float64),
            mean=np.asarray(rec["mean"], dtype=np.float64),
            grad=np.asarray(rec["grad"], dtype=np.float64).reshape(dim, dim),
            n_samples=int(rec["n_samples"]),
            std_error=np.asarray(rec["std_error"], dtype=np.float64),
        )
        for rec in payload["knots"]
    ]
    if dim == 1:
        trails = [_make_trail(0.0, knots, beta_crit, directions[0], None)]
    else:
        groups: dict[int, list[GridKnot]] = {}
        for rec, knot in zip(payload["knots"], knots):
            groups.setdefault(int(rec["spine_index"]), []).append(knot)
        d1, d2 = directions
        trails = []
        for si in sorted(groups):
            group = groups[si]
            a = float(np.median([d1 @ (k.beta - beta_crit) for k in group]))
            trails.append(_make_trail(a, group, beta_crit, d2, d1))
        trails.sort(key=lambda t: t.spine)
    return SurrogateGrid(
        model=model,
        kind=payload["kind"],
        beta_crit=beta_crit,
        directions=directions,
        kappa=payload.get("kappa"),
        grad_ref=payload.get("grad_ref"),
        trails=trails,
        sampler_budget=payload.get("sampler_budget"),
    )


# ---------------------------------------------------------------------------
# Grid construction


def analytic_beta_crit(model: ModelSpec) -> np.ndarray:
    """Closed-form starting point: log(1 + sqrt(k)) for the Potts coupling,
    (0, log(1 + sqrt(2))) for the autologistic pair; clamped into the box."""
    if model.family == POTTS:
        point = np.array([math.log(1.0 + math.sqrt(model.k))])
    else:
        point = np.array([0.0, math.log(1.0 + math.sqrt(2.0))])
    lo, hi = model.bounds_array().T
    return np.clip(point, lo, hi)


def estimate_directions(model: ModelSpec, beta_crit, rng=None, estimator=None,
                        n_samples=4000, burn_in=500):
    """Direction basis and reference gradient at the starting point.

    Returns (directions, grad_ref): rows of `directions` are unit
    eigenvectors of the estimated statistic Jacobian ordered by
    descending eigenvalue (trivially [1] in one dimension), and grad_ref
    is the leading directional derivative magnitude |d1' J d1|.
    """
    b = model.beta_array(beta_crit)
    if not model.contains(b):
        raise ValueError("starting point outside the parameter space")
    if estimator is None:
        if rng is None:
            raise ValueError("need an rng or an estimator")
        mom = estimate_moments(model, b, rng, n_samples=n_samples, burn_in=burn_in)
    else:
        mom = estimator(b, 0)
    return _directions_from_grad(0.5 * (mom.cov + mom.cov.T), model.dim)


def _directions_from_grad(grad: np.ndarray, dim: int):
    if dim == 1:
        ref = float(grad[0, 0])
        if ref <= _MIN_GRAD:
            raise InfeasibleError("near-zero statistic variance at the starting point")
        return np.array([[1.0]]), ref
    evals, evecs = np.linalg.eigh(grad)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals[0] <= _MIN_GRAD:
        raise InfeasibleError("near-zero statistic covariance at the starting point")
    rows = []
    for s in range(dim):
        v = evecs[:, s]
        if v[int(np.argmax(np.abs(v)))] < 0:
            v = -v
        rows.append(v)
    return np.stack(rows), float(abs(evals[0]))


def _in_box(beta, bounds, tol=1e-12) -> bool:
    return all(lo - tol <= x <= hi + tol for x, (lo, hi) in zip(beta, bounds))


def _exit_fraction(origin, vec, bounds) -> float:
    """Largest t in [0, 1] with origin + t*vec inside the box."""
    t = 1.0
    for x, v, (lo, hi) in zip(origin, vec, bounds):
        if v > 1e-300:
            t = min(t, (hi - x) / v)
        elif v < -1e-300:
            t = min(t, (lo - x) / v)
    return max(t, 0.0)


def build_equidistant_grid(model: ModelSpec, points_per_dim, estimator, threads: int = 1) -> SurrogateGrid:
    """Tensor grid over the parameter box, endpoints inclusive.

    points_per_dim is an int or a per-dimension tuple, each entry >= 2.
    Knot moments are estimated independently (parallelizable), each knot
    on its own random stream so results do not depend on thread count.
    """
    if isinstance(points_per_dim, int):
        pts = (points_per_dim,) * model.dim
    else:
        pts = tuple(int(p) for p in points_per_dim)
    if len(pts) != model.dim or any(p < 2 for p in pts):
        raise ValueError("need at least 2 grid points per dimension")
    bounds = model.bounds
    axes = [np.linspace(lo, hi, p) for (lo, hi), p in zip(bounds, pts)]
    if model.dim == 1:
        betas = [np.array([x]) for x in axes[0]]
    else:
        betas = [np.array([x1, x2]) for x1 in axes[0] for x2 in axes[1]]

    def one(item):
        i, beta = item
        return _knot_from_moments(estimator(beta, i))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            knots = list(pool.map(one, enumerate(betas)))
    else:
        knots = [one(item) for item in enumerate(betas)]

    beta_crit = np.array([lo for lo, _ in bounds])
    directions = np.eye(model.dim)
    if model.dim == 1:
        trails = [_make_trail(0.0, knots, beta_crit, directions[0], None)]
    else:
        trails = []
        for i1, x1 in enumerate(axes[0]):
            group = knots[i1 * pts[1] : (i1 + 1) * pts[1]]
            trails.append(
                _make_trail(x1 - bounds[0][0], group, beta_crit, directions[1], directions[0])
            )
    return SurrogateGrid(
        model=model,
        kind=EQUIDISTANT,
        beta_crit=beta_crit,
        directions=directions,
        kappa=None,
        grad_ref=None,
        trails=trails,
        sampler_budget=getattr(estimator, "budget", None),
    )


def _walk_from(knot, d, sign, bounds, kappa, grad_ref, make_knot):
    out = []
    prev_beta, grad = knot.beta, knot.grad
    while True:
        if len(out) >= _MAX_TRAIL_KNOTS:
            raise InfeasibleError("step scale underflow: kappa too large for this box")
        step = step_scale(abs(float(d @ grad @ d)), grad_ref, kappa)
        vec = sign * step * d
        target = prev_beta + vec
        if _in_box(target, bounds):
            nk = make_knot(target)
            out.append(nk)
            prev_beta, grad = nk.beta, nk.grad
        else:
            t = _exit_fraction(prev_beta, vec, bounds)
            if t > 1e-9:
                out.append(make_knot(prev_beta + t * vec))
            break
    return out


def build_gradient_grid(model: ModelSpec, kappa: float, estimator, beta_crit=None) -> SurrogateGrid:
    """Gradient-informed grid grown from beta_crit.

    For each direction d_s in turn, walks from every existing knot in
    -d_s and +d_s, estimating moments at each new point and stepping by
    the local step-scale rule, until the walk leaves the box; the first
    point outside is clamped onto the boundary and kept as a knot, so
    every trail spans its direction's full extent of the box.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    bc = analytic_beta_crit(model) if beta_crit is None else model.beta_array(beta_crit)
    if not model.contains(bc):
        raise ValueError("starting point outside the parameter space")
    counter = itertools.count()

    def make_knot(beta) -> GridKnot:
        return _knot_from_moments(estimator(np.asarray(beta, dtype=np.float64), next(counter)))

    crit = make_knot(bc)
    directions, grad_ref = _directions_from_grad(crit.grad, model.dim)
    bounds = model.bounds
    d1 = directions[0]
    down = _walk_from(crit, d1, -1.0, bounds, kappa, grad_ref, make_knot)
    up = _walk_from(crit, d1, +1.0, bounds, kappa, grad_ref, make_knot)
    spine_knots = list(reversed(down)) + [crit] + up

    if model.dim == 1:
        if len(spine_knots) < 2:
            raise InfeasibleError("gradient grid has fewer than 2 knots")
        trails = [_make_trail(0.0, spine_knots, bc, d1, None)]
    else:
        d2 = directions[1]
        trails = []
        for sk in spine_knots:
            t_down = _walk_from(sk, d2, -1.0, bounds, kappa, grad_ref, make_knot)
            t_up = _walk_from(sk, d2, +1.0, bounds, kappa, grad_ref, make_knot)
            knots = list(reversed(t_down)) + [sk] + t_up
            if len(knots) < 2:
                raise InfeasibleError("a gradient-grid trail has fewer than 2 knots")
            a = float(d1 @ (sk.beta - bc))
            trails.append(_make_trail(a, knots, bc, d2, d1))
        trails.sort(key=lambda t: t.spine)
    return SurrogateGrid(
        model=model,
        kind=GRADIENT,
        beta_crit=bc,
        directions=directions,
        kappa=float(kappa),
        grad_ref=grad_ref,
        trails=trails,
        sampler_budget=getattr(estimator, "budget", None),
    )


def build_gradient_grid_for_target(
    model: ModelSpec,
    target_points: int,
    estimator,
    beta_crit=None,
    tol_frac: float = 0.1,
    max_trials: int = 48,
) -> SurrogateGrid:
    """Bisect kappa until the gradient grid hits a knot budget.

    Knot count is nondecreasing in kappa (larger kappa means smaller
    steps everywhere the gradient is nonzero). Accepts the first grid
    within +-max(1, tol_frac*target) knots of the target.
    """
    if target_points < 2:
        raise ValueError("target knot count must be at least 2")
    tol = max(1, int(round(tol_frac * target_points)))
    best = None

    def build(kappa):
        nonlocal best
        grid = build_gradient_grid(model, kappa, estimator, beta_crit=beta_crit)
        count = grid.knot_count()
        if best is None or abs(count - target_points) < abs(best[1] - target_points):
            best = (grid, count)
        return count

    # bracket the target, then bisect in log(kappa) until an exact hit or
    # the bracket collapses; fall back to the closest grid within tolerance
    lo, hi = 0.05, 2.0
    trials = 0
    while build(hi) < target_points and trials < max_trials:
        trials += 1
        if hi > 1e4:
            break
        hi *= 2.0
    while build(lo) > target_points and trials < max_trials:
        trials += 1
        if lo < 1e-6:
            break
        lo *= 0.5
    while trials < max_trials and best[1] != target_points and hi / lo > 1.0 + 1e-3:
        mid = math.sqrt(lo * hi)
        count_mid = build(mid)
        trials += 1
        if count_mid < target_points:
            lo = mid
        else:
            hi = mid
    if best is None or abs(best[1] - target_points) > tol:
        raise InfeasibleError(
            f"could not reach a {target_points}-knot gradient grid "
            f"(closest: {best[1] if best else 'none'})"
        )
    return best[0]


def interpolate(grid: SurrogateGrid, scheme: str, beta) -> np.ndarray:
    """Interpolated statistic mean at beta (see SurrogateGrid.interpolate)."""
    return grid.interpolate(beta, scheme)


def log_normalizer_ratio(grid: SurrogateGrid, scheme: str, beta_from, beta_to) -> float:
    """log C(beta_to) - log C(beta_from) from the interpolated statistic."""
    return grid.log_normalizer_ratio(beta_from, beta_to, scheme)


def check_grid_model(grid: SurrogateGrid, model: ModelSpec) -> None:
    if not grid.matches(model):
        raise GridMismatchError("grid was precomputed for a different model")
