"""Lattice Markov random field models and their sufficient statistics.

Two exponential-family models on regular 2-D pixel lattices are supported:

* k-state Potts: p(z | beta) propto exp(beta * T(z)) where T(z) counts
  neighbor pairs with matching labels; labels live in {1, ..., k} and the
  coupling beta is a scalar.
* two-state autologistic: p(z | beta) propto
  exp(beta_1 * sum(z) + beta_2 * T(z)) with labels in {-1, +1} and a
  two-dimensional parameter (external field, coupling).

Lattices are first-order (4-neighbor) with free boundaries, so a
height x width lattice has height*(width-1) + (height-1)*width edges.
"""

from __future__ import annotations

import functools
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

POTTS = "potts"
AUTOLOGISTIC = "autologistic"
_FAMILIES = (POTTS, AUTOLOGISTIC)

# Default parameter-space boxes used by the CLI when none are given.
DEFAULT_BOUNDS = {
    POTTS: ((0.0, 2.5),),
    AUTOLOGISTIC: ((-0.05, 0.05), (0.5, 1.2)),
}


@functools.lru_cache(maxsize=128)
def build_lattice(height: int, width: int) -> "Lattice":
    """First-order neighborhood graph of a height x width pixel lattice.

    Sites are indexed row-major. Each edge appears once, in row-major
    order of its first endpoint (right neighbor before down neighbor).
    """
    if height < 1 or width < 1:
        raise ValueError(f"lattice dimensions must be positive, got {height}x{width}")
    pairs = []
    for r in range(height):
        for c in range(width):
            i = r * width + c
            if c + 1 < width:
                pairs.append((i, i + 1))
            if r + 1 < height:
                pairs.append((i, i + width))
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return Lattice(height=height, width=width, edges=edges)


@dataclass(eq=False)
class Lattice:
    """A pixel lattice with its 4-neighbor edge list (free boundary)."""

    height: int
    width: int
    edges: np.ndarray  # (n_edges, 2) int64, each undirected edge once

    @property
    def n(self) -> int:
        return self.height * self.width

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @functools.cached_property
    def neighbor_table(self):
        """Padded neighbor index table: (indices (n, 4), counts (n,)).

        Unused slots hold -1; only the first counts[i] entries of row i
        are valid.
        """
        nbr = np.full((self.n, 4), -1, dtype=np.int64)
        cnt = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            nbr[a, cnt[a]] = b
            cnt[a] += 1
            nbr[b, cnt[b]] = a
            cnt[b] += 1
        return nbr, cnt

    @functools.cached_property
    def color_sites(self):
        """Site indices split by checkerboard color ((r+c) even / odd).

        No edge connects two sites of the same color, so all sites of one
        color are conditionally independent given the other color.
        """
        r, c = np.divmod(np.arange(self.n), self.width)
        even = ((r + c) % 2 == 0).nonzero()[0]
        odd = ((r + c) % 2 == 1).nonzero()[0]
        return even, odd


@dataclass(frozen=True)
class ModelSpec:
    """Model family, label count, lattice size, and parameter-space box."""

    family: str
    height: int
    width: int
    k: int
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.height < 1 or self.width < 1:
            raise ValueError("lattice dimensions must be positive")
        if self.k < 1:
            raise ValueError("label count k must be at least 1")
        if self.family == AUTOLOGISTIC and self.k != 2:
            raise ValueError("autologistic models are two-state (k = 2)")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != self.dim:
            raise ValueError(
                f"{self.family} needs {self.dim} bound interval(s), got {len(bounds)}"
            )
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
                raise ValueError(f"bound interval ({lo}, {hi}) must be finite and nonempty")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self) -> int:
        """Parameter dimension: 1 for Potts, 2 for autologistic."""
        return 1 if self.family == POTTS else 2

    @property
    def n(self) -> int:
        return self.height * self.width

    @property
    def lattice(self) -> Lattice:
        return build_lattice(self.height, self.width)

    def label_values(self) -> np.ndarray:
        if self.family == POTTS:
            return np.arange(1, self.k + 1, dtype=np.int64)
        return np.array([-1, 1], dtype=np.int64)

    def beta_array(self, beta) -> np.ndarray:
        """Normalize a scalar or sequence parameter to shape (dim,)."""
        arr = np.atleast_1d(np.asarray(beta, dtype=np.float64)).ravel()
        if arr.shape != (self.dim,):
            raise ValueError(f"parameter must have dimension {self.dim}, got shape {arr.shape}")
        return arr

    def contains(self, beta, tol: float = 1e-9) -> bool:
        """Whether beta lies in the parameter-space box (within tol)."""
        arr = self.beta_array(beta)
        return all(lo - tol <= x <= hi + tol for x, (lo, hi) in zip(arr, self.bounds))

    def bounds_array(self) -> np.ndarray:
        return np.asarray(self.bounds, dtype=np.float64)


def potts_model(height, width, k, bounds=None) -> ModelSpec:
    """k-state Potts model on a height x width lattice."""
    if bounds is None:
        bounds = DEFAULT_BOUNDS[POTTS]
    return ModelSpec(POTTS, height, width, k, tuple(map(tuple, bounds)))


def autologistic_model(height, width, bounds=None) -> ModelSpec:
    """Two-state autologistic model on a height x width lattice."""
    if bounds is None:
        bounds = DEFAULT_BOUNDS[AUTOLOGISTIC]
    return ModelSpec(AUTOLOGISTIC, height, width, 2, tuple(map(tuple, bounds)))


@dataclass(eq=False)
class LabelField:
    """A configuration of discrete labels on a lattice."""

    labels: np.ndarray  # (n,) int64, row-major
    model: ModelSpec

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()

    @property
    def lattice(self) -> Lattice:
        return self.model.lattice

    def validate(self) -> "LabelField":
        """Raise ValueError on size or label-range violations."""
        if self.labels.shape[0] != self.model.n:
            raise ValueError(
                f"field has {self.labels.shape[0]} sites, model expects {self.model.n}"
            )
        if self.model.family == POTTS:
            if self.labels.min() < 1 or self.labels.max() > self.model.k:
                raise ValueError(f"Potts labels must lie in 1..{self.model.k}")
        else:
            if not np.isin(self.labels, (-1, 1)).all():
                raise ValueError("autologistic labels must be -1 or +1")
        return self

    def copy(self) -> "LabelField":
        return LabelField(self.labels.copy(), self.model)

    def as_grid(self) -> np.ndarray:
        return self.labels.reshape(self.model.height, self.model.width)


@dataclass
class StatVector:
    """A sufficient-statistic value, optionally with moment estimates."""

    value: np.ndarray
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None
    n_samples: int | None = None
    std_error: np.ndarray | None = None


def sufficient_stat(field: LabelField) -> StatVector:
    """Sufficient statistic of a label configuration.

    Potts: scalar count of edges whose endpoints share a label.
    Autologistic: (sum of labels, matching-edge count).
    """
    field.validate()
    e = field.lattice.edges
    labels = field.labels
    matches = float((labels[e[:, 0]] == labels[e[:, 1]]).sum()) if e.size else 0.0
    if field.model.family == POTTS:
        return StatVector(np.array([matches]))
    return StatVector(np.array([float(labels.sum()), matches]))


def random_field(model: ModelSpec, rng: np.random.Generator) -> LabelField:
    """Labels drawn independently and uniformly over the label set."""
    if model.family == POTTS:
        labels = rng.integers(1, model.k + 1, size=model.n)
    else:
        labels = 2 * rng.integers(0, 2, size=model.n) - 1
    return LabelField(labels, model)


# ---------------------------------------------------------------------------
# Plain-text matrix I/O: newline-separated rows, comma- or whitespace-
# separated entries, row-major, no header.


def save_matrix(path, values, fmt="%.10g") -> None:
    np.savetxt(path, np.atleast_2d(values), fmt=fmt)


def load_matrix(path) -> np.ndarray:
    """Load a numeric matrix; accepts comma- or whitespace-separated entries."""
    text = Path(path).read_text()
    arr = np.loadtxt(io.StringIO(text.replace(",", " ")))
    return np.atleast_2d(arr)


def save_label_field(path, field: LabelField) -> None:
    save_matrix(path, field.as_grid(), fmt="%d")


def load_label_field(path, model: ModelSpec) -> LabelField:
    arr = load_matrix(path)
    if arr.shape != (model.height, model.width):
        raise ValueError(
            f"label file shape {arr.shape} does not match model "
            f"{model.height}x{model.width}"
        )
    return LabelField(arr.astype(np.int64).ravel(), model).validate()
