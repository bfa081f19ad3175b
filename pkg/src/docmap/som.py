"""Self-organizing maps with node and dimension growth.

Sequential Kohonen training over a D-dimensional integer lattice. The
lattice dimensionality is raised step by step, with several independent
runs trained in parallel per step; cross-run agreement of probe pairwise
distances decides when the dimensionality suffices.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

# Salt values keeping derived random streams independent.
_PROBE_SALT = 101
_RUN_SALT = 102
_TRAIN_SALT = 103
_GROW_SALT = 104

# Symmetry-breaking noise for replicated layers, relative to mean weight norm.
_DIM_GROWTH_JITTER = 1e-3


def derived_seed(*parts: int) -> int:
    """Stable integer seed derived from a tuple of integers."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def lattice_coords(axis_sizes) -> np.ndarray:
    """Row-major enumeration of all lattice positions, shape (n_nodes, D).

    Row-major (last axis fastest) order is the canonical node order; all
    tie-breaking is first-occurrence in this order.
    """
    sizes = tuple(int(s) for s in axis_sizes)
    return np.indices(sizes).reshape(len(sizes), -1).T.copy()


@dataclass
class SomConfig:
    """Knobs for the incremental dimensionality evaluation."""

    initial_dim: int = 2
    nodes_per_axis: int = 6
    epochs_per_phase: int = 10
    learning_rate: tuple[float, float] = (0.5, 0.02)
    neighborhood_radius: tuple[float, float] = (3.0, 0.5)
    parallel_runs: int = 3
    stability_threshold: float = 0.9
    max_dim: int = 5
    probe_size: int = 64
    seed: int = 0

    def validate(self) -> None:
        if self.initial_dim < 1:
            raise ValueError("initial_dim must be >= 1")
        if self.initial_dim > self.max_dim:
            raise ValueError("initial_dim must not exceed max_dim")
        if self.nodes_per_axis < 2:
            raise ValueError("nodes_per_axis must be >= 2")
        if self.epochs_per_phase < 1:
            raise ValueError("epochs_per_phase must be >= 1")
        if self.parallel_runs < 2:
            raise ValueError("parallel_runs must be >= 2 (stability needs pairs)")
        if not (0.0 < self.stability_threshold <= 1.0):
            raise ValueError("stability_threshold must be in (0, 1]")
        if self.probe_size < 3:
            raise ValueError("probe_size must be >= 3")
        for name in ("learning_rate", "neighborhood_radius"):
            initial, final = getattr(self, name)
            if not (initial >= final > 0.0):
                raise ValueError(f"{name} must decay: initial >= final > 0")

    def to_dict(self) -> dict:
        return {
            "initial_dim": self.initial_dim,
            "nodes_per_axis": self.nodes_per_axis,
            "epochs_per_phase": self.epochs_per_phase,
            "learning_rate": list(self.learning_rate),
            "neighborhood_radius": list(self.neighborhood_radius),
            "parallel_runs": self.parallel_runs,
            "stability_threshold": self.stability_threshold,
            "max_dim": self.max_dim,
            "probe_size": self.probe_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SomConfig":
        kwargs = dict(data)
        for name in ("learning_rate", "neighborhood_radius"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)


@dataclass
class TrainSchedule:
    """One training phase: linear decay of rate and radius across all
    epochs * samples update steps."""

    epochs: int
    learning_rate: tuple[float, float]
    neighborhood_radius: tuple[float, float]

    def validate(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        lr0, lr1 = self.learning_rate
        if lr0 < 0 or lr1 < 0:
            raise ValueError("learning rate must be >= 0")
        r0, r1 = self.neighborhood_radius
        if not (r0 > 0 and r1 > 0):
            raise ValueError("neighborhood radius must be > 0")


@dataclass
class SomNode:
    lattice_coords: tuple[int, ...]
    weights: np.ndarray


@dataclass
class Som:
    """Lattice of weight vectors. Node order is row-major over the lattice."""

    dim: int
    axis_sizes: tuple[int, ...]
    weights: np.ndarray
    rng_seed: int
    training_log: list = field(default_factory=list)
    lattice: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.axis_sizes = tuple(int(s) for s in self.axis_sizes)
        if self.dim != len(self.axis_sizes):
            raise ValueError("dim must equal the number of axis sizes")
        self.lattice = lattice_coords(self.axis_sizes)
        if self.weights.shape[0] != self.lattice.shape[0]:
            raise ValueError("node count must equal the product of axis sizes")

    @property
    def node_count(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def node(self, i: int) -> SomNode:
        return SomNode(tuple(int(c) for c in self.lattice[i]), self.weights[i])

    def nodes(self):
        for i in range(self.node_count):
            yield self.node(i)


@dataclass
class StabilityReport:
    """Cross-run agreement for one dimensionality step."""

    dim: int
    pairwise_scores: list[tuple[int, int, float]]
    mean_score: float
    stabilized: bool

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "pairwise_scores": [[a, b, s] for a, b, s in self.pairwise_scores],
            "mean_score": self.mean_score,
            "stabilized": self.stabilized,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityReport":
        return cls(
            dim=int(data["dim"]),
            pairwise_scores=[(int(a), int(b), float(s)) for a, b, s in data["pairwise_scores"]],
            mean_score=float(data["mean_score"]),
            stabilized=bool(data["stabilized"]),
        )


def init_som(dim: int, axis_sizes, data_sample, seed: int) -> Som:
    """New lattice with weights drawn as random convex combinations of two
    sampled data vectors per node (reproducible from seed)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    sizes = tuple(int(s) for s in axis_sizes)
    if len(sizes) != dim or any(s < 1 for s in sizes):
        raise ValueError("axis_sizes must be positive and match dim")
    sample = np.asarray(data_sample, dtype=np.float64)
    if sample.ndim != 2 or sample.shape[0] == 0:
        raise ValueError("data sample must be a non-empty 2-d array")

    n_nodes = int(np.prod(sizes))
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, sample.shape[0], size=(n_nodes, 2))
    beta = rng.random((n_nodes, 1))
    weights = beta * sample[picks[:, 0]] + (1.0 - beta) * sample[picks[:, 1]]
    return Som(dim=dim, axis_sizes=sizes, weights=weights, rng_seed=int(seed))


def train(som: Som, vectors, schedule: TrainSchedule, seed: int) -> Som:
    """One sequential training phase; returns a new Som.

    Per sample: best-matching unit by Euclidean distance, then every node
    within the current neighborhood radius moves toward the sample under a
    Gaussian kernel over lattice distance. Rate and radius decay linearly
    over the phase; sample order is reshuffled from ``seed`` each epoch.
    """
    schedule.validate()
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("vectors must be a non-empty 2-d array")
    if data.shape[1] != som.n_features:
        raise ValueError(
            f"vector length {data.shape[1]} does not match node weights {som.n_features}"
        )

    weights = som.weights.copy()
    lat = som.lattice.astype(np.float64)
    w_sq = np.einsum("ij,ij->i", weights, weights)

    lr0, lr1 = schedule.learning_rate
    r0, r1 = schedule.neighborhood_radius
    n = data.shape[0]
    total_steps = schedule.epochs * n
    rng = np.random.default_rng(seed)

    step = 0
    for _ in range(schedule.epochs):
        for i in rng.permutation(n):
            frac = step / (total_steps - 1) if total_steps > 1 else 0.0
            lr = lr0 + (lr1 - lr0) * frac
            radius = r0 + (r1 - r0) * frac
            x = data[i]
            bmu = int(np.argmin(w_sq - 2.0 * (weights @ x)))
            if lr > 0.0:
                lat_d2 = ((lat - lat[bmu]) ** 2).sum(axis=1)
                idx = np.nonzero(lat_d2 <= radius * radius)[0]
                kernel = lr * np.exp(-lat_d2[idx] / (2.0 * radius * radius))
                rows = weights[idx]
                rows += kernel[:, None] * (x - rows)
                weights[idx] = rows
                w_sq[idx] = np.einsum("ij,ij->i", rows, rows)
            step += 1

    log = list(som.training_log)
    log.append(
        {
            "dim": som.dim,
            "axis_sizes": list(som.axis_sizes),
            "epochs": schedule.epochs,
            "samples": n,
            "learning_rate": [lr0, lr1],
            "neighborhood_radius": [r0, r1],
            "seed": int(seed),
        }
    )
    return Som(
        dim=som.dim,
        axis_sizes=som.axis_sizes,
        weights=weights,
        rng_seed=som.rng_seed,
        training_log=log,
    )


def project(som: Som, vector) -> np.ndarray:
    """Lattice coordinates of the best-matching unit, as reals.

    Ties go to the node earliest in row-major lattice order.
    """
    x = np.asarray(vector, dtype=np.float64)
    if x.shape != (som.n_features,):
        raise ValueError(f"vector length {x.shape} does not match node weights")
    w_sq = np.einsum("ij,ij->i", som.weights, som.weights)
    bmu = int(np.argmin(w_sq - 2.0 * (som.weights @ x)))
    return som.lattice[bmu].astype(np.float64)


def grow_nodes(som: Som) -> Som:
    """Refine the lattice: every axis size s becomes 2s - 1.

    Original nodes keep their weights at doubled coordinates; interleaved
    nodes average their adjacent originals (2^k corners when k axes are at
    odd positions).
    """
    new_sizes = tuple(2 * s - 1 for s in som.axis_sizes)
    new_lat = lattice_coords(new_sizes)
    new_weights = np.empty((new_lat.shape[0], som.n_features), dtype=som.weights.dtype)

    old_sizes = som.axis_sizes
    for row, coords in enumerate(new_lat):
        corners_per_axis = []
        for c in coords:
            c = int(c)
            if c % 2 == 0:
                corners_per_axis.append((c // 2,))
            else:
                corners_per_axis.append(((c - 1) // 2, (c + 1) // 2))
        corner_idx = [
            int(np.ravel_multi_index(corner, old_sizes))
            for corner in itertools.product(*corners_per_axis)
        ]
        new_weights[row] = som.weights[corner_idx].mean(axis=0)

    return Som(
        dim=som.dim,
        axis_sizes=new_sizes,
        weights=new_weights,
        rng_seed=som.rng_seed,
        training_log=list(som.training_log),
    )


def grow_dimension(
    som: Som, new_axis_size: int, max_dim: int | None = None, jitter: bool = True
) -> Som:
    """Add one lattice axis by replicating every node along it.

    Layer 0 keeps the exact original weights; higher layers receive small
    seeded noise (relative magnitude 1e-3 of the mean weight norm) so the
    new axis can differentiate during the next training phase. With
    ``jitter`` off all layers are exact copies.
    """
    if new_axis_size < 1:
        raise ValueError("new_axis_size must be >= 1")
    if max_dim is not None and som.dim + 1 > max_dim:
        raise ValueError(f"max_dim exceeded: cannot grow beyond {max_dim}")

    n_old = som.node_count
    weights = np.repeat(som.weights, new_axis_size, axis=0)
    if jitter and new_axis_size > 1:
        rng = np.random.default_rng(
            [int(som.rng_seed) & 0xFFFFFFFF, som.dim, _GROW_SALT]
        )
        magnitude = _DIM_GROWTH_JITTER * float(
            np.linalg.norm(som.weights, axis=1).mean()
        )
        noise = rng.standard_normal((n_old, new_axis_size, som.n_features)) * magnitude
        noise[:, 0, :] = 0.0
        weights = weights + noise.reshape(n_old * new_axis_size, som.n_features)

    return Som(
        dim=som.dim + 1,
        axis_sizes=som.axis_sizes + (int(new_axis_size),),
        weights=weights,
        rng_seed=som.rng_seed,
        training_log=list(som.training_log),
    )


def stability_score(coords_a, coords_b) -> float:
    """Pearson correlation of the two condensed pairwise-distance vectors.

    The probe sets must be the same points in the same order (>= 3). When
    either distance vector is constant, the score is 1.0 if both are
    constant with the same all-zero/none-zero pattern, else 0.0.
    """
    a = np.asarray(coords_a, dtype=np.float64)
    b = np.asarray(coords_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ValueError("probe sets must be 2-d with equal point counts")
    if a.shape[0] < 3:
        raise ValueError("need at least 3 probes")

    da = pdist(a)
    db = pdist(b)

    def _constant(d):
        return float(np.ptp(d)) <= 1e-12 * max(1.0, float(np.abs(d).max()))

    const_a = _constant(da)
    const_b = _constant(db)
    if const_a or const_b:
        if const_a and const_b and ((abs(da[0]) <= 1e-12) == (abs(db[0]) <= 1e-12)):
            return 1.0
        return 0.0
    score = float(np.corrcoef(da, db)[0, 1])
    if not np.isfinite(score):
        return 0.0
    return float(np.clip(score, -1.0, 1.0))


def incremental_evaluate(
    vectors,
    config: SomConfig,
    force_equal_seeds: bool = False,
    on_phase=None,
):
    """Raise lattice dimensionality until cross-run distances stabilize.

    Per dimensionality step: ``parallel_runs`` maps are trained from
    distinct derived seeds, a fixed probe subset is projected through each,
    and all run pairs are scored. When the mean score reaches the stability
    threshold the search stops; at ``max_dim`` the final report is returned
    with ``stabilized`` False instead of raising.

    Returns (final_dim, soms, reports). ``on_phase`` receives one dict per
    step (including wall time) for live logging. ``force_equal_seeds``
    collapses all runs onto run 0's seeds (test hook).
    """
    config.validate()
    data = np.asarray(vectors, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < config.probe_size:
        raise ValueError("need at least probe_size vectors")

    probe_rng = np.random.default_rng(derived_seed(config.seed, _PROBE_SALT))
    probe_idx = probe_rng.choice(data.shape[0], size=config.probe_size, replace=False)

    def run_seed(r: int) -> int:
        return derived_seed(config.seed, 0 if force_equal_seeds else r, _RUN_SALT)

    axis_sizes = [config.nodes_per_axis] * config.initial_dim
    soms = [
        init_som(config.initial_dim, axis_sizes, data, run_seed(r))
        for r in range(config.parallel_runs)
    ]

    schedule = TrainSchedule(
        epochs=config.epochs_per_phase,
        learning_rate=config.learning_rate,
        neighborhood_radius=config.neighborhood_radius,
    )

    reports: list[StabilityReport] = []
    phase = 0
    while True:
        started = time.perf_counter()
        dim = soms[0].dim
        soms = [
            train(
                som,
                data,
                schedule,
                derived_seed(config.seed, 0 if force_equal_seeds else r, phase, _TRAIN_SALT),
            )
            for r, som in enumerate(soms)
        ]
        probe_coords = [
            np.array([project(som, data[i]) for i in probe_idx]) for som in soms
        ]
        pair_scores = [
            (i, j, stability_score(probe_coords[i], probe_coords[j]))
            for i, j in itertools.combinations(range(len(soms)), 2)
        ]
        mean_score = float(np.mean([s for _, _, s in pair_scores]))
        stabilized = mean_score >= config.stability_threshold
        report = StabilityReport(
            dim=dim, pairwise_scores=pair_scores, mean_score=mean_score, stabilized=stabilized
        )
        reports.append(report)
        if on_phase is not None:
            record = report.to_dict()
            record["wall_time_s"] = time.perf_counter() - started
            on_phase(record)

        if stabilized or dim >= config.max_dim:
            return dim, soms, reports
        new_axis = min(soms[0].axis_sizes)
        soms = [grow_dimension(som, new_axis, max_dim=config.max_dim) for som in soms]
        phase += 1
