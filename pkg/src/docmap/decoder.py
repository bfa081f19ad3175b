"""Synthetic activation patterns and the trainable pattern-to-coordinates decoder.

A linear generative model stands in for real acquisitions: each synthetic
subject responds to a coordinate vector with a voxel pattern that mixes a
cohort-shared component and an individual component, plus Gaussian noise.
A small feedforward network learns the inverse mapping back to map
coordinates, with an interactive training protocol that draws random map
points and one-step-trains on each.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CohortError
from .knowledge_map import KnowledgeMap, neighbors
from .som import derived_seed

_COHORT_SHARED_SALT = 201
_COHORT_INDIV_SALT = 202
_DECODER_INIT_SALT = 203
_POINT_SALT = 204
_DRAW_SALT = 205
_DATASET_SALT = 206


@dataclass
class SyntheticSubject:
    """Generative stand-in for one operator.

    ``mixing`` weights the cohort-shared response against the individual
    one; voxels = mixing * shared_weight @ coords
    + (1 - mixing) * subject_weight @ coords + N(0, noise_sigma^2).
    """

    id: str
    shared_weight: np.ndarray
    subject_weight: np.ndarray
    mixing: float
    noise_sigma: float
    seed: int

    def __post_init__(self):
        if self.shared_weight.shape != self.subject_weight.shape:
            raise ValueError("shared and subject weight shapes must match")
        if not np.isfinite(self.shared_weight).all() or not np.isfinite(self.subject_weight).all():
            raise ValueError("subject matrices must be finite")
        if not (0.0 <= self.mixing <= 1.0):
            raise ValueError("mixing must be in [0, 1]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    @property
    def voxel_count(self) -> int:
        return self.shared_weight.shape[0]

    @property
    def coord_dim(self) -> int:
        return self.shared_weight.shape[1]


@dataclass
class ActivationPattern:
    """One synthetic acquisition. ``target_coords`` is the generating
    ground truth, never shown to the decoder at inference."""

    voxels: np.ndarray
    subject_id: str
    target_coords: np.ndarray


def make_cohort(
    n_subjects: int,
    voxels: int,
    coord_dim: int,
    mixing: float,
    noise_sigma: float,
    seed: int,
    id_prefix: str = "subj",
) -> list[SyntheticSubject]:
    """Subjects sharing one seeded shared-response matrix, each with its own
    individual matrix. Matrix entries are scaled 1/sqrt(voxels) so voxel
    magnitudes stay O(|coords|)."""
    scale = 1.0 / np.sqrt(voxels)
    shared_rng = np.random.default_rng(derived_seed(seed, _COHORT_SHARED_SALT))
    shared = shared_rng.standard_normal((voxels, coord_dim)) * scale
    subjects = []
    for i in range(n_subjects):
        rng = np.random.default_rng(derived_seed(seed, i, _COHORT_INDIV_SALT))
        subjects.append(
            SyntheticSubject(
                id=f"{id_prefix}{i}",
                shared_weight=shared,
                subject_weight=rng.standard_normal((voxels, coord_dim)) * scale,
                mixing=mixing,
                noise_sigma=noise_sigma,
                seed=derived_seed(seed, i, _COHORT_INDIV_SALT),
            )
        )
    return subjects


def synth_pattern(subject: SyntheticSubject, coords, draw_seed: int) -> ActivationPattern:
    """Draw one activation pattern for the given coordinates."""
    c = np.asarray(coords, dtype=np.float64)
    if c.shape != (subject.coord_dim,):
        raise ValueError(
            f"coords length {c.shape} does not match subject dimensionality {subject.coord_dim}"
        )
    clean = subject.mixing * (subject.shared_weight @ c) + (1.0 - subject.mixing) * (
        subject.subject_weight @ c
    )
    if subject.noise_sigma > 0:
        rng = np.random.default_rng(draw_seed)
        clean = clean + rng.standard_normal(subject.voxel_count) * subject.noise_sigma
    return ActivationPattern(voxels=clean, subject_id=subject.id, target_coords=c.copy())


def _smooth(voxels: np.ndarray, window: int) -> np.ndarray:
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if window == 1:
        return voxels.astype(np.float64)
    half = window // 2
    padded = np.pad(voxels.astype(np.float64), half, mode="edge")
    return np.convolve(padded, np.ones(window), mode="valid") / window


def preprocess(pattern, window: int) -> np.ndarray:
    """Moving-average smoothing (edge-clamped) then per-pattern z-scoring.

    All-constant input maps to all zeros. Accepts an ActivationPattern or a
    raw voxel array.
    """
    voxels = pattern.voxels if isinstance(pattern, ActivationPattern) else np.asarray(pattern)
    smoothed = _smooth(voxels, window)
    std = float(smoothed.std())
    if std == 0.0:
        return np.zeros_like(smoothed)
    return (smoothed - smoothed.mean()) / std


def protocol_features(pattern, window: int, keep_scale: bool = True) -> np.ndarray:
    """Feature assembly used by the training protocol and experiments.

    With ``keep_scale`` the smoothed pattern is only mean-centered, keeping
    its magnitude: full unit-variance normalization is invariant under
    positive scaling of the pattern, which under the linear generative
    model erases the coordinate magnitude and makes exact recovery
    impossible. ``keep_scale=False`` falls back to plain ``preprocess``.
    """
    if not keep_scale:
        return preprocess(pattern, window)
    voxels = pattern.voxels if isinstance(pattern, ActivationPattern) else np.asarray(pattern)
    smoothed = _smooth(voxels, window)
    return smoothed - smoothed.mean()


@dataclass
class Decoder:
    """Single-hidden-layer regressor from features to map coordinates."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    epoch_count: int = 0
    last_error: float | None = None
    error_log: list = field(default_factory=list)

    @property
    def input_width(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[0]

    @property
    def output_width(self) -> int:
        return self.w2.shape[0]

    def copy(self) -> "Decoder":
        return Decoder(
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w2=self.w2.copy(),
            b2=self.b2.copy(),
            epoch_count=self.epoch_count,
            last_error=self.last_error,
            error_log=list(self.error_log),
        )


def new_decoder(input_width: int, hidden_width: int, output_width: int, seed: int) -> Decoder:
    rng = np.random.default_rng(seed)
    return Decoder(
        w1=rng.standard_normal((hidden_width, input_width)) / np.sqrt(input_width),
        b1=np.zeros(hidden_width),
        w2=rng.standard_normal((output_width, hidden_width)) / np.sqrt(hidden_width),
        b2=np.zeros(output_width),
    )


def _forward(decoder: Decoder, x: np.ndarray):
    hidden = np.tanh(x @ decoder.w1.T + decoder.b1)
    return hidden, hidden @ decoder.w2.T + decoder.b2


def decode(decoder: Decoder, features) -> np.ndarray:
    """Forward pass for one feature vector."""
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (decoder.input_width,):
        raise ValueError(f"feature width {x.shape} does not match decoder input")
    _, out = _forward(decoder, x[None, :])
    return out[0]


def decode_batch(decoder: Decoder, features: np.ndarray) -> np.ndarray:
    _, out = _forward(decoder, np.asarray(features, dtype=np.float64))
    return out


def loss_and_grads(decoder: Decoder, x: np.ndarray, t: np.ndarray):
    """Mean-squared-error loss over all outputs and its analytic gradients."""
    hidden, out = _forward(decoder, x)
    diff = out - t
    loss = float(np.mean(diff**2))
    g_out = 2.0 * diff / diff.size
    grads = {
        "w2": g_out.T @ hidden,
        "b2": g_out.sum(axis=0),
    }
    g_hidden = (g_out @ decoder.w2) * (1.0 - hidden**2)
    grads["w1"] = g_hidden.T @ x
    grads["b1"] = g_hidden.sum(axis=0)
    return loss, grads


def _apply_grads(decoder: Decoder, grads: dict, lr: float) -> None:
    decoder.w1 -= lr * grads["w1"]
    decoder.b1 -= lr * grads["b1"]
    decoder.w2 -= lr * grads["w2"]
    decoder.b2 -= lr * grads["b2"]


@dataclass
class DecoderSchedule:
    epochs: int
    batch_size: int
    learning_rate: float
    seed: int = 0


def _as_arrays(samples):
    xs = np.asarray([np.asarray(f, dtype=np.float64) for f, _ in samples])
    ts = np.asarray([np.asarray(t, dtype=np.float64) for _, t in samples])
    return xs, ts


def train_decoder(decoder: Decoder, samples, schedule: DecoderSchedule) -> Decoder:
    """Mini-batch gradient descent on MSE; mutates and returns the decoder.

    Shuffling is seeded per schedule; the full-dataset loss after each
    epoch is appended to ``decoder.error_log``.
    """
    if not len(samples):
        raise ValueError("samples must be non-empty")
    xs, ts = _as_arrays(samples)
    if xs.shape[1] != decoder.input_width or ts.shape[1] != decoder.output_width:
        raise ValueError("sample widths do not match decoder layer sizes")

    rng = np.random.default_rng(schedule.seed)
    n = xs.shape[0]
    batch = max(1, min(schedule.batch_size, n))
    for _ in range(schedule.epochs):
        order = rng.permutation(n)
        if schedule.learning_rate > 0:
            for start in range(0, n, batch):
                idx = order[start : start + batch]
                _, grads = loss_and_grads(decoder, xs[idx], ts[idx])
                _apply_grads(decoder, grads, schedule.learning_rate)
        epoch_loss, _ = loss_and_grads(decoder, xs, ts)
        decoder.epoch_count += 1
        decoder.last_error = epoch_loss
        decoder.error_log.append(epoch_loss)
    return decoder


def rmse(decoder: Decoder, features: np.ndarray, targets: np.ndarray) -> float:
    pred = decode_batch(decoder, features)
    return float(np.sqrt(np.mean((pred - np.asarray(targets)) ** 2)))


@dataclass
class ProtocolConfig:
    """Knobs for the interactive training protocol."""

    k_neighbors: int = 5
    window: int = 3
    learning_rate: tuple[float, float] = (0.05, 0.01)
    hidden: int = 64
    keep_scale: bool = True
    seed: int = 0


def run_protocol(
    kmap: KnowledgeMap,
    subject: SyntheticSubject,
    iterations: int,
    config: ProtocolConfig,
    decoder: Decoder | None = None,
):
    """Interactive decoder training against a built map.

    Each iteration: draw a random point inside the map's bounding box,
    record the ids of its nearest stored documents (the material an
    operator would be shown), synthesize the subject's activation pattern
    for the point, assemble features, and take one training step on the
    (features, point) pair. Returns the decoder and a log sufficient to
    replay the session exactly.
    """
    if not kmap.entries:
        raise ValueError("map has no entries")
    if subject.coord_dim != kmap.dim:
        raise ValueError("subject dimensionality does not match map")
    lo, hi = kmap.bounding_box()
    if decoder is None:
        decoder = new_decoder(
            subject.voxel_count,
            config.hidden,
            kmap.dim,
            derived_seed(config.seed, _DECODER_INIT_SALT),
        )

    lr0, lr1 = config.learning_rate
    point_rng = np.random.default_rng(derived_seed(config.seed, _POINT_SALT))
    records = []
    for step in range(iterations):
        point = lo + point_rng.random(kmap.dim) * (hi - lo)
        shown = neighbors(kmap, point, config.k_neighbors)
        draw = derived_seed(config.seed, step, _DRAW_SALT)
        pattern = synth_pattern(subject, point, draw)
        feats = protocol_features(pattern, config.window, config.keep_scale)
        lr = lr0 + (lr1 - lr0) * (step / (iterations - 1) if iterations > 1 else 0.0)
        if lr > 0:
            _, grads = loss_and_grads(decoder, feats[None, :], point[None, :])
            _apply_grads(decoder, grads, lr)
        records.append(
            {
                "iteration": step,
                "point": [float(v) for v in point],
                "neighbor_ids": [nb.doc_id for nb in shown],
                "draw_seed": int(draw),
            }
        )

    log = {
        "seed": config.seed,
        "iterations": iterations,
        "k_neighbors": config.k_neighbors,
        "window": config.window,
        "keep_scale": config.keep_scale,
        "learning_rate": [lr0, lr1],
        "subject_id": subject.id,
        "records": records,
    }
    return decoder, log


@dataclass
class PretrainConfig:
    """Cohort pretraining: coordinate box the samples are drawn from plus
    the training schedule."""

    coord_lo: np.ndarray
    coord_hi: np.ndarray
    schedule: DecoderSchedule
    window: int = 3
    keep_scale: bool = True
    hidden: int = 64
    seed: int = 0


def subject_dataset(
    subject: SyntheticSubject,
    n: int,
    coord_lo,
    coord_hi,
    window: int,
    keep_scale: bool,
    seed: int,
):
    """n (features, coords) pairs for one subject, coords uniform in the box."""
    lo = np.asarray(coord_lo, dtype=np.float64)
    hi = np.asarray(coord_hi, dtype=np.float64)
    rng = np.random.default_rng(derived_seed(seed, _DATASET_SALT))
    coords = lo + rng.random((n, lo.shape[0])) * (hi - lo)
    feats = []
    for i in range(n):
        pattern = synth_pattern(subject, coords[i], derived_seed(seed, i, _DRAW_SALT))
        feats.append(protocol_features(pattern, window, keep_scale))
    return np.asarray(feats), coords


def pretrain_anthropogenic(
    subjects: list[SyntheticSubject], samples_per_subject: int, config: PretrainConfig
) -> Decoder:
    """Train one decoder on pooled samples from a cohort sharing the same
    shared-response matrix; intended as initialization for per-subject
    fine-tuning. Raises CohortError when the cohort is invalid."""
    if len(subjects) < 2:
        raise CohortError("cohort needs at least 2 subjects")
    ref = subjects[0].shared_weight
    for subject in subjects[1:]:
        if not np.array_equal(subject.shared_weight, ref):
            raise CohortError(f"subject {subject.id!r} has a different shared response")

    xs, ts = [], []
    for i, subject in enumerate(subjects):
        x, t = subject_dataset(
            subject,
            samples_per_subject,
            config.coord_lo,
            config.coord_hi,
            config.window,
            config.keep_scale,
            derived_seed(config.seed, i),
        )
        xs.append(x)
        ts.append(t)
    pooled_x = np.concatenate(xs, axis=0)
    pooled_t = np.concatenate(ts, axis=0)

    decoder = new_decoder(
        subjects[0].voxel_count,
        config.hidden,
        subjects[0].coord_dim,
        derived_seed(config.seed, _DECODER_INIT_SALT),
    )
    samples = list(zip(pooled_x, pooled_t))
    return train_decoder(decoder, samples, config.schedule)
