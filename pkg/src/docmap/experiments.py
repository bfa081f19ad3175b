"""Cohort-pretraining experiment: does a decoder pretrained on pooled
multi-subject data fine-tune to a new subject faster than a randomly
initialized one? Both arms train on identical per-subject data; the
measured output is epochs until held-out RMSE drops to a fraction of the
coordinate range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .decoder import (
    DecoderSchedule,
    PretrainConfig,
    make_cohort,
    new_decoder,
    pretrain_anthropogenic,
    rmse,
    subject_dataset,
    train_decoder,
)
from .som import derived_seed

_FINETUNE_SALT = 301
_EVAL_SALT = 302
_SCRATCH_SALT = 303


@dataclass
class ExperimentConfig:
    voxels: int = 100
    coord_dim: int = 3
    mixing: float = 0.7
    noise_sigma: float = 0.02
    cohort_size: int = 8
    holdout_subjects: int = 10
    pretrain_samples_per_subject: int = 200
    finetune_samples: int = 150
    eval_samples: int = 100
    coord_lo: float = 0.0
    coord_hi: float = 5.0
    window: int = 3
    keep_scale: bool = True
    hidden: int = 64
    pretrain_epochs: int = 40
    batch_size: int = 32
    learning_rate: float = 0.05
    threshold_fraction: float = 0.1
    max_epochs: int = 200
    seed: int = 0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)


def epochs_to_threshold(
    decoder,
    train_x,
    train_t,
    eval_x,
    eval_t,
    threshold: float,
    learning_rate: float,
    batch_size: int,
    max_epochs: int,
    seed: int,
):
    """Train epoch by epoch until held-out RMSE <= threshold.

    Returns (epochs, reached, curve). Epoch 0 is the untrained state, so a
    decoder that already meets the threshold reports 0. When the cap is hit
    the count is censored at max_epochs with reached=False.
    """
    samples = list(zip(train_x, train_t))
    curve = [rmse(decoder, eval_x, eval_t)]
    if curve[0] <= threshold:
        return 0, True, curve
    for epoch in range(1, max_epochs + 1):
        train_decoder(
            decoder,
            samples,
            DecoderSchedule(
                epochs=1,
                batch_size=batch_size,
                learning_rate=learning_rate,
                seed=derived_seed(seed, epoch),
            ),
        )
        curve.append(rmse(decoder, eval_x, eval_t))
        if curve[-1] <= threshold:
            return epoch, True, curve
    return max_epochs, False, curve


def run_pretraining_experiment(config: ExperimentConfig) -> dict:
    """Full two-arm comparison over fresh held-out subjects.

    The cohort and the held-out subjects share one shared-response matrix;
    the pretrained arm fine-tunes a copy of the cohort decoder while the
    scratch arm starts from a fresh random initialization. Returns a
    summary dict with per-subject counts, learning curves, and the median
    epochs-to-threshold per arm.
    """
    lo = np.full(config.coord_dim, config.coord_lo, dtype=np.float64)
    hi = np.full(config.coord_dim, config.coord_hi, dtype=np.float64)
    coord_range = float((hi - lo).max())
    threshold = config.threshold_fraction * coord_range

    everyone = make_cohort(
        config.cohort_size + config.holdout_subjects,
        config.voxels,
        config.coord_dim,
        config.mixing,
        config.noise_sigma,
        config.seed,
    )
    cohort = everyone[: config.cohort_size]
    holdouts = everyone[config.cohort_size :]

    pretrained = pretrain_anthropogenic(
        cohort,
        config.pretrain_samples_per_subject,
        PretrainConfig(
            coord_lo=lo,
            coord_hi=hi,
            schedule=DecoderSchedule(
                epochs=config.pretrain_epochs,
                batch_size=config.batch_size,
                learning_rate=config.learning_rate,
                seed=derived_seed(config.seed, 1),
            ),
            window=config.window,
            keep_scale=config.keep_scale,
            hidden=config.hidden,
            seed=config.seed,
        ),
    )

    subjects = []
    curves = []
    for i, subject in enumerate(holdouts):
        train_x, train_t = subject_dataset(
            subject,
            config.finetune_samples,
            lo,
            hi,
            config.window,
            config.keep_scale,
            derived_seed(config.seed, i, _FINETUNE_SALT),
        )
        eval_x, eval_t = subject_dataset(
            subject,
            config.eval_samples,
            lo,
            hi,
            config.window,
            config.keep_scale,
            derived_seed(config.seed, i, _EVAL_SALT),
        )

        arms = {}
        for arm, decoder in (
            ("pretrained", pretrained.copy()),
            (
                "scratch",
                new_decoder(
                    config.voxels,
                    config.hidden,
                    config.coord_dim,
                    derived_seed(config.seed, i, _SCRATCH_SALT),
                ),
            ),
        ):
            epochs, reached, curve = epochs_to_threshold(
                decoder,
                train_x,
                train_t,
                eval_x,
                eval_t,
                threshold,
                config.learning_rate,
                config.batch_size,
                config.max_epochs,
                derived_seed(config.seed, i),
            )
            arms[arm] = {"epochs": epochs, "reached": reached}
            curves.append({"subject": subject.id, "arm": arm, "rmse": curve})

        subjects.append(
            {
                "id": subject.id,
                "pretrained_epochs": arms["pretrained"]["epochs"],
                "pretrained_reached": arms["pretrained"]["reached"],
                "scratch_epochs": arms["scratch"]["epochs"],
                "scratch_reached": arms["scratch"]["reached"],
            }
        )

    return {
        "seed": config.seed,
        "threshold_rmse": threshold,
        "coordinate_range": coord_range,
        "median_pretrained_epochs": float(np.median([s["pretrained_epochs"] for s in subjects])),
        "median_scratch_epochs": float(np.median([s["scratch_epochs"] for s in subjects])),
        "subjects": subjects,
        "curves": curves,
    }


def write_experiment_outputs(result: dict, curves_path, summary_path) -> None:
    """JSON-lines learning curves plus the summary table file."""
    with open(curves_path, "w", encoding="utf-8") as fh:
        for record in result["curves"]:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = {k: v for k, v in result.items() if k != "curves"}
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)


def format_summary_table(result: dict) -> str:
    lines = [
        "arm         median-epochs-to-threshold",
        f"pretrained  {result['median_pretrained_epochs']:g}",
        f"scratch     {result['median_scratch_epochs']:g}",
    ]
    return "\n".join(lines)
