"""SGD training of the per-value probability table.

Samples pair a complete assignment with a target probability for outcome 1.
The loss is the batch-mean squared error of the pooled estimate against the
target, plus alpha times a margin-ranking term that keeps each value's
marginal pooled probability on the side of 0.5 its support label dictates.
Parameters are plain probabilities, projected into [delta, 1 - delta] after
every step.

The heavy parts run on a flattened numpy view of the table: one parameter
vector, one row of entry indices per enumerated assignment.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .factors import (
    DEFAULT_SPACE_CAP,
    CompleteAssignment,
    FactorSpace,
    check_cap,
)
from .pool import DEFAULT_DELTA, ProbabilityTable, initial_probability


@dataclass(frozen=True)
class TrainingSample:
    """One elicited data point: a complete assignment and its target P(O1|f)."""

    assignment: CompleteAssignment
    target: float

    def __post_init__(self):
        if not 0.0 <= self.target <= 1.0:
            raise ValidationError(f"target must be in [0, 1], got {self.target}")


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-2
    epochs: int = 20
    batch_size: int = 4
    margin: float = 0.0
    alpha: float = 10.0
    sample_count: int = 128
    seed: int = 0
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.epochs <= 0 or self.batch_size <= 0 or self.sample_count <= 0:
            raise ValidationError("epochs, batch_size, sample_count must be positive")
        if self.margin < 0:
            raise ValidationError("margin must be nonnegative")
        if self.alpha < 0:
            raise ValidationError("alpha must be nonnegative")
        if not 0.0 < self.delta < 0.5:
            raise ValidationError("delta must be in (0, 0.5)")

    def to_json(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "margin": self.margin,
            "alpha": self.alpha,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "delta": self.delta,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "TrainingConfig":
        return cls(**{k: doc[k] for k in cls().to_json() if k in doc})


@dataclass(frozen=True)
class DirectionTargets:
    """Per value, the sign the trained marginal must keep: sign(P_init - 0.5)."""

    targets: Mapping[tuple[str, str], int]

    def __post_init__(self):
        if any(y not in (-1, 0, 1) for y in self.targets.values()):
            raise ValidationError("direction targets must be -1, 0, or +1")
        object.__setattr__(self, "targets", MappingProxyType(dict(self.targets)))

    @classmethod
    def from_space(cls, space: FactorSpace) -> "DirectionTargets":
        targets = {}
        for factor, value in space.value_pairs():
            p0 = initial_probability(value.support)
            targets[(factor.factor_id, value.value_id)] = (
                0 if p0 == 0.5 else (1 if p0 > 0.5 else -1)
            )
        return cls(targets=targets)

    def y(self, factor_id: str, value_id: str) -> int:
        return self.targets[(factor_id, value_id)]


@dataclass(frozen=True)
class TrainResult:
    table: ProbabilityTable
    loss_trace: tuple[float, ...]
    config: TrainingConfig


def init_table(space: FactorSpace, delta: float = DEFAULT_DELTA) -> ProbabilityTable:
    """Starting table: 0.75 / 0.5 / 0.25 by each value's support label."""
    probs = {
        (f.factor_id, v.value_id): initial_probability(v.support)
        for f, v in space.value_pairs()
    }
    return ProbabilityTable.for_space(space, probs, delta=delta)


def mse_loss(estimated: float, target: float) -> float:
    """Squared error of one estimate; batches average these."""
    if not 0.0 <= estimated <= 1.0 or not 0.0 <= target <= 1.0:
        raise ValidationError("mse_loss arguments must be probabilities")
    return (target - estimated) ** 2


class _Vectorized:
    """Flat numpy view of a space: entry indexing and pooled probabilities.

    Entry k corresponds to the k-th (factor, value) pair in space order.
    rows holds, per enumerated assignment, the entry index chosen for each
    factor; value_rows[k] lists the assignment rows in which entry k occurs.
    """

    def __init__(self, space: FactorSpace, cap: int = DEFAULT_SPACE_CAP):
        check_cap(space, cap)
        self.space = space
        self.keys: list[tuple[str, str]] = [
            (f.factor_id, v.value_id) for f, v in space.value_pairs()
        ]
        self.key_index = {key: k for k, key in enumerate(self.keys)}
        offsets = []
        total = 0
        for factor in space.factors:
            offsets.append(total)
            total += factor.cardinality
        self.offsets = offsets
        self.n_factors = len(space.factors)
        cards = [factor.cardinality for factor in space.factors]
        grids = np.indices(cards).reshape(self.n_factors, -1).T
        self.rows = grids + np.asarray(offsets)
        self.value_rows: list[np.ndarray] = [
            np.nonzero(self.rows[:, self._factor_of(k)] == k)[0]
            for k in range(len(self.keys))
        ]

    def _factor_of(self, entry: int) -> int:
        position = 0
        for j, offset in enumerate(self.offsets):
            if entry >= offset:
                position = j
        return position

    def theta(self, table: ProbabilityTable) -> np.ndarray:
        return np.array([table.probs[key] for key in self.keys], dtype=float)

    def table(self, theta: np.ndarray, like: ProbabilityTable) -> ProbabilityTable:
        probs = {key: float(p) for key, p in zip(self.keys, theta)}
        return ProbabilityTable(probs=probs, supports=like.supports, delta=like.delta)

    def sample_rows(self, samples: Sequence[TrainingSample]) -> np.ndarray:
        rows = np.empty((len(samples), self.n_factors), dtype=int)
        for i, sample in enumerate(samples):
            sample.assignment.validate(self.space)
            rows[i] = [
                self.offsets[j] + idx for j, idx in enumerate(sample.assignment.indices)
            ]
        return rows

    @staticmethod
    def pools(theta: np.ndarray, rows: np.ndarray) -> np.ndarray:
        logits = np.log(theta) - np.log1p(-theta)
        score = logits[rows].sum(axis=1)
        out = np.empty_like(score)
        pos = score >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-score[pos]))
        exp = np.exp(score[~pos])
        out[~pos] = exp / (1.0 + exp)
        return out


def trained_marginal(
    table: ProbabilityTable,
    space: FactorSpace,
    factor_id: str,
    value_id: str,
    *,
    cap: int = DEFAULT_SPACE_CAP,
) -> float:
    """Mean pooled P(O1|f) over every completion that fixes the given value.

    A single-factor space has exactly one such completion, so the marginal
    is the table entry itself.
    """
    table.validate_covers(space)
    vec = _Vectorized(space, cap)
    entry = vec.key_index[(factor_id, value_id)]
    rows = vec.rows[vec.value_rows[entry]]
    pooled = vec.pools(vec.theta(table), rows)
    return float(pooled.mean())


def margin_loss(
    table: ProbabilityTable,
    space: FactorSpace,
    directions: DirectionTargets,
    margin: float = 0.0,
    *,
    cap: int = DEFAULT_SPACE_CAP,
) -> float:
    """Hinge penalty on each value's trained marginal leaving its side of 0.5.

    Per value: max(0, -y * (P_trained - 0.5) + margin). Averaged over the
    values of each factor, then over factors.
    """
    table.validate_covers(space)
    vec = _Vectorized(space, cap)
    theta = vec.theta(table)
    pooled = vec.pools(theta, vec.rows)
    total = 0.0
    for factor in space.factors:
        acc = 0.0
        for value in factor.values:
            entry = vec.key_index[(factor.factor_id, value.value_id)]
            p_tr = pooled[vec.value_rows[entry]].mean()
            y = directions.y(factor.factor_id, value.value_id)
            acc += max(0.0, -y * (p_tr - 0.5) + margin)
        total += acc / factor.cardinality
    return total / len(space.factors)


def total_loss(
    table: ProbabilityTable,
    batch: Sequence[TrainingSample],
    space: FactorSpace,
    directions: DirectionTargets,
    config: TrainingConfig,
) -> float:
    """Batch-mean squared error plus alpha times the margin penalty."""
    if not batch:
        raise ValidationError("batch must be non-empty")
    vec = _Vectorized(space)
    theta = vec.theta(table)
    estimates = vec.pools(theta, vec.sample_rows(batch))
    targets = np.array([s.target for s in batch])
    mse = float(np.mean((targets - estimates) ** 2))
    return mse + config.alpha * margin_loss(
        table, space, directions, config.margin
    )


def _gradient_vector(
    vec: _Vectorized,
    theta: np.ndarray,
    batch_rows: np.ndarray,
    targets: np.ndarray,
    directions: DirectionTargets,
    config: TrainingConfig,
) -> np.ndarray:
    """Analytic partials of total_loss with respect to every table entry.

    dP/dp_k for an assignment containing entry k is P(1-P)/(p_k(1-p_k));
    entries absent from a sample get no MSE gradient. The margin term is
    active (and differentiable) only where its hinge is strictly positive.
    """
    grad = np.zeros_like(theta)
    denom = theta * (1.0 - theta)

    estimates = vec.pools(theta, batch_rows)
    coeff = (-2.0 / len(targets)) * (targets - estimates) * estimates * (1.0 - estimates)
    np.add.at(grad, batch_rows.ravel(), (coeff[:, None] / denom[batch_rows]).ravel())

    if config.alpha > 0:
        pooled = vec.pools(theta, vec.rows)
        pool_slope = pooled * (1.0 - pooled)
        n_factors = len(vec.space.factors)
        for factor in vec.space.factors:
            for value in factor.values:
                y = directions.y(factor.factor_id, value.value_id)
                if y == 0:
                    continue
                entry = vec.key_index[(factor.factor_id, value.value_id)]
                row_ids = vec.value_rows[entry]
                p_tr = pooled[row_ids].mean()
                if -y * (p_tr - 0.5) + config.margin <= 0:
                    continue
                c = (
                    config.alpha
                    * (-y)
                    / (n_factors * factor.cardinality * len(row_ids))
                )
                rows = vec.rows[row_ids]
                contrib = c * pool_slope[row_ids][:, None] / denom[rows]
                np.add.at(grad, rows.ravel(), contrib.ravel())
    return grad


def gradients(
    table: ProbabilityTable,
    batch: Sequence[TrainingSample],
    space: FactorSpace,
    directions: DirectionTargets,
    config: TrainingConfig,
) -> dict[tuple[str, str], float]:
    """total_loss partials keyed by (factor_id, value_id)."""
    if not batch:
        raise ValidationError("batch must be non-empty")
    vec = _Vectorized(space)
    theta = vec.theta(table)
    grad = _gradient_vector(
        vec,
        theta,
        vec.sample_rows(batch),
        np.array([s.target for s in batch]),
        directions,
        config,
    )
    return {key: float(g) for key, g in zip(vec.keys, grad)}


def train(
    space: FactorSpace,
    samples: Sequence[TrainingSample],
    config: TrainingConfig = TrainingConfig(),
) -> TrainResult:
    """Mini-batch SGD from the support-label starting table.

    Batch order is reshuffled every epoch from the config seed, parameters
    are projected into [delta, 1 - delta] after each step, and the trace
    records the full-sample loss after every epoch. Identical inputs give
    an identical result.
    """
    if not samples:
        raise ValidationError("training needs at least one sample")
    vec = _Vectorized(space)
    start = init_table(space, delta=config.delta)
    theta = vec.theta(start)
    all_rows = vec.sample_rows(samples)
    all_targets = np.array([s.target for s in samples])
    directions = DirectionTargets.from_space(space)
    rng = random.Random(config.seed)
    order = list(range(len(samples)))

    def full_loss(current: np.ndarray) -> float:
        estimates = vec.pools(current, all_rows)
        mse = float(np.mean((all_targets - estimates) ** 2))
        return mse + config.alpha * margin_loss(
            vec.table(current, start), space, directions, config.margin
        )

    trace: list[float] = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        for lo in range(0, len(order), config.batch_size):
            chunk = order[lo : lo + config.batch_size]
            grad = _gradient_vector(
                vec,
                theta,
                all_rows[chunk],
                all_targets[chunk],
                directions,
                config,
            )
            theta = np.clip(
                theta - config.learning_rate * grad, config.delta, 1.0 - config.delta
            )
        trace.append(full_loss(theta))

    return TrainResult(
        table=vec.table(theta, start), loss_trace=tuple(trace), config=config
    )
