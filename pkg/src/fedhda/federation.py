"""Round-robin federated loop over a noisy transmission scheme.

Each learner turn is: download the global model, train locally, upload
the difference against the copy of the global model the learner actually
holds, and apply it to the global model scaled by the aggregation
learning rate. A failed download leaves the learner on its previous
parameters; a failed upload leaves the global model untouched. Every
transmission and evaluation is logged as a RoundRecord.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models, phy, schemes


@dataclass
class RoundRecord:
    """One CSV row: a transmission (or the initial evaluation)."""

    scheme: str
    seed: int
    round: int
    learner: int
    direction: str  # "down" | "up" | "init"
    snr_db: float
    budget: int
    success: bool
    symbols_used: int
    mse: float
    acc_global: float
    acc_local_mean: float

    CSV_FIELDS = (
        "scheme",
        "seed",
        "round",
        "learner",
        "direction",
        "snr_db",
        "budget",
        "success",
        "symbols_used",
        "mse",
        "acc_global",
        "acc_local_mean",
    )

    def csv_row(self) -> list[str]:
        return [
            self.scheme,
            str(self.seed),
            str(self.round),
            str(self.learner),
            self.direction,
            f"{self.snr_db:.10g}",
            str(self.budget),
            "1" if self.success else "0",
            str(self.symbols_used),
            f"{self.mse:.10g}",
            f"{self.acc_global:.10g}",
            f"{self.acc_local_mean:.10g}",
        ]


@dataclass
class LearnerState:
    """A learner's shard plus its view of the model."""

    shard: models.DataShard
    params: models.ParameterVector  # latest local parameters
    reference: models.ParameterVector  # the global copy differences are taken against


@dataclass
class FederationState:
    """Global model, learner states, and the aggregation learning rate."""

    global_params: models.ParameterVector
    learners: list[LearnerState]
    agg_lr: float = 1.0
    round: int = 0

    @property
    def n_learners(self) -> int:
        return len(self.learners)


def init_federation(
    arch: models.ModelArch,
    dataset: models.DataShard,
    n_learners: int,
    seed: int,
    agg_lr: float = 1.0,
) -> FederationState:
    """Build the initial global model and hand every learner its shard."""
    global_params = models.build_model(arch, seed)
    shards = models.partition_dataset(dataset, n_learners, seed)
    learners = [
        LearnerState(shard=s, params=global_params.copy(), reference=global_params.copy())
        for s in shards
    ]
    return FederationState(global_params=global_params, learners=learners, agg_lr=agg_lr)


def aggregate(
    w_global: models.ParameterVector, d_hat: np.ndarray, agg_lr: float
) -> models.ParameterVector:
    """Global update w_G + l_r * d_hat, stored back at float32."""
    if not 0.0 < agg_lr <= 1.0:
        raise ValueError("aggregation learning rate must be in (0, 1]")
    d_hat = np.asarray(d_hat)
    if d_hat.shape != w_global.values.shape:
        raise ValueError(
            f"difference length {d_hat.shape} does not match model {w_global.values.shape}"
        )
    updated = (w_global.values.astype(np.float64) + agg_lr * d_hat).astype(np.float32)
    return models.ParameterVector(updated, w_global.manifest)


def _channel(
    exp_seed: int,
    round_idx: int,
    learner: int,
    direction: int,
    snr_db: float,
    p_total: float,
    fading_std_db: float = 0.0,
) -> phy.ChannelConfig:
    # disjoint, reproducible noise stream per transmission
    cfg = phy.ChannelConfig.for_power(
        p_total, snr_db, seed=(exp_seed, round_idx, learner, direction)
    )
    if fading_std_db > 0.0:
        # instantaneous fading folded into the effective noise power
        rng = np.random.default_rng((exp_seed, round_idx, learner, direction, 77))
        scale = 10.0 ** (rng.normal(0.0, fading_std_db) / 10.0)
        cfg = phy.ChannelConfig(
            snr_db=cfg.snr_db, seed=cfg.seed, sigma2=cfg.sigma2 * scale
        )
    return cfg


class AccuracyTracker:
    """Caches per-model test accuracy; only re-evaluates what changed.

    One learner turn touches at most one learner's parameters and the
    global model, so tracking beats re-evaluating every learner on every
    record. Values are identical to fresh evaluation.
    """

    def __init__(self, test_set: models.DataShard, state: FederationState):
        self.test_set = test_set
        self.acc_global = models.evaluate(state.global_params, test_set)
        first = state.learners[0].params.values
        acc0 = models.evaluate(state.learners[0].params, test_set)
        self.acc_local = [acc0]
        for ls in state.learners[1:]:
            # learners usually all start from the same init
            if np.array_equal(ls.params.values, first):
                self.acc_local.append(acc0)
            else:
                self.acc_local.append(models.evaluate(ls.params, test_set))

    def refresh_learner(self, state: FederationState, idx: int) -> None:
        self.acc_local[idx] = models.evaluate(state.learners[idx].params, self.test_set)

    def refresh_global(self, state: FederationState) -> None:
        self.acc_global = models.evaluate(state.global_params, self.test_set)

    @property
    def acc_local_mean(self) -> float:
        return float(np.mean(self.acc_local))


def run_round(
    state: FederationState,
    learner_idx: int,
    scheme_cfg: schemes.SchemeConfig,
    snr_db: float,
    train_cfg: models.TrainConfig,
    epochs: int,
    test_set: models.DataShard,
    exp_seed: int,
    round_idx: int,
    tracker: AccuracyTracker | None = None,
    fading_std_db: float = 0.0,
) -> list[RoundRecord]:
    """One learner turn: download, train, upload-difference, aggregate.

    round_idx is the round-robin pass number (1-based); it only labels
    records and seeds, the state carries everything else.
    """
    if not 0 <= learner_idx < state.n_learners:
        raise ValueError(f"learner index {learner_idx} out of range")
    if round_idx < state.round:
        raise ValueError("round counter must be non-decreasing")
    state.round = round_idx
    rnd = round_idx
    learner = state.learners[learner_idx]
    if tracker is None:
        tracker = AccuracyTracker(test_set, state)
    records = []

    def snapshot(mse: float, success: bool, symbols: int, direction: str) -> RoundRecord:
        return RoundRecord(
            scheme=scheme_cfg.kind,
            seed=exp_seed,
            round=rnd,
            learner=learner_idx,
            direction=direction,
            snr_db=snr_db,
            budget=scheme_cfg.symbol_budget,
            success=success,
            symbols_used=symbols,
            mse=mse,
            acc_global=tracker.acc_global,
            acc_local_mean=tracker.acc_local_mean,
        )

    # downlink: full global parameters
    ch = _channel(exp_seed, rnd, learner_idx, 0, snr_db, scheme_cfg.p_total, fading_std_db)
    received, rep_down = schemes.transmit(
        state.global_params.values.astype(np.float64), scheme_cfg, ch
    )
    if received is not None:
        synced = models.ParameterVector(
            received.astype(np.float32), state.global_params.manifest
        )
        learner.params = synced
        learner.reference = synced.copy()
        tracker.refresh_learner(state, learner_idx)
    records.append(snapshot(rep_down.mse, rep_down.success, rep_down.symbols_used, "down"))

    # local training from whatever the learner holds
    trained = models.local_train(
        learner.params,
        learner.shard,
        epochs,
        train_cfg,
        seed=(exp_seed, rnd, learner_idx),
    )
    learner.params = trained
    tracker.refresh_learner(state, learner_idx)

    # uplink: difference against the learner's reference copy
    d = trained.values.astype(np.float64) - learner.reference.values.astype(np.float64)
    ch = _channel(exp_seed, rnd, learner_idx, 1, snr_db, scheme_cfg.p_total, fading_std_db)
    d_hat, rep_up = schemes.transmit(d, scheme_cfg, ch)
    if d_hat is not None:
        state.global_params = aggregate(state.global_params, d_hat, state.agg_lr)
        tracker.refresh_global(state)
    records.append(snapshot(rep_up.mse, rep_up.success, rep_up.symbols_used, "up"))
    return records


@dataclass
class ExperimentPoint:
    """One (scheme, snr, budget, seed) cell of a sweep."""

    scheme_cfg: schemes.SchemeConfig
    snr_db: float
    seed: int
    arch: models.ModelArch
    train_set: models.DataShard
    test_set: models.DataShard
    n_learners: int = 10
    rounds: int = 10
    epochs: int = 10
    train_cfg: models.TrainConfig = field(default_factory=models.TrainConfig)
    agg_lr: float = 1.0
    fading_std_db: float = 0.0


def run_experiment(point: ExperimentPoint) -> list[RoundRecord]:
    """Round-robin rounds x learners; fully deterministic given the seed."""
    state = init_federation(
        point.arch, point.train_set, point.n_learners, point.seed, point.agg_lr
    )
    tracker = AccuracyTracker(point.test_set, state)
    acc0 = tracker.acc_global
    records = [
        RoundRecord(
            scheme=point.scheme_cfg.kind,
            seed=point.seed,
            round=0,
            learner=-1,
            direction="init",
            snr_db=point.snr_db,
            budget=point.scheme_cfg.symbol_budget,
            success=True,
            symbols_used=0,
            mse=0.0,
            acc_global=acc0,
            acc_local_mean=acc0,
        )
    ]
    for round_idx in range(1, point.rounds + 1):
        for learner_idx in range(point.n_learners):
            records.extend(
                run_round(
                    state,
                    learner_idx,
                    point.scheme_cfg,
                    point.snr_db,
                    point.train_cfg,
                    point.epochs,
                    point.test_set,
                    point.seed,
                    round_idx,
                    tracker,
                    point.fading_std_db,
                )
            )
    return records
