"""Round-by-round simulation of federated SGD in the typical cell.

A trial fixes a seed and runs N rounds.  Low mobility samples one window
realization (and, for dataset-bearing tasks, one device population) and
reuses it every round; high mobility resamples positions and devices each
round.  Fading and subcarrier hops are redrawn every round in both modes
(block fading); the freeze_fading config toggle optionally pins low-mobility
fading as well.

Per-round draw order is part of the determinism contract:

  digital/analytic-matched: [positions] -> per-device interference fields
      -> per-device gains -> gradients of decoded devices
  digital/cellular:         [positions] -> gains (all window devices)
      -> subcarriers (all window devices) -> gradients of decoded devices
  analog (either mode):     [positions] -> in-disk gains -> gradients of all
      in-disk devices (normalization oracle pass) -> interference draw
      -> collapsed interference vector

where [positions] happens only at trial start (low mobility) or every round
(high mobility).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from . import channel, geometry, learning
from .analytics import (NetworkConfig, TRUNCATION_RADIUS, activation_stats,
                        analog_eta, expected_inverse_Ne, per_round_latency,
                        successful_device_stats)
from .learning import LearningTask

SCHEMES = ("digital", "analog")
MOBILITY_MODES = ("low", "high")


@dataclass
class RoundOutcome:
    """State and bookkeeping of one communication round.

    loss/grad_norm_sq/accuracy are evaluated at the model the round STARTED
    from (the model the decoded gradients were computed at); the post-update
    state of the last round is the trial's final loss/accuracy.
    """

    n: int
    active_count: int
    effective: bool
    grad_norm_sq: float
    loss: float
    round_latency: float
    interference_power: float  # NaN for digital rounds
    accuracy: float | None = None


@dataclass
class TrialRecord:
    seed: int
    config: dict
    rounds: list[RoundOutcome]
    N_e: int
    averaged_grad_norm: float  # mean per-round ||grad F||^2 over effective rounds
    cumulative_latency: float
    final_loss: float
    final_accuracy: float | None = None

    @property
    def failed(self) -> bool:
        return self.N_e == 0


def learning_rate(cfg: NetworkConfig, task: LearningTask, scheme: str,
                  mobility: str) -> float:
    """1/(L0*sqrt(N)) at low mobility; (1/L0)*sqrt(E[1/N_e | N_e>=1]) at high,
    with the empty-round probability taken from the scheme's count law."""
    if mobility == "low":
        return 1.0 / (task.spec.L0 * math.sqrt(cfg.N))
    if scheme == "digital":
        k_bar, _, p_null, _ = successful_device_stats(cfg)
    else:
        _, k_bar_prime, _ = activation_stats(cfg)
        p_null = math.exp(-k_bar_prime)
    exact, _ = expected_inverse_Ne(p_null, cfg.N) if cfg.N >= 2 else (1.0, 1.0)
    return math.sqrt(exact) / task.spec.L0


def _config_snapshot(cfg: NetworkConfig, task: LearningTask, scheme: str,
                     mobility: str) -> dict:
    snap = cfg.to_dict()
    snap.update({"task": task.name, "task_params": task.params,
                 "scheme": scheme, "mobility": mobility})
    return snap


class _Population:
    """One sampled window: partitioned positions plus per-device task state."""

    def __init__(self, cfg: NetworkConfig, task: LearningTask,
                 rng: np.random.Generator):
        positions = geometry.sample_ppp(cfg.lambda_d, cfg.window_half_width, rng)
        grid = geometry.make_hex_grid(cfg.R, cfg.window_half_width)
        self.cell = geometry.partition_typical_cell(positions, grid)
        disk = self.cell.in_disk_devices
        self.disk_distances = np.sqrt(np.einsum("ij,ij->i", disk, disk)) \
            if len(disk) else np.zeros(0)
        self.devices = [task.new_device(rng) for _ in range(len(disk))]

    @property
    def n_disk(self) -> int:
        return len(self.devices)


def _digital_active_mask(pop: _Population, cfg: NetworkConfig,
                         rng: np.random.Generator,
                         frozen_gains: np.ndarray | None) -> np.ndarray:
    """Decoded-set mask over in-disk devices for one round."""
    if cfg.interference_mode == "analytic-matched":
        return channel.digital_success_mask(pop.disk_distances, cfg, rng,
                                            gains=frozen_gains)
    # cellular: every window device transmits on a uniform subcarrier
    all_pos = np.vstack([pop.cell.in_disk_devices,
                         pop.cell.silent_cell_devices,
                         pop.cell.interferers]) \
        if pop.n_disk else np.zeros((0, 2))
    n_all = len(all_pos)
    if n_all == 0:
        return np.zeros(0, dtype=bool)
    gains = frozen_gains if frozen_gains is not None \
        else rng.standard_exponential(n_all)
    subcarriers = rng.integers(0, cfg.M, size=n_all)
    r2 = np.einsum("ij,ij->i", all_pos, all_pos)
    powers = gains * r2 ** (-cfg.alpha / 2.0)
    totals = np.bincount(subcarriers, weights=powers, minlength=cfg.M)
    own = powers[:pop.n_disk]
    interference = totals[subcarriers[:pop.n_disk]] - own
    with np.errstate(divide="ignore"):
        sir = np.where(interference > 0.0, own / interference, np.inf)
    return sir >= cfg.theta


def _analog_interference_power(pop: _Population, cfg: NetworkConfig,
                               rng: np.random.Generator) -> float:
    """Aggregate co-channel power at the receiver for one analog round."""
    if cfg.interference_mode == "analytic-matched":
        return float(channel.shot_noise_power_batch(
            cfg.lambda_d / cfg.M, cfg.R, TRUNCATION_RADIUS, cfg.alpha, 1, rng,
            P=cfg.P)[0])
    out = pop.cell.interferers
    co_channel = out[rng.random(len(out)) < 1.0 / cfg.M] if len(out) \
        else np.zeros((0, 2))
    gains = rng.standard_exponential(len(co_channel))
    return channel.synthesize_interference_power(co_channel, gains, cfg.alpha,
                                                 cfg.P)


def run_trial(cfg: NetworkConfig, task: LearningTask, scheme: str,
              mobility: str, seed: int,
              fixed_realization: geometry.CellRealization | None = None
              ) -> TrialRecord:
    """Run one N-round trial and record its trajectory.

    fixed_realization substitutes a hand-built window for the sampled one
    (low-mobility only) so tests can pin exact device layouts.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if mobility not in MOBILITY_MODES:
        raise ValueError(f"mobility must be one of {MOBILITY_MODES}, "
                         f"got {mobility!r}")
    if fixed_realization is not None and mobility != "low":
        raise ValueError("fixed_realization requires low mobility")

    rng = np.random.default_rng(seed)
    mu = learning_rate(cfg, task, scheme, mobility)
    latency = per_round_latency(cfg, scheme)
    eta = analog_eta(cfg) if scheme == "analog" else math.nan

    pop: _Population | None = None
    if mobility == "low":
        pop = _Population(cfg, task, rng)
        if fixed_realization is not None:
            pop.cell = fixed_realization
            disk = fixed_realization.in_disk_devices
            pop.disk_distances = np.sqrt(np.einsum("ij,ij->i", disk, disk)) \
                if len(disk) else np.zeros(0)
            pop.devices = [task.new_device(rng) for _ in range(len(disk))]

    frozen_gains: np.ndarray | None = None
    if cfg.freeze_fading and mobility == "low" and pop is not None:
        if scheme == "analog" or cfg.interference_mode == "analytic-matched":
            n_frozen = pop.n_disk
        else:
            n_frozen = len(pop.cell.in_disk_devices) \
                + len(pop.cell.silent_cell_devices) + len(pop.cell.interferers)
        frozen_gains = rng.standard_exponential(n_frozen)

    w = task.w0.copy()
    rounds: list[RoundOutcome] = []
    grad_norm_acc = 0.0
    n_effective = 0

    for n in range(1, cfg.N + 1):
        if mobility == "high":
            pop = _Population(cfg, task, rng)
        loss_pre = task.loss(w)
        g_true = task.true_grad(w)
        grad_norm_sq = float(g_true @ g_true)
        acc_pre = task.accuracy(w) if task.accuracy is not None else None
        interference_power = math.nan
        active_count = 0

        if pop.n_disk > 0:
            if scheme == "digital":
                mask = _digital_active_mask(pop, cfg, rng, frozen_gains)
                active_idx = np.flatnonzero(mask)
                active_count = int(active_idx.size)
                if active_count > 0:
                    grads = [task.local_gradient(pop.devices[i], w, rng)
                             for i in active_idx]
                    g_bar = learning.aggregate_digital(grads)
                    w = learning.global_update(w, g_bar, mu)
            else:
                fading = frozen_gains if frozen_gains is not None \
                    else rng.standard_exponential(pop.n_disk)
                active_idx = np.flatnonzero(fading >= cfg.g_th)
                active_count = int(active_idx.size)
                grads = [task.local_gradient(dev, w, rng)
                         for dev in pop.devices]
                nu, sigma_tilde = learning.normalization_constants(grads)
                interference_power = _analog_interference_power(pop, cfg, rng)
                vector = channel.draw_interference_vector_collapsed(
                    interference_power, task.S, rng)
                g_bar = learning.analog_uplink(grads, active_idx, eta,
                                               cfg.g_th, fading, vector, nu,
                                               sigma_tilde)
                if g_bar is not None:
                    w = learning.global_update(w, g_bar, mu)

        effective = active_count >= 1
        if effective:
            n_effective += 1
            grad_norm_acc += grad_norm_sq
        rounds.append(RoundOutcome(
            n=n, active_count=active_count, effective=effective,
            grad_norm_sq=grad_norm_sq, loss=loss_pre, round_latency=latency,
            interference_power=interference_power, accuracy=acc_pre))

    return TrialRecord(
        seed=seed,
        config=_config_snapshot(cfg, task, scheme, mobility),
        rounds=rounds,
        N_e=n_effective,
        averaged_grad_norm=grad_norm_acc / n_effective if n_effective
        else math.nan,
        cumulative_latency=latency * cfg.N,
        final_loss=task.loss(w),
        final_accuracy=task.accuracy(w) if task.accuracy is not None else None)


# ---------------------------------------------------------------------------
# spatial experiments
# ---------------------------------------------------------------------------

def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    m = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values))) \
        if len(values) > 1 else 0.0
    return m, se


def summarize_records(cfg: NetworkConfig, records: list[TrialRecord]) -> dict:
    """Spatial (cross-trial) averages of a batch of same-config trials."""
    n_paths = len(records)
    loss = np.array([[r.loss for r in rec.rounds] for rec in records])
    loss_mean = loss.mean(axis=0)
    loss_se = loss.std(axis=0, ddof=1) / math.sqrt(n_paths) if n_paths > 1 \
        else np.zeros(loss.shape[1])
    has_acc = records[0].rounds[0].accuracy is not None
    if has_acc:
        acc = np.array([[r.accuracy for r in rec.rounds] for rec in records])
        acc_mean = acc.mean(axis=0).tolist()
        acc_se = (acc.std(axis=0, ddof=1) / math.sqrt(n_paths)).tolist() \
            if n_paths > 1 else [0.0] * acc.shape[1]
        final_acc_mean, final_acc_se = _mean_se(
            [rec.final_accuracy for rec in records])
    else:
        acc_mean = acc_se = None
        final_acc_mean = final_acc_se = None

    per_trial_active = np.array(
        [np.mean([r.active_count for r in rec.rounds]) for rec in records])
    per_trial_empty = np.array(
        [np.mean([not r.effective for r in rec.rounds]) for rec in records])
    active_mean, active_se = _mean_se(per_trial_active)
    empty_mean, empty_se = _mean_se(per_trial_empty)
    latency_mean, latency_se = _mean_se(
        [rec.cumulative_latency for rec in records])
    final_loss_mean, final_loss_se = _mean_se(
        [rec.final_loss for rec in records])

    effective_records = [rec for rec in records if rec.N_e >= 1]
    if effective_records:
        avg_norms = np.array([rec.averaged_grad_norm
                              for rec in effective_records])
        grad_mean, grad_se = _mean_se(avg_norms)
        exceed = float(np.mean(avg_norms > cfg.epsilon0))
    else:
        grad_mean = grad_se = math.nan
        exceed = math.nan

    return {
        "schema": "feelsim-summary-v1",
        "n_paths": n_paths,
        "n_rounds": cfg.N,
        "loss_mean_per_round": loss_mean.tolist(),
        "loss_se_per_round": np.asarray(loss_se).tolist(),
        "accuracy_mean_per_round": acc_mean,
        "accuracy_se_per_round": acc_se,
        "mean_active_per_round": active_mean,
        "mean_active_se": active_se,
        "empty_round_fraction": empty_mean,
        "empty_round_fraction_se": empty_se,
        "failed_trial_fraction": float(np.mean([rec.failed
                                                for rec in records])),
        "avg_grad_norm_mean": grad_mean,
        "avg_grad_norm_se": grad_se,
        "criterion_epsilon0": cfg.epsilon0,
        "criterion_exceed_prob": exceed,
        "mean_cumulative_latency": latency_mean,
        "cumulative_latency_se": latency_se,
        "final_loss_mean": final_loss_mean,
        "final_loss_se": final_loss_se,
        "final_accuracy_mean": final_acc_mean,
        "final_accuracy_se": final_acc_se,
    }


def run_spatial_experiment(cfg: NetworkConfig, task: LearningTask, scheme: str,
                           mobility: str, n_sample_paths: int,
                           seeds) -> tuple[list[TrialRecord], dict]:
    """Independent same-config trials plus their spatial summary."""
    if n_sample_paths < 1:
        raise ValueError(f"n_sample_paths must be >= 1, got {n_sample_paths}")
    seeds = list(seeds)
    if len(seeds) < n_sample_paths:
        raise ValueError(f"need at least {n_sample_paths} seeds, "
                         f"got {len(seeds)}")
    records = [run_trial(cfg, task, scheme, mobility, seed)
               for seed in seeds[:n_sample_paths]]
    return records, summarize_records(cfg, records)


# ---------------------------------------------------------------------------
# rounds-to-target search
# ---------------------------------------------------------------------------

@dataclass
class RoundsSearchResult:
    reached: bool
    rounds: int | None
    max_rounds: int
    # (N, empirical failure fraction) for every N evaluated, in search order
    history: list[tuple[int, float]] = field(default_factory=list)


def _criterion_failure_fraction(cfg: NetworkConfig, task: LearningTask,
                                scheme: str, mobility: str, n_paths: int,
                                seeds, epsilon0: float) -> float:
    """Fraction of effective trials whose averaged squared gradient norm
    exceeds epsilon0 (1.0 when no trial was effective).  The all-empty
    failure probability is handled analytically in the latency report; the
    empirical criterion is conditional on N_e >= 1, matching the summary's
    exceedance statistic."""
    records = [run_trial(cfg, task, scheme, mobility, seed)
               for seed in seeds[:n_paths]]
    effective = [rec.averaged_grad_norm for rec in records if not rec.failed]
    if not effective:
        return 1.0
    return float(np.mean(np.asarray(effective) > epsilon0))


def rounds_to_target(cfg: NetworkConfig, task: LearningTask, scheme: str,
                     mobility: str, target: tuple[float, float],
                     max_rounds: int, n_sample_paths: int = 10,
                     seeds=None) -> RoundsSearchResult:
    """Smallest round count N whose empirical spatial criterion holds.

    target = (epsilon0, delta): at most a delta fraction of sample paths may
    fail (empty trial, or averaged squared gradient norm above epsilon0).
    The trial batch is rerun per candidate N with the same seeds (the
    learning rate depends on N), using doubling to bracket and bisection to
    localize the crossing.
    """
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    epsilon0, delta = target
    if seeds is None:
        seeds = list(range(1, n_sample_paths + 1))

    def ok(n_rounds: int) -> bool:
        frac = _criterion_failure_fraction(
            replace(cfg, N=n_rounds), task, scheme, mobility,
            n_sample_paths, seeds, epsilon0)
        result.history.append((n_rounds, frac))
        return frac <= delta

    result = RoundsSearchResult(reached=False, rounds=None,
                                max_rounds=max_rounds)
    if ok(1):
        result.reached, result.rounds = True, 1
        return result
    lo, hi = 1, None
    n = 2
    while n <= max_rounds:
        if ok(n):
            hi = n
            break
        lo = n
        n *= 2
    if hi is None:
        if lo < max_rounds and ok(max_rounds):
            hi = max_rounds
            lo = max(lo, max_rounds // 2)
        else:
            return result
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    result.reached, result.rounds = True, hi
    return result
