"""Monte Carlo / oracle validation registry binding closed forms to evidence.

Every closed-form quantity in the analytics module has at least one check
here; CHECK_COVERAGE maps analytics operations to the checks that exercise
them, and a meta-test asserts the mapping stays complete.  Checks are sized
to finish in under a minute each on one core.

Tolerances follow the house rule max(3 standard errors, stated relative
floor); bound checks are one-sided inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special as sp_special
from scipy import stats as sp_stats

from . import channel, learning, simulator
from .analytics import (EULER_GAMMA, NetworkConfig, TRUNCATION_RADIUS,
                        TaskSpec, activation_stats, analog_bound, analog_eta,
                        beta_fn, campbell_interference_moment, digital_bound,
                        exp_integral_Ei, expected_inverse_K,
                        expected_inverse_Ne, high_mobility_bound,
                        interference_effect, latency_ratio_high_to_low,
                        latency_report, per_round_latency,
                        success_probability, successful_device_stats,
                        InfeasibleCriterionError)


@dataclass
class CheckRecord:
    name: str
    analytic: float
    empirical: float
    tolerance: float
    passed: bool
    n_samples: int
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "analytic": self.analytic,
                "empirical": self.empirical, "tolerance": self.tolerance,
                "passed": bool(self.passed), "n_samples": self.n_samples,
                "detail": self.detail}


# the quadratic validation task: noise level 4*(F0 - F*) keeps the
# bound-vs-empirical margins wide (the noise-dominated regime the
# convergence analysis is sharpest in)
_VAL_TASK_S = 8
_VAL_TASK = dict(S=_VAL_TASK_S, L0=1.0, sigma2=2.0)
# moderate decoded-count means: empty rounds rare, counts well spread
_VAL_DIGITAL = dict(lambda_d=5.0, M=4, theta=0.5, alpha=4.0, R=1.0)
_VAL_ANALOG = dict(lambda_d=3.0, M=1, g_th=1.0, alpha=4.0, R=1.0, S=_VAL_TASK_S)


def _rel_check(name: str, analytic: float, empirical: float, se: float,
               rel_floor: float, n: int, detail: str = "") -> CheckRecord:
    tol = max(3.0 * se, rel_floor * abs(analytic))
    return CheckRecord(name=name, analytic=analytic, empirical=empirical,
                       tolerance=tol, passed=abs(empirical - analytic) <= tol,
                       n_samples=n, detail=detail)


def check_special_functions(cfg: NetworkConfig, rng: np.random.Generator,
                            n: int | None = None) -> CheckRecord:
    """Ei and Beta against the scipy implementations (independent oracle)."""
    xs = [-30.0, -5.0, -1.0, -0.1, 0.25, 1.0, 5.0, 19.5, 40.0, 80.0, 300.0]
    worst = 0.0
    for x in xs:
        ref = float(sp_special.expi(x))
        worst = max(worst, abs(exp_integral_Ei(x) - ref) / abs(ref))
    pairs = [(0.5, 0.5), (2.0 / 4.0, 1.0 - 2.0 / 4.0), (0.7, 0.3), (2.0, 3.0)]
    for a, b in pairs:
        ref = float(sp_special.beta(a, b))
        worst = max(worst, abs(beta_fn(a, b) - ref) / abs(ref))
    return CheckRecord(name="special_functions", analytic=0.0, empirical=worst,
                       tolerance=1e-10, passed=worst <= 1e-10,
                       n_samples=len(xs) + len(pairs),
                       detail="max relative error vs scipy expi/beta")


def check_uplink_success_probability(cfg: NetworkConfig,
                                     rng: np.random.Generator,
                                     n: int | None = None) -> CheckRecord:
    n = n or 100_000
    p_s, _ = success_probability(cfg)
    p_hat, se = channel.simulate_success_probability(cfg, n, rng)
    return _rel_check("uplink_success_probability", p_s, p_hat, se, 0.03, n,
                      detail=f"lambda_d={cfg.lambda_d} M={cfg.M} "
                             f"theta={cfg.theta} alpha={cfg.alpha}")


def _decoded_counts(cfg: NetworkConfig, rng: np.random.Generator,
                    n: int) -> np.ndarray:
    """Per-round decoded device counts from fresh disk populations."""
    mean_dev = math.pi * cfg.lambda_d * cfg.R * cfg.R
    n_devices = rng.poisson(mean_dev, size=n)
    counts = np.zeros(n, dtype=int)
    for i, nd in enumerate(n_devices):
        if nd == 0:
            continue
        distances = cfg.R * np.sqrt(rng.random(nd))
        counts[i] = int(channel.digital_success_mask(distances, cfg,
                                                     rng).sum())
    return counts


def _poisson_gof_pvalue(counts: np.ndarray, mean: float) -> tuple[float, int]:
    """Chi-square goodness of fit against Poisson(mean), tail-pooled so
    every expected bin count is at least 5."""
    n = len(counts)
    k_hi = int(max(counts.max(), math.ceil(mean + 6 * math.sqrt(mean + 1))))
    probs = sp_stats.poisson.pmf(np.arange(k_hi + 1), mean)
    probs = np.append(probs, max(1.0 - probs.sum(), 0.0))
    observed = np.bincount(counts, minlength=k_hi + 2)[:k_hi + 2].astype(float)
    expected = n * probs
    # pool bins upward until each expected count reaches 5
    obs_p, exp_p = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_p.append(acc_o)
            exp_p.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        if exp_p:
            obs_p[-1] += acc_o
            exp_p[-1] += acc_e
        else:
            obs_p, exp_p = [acc_o], [acc_e]
    obs_p, exp_p = np.asarray(obs_p), np.asarray(exp_p)
    exp_p *= obs_p.sum() / exp_p.sum()
    if len(obs_p) < 2:
        return 1.0, len(obs_p)
    stat = float(np.sum((obs_p - exp_p) ** 2 / exp_p))
    dof = len(obs_p) - 1
    return float(sp_stats.chi2.sf(stat, dof)), dof


def check_decoded_count_pmf(cfg: NetworkConfig,
                            rng: np.random.Generator,
                            n: int | None = None) -> CheckRecord:
    n = n or 10_000
    k_bar, _, _, _ = successful_device_stats(cfg)
    counts = _decoded_counts(cfg, rng, n)
    pvalue, dof = _poisson_gof_pvalue(counts, k_bar)
    return CheckRecord(name="decoded_count_pmf", analytic=k_bar,
                       empirical=float(counts.mean()), tolerance=0.01,
                       passed=pvalue >= 0.01, n_samples=n,
                       detail=f"chi-square p={pvalue:.4f} dof={dof} "
                              f"vs Poisson(K_bar)")


def check_decoded_count_limit(cfg: NetworkConfig, rng: np.random.Generator,
                              n: int | None = None) -> CheckRecord:
    dense = replace(cfg, lambda_d=1000.0)
    k_bar, _, _, k_limit = successful_device_stats(dense)
    rel = abs(k_bar - k_limit) / k_limit
    return CheckRecord(name="decoded_count_limit", analytic=k_limit,
                       empirical=k_bar, tolerance=0.01 * k_limit,
                       passed=rel <= 0.01, n_samples=1,
                       detail="K_bar at lambda_d=1000 vs density->inf limit")


def check_activation_count_pmf(cfg: NetworkConfig, rng: np.random.Generator,
                               n: int | None = None) -> CheckRecord:
    n = n or 10_000
    acfg = replace(cfg, **{k: v for k, v in _VAL_ANALOG.items()
                           if k not in ("S",)})
    p_a, k_bar_prime, _ = activation_stats(acfg)
    mean_dev = math.pi * acfg.lambda_d * acfg.R * acfg.R
    n_devices = rng.poisson(mean_dev, size=n)
    counts = np.array([int((rng.standard_exponential(nd) >= acfg.g_th).sum())
                       if nd else 0 for nd in n_devices])
    pvalue, dof = _poisson_gof_pvalue(counts, k_bar_prime)
    return CheckRecord(name="activation_count_pmf", analytic=k_bar_prime,
                       empirical=float(counts.mean()), tolerance=0.01,
                       passed=pvalue >= 0.01, n_samples=n,
                       detail=f"chi-square p={pvalue:.4f} dof={dof} "
                              f"vs Poisson(K_bar'), p_a={p_a:.6f}")


def _inverse_mean_oracle(k_bar: float, terms: int = 2000) -> float:
    """Truncated-Poisson sum for E[1/K | K > 0] evaluated term by term."""
    total = 0.0
    log_k = math.log(k_bar)
    for j in range(1, terms + 1):
        total += math.exp(-k_bar + j * log_k - math.lgamma(j + 1)) / j
    return total / -math.expm1(-k_bar)


def check_inverse_decoded_mean_identity(cfg: NetworkConfig,
                                        rng: np.random.Generator,
                                        n: int | None = None) -> CheckRecord:
    grid = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
    worst = max(abs(expected_inverse_K(k) - _inverse_mean_oracle(k))
                for k in grid)
    return CheckRecord(name="inverse_decoded_count_mean", analytic=0.0,
                       empirical=worst, tolerance=1e-10,
                       passed=worst <= 1e-10, n_samples=len(grid),
                       detail="closed form vs truncated-sum oracle")


def _inverse_ne_binomial_oracle(p: float, N: int) -> float:
    """E[1/N_e | N_e >= 1] averaged over the binomial law of N_e directly."""
    total = norm = 0.0
    for k in range(1, N + 1):
        pk = math.exp(math.lgamma(N + 1) - math.lgamma(k + 1)
                      - math.lgamma(N - k + 1)
                      + k * math.log1p(-p) + (N - k) * math.log(p))
        total += pk / k
        norm += pk
    return total / norm


def check_effective_rounds_oracles(cfg: NetworkConfig,
                                   rng: np.random.Generator,
                                   n: int | None = None) -> CheckRecord:
    worst_pair = 0.0
    worst_exp_ratio = 0.0
    grid_p = [0.01, 0.05, 0.1, 0.2]
    grid_n = [5, 10, 25, 50]
    for p in grid_p:
        for N in grid_n:
            exact, expansion = expected_inverse_Ne(p, N)
            worst_pair = max(worst_pair,
                             abs(exact - _inverse_ne_binomial_oracle(p, N)))
            worst_exp_ratio = max(worst_exp_ratio,
                                  abs(exact - expansion) / p ** 2)
    c_bound = 2.0 / (min(grid_n) - 2)
    passed = worst_pair <= 1e-12 and worst_exp_ratio <= c_bound
    return CheckRecord(name="effective_rounds_inverse_moment",
                       analytic=0.0, empirical=worst_pair, tolerance=1e-12,
                       passed=passed, n_samples=len(grid_p) * len(grid_n),
                       detail=f"max |exact-binomial|={worst_pair:.2e}; "
                              f"max |err|/p^2={worst_exp_ratio:.4f} "
                              f"<= {c_bound:.4f}")


def check_interference_moment_mc(cfg: NetworkConfig, rng: np.random.Generator,
                                 n: int | None = None) -> CheckRecord:
    n = n or 100_000
    moment = campbell_interference_moment(cfg)
    draws = channel.shot_noise_power_batch(cfg.lambda_d / cfg.M, cfg.R,
                                           TRUNCATION_RADIUS, cfg.alpha, n,
                                           rng, P=cfg.P)
    se = float(draws.std(ddof=1) / math.sqrt(n))
    return _rel_check("interference_second_moment", moment,
                      float(draws.mean()), se, 0.03, n,
                      detail="mean aggregate co-channel power, annulus field")


def check_mean_transmit_power(cfg: NetworkConfig,
                              rng: np.random.Generator,
                              n: int | None = None) -> CheckRecord:
    n = n or 1_000_000
    eta = analog_eta(cfg)
    r = cfg.R * np.sqrt(rng.random(n))
    g = rng.standard_exponential(n)
    p_x = np.where(g >= cfg.g_th, eta * r ** cfg.alpha / np.where(g > 0, g, 1),
                   0.0)
    se = float(p_x.std(ddof=1) / math.sqrt(n))
    return _rel_check("mean_transmit_power", cfg.P,
                      float(p_x.mean()), se, 0.02, n,
                      detail=f"eta={eta:.6f}, truncated channel inversion")


def check_digital_aggregate_variance(cfg: NetworkConfig,
                                     rng: np.random.Generator,
                                     n: int | None = None) -> CheckRecord:
    n = n or 10_000
    task = learning.make_quadratic_task(**_VAL_TASK)
    k = 4
    w = task.w0
    grad = task.true_grad(w)
    sq = np.empty(n)
    for i in range(n):
        g_bar = learning.aggregate_digital(
            [task.local_gradient(None, w, rng) for _ in range(k)])
        d = g_bar - grad
        sq[i] = d @ d
    target = task.spec.sigma2 / k
    se = float(sq.std(ddof=1) / math.sqrt(n))
    return _rel_check("digital_aggregate_variance", target, float(sq.mean()),
                      se, 0.05, n, detail=f"K={k} aggregated noisy gradients")


def _analog_fixed_k_samples(rng: np.random.Generator, n: int, k: int,
                            offset: float = 1.0):
    """n analog aggregations with K active devices at a fixed model point.

    The model point has identical gradient coefficients, so the population
    normalization constants are exact: nu = common coefficient,. sigma_tilde
    = sqrt(sigma2/S).  Returns (samples (n,S), true gradient, cfg, eta)."""
    task = learning.make_quadratic_task(**_VAL_TASK)
    cfg = NetworkConfig(**_VAL_ANALOG)
    eta = analog_eta(cfg)
    s_dim = task.S
    w = task.w0 * 0.0 + offset * np.ones(s_dim) / math.sqrt(s_dim)
    grad = task.true_grad(w)
    nu = float(grad[0])
    sigma_tilde = math.sqrt(task.spec.sigma2 / s_dim)
    out = np.empty((n, s_dim))
    for i in range(n):
        grads = [task.local_gradient(None, w, rng) for _ in range(k)]
        fading = cfg.g_th + rng.standard_exponential(k)
        power = float(channel.shot_noise_power_batch(
            cfg.lambda_d / cfg.M, cfg.R, TRUNCATION_RADIUS, cfg.alpha, 1, rng,
            P=cfg.P)[0])
        vec = channel.draw_interference_vector_collapsed(power, s_dim, rng)
        out[i] = learning.analog_uplink(grads, np.arange(k), eta, cfg.g_th,
                                        fading, vec, nu, sigma_tilde)
    return out, grad, cfg, eta, sigma_tilde, task


def check_digital_unbiasedness(cfg: NetworkConfig,
                               rng: np.random.Generator,
                               n: int | None = None) -> CheckRecord:
    n = n or 10_000
    task = learning.make_quadratic_task(**_VAL_TASK)
    k = 3
    w = task.w0
    grad = task.true_grad(w)
    agg = np.empty((n, task.S))
    for i in range(n):
        agg[i] = learning.aggregate_digital(
            [task.local_gradient(None, w, rng) for _ in range(k)])
    se = agg.std(axis=0, ddof=1) / math.sqrt(n)
    z = np.abs(agg.mean(axis=0) - grad) / se
    worst = float(z.max())
    return CheckRecord(name="digital_aggregate_unbiasedness", analytic=0.0,
                       empirical=worst, tolerance=3.0, passed=worst <= 3.0,
                       n_samples=n,
                       detail="max per-coefficient |z| of aggregate mean")


def check_analog_unbiasedness(cfg: NetworkConfig,
                              rng: np.random.Generator,
                              n: int | None = None) -> CheckRecord:
    n = n or 10_000
    samples, grad, _, _, _, _ = _analog_fixed_k_samples(rng, n, k=3)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    z = np.abs(samples.mean(axis=0) - grad) / se
    worst = float(z.max())
    return CheckRecord(name="analog_aggregate_unbiasedness", analytic=0.0,
                       empirical=worst, tolerance=3.0, passed=worst <= 3.0,
                       n_samples=n,
                       detail="max per-coefficient |z| with interference")


def check_analog_variance_bound(cfg: NetworkConfig, rng: np.random.Generator,
                                n: int | None = None) -> CheckRecord:
    n = n or 10_000
    k = 3
    samples, grad, acfg, eta, sigma_tilde, task = _analog_fixed_k_samples(
        rng, n, k=k)
    sq = np.sum((samples - grad) ** 2, axis=1)
    mse = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(n))
    bound = (sigma_tilde ** 2 * task.S * campbell_interference_moment(acfg)
             / (eta * k * k)) + task.spec.sigma2 / k
    passed = mse <= bound + max(3.0 * se, 0.05 * bound)
    return CheckRecord(name="analog_aggregate_variance_bound", analytic=bound,
                       empirical=mse, tolerance=max(3.0 * se, 0.05 * bound),
                       passed=passed, n_samples=n,
                       detail=f"K={k}; inequality (upper bound)")


def _bound_check(name: str, cfg: NetworkConfig, scheme: str, mobility: str,
                 bound_fn, rng: np.random.Generator, n_trials: int,
                 n_rounds: int) -> CheckRecord:
    task = learning.make_quadratic_task(**_VAL_TASK)
    run_cfg = replace(cfg, N=n_rounds)
    seeds = rng.integers(0, 2 ** 31, size=n_trials)
    vals = []
    for seed in seeds:
        rec = simulator.run_trial(run_cfg, task, scheme, mobility, int(seed))
        if not rec.failed:
            vals.append(rec.averaged_grad_norm)
    vals = np.asarray(vals)
    bound = bound_fn(run_cfg, task.spec, n_rounds)
    emp = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(len(vals)))
    return CheckRecord(name=name, analytic=bound, empirical=emp,
                       tolerance=0.0, passed=emp <= bound,
                       n_samples=len(vals),
                       detail=f"one-sided, N={n_rounds}, mean +- {se:.5f}")


def check_digital_low_bound(cfg: NetworkConfig, rng: np.random.Generator,
                            n: int | None = None) -> CheckRecord:
    return _bound_check("digital_low_mobility_bound",
                        NetworkConfig(**_VAL_DIGITAL), "digital", "low",
                        digital_bound, rng, n or 200, 100)


def check_digital_high_bound(cfg: NetworkConfig, rng: np.random.Generator,
                             n: int | None = None) -> CheckRecord:
    return _bound_check("digital_high_mobility_bound",
                        NetworkConfig(**_VAL_DIGITAL), "digital", "high",
                        high_mobility_bound, rng, n or 200, 100)


def check_analog_low_bound(cfg: NetworkConfig, rng: np.random.Generator,
                           n: int | None = None) -> CheckRecord:
    return _bound_check("analog_low_mobility_bound",
                        NetworkConfig(**_VAL_ANALOG), "analog", "low",
                        analog_bound, rng, n or 200, 100)


def check_interference_effect_consistency(cfg: NetworkConfig,
                                          rng: np.random.Generator,
                                          n: int | None = None) -> CheckRecord:
    """The slowdown ratio must match the bound ratio assembled from its
    independently computed pieces (bound with vs without interference)."""
    acfg = NetworkConfig(**_VAL_ANALOG)
    task = TaskSpec(F0=0.5, F_star=0.0, L0=1.0, sigma2=2.0,
                    sigma_tilde2=2.0 / _VAL_TASK_S)
    ratio = interference_effect(acfg, task)
    # isolate the bound's last two bracket terms by zeroing F0 - F*:
    # data term alone (no interference), then data + interference together
    n_rounds = 100
    flat = replace(task, F0=task.F_star)
    data_term = analog_bound(acfg, replace(flat, sigma_tilde2=0.0), n_rounds)
    both_terms = analog_bound(acfg, flat, n_rounds)
    indirect = (both_terms - data_term) / data_term
    err = abs(ratio - indirect)
    return CheckRecord(name="interference_effect_consistency",
                       analytic=indirect, empirical=ratio, tolerance=1e-12,
                       passed=err <= 1e-12, n_samples=1,
                       detail="closed form vs bound ratio from components")


def check_latency_consistency(cfg: NetworkConfig, rng: np.random.Generator,
                              n: int | None = None) -> CheckRecord:
    """Latency report totals decompose as per_round * N_min, the mobility
    ratio matches the two reports, and infeasible criteria raise."""
    lcfg = NetworkConfig(**_VAL_DIGITAL, N=100, epsilon0=0.3, delta=0.05)
    errs = []
    for scheme in ("digital", "analog"):
        low = latency_report(lcfg, _val_taskspec(), scheme, "low")
        high = latency_report(lcfg, _val_taskspec(), scheme, "high")
        for rep in (low, high):
            per_round, n_min, total = rep
            errs.append(abs(total - per_round * n_min) / total)
        if scheme == "digital":
            ratio = latency_ratio_high_to_low(lcfg, _val_taskspec(), scheme)
            errs.append(abs(ratio - high[2] / low[2]))
        if abs(per_round_latency(lcfg, scheme) - low[0]) > 0:
            errs.append(1.0)
    try:
        latency_report(replace(lcfg, delta=1e-9), _val_taskspec(), "digital",
                       "low")
        errs.append(1.0)  # infeasible criterion accepted silently
    except InfeasibleCriterionError:
        pass
    worst = max(errs)
    return CheckRecord(name="latency_consistency", analytic=0.0,
                       empirical=worst, tolerance=1e-9, passed=worst <= 1e-9,
                       n_samples=len(errs),
                       detail="decomposition + ratio + infeasibility paths")


def _val_taskspec() -> TaskSpec:
    return TaskSpec(F0=0.5, F_star=0.0, L0=1.0, sigma2=2.0,
                    sigma_tilde2=2.0 / _VAL_TASK_S)


CHECKS = [
    check_special_functions,
    check_uplink_success_probability,
    check_decoded_count_pmf,
    check_decoded_count_limit,
    check_activation_count_pmf,
    check_inverse_decoded_mean_identity,
    check_effective_rounds_oracles,
    check_interference_moment_mc,
    check_mean_transmit_power,
    check_digital_aggregate_variance,
    check_digital_unbiasedness,
    check_analog_unbiasedness,
    check_analog_variance_bound,
    check_digital_low_bound,
    check_digital_high_bound,
    check_analog_low_bound,
    check_interference_effect_consistency,
    check_latency_consistency,
]

# analytics operation -> names of the checks that validate it; the
# registry-completeness meta-test enumerates the analytics module's public
# callables against this table.
CHECK_COVERAGE = {
    "exp_integral_Ei": ["special_functions"],
    "beta_fn": ["special_functions"],
    "success_probability": ["uplink_success_probability"],
    "successful_device_stats": ["decoded_count_pmf",
                                "decoded_count_limit"],
    "expected_inverse_K": ["inverse_decoded_count_mean"],
    "expected_inverse_Ne": ["effective_rounds_inverse_moment"],
    "activation_stats": ["activation_count_pmf"],
    "analog_eta": ["mean_transmit_power"],
    "campbell_interference_moment": ["interference_second_moment",
                                     "analog_aggregate_variance_bound"],
    "digital_bound": ["digital_low_mobility_bound"],
    "high_mobility_bound": ["digital_high_mobility_bound"],
    "analog_bound": ["analog_low_mobility_bound"],
    "interference_effect": ["interference_effect_consistency"],
    "per_round_latency": ["latency_consistency"],
    "latency_report": ["latency_consistency"],
    "latency_ratio_high_to_low": ["latency_consistency"],
}


def run_all_checks(cfg: NetworkConfig, seed_base: int = 0,
                   n_override: int | None = None) -> list[CheckRecord]:
    """Run the registry; analytic-matched mode is forced for every check."""
    cfg = replace(cfg, interference_mode="analytic-matched")
    records = []
    for i, check in enumerate(CHECKS):
        rng = np.random.default_rng(seed_base * 100_003 + i)
        records.append(check(cfg, rng, n_override))
    return records
