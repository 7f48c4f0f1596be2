"""Closed-form network and learning quantities.

Everything here is a deterministic formula: success/activation probabilities
of the uplink, moments of the truncated-Poisson device counts, convergence
bounds for the digital and analog aggregation schemes, latency bounds, and
the special functions (exponential integral, Beta) they depend on.  Each
public function is paired with an independent brute-force oracle in the test
suite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict
from typing import Callable

EULER_GAMMA = 0.5772156649015328606

# Interference field beyond this radius contributes < 1e-4 of the mean
# interference power for alpha = 4 (tail integral r^(1-alpha) from 50 vs from
# the unit exclusion radius), so analytic-matched sampling truncates here.
TRUNCATION_RADIUS = 50.0

_INTERFERENCE_MODES = ("analytic-matched", "cellular")


class InfeasibleCriterionError(ValueError):
    """The spatial convergence criterion cannot be met for this config.

    Raised when the outage floor (probability that a cell never aggregates
    anything) already exceeds the allowed failure probability delta, so no
    number of rounds satisfies the criterion.
    """


# ---------------------------------------------------------------------------
# configuration containers
# ---------------------------------------------------------------------------

@dataclass
class NetworkConfig:
    """Physical-layer and experiment parameters of the cellular network."""

    lambda_d: float = 1.0          # device density (per unit area)
    R: float = 1.0                 # inscribed-disk radius of the cell
    M: int = 1                     # number of subcarriers (processing gain)
    B: float = 1e6                 # total bandwidth, Hz
    theta: float = 1.0             # SIR threshold for digital decoding
    alpha: float = 4.0             # path-loss exponent, must be > 2
    P: float = 1.0                 # interferer / average transmit power
    g_th: float = 1.0              # fading-gain truncation threshold (analog)
    S: int = 16                    # model dimension (coefficients per update)
    D_bits: int = 16               # quantization bits per coefficient (digital)
    t_cmp: float = 0.0             # per-round computation time, s
    t_bc: float = 0.0              # per-round broadcast time, s
    delta: float = 0.05            # spatial criterion: allowed failure prob
    epsilon0: float = 0.1          # spatial criterion: gradient-norm target
    N: int = 100                   # round budget
    window_half_width: float = 25.0    # half-width of the simulation window
    interference_mode: str = "analytic-matched"
    freeze_fading: bool = False    # keep low-mobility fading fixed across rounds

    def __post_init__(self) -> None:
        if self.lambda_d < 0:
            raise ValueError(f"lambda_d must be >= 0, got {self.lambda_d}")
        if self.R <= 0:
            raise ValueError(f"R must be > 0, got {self.R}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M}")
        self.M = int(self.M)
        if self.B <= 0:
            raise ValueError(f"B must be > 0, got {self.B}")
        if self.theta <= 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if self.alpha <= 2:
            raise ValueError(f"alpha must be > 2, got {self.alpha}")
        if self.P <= 0:
            raise ValueError(f"P must be > 0, got {self.P}")
        if self.g_th < 0:
            raise ValueError(f"g_th must be >= 0, got {self.g_th}")
        if int(self.S) != self.S or self.S < 1:
            raise ValueError(f"S must be a positive integer, got {self.S}")
        self.S = int(self.S)
        if int(self.D_bits) != self.D_bits or self.D_bits < 1:
            raise ValueError(f"D_bits must be a positive integer, got {self.D_bits}")
        self.D_bits = int(self.D_bits)
        if self.t_cmp < 0 or self.t_bc < 0:
            raise ValueError("t_cmp and t_bc must be >= 0")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.epsilon0 <= 0:
            raise ValueError(f"epsilon0 must be > 0, got {self.epsilon0}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        self.N = int(self.N)
        if self.window_half_width <= 0:
            raise ValueError("window_half_width must be > 0")
        if self.interference_mode not in _INTERFERENCE_MODES:
            raise ValueError(
                f"interference_mode must be one of {_INTERFERENCE_MODES}, "
                f"got {self.interference_mode!r}"
            )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TaskSpec:
    """Learning-task constants entering the convergence bounds."""

    F0: float                      # loss at the initial model
    F_star: float                  # lower bound of the loss
    L0: float                      # smoothness constant (max coordinate value)
    sigma2: float                  # bound on total local-gradient variance
    sigma_tilde2: float = 0.0      # per-coefficient gradient variance
    nu: float = 0.0                # per-coefficient gradient mean

    def __post_init__(self) -> None:
        if self.F0 < self.F_star:
            raise ValueError(f"F0 ({self.F0}) must be >= F_star ({self.F_star})")
        if self.L0 <= 0:
            raise ValueError(f"L0 must be > 0, got {self.L0}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        if self.sigma_tilde2 < 0:
            raise ValueError(f"sigma_tilde2 must be >= 0, got {self.sigma_tilde2}")

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def exp_integral_Ei(x: float) -> float:
    """Principal-value exponential integral Ei(x).

    Power series gamma + ln|x| + sum x^k/(k*k!) for moderate |x|; a
    continued fraction for large negative x (where the alternating series
    cancels catastrophically) and the divergent asymptotic series, truncated
    at its smallest term, for large positive x.  Relative error < 1e-10 on
    [-50, -1e-6] and [1e-6, 50] against a high-precision oracle.
    """
    if x == 0.0 or not math.isfinite(x):
        raise ValueError(f"Ei is undefined at x={x}")
    ax = abs(x)
    if x > 0 and x >= 40.0:
        return _ei_asymptotic(x)
    if x < 0 and ax >= 5.0:
        return -_e1_continued_fraction(ax)
    return _ei_power_series(x)


def _ei_power_series(x: float) -> float:
    # gamma + ln|x| + sum_{k>=1} x^k / (k * k!); safe for x in [-5, 40].
    total = EULER_GAMMA + math.log(abs(x))
    term = 1.0
    for k in range(1, 500):
        term *= x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _ei_asymptotic(x: float) -> float:
    # Ei(x) ~ e^x/x * sum_{k>=0} k!/x^k, truncated at the smallest term.
    if x > 709.0:
        return math.inf
    s = 1.0
    term = 1.0
    for k in range(1, int(x) + 1):
        nxt = term * k / x
        if nxt >= term:
            break
        term = nxt
        s += term
        if term < 1e-17 * s:
            break
    return math.exp(x) / x * s


def _e1_continued_fraction(z: float) -> float:
    # E1(z) = e^-z / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(z + 7 - ...))))
    # evaluated with the modified Lentz algorithm; solid for z >= 1.
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, 200):
        a = -(k * k)
        b += 2.0
        d = a * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return math.exp(-z) * h


def beta_fn(x: float, y: float) -> float:
    """Beta function B(x, y) for positive arguments, via log-gamma."""
    if x <= 0 or y <= 0:
        raise ValueError(f"beta_fn requires positive arguments, got ({x}, {y})")
    return math.exp(math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y))


def _scaled_ei_excess(x: float) -> float:
    """e^-x * (Ei(x) - ln x - gamma) for x > 0, overflow-safe.

    Equals the Poisson-weighted harmonic-like sum sum_{j>=1} e^-x x^j/(j*j!).
    For large x both Ei(x) and e^-x overflow/underflow individually, so the
    product is computed from the asymptotic expansion sum_{k>=0} k!/x^(k+1).
    """
    if x <= 0:
        raise ValueError(f"argument must be > 0, got {x}")
    if x < 500.0:
        return math.exp(-x) * (exp_integral_Ei(x) - math.log(x) - EULER_GAMMA)
    s = 0.0
    term = 1.0 / x
    for k in range(1, int(x)):
        s += term
        nxt = term * k / x
        if nxt >= term or nxt < 1e-18 * s:
            break
        term = nxt
    return s


# ---------------------------------------------------------------------------
# digital uplink: success probability and device-count statistics
# ---------------------------------------------------------------------------

def success_probability(cfg: NetworkConfig) -> tuple[float, float]:
    """Probability that an in-disk device's uplink SIR clears the threshold.

    Returns (p_s, a) where a is the interference exponent coefficient
    2*pi*lambda_d*B(2/alpha, 1-2/alpha)*theta^(2/alpha)/(alpha*M) and
    p_s = (1 - e^(-a R^2)) / (a R^2), averaged over the in-disk distance law.
    """
    if cfg.alpha <= 2:
        raise ValueError(f"alpha must be > 2, got {cfg.alpha}")
    two_over_alpha = 2.0 / cfg.alpha
    a = (2.0 * math.pi * cfg.lambda_d * beta_fn(two_over_alpha, 1.0 - two_over_alpha)
         * cfg.theta ** two_over_alpha / (cfg.alpha * cfg.M))
    x = a * cfg.R * cfg.R
    if x < 1e-12:
        p_s = 1.0 - 0.5 * x      # series limit of (1 - e^-x)/x
    else:
        p_s = -math.expm1(-x) / x
    return p_s, a


def successful_device_stats(
    cfg: NetworkConfig,
) -> tuple[float, Callable[[int], float], float, float]:
    """Statistics of the per-round count of successfully decoded devices.

    Returns (K_bar, pmf, p_null, K_bar_limit): the count is Poisson with mean
    K_bar = pi*lambda_d*R^2*p_s, p_null = e^(-K_bar) is the empty-cell
    probability, and K_bar_limit = alpha*M/(2*B(2/alpha,1-2/alpha)*theta^(2/alpha))
    is the density->infinity ceiling of K_bar.
    """
    p_s, _a = success_probability(cfg)
    k_bar = math.pi * cfg.lambda_d * cfg.R * cfg.R * p_s
    two_over_alpha = 2.0 / cfg.alpha
    k_bar_limit = cfg.alpha * cfg.M / (
        2.0 * beta_fn(two_over_alpha, 1.0 - two_over_alpha)
        * cfg.theta ** two_over_alpha
    )
    return k_bar, _poisson_pmf(k_bar), math.exp(-k_bar), k_bar_limit


def _poisson_pmf(mean: float) -> Callable[[int], float]:
    def pmf(j: int) -> float:
        if j < 0 or int(j) != j:
            return 0.0
        if mean == 0.0:
            return 1.0 if j == 0 else 0.0
        return math.exp(-mean + j * math.log(mean) - math.lgamma(j + 1))
    return pmf


def expected_inverse_K(K_bar: float) -> float:
    """E[1/K | K > 0] for K ~ Poisson(K_bar).

    Closed form e^(-K_bar)/(1 - e^(-K_bar)) * (Ei(K_bar) - ln K_bar - gamma);
    agrees with the truncated-sum oracle to 1e-10 and decays like 1/K_bar.
    """
    if K_bar <= 0:
        raise ValueError(f"K_bar must be > 0, got {K_bar}")
    return _scaled_ei_excess(K_bar) / -math.expm1(-K_bar)


def expected_inverse_Ne(p_null: float, N: int) -> tuple[float, float]:
    """E[1/N_e | N_e >= 1] for N_e ~ Binomial(N, 1 - p_null), N_e truncated at 0.

    Returns (exact, expansion): the exact finite sum
    (1/(1-p^N)) * sum_{i=1..N} (p^(i-1) - p^N)/(N-i+1) and its small-p_null
    expansion 1/N + p_null/(N-1); |exact - expansion| = O(p_null^2).
    """
    if not 0 <= p_null < 1:
        raise ValueError(f"p_null must be in [0, 1), got {p_null}")
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    pN = p_null ** N
    total = 0.0
    p_pow = 1.0                       # p_null^(i-1)
    for i in range(1, N + 1):
        total += (p_pow - pN) / (N - i + 1)
        p_pow *= p_null
    exact = total / (1.0 - pN)
    expansion = 1.0 / N + p_null / (N - 1)
    return exact, expansion


# ---------------------------------------------------------------------------
# convergence bounds
# ---------------------------------------------------------------------------

def digital_bound(cfg: NetworkConfig, task: TaskSpec, N: int) -> float:
    """Upper bound on the round-averaged squared gradient norm of a
    non-empty cell under digital aggregation, low mobility, with step size
    1/(L0*sqrt(N)): (1/sqrt(N)) * [(F0 - F*) + sigma2 * E[1/K | K>0]]."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    k_bar, _, _, _ = successful_device_stats(cfg)
    bracket = (task.F0 - task.F_star) + task.sigma2 * expected_inverse_K(k_bar)
    return bracket / math.sqrt(N)


def high_mobility_bound(cfg: NetworkConfig, task: TaskSpec, N: int) -> float:
    """High-mobility digital counterpart of digital_bound.

    Multiplier sqrt(1/N + p_null/(N-1)) replaces 1/sqrt(N); the O(p_null^2)
    remainder of the underlying expansion is dropped, so the value is only
    trustworthy for small p_null (a warning is raised beyond 0.2).
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    k_bar, _, p_null, _ = successful_device_stats(cfg)
    if p_null > 0.2:
        warnings.warn(
            f"high_mobility_bound: p_null={p_null:.3f} > 0.2; the dropped "
            "second-order remainder is no longer negligible",
            stacklevel=2,
        )
    bracket = (task.F0 - task.F_star) + task.sigma2 * expected_inverse_K(k_bar)
    return math.sqrt(1.0 / N + p_null / (N - 1)) * bracket


# ---------------------------------------------------------------------------
# analog uplink: activation, power control, interference moments
# ---------------------------------------------------------------------------

def activation_stats(
    cfg: NetworkConfig,
) -> tuple[float, float, Callable[[int], float]]:
    """Truncated-channel-inversion activation statistics.

    Returns (p_a, K_bar_prime, pmf): a device transmits iff its fading gain
    exceeds g_th, so p_a = e^(-g_th) and the active in-disk count is Poisson
    with mean K_bar_prime = pi*R^2*lambda_d*p_a.
    """
    if cfg.g_th < 0:
        raise ValueError(f"g_th must be >= 0, got {cfg.g_th}")
    p_a = math.exp(-cfg.g_th)
    k_bar_prime = math.pi * cfg.R * cfg.R * cfg.lambda_d * p_a
    return p_a, k_bar_prime, _poisson_pmf(k_bar_prime)


def analog_eta(cfg: NetworkConfig) -> float:
    """Receive-amplitude alignment constant of the analog power control.

    eta = P*(alpha+2) / (2*R^alpha*(-Ei(-g_th))) makes the average transmit
    power under truncated channel inversion equal P.
    """
    if cfg.g_th <= 0:
        raise ValueError(
            f"g_th must be > 0 for power control (eta diverges), got {cfg.g_th}"
        )
    neg_ei = -exp_integral_Ei(-cfg.g_th)
    return cfg.P * (cfg.alpha + 2.0) / (2.0 * cfg.R ** cfg.alpha * neg_ei)


def campbell_interference_moment(cfg: NetworkConfig) -> float:
    """Mean per-coefficient interference power at the cell center from
    co-channel transmitters outside radius R: 2*pi*lambda_d*P*R^(2-alpha)
    / ((alpha-2)*M), by the first-moment (Campbell) formula."""
    if cfg.alpha <= 2:
        raise ValueError(
            f"interference moment diverges for alpha <= 2, got {cfg.alpha}"
        )
    return (2.0 * math.pi * cfg.lambda_d * cfg.P * cfg.R ** (2.0 - cfg.alpha)
            / ((cfg.alpha - 2.0) * cfg.M))


def analog_bound(cfg: NetworkConfig, task: TaskSpec, N: int) -> float:
    """Upper bound on the round-averaged squared gradient norm of a
    non-empty cell under analog over-the-air aggregation, low mobility.

    (1/sqrt(N)) * [(F0-F*) + sigma2*phi
                   + 16*sigma_tilde2*(-Ei(-g_th))/(p_a*(alpha^2-4)*M)
                     * (phi - K_bar'*e^(-K_bar')/(1 - e^(-K_bar')))]
    with phi = E[1/K | K>0] at the analog active-device mean K_bar'.
    """
    if cfg.alpha <= 2:
        raise ValueError(f"alpha must be > 2, got {cfg.alpha}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    p_a, k_bar_prime, _ = activation_stats(cfg)
    phi = expected_inverse_K(k_bar_prime)
    neg_ei = -exp_integral_Ei(-cfg.g_th)
    occupancy = k_bar_prime * math.exp(-k_bar_prime) / -math.expm1(-k_bar_prime)
    interference_term = (
        16.0 * task.sigma_tilde2 * neg_ei
        / (p_a * (cfg.alpha ** 2 - 4.0) * cfg.M)
        * (phi - occupancy)
    )
    bracket = (task.F0 - task.F_star) + task.sigma2 * phi + interference_term
    return bracket / math.sqrt(N)


def interference_effect(cfg: NetworkConfig, task: TaskSpec) -> float:
    """Ratio of interference-induced to data-variance-induced deviation in
    the analog bound: 16*sigma_tilde2*(-Ei(-g_th))/(sigma2*p_a*(alpha^2-4)*M)
    * (1 - K_bar'/(Ei(K_bar') - ln K_bar' - gamma))."""
    if task.sigma2 <= 0:
        raise ValueError("interference_effect requires sigma2 > 0")
    p_a, k_bar_prime, _ = activation_stats(cfg)
    neg_ei = -exp_integral_Ei(-cfg.g_th)
    inner = 1.0 - k_bar_prime * math.exp(-k_bar_prime) / _scaled_ei_excess(k_bar_prime)
    return (16.0 * task.sigma_tilde2 * neg_ei
            / (task.sigma2 * p_a * (cfg.alpha ** 2 - 4.0) * cfg.M) * inner)


# ---------------------------------------------------------------------------
# latency
# ---------------------------------------------------------------------------

def per_round_latency(cfg: NetworkConfig, scheme: str) -> float:
    """Seconds per communication round, constant across rounds.

    digital: S*D_bits*M/(B*log2(1+theta)); analog: S*M/B; both plus
    t_cmp + t_bc.  Base-2 logarithm because D_bits counts bits.
    """
    if scheme == "digital":
        comm = cfg.S * cfg.D_bits * cfg.M / (cfg.B * math.log2(1.0 + cfg.theta))
    elif scheme == "analog":
        comm = cfg.S * cfg.M / cfg.B
    else:
        raise ValueError(f"scheme must be 'digital' or 'analog', got {scheme!r}")
    return comm + cfg.t_cmp + cfg.t_bc


def latency_report(
    cfg: NetworkConfig, task: TaskSpec, scheme: str, mobility: str
) -> tuple[float, float, float]:
    """Latency bound for meeting the spatial convergence criterion.

    Returns (per_round_latency, N_min_upper, total_latency_upper).  The
    criterion demands Pr(averaged-gradient norm > epsilon0) <= delta; empty
    cells count as failures, which tightens the per-cell target to
    eps = (delta - p_fail)*epsilon0/(1 - p_fail) with p_fail = p_null (low
    mobility) or p_null^N (high mobility).  Raises InfeasibleCriterionError
    when delta <= p_fail.
    """
    if mobility not in ("low", "high"):
        raise ValueError(f"mobility must be 'low' or 'high', got {mobility!r}")
    if scheme == "digital":
        k_bar, _, p_null, _ = successful_device_stats(cfg)
    elif scheme == "analog":
        _, k_bar, _ = activation_stats(cfg)
        p_null = math.exp(-k_bar)
    else:
        raise ValueError(f"scheme must be 'digital' or 'analog', got {scheme!r}")

    if k_bar <= 0:
        raise InfeasibleCriterionError(
            "no devices ever aggregate (K_bar = 0); criterion unreachable"
        )
    phi = expected_inverse_K(k_bar)
    if scheme == "digital":
        bracket = (task.F0 - task.F_star) + task.sigma2 * phi
    else:
        neg_ei = -exp_integral_Ei(-cfg.g_th)
        p_a = math.exp(-cfg.g_th)
        occupancy = k_bar * math.exp(-k_bar) / -math.expm1(-k_bar)
        bracket = ((task.F0 - task.F_star) + task.sigma2 * phi
                   + 16.0 * task.sigma_tilde2 * neg_ei
                   / (p_a * (cfg.alpha ** 2 - 4.0) * cfg.M) * (phi - occupancy))

    per_round = per_round_latency(cfg, scheme)
    if mobility == "low":
        p_fail = p_null
    else:
        p_fail = p_null ** cfg.N
    if cfg.delta <= p_fail:
        raise InfeasibleCriterionError(
            f"delta={cfg.delta} <= empty-cell floor {p_fail:.6g}; the spatial "
            "criterion has no solution for this config"
        )
    eps = (cfg.delta - p_fail) * cfg.epsilon0 / (1.0 - p_fail)
    n_min = (bracket / eps) ** 2
    if mobility == "high":
        # round-count form consistent with the stated high/low latency ratio
        n_min *= math.sqrt(1.0 + p_null)
    return per_round, n_min, per_round * n_min


def latency_ratio_high_to_low(cfg: NetworkConfig, task: TaskSpec, scheme: str) -> float:
    """Total-latency ratio high/low mobility; tends to
    1 - (2/delta - 5/2)*p_null + O(p_null^2) as p_null -> 0."""
    _, _, low = latency_report(cfg, task, scheme, "low")
    _, _, high = latency_report(cfg, task, scheme, "high")
    return high / low


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

@dataclass
class BoundReport:
    """Every closed-form quantity for one config/task, ready to serialize."""

    p_s: float
    a: float
    K_bar: float
    K_bar_limit: float
    p_null: float
    p_a: float
    K_bar_prime: float
    eta: float
    campbell_moment: float
    E_inv_K: float
    phi: float
    digital_bound: float
    analog_bound: float
    high_mobility_bound: float
    interference_effect: float
    N: int
    latency: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def build_bound_report(cfg: NetworkConfig, task: TaskSpec) -> BoundReport:
    """Evaluate all closed forms for one config/task pair.

    Latency entries are computed per (scheme, mobility); an infeasible
    criterion is recorded as feasible=false rather than raised, so the
    report is always constructible.
    """
    p_s, a = success_probability(cfg)
    k_bar, _, p_null, k_bar_limit = successful_device_stats(cfg)
    p_a, k_bar_prime, _ = activation_stats(cfg)
    e_inv_k = expected_inverse_K(k_bar) if k_bar > 0 else math.nan
    phi = expected_inverse_K(k_bar_prime) if k_bar_prime > 0 else math.nan
    latency: dict[str, dict] = {}
    for scheme in ("digital", "analog"):
        for mobility in ("low", "high"):
            key = f"{scheme}_{mobility}"
            try:
                per_round, n_min, total = latency_report(cfg, task, scheme, mobility)
                latency[key] = {
                    "feasible": True,
                    "per_round_latency_s": per_round,
                    "N_min_upper": n_min,
                    "total_latency_upper_s": total,
                }
            except InfeasibleCriterionError as exc:
                latency[key] = {
                    "feasible": False,
                    "reason": str(exc),
                    "per_round_latency_s": per_round_latency(cfg, scheme),
                }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        hm_bound = (high_mobility_bound(cfg, task, cfg.N)
                    if k_bar > 0 and cfg.N >= 2 else math.nan)
    return BoundReport(
        p_s=p_s,
        a=a,
        K_bar=k_bar,
        K_bar_limit=k_bar_limit,
        p_null=p_null,
        p_a=p_a,
        K_bar_prime=k_bar_prime,
        eta=analog_eta(cfg) if cfg.g_th > 0 else math.nan,
        campbell_moment=campbell_interference_moment(cfg),
        E_inv_K=e_inv_k,
        phi=phi,
        digital_bound=digital_bound(cfg, task, cfg.N) if k_bar > 0 else math.nan,
        analog_bound=analog_bound(cfg, task, cfg.N) if k_bar_prime > 0 else math.nan,
        high_mobility_bound=hm_bound,
        interference_effect=(interference_effect(cfg, task)
                             if task.sigma2 > 0 and k_bar_prime > 0 else math.nan),
        N=cfg.N,
        latency=latency,
    )
