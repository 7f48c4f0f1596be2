"""Distributed SGD pieces: local gradients, aggregation, and synthetic tasks.

Two desk-scale tasks ship with known constants:

* quadratic — F(w) = (L0/2)*||w - w*||^2 with additive Gaussian gradient
  noise of total variance sigma2; every smoothness/variance assumption holds
  exactly, so convergence bounds can be asserted rather than eyeballed.
* logistic — two symmetric Gaussian classes, per-device datasets, empirical
  risk gradients; curvature constant (1 + ||m||^2)/4 is an exact smoothness
  bound, the population loss/gradient come from Gauss-Hermite quadrature,
  and the noise level is measured by a calibration pass and recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit, log_expit

from .analytics import TaskSpec

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(96)
_GH_WEIGHTS = _GH_WEIGHTS / math.sqrt(math.pi)


@dataclass
class LearningTask:
    """A loss with exact population quantities plus a per-device sampler.

    loss/true_grad evaluate the population objective; new_device draws one
    device's persistent state (its dataset; None for stateless tasks); and
    local_gradient maps (device, w, rng) to one stochastic gradient.
    params holds the constructor arguments so worker processes can rebuild
    an identical task (the callables close over arrays and do not pickle).
    """

    name: str
    S: int
    w0: np.ndarray
    spec: TaskSpec
    loss: Callable[[np.ndarray], float]
    true_grad: Callable[[np.ndarray], np.ndarray]
    new_device: Callable[[np.random.Generator], Any]
    local_gradient: Callable[[Any, np.ndarray, np.random.Generator], np.ndarray]
    accuracy: Callable[[np.ndarray], float] | None = None
    params: dict = field(default_factory=dict)


def aggregate_digital(gradients) -> np.ndarray:
    """Coefficient-wise mean of the decoded gradients (A >= 1)."""
    stack = np.asarray(gradients, dtype=float)
    if stack.ndim != 2 or stack.shape[0] == 0:
        raise ValueError("aggregate_digital needs a nonempty list of gradients")
    return stack.mean(axis=0)


def normalization_constants(gradients) -> tuple[float, float]:
    """Scalar (nu, sigma_tilde): pooled mean/std of all gradient coefficients.

    This is the oracle pass that stands in for the transmitters' a-priori
    knowledge of the gradient statistics; population std (ddof=0).
    """
    pooled = np.asarray(gradients, dtype=float).ravel()
    if pooled.size == 0:
        raise ValueError("normalization constants need at least one gradient")
    return float(pooled.mean()), float(pooled.std())


def analog_uplink(gradients, active_set, eta: float, g_th: float, fading,
                  interference_vector: np.ndarray, nu: float,
                  sigma_tilde: float) -> np.ndarray | None:
    """Over-the-air aggregate after de-normalization.

    Active devices (fading >= g_th) invert their channels so symbols add
    coherently with amplitude sqrt(eta); the receiver scales by
    sigma_tilde/(A*sqrt(eta)) and shifts by nu, which collapses to

        (1/A) * sum_{active} g  +  interference * sigma_tilde / (A*sqrt(eta)).

    Empty active set returns None (no-update signal).  sigma_tilde = 0 means
    every coefficient of every gradient equals nu, nothing is modulated, and
    the receiver reconstructs the constant vector exactly.
    """
    active = np.asarray(active_set, dtype=int)
    if active.size == 0:
        return None
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    fading = np.asarray(fading, dtype=float)
    if np.any(fading[active] < g_th):
        raise ValueError("active device below the inversion threshold g_th")
    stack = np.asarray(gradients, dtype=float)
    a = active.size
    if sigma_tilde == 0.0:
        return np.full(stack.shape[1], nu)
    signal = stack[active].mean(axis=0)
    return signal + interference_vector * (sigma_tilde / (a * math.sqrt(eta)))


def global_update(w: np.ndarray, g_bar: np.ndarray, mu: float) -> np.ndarray:
    """One descent step w - mu * g_bar."""
    return w - mu * g_bar


# ---------------------------------------------------------------------------
# quadratic task
# ---------------------------------------------------------------------------

def make_quadratic_task(S: int, L0: float, sigma2: float,
                        w_star: np.ndarray | None = None,
                        rng: np.random.Generator | None = None) -> LearningTask:
    """F(w) = (L0/2)*||w - w*||^2 with i.i.d. Gaussian gradient noise.

    Total noise variance E||g - grad F||^2 = sigma2 exactly (sigma2/S per
    coefficient).  The start point sits at unit distance from w*, drawn
    uniformly on the sphere when an rng is given, along the diagonal
    otherwise, so F0 - F* = L0/2 either way.
    """
    if L0 <= 0:
        raise ValueError(f"L0 must be > 0, got {L0}")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    w_star = np.zeros(S) if w_star is None else np.asarray(w_star, dtype=float)
    if w_star.shape != (S,):
        raise ValueError(f"w_star must have shape ({S},), got {w_star.shape}")
    if rng is None:
        offset = np.ones(S) / math.sqrt(S)
    else:
        offset = rng.standard_normal(S)
        offset /= np.linalg.norm(offset)
    w0 = w_star + offset
    coef_sd = math.sqrt(sigma2 / S)

    def loss(w):
        d = w - w_star
        return 0.5 * L0 * float(d @ d)

    def true_grad(w):
        return L0 * (w - w_star)

    def local_gradient(device, w, rng):
        return true_grad(w) + coef_sd * rng.standard_normal(S)

    spec = TaskSpec(F0=loss(w0), F_star=0.0, L0=L0, sigma2=sigma2,
                    sigma_tilde2=sigma2 / S, nu=0.0)
    return LearningTask(
        name="quadratic", S=S, w0=w0, spec=spec, loss=loss,
        true_grad=true_grad, new_device=lambda rng: None,
        local_gradient=local_gradient, accuracy=None,
        params={"kind": "quadratic", "S": S, "L0": L0, "sigma2": sigma2,
                "w_star": w_star.tolist()})


# ---------------------------------------------------------------------------
# logistic task
# ---------------------------------------------------------------------------

def _gauss_hermite_stats(mean: float, sd: float) -> tuple[float, float, float]:
    """(E[softplus(-z)], E[sigmoid(-z)], E[sigmoid'(-z)]) for z ~ N(mean, sd^2)."""
    z = mean + math.sqrt(2.0) * sd * _GH_NODES
    softplus_neg = -log_expit(z)          # log(1 + exp(-z))
    sig_neg = expit(-z)
    return (float(_GH_WEIGHTS @ softplus_neg),
            float(_GH_WEIGHTS @ sig_neg),
            float(_GH_WEIGHTS @ (sig_neg * expit(z))))


def make_logistic_task(S: int, n_samples_per_device: int,
                       class_separation: float,
                       rng: np.random.Generator) -> LearningTask:
    """Binary logistic regression on symmetric Gaussian classes.

    Labels y = +-1 equiprobable; features u | y ~ N(y*m, I_S) with
    m = (class_separation/2) * ones/sqrt(S).  Each device holds a dataset of
    n_samples_per_device pairs and returns the empirical-risk gradient.  For
    either class, y * w.u ~ N(w.m, ||w||^2), so the population loss and
    gradient reduce to one-dimensional Gauss-Hermite integrals (the gradient
    via the Gaussian integration-by-parts identity).  The minimizer lies on
    the m axis by symmetry, giving F* from a scalar search; the exact
    curvature bound is L0 = (1 + ||m||^2)/4.  sigma2 is measured by a
    calibration pass over fresh devices at the start and optimum points.
    """
    if S <= 0 or n_samples_per_device <= 0 or class_separation <= 0:
        raise ValueError("S, n_samples_per_device, class_separation must be > 0")
    D = n_samples_per_device
    m = (class_separation / 2.0) * np.ones(S) / math.sqrt(S)
    m_norm = float(np.linalg.norm(m))
    w0 = np.zeros(S)

    def loss(w):
        w = np.asarray(w, dtype=float)
        f, _, _ = _gauss_hermite_stats(float(w @ m), float(np.linalg.norm(w)))
        return f

    def true_grad(w):
        w = np.asarray(w, dtype=float)
        _, e_sig, e_dsig = _gauss_hermite_stats(float(w @ m),
                                                float(np.linalg.norm(w)))
        return -e_sig * m + e_dsig * w

    # minimizer is c* * m/|m|; scalar search on the coefficient
    def _axis_loss(c):
        f, _, _ = _gauss_hermite_stats(c * m_norm, abs(c))
        return f

    res = minimize_scalar(_axis_loss, bounds=(0.0, 50.0 / m_norm),
                          method="bounded",
                          options={"xatol": 1e-12})
    w_star = (res.x / m_norm) * m
    f_star = float(res.fun)

    def new_device(rng):
        y = rng.integers(0, 2, size=D) * 2 - 1
        u = y[:, None] * m[None, :] + rng.standard_normal((D, S))
        return {"y": y.astype(float), "u": u}

    def local_gradient(device, w, rng):
        margins = device["y"] * (device["u"] @ w)
        weights = -device["y"] * expit(-margins)
        return (weights @ device["u"]) / len(device["y"])

    # held-out test set for the accuracy metric (fixed at task creation)
    n_test = 2000
    y_test = rng.integers(0, 2, size=n_test) * 2 - 1
    u_test = y_test[:, None].astype(float) * m[None, :] \
        + rng.standard_normal((n_test, S))

    def accuracy(w):
        scores = y_test * (u_test @ w)
        return float(np.mean(scores > 0) + 0.5 * np.mean(scores == 0))

    # calibration pass: measured E||g - grad F||^2 at the start and optimum
    n_cal = 2000
    sigma2 = 0.0
    for w_anchor in (w0, w_star):
        g_ref = true_grad(w_anchor)
        sq = 0.0
        for _ in range(n_cal):
            dev = new_device(rng)
            diff = local_gradient(dev, w_anchor, rng) - g_ref
            sq += float(diff @ diff)
        sigma2 = max(sigma2, sq / n_cal)

    grad0 = true_grad(w0)
    spec = TaskSpec(F0=loss(w0), F_star=f_star,
                    L0=(1.0 + m_norm ** 2) / 4.0, sigma2=sigma2,
                    sigma_tilde2=sigma2 / S, nu=float(grad0.mean()))
    return LearningTask(
        name="logistic", S=S, w0=w0, spec=spec, loss=loss,
        true_grad=true_grad, new_device=new_device,
        local_gradient=local_gradient, accuracy=accuracy,
        params={"kind": "logistic", "S": S,
                "n_samples_per_device": n_samples_per_device,
                "class_separation": class_separation})


def build_task(params: dict, task_seed: int = 0) -> LearningTask:
    """Rebuild a task from its params dict (worker-side reconstruction)."""
    kind = params.get("kind")
    if kind == "quadratic":
        w_star = params.get("w_star")
        return make_quadratic_task(
            S=int(params["S"]), L0=float(params["L0"]),
            sigma2=float(params["sigma2"]),
            w_star=None if w_star is None else np.asarray(w_star, dtype=float))
    if kind == "logistic":
        return make_logistic_task(
            S=int(params["S"]),
            n_samples_per_device=int(params["n_samples_per_device"]),
            class_separation=float(params["class_separation"]),
            rng=np.random.default_rng(task_seed))
    raise ValueError(f"unknown task kind: {kind!r}")
