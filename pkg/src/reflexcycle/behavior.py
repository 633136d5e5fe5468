"""Behavioural rules: confidence -> consumption rate, and Sharpe/confidence -> capital allocation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from numba import njit

from .params import ModelParams


@dataclass(frozen=True)
class ConfidenceState:
    C: float


@dataclass(frozen=True)
class SharpeState:
    mu_q: float
    var_q: float
    S: float


@dataclass(frozen=True)
class SentimentDecision:
    Sigma: float
    F: float


@njit(cache=True)
def confidence_core(c_prev, c0, theta_c):
    return math.tanh(theta_c * (c_prev - c0))


@njit(cache=True)
def rate_core(C, g_min, g_max):
    g = 0.5 * (g_min + g_max + (g_max - g_min) * C)
    return min(max(g, g_min), g_max)  # rounding can overshoot the bounds by an ulp


@njit(cache=True)
def sharpe_core(mu, var, q, lam, r, delta, n_scale, sigma_floor, s_cap):
    # variance uses the freshly updated mean
    mu = lam * mu + (1.0 - lam) * q
    var = lam * var + (1.0 - lam) * (q - mu) ** 2
    excess = mu - r - delta
    sd = math.sqrt(var)
    if sd < sigma_floor:
        if excess > 0.0:
            s = s_cap
        elif excess < 0.0:
            s = -s_cap
        else:
            s = 0.0
    else:
        s = n_scale * excess / sd
    return mu, var, s


@njit(cache=True)
def allocation_core(S, C, nu, theta_k, f_min, f_max):
    if nu == 1.0:
        sigma = S
    else:
        sigma = nu * S + (1.0 - nu) * C
    f = 0.5 * (f_max + f_min + (f_max - f_min) * math.tanh(theta_k * sigma))
    return sigma, min(max(f, f_min), f_max)


def confidence(c_prev: float, p: ModelParams) -> ConfidenceState:
    """Confidence from last period's absolute consumption level."""
    return ConfidenceState(confidence_core(c_prev, p.c0, p.theta_c))


def consumption_rate(C: float, p: ModelParams) -> float:
    return rate_core(C, p.g_min, p.g_max)


def neutral_sharpe(p: ModelParams) -> SharpeState:
    """Starting estimate: mean return equal to the bond-plus-depreciation hurdle."""
    return SharpeState(p.r + p.delta, p.sigma_floor ** 2, 0.0)


def update_sharpe(s: SharpeState, q_realised: float, p: ModelParams) -> SharpeState:
    """One EMA step of the realised-return mean/variance and the scaled Sharpe ratio.

    When the estimated volatility drops below ``p.sigma_floor`` the ratio is
    clamped to ``+-p.s_cap`` with the sign of the excess return.
    """
    return SharpeState(*sharpe_core(s.mu_q, s.var_q, q_realised, p.lam, p.r, p.delta,
                                    p.n_scale, p.sigma_floor, p.s_cap))


def sentiment_and_allocation(S: float, C: float, p: ModelParams) -> SentimentDecision:
    return SentimentDecision(*allocation_core(S, C, p.nu, p.theta_k, p.f_min, p.f_max))
