"""Within-period firm/household equilibrium for given capital, consumption rate and productivity.

All solver quantities are rescaled by productivity (``c_tilde = c / z`` and so
on), so the solve itself does not depend on ``z``.  Combining the labour
first-order condition ``n c = G w / (2 gamma)`` with the CES marginal product
of labour and market clearing ``y = c`` gives a one-dimensional condition on
``c_tilde``::

    c_tilde**2 = G/(2 gamma) * (1-alpha)**(-2/rho) * X**((rho+2)/rho),
    X = 1 - alpha * (c_tilde/k)**rho

whose left side increases and right side decreases in ``c_tilde``.  It is
solved by bisection in log form on ``(0, k * alpha**(-1/rho))``, the interval
on which ``X > 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from numba import njit

from .params import ModelParams

_EPS = 1e-12

# status codes shared with the engine kernel
OK = 0
NOT_CONVERGED = 1


class EquilibriumError(RuntimeError):
    pass


@njit(cache=True)
def ces_core(k, G, alpha, rho, gamma, tol, max_iter):
    """Return ``(c_tilde, n, w_tilde, q_star_tilde, iterations, status)``."""
    log_k = math.log(k)
    log_alpha = math.log(alpha)
    log_a = math.log(G / (2.0 * gamma)) - 2.0 / rho * math.log1p(-alpha)
    expo = (rho + 2.0) / rho
    lo = _EPS
    hi = k * math.exp(-log_alpha / rho) * (1.0 - _EPS)
    it = 0
    status = NOT_CONVERGED
    while it < max_iter:
        it += 1
        mid = 0.5 * (lo + hi)
        big_x = -math.expm1(log_alpha + rho * (math.log(mid) - log_k))
        if big_x <= 0.0:
            hi = mid
        elif 2.0 * math.log(mid) - log_a - expo * math.log(big_x) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            status = OK
            break
    c = 0.5 * (lo + hi)
    log_ck = math.log(c) - log_k
    big_x = -math.expm1(log_alpha + rho * log_ck)
    n = math.exp(math.log1p(-alpha) / rho) * c * math.exp(-math.log(big_x) / rho)
    w = (1.0 - alpha) * math.exp((1.0 + rho) * (math.log(c) - math.log(n)))
    q = math.exp(log_alpha + (1.0 + rho) * log_ck)
    return c, n, w, q, it, status


@dataclass(frozen=True)
class EquilibriumOutcome:
    c_tilde: float
    n: float
    w_tilde: float
    q_star_tilde: float
    y: float
    utility: float
    iterations: int = 0


class Regime(str, enum.Enum):
    ABUNDANT = "abundant"
    SCARCE = "scarce"


@dataclass(frozen=True)
class LeontiefRegime:
    beta: float
    regime: Regime
    x: float | None  # scarce regime only; negative when (1-beta)/alpha > 1


def _check_inputs(k: float, G: float):
    if not (math.isfinite(k) and k > 0):
        raise ValueError(f"capital must be positive and finite, got {k!r}")
    if not (math.isfinite(G) and 0 < G <= 1):
        raise ValueError(f"consumption rate must lie in (0, 1], got {G!r}")


def utility(c: float, n: float, G: float, p: ModelParams) -> float:
    if not c > 0:
        raise ValueError(f"consumption must be positive, got {c!r}")
    return G * math.log(c) - p.gamma * n * n


def solve_ces(k: float, G: float, p: ModelParams, z: float = 1.0) -> EquilibriumOutcome:
    """Equilibrium at finite ``rho`` for capital ``k``, rate ``G`` and productivity ``z``."""
    _check_inputs(k, G)
    c, n, w, q, it, status = ces_core(float(k), float(G), p.alpha, p.rho, p.gamma,
                                      p.solver.tol, p.solver.max_iter)
    if status != OK:
        raise EquilibriumError(
            f"bisection did not reach tol={p.solver.tol:g} in {p.solver.max_iter} iterations (k={k}, G={G})")
    return EquilibriumOutcome(c, n, w, q, z * c, utility(z * c, n, G, p), it)


def leontief_regime(k: float, G: float, p: ModelParams) -> LeontiefRegime:
    beta = 2.0 * k * k * p.gamma / G
    if beta >= 1.0:
        return LeontiefRegime(beta, Regime.ABUNDANT, None)
    return LeontiefRegime(beta, Regime.SCARCE, -math.log((1.0 - beta) / p.alpha))


def solve_leontief(k: float, G: float, p: ModelParams, z: float = 1.0) -> EquilibriumOutcome:
    """Leading-order closed forms of the ``rho -> inf`` limit."""
    _check_inputs(k, G)
    reg = leontief_regime(k, G, p)
    if reg.regime is Regime.ABUNDANT:
        c = math.sqrt(G / (2.0 * p.gamma))
        w, q = 1.0, 0.0
        n = c * w
    else:
        c = n = k
        w, q = reg.beta, 1.0 - reg.beta
    return EquilibriumOutcome(c, n, w, q, z * c, utility(z * c, n, G, p))
