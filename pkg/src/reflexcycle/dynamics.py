"""Per-period engine and trajectory container.

One period, in order:

1. productivity shock;
2. confidence from last period's consumption, then the consumption rate;
3. sentiment and capital allocation from the Sharpe estimate through last period;
4. capital and equilibrium, either solved jointly (``simultaneous``: damped
   fixed point on ``k = (1-delta) k_prev + F (1-G) I(k)``) or with last
   period's income (``lagged``);
5. risk draw and realised rent;
6. Sharpe update with the realised rent;
7. bond purchase;
8. profit residual (zero up to rounding under constant returns to scale).

The state is a flat float64 vector (see ``FIELDS``) so the same compiled step
serves both :func:`step` and the bulk :func:`run` loop.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np
from numba import njit

from .behavior import allocation_core, confidence_core, rate_core, sharpe_core
from .equilibrium import ces_core, solve_ces
from .params import CouplingMode, ModelParams, save
from .stochastic import ShockStreams, ar1_update, risk_from_uniform

FIELDS = ("t", "z", "frak_z", "c", "n", "k", "b", "w", "q_star", "q", "G", "F", "C",
          "mu_q", "var_q", "S", "Sigma", "income", "i_total", "profit_residual", "xi", "fp_iterations")
(I_T, I_Z, I_FRAK, I_C, I_N, I_K, I_B, I_W, I_QSTAR, I_Q, I_G, I_F, I_CONF,
 I_MU, I_VAR, I_S, I_SIGMA, I_INCOME, I_ITOTAL, I_PROFIT, I_XI, I_FPIT) = range(len(FIELDS))
N_FIELDS = len(FIELDS)

CSV_COLUMNS = ("t", "z", "c", "n", "k", "b", "w", "q_star", "q", "G", "F", "C", "S", "Sigma",
               "income", "profit_residual")

STEP_OK = 0
STEP_EQUILIBRIUM_FAILED = 1
STEP_FIXED_POINT_FAILED = 2


class SimulationError(RuntimeError):
    def __init__(self, period: int, message: str):
        self.period = period
        super().__init__(f"period {period}: {message}")


@njit(cache=True)
def _step_core(prev, par, eps, u, out):
    alpha, rho, gamma, z0, eta, sigma_z = par[0], par[1], par[2], par[3], par[4], par[5]
    delta, r, pi, a, c0, theta_c = par[6], par[7], par[8], par[9], par[10], par[11]
    g_min, g_max, lam, nu, n_scale, theta_k = par[12], par[13], par[14], par[15], par[16], par[17]
    f_min, f_max, sigma_floor, s_cap = par[18], par[19], par[20], par[21]
    tol, max_iter, fp_tol, fp_max_iter = par[22], int(par[23]), par[24], int(par[25])
    simultaneous = par[26] > 0.5

    frak = ar1_update(prev[2], eta, sigma_z, eps)
    z = z0 * math.exp(frak)
    conf = confidence_core(prev[3], c0, theta_c)
    G = rate_core(conf, g_min, g_max)
    sigma, F = allocation_core(prev[15], conf, nu, theta_k, f_min, f_max)

    k_prev = prev[5]
    carried = (prev[6] + prev[9] * k_prev) / (1.0 + pi)
    save_k = F * (1.0 - G)
    k = (1.0 - delta) * k_prev + save_k * prev[17]
    ct, n, w, qs, it, st = ces_core(k, G, alpha, rho, gamma, tol, max_iter)
    if st != 0:
        return STEP_EQUILIBRIUM_FAILED
    income = z * w * n + carried
    iters = 0
    if simultaneous:
        converged = False
        last = 0.0
        damp = 1.0
        while iters < fp_max_iter:
            iters += 1
            k_next = (1.0 - delta) * k_prev + save_k * income
            d = k_next - k
            if abs(d) <= fp_tol * abs(k):  # relative to the recorded capital
                converged = True
                break
            if d * last < 0.0:
                damp = 0.5
            last = d
            k = k + damp * d
            ct, n, w, qs, it, st = ces_core(k, G, alpha, rho, gamma, tol, max_iter)
            if st != 0:
                return STEP_EQUILIBRIUM_FAILED
            income = z * w * n + carried
        if not converged:
            return STEP_FIXED_POINT_FAILED

    xi = risk_from_uniform(u, a)
    q_star = z * qs
    q = q_star * xi
    mu, var, s = sharpe_core(prev[13], prev[14], q, lam, r, delta, n_scale, sigma_floor, s_cap)
    i_total = (1.0 - G) * income
    b = (1.0 + r) * (1.0 - F) * i_total
    c = z * ct
    w_abs = z * w

    out[0] = prev[0] + 1.0
    out[1] = z
    out[2] = frak
    out[3] = c
    out[4] = n
    out[5] = k
    out[6] = b
    out[7] = w_abs
    out[8] = q_star
    out[9] = q
    out[10] = G
    out[11] = F
    out[12] = conf
    out[13] = mu
    out[14] = var
    out[15] = s
    out[16] = sigma
    out[17] = income
    out[18] = i_total
    out[19] = c - w_abs * n - q_star * k
    out[20] = xi
    out[21] = iters
    return STEP_OK


@njit(cache=True)
def _run_core(init, par, eps, us, burn_in, horizon):
    records = np.empty((horizon, init.shape[0]))
    cur = init.copy()
    nxt = np.empty_like(init)
    before = init.copy()
    for i in range(burn_in + horizon):
        st = _step_core(cur, par, eps[i], us[i], nxt)
        if st != 0:
            return records, before, st, i + 1
        if i == burn_in - 1:
            before[:] = nxt
        if i >= burn_in:
            records[i - burn_in, :] = nxt
        cur, nxt = nxt, cur
    return records, before, 0, 0


def param_vector(p: ModelParams) -> np.ndarray:
    s = p.solver
    return np.array([
        p.alpha, p.rho, p.gamma, p.z0, p.eta, p.sigma_z, p.delta, p.r, p.pi, p.a, p.c0, p.theta_c,
        p.g_min, p.g_max, p.lam, p.nu, p.n_scale, p.theta_k, p.f_min, p.f_max, p.sigma_floor, p.s_cap,
        s.tol, s.max_iter, s.fp_tol, s.fp_max_iter,
        1.0 if p.coupling_mode is CouplingMode.SIMULTANEOUS else 0.0,
    ], dtype=np.float64)


@dataclass(frozen=True)
class EconomyState:
    t: int
    z: float
    frak_z: float
    c: float
    n: float
    k: float
    b: float
    w: float
    q_star: float
    q: float
    G: float
    F: float
    C: float
    mu_q: float
    var_q: float
    S: float
    Sigma: float
    income: float
    i_total: float
    profit_residual: float
    xi: float = 1.0
    fp_iterations: int = 0

    def to_array(self) -> np.ndarray:
        return np.array([float(getattr(self, f)) for f in FIELDS])

    @classmethod
    def from_array(cls, arr) -> "EconomyState":
        vals = {f: float(v) for f, v in zip(FIELDS, arr)}
        vals["t"] = int(vals["t"])
        vals["fp_iterations"] = int(vals["fp_iterations"])
        return cls(**vals)


def initial_state(p: ModelParams) -> EconomyState:
    """Documented starting point: capital at the Leontief matching point, full confidence.

    Capital is ``sqrt(g_max / 2 gamma)``, last consumption ``z0`` times the
    same value, no bonds, no rent received yet, productivity at its base
    level, and a neutral Sharpe estimate.
    """
    k0 = math.sqrt(p.g_max / (2.0 * p.gamma))
    eq = solve_ces(k0, p.g_max, p)
    income = p.z0 * eq.w_tilde * eq.n
    return EconomyState(
        t=0, z=p.z0, frak_z=0.0, c=p.z0 * k0, n=eq.n, k=k0, b=0.0, w=p.z0 * eq.w_tilde,
        q_star=p.z0 * eq.q_star_tilde, q=0.0, G=p.g_max, F=0.5 * (p.f_min + p.f_max), C=1.0,
        mu_q=p.r + p.delta, var_q=p.sigma_floor ** 2, S=0.0, Sigma=0.0,
        income=income, i_total=(1.0 - p.g_max) * income, profit_residual=0.0,
    )


def _raise_for(status: int, period: int):
    if status == STEP_EQUILIBRIUM_FAILED:
        raise SimulationError(period, "equilibrium bisection did not converge")
    if status == STEP_FIXED_POINT_FAILED:
        raise SimulationError(period, "capital fixed point did not converge")


def step(prev: EconomyState, streams: ShockStreams, p: ModelParams) -> EconomyState:
    eps = float(streams.normals(1)[0])
    u = float(streams.uniforms(1)[0])
    return step_with_draws(prev, eps, u, p)


def step_with_draws(prev: EconomyState, eps: float, u: float, p: ModelParams) -> EconomyState:
    """Same as :func:`step` with the standard normal and (0, 1] uniform given explicitly."""
    out = np.empty(N_FIELDS)
    status = _step_core(prev.to_array(), param_vector(p), eps, u, out)
    _raise_for(status, prev.t + 1)
    return EconomyState.from_array(out)


def params_hash(p: ModelParams) -> str:
    return hashlib.sha256(save(p).encode()).hexdigest()[:16]


@dataclass
class Trajectory:
    """Recorded periods (after burn-in) as a ``(horizon, len(FIELDS))`` array."""

    data: np.ndarray
    params: ModelParams
    seed: int
    burn_in: int
    cell_key: tuple[int, ...] = ()
    replica: int = 0
    before: EconomyState | None = None  # state just before the first recorded period
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, FIELDS.index(name)]

    def state(self, i: int) -> EconomyState:
        return EconomyState.from_array(self.data[i])

    @property
    def params_hash(self) -> str:
        return params_hash(self.params)

    def to_csv(self, dest: str | Path | IO[str]) -> None:
        cols = [FIELDS.index(c) for c in CSV_COLUMNS]
        block = self.data[:, cols]
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        if len(block):
            np.savetxt(buf, block, delimiter=",", fmt=["%d"] + ["%.17g"] * (len(cols) - 1))
        text = buf.getvalue()
        if isinstance(dest, (str, Path)):
            Path(dest).write_text(text)
        else:
            dest.write(text)


def read_trajectory_csv(source: str | Path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV, keyed by header name."""
    with open(source) as fh:
        header = fh.readline().strip().split(",")
        arr = np.loadtxt(fh, delimiter=",", ndmin=2) if header else np.empty((0, 0))
    if arr.size == 0:
        return {h: np.empty(0) for h in header}
    return {h: arr[:, i] for i, h in enumerate(header)}


def run(p: ModelParams, streams: ShockStreams | None = None, *, cell_key: tuple[int, ...] = (),
        replica: int = 0, init: EconomyState | None = None) -> Trajectory:
    """Simulate ``p.engine.burn_in`` discarded periods, then record ``p.engine.horizon``."""
    if streams is None:
        streams = ShockStreams.from_seed(p.engine.seed, cell_key, replica)
    init = init or initial_state(p)
    total = p.engine.burn_in + p.engine.horizon
    eps = streams.normals(total)
    us = streams.uniforms(total)
    records, before, status, fail = _run_core(init.to_array(), param_vector(p), eps, us,
                                             p.engine.burn_in, p.engine.horizon)
    _raise_for(status, fail)
    return Trajectory(records, p, p.engine.seed, p.engine.burn_in, tuple(cell_key), replica,
                      EconomyState.from_array(before),
                      {"params_hash": params_hash(p), "seed": p.engine.seed, "burn_in": p.engine.burn_in,
                       "cell_key": list(cell_key), "replica": replica})


def iterate(p: ModelParams, streams: ShockStreams, n: int, init: EconomyState | None = None
            ) -> Iterable[EconomyState]:
    """Step-by-step generator (slow path, for inspection and tests)."""
    state = init or initial_state(p)
    for _ in range(n):
        state = step(state, streams, p)
        yield state


def accounting_residuals(traj: Trajectory) -> dict[str, float]:
    """Worst-case relative residuals of the accounting identities over the recorded periods.

    ``budget_split``: consumption budget + capital inflow + bond purchase vs income.
    ``capital_law``: ``k_t - (1-delta) k_{t-1} - F_t (1-G_t) I_t`` relative to ``k_t``
    (``I_{t-1}`` in lagged mode).
    ``rent_bounds``: how far ``q`` strays outside ``[0, q_star]`` (0 when it never does).
    """
    p = traj.params
    if len(traj) == 0:
        return {"budget_split": 0.0, "capital_law": 0.0, "rent_bounds": 0.0}
    income, G, F, b = traj["income"], traj["G"], traj["F"], traj["b"]
    split = G * income + F * (1.0 - G) * income + b / (1.0 + p.r)
    budget = float(np.max(np.abs(split - income) / np.abs(income)))
    k = traj["k"]
    k_prev = np.concatenate(([traj.before.k], k[:-1]))
    if p.coupling_mode is CouplingMode.SIMULTANEOUS:
        inflow_income = income
    else:  # lagged: this period's investment comes out of last period's income
        inflow_income = np.concatenate(([traj.before.income], income[:-1]))
    law = k - (1.0 - p.delta) * k_prev - F * (1.0 - G) * inflow_income
    capital = float(np.max(np.abs(law) / np.abs(k)))
    q, q_star = traj["q"], traj["q_star"]
    bounds = float(max(0.0, -q.min(), np.max(q - q_star)))
    return {"budget_split": budget, "capital_law": capital, "rent_bounds": bounds}
