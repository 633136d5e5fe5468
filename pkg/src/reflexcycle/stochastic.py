"""Productivity shocks and capital-return risk, drawn from two seeded streams.

Both streams are ``numpy.random.Generator`` instances backed by the Philox
counter-based bit generator.  Each is seeded through ``SeedSequence`` with
``entropy=master_seed`` and ``spawn_key=(cell_key..., replica, stream_tag)``,
so a stream is a pure function of those integers and never depends on how
many other streams exist or in what order they are used.

Normal variates come from ``Generator.standard_normal`` (numpy's ziggurat);
risk uses the inverse CDF ``xi = U**(1/a)`` with ``U = 1 - Generator.random()``
in ``(0, 1]``.  Drawing an array of ``n`` values consumes the stream exactly
like ``n`` scalar draws, which is what lets :func:`reflexcycle.dynamics.run`
pre-sample whole horizons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import ModelParams

PRODUCTIVITY_TAG = 0
RISK_TAG = 1


def _stream(master_seed: int, key: tuple[int, ...], tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(*key, tag))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ShockStreams:
    productivity: np.random.Generator
    risk: np.random.Generator

    @classmethod
    def from_seed(cls, master_seed: int, cell_key: tuple[int, ...] = (), replica: int = 0) -> "ShockStreams":
        key = (*cell_key, replica)
        return cls(_stream(master_seed, key, PRODUCTIVITY_TAG), _stream(master_seed, key, RISK_TAG))

    def normals(self, n: int) -> np.ndarray:
        return self.productivity.standard_normal(n)

    def uniforms(self, n: int) -> np.ndarray:
        """Uniform draws on (0, 1]."""
        return 1.0 - self.risk.random(n)


@dataclass(frozen=True)
class ProductivityState:
    frak_z: float
    z: float


@njit(cache=True)
def ar1_update(frak_prev, eta, sigma_z, eps):
    return eta * frak_prev + math.sqrt(1.0 - eta * eta) * sigma_z * eps


@njit(cache=True)
def risk_from_uniform(u, a):
    if math.isinf(a):
        return 1.0
    return u ** (1.0 / a)


def step_productivity(state: ProductivityState, p: ModelParams, stream=None, *, eps: float | None = None
                      ) -> ProductivityState:
    """Advance the log-productivity AR(1) by one period.

    ``eps`` is a standard normal; if omitted it is drawn from ``stream``.
    """
    if eps is None:
        eps = float(stream.standard_normal())
    frak = ar1_update(state.frak_z, p.eta, p.sigma_z, eps)
    return ProductivityState(frak, p.z0 * math.exp(frak))


def draw_risk(p: ModelParams, stream=None, *, u: float | None = None) -> float:
    """Fraction of the promised rent actually paid, density ``a xi**(a-1)`` on [0, 1]."""
    if u is None:
        u = 1.0 - float(stream.random())
    return risk_from_uniform(u, p.a)


def risk_mean(a: float) -> float:
    return a / (1.0 + a)


def risk_variance(a: float) -> float:
    return a / ((2.0 + a) * (1.0 + a) ** 2)
