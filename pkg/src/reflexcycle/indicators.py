"""Crisis severities, phase labels, spell durations and histogram summaries."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams


class Phase(str, enum.Enum):
    LkLc = "LkLc"
    LkHc = "LkHc"
    HkLc = "HkLc"
    HkHc = "HkHc"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    permanent_c: bool
    permanent_k: bool


@dataclass(frozen=True)
class SpellStats:
    spells_low: np.ndarray  # complete runs with c < c0
    spells_high: np.ndarray  # complete runs with c >= c0
    truncated: np.ndarray  # lengths of runs touching either end of the record
    n_low_raw: int
    n_high_raw: int

    @property
    def t_low_mean(self) -> float | None:
        return float(self.spells_low.mean()) if len(self.spells_low) else None

    @property
    def t_high_mean(self) -> float | None:
        return float(self.spells_high.mean()) if len(self.spells_high) else None


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    edges: np.ndarray
    peaks: tuple[int, ...]  # bins of the modes that survive the mass rule
    bimodal: bool

    def to_csv(self) -> str:
        lines = ["bin_lo,bin_hi,count"]
        lines += [f"{float(lo)!r},{float(hi)!r},{int(c)}" for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]
        return "\n".join(lines) + "\n"


def _nonempty(x: np.ndarray, what: str):
    if x.size == 0:
        raise ValueError(f"{what}: empty trajectory")


def severity_c(c: np.ndarray, c0: float) -> float:
    c = np.asarray(c, dtype=float)
    _nonempty(c, "xi_c")
    return float(np.mean(np.where(c <= c0, 1.0 - c / c0, 0.0)))


def severity_k(k: np.ndarray, n: np.ndarray) -> float:
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    _nonempty(k, "xi_k")
    if np.any(n == 0):
        raise ValueError("xi_k: zero labour in trajectory")
    return float(np.mean(np.where(k <= n, 1.0 - k / n, 0.0)))


def xi_c(traj, c0: float) -> float:
    """Mean relative consumption shortfall below the confidence threshold."""
    return severity_c(traj["c"], c0)


def xi_k(traj) -> float:
    """Mean relative capital shortfall below labour."""
    return severity_k(traj["k"], traj["n"])


def classify_phase(xi_c_value: float, xi_k_value: float, threshold: float = 1e-2,
                   permanent: float = 0.99) -> PhaseLabel:
    for v in (xi_c_value, xi_k_value):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"severity must lie in [0, 1], got {v!r}")
    k = "H" if xi_k_value >= threshold else "L"
    c = "H" if xi_c_value >= threshold else "L"
    return PhaseLabel(Phase(f"{k}k{c}c"), xi_c_value > permanent, xi_k_value > permanent)


def runs(flags: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run-length encode a boolean series: (values, starts, lengths)."""
    flags = np.asarray(flags, dtype=bool)
    if flags.size == 0:
        return flags, np.empty(0, int), np.empty(0, int)
    change = np.flatnonzero(flags[1:] != flags[:-1]) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [flags.size])))
    return flags[starts], starts, lengths


def spell_stats(traj, c0: float) -> SpellStats:
    """Crisis (``c < c0``) and prosperity spells; runs touching either boundary are set aside."""
    c = np.asarray(traj["c"] if not isinstance(traj, np.ndarray) else traj, dtype=float)
    values, _, lengths = runs(c < c0)
    if len(lengths) == 0:
        empty = np.empty(0, int)
        return SpellStats(empty, empty, empty, 0, 0)
    interior = np.ones(len(lengths), bool)
    interior[0] = interior[-1] = False
    return SpellStats(
        spells_low=lengths[interior & values],
        spells_high=lengths[interior & ~values],
        truncated=lengths[~interior],
        n_low_raw=int(values.sum()),
        n_high_raw=int((~values).sum()),
    )


def _smooth(counts: np.ndarray) -> np.ndarray:
    padded = np.concatenate(([counts[0]], counts, [counts[-1]])).astype(float)
    return np.convolve(padded, np.ones(3) / 3.0, mode="valid")


def _local_maxima(s: np.ndarray) -> list[int]:
    out = []
    for i in range(len(s)):
        left = s[i - 1] if i > 0 else -np.inf
        right = s[i + 1] if i < len(s) - 1 else -np.inf
        if s[i] > left and s[i] >= right and s[i] > 0:
            out.append(i)
    return out


def _basin_masses(counts: np.ndarray, s: np.ndarray, peaks: list[int]) -> list[float]:
    bounds = [0]
    for a, b in zip(peaks[:-1], peaks[1:]):
        bounds.append(a + int(np.argmin(s[a:b + 1])))
    bounds.append(len(counts))
    return [float(counts[lo:hi].sum()) for lo, hi in zip(bounds[:-1], bounds[1:])]


def histogram(series, bins: int = 50, min_mass: float = 0.05) -> Histogram:
    """Uniform-bin histogram over ``[min, max]`` with a bimodality flag.

    Modes are local maxima of the 3-bin moving average.  Each mode owns the
    counts between the valleys either side of it; modes owning less than
    ``min_mass`` of the total are merged into a neighbour, smallest first.
    The series is bimodal when at least two modes survive.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    x = np.asarray(series, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        raise ValueError("histogram of an empty series")
    counts, edges = np.histogram(x, bins=bins)
    s = _smooth(counts)
    peaks = _local_maxima(s)
    total = counts.sum()
    while len(peaks) > 1:
        masses = _basin_masses(counts, s, peaks)
        worst = int(np.argmin(masses))
        if masses[worst] >= min_mass * total:
            break
        peaks.pop(worst)
    return Histogram(counts, edges, tuple(peaks), len(peaks) >= 2)


@dataclass
class CrisisReport:
    xi_c: float
    xi_k: float
    mean_sharpe: float
    spells: SpellStats
    hist_c: Histogram
    hist_n: Histogram
    hist_S: Histogram
    label: PhaseLabel
    extras: dict = field(default_factory=dict)

    @property
    def phase(self) -> Phase:
        return self.label.phase

    @property
    def t_low_mean(self) -> float | None:
        return self.spells.t_low_mean

    @property
    def t_high_mean(self) -> float | None:
        return self.spells.t_high_mean

    def summary(self) -> dict:
        return {
            "xi_c": self.xi_c,
            "xi_k": self.xi_k,
            "phase": self.phase.value,
            "mean_sharpe": self.mean_sharpe,
            "t_low_mean": self.t_low_mean,
            "t_high_mean": self.t_high_mean,
            "n_spells": int(len(self.spells.spells_low)),
            "bimodal_c": self.hist_c.bimodal,
            "bimodal_S": self.hist_S.bimodal,
            "permanent_c": self.label.permanent_c,
            "permanent_k": self.label.permanent_k,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def crisis_report(traj, p: ModelParams | None = None) -> CrisisReport:
    """All indicators for one trajectory; ``p`` defaults to the trajectory's own parameters."""
    p = p or traj.params
    an = p.analysis
    c, k, n, S = (np.asarray(traj[f], dtype=float) for f in ("c", "k", "n", "S"))
    xc = severity_c(c, p.c0)
    xk = severity_k(k, n)
    return CrisisReport(
        xi_c=xc,
        xi_k=xk,
        mean_sharpe=float(S.mean()),
        spells=spell_stats(c, p.c0),
        hist_c=histogram(c, an.hist_bins),
        hist_n=histogram(n, an.hist_bins),
        hist_S=histogram(S, an.hist_bins),
        label=classify_phase(xc, xk, an.phase_threshold, an.permanent_threshold),
    )


def log10_floor(x: float, floor: float = -12.0) -> float:
    """``log10`` with zero (or anything below ``10**floor``) mapped to ``floor``."""
    return floor if x <= 10.0 ** floor else math.log10(x)
