"""Behavioural business-cycle model with self-reflexive confidence and capital investment."""

from .behavior import (ConfidenceState, SentimentDecision, SharpeState, confidence, consumption_rate,
                       sentiment_and_allocation, update_sharpe)
from .dynamics import EconomyState, SimulationError, Trajectory, initial_state, run, step
from .equilibrium import EquilibriumError, EquilibriumOutcome, solve_ces, solve_leontief, utility
from .indicators import CrisisReport, Phase, classify_phase, crisis_report, histogram, spell_stats, xi_c, xi_k
from .params import ModelParams, defaults, derived_timescales, load, save, with_overrides
from .stochastic import ProductivityState, ShockStreams, draw_risk, step_productivity
from .sweep import PhaseCell, SweepPlan, run_sweep

__version__ = "0.1.0"
