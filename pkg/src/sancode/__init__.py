"""Blocking and saturation analysis for coded storage-area-network layouts."""

__version__ = "0.1.0"

from .queueing import LossSystem, erlang_b, erlang_b_gamma, erlang_b_recurrence, erlang_b_sum
from .sr_blocking import SrConfig, ncs_blocking, ucs_blocking
from .mr_chain import MrConfig, build_state_space, classical_saturation, solve_steady_state
from .mr_sim import SimEstimate, SimPlan, simulate
from .allocator import AllocationProblem, optimize, per_type_blocking

__all__ = [
    "LossSystem", "erlang_b", "erlang_b_gamma", "erlang_b_recurrence", "erlang_b_sum",
    "SrConfig", "ncs_blocking", "ucs_blocking",
    "MrConfig", "build_state_space", "classical_saturation", "solve_steady_state",
    "SimEstimate", "SimPlan", "simulate",
    "AllocationProblem", "optimize", "per_type_blocking",
]
