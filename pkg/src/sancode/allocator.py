"""Drive-split search minimizing P_b1 + c * P_b2 for a fixed drive count."""

from __future__ import annotations

from dataclasses import dataclass

from .mr_chain import MrConfig, classical_blocking, solve


@dataclass(frozen=True)
class AllocationProblem:
    total_drives: int
    cost_weight: float = 1.0
    lambda_ratio: float = 5.0  # lambda1 / lambda2
    total_load: float = 6.0  # (lambda1 + lambda2) / mu
    layer_slots: int = 2
    scheme: str = "crs"
    mu: float = 1.0

    def __post_init__(self) -> None:
        if self.total_drives < 2:
            raise ValueError("total_drives must be >= 2")
        if not self.cost_weight > 0:
            raise ValueError("cost_weight must be > 0")
        if not self.lambda_ratio > 0 or not self.total_load > 0:
            raise ValueError("lambda_ratio and total_load must be > 0")

    @property
    def rates(self) -> tuple[float, float]:
        lam = self.total_load * self.mu
        lam2 = lam / (1.0 + self.lambda_ratio)
        return lam - lam2, lam2

    def feasible_m2(self) -> range:
        m = self.total_drives
        if self.scheme == "urs":
            # every refinement slot must be pairable with a base slot
            return range(1, m // 2 + 1)
        return range(1, m)

    def config(self, m2: int) -> MrConfig:
        lam1, lam2 = self.rates
        return MrConfig(
            base_drives=self.total_drives - m2,
            refinement_drives=m2,
            layer_slots=self.layer_slots,
            lambda1=lam1,
            lambda2=lam2,
            mu=self.mu,
            scheme=self.scheme,
        )


@dataclass(frozen=True)
class Candidate:
    m2: int
    cost: float
    p_b1: float
    p_b2: float
    p_s: float


@dataclass(frozen=True)
class AllocationResult:
    best_m2: int
    cost: float
    per_type_blocking: tuple[float, float]
    saturation_at_optimum: float
    candidates: tuple[Candidate, ...] = ()


def per_type_blocking(cfg: MrConfig) -> tuple[float, float]:
    """(P_b1, P_b2): steady-state mass where each arrival type is refused.

    For URS/CRS this uses the exact chain (PASTA); the classical scheme uses
    its two independent Erlang-B factors.
    """
    if cfg.scheme == "classical":
        return classical_blocking(cfg)
    steady = solve(cfg)
    return steady.type1_blocking, steady.type2_blocking


def evaluate(problem: AllocationProblem, m2: int) -> Candidate:
    cfg = problem.config(m2)
    if cfg.scheme == "classical":
        b1, b2 = classical_blocking(cfg)
        ps = b1 * b2
    else:
        steady = solve(cfg)
        b1, b2 = steady.type1_blocking, steady.type2_blocking
        ps = steady.saturation_probability
    return Candidate(m2, b1 + problem.cost_weight * b2, b1, b2, ps)


def optimize(problem: AllocationProblem) -> AllocationResult:
    """Exhaustive scan over integer m2; ties go to the smallest m2."""
    candidates = tuple(evaluate(problem, m2) for m2 in problem.feasible_m2())
    if not candidates:
        raise ValueError("no feasible m2 for this problem")
    best = min(candidates, key=lambda c: (c.cost, c.m2))
    return AllocationResult(best.m2, best.cost, (best.p_b1, best.p_b2), best.p_s, candidates)
