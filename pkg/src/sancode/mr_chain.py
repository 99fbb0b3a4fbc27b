"""Exact analysis of the two-layer multi-resolution schemes.

State (i, j) counts Type 1 (base layer only) and Type 2 (base + refinement)
users in service. Admission is decided only by aggregate bandwidth
constraints (perfect scheduling), so each scheme reduces to a boundary
function M_i giving the largest admissible j for a given i.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .queueing import erlang_b

SCHEMES = ("classical", "urs", "crs")
DEFAULT_STATE_CAP = 1_000_000


@dataclass(frozen=True)
class MrConfig:
    base_drives: int
    refinement_drives: int
    layer_slots: int
    lambda1: float
    lambda2: float
    mu: float = 1.0
    scheme: str = "urs"
    # Type 2 departures at j*mu/2 instead of j*mu (URS/CRS chains only)
    type2_half_rate: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.base_drives < 1 or self.layer_slots < 1:
            raise ValueError("base_drives and layer_slots must be >= 1")
        if self.refinement_drives < 0:
            raise ValueError("refinement_drives must be >= 0")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("arrival rates must be >= 0")
        if not self.mu > 0:
            raise ValueError("mu must be > 0")

    def with_(self, **changes) -> "MrConfig":
        return replace(self, **changes)

    @property
    def max_type1(self) -> int:
        """K1: the most Type 1 users the base drives can hold."""
        return self.base_drives * self.layer_slots

    @property
    def total_slots(self) -> int:
        return (self.base_drives + self.refinement_drives) * self.layer_slots


def classical_saturation(cfg: MrConfig) -> float:
    """Saturation probability of the non-resolution-aware layout.

    Product of two independent loss queues: base-only drives serving Type 1
    at load lambda1/mu, dual-layer drives serving Type 2 at load 2*lambda2/mu
    (Type 2 files are twice as large).
    """
    b1, b2 = classical_blocking(cfg)
    return b1 * b2


def classical_blocking(cfg: MrConfig) -> tuple[float, float]:
    b1 = erlang_b(cfg.base_drives * cfg.layer_slots, cfg.lambda1 / cfg.mu)
    b2 = erlang_b(cfg.refinement_drives * cfg.layer_slots, 2.0 * cfg.lambda2 / cfg.mu)
    return b1, b2


def _check_i(cfg: MrConfig, i: int) -> None:
    if not 0 <= i <= cfg.max_type1:
        raise ValueError(f"i={i} outside [0, K1={cfg.max_type1}]")


def boundary_urs(cfg: MrConfig, i: int) -> int:
    """Largest j with (i+j) <= m1*S, j <= m2*S and (i+2j) <= (m1+m2)*S."""
    _check_i(cfg, i)
    sl = cfg.layer_slots
    return min(
        cfg.refinement_drives * sl,
        cfg.base_drives * sl - i,
        (cfg.total_slots - i) // 2,
    )


def boundary_crs(cfg: MrConfig, i: int) -> int:
    """Largest j with j <= m2*S and (i+2j) <= (m1+m2)*S (i <= m1*S assumed).

    Coded drives can supply either degree of freedom of a Type 2 request, so
    unlike URS there is no i+j coupling on the base drives.
    """
    _check_i(cfg, i)
    return min(cfg.refinement_drives * cfg.layer_slots, (cfg.total_slots - i) // 2)


def boundary_urs_closed_form(cfg: MrConfig, i: int) -> int:
    """Displayed min-form of the URS boundary; meaningful for even m1+m2."""
    m1, m2, sl = cfg.base_drives, cfg.refinement_drives, cfg.layer_slots
    return min(m2 * sl, m1 * sl - i, (m1 + m2) * sl // 2 - (i + 1) // 2)


def boundary_crs_closed_form(cfg: MrConfig, i: int) -> int:
    """Displayed min-form of the CRS boundary, taken literally.

    Includes an m1*S cap on j that the raw constraints do not impose, so it
    disagrees with :func:`boundary_crs` whenever m1 < m2.
    """
    m1, m2, sl = cfg.base_drives, cfg.refinement_drives, cfg.layer_slots
    return min(m2 * sl, m1 * sl, (m1 + m2) * sl // 2 - (i + 1) // 2)


def boundary(cfg: MrConfig, i: int) -> int:
    if cfg.scheme == "urs":
        return boundary_urs(cfg, i)
    if cfg.scheme == "crs":
        return boundary_crs(cfg, i)
    raise ValueError("the classical scheme has no joint state space")


class StateCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class StateSpace:
    states: tuple[tuple[int, int], ...]
    boundary: tuple[int, ...]  # boundary[i] = M_i
    saturated: np.ndarray  # bool mask aligned with states
    global_max_type1: int

    def __contains__(self, state) -> bool:
        i, j = state
        return 0 <= i <= self.global_max_type1 and 0 <= j <= self.boundary[i]

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {s: k for k, s in enumerate(self.states)}

    @cached_property
    def type1_blocked(self) -> np.ndarray:
        return np.array([(i + 1, j) not in self for i, j in self.states])

    @cached_property
    def type2_blocked(self) -> np.ndarray:
        return np.array([(i, j + 1) not in self for i, j in self.states])

    @property
    def saturation_set(self) -> list[tuple[int, int]]:
        return [s for s, sat in zip(self.states, self.saturated) if sat]

    def __len__(self) -> int:
        return len(self.states)


def build_state_space(cfg: MrConfig, state_cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    k1 = cfg.max_type1
    bound = tuple(boundary(cfg, i) for i in range(k1 + 1))
    n = sum(m + 1 for m in bound)
    if n > state_cap:
        raise StateCapExceeded(f"{n} states exceeds cap {state_cap}")
    states = tuple((i, j) for i in range(k1 + 1) for j in range(bound[i] + 1))

    def feasible(i: int, j: int) -> bool:
        return i <= k1 and j <= bound[i]

    saturated = np.array(
        [not feasible(i + 1, j) and not feasible(i, j + 1) for i, j in states]
    )
    return StateSpace(states, bound, saturated, k1)


def generator_matrix(space: StateSpace, cfg: MrConfig) -> sparse.csr_matrix:
    """Sparse CTMC generator Q over ``space.states``."""
    idx = space.index
    mu2 = cfg.mu / 2 if cfg.type2_half_rate else cfg.mu
    rows, cols, vals = [], [], []
    for k, (i, j) in enumerate(space.states):
        for target, rate in (
            ((i + 1, j), cfg.lambda1),
            ((i, j + 1), cfg.lambda2),
            ((i - 1, j), i * cfg.mu),
            ((i, j - 1), j * mu2),
        ):
            if rate > 0 and target in idx:
                rows.append(k)
                cols.append(idx[target])
                vals.append(rate)
    n = len(space)
    q = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return (q - sparse.diags(np.asarray(q.sum(axis=1)).ravel())).tocsr()


@dataclass(frozen=True, eq=False)
class SteadyState:
    space: StateSpace
    probabilities: np.ndarray

    @property
    def saturation_probability(self) -> float:
        return float(self.probabilities[self.space.saturated].sum())

    @property
    def type1_blocking(self) -> float:
        return float(self.probabilities[self.space.type1_blocked].sum())

    @property
    def type2_blocking(self) -> float:
        return float(self.probabilities[self.space.type2_blocked].sum())

    def prob(self, i: int, j: int) -> float:
        k = self.space.index.get((i, j))
        return 0.0 if k is None else float(self.probabilities[k])

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {s: float(p) for s, p in zip(self.space.states, self.probabilities)}


class SingularChainError(RuntimeError):
    pass


def solve_steady_state(space: StateSpace, cfg: MrConfig) -> SteadyState:
    """Solve pi Q = 0, sum(pi) = 1 by sparse LU.

    The last balance equation is replaced by the normalization row; with a
    single recurrent class this leaves a nonsingular system.
    """
    q = generator_matrix(space, cfg)
    n = q.shape[0]
    if n == 1:
        return SteadyState(space, np.ones(1))
    a = q.T.tolil()
    a[n - 1, :] = np.ones(n)
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", sparse_linalg.MatrixRankWarning)
        try:
            pi = sparse_linalg.spsolve(a.tocsc(), rhs)
        except (RuntimeError, sparse_linalg.MatrixRankWarning) as exc:
            raise SingularChainError(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularChainError("steady-state solve produced non-finite values")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return SteadyState(space, pi)


def solve(cfg: MrConfig, state_cap: int = DEFAULT_STATE_CAP) -> SteadyState:
    return solve_steady_state(build_state_space(cfg, state_cap), cfg)


def saturation_probability(cfg: MrConfig) -> float:
    if cfg.scheme == "classical":
        return classical_saturation(cfg)
    return solve(cfg).saturation_probability
