"""Erlang-B loss formula in three equivalent forms.

``erlang_b`` (the recurrence) is the production path used everywhere else in
the package. The term-sum and incomplete-Gamma forms are kept as cross-check
oracles; each has a narrower validity range, documented on the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral

from scipy import special


@dataclass(frozen=True)
class LossSystem:
    """An M/G/K/K loss system: ``servers`` units offered ``load`` Erlangs."""

    servers: int
    load: float

    def __post_init__(self) -> None:
        if isinstance(self.servers, bool) or not isinstance(self.servers, Integral):
            raise TypeError(f"servers must be an integer, got {self.servers!r}")
        if self.servers < 0:
            raise ValueError(f"servers must be >= 0, got {self.servers}")
        load = float(self.load)
        if not math.isfinite(load) or load < 0:
            raise ValueError(f"load must be finite and >= 0, got {self.load!r}")
        object.__setattr__(self, "servers", int(self.servers))
        object.__setattr__(self, "load", load)


def _coerce(sys_or_k, load=None) -> LossSystem:
    if isinstance(sys_or_k, LossSystem):
        return sys_or_k
    return LossSystem(sys_or_k, load)


def erlang_b_recurrence(sys_or_k: LossSystem | int, load: float | None = None) -> float:
    """Blocking probability via B(k) = rho*B(k-1) / (k + rho*B(k-1)).

    O(K), never overflows, and is accurate for K well past 10**5.
    Accepts either a :class:`LossSystem` or ``(servers, load)``.
    """
    sys = _coerce(sys_or_k, load)
    rho = sys.load
    b = 1.0
    for k in range(1, sys.servers + 1):
        rb = rho * b
        b = rb / (k + rb)
    return b


erlang_b = erlang_b_recurrence


def erlang_b_sum(sys_or_k: LossSystem | int, load: float | None = None) -> float:
    """Blocking probability as (rho^K/K!) / sum_{i<=K} rho^i/i!.

    Terms are built incrementally (t_i = t_{i-1} * rho / i) rather than from
    factorials. Valid while the largest term stays finite in double precision,
    roughly rho^K/K! < 1e308; raises OverflowError beyond that.
    """
    sys = _coerce(sys_or_k, load)
    rho = sys.load
    term = 1.0
    terms = [term]
    for i in range(1, sys.servers + 1):
        term = term * rho / i
        if math.isinf(term):
            raise OverflowError(
                f"term-sum Erlang-B overflows at i={i} (K={sys.servers}, rho={rho})"
            )
        terms.append(term)
    return terms[-1] / math.fsum(terms)


def erlang_b_gamma(sys_or_k: LossSystem | int, load: float | None = None) -> float:
    """Blocking probability as rho^K / (e^rho * Gamma(1+K, rho)), in log domain.

    Gamma(1+K, rho) is the upper incomplete Gamma function, obtained as
    ``gammaincc(1+K, rho) * K!``. Raises FloatingPointError if the regularized
    tail underflows (rho far above K, e.g. rho > ~700 with K small).
    """
    sys = _coerce(sys_or_k, load)
    k, rho = sys.servers, sys.load
    if k == 0:
        return 1.0
    if rho == 0.0:
        return 0.0
    q = special.gammaincc(k + 1, rho)
    if q <= 0.0:
        raise FloatingPointError(
            f"regularized upper Gamma underflows for K={k}, rho={rho}"
        )
    log_upper_gamma = math.log(q) + special.gammaln(k + 1)
    log_b = k * math.log(rho) - rho - log_upper_gamma
    return min(1.0, math.exp(log_b))
