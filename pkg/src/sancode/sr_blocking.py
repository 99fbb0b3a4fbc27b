"""Blocking probability of a striped single-resolution file, uncoded vs coded.

Each of the ``s`` stripe sets of a file is served by an independent loss
queue whose servers are the bandwidth slots of every drive holding a copy of
that stripe set. The file is blocked when any stripe-set queue is full.
Network coding merges ``r`` stripe sets of a block window into one queue with
``r`` times the servers and ``r`` times the offered load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .queueing import erlang_b


@dataclass(frozen=True)
class SrConfig:
    chunks: int
    stripe: int
    copies: int
    slots_per_drive: int
    load: float
    generation: int = 1

    def __post_init__(self) -> None:
        for name in ("chunks", "stripe", "copies", "slots_per_drive", "generation"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.chunks < self.stripe:
            raise ValueError(f"chunks ({self.chunks}) must be >= stripe ({self.stripe})")
        if self.stripe % self.generation:
            raise ValueError(
                f"generation r={self.generation} must divide stripe s={self.stripe}"
            )
        if not (math.isfinite(self.load) and self.load > 0):
            raise ValueError(f"load must be a positive finite number, got {self.load!r}")

    def with_(self, **changes) -> "SrConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class StripeSetRates:
    long_sets: int
    short_sets: int
    long_rate: float
    short_rate: float


def slots_uncoded(cfg: SrConfig) -> int:
    """Servers per stripe-set queue without coding: s * slots * W."""
    return cfg.stripe * cfg.slots_per_drive * cfg.copies


def slots_coded(cfg: SrConfig) -> int:
    return cfg.generation * slots_uncoded(cfg)


def stripe_rates(cfg: SrConfig) -> StripeSetRates:
    """Split the stripe sets into long (ceil(T/s) chunks) and short ones."""
    short_len, n_long = divmod(cfg.chunks, cfg.stripe)
    long_len = short_len + (1 if n_long else 0)
    return StripeSetRates(
        long_sets=n_long,
        short_sets=cfg.stripe - n_long,
        long_rate=cfg.load * long_len,
        short_rate=cfg.load * short_len,
    )


def _file_blocking(servers: int, groups: list[tuple[int, float]]) -> float:
    # 1 - prod (1 - B)^n, accumulated as -expm1(sum n*log1p(-B)) so that
    # results near 1e-12 keep their relative precision.
    log_avail = 0.0
    for count, rate in groups:
        if count == 0:
            continue
        b = erlang_b(servers, rate)
        if b >= 1.0:
            return 1.0
        log_avail += count * math.log1p(-b)
    return -math.expm1(log_avail)


def ucs_blocking(cfg: SrConfig) -> float:
    rates = stripe_rates(cfg)
    return _file_blocking(
        slots_uncoded(cfg),
        [(rates.long_sets, rates.long_rate), (rates.short_sets, rates.short_rate)],
    )


def ncs_blocking(cfg: SrConfig) -> float:
    """Blocking probability when each block window of r chunks is coded.

    Requires r | (T mod s) so every merged queue covers stripe sets of a
    single length; callers wanting T=150 with s=8 should round T up to a
    multiple of s (see :func:`effective_chunks`).
    """
    r = cfg.generation
    rates = stripe_rates(cfg)
    if rates.long_sets % r:
        raise ValueError(
            f"generation r={r} must divide T mod s = {rates.long_sets} "
            f"(T={cfg.chunks}, s={cfg.stripe})"
        )
    return _file_blocking(
        slots_coded(cfg),
        [
            (rates.long_sets // r, r * rates.long_rate),
            (rates.short_sets // r, r * rates.short_rate),
        ],
    )


def blocking(cfg: SrConfig, scheme: str) -> float:
    if scheme == "ucs":
        return ucs_blocking(cfg)
    if scheme == "ncs":
        return ncs_blocking(cfg)
    raise ValueError(f"unknown single-resolution scheme {scheme!r}")


def effective_chunks(chunks: int, stripe: int, generation: int = 1) -> int:
    """Chunk count usable by the coded model.

    Returns ``chunks`` unchanged when r divides T mod s, otherwise T rounded up
    to the next multiple of s (150 -> 152 for s=8, r=8).
    """
    if (chunks % stripe) % generation == 0:
        return chunks
    return -(-chunks // stripe) * stripe


def min_copies(cfg: SrConfig, scheme: str, target: float, w_max: int = 10_000) -> int:
    """Smallest W with blocking probability <= target."""
    for w in range(1, w_max + 1):
        if blocking(cfg.with_(copies=w), scheme) <= target:
            return w
    raise ValueError(f"no W <= {w_max} reaches blocking target {target}")
