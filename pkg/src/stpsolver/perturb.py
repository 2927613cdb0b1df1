"""Randomized cost perturbation and its per-pass decay."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .core import MAX_COST, Instance

EDGE = "edge"
VERTEX = "vertex"
Q_RANGE = (1.25, 2.00)


@dataclass(frozen=True)
class PerturbationProfile:
    kind: str                    # EDGE or VERTEX
    q: float                     # maximum perturbation
    factors: tuple[float, ...]   # one per edge or per vertex
    tau: float


def tail_threshold(n: int) -> float:
    return math.log2(n) / n if n > 1 else 0.0


def draw_factor(rho: float, q: float, tau: float) -> float:
    """1 + rho*q normally; rho/tau for the small heavy-tail fraction rho < tau."""
    if rho >= tau:
        return 1.0 + rho * q
    return rho / tau


def sample_profile(instance: Instance, rng: random.Random) -> PerturbationProfile:
    kind = EDGE if rng.random() < 0.5 else VERTEX
    q = rng.uniform(*Q_RANGE)
    tau = tail_threshold(instance.n)
    count = instance.m if kind == EDGE else instance.n
    factors = tuple(draw_factor(rng.random(), q, tau) for _ in range(count))
    return PerturbationProfile(kind, q, factors, tau)


def round_half_up(x: float) -> int:
    return min(int(math.floor(x + 0.5)), MAX_COST)


def apply(profile: PerturbationProfile, instance: Instance) -> list[int]:
    f = profile.factors
    if profile.kind == EDGE:
        return [round_half_up(c * f[e]) for e, c in enumerate(instance.costs)]
    return [round_half_up(c * (f[u] + f[v]) / 2)
            for u, v, c in zip(instance.tails, instance.heads, instance.costs)]


def decay(view: Sequence[int], instance: Instance, alpha: float = 0.5) -> list[int]:
    """Move every cost a fraction ``1 - alpha`` of the way back to the original."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly between 0 and 1")
    return [round_half_up(alpha * p + (1 - alpha) * c) for p, c in zip(view, instance.costs)]


@dataclass
class DecaySchedule:
    """Perturbed costs for the first ``passes`` local-search passes."""

    view: list[int]
    alpha: float = 0.5
    passes: int = 3
