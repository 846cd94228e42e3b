"""Adaptive batch reward: pass-rate-weighted blend of validator and semantics.

reward_i = (1 - pr) * 1[passed_i] + pr * semantic_i, where pr is the pass
rate of the batch being rewarded.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DslError


class EmptyBatchError(DslError):
    pass


@dataclass(frozen=True)
class BatchItem:
    id: str
    passed: bool
    semantic: float

    def __post_init__(self):
        if not 0.0 <= self.semantic <= 1.0:
            raise ValueError(f"semantic score out of range: {self.semantic}")


@dataclass(frozen=True)
class RewardBatch:
    items: tuple[BatchItem, ...]
    pass_rate: float
    rewards: tuple[float, ...]


def compute_rewards(items) -> RewardBatch:
    items = tuple(items)
    if not items:
        raise EmptyBatchError("cannot compute rewards for an empty batch")
    pass_rate = sum(1 for it in items if it.passed) / len(items)
    rewards = tuple(
        (1.0 - pass_rate) * (1.0 if it.passed else 0.0) + pass_rate * it.semantic
        for it in items
    )
    return RewardBatch(items=items, pass_rate=pass_rate, rewards=rewards)
