"""Fixed-capacity sliding window over time-ordered samples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..errors import OrderingError


@dataclass(frozen=True)
class SlidingWindow:
    """Keeps the most recent `capacity` samples, ordered by timestamp.

    Immutable: :meth:`push` returns a new window. Samples must expose a
    float `t` attribute; pushes with t earlier than the current tail are
    rejected (ties are allowed).
    """

    capacity: int
    items: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")
        if len(self.items) > self.capacity:
            raise ValueError("window holds more items than its capacity")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def is_full(self) -> bool:
        return len(self.items) == self.capacity

    def push(self, sample: Any) -> "SlidingWindow":
        """Append `sample`, evicting the oldest item when over capacity."""
        if self.items and sample.t < self.items[-1].t:
            raise OrderingError(
                f"sample at t={sample.t} is earlier than window tail t={self.items[-1].t}"
            )
        items = self.items + (sample,)
        if len(items) > self.capacity:
            items = items[1:]
        return SlidingWindow(self.capacity, items)


def window_push(window: SlidingWindow, sample: Any) -> SlidingWindow:
    """Functional alias for :meth:`SlidingWindow.push`."""
    return window.push(sample)
