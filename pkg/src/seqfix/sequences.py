"""Eventually constant real sequences with exact finite arithmetic.

Every sequence handled by this package is a bounded sequence of reals that
is constant from some index on, stored as an explicit prefix plus the
constant tail. This class is closed under prepending a value (the
structural step of the lifted iteration), so solver iterates stay exactly
representable, and distances against such sequences reduce to finite
computations plus closed-form tails.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass


def ensure_finite(value: float, what: str = "value") -> float:
    """Coerce to float, rejecting NaN and infinities."""
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class BoundedSeq:
    """A real sequence equal to ``tail`` from index ``len(prefix)`` on.

    Instances are canonical: trailing prefix entries equal to the tail are
    trimmed at construction. Two instances therefore describe the same
    sequence exactly when they compare equal, which makes pointwise
    equality of sequences decidable via ``==``.
    """

    prefix: tuple[float, ...] = ()
    tail: float = 0.0

    def __post_init__(self) -> None:
        entries = tuple(ensure_finite(v, "sequence entry") for v in self.prefix)
        tail = ensure_finite(self.tail, "tail")
        n = len(entries)
        while n > 0 and entries[n - 1] == tail:
            n -= 1
        object.__setattr__(self, "prefix", entries[:n])
        object.__setattr__(self, "tail", tail)

    @classmethod
    def constant(cls, value: float) -> BoundedSeq:
        """The sequence (value, value, value, ...)."""
        return cls((), value)

    def at(self, n: int) -> float:
        """Coordinate at index ``n`` (indices start at 0)."""
        if n < 0:
            raise ValueError("sequence index must be nonnegative")
        return self.prefix[n] if n < len(self.prefix) else self.tail

    def head(self, n: int) -> tuple[float, ...]:
        """The first ``n`` coordinates."""
        return tuple(self.at(i) for i in range(n))

    def prepend(self, value: float) -> BoundedSeq:
        """New sequence with ``value`` at index 0 and everything shifted right."""
        return BoundedSeq((value,) + self.prefix, self.tail)

    def values(self) -> tuple[float, ...]:
        """Every value the sequence takes (prefix entries plus the tail)."""
        return self.prefix + (self.tail,)

    def map_values(self, fn: Callable[[float], float]) -> BoundedSeq:
        """Apply ``fn`` coordinatewise, to prefix entries and tail alike."""
        return BoundedSeq(tuple(fn(v) for v in self.prefix), fn(self.tail))
