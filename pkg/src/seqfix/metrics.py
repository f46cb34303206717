"""Weighted distances on eventually constant sequences, evaluated exactly.

Two families are provided: the weighted supremum distance
``sup_n a_n |x_n - y_n|`` and the weighted power distance
``(sum_n a_n |x_n - y_n|^p)^(1/p)``. With head-plus-geometric weight
sequences both close form: a finite max or sum over the joint prefix plus
a geometric tail term. The geometric special case (weights ``q**n``) is
what the contraction certificates are built on.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .sequences import BoundedSeq, ensure_finite


@dataclass(frozen=True)
class WeightSeq:
    """Weights ``a_n``: an explicit head continued geometrically by ``ratio``.

    For ``n >= len(head)`` the weight is
    ``head[-1] * ratio**(n - len(head) + 1)`` (``ratio**n`` when the head is
    empty). Construction only checks finiteness; whether the induced
    distances are metrics is decided by :func:`validate_sup_weights` and
    :func:`validate_p_weights`.
    """

    head: tuple[float, ...] = ()
    ratio: float = 1.0

    def __post_init__(self) -> None:
        entries = tuple(ensure_finite(v, "weight") for v in self.head)
        object.__setattr__(self, "head", entries)
        object.__setattr__(self, "ratio", ensure_finite(self.ratio, "weight ratio"))

    @classmethod
    def geometric(cls, ratio: float) -> WeightSeq:
        """The weights (1, ratio, ratio**2, ...)."""
        return cls((), ratio)

    def at(self, n: int) -> float:
        """The weight ``a_n``."""
        if n < 0:
            raise ValueError("weight index must be nonnegative")
        if n < len(self.head):
            return self.head[n]
        if not self.head:
            return self.ratio**n
        return self.head[-1] * self.ratio ** (n - len(self.head) + 1)


def validate_sup_weights(w: WeightSeq) -> bool:
    """True iff the weighted sup distance over ``w`` is a metric.

    Requires every weight positive and the whole sequence bounded, which
    for the head-plus-geometric form means positive head entries and a
    ratio in (0, 1].
    """
    return all(a > 0.0 for a in w.head) and 0.0 < w.ratio <= 1.0


def validate_p_weights(w: WeightSeq) -> bool:
    """True iff the weighted power distance over ``w`` is a metric.

    Positivity plus summability; the geometric tail must decay strictly
    (ratio < 1).
    """
    return all(a > 0.0 for a in w.head) and 0.0 < w.ratio < 1.0


def base_dist(x: float, y: float) -> float:
    """Distance |x - y| on the underlying space (the real line)."""
    return abs(ensure_finite(x, "point") - ensure_finite(y, "point"))


def dist_max(u: Sequence[float], v: Sequence[float]) -> float:
    """Maximum coordinate distance between two equal-length tuples."""
    if len(u) != len(v):
        raise ValueError(f"tuple lengths differ: {len(u)} vs {len(v)}")
    if not u:
        raise ValueError("tuples must have at least one coordinate")
    return max(base_dist(a, b) for a, b in zip(u, v))


def dist_sup_weighted(x: BoundedSeq, y: BoundedSeq, w: WeightSeq) -> float:
    """Weighted sup distance sup_n a_n |x_n - y_n|, exactly.

    Explicit max over every index where either the sequences or the weight
    head vary; beyond that the coordinate distance is constant and the
    weights are nonincreasing, so the tail contributes its first weight.
    """
    if not validate_sup_weights(w):
        raise ValueError("weights do not define a sup-type metric (need positive head, ratio in (0, 1])")
    m = max(len(x.prefix), len(y.prefix), len(w.head))
    best = w.at(m) * base_dist(x.tail, y.tail)
    for n in range(m):
        best = max(best, w.at(n) * base_dist(x.at(n), y.at(n)))
    return best


def dist_p_weighted(x: BoundedSeq, y: BoundedSeq, p: float, w: WeightSeq) -> float:
    """Weighted power distance (sum_n a_n |x_n - y_n|^p)^(1/p), exactly.

    Finite sum over the joint prefix plus the closed-form geometric tail
    sum. The largest rescaled term is factored out before exponentiation so
    the evaluation stays stable for very large ``p``.
    """
    p = ensure_finite(p, "exponent")
    if p < 1.0:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if not validate_p_weights(w):
        raise ValueError("weights do not define a p-type metric (need positive head, ratio in (0, 1))")
    m = max(len(x.prefix), len(y.prefix), len(w.head))
    d_tail = base_dist(x.tail, y.tail)
    scaled = [w.at(n) ** (1.0 / p) * base_dist(x.at(n), y.at(n)) for n in range(m)]
    tail_anchor = w.at(m) ** (1.0 / p) * d_tail
    top = max(scaled + [tail_anchor])
    if top == 0.0:
        return 0.0
    total = sum((v / top) ** p for v in scaled if v > 0.0)
    if d_tail > 0.0:
        total += (tail_anchor / top) ** p / (1.0 - w.ratio)
    return top * total ** (1.0 / p)


def dist_sup_geom(x: BoundedSeq, y: BoundedSeq, q: float) -> float:
    """Sup distance with geometric weights q**n; q=1 gives the plain sup distance."""
    q = ensure_finite(q, "q")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    return dist_sup_weighted(x, y, WeightSeq.geometric(q))


def dist_p_geom(x: BoundedSeq, y: BoundedSeq, p: float, q: float) -> float:
    """Power distance with geometric weights q**n, q strictly below 1."""
    q = ensure_finite(q, "q")
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    return dist_p_weighted(x, y, p, WeightSeq.geometric(q))
