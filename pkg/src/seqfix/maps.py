"""Maps from bounded sequences to the real line, with Lipschitz analysis.

The workhorse is the absolutely summable linear form
``f(x) = offset + sum_n b_n x_n`` whose coefficients are a finite head
continued geometrically. Its Lipschitz constants with respect to the
geometric-weight sup and power distances have closed forms (possibly
+inf, which is a value here, not an error); those constants are what the
solver's contraction certificates are built from.

Also provided: the half-supremum map (contractive for the unweighted sup
distance yet never admitting a geometric-weight certificate), embeddings
of finite-arity maps, truncations of sequence maps to finitely many
coordinates, and a randomized lower bound on true Lipschitz constants
that uses near-extremal witness pairs for linear maps.
"""

from __future__ import annotations

import math
import random
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import ClassVar

from .metrics import dist_p_geom, dist_sup_geom
from .sequences import BoundedSeq, ensure_finite


class SeqMap(ABC):
    """A deterministic rule sending a bounded sequence to a real number."""

    #: closed interval every coordinate must lie in, or None for all of R
    domain: ClassVar[tuple[float, float] | None] = None

    @abstractmethod
    def eval(self, x: BoundedSeq) -> float:
        """Value of the map at ``x``."""

    def diagonal(self, t: float) -> float:
        """Value on the constant sequence (t, t, ...)."""
        return self.eval(BoundedSeq.constant(t))

    def _check_domain(self, x: BoundedSeq) -> None:
        if self.domain is not None:
            lo, hi = self.domain
            for v in x.values():
                if not lo <= v <= hi:
                    raise ValueError(f"coordinate {v!r} outside map domain [{lo}, {hi}]")


@dataclass(frozen=True)
class LinearSeqMap(SeqMap):
    """``offset + sum_n b_n x_n`` with absolutely summable coefficients.

    ``b_n = head_coeffs[n]`` for ``n < N`` and
    ``b_n = tail_coeff * tail_ratio**(n - N)`` for ``n >= N`` where
    ``N = len(head_coeffs)``. Absolute summability is automatic from
    ``|tail_ratio| < 1``; negative tail coefficients and ratios are allowed.
    """

    head_coeffs: tuple[float, ...] = ()
    tail_coeff: float = 0.0
    tail_ratio: float = 0.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        coeffs = tuple(ensure_finite(b, "coefficient") for b in self.head_coeffs)
        object.__setattr__(self, "head_coeffs", coeffs)
        object.__setattr__(self, "tail_coeff", ensure_finite(self.tail_coeff, "tail coefficient"))
        object.__setattr__(self, "tail_ratio", ensure_finite(self.tail_ratio, "tail ratio"))
        object.__setattr__(self, "offset", ensure_finite(self.offset, "offset"))
        if abs(self.tail_ratio) >= 1.0:
            raise ValueError(f"|tail_ratio| must be < 1 for summability, got {self.tail_ratio}")

    def coeff_at(self, n: int) -> float:
        """The coefficient ``b_n``."""
        if n < 0:
            raise ValueError("coefficient index must be nonnegative")
        if n < len(self.head_coeffs):
            return self.head_coeffs[n]
        return self.tail_coeff * self.tail_ratio ** (n - len(self.head_coeffs))

    def tail_sum_from(self, m: int) -> float:
        """Signed sum of all coefficients from index ``m`` on, in closed form."""
        n = len(self.head_coeffs)
        geo = self.tail_coeff / (1.0 - self.tail_ratio)
        if m <= n:
            return sum(self.head_coeffs[m:]) + geo
        return geo * self.tail_ratio ** (m - n)

    def sum_coeffs(self) -> float:
        """Signed sum of all coefficients."""
        return self.tail_sum_from(0)

    def sum_abs_coeffs(self) -> float:
        """Sum of |b_n|; equals the Lipschitz constant for the plain sup distance."""
        return sum(abs(b) for b in self.head_coeffs) + abs(self.tail_coeff) / (1.0 - abs(self.tail_ratio))

    def eval(self, x: BoundedSeq) -> float:
        m = len(x.prefix)
        acc = self.offset
        for n in range(m):
            acc += self.coeff_at(n) * x.prefix[n]
        return acc + x.tail * self.tail_sum_from(m)

    def lip_sup(self, q: float) -> float:
        """Lipschitz constant for the q-weighted sup distance: sum_n |b_n| / q**n.

        Returns ``inf`` when the series diverges, i.e. when the coefficient
        tail decays no faster than the weights (|tail_ratio| >= q).
        """
        q = ensure_finite(q, "q")
        if not 0.0 < q <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {q}")
        n = len(self.head_coeffs)
        total = sum(abs(b) / q**k for k, b in enumerate(self.head_coeffs))
        if self.tail_coeff != 0.0:
            r = abs(self.tail_ratio)
            if r >= q:
                return math.inf
            total += (abs(self.tail_coeff) / q**n) / (1.0 - r / q)
        return total

    def lip_p(self, p: float, q: float) -> float:
        """Lipschitz constant for the (p, q) power distance.

        For p = 1 this is sup_n |b_n| / q**n; for p > 1 it is the conjugate
        power sum ``(sum_n |b_n|**(p/(p-1)) / q**(n/(p-1)))**((p-1)/p)``.
        Returns ``inf`` on divergence (|tail_ratio|**p >= q with a nonzero
        tail). Evaluated in log space so large exponents stay stable.
        """
        p = ensure_finite(p, "p")
        q = ensure_finite(q, "q")
        if p < 1.0:
            raise ValueError(f"p must be >= 1, got {p}")
        if not 0.0 < q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {q}")
        n = len(self.head_coeffs)
        r_abs = abs(self.tail_ratio)
        if p == 1.0:
            best = max((abs(b) / q**k for k, b in enumerate(self.head_coeffs)), default=0.0)
            if self.tail_coeff != 0.0:
                if r_abs > q:
                    return math.inf
                best = max(best, abs(self.tail_coeff) / q**n)
            return best
        conj = p / (p - 1.0)
        scale = 1.0 / (p - 1.0)
        # log of each series term |b_k|**conj / q**(k*scale)
        logs = [conj * math.log(abs(b)) - k * scale * math.log(q)
                for k, b in enumerate(self.head_coeffs) if b != 0.0]
        tail_log = None
        tail_step = 0.0
        if self.tail_coeff != 0.0:
            if r_abs**p >= q:
                return math.inf
            tail_log = conj * math.log(abs(self.tail_coeff)) - n * scale * math.log(q)
            tail_step = r_abs**conj / q**scale
            logs.append(tail_log)
        if not logs:
            return 0.0
        top = max(logs)
        total = sum(math.exp(v - top) for v in logs if v != tail_log)
        if tail_log is not None:
            total += math.exp(tail_log - top) / (1.0 - tail_step)
        return math.exp(top / conj) * total ** (1.0 / conj)

    def fixed_point(self) -> float:
        """The unique value t with f(t, t, ...) = t: offset / (1 - sum_n b_n)."""
        s = self.sum_coeffs()
        if s == 1.0:
            raise ValueError("coefficients sum to 1: every real number is a diagonal fixed point")
        return self.offset / (1.0 - s)


@dataclass(frozen=True)
class SupHalfMap(SeqMap):
    """Half the supremum of the coordinates, defined for coordinates in [0, 1].

    Contractive with constant 1/2 for the unweighted sup distance, yet its
    generalized iterates never drop below half of any positive starting
    coordinate, so no geometric-weight contraction certificate exists.
    """

    domain: ClassVar[tuple[float, float]] = (0.0, 1.0)

    def eval(self, x: BoundedSeq) -> float:
        self._check_domain(x)
        return 0.5 * max(x.values())


@dataclass(frozen=True, eq=False)
class FiniteArityMap:
    """A map on m-tuples of reals.

    ``lipschitz_hint`` is a caller-supplied Lipschitz constant with respect
    to the maximum metric on tuples; it is consumed for certification and
    sanity-checked at most, never estimated from the black-box rule.
    """

    arity: int
    rule: Callable[..., float]
    lipschitz_hint: float | None = None

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError(f"arity must be >= 1, got {self.arity}")
        if self.lipschitz_hint is not None and not self.lipschitz_hint >= 0.0:
            raise ValueError(f"lipschitz_hint must be nonnegative, got {self.lipschitz_hint}")

    def __call__(self, *args: float) -> float:
        if len(args) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(args)}")
        return ensure_finite(self.rule(*args), "map value")


@dataclass(frozen=True, eq=False)
class EmbeddedMap(SeqMap):
    """A finite-arity map read as a sequence map through its first coordinates."""

    finite_map: FiniteArityMap

    @property
    def arity(self) -> int:
        return self.finite_map.arity

    def eval(self, x: BoundedSeq) -> float:
        return self.finite_map(*x.head(self.finite_map.arity))


def embed_finite(g: FiniteArityMap) -> EmbeddedMap:
    """Extend an m-tuple map to sequences by reading the first m coordinates.

    If ``Lip(g) < q**(m-1)`` for some q in (0, 1), the embedding is
    Lipschitz for the q-weighted sup distance with constant at most
    ``Lip(g) / q**(m-1)``, which certificate derivation exploits.
    """
    return EmbeddedMap(g)


def _truncation_hint(f: SeqMap, n: int) -> float | None:
    if isinstance(f, LinearSeqMap):
        return sum(abs(f.coeff_at(k)) for k in range(n))
    if isinstance(f, SupHalfMap):
        return 0.5
    if isinstance(f, EmbeddedMap):
        return f.finite_map.lipschitz_hint
    return None


def truncate(f: SeqMap, n: int, base: float) -> FiniteArityMap:
    """Freeze all coordinates of ``f`` from index ``n`` on at ``base``.

    The result is an arity-n map; its max-metric Lipschitz constant never
    exceeds any sup-distance Lipschitz constant of ``f``, and the hint is
    filled in exactly where it can be computed.
    """
    if n < 1:
        raise ValueError(f"truncation arity must be >= 1, got {n}")
    base = ensure_finite(base, "base point")
    if f.domain is not None:
        lo, hi = f.domain
        if not lo <= base <= hi:
            raise ValueError(f"base point {base} outside map domain [{lo}, {hi}]")

    def rule(*args: float) -> float:
        return f.eval(BoundedSeq(args, base))

    return FiniteArityMap(n, rule, _truncation_hint(f, n))


def _sgn(v: float) -> float:
    return 1.0 if v > 0.0 else -1.0 if v < 0.0 else 0.0


def _map_gap(f: SeqMap, a: BoundedSeq, b: BoundedSeq) -> float:
    """|f(a) - f(b)|, through the offset-free form for linear maps.

    Subtracting two evaluations cancels the offset and loses the tiny
    coordinate signal of deep witness pairs; the explicit difference form
    is the same number algebraically but keeps full relative precision.
    """
    if isinstance(f, LinearSeqMap):
        m = max(len(a.prefix), len(b.prefix))
        acc = 0.0
        for n in range(m):
            acc += f.coeff_at(n) * (a.at(n) - b.at(n))
        acc += (a.tail - b.tail) * f.tail_sum_from(m)
        return abs(acc)
    return abs(f.eval(a) - f.eval(b))


def _random_seq(rng: random.Random, lo: float, hi: float) -> BoundedSeq:
    k = rng.randrange(0, 9)
    return BoundedSeq(tuple(rng.uniform(lo, hi) for _ in range(k)), rng.uniform(lo, hi))


def _linear_witnesses(f: LinearSeqMap, q: float, p: float | None, depth: int) -> Iterator[BoundedSeq]:
    """Near-extremal inputs realizing the analytic constants on truncations."""
    if p is None:
        yield BoundedSeq(tuple(_sgn(f.coeff_at(k)) / q**k for k in range(depth + 1)), 0.0)
    elif p == 1.0:
        for k in range(depth + 1):
            yield BoundedSeq((0.0,) * k + (1.0,), 0.0)
    else:
        yield BoundedSeq(
            tuple(_sgn(f.coeff_at(k)) * (abs(f.coeff_at(k)) / q**k) ** (1.0 / (p - 1.0))
                  for k in range(depth + 1)),
            0.0,
        )


def empirical_lip_lower_bound(
    f: SeqMap,
    q: float,
    p: float | None = None,
    trials: int = 200,
    seed: int = 0,
    witness_depth: int = 64,
) -> float:
    """Randomized lower bound on the Lipschitz constant of ``f``.

    Maximizes the ratio |f(x) - f(y)| / d(x, y) over seeded random pairs
    from the map's domain, where d is the geometric sup distance (p=None)
    or the (p, q) power distance. For linear maps the deterministic
    witness pairs are tried as well, which makes the bound sharp up to the
    truncation depth. The result never exceeds the analytic constant.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if p is None:
        metric = lambda a, b: dist_sup_geom(a, b, q)
    else:
        metric = lambda a, b: dist_p_geom(a, b, p, q)
    rng = random.Random(seed)
    lo, hi = f.domain if f.domain is not None else (-1.0, 1.0)
    best = 0.0

    def consider(a: BoundedSeq, b: BoundedSeq) -> None:
        nonlocal best
        d = metric(a, b)
        if d > 0.0:
            best = max(best, _map_gap(f, a, b) / d)

    for _ in range(trials):
        consider(_random_seq(rng, lo, hi), _random_seq(rng, lo, hi))
    if isinstance(f, LinearSeqMap):
        zero = BoundedSeq.constant(0.0)
        for witness in _linear_witnesses(f, q, p, witness_depth):
            consider(witness, zero)
    return best
