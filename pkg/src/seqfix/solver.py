"""Contraction certificates and certified fixed-point iteration.

The lifted self-map of a sequence map prepends the image to the sequence;
iterating it produces the generalized iterates. A certificate witnesses
that the lift contracts, either through the q-weighted sup distance
(``lip < 1``) or through the (p, q) power distance
(``lip < (1 - q)**(1/p)``). Either way the error of the k-th iterate is
bounded a priori by the first-step displacement times a geometric factor,
which is what lets :func:`solve_fixed_point` pick its iteration count
before iterating and certify the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .maps import EmbeddedMap, FiniteArityMap, LinearSeqMap, SeqMap, SupHalfMap, embed_finite, truncate
from .metrics import dist_p_geom, dist_sup_geom
from .sequences import BoundedSeq, ensure_finite


class UncertifiedMapError(Exception):
    """No contraction hypothesis could be verified for the requested run."""


class BoundViolationError(Exception):
    """A certified error bound failed empirically (bug or invalid certificate)."""


@dataclass(frozen=True)
class SupCertificate:
    """Witness of contraction for the q-weighted sup distance.

    Valid when 0 < q < 1 and the map's Lipschitz constant ``lip`` for that
    distance is below 1. The lifted map then contracts with factor
    ``max(lip, q)``.
    """

    q: float
    lip: float

    def __post_init__(self) -> None:
        q = ensure_finite(self.q, "q")
        lip = ensure_finite(self.lip, "lip")
        if not 0.0 < q < 1.0:
            raise ValueError(f"certificate q must lie in (0, 1), got {q}")
        if not 0.0 <= lip < 1.0:
            raise ValueError(f"certificate lip must lie in [0, 1), got {lip}")

    def step_factor(self) -> float:
        """Contraction factor of one lifted step."""
        return max(self.lip, self.q)

    def gap(self, x: BoundedSeq, y: BoundedSeq) -> float:
        """Distance between sequences in this certificate's metric."""
        return dist_sup_geom(x, y, self.q)

    def diagonal_lip(self) -> float:
        """Contraction factor of the diagonal map t -> f(t, t, ...)."""
        return self.lip

    def a_priori_bound(self, k: int, d1: float) -> float:
        """Error bound for the k-th iterate from the first-step displacement d1."""
        if k < 1:
            raise ValueError(f"iterate index must be >= 1, got {k}")
        if d1 < 0.0:
            raise ValueError(f"first-step displacement must be nonnegative, got {d1}")
        sf = self.step_factor()
        return self.lip * sf ** (k - 1) / (1.0 - sf) * d1


@dataclass(frozen=True)
class PCertificate:
    """Witness of contraction for the (p, q) power distance.

    Valid when ``lip < (1 - q)**(1/p)``; the lifted map then contracts with
    factor ``(lip**p + q)**(1/p) < 1``.
    """

    p: float
    q: float
    lip: float

    def __post_init__(self) -> None:
        p = ensure_finite(self.p, "p")
        q = ensure_finite(self.q, "q")
        lip = ensure_finite(self.lip, "lip")
        if p < 1.0:
            raise ValueError(f"certificate p must be >= 1, got {p}")
        if not 0.0 < q < 1.0:
            raise ValueError(f"certificate q must lie in (0, 1), got {q}")
        if not 0.0 <= lip < (1.0 - q) ** (1.0 / p):
            raise ValueError(f"certificate requires lip < (1-q)^(1/p), got lip={lip}, q={q}, p={p}")

    def step_factor(self) -> float:
        return (self.lip**self.p + self.q) ** (1.0 / self.p)

    def gap(self, x: BoundedSeq, y: BoundedSeq) -> float:
        return dist_p_geom(x, y, self.p, self.q)

    def diagonal_lip(self) -> float:
        return self.lip / (1.0 - self.q) ** (1.0 / self.p)

    def a_priori_bound(self, k: int, d1: float) -> float:
        if k < 1:
            raise ValueError(f"iterate index must be >= 1, got {k}")
        if d1 < 0.0:
            raise ValueError(f"first-step displacement must be nonnegative, got {d1}")
        sf = self.step_factor()
        return self.lip * sf ** (k - 1) / (1.0 - sf) * d1


ContractionCertificate = SupCertificate | PCertificate


@dataclass(frozen=True)
class TraceStep:
    """One generalized iterate with its certified bound (if any) and residual."""

    k: int
    value: float
    bound: float | None
    residual: float


@dataclass(frozen=True)
class IterationTrace:
    """Generalized iterates plus the first-step displacement in the certificate metric."""

    steps: tuple[TraceStep, ...]
    initial_gap: float | None


def lift_step(f: SeqMap, x: BoundedSeq) -> tuple[float, BoundedSeq]:
    """One application of the lifted map: (f(x), the sequence with f(x) prepended)."""
    value = f.eval(x)
    return value, x.prepend(value)


def generalized_iterates(
    f: SeqMap,
    x0: BoundedSeq,
    k_max: int,
    cert: ContractionCertificate | None = None,
) -> IterationTrace:
    """Iterates x^1 .. x^k_max of the lifted map started at ``x0``.

    Each step records the residual |f(t, t, ...) - t| at the new value; with
    a certificate, the a priori error bound is recorded as well (computed
    from the displacement between the first lifted sequence and the start).
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    steps: list[TraceStep] = []
    d1: float | None = None
    cur = x0
    for k in range(1, k_max + 1):
        value, nxt = lift_step(f, cur)
        if k == 1 and cert is not None:
            d1 = cert.gap(nxt, cur)
        residual = abs(f.diagonal(value) - value)
        bound = cert.a_priori_bound(k, d1) if cert is not None else None
        steps.append(TraceStep(k, value, bound, residual))
        cur = nxt
    return IterationTrace(tuple(steps), d1)


_BISECT_STEPS = 50


def find_sup_certificate(f: SeqMap) -> SupCertificate | None:
    """Search for a sup-distance contraction certificate.

    Linear maps: none exists when the absolute coefficient sum is >= 1 (the
    constant is nonincreasing in q, so it would already be >= 1 at q = 1);
    otherwise bisect for a q where the exact constant reaches the midpoint
    between the coefficient sum and 1. Embedded finite-arity maps use the
    supplied hint. Anything else is reported uncertified (None).
    """
    if isinstance(f, LinearSeqMap):
        total = f.sum_abs_coeffs()
        if total >= 1.0:
            return None
        if total == 0.0:
            return SupCertificate(0.5, 0.0)
        target = (1.0 + total) / 2.0
        lo_edge = abs(f.tail_ratio) if f.tail_coeff != 0.0 else 0.0
        lo, hi = lo_edge, 1.0
        exceeded = False
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if f.lip_sup(mid) <= target:
                hi = mid
            else:
                lo = mid
                exceeded = True
        if not exceeded:
            q = 0.5 * (lo_edge + 1.0)
        elif hi < 1.0:
            q = hi
        else:
            return None
        return SupCertificate(q, f.lip_sup(q))
    if isinstance(f, EmbeddedMap):
        hint = f.finite_map.lipschitz_hint
        if hint is None or hint >= 1.0:
            return None
        m = f.finite_map.arity
        if m == 1:
            return SupCertificate(0.5, hint)
        q = ((1.0 + hint) / 2.0) ** (1.0 / (m - 1))
        return SupCertificate(q, hint / q ** (m - 1))
    return None


_P_GRID_MAX = 2**20


def find_p_certificate(f: LinearSeqMap, q0: float) -> PCertificate | None:
    """Search a doubling exponent grid for a power-distance certificate at q0.

    Existence for certifiable maps is guaranteed for some exponent, but with
    no computable cap, so exhausting the grid is reported as None rather
    than treated as disproof.
    """
    q0 = ensure_finite(q0, "q0")
    if not 0.0 < q0 < 1.0:
        raise ValueError(f"q0 must lie in (0, 1), got {q0}")
    p = 1.0
    while p <= _P_GRID_MAX:
        lip = f.lip_p(p, q0)
        if lip < (1.0 - q0) ** (1.0 / p):
            return PCertificate(p, q0, lip)
        p *= 2.0
    return None


def sup_certificate_from_p(cert: PCertificate) -> SupCertificate:
    """Convert a power-distance certificate into a sup-distance certificate.

    Uses the comparison between the metric families: for q' with
    (q')**p > q / (1 - lip**p) the sup-distance constant is at most
    ``lip / (1 - q/(q')**p)**(1/p) < 1``. The midpoint of the admissible
    range is chosen, so the conversion is sound for any map the original
    certificate covers.
    """
    lp = cert.lip**cert.p
    qp = 0.5 * (cert.q / (1.0 - lp) + 1.0)
    q_new = qp ** (1.0 / cert.p)
    lip_new = cert.lip / (1.0 - cert.q / qp) ** (1.0 / cert.p)
    return SupCertificate(q_new, lip_new)


def _smallest_k(cert: ContractionCertificate, d1: float, tol: float) -> int:
    """Smallest iterate index whose a priori bound is at most tol."""
    if cert.a_priori_bound(1, d1) <= tol:
        return 1
    first = cert.a_priori_bound(1, d1)
    sf = cert.step_factor()
    k = 1 + max(0, math.ceil(math.log(tol / first) / math.log(sf)))
    while cert.a_priori_bound(k, d1) > tol:
        k += 1
    while k > 1 and cert.a_priori_bound(k - 1, d1) <= tol:
        k -= 1
    return k


@dataclass(frozen=True)
class FixedPointSolution:
    """Certified approximation of the diagonal fixed point."""

    value: float
    k_used: int
    trace: IterationTrace


def solve_fixed_point(
    f: SeqMap,
    x0: BoundedSeq,
    cert: ContractionCertificate,
    tol: float,
) -> FixedPointSolution:
    """Iterate to within ``tol`` of the unique diagonal fixed point.

    Solves the a priori bound for the smallest sufficient iteration count,
    runs exactly that many lifted steps, and double-checks the terminal
    residual |f(t, t, ...) - t| against what the certificate permits;
    a violation means the certificate was invalid for ``f`` (or a bug) and
    raises :class:`BoundViolationError`.
    """
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    _, x1 = lift_step(f, x0)
    d1 = cert.gap(x1, x0)
    k = _smallest_k(cert, d1, tol)
    trace = generalized_iterates(f, x0, k, cert)
    last = trace.steps[-1]
    c = cert.diagonal_lip()
    allowance = tol * (1.0 + c) / (1.0 - c)
    if last.residual > allowance:
        raise BoundViolationError(
            f"terminal residual {last.residual:.3e} exceeds certified allowance {allowance:.3e}"
        )
    return FixedPointSolution(last.value, k, trace)


@dataclass(frozen=True)
class SeceleanStep:
    """One diagonal-map iterate with its geometric error bound."""

    k: int
    value: float
    bound: float


def secelean_iterates(
    f: SeqMap,
    x: BoundedSeq,
    k_max: int,
    lip: float | None = None,
) -> list[SeceleanStep]:
    """Iterates y_k = f applied after k coordinatewise diagonal-map steps.

    Requires f to contract for the plain (unweighted) sup distance; ``lip``
    is that constant, derived for linear and half-sup maps and otherwise
    caller-supplied. The recorded bound is
    ``lip**(k+1) / (1 - lip) * max_i |f(x_i, x_i, ...) - x_i]``, a finite
    maximum because the start has finitely many distinct coordinates.
    """
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    if lip is None:
        if isinstance(f, LinearSeqMap):
            lip = f.lip_sup(1.0)
        elif isinstance(f, SupHalfMap):
            lip = 0.5
        elif isinstance(f, EmbeddedMap) and f.finite_map.lipschitz_hint is not None:
            lip = f.finite_map.lipschitz_hint
        else:
            raise UncertifiedMapError(
                "cannot derive a sup-distance Lipschitz constant for this map; pass lip explicitly"
            )
    if not 0.0 <= lip < 1.0:
        raise UncertifiedMapError(f"diagonal iteration needs a sup-distance constant < 1, got {lip}")
    gap = max(abs(f.diagonal(v) - v) for v in x.values())
    rows: list[SeceleanStep] = []
    cur = x
    for k in range(k_max + 1):
        rows.append(SeceleanStep(k, f.eval(cur), lip ** (k + 1) / (1.0 - lip) * gap))
        cur = cur.map_values(f.diagonal)
    return rows


def presic_iterates(g: FiniteArityMap, seeds: tuple[float, ...], k_max: int) -> list[float]:
    """The product-space recursion x_{m+k} = g(x_{k+m-1}, ..., x_k).

    ``seeds`` are x_0 .. x_{m-1} oldest first; ``g`` receives its window
    newest first. Returns the ``k_max`` newly generated values. When
    ``Lip(g) < 1`` for the maximum metric these converge to the unique
    value t with g(t, ..., t) = t, and they coincide exactly with the
    generalized iterates of the embedded map started at the reversed seeds.
    """
    if len(seeds) != g.arity:
        raise ValueError(f"expected {g.arity} seeds, got {len(seeds)}")
    if k_max < 0:
        raise ValueError(f"k_max must be >= 0, got {k_max}")
    history = [ensure_finite(s, "seed") for s in seeds]
    out: list[float] = []
    for _ in range(k_max):
        window = tuple(reversed(history[-g.arity:]))
        value = g(*window)
        history.append(value)
        out.append(value)
    return out


@dataclass(frozen=True)
class TruncationRow:
    """One truncation arity with its fixed point, observed error, and bound."""

    n: int
    value: float
    error: float
    bound: float


@dataclass(frozen=True)
class TruncationReport:
    """Fixed points of the arity-n truncations against the full fixed point."""

    rows: tuple[TruncationRow, ...]
    reference: float


def truncation_study(
    f: SeqMap,
    cert: SupCertificate,
    base: float,
    n_max: int,
    tol: float,
) -> TruncationReport:
    """Fixed points of truncations at ``base`` for arities 1 .. n_max.

    Each truncated fixed point is found by the product-space recursion run
    to tolerance tol/10 (the truncation contracts at least as well as the
    certified map); the reference fixed point is solved at tol/1000. Every
    observed error must respect the certified bound
    ``q**n * lip / (1 - lip) * |reference - base|``; a violation raises
    :class:`BoundViolationError`.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    base = ensure_finite(base, "base point")
    ref = solve_fixed_point(f, BoundedSeq.constant(base), cert, tol / 1000.0).value
    factor = cert.lip / (1.0 - cert.lip) * abs(ref - base)
    rows: list[TruncationRow] = []
    for n in range(1, n_max + 1):
        fn = truncate(f, n, base)
        if fn.lipschitz_hint is None or fn.lipschitz_hint >= 1.0:
            fn = FiniteArityMap(fn.arity, fn.rule, cert.lip)
        emb = embed_finite(fn)
        sub = find_sup_certificate(emb)
        start = BoundedSeq.constant(base)
        _, lifted = lift_step(emb, start)
        d1 = sub.gap(lifted, start)
        k = _smallest_k(sub, d1, tol / 10.0)
        values = presic_iterates(fn, (base,) * n, k)
        x_n = values[-1]
        error = abs(x_n - ref)
        bound = cert.q**n * factor
        if error > bound + tol:
            raise BoundViolationError(
                f"truncation error {error:.3e} at arity {n} exceeds certified bound {bound:.3e}"
            )
        rows.append(TruncationRow(n, x_n, error, bound))
    return TruncationReport(tuple(rows), ref)


def reduce_general_weights(
    a0: float,
    ratio_bound: float,
    lip_general: float,
    p: float | None = None,
) -> ContractionCertificate | None:
    """Convert a general-weight Lipschitz constant to a geometric certificate.

    For positive weights whose consecutive ratios stay below
    ``ratio_bound < 1`` the weights are dominated by ``a0 * ratio_bound**n``,
    so a constant for the general weighted sup distance yields a sup
    certificate at q = ratio_bound when ``a0 * lip_general < 1``, and a
    constant for the general weighted power distance yields a power
    certificate when ``lip_general < ((1 - ratio_bound) / a0)**(1/p)``.
    Returns None when the corresponding condition fails.
    """
    a0 = ensure_finite(a0, "a0")
    ratio_bound = ensure_finite(ratio_bound, "ratio bound")
    lip_general = ensure_finite(lip_general, "lip")
    if a0 <= 0.0:
        raise ValueError(f"a0 must be positive, got {a0}")
    if not 0.0 < ratio_bound < 1.0:
        raise ValueError(f"ratio bound must lie in (0, 1), got {ratio_bound}")
    if lip_general < 0.0:
        raise ValueError(f"lip must be nonnegative, got {lip_general}")
    if p is None:
        lip_geo = a0 * lip_general
        if lip_geo < 1.0:
            return SupCertificate(ratio_bound, lip_geo)
        return None
    p = ensure_finite(p, "p")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if lip_general < ((1.0 - ratio_bound) / a0) ** (1.0 / p):
        return PCertificate(p, ratio_bound, a0 ** (1.0 / p) * lip_general)
    return None
