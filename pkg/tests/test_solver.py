import math
import random

import pytest

from seqfix import (
    BoundedSeq,
    BoundViolationError,
    FiniteArityMap,
    LinearSeqMap,
    PCertificate,
    SeqMap,
    SupCertificate,
    SupHalfMap,
    UncertifiedMapError,
    dist_p_geom,
    dist_sup_geom,
    embed_finite,
    find_p_certificate,
    find_sup_certificate,
    generalized_iterates,
    lift_step,
    presic_iterates,
    reduce_general_weights,
    secelean_iterates,
    solve_fixed_point,
    sup_certificate_from_p,
    truncate,
    truncation_study,
)

RECUR = LinearSeqMap(head_coeffs=(1.0 / 3.0,), tail_coeff=1.0 / 6.0, tail_ratio=0.5, offset=1.0)
RECUR_CERT = SupCertificate(0.8, RECUR.lip_sup(0.8))  # lip = 8/9
ZERO = BoundedSeq.constant(0.0)


def random_linear(rng, abs_sum, ratio_span=0.4):
    head = tuple(rng.uniform(-1, 1) for _ in range(rng.randrange(0, 5)))
    beta = rng.choice((-1, 1)) * rng.uniform(0.1, 1.0)
    rho = rng.uniform(-ratio_span, ratio_span)
    f = LinearSeqMap(head, beta, rho, rng.uniform(-2, 2))
    scale = abs_sum / f.sum_abs_coeffs()
    return LinearSeqMap(tuple(b * scale for b in head), beta * scale, rho, f.offset)


def random_seq(rng, span=2.0):
    k = rng.randrange(0, 7)
    return BoundedSeq(tuple(rng.uniform(-span, span) for _ in range(k)), rng.uniform(-span, span))


def test_certificate_validation():
    with pytest.raises(ValueError):
        SupCertificate(1.0, 0.5)
    with pytest.raises(ValueError):
        SupCertificate(0.5, 1.0)
    with pytest.raises(ValueError):
        SupCertificate(0.5, -0.1)
    with pytest.raises(ValueError):
        PCertificate(0.5, 0.5, 0.1)
    with pytest.raises(ValueError):
        PCertificate(1.0, 0.5, 0.5)  # needs lip < 1 - q
    PCertificate(1.0, 0.5, 0.4)


def test_a_priori_bound_examples():
    cert = SupCertificate(0.5, 0.5)
    assert cert.a_priori_bound(1, 2.0) == 2.0
    assert SupCertificate(0.5, 0.5).a_priori_bound(5, 0.0) == 0.0
    p_cert = PCertificate(1.0, 0.5, 0.25)
    assert p_cert.a_priori_bound(1, 1.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        cert.a_priori_bound(0, 1.0)
    with pytest.raises(ValueError):
        cert.a_priori_bound(1, -1.0)


def test_a_priori_bound_recursion_identity():
    # lip/(1-lip) * lip^(k-1) with lip = 8/9 is exactly 9*(8/9)^k = 8*(8/9)^(k-1)
    for k in range(1, 51):
        bound = RECUR_CERT.a_priori_bound(k, 1.0)
        assert bound == pytest.approx(9.0 * (8.0 / 9.0) ** k, abs=1e-12)
        assert 9.0 * (8.0 / 9.0) ** k == pytest.approx(8.0 * (8.0 / 9.0) ** (k - 1), abs=1e-12)


def test_bounds_decrease_geometrically():
    for cert in (SupCertificate(0.7, 0.4), PCertificate(2.0, 0.3, 0.5)):
        bounds = [cert.a_priori_bound(k, 1.0) for k in range(1, 30)]
        assert all(a > b for a, b in zip(bounds, bounds[1:]))


def test_lift_step():
    f = LinearSeqMap(offset=5.0)
    value, lifted = lift_step(f, ZERO)
    assert value == 5.0
    assert lifted == BoundedSeq((5.0,), 0.0)


def test_lift_step_at_fixed_point():
    star = RECUR.fixed_point()
    value, lifted = lift_step(RECUR, BoundedSeq.constant(star))
    assert abs(value - star) <= 1e-12
    assert dist_sup_geom(lifted, BoundedSeq.constant(star), 0.8) <= 1e-12


def test_generalized_iterates_recursion_map():
    trace = generalized_iterates(RECUR, ZERO, 60, RECUR_CERT)
    values = [s.value for s in trace.steps]
    assert values[0] == 1.0
    assert values[1] == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert abs(values[-1] - 3.0) < 1e-2
    assert trace.initial_gap == pytest.approx(1.0, abs=1e-15)
    bounds = [s.bound for s in trace.steps]
    assert all(a >= b for a, b in zip(bounds, bounds[1:]))


def test_iterate_prefix_has_stack_shape():
    trace = generalized_iterates(RECUR, ZERO, 4)
    values = [s.value for s in trace.steps]
    lifted = ZERO
    for v in values:
        lifted = lifted.prepend(v)
    assert lifted.prefix == tuple(reversed(values))


def test_trace_bounds_are_valid():
    reference = generalized_iterates(RECUR, ZERO, 400).steps[-1].value
    trace = generalized_iterates(RECUR, ZERO, 100, RECUR_CERT)
    for step in trace.steps:
        assert abs(step.value - reference) <= step.bound + 1e-9


def test_uncertified_trace_has_no_bounds():
    trace = generalized_iterates(RECUR, ZERO, 3)
    assert trace.initial_gap is None
    assert all(s.bound is None for s in trace.steps)


def test_lifted_step_contracts():
    rng = random.Random(61)
    for _ in range(100):
        f = random_linear(rng, rng.uniform(0.1, 0.9))
        q = rng.uniform(0.5, 0.9)
        x, y = random_seq(rng), random_seq(rng)
        fx, lx = lift_step(f, x)
        fy, ly = lift_step(f, y)
        factor = max(q, f.lip_sup(q))
        assert dist_sup_geom(lx, ly, q) <= factor * dist_sup_geom(x, y, q) + 1e-9
        p = rng.choice((1.0, 2.0, 3.0))
        lip_p = f.lip_p(p, q)
        factor_p = (lip_p**p + q) ** (1.0 / p)
        assert dist_p_geom(lx, ly, p, q) <= factor_p * dist_p_geom(x, y, p, q) + 1e-9


def test_find_sup_certificate_recursion_map():
    cert = find_sup_certificate(RECUR)
    assert cert is not None
    assert 0.0 < cert.q < 1.0
    assert cert.lip < 1.0
    assert cert.lip == RECUR.lip_sup(cert.q)


def test_find_sup_certificate_rejects_unit_abs_sum():
    assert find_sup_certificate(LinearSeqMap((0.0,), 0.5, 0.5)) is None
    assert find_sup_certificate(LinearSeqMap((1.2,))) is None


def test_find_sup_certificate_geometric_needs_large_q():
    for b in (0.1, 0.2, 0.4):
        cert = find_sup_certificate(LinearSeqMap((0.0,), b, b))
        assert cert is not None
        assert cert.q > 2 * b  # below 2b the constant is >= 1


def test_find_sup_certificate_constant_map():
    cert = find_sup_certificate(LinearSeqMap(offset=7.0))
    assert cert == SupCertificate(0.5, 0.0)


def test_find_sup_certificate_embeddings():
    g = embed_finite(FiniteArityMap(2, lambda a, b: (a + b) / 4 + 1, 0.5))
    cert = find_sup_certificate(g)
    assert cert.q == pytest.approx(0.75, abs=1e-15)
    assert cert.lip == pytest.approx(2.0 / 3.0, abs=1e-15)
    one = embed_finite(FiniteArityMap(1, lambda a: a / 3, 1.0 / 3.0))
    assert find_sup_certificate(one) == SupCertificate(0.5, 1.0 / 3.0)
    assert find_sup_certificate(embed_finite(FiniteArityMap(2, lambda a, b: a + b))) is None
    assert find_sup_certificate(embed_finite(FiniteArityMap(1, lambda a: 2 * a, 2.0))) is None


def test_find_sup_certificate_uncertified_maps():
    assert find_sup_certificate(SupHalfMap()) is None


def test_certificate_soundness_on_samples():
    rng = random.Random(67)
    for _ in range(30):
        f = random_linear(rng, rng.uniform(0.1, 0.9))
        cert = find_sup_certificate(f)
        for _ in range(10):
            x, y = random_seq(rng), random_seq(rng)
            assert abs(f.eval(x) - f.eval(y)) <= cert.lip * dist_sup_geom(x, y, cert.q) + 1e-9


def test_find_p_certificate():
    cert = find_p_certificate(LinearSeqMap((0.0, 0.3)), 0.5)
    assert cert is not None
    assert cert.p == 2.0
    assert cert.lip == pytest.approx(0.3 / math.sqrt(0.5), abs=1e-12)
    # a unit coefficient can never satisfy the power-family condition
    assert find_p_certificate(LinearSeqMap((0.0, 1.0)), 0.5) is None
    zero = find_p_certificate(LinearSeqMap(), 0.7)
    assert zero is not None and zero.p == 1.0 and zero.lip == 0.0
    with pytest.raises(ValueError):
        find_p_certificate(RECUR, 1.0)


def test_sup_certificate_from_p():
    rng = random.Random(71)
    for _ in range(30):
        f = random_linear(rng, rng.uniform(0.1, 0.9))
        for q0 in (0.25, 0.5, 0.75):
            p_cert = find_p_certificate(f, q0)
            assert p_cert is not None
            back = sup_certificate_from_p(p_cert)
            assert back.q > q0 ** (1.0 / p_cert.p)
            # the converted constant really dominates the sup-family constant
            assert f.lip_sup(back.q) <= back.lip + 1e-9


def test_solve_fixed_point_recursion_map():
    sol = solve_fixed_point(RECUR, ZERO, RECUR_CERT, 1e-6)
    assert abs(sol.value - 3.0) <= 1e-6
    assert sol.k_used == 136  # smallest k with 9*(8/9)^k <= 1e-6
    assert RECUR_CERT.a_priori_bound(sol.k_used, sol.trace.initial_gap) <= 1e-6


def test_solve_fixed_point_constant_map():
    f = LinearSeqMap(offset=7.0)
    sol = solve_fixed_point(f, ZERO, SupCertificate(0.5, 0.0), 1e-9)
    assert sol.value == 7.0
    assert sol.k_used == 1


def test_solve_fixed_point_embedding():
    g = embed_finite(FiniteArityMap(2, lambda a, b: (a + b) / 4 + 1, 0.5))
    sol = solve_fixed_point(g, ZERO, find_sup_certificate(g), 1e-8)
    assert abs(sol.value - 2.0) <= 1e-8


def test_solve_fixed_point_starting_at_solution():
    sol = solve_fixed_point(RECUR, BoundedSeq.constant(3.0), RECUR_CERT, 1e-10)
    assert sol.k_used == 1
    assert abs(sol.value - 3.0) <= 1e-10


def test_solve_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        solve_fixed_point(RECUR, ZERO, RECUR_CERT, 0.0)


def test_invalid_certificate_is_caught():
    f = LinearSeqMap((0.9,), offset=1.0)  # true constant 0.9, claimed 0.01
    with pytest.raises(BoundViolationError):
        solve_fixed_point(f, ZERO, SupCertificate(0.5, 0.01), 1e-3)


def test_secelean_separation_fixture():
    f = SupHalfMap()
    x0 = BoundedSeq((0.6,), 0.0)
    trace = generalized_iterates(f, x0, 100)
    assert all(s.value >= 0.3 for s in trace.steps)
    rows = secelean_iterates(f, x0, 30)
    assert rows[0].value == 0.3
    assert rows[30].value < 1e-8
    # the recorded bound is exact on this fixture
    assert all(r.value == r.bound for r in rows)


def test_secelean_constant_map_is_stationary():
    f = LinearSeqMap(offset=4.0)
    rows = secelean_iterates(f, BoundedSeq.constant(4.0), 10)
    assert all(r.value == 4.0 for r in rows)


def test_secelean_bound_decays_linear_map():
    f = LinearSeqMap((0.2,), 0.1, 0.3, 0.0)  # offset 0: fixed point 0
    rows = secelean_iterates(f, BoundedSeq((1.0, -0.5), 0.25), 40)
    lip = f.lip_sup(1.0)
    for r in rows:
        assert abs(r.value) <= r.bound + 1e-12
        assert r.bound <= lip ** (r.k + 1) / (1 - lip) * 2.0
    assert abs(rows[-1].value) < 1e-12


def test_secelean_embedding_uses_hint():
    g = embed_finite(FiniteArityMap(2, lambda a, b: (a + b) / 4 + 1, 0.5))
    rows = secelean_iterates(g, ZERO, 40)
    assert abs(rows[-1].value - 2.0) < 1e-5


def test_secelean_refuses_unverifiable_maps():
    class Opaque(SeqMap):
        def eval(self, x):
            return 0.0

    with pytest.raises(UncertifiedMapError):
        secelean_iterates(Opaque(), ZERO, 5)
    with pytest.raises(UncertifiedMapError):
        secelean_iterates(LinearSeqMap((1.5,)), ZERO, 5)  # constant >= 1
    rows = secelean_iterates(Opaque(), ZERO, 5, lip=0.0)  # caller-supplied constant
    assert rows[0].value == 0.0


def test_presic_iterates_converge():
    g = FiniteArityMap(2, lambda a, b: (a + b) / 4 + 1, 0.5)
    values = presic_iterates(g, (0.0, 0.0), 80)
    assert values[0] == 1.0
    assert abs(values[-1] - 2.0) < 1e-12
    picard = FiniteArityMap(1, lambda a: a / 2 + 1, 0.5)
    assert abs(presic_iterates(picard, (0.0,), 60)[-1] - 2.0) < 1e-12
    with pytest.raises(ValueError):
        presic_iterates(g, (0.0,), 5)


def test_presic_matches_embedded_iterates():
    # asymmetric rule pins down the argument order: newest value first
    g = FiniteArityMap(2, lambda a, b: a / 3 - b / 5 + 1, 1.0 / 3.0 + 1.0 / 5.0)
    seeds = (0.2, 0.7)
    start = BoundedSeq(tuple(reversed(seeds)), seeds[0])
    values = presic_iterates(g, seeds, 50)
    trace = generalized_iterates(embed_finite(g), start, 50)
    assert values == [s.value for s in trace.steps]


def test_truncation_study_recursion_map():
    report = truncation_study(RECUR, RECUR_CERT, 0.0, 12, 1e-6)
    assert report.reference == pytest.approx(3.0, abs=1e-8)
    for row in report.rows:
        # independent closed form: the truncated map is affine in one unknown
        partial = sum(RECUR.coeff_at(k) for k in range(row.n))
        closed = 1.0 / (1.0 - partial)
        assert row.value == pytest.approx(closed, abs=1e-6)
        assert row.error <= row.bound + 1e-6
    errors = [r.error for r in report.rows]
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_truncation_study_from_the_fixed_point():
    report = truncation_study(RECUR, RECUR_CERT, 3.0, 5, 1e-6)
    for row in report.rows:
        assert row.value == 3.0
        assert row.error == 0.0
        assert row.bound == 0.0


def test_truncated_half_sup_keeps_positive_floor():
    # truncations of the half-sup map all share the fixed point base/2, so
    # they cannot approach the true fixed point 0
    base = 0.4
    for n in (1, 2, 5):
        fn = truncate(SupHalfMap(), n, base)
        values = presic_iterates(fn, (0.0,) * n, 60)
        assert values[-1] == pytest.approx(base / 2, abs=1e-12)


def test_reduce_general_weights():
    got = reduce_general_weights(1.0, 0.5, 0.9)
    assert got == SupCertificate(0.5, 0.9)
    assert reduce_general_weights(2.0, 0.5, 0.6) is None
    got_p = reduce_general_weights(1.0, 0.5, 0.4, p=1.0)
    assert got_p == PCertificate(1.0, 0.5, 0.4)
    assert reduce_general_weights(1.0, 0.5, 0.6, p=1.0) is None
    with pytest.raises(ValueError):
        reduce_general_weights(1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        reduce_general_weights(-1.0, 0.5, 0.5)
