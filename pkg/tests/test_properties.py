"""Property-based checks over randomly generated operators and vectors."""

from fractions import Fraction

from hypothesis import HealthCheck, assume, given, settings, strategies as st

from omegasg.exponential import (
    closed_submatrix,
    exp_apply,
    norm_bound,
    tail_remainder,
    truncation_order,
)
from omegasg.operators import (
    SequenceVector,
    apply,
    build_operator,
    format_rational,
    parse_rational,
    power_row,
    project,
    row,
)
from omegasg.reachability import (
    FiniteClosure,
    InfiniteCertificate,
    decide_generation,
    dependency_closure,
    has_positive_cycle,
    quotient_graph,
)

COEFFS = st.sampled_from(
    [Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2), Fraction(2), Fraction(1, 3)]
)

RELAXED = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)


@st.composite
def operators(draw):
    period = draw(st.integers(1, 3))
    n0 = draw(st.integers(1, 3))
    pattern = []
    for _ in range(period):
        offsets = draw(st.lists(st.integers(-3, 3), max_size=2, unique=True))
        pattern.append([(d, draw(COEFFS)) for d in offsets])
    exceptional = {}
    for i in range(1, n0):
        cols = draw(st.lists(st.integers(1, 8), max_size=2, unique=True))
        exceptional[i] = [(c, draw(COEFFS)) for c in cols]
    return build_operator(n0=n0, period=period, pattern=pattern, exceptional_rows=exceptional)


@st.composite
def vectors(draw):
    prefix = tuple(draw(st.lists(COEFFS | st.just(Fraction(0)), max_size=5)))
    tail = draw(st.sampled_from([Fraction(0), Fraction(1), Fraction(-1, 2)]))
    return SequenceVector(prefix=prefix, tail=tail)


def brute_closure(op, n, limit=300):
    """Independent fixpoint saturation; None when it blows past the limit.

    The limit is far above any finite closure reachable with the generated
    parameters (period <= 3, offsets in [-3, 3], columns <= 8), so hitting it
    certifies unbounded growth.
    """
    S = {n}
    while True:
        grown = set(S)
        for i in S:
            grown.update(row(op, i).support())
        if grown == S:
            return S
        S = grown
        if len(S) > limit:
            return None


@RELAXED
@given(operators(), vectors(), vectors(), st.integers(1, 6))
def test_apply_is_linear(op, x, y, n):
    a, b = Fraction(3, 7), Fraction(-5, 2)
    width = max(len(x.prefix), len(y.prefix)) + 8
    combo = SequenceVector(
        prefix=tuple(a * x.coordinate(j) + b * y.coordinate(j) for j in range(1, width + 1)),
        tail=a * x.tail + b * y.tail,
    )
    lhs = apply(op, combo, n)
    rhs = [a * u + b * v for u, v in zip(apply(op, x, n), apply(op, y, n))]
    assert lhs == rhs


@RELAXED
@given(operators(), st.integers(1, 5), st.integers(0, 5))
def test_power_recursion(op, n, k):
    cur = dict(power_row(op, n, k).entries)
    nxt = {}
    for col, coeff in cur.items():
        for j, a in row(op, col).entries:
            nxt[j] = nxt.get(j, Fraction(0)) + coeff * a
    nxt = {j: v for j, v in nxt.items() if v != 0}
    assert dict(power_row(op, n, k + 1).entries) == nxt


@RELAXED
@given(operators(), st.integers(1, 8))
def test_closure_agrees_with_brute_force(op, n):
    result = dependency_closure(op, n)
    brute = brute_closure(op, n)
    if isinstance(result, FiniteClosure):
        assert brute == set(result.S)
        assert result.m == max(result.S)
    else:
        assert brute is None


@RELAXED
@given(operators(), st.integers(1, 8))
def test_finite_closures_contain_power_supports(op, n):
    result = dependency_closure(op, n)
    assume(isinstance(result, FiniteClosure))
    for k in range(7):
        assert set(power_row(op, n, k).support()) <= result.S


@RELAXED
@given(operators(), st.integers(1, 8))
def test_infinite_certificates_are_walkable(op, n):
    result = dependency_closure(op, n)
    assume(isinstance(result, InfiniteCertificate))
    assert result.weight >= 1
    walk = result.walk(3)
    for i, j in zip(walk, walk[1:]):
        assert j in row(op, i).support(), (i, j)
    pumped = result.pumped_columns(5)
    assert pumped == sorted(pumped) and len(set(pumped)) == 5
    # the quotient over-approximates: a concrete pump implies a quotient cycle
    g = quotient_graph(op)
    assert has_positive_cycle(g, g.node_for_row(n)) is not None


@RELAXED
@given(operators())
def test_verdict_iff_no_positive_residue_cycle(op):
    verdict = decide_generation(op)
    g = quotient_graph(op)
    clean = all(
        has_positive_cycle(g, ("res", r)) is None for r in range(op.period)
    )
    assert verdict.generates == clean


@RELAXED
@given(operators())
def test_m_table_monotone(op):
    verdict = decide_generation(op, rows_to_report=range(1, 9))
    assume(verdict.generates)
    table = [verdict.m_of_n[n] for n in range(1, 9)]
    assert table == sorted(table)
    assert all(m >= n for n, m in zip(range(1, 9), table))


@RELAXED
@given(operators())
def test_periodic_rule_matches_closures(op):
    verdict = decide_generation(op)
    assume(verdict.generates)
    rule = verdict.rule
    for n in range(rule.valid_from, rule.valid_from + 2 * op.period):
        res = dependency_closure(op, n)
        assert isinstance(res, FiniteClosure)
        assert res.m == rule.max_column_of_row(n)


@RELAXED
@given(operators(), st.integers(1, 6))
def test_pure_periodic_translation_inclusion(op, n):
    assume(op.n0 == 1)
    r1 = dependency_closure(op, n)
    r2 = dependency_closure(op, n + op.period)
    assume(isinstance(r1, FiniteClosure) and isinstance(r2, FiniteClosure))
    assert frozenset(i + op.period for i in r1.S) <= r2.S
    if min(r2.S) > op.period:
        assert frozenset(i + op.period for i in r1.S) == r2.S


@settings(max_examples=80, deadline=None)
@given(
    st.fractions(min_value=0, max_value=4, max_denominator=8),
    st.fractions(min_value=0, max_value=2, max_denominator=8),
    st.integers(3, 15),
)
def test_truncation_order_minimality(lam, t, neg_log_eps):
    eps = Fraction(1, 10**neg_log_eps)
    K = truncation_order(lam, t, eps)
    assert tail_remainder(lam, t, K) <= eps
    if K > 0:
        assert tail_remainder(lam, t, K - 1) > eps


@RELAXED
@given(operators(), vectors(), st.integers(1, 5))
def test_exp_identity_at_zero_and_determinism(op, x, n):
    assume(decide_generation(op).generates)
    eps = Fraction(1, 10**9)
    rep = exp_apply(op, 0, x, n, eps)
    assert list(rep.values) == project(x, n)
    assert rep.certified_error == 0
    again = exp_apply(op, 0, x, n, eps)
    assert rep == again


@RELAXED
@given(
    operators(),
    vectors(),
    st.fractions(min_value=0, max_value=2, max_denominator=6),
    st.integers(1, 4),
)
def test_certified_tail_dominates_longer_partial_sums(op, x, t, n):
    assume(decide_generation(op).generates)
    eps = Fraction(1, 10**8)
    rep = exp_apply(op, t, x, n, eps)
    # independent oracle: dense accumulation of the series to a higher order
    matrix = closed_submatrix(op, n)
    dense = matrix.as_dense()
    xs = [x.coordinate(j) for j in matrix.index_set]
    acc = list(xs)
    u = list(xs)
    for k in range(1, 2 * rep.K_used + 11):
        u = [sum(r[j] * u[j] for j in range(len(u))) * t / k for r in dense]
        acc = [a + c for a, c in zip(acc, u)]
    pos = {j: p for p, j in enumerate(matrix.index_set)}
    for i in range(1, n + 1):
        assert abs(rep.values[i - 1] - acc[pos[i]]) <= rep.certified_error
    assert norm_bound(matrix) == rep.lambda_used


@settings(max_examples=100, deadline=None)
@given(st.fractions(max_denominator=10**6))
def test_rational_wire_roundtrip(q):
    assert parse_rational(format_rational(q)) == q
