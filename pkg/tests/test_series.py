"""Series-engine tests.

Expected values come from independent oracles computed inside this file
(binomial formulas, linear recurrences, brute-force convolution), never
from the engine itself.
"""

import json
import math
import random
import warnings

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from polygf.series import (
    TruncatedSeries,
    divide,
    sqrt,
    diff,
    substitute,
    half_perimeter,
    hadamard,
    hadamard_join,
    pivot_inverse,
    SeriesError,
    VariableMismatchError,
    NonInvertibleError,
    OutOfTruncationError,
    InsufficientCapError,
    TruncationLossWarning,
)

X1 = ("x",)


def uni(cap):
    """Convenience: (1, x) generators over a univariate universe."""
    return (TruncatedSeries.one(X1, (cap,)),
            TruncatedSeries.variable("x", X1, (cap,)))


def biv(capx, capy):
    vs = ("x", "y")
    caps = (capx, capy)
    return (TruncatedSeries.one(vs, caps),
            TruncatedSeries.variable("x", vs, caps),
            TruncatedSeries.variable("y", vs, caps))


# ---------------------------------------------------------------------------
# construction / bookkeeping
# ---------------------------------------------------------------------------


def test_constructor_drops_zeros_and_checks_caps():
    s = TruncatedSeries(("x",), (5,), {(2,): 0, (3,): 7})
    assert (2,) not in s.coeffs
    assert s.coefficient(3) == 7
    with pytest.raises(SeriesError):
        TruncatedSeries(("x",), (5,), {(6,): 1})


def test_duplicate_variables_rejected():
    with pytest.raises(SeriesError):
        TruncatedSeries(("x", "x"), (3, 3), {})


def test_coefficient_out_of_truncation_is_an_error_not_zero():
    one, x = uni(4)
    g = one / (one - x)
    assert g.coefficient(4) == 1
    with pytest.raises(OutOfTruncationError):
        g.coefficient(5)


def test_coefficient_inside_caps_absent_means_zero():
    one, x = uni(6)
    assert (x * x).coefficient(5) == 0


def test_variable_mismatch():
    one, x = uni(4)
    other = TruncatedSeries.one(("y",), (4,))
    with pytest.raises(VariableMismatchError):
        x + other


# ---------------------------------------------------------------------------
# add / mul / div / sqrt against oracles
# ---------------------------------------------------------------------------


def test_add_cancellation():
    one, x = uni(8)
    assert ((one + x) + (x - one)).coeffs == {(1,): mpq(2)}


def test_mul_simple():
    one, x = uni(8)
    assert ((one + x) * (one - x)).coeffs == {(0,): mpq(1), (2,): mpq(-1)}


def brute_convolution(a, b, cap):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            if ea + eb <= cap:
                out[ea + eb] = out.get(ea + eb, mpq(0)) + ca * cb
    return {e: c for e, c in out.items() if c}


def test_mul_matches_brute_convolution():
    rng = random.Random(7)
    for _ in range(25):
        cap = rng.randint(3, 9)
        a = {rng.randint(0, cap): mpq(rng.randint(-5, 5), rng.randint(1, 4))
             for _ in range(rng.randint(1, 6))}
        b = {rng.randint(0, cap): mpq(rng.randint(-5, 5), rng.randint(1, 4))
             for _ in range(rng.randint(1, 6))}
        sa = TruncatedSeries(X1, (cap,), {(e,): c for e, c in a.items()})
        sb = TruncatedSeries(X1, (cap,), {(e,): c for e, c in b.items()})
        expected = brute_convolution(a, b, cap)
        assert (sa * sb).coeffs == {(e,): c for e, c in expected.items()}


def test_geometric_series():
    one, x = uni(12)
    g = one / (one - x)
    assert all(g.coefficient(n) == 1 for n in range(13))


def test_div_linear_recurrence_oracle():
    # (1-x)/(1-3x+x^2): c_0 = 1, c_1 = 2, then c_n = 3c_{n-1} - c_{n-2}
    one, x = uni(20)
    f = (one - x) / (one - 3 * x + x ** 2)
    oracle = [1, 2]
    while len(oracle) < 21:
        oracle.append(3 * oracle[-1] - oracle[-2])
    assert [f.coefficient(n) for n in range(21)] == oracle


def test_div_by_rational_constant():
    one, x = uni(6)
    half = (one + x) / 2
    assert half.coefficient(0) == mpq(1, 2)
    assert half.coefficient(1) == mpq(1, 2)


def test_div_zero_constant_term_rejected():
    one, x = uni(6)
    with pytest.raises(NonInvertibleError):
        one / x


def test_div_mul_round_trip_bivariate():
    one, x, y = biv(7, 7)
    b = one - 2 * x - y + 3 * x * y
    a = one + x + y ** 2
    assert (divide(a, b) * b).agrees_with(a)


def test_sqrt_one_minus_four_x_binomial_oracle():
    # [x^n] sqrt(1-4x) = -(2/n) * binom(2n-2, n-1) for n >= 1
    one, x = uni(16)
    r = sqrt(one - 4 * x)
    assert r.coefficient(0) == 1
    for n in range(1, 17):
        assert r.coefficient(n) == mpq(-2 * math.comb(2 * n - 2, n - 1), n)


def test_sqrt_squares_back_bivariate():
    one, x, y = biv(6, 6)
    a = one - 2 * x - 2 * y - 2 * x * y + x ** 2 + y ** 2
    r = sqrt(a)
    assert (r * r).agrees_with(a)


def test_sqrt_rational_constant_term():
    one, x = uni(5)
    r = sqrt(one * mpq(9, 4) + x)
    assert r.coefficient(0) == mpq(3, 2)
    assert (r * r).agrees_with(one * mpq(9, 4) + x)


def test_sqrt_non_square_constant_rejected():
    one, x = uni(5)
    with pytest.raises(NonInvertibleError):
        sqrt(one * 2 + x)


def test_pow_negative_exponent():
    one, x = uni(10)
    inv2 = (one - x) ** -2
    assert [inv2.coefficient(n) for n in range(5)] == [1, 2, 3, 4, 5]


# ---------------------------------------------------------------------------
# diff / substitute
# ---------------------------------------------------------------------------


def test_diff_basics():
    one, x, y = biv(8, 8)
    assert diff(y * y, "y").coeffs == {(0, 1): mpq(2)}
    g = one / (one - x)
    d = diff(g, "x")
    assert [d.coefficient((n, 0)) for n in range(7)] == list(range(1, 8))
    assert d.caps == (7, 8)


def test_diff_product_rule():
    one, x, y = biv(8, 8)
    s = x * y + x * x * y
    assert diff(s * s, "y").agrees_with(2 * s * diff(s, "y"))


def test_substitute_rename_merges_exponents():
    one, x, y = biv(6, 6)
    g = (one + x) * (one + y)
    xonly = substitute(g, "y", TruncatedSeries.variable("x", X1, (6,)))
    assert xonly.vars == ("x",)
    assert [xonly.coefficient(n) for n in range(3)] == [1, 2, 1]


def test_substitute_to_zero_gives_slice():
    one, x, y = biv(6, 6)
    g = one / (one - x - y)
    sliced = substitute(g, "x", TruncatedSeries.zero(("x", "y"), (6, 6)))
    assert all(sliced.coefficient((0, m)) == 1 for m in range(7))
    assert sliced.max_exponent("x") == 0


def test_substitute_composition():
    # 1/(1-x) with x -> y + y^2 equals 1/(1 - y - y^2): Fibonacci numbers.
    one, x = uni(10)
    g = one / (one - x)
    rep = TruncatedSeries(("y",), (10,), {(1,): 1, (2,): 1})
    comp = substitute(g, "x", rep)
    fib = [1, 1]
    while len(fib) < 11:
        fib.append(fib[-1] + fib[-2])
    assert [comp.coefficient(n) for n in range(11)] == fib


def test_substitute_insufficient_cap_is_an_error():
    # composing into a series only known to order 4 cannot produce a
    # trustworthy order-9 result
    one, x = uni(4)
    g = one / (one - x)
    rep = TruncatedSeries(("y",), (9,), {(1,): 1, (2,): 1})
    with pytest.raises(InsufficientCapError):
        substitute(g, "x", rep)


def test_substitute_nonzero_constant_rejected():
    one, x = uni(6)
    rep = TruncatedSeries(("y",), (6,), {(0,): 1, (1,): 1})
    with pytest.raises(NonInvertibleError):
        substitute(one / (one - x), "x", rep)


# ---------------------------------------------------------------------------
# half-perimeter operator
# ---------------------------------------------------------------------------


def test_half_perimeter_monomial():
    one, x = uni(8)
    assert half_perimeter(x ** 2, "x").coeffs == {(1,): mpq(1)}
    assert half_perimeter(x ** 3, "x").is_zero()


def test_half_perimeter_worked_example():
    # E_x[1/(1 - x - x_star)], starred name independent, then renamed:
    # equals (1-x)/(1 - 3x + x^2).
    vs = ("x", "x_star")
    one = TruncatedSeries.one(vs, (24, 12))
    x = TruncatedSeries.variable("x", vs, (24, 12))
    xs = TruncatedSeries.variable("x_star", vs, (24, 12))
    e = half_perimeter(one / (one - x - xs), "x")
    merged = substitute(e, "x_star",
                        TruncatedSeries.variable("x", X1, (12,)))
    one1, x1 = uni(12)
    target = (one1 - x1) / (one1 - 3 * x1 + x1 ** 2)
    assert merged.agrees_with(target)


def test_half_perimeter_star_product_law():
    # E_x[f(x) g(x_star)] = g(x_star) E_x[f(x)]
    rng = random.Random(31)
    vs = ("x", "x_star")
    caps = (12, 6)
    for _ in range(10):
        f = TruncatedSeries(vs, caps, {
            (rng.randint(0, 12), 0): rng.randint(-4, 4) for _ in range(5)})
        g = TruncatedSeries(vs, caps, {
            (0, rng.randint(0, 6)): rng.randint(-4, 4) for _ in range(4)})
        assert half_perimeter(f * g, "x").agrees_with(
            g.truncated({"x": 6}) * half_perimeter(f, "x"))


def test_half_perimeter_caps_halve():
    one, x, y = biv(9, 5)
    assert half_perimeter(one, "x").caps == (4, 5)


# ---------------------------------------------------------------------------
# Hadamard product and restricted join
# ---------------------------------------------------------------------------


def test_hadamard_coefficientwise_oracle():
    one, x = uni(9)
    n_series = diff(one / (one - x), "x") * x  # sum n x^n (cap drops to 8)
    sq = hadamard(n_series, n_series, "x")
    assert [sq.coefficient(n) for n in range(9)] == [n * n for n in range(9)]


def test_hadamard_with_zero():
    one, x = uni(5)
    assert hadamard(one / (one - x),
                    TruncatedSeries.zero(X1, (5,)), "x").is_zero()


def test_hadamard_keeps_other_variables_multiplicative():
    one, x, y = biv(6, 6)
    a = x * y + x  # slices in x: {1: y + 1}
    b = x * y
    h = hadamard(a, b, "x")
    assert h.coeffs == {(1, 1): mpq(1), (1, 2): mpq(1)}


def test_join_polynomials():
    one, x = uni(8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        j = hadamard_join(one + x, one + x, "x")
    assert j.vars == ()
    assert j.coefficient(()) == 2
    assert not j.truncation_warning


def test_join_pole_law():
    # f(t) joined with 1/(1 - a t) = f(a) for polynomial f.  The sum is
    # exact (the polynomial kills the tail), so no loss warning.
    vs = ("t",)
    one = TruncatedSeries.one(vs, (30,))
    t = TruncatedSeries.variable("t", vs, (30,))
    f = 3 * t ** 2 - t + 5 * t ** 7
    alpha = mpq(2, 3)
    geom = one / (one - alpha * t)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        j = hadamard_join(f, geom, "t")
    expected = 3 * alpha ** 2 - alpha + 5 * alpha ** 7
    assert j.coefficient(()) == expected
    assert not j.truncation_warning


def test_join_warns_when_tail_may_be_lost():
    # joining two infinite series uses the final slice, which is nonzero
    one, x = uni(10)
    g = one / (one - x)
    with pytest.warns(TruncationLossWarning):
        j = hadamard_join(g, g, "x")
    assert j.coefficient(()) == 11  # slices 0..10 each contribute 1
    assert j.truncation_warning


def test_join_eliminates_variable_keeps_others():
    one, x, y = biv(6, 6)
    a = x * y + x ** 2 * y ** 2
    b = x + x ** 2 * y
    j = hadamard_join(a, b, "x")
    # slice products: n=1: y*1 = y ; n=2: y^2 * y = y^3
    assert j.vars == ("y",)
    assert j.coeffs == {(1,): mpq(1), (3,): mpq(1)}


def test_pivot_inverse_laurent_expansion():
    vs = ("x", "s")
    one = TruncatedSeries.one(vs, (6, 5))
    x = TruncatedSeries.variable("x", vs, (6, 5))
    s = TruncatedSeries.variable("s", vs, (6, 5))
    inv = pivot_inverse(x - s, (1, 0))
    for k in range(6):
        assert inv.coefficient({"s": k, "x": -k - 1}) == 1
    assert (inv * (x - s)).agrees_with(one)


def test_pivot_inverse_wrong_direction_fails():
    # expanding 1/(1-x) about the x term never terminates under the caps
    vs = ("x",)
    one = TruncatedSeries.one(vs, (6,))
    x = TruncatedSeries.variable("x", vs, (6,))
    with pytest.raises(NonInvertibleError):
        pivot_inverse(one - x, (1,))


# ---------------------------------------------------------------------------
# randomized ring laws (hypothesis)
# ---------------------------------------------------------------------------

small_series = st.builds(
    lambda d: TruncatedSeries(("x", "y"), (5, 5),
                              {k: mpq(v) for k, v in d.items()}),
    st.dictionaries(
        st.tuples(st.integers(0, 5), st.integers(0, 5)),
        st.integers(-9, 9), max_size=6))


@given(small_series, small_series, small_series)
@settings(max_examples=60, deadline=None)
def test_ring_laws(a, b, c):
    assert (a + b).agrees_with(b + a)
    assert (a * b).agrees_with(b * a)
    assert ((a + b) + c).agrees_with(a + (b + c))
    assert (a * (b + c)).agrees_with(a * b + a * c)


@given(small_series, small_series)
@settings(max_examples=40, deadline=None)
def test_mul_associative(a, b):
    c = TruncatedSeries(("x", "y"), (5, 5), {(1, 0): 2, (0, 1): -1})
    assert ((a * b) * c).agrees_with(a * (b * c))


@given(small_series)
@settings(max_examples=40, deadline=None)
def test_div_round_trip_random(a):
    one = TruncatedSeries.one(("x", "y"), (5, 5))
    b = one + a * TruncatedSeries.variable("x", ("x", "y"), (5, 5))
    assert (divide(a, b) * b).agrees_with(a)


@given(small_series)
@settings(max_examples=40, deadline=None)
def test_sqrt_of_square_random(a):
    one = TruncatedSeries.one(("x", "y"), (5, 5))
    x = TruncatedSeries.variable("x", ("x", "y"), (5, 5))
    b = one + x * a
    assert sqrt(b * b).agrees_with(b)


@given(small_series, small_series)
@settings(max_examples=40, deadline=None)
def test_hadamard_distributes(a, b):
    c = TruncatedSeries(("x", "y"), (5, 5), {(2, 1): 3, (0, 3): -2})
    assert hadamard(a + b, c, "x").agrees_with(
        hadamard(a, c, "x") + hadamard(b, c, "x"))


@given(small_series, small_series)
@settings(max_examples=40, deadline=None)
def test_join_product_rule(a, b):
    # d/dy (a join_x b) = (da/dy join_x b) + (a join_x db/dy)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationLossWarning)
        lhs = diff(hadamard_join(a, b, "x"), "y")
        rhs = (hadamard_join(diff(a, "y"), b, "x")
               + hadamard_join(a, diff(b, "y"), "x"))
    assert lhs.agrees_with(rhs)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_json_schema_shape():
    one, x, y = biv(3, 2)
    s = x * y * 36 + x * mpq(1, 2)
    data = json.loads(s.to_json())
    assert list(data) == ["vars", "caps", "coeffs"]
    assert data["vars"] == ["x", "y"]
    assert data["caps"] == {"x": 3, "y": 2}
    assert [[1, 0], "1/2"] in data["coeffs"]
    assert [[1, 1], "36"] in data["coeffs"]


def test_json_round_trip_exact():
    one, x, y = biv(5, 5)
    s = divide(one + x * mpq(7, 3), one - x - y)
    assert TruncatedSeries.from_json(s.to_json()) == s


def test_json_deterministic():
    one, x, y = biv(4, 4)
    s = (one + x + y) ** 3
    assert s.to_json() == (one + x + y).__pow__(3).to_json()
