import random

import pytest

from nlconcepts.dsl import (
    DslSyntaxError,
    eval_number,
    format_concept,
    number_extension,
    parse_concept,
)
from nlconcepts.dsl.generate import number_predicates, random_number_expr
from nlconcepts.dsl.number import parse_number_concept


def ext(src):
    return number_extension(parse_concept(src, "number").expr)


def test_basic_predicates():
    assert ext("even(x)") == frozenset(range(2, 101, 2))
    assert ext("odd(x)") == frozenset(range(1, 101, 2))
    assert ext("square(x)") == frozenset(i * i for i in range(1, 11))
    assert ext("cube(x)") == frozenset([1, 8, 27, 64])
    assert ext("multiple(10, x)") == frozenset(range(10, 101, 10))
    assert ext("between(30, 45, x)") == frozenset(range(30, 46))
    assert ext("ends_in(7, x)") == frozenset(range(7, 101, 10))
    assert ext("contains_digit(9, x)") == frozenset(
        n for n in range(1, 101) if "9" in str(n)
    )
    assert ext("in_set({3, 1, 4}, x)") == frozenset([1, 3, 4])


def test_prime_convention():
    # 1 is not prime
    primes = ext("prime(x)")
    assert 1 not in primes
    assert 2 in primes
    assert {2, 3, 5, 7, 11, 97}.issubset(primes)
    assert 91 not in primes  # 7 * 13


def test_power_convention():
    # power(b, x) includes b^0 = 1
    assert ext("power(2, x)") == frozenset([1, 2, 4, 8, 16, 32, 64])
    assert ext("power(3, x)") == frozenset([1, 3, 9, 27, 81])
    assert ext("power(10, x)") == frozenset([1, 10, 100])


def test_arithmetic_and_comparisons():
    assert ext("x < 10") == frozenset(range(1, 10))
    assert ext("x mod 7 == 0") == frozenset(range(7, 101, 7))
    assert ext("x ^ 2 < 50") == frozenset(range(1, 8))
    assert ext("(x + 1) mod 10 == 0") == frozenset(range(9, 101, 10))
    assert ext("2 * x == 50") == frozenset([25])


def test_chained_comparison_desugars_to_and():
    assert ext("10 < x < 20") == ext("10 < x and x < 20")


def test_boolean_connectives_and_literals():
    assert ext("true") == frozenset(range(1, 101))
    assert ext("false") == frozenset()
    assert ext("even(x) and x < 10") == frozenset([2, 4, 6, 8])
    assert ext("x < 3 or x > 98") == frozenset([1, 2, 99, 100])
    assert ext("not even(x)") == ext("odd(x)")
    # precedence: and binds tighter than or
    assert ext("even(x) and x < 5 or x == 99") == frozenset([2, 4, 99])


def test_evaluation_is_total():
    # division-by-zero-style cases and huge exponents must not raise
    for src in ["x mod (x - x) == 0", "x ^ 4 > 0", "multiple(0, x)", "power(0, x)"]:
        expr = parse_concept(src, "number").expr
        for x in range(1, 101):
            assert isinstance(eval_number(expr, x), bool)


def test_saturating_arithmetic():
    big = parse_concept("(x * 100000000) * 100000000 > 0", "number").expr
    assert eval_number(big, 100)  # saturates instead of overflowing


def test_syntax_errors():
    for src in ["", "even(", "x <", "foo(x)", "even(x) and", "x 5", "this.color == green"]:
        with pytest.raises(DslSyntaxError):
            parse_number_concept(src)


def test_pred_arity_enforced():
    with pytest.raises(DslSyntaxError):
        parse_number_concept("even(x, 2)")
    with pytest.raises(DslSyntaxError):
        parse_number_concept("between(1, x)")


def test_grammar_file_predicates_match_implementation():
    from nlconcepts.dsl.number import PREDICATES

    assert number_predicates() == PREDICATES


def test_format_round_trip_fixed_cases():
    cases = [
        "even(x)",
        "power(2, x)",
        "in_set({1, 3, 4}, x)",
        "not (even(x) or x < 10)",
        "(x + 1) mod 10 == 0",
        "even(x) and (x < 5 or x == 99)",
        "between(30, 45, x)",
    ]
    for src in cases:
        p = parse_concept(src, "number")
        text = format_concept(p)
        p2 = parse_concept(text, "number")
        assert format_concept(p2) == text
        assert number_extension(p.expr) == number_extension(p2.expr)


def test_format_round_trip_fuzzed():
    from nlconcepts.dsl import ConceptProgram

    rng = random.Random(7)
    for _ in range(300):
        expr = random_number_expr(rng)
        text = format_concept(ConceptProgram("number", expr))
        reparsed = parse_concept(text, "number")
        assert number_extension(reparsed.expr) == number_extension(expr), text
        assert format_concept(reparsed) == text, text
