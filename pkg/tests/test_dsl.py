from fractions import Fraction

import pytest
from hypothesis import given

from densets import dsl as D
from densets import sets as S
from densets.constructions import bernoulli_set
from densets.errors import ArityError, DomainError, DSLSyntaxError
from densets.permutations import PermSpec

from strategies import exprs


def test_parse_examples():
    assert D.parse("within(odds, arith(2,4))") == D.Within(D.Prim("odds"), D.Arith(2, 4))
    assert D.parse("xr(1/3, seed:42)") == D.Xr(D.Rational(Fraction(1, 3)), D.Source(42))
    assert D.to_text(D.parse("into(evens, odds)")) == "into(evens, odds)"


def test_parse_literals():
    assert D.parse("bern(0.25, 3)") == D.Bern(D.Rational(Fraction(1, 4)), 3)
    assert D.parse("bern(seed:9, 3)") == D.Bern(D.SeedReal(9), 3)
    assert D.parse("col(seed:1,mode=pairing, 4)") == D.Col(D.Source(1, "pairing"), 4)
    assert D.parse("partA(column=evens, 2)") == D.PartA(D.Oracle("evens"), 2)
    assert D.parse("xr(seed:3, column=evens)") == D.Xr(D.SeedReal(3), D.Oracle("evens"))
    assert D.parse("perm(blockshuffle:w=256,seed=7, omega)") == D.Perm(PermSpec("blockshuffle", 256, 7), D.Prim("omega"))
    assert D.parse("perm(joinhat, omega)") == D.Perm(PermSpec("joinhat"), D.Prim("omega"))


@pytest.mark.parametrize(
    "text, error, offset",
    [
        ("into(evens odds)", DSLSyntaxError, 11),
        ("into(evens)", ArityError, 0),
        ("compl(evens, odds)", ArityError, 13),
        ("evens(1)", ArityError, 5),
        ("primes", DSLSyntaxError, 0),
        ("into(evens, odds) x", DSLSyntaxError, 18),
        ("into(evens, $)", DSLSyntaxError, 12),
        ("arith(2", DSLSyntaxError, 7),
        ("bern(evens, 1)", DSLSyntaxError, 5),
    ],
)
def test_errors_carry_offsets(text, error, offset):
    with pytest.raises(error) as info:
        D.parse(text)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


@pytest.mark.parametrize("text", ["bern(3/2, 1)", "bern(0/5, 1)", "arith(4, 4)", "xr(1/3, column=primes)",
                                  "perm(rotate, omega)"])
def test_domain_errors(text):
    with pytest.raises(DomainError):
        D.parse(text)


@given(exprs)
def test_round_trip(e):
    assert D.parse(D.to_text(e)) == e


def test_eval_examples():
    assert S.prefix(D.evaluate("omega"), 500) == list(range(500))
    lhs = D.evaluate("into(within(bern(1/2,7), evens), evens)")
    rhs = D.evaluate("inter(bern(1/2,7), evens)")
    assert S.prefix_equal(lhs, rhs, 10**4)
    assert S.prefix(D.evaluate("partA(column=evens, 2)"), 200) == list(range(4, 200, 8))


def test_eval_matches_library():
    assert S.prefix(D.evaluate("bern(1/3, 5)"), 5000) == S.prefix(bernoulli_set(Fraction(1, 3), 5), 5000)


def test_eval_shares_identical_subtrees():
    ev = D.Evaluator()
    h = ev(D.parse("union(bern(1/2,3), compl(bern(1/2,3)))"))
    assert h.a is h.b.a
    assert ev(D.parse("partA(seed:2, 1)")) is ev(D.parse("partA(seed:2, 1)"))
    assert ev.partition(D.Source(2)) is ev.partition(D.Source(2))


def test_eval_is_pure():
    text = "perm(blockshuffle:w=16,seed=3, xr(1/3, seed:1))"
    assert S.prefix(D.evaluate(text), 5000) == S.prefix(D.evaluate(text), 5000)
