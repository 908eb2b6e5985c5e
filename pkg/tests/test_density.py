import json
from fractions import Fraction

import pytest

from densets import sets as S
from densets.constructions import bernoulli_set
from densets.density import (
    density_at,
    density_report,
    geometric_grid,
    intrinsic_probe,
    parse_grid,
    principal_checkpoints,
)
from densets.errors import DomainError
from densets.permutations import PermSpec, default_family

from oracles import density as brute_density


def test_density_at_examples():
    assert density_at(S.evens(), 10) == Fraction(1, 2)
    assert density_at(S.factorials(), 10) == Fraction(3, 10)
    assert density_at(S.omega(), 7) == 1
    with pytest.raises(DomainError):
        density_at(S.omega(), 0)


@pytest.mark.parametrize("n", [1, 2, 17, 100, 999])
def test_density_at_matches_counting(n):
    a = S.into(S.arithmetic(1, 3), S.compl(S.factorials()))
    assert density_at(a, n) == brute_density(S.prefix(a, 2000), n)


def test_principal_checkpoint_examples():
    rep = principal_checkpoints(S.evens(), 5)
    assert (rep.upper[4].n, rep.upper[4].rho) == (9, Fraction(5, 9))
    assert (rep.lower[-1].n, rep.lower[-1].rho) == (8, Fraction(1, 2))
    assert all(c.rho == 1 for c in principal_checkpoints(S.omega(), 50).upper)
    fac = principal_checkpoints(S.factorials(), 4)
    assert (fac.lower[-1].n, fac.lower[-1].rho) == (24, Fraction(1, 8))


def test_principal_skips_zero_lower_checkpoint():
    rep = principal_checkpoints(S.evens(), 3)
    assert all(c.n > 0 for c in rep.lower)
    assert len(rep.lower) == 2


def test_estimators_agree_exactly():
    a = bernoulli_set(Fraction(1, 2), 99)
    rep = principal_checkpoints(a, 2000)
    for c in rep.checkpoints:
        assert density_at(a, c.n) == c.rho


def test_report_invariants():
    a = bernoulli_set(Fraction(1, 3), 5)
    rep = density_report(a, geometric_grid(10**5))
    counts = [c.count for c in rep.checkpoints]
    assert counts == sorted(counts)
    assert all(0 <= c.rho <= 1 for c in rep.checkpoints)
    assert rep.tail_inf <= rep.tail_sup
    assert rep.checkpoints[-1].n == 10**5


def test_geometric_grid_defaults():
    grid = geometric_grid(1000)
    assert grid[0] == 64 and grid[1] == 84 and grid[-1] == 1000
    assert grid == sorted(set(grid))


def test_report_evens():
    rep = density_report(S.evens(), geometric_grid(10**4))
    for c in rep.checkpoints:
        assert abs(c.rho - Fraction(1, 2)) <= Fraction(1, c.n)
    assert rep.tail_sup - rep.tail_inf <= Fraction(2, rep.checkpoints[0].n)


def test_report_empty_and_join():
    assert all(c.rho == 0 for c in density_report(S.empty(), [1, 10, 100]).checkpoints)
    rep = density_report(S.join(S.evens(), S.empty()), geometric_grid(10**5))
    assert abs(rep.tail_sup - Fraction(1, 4)) < Fraction(1, 100)
    assert abs(rep.tail_inf - Fraction(1, 4)) < Fraction(1, 100)


def test_density_zero_bound_on_prefixes():
    x = bernoulli_set(Fraction(1, 2), 3)
    h = S.factorials()
    for n in range(1, 3000, 7):
        bound = Fraction(S.count(h, n), n)
        assert abs(density_at(S.union(x, h), n) - density_at(x, n)) <= bound
        assert abs(density_at(S.diff(x, h), n) - density_at(x, n)) <= bound


def test_join_interleaving():
    a, b = bernoulli_set(Fraction(1, 2), 1), bernoulli_set(Fraction(1, 3), 2)
    for n in range(1, 2000, 13):
        assert 2 * n * density_at(S.join(a, b), 2 * n) == S.count(a, n) + S.count(b, n)


def test_into_principal_decomposition():
    a, b = bernoulli_set(Fraction(1, 2), 11), bernoulli_set(Fraction(1, 2), 12)
    ba = S.into(b, a)
    elems_b = b.first(500)
    for k in range(1, 500):
        bk = int(elems_b[k])
        lhs = Fraction(k, ba.nth(k))
        rhs = Fraction(k, bk) * Fraction(bk, a.nth(bk))
        assert lhs == rhs


def test_csv_and_json_rendering():
    rep = density_report(S.evens(), [10, 21])
    text = rep.to_csv({"expr": "evens"})
    lines = text.splitlines()
    assert lines[0] == '# config: {"expr": "evens"}'
    assert "n,count,rho_num,rho_den,rho_float" in lines
    assert lines[-1] == "21,11,11,21,0.52380952381"
    data = json.loads(rep.to_json({"expr": "evens"}))
    assert data["config"] == {"expr": "evens"}
    assert data["checkpoints"][0] == {"n": 10, "count": 5, "rho_num": 1, "rho_den": 2, "rho_float": "0.5"}


def test_parse_grid():
    assert parse_grid("linear:step=25", 100) == [25, 50, 75, 100]
    assert parse_grid("geometric:n0=10,g=2", 100) == [10, 20, 40, 80, 100]
    with pytest.raises(DomainError):
        parse_grid("spiral", 10)


def test_default_family_shape():
    fam = default_family()
    assert len(fam) == 18
    assert sum(1 for p in fam if p.kind == "blockshuffle") == 16
    assert {p.width for p in fam if p.width} == {2, 16, 256, 4096}


def test_probe_omega_has_zero_spread():
    res = intrinsic_probe(S.omega(), max_n=10**4)
    assert res.spread == 0
    assert all(c.rho == 1 for _, r in res.reports for c in r.checkpoints)


def test_probe_flags_join_with_empty():
    a = bernoulli_set(Fraction(1, 2), 1)
    res = intrinsic_probe(S.join(a, S.empty()), [PermSpec("identity"), PermSpec("joinhat")], max_n=10**5)
    ident, hat = (r for _, r in res.reports)
    assert abs(float(ident.final.rho) - 0.25) < 0.01
    assert abs(float(hat.final.rho) - 0.5) < 0.01
    assert res.unstable
