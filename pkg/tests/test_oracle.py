import itertools

import pytest

from gametree.errors import ValidationError
from gametree.lattice import build_lattice
from gametree.oracle import _stopping_rules, brute_force_value
from gametree.payoff import PayoffSpec, build
from gametree.solver import solve
from gametree.volatility import make_constant, make_truncated_cev


def test_rule_counts():
    # stopping times on a ternary tree of depth d with forced stop at the leaves: S(d) = 1 + S(d-1)^3
    assert [len(_stopping_rules(0, n, 3 ** n)) for n in (1, 2, 3)] == [2, 9, 730]


def test_rules_are_adapted():
    n = 2
    for rule in _stopping_rules(0, n, 9):
        paths = list(itertools.product((-1, 0, 1), repeat=n))
        for a, b in itertools.combinations(range(9), 2):
            k = rule[a]
            # paths sharing the first k moves must stop at the same level when one stops at k
            if paths[a][:k] == paths[b][:k]:
                assert rule[b] == k


def test_size_limit():
    lat = build_lattice(make_constant(0.3), 100.0, 1.0, 4)
    with pytest.raises(ValidationError):
        brute_force_value(lat, build(PayoffSpec("game_put", 100, 1.0, 0.0, 1.0)))


MATRIX = list(itertools.product(
    ["game_call", "game_put"],
    ["undiscounted_strike", "literal"],
    ["constant", "cev"],
    [0.0, 5.0],
))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("kind, convention, model, penalty", MATRIX)
def test_solver_equals_oracle(n, kind, convention, model, penalty):
    vol = make_constant(0.3) if model == "constant" else make_truncated_cev()
    p = build(PayoffSpec(kind, 100.0, 0.5, 0.06, penalty, convention))
    lat = build_lattice(vol, 98.0, 0.5, n)
    inf_sup, sup_inf = brute_force_value(lat, p)
    v = solve(lat, p).value
    assert abs(v - inf_sup) <= 1e-12
    assert abs(v - sup_inf) <= 1e-12


def test_zero_penalty_oracle():
    p = build(PayoffSpec("game_call", 100.0, 1.0, 0.03, 0.0))
    lat = build_lattice(make_truncated_cev(), 107.0, 1.0, 3)
    inf_sup, sup_inf = brute_force_value(lat, p)
    assert inf_sup == pytest.approx(7.0, abs=1e-12)
    assert sup_inf == pytest.approx(7.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["american_call", "american_put"])
def test_american_oracle(kind):
    p = build(PayoffSpec(kind, 100.0, 1.0, 0.05))
    lat = build_lattice(make_truncated_cev(), 96.0, 1.0, 3)
    inf_sup, sup_inf = brute_force_value(lat, p)
    assert solve(lat, p).value == pytest.approx(inf_sup, abs=1e-12)
    assert inf_sup == sup_inf
