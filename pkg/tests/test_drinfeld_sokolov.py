from fractions import Fraction

import pytest

from helpers import poly, reference
from pfaffian_tau.algebra import ConfigurationError, MatSeries, series_mul
from pfaffian_tau.cli import q_label
from pfaffian_tau.combinatorics import StrictTuple
from pfaffian_tau.drinfeld_sokolov import (
    example_configs,
    example_problem,
    problem_from_config,
    psi_plus,
    time_ring,
)
from pfaffian_tau.lie import AlgebraSpec

REF = reference()


def rows_by_tuple(problem, max_weight=None):
    return {str(r["tuple"]): r for r in problem.tables(max_weight)}


@pytest.mark.parametrize("name", ["J1", "J2", "J4"])
def test_tau_goldens(name):
    pb = example_problem(name)
    res = pb.tau()
    assert res.value == poly(REF[name]["tau"], pb.ring)
    assert res.exact


def test_b2_tau_with_a2_zero():
    pb = example_problem("J3")
    value = pb.tau().value.subs({"a2": 0})
    assert value == poly(REF["J3"]["tau_a2_zero"], pb.ring)
    assert len(value.terms) == 13


@pytest.mark.parametrize("name", ["J1", "J2", "J3", "J4"])
def test_minor_tables(name):
    pb = example_problem(name)
    got = rows_by_tuple(pb, 4)
    for row in REF[name]["rows"]:
        r = got[row["tuple"]]
        assert r["pf_d"] == poly(row["pf_d"], pb.ring), row["tuple"]
        assert r["pf_a"] == poly(row["pf_a"], pb.ring), row["tuple"]
        assert q_label(r["tuple"], r["pf_a"]) == row["q_label"]
    if name != "J3":
        # the small examples have no further nonzero minors at all
        assert len(pb.tables()) == len(REF[name]["rows"])


def test_b2_table_is_complete_up_to_weight_four():
    pb = example_problem("J3")
    assert sorted(rows_by_tuple(pb, 4)) == sorted(r["tuple"] for r in REF["J3"]["rows"])


def test_d4_row_label():
    row = REF["J4"]["rows"][0]
    assert StrictTuple.parse(row["tuple"]).shifted_label() == row["shifted_label"]


def time_weights(ring):
    return [int(v[1:]) if v.startswith("t") else 0 for v in ring.variables]


def test_psi_plus_is_the_exponential_of_the_flow():
    from pfaffian_tau.drinfeld_sokolov import flow_exponent

    pb = example_problem("J1")
    kmax, ring = 3, pb.ring
    Y = flow_exponent(pb.data, ring, kmax)
    # Y is not nilpotent: sum the exponential to a time-degree cap instead
    direct = term = MatSeries.identity(3, ring, kmax=kmax)
    for n in range(1, 19):
        term = series_mul(term, Y).scale(ring.scalar(Fraction(1, n)))
        direct = direct + term
    qs = psi_plus(pb.data, ring, kmax)
    w = time_weights(ring)
    for k in range(kmax + 1):
        for i in range(3):
            for j in range(3):
                # weighted degree <= 9 means at most 9 factors of Y
                assert qs.coeff(k)[i][j].truncate(9, w) == direct.coeff(k)[i][j].truncate(9, w)
    inverse = psi_plus(pb.data, ring, kmax, -1)
    assert series_mul(qs, inverse).equals(MatSeries.identity(3, ring, kmax=kmax))


def test_non_orthogonal_initial_condition_is_rejected():
    cfg = dict(example_configs()["J1"])
    cfg["X"] = {"-1": [["0", "0", "0"], ["a", "0", "0"], ["0", "0", "0"]]}
    with pytest.raises(ConfigurationError):
        problem_from_config(cfg).validate()


def test_non_nilpotent_initial_condition_is_rejected():
    cfg = dict(example_configs()["J1"])
    cfg["X"] = {"-1": [["0", "1", "0"], ["1", "0", "-1"], ["0", "-1", "0"]]}
    pb = problem_from_config(cfg)
    with pytest.raises(ConfigurationError):
        pb.d_kernel()


@pytest.mark.parametrize(
    "cfg,message",
    [
        ({"algebra": {"series": "B"}, "X": {}}, "malformed"),
        ({"algebra": {"series": "B", "rank": 1}, "X": {"-1": [["0"]]}}, "not 3 x 3"),
        ({"algebra": {"series": "B", "rank": 1}, "times": [2], "X": {}}, "odd"),
    ],
)
def test_config_errors(cfg, message):
    with pytest.raises(ConfigurationError, match=message):
        problem_from_config(cfg)


def test_time_ring_names():
    assert time_ring(["a"], [1, 3]).variables == ("a", "t1", "t3")
    with pytest.raises(ConfigurationError):
        time_ring(["t1"], [1])


def test_example_sizes():
    for name, (series, rank) in {"J1": ("B", 1), "J2": ("B", 1), "J3": ("B", 2), "J4": ("D", 4)}.items():
        assert example_problem(name).spec == AlgebraSpec(series, rank)
