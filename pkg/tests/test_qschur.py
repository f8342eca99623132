from fractions import Fraction

import pytest

from helpers import poly, reference
from pfaffian_tau.algebra import ConfigurationError, PolyRing
from pfaffian_tau.drinfeld_sokolov import time_ring
from pfaffian_tau.qschur import q_lambda, q_multiple, q_pair, q_r

R = time_ring([], [1, 3, 5, 7, 9])
t1, t3, t5 = (R.gen(v) for v in ("t1", "t3", "t5"))


def parts_of(key):
    return tuple(int(x) for x in key.split(","))


def test_low_q_r():
    assert q_r(0, R) == R.one()
    assert q_r(3, R) == poly("t1**3/6 + t3", R)
    assert q_r(6, R) == poly("t1**6/720 + t1**3*t3/6 + t3**2/2 + t1*t5", R)


RING5 = time_ring([], [1, 3, 5])


def test_q_r_matches_exponential_series():
    # coefficient extraction from exp(sum t_k z^k) by truncated power series
    S = PolyRing(["t1", "t3", "t5", "z"])
    z = S.gen("z")
    arg = S.gen("t1") * z + S.gen("t3") * z**3 + S.gen("t5") * z**5
    total, term = S.one(), S.one()
    for n in range(1, 8):
        term = term * arg * Fraction(1, n)
        total = total + term
    for r in range(8):
        coeff = S.zero()
        for e, c in total.terms.items():
            if e[3] == r:
                coeff = coeff + S.scalar(c) * S.gen("t1") ** e[0] * S.gen("t3") ** e[1] * S.gen("t5") ** e[2]
        assert str(q_r(r, RING5)) == str(coeff)


@pytest.mark.parametrize("key", sorted(reference()["qschur"]))
def test_calibration(key):
    assert q_lambda(parts_of(key), R) == poly(reference()["qschur"][key], R)


def test_pair_antisymmetry_and_equal_parts():
    assert q_pair(1, 3, R) == -q_pair(3, 1, R)
    with pytest.raises(ConfigurationError):
        q_pair(2, 2, R)


@pytest.mark.parametrize("parts", [(1,), (3, 1), (4, 2), (5, 3, 1), (3, 2, 1, 0), (6, 2)])
def test_degree_grading(parts):
    weight = {"t1": 1, "t3": 3, "t5": 5, "t7": 7, "t9": 9}
    Q = q_lambda(parts, R)
    for e in Q.terms:
        assert sum(k * weight[v] for k, v in zip(e, R.variables)) == sum(parts)


def test_empty_and_invalid():
    assert q_lambda((), R) == R.one()
    with pytest.raises(ConfigurationError):
        q_lambda((1, 2), R)


def test_odd_length_pads_with_zero():
    assert q_lambda((3,), R) == q_pair(3, 0, R)
    assert q_lambda((5, 3, 1), R) == q_lambda((5, 3, 1, 0), R)


def test_multiple_detection():
    Q = q_lambda((4, 2), R)
    assert q_multiple(Q * -3, (4, 2)) == -3
    assert q_multiple(Q + t1, (4, 2)) is None
