"""Schur Q-functions in the odd times ``t1, t3, t5, ...``.

Normalization: ``sum_r q_r z^r = exp(sum_{k odd} t_k z^k)``, with no factor 2
in the exponent.  This is the convention under which the Pfaffian time
factors of the orthogonal DS examples are simple multiples of ``Q_lambda``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from pfaffian_tau.algebra import ConfigurationError, Poly, PolyRing
from pfaffian_tau.combinatorics import is_strict


def _time_index(ring: PolyRing) -> dict[int, str]:
    out = {}
    for v in ring.variables:
        if v.startswith("t") and v[1:].isdigit() and int(v[1:]) % 2 == 1:
            out[int(v[1:])] = v
    return out


_cache: dict[tuple, list[Poly]] = {}


def q_r(r: int, ring: PolyRing, max_time: int | None = None) -> Poly:
    """``q_r``, via ``r q_r = sum_{k odd} k t_k q_{r-k}``.

    Only odd times present in ``ring`` (named ``t1``, ``t3``, ...) and, when
    given, with index ``<= max_time`` take part.
    """
    if r < 0:
        return ring.zero()
    times = {k: v for k, v in _time_index(ring).items() if max_time is None or k <= max_time}
    key = (ring.variables, tuple(sorted(times)))
    qs = _cache.setdefault(key, [ring.one()])
    gens = {k: ring.gen(v) for k, v in times.items()}
    while len(qs) <= r:
        n = len(qs)
        acc = ring.zero()
        for k, g in gens.items():
            if k <= n:
                acc = acc + g * qs[n - k] * k
        qs.append(acc * Fraction(1, n))
    return qs[r]


def q_pair(a: int, b: int, ring: PolyRing) -> Poly:
    """``Q_(a,b) = q_a q_b + 2 sum_{i=1}^{b} (-1)^i q_{a+i} q_{b-i}``, antisymmetric in (a, b)."""
    if a == b:
        raise ConfigurationError(f"Q_({a},{b}) is not defined for equal parts")
    if a < b:
        return -q_pair(b, a, ring)
    out = q_r(a, ring) * q_r(b, ring)
    for i in range(1, b + 1):
        out = out + q_r(a + i, ring) * q_r(b - i, ring) * (2 * (-1) ** i)
    return out


def q_lambda(parts: Sequence[int], ring: PolyRing) -> Poly:
    """``Q_lambda = Pf[Q_(lambda_i, lambda_j)]``; odd lengths get a 0 part appended."""
    from pfaffian_tau.engines import pfaffian

    parts = list(parts)
    if not is_strict(parts):
        raise ConfigurationError(f"{tuple(parts)} is not a strict partition")
    if not parts:
        return ring.one()
    if len(parts) % 2:
        if parts[-1] == 0:
            raise ConfigurationError("odd-length partition already ending in 0")
        parts.append(0)
    if len(parts) == 2:
        return q_pair(parts[0], parts[1], ring)
    n = len(parts)
    M = tuple(
        tuple(ring.zero() if i == j else q_pair(parts[i], parts[j], ring) for j in range(n))
        for i in range(n)
    )
    return pfaffian(M, ring)


def q_multiple(poly: Poly, parts: Sequence[int]) -> Fraction | None:
    """The rational ``c`` with ``poly == c * Q_lambda``, or None."""
    Q = q_lambda(parts, poly.ring)
    if not Q.terms:
        return None
    e, c0 = next(iter(Q.terms.items()))
    c = poly.terms.get(e, Fraction(0)) / c0
    return Fraction(int(c.numerator), int(c.denominator)) if c and poly == Q * c else None
