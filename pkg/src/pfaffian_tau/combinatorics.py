"""Strict partitions, N-tuples of them, and Maya diagrams.

A strict partition here is a strictly decreasing tuple of non-negative
integers; a single trailing 0 is allowed and meaningful, because part ``k``
stands for the half-integer mode ``p = k + 1/2``.  An N-tuple of strict
partitions therefore labels a finite set of coloured modes ``(alpha, p)``,
which is how Pfaffian minors are indexed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from pfaffian_tau.algebra import ConfigurationError

HALF = Fraction(1, 2)
EMPTY = "∅"


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-odd integer stored as ``twice`` (odd)."""

    twice: int

    def __post_init__(self):
        if self.twice % 2 == 0:
            raise ValueError(f"{self.twice}/2 is not a half-odd integer")

    @classmethod
    def of(cls, x) -> HalfInt:
        x = Fraction(x)
        if (2 * x).denominator != 1:
            raise ValueError(f"{x} is not a half-odd integer")
        return cls(int(2 * x))

    @classmethod
    def from_part(cls, part: int) -> HalfInt:
        return cls(2 * part + 1)

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def part(self) -> int:
        """The strict-partition part ``p - 1/2`` (for positive ``p``)."""
        return (self.twice - 1) // 2

    def __neg__(self):
        return HalfInt(-self.twice)

    def __str__(self):
        return f"{self.twice}/2"


def is_strict(parts: Sequence[int]) -> bool:
    return all(p >= 0 for p in parts) and all(a > b for a, b in zip(parts, parts[1:]))


@dataclass(frozen=True)
class StrictTuple:
    """An N-tuple of strict partitions."""

    components: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(int(x) for x in c) for c in self.components)
        for c in comps:
            if not is_strict(c):
                raise ConfigurationError(f"{c} is not a strict partition")
        object.__setattr__(self, "components", comps)

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def cardinality(self) -> int:
        return sum(len(c) for c in self.components)

    @property
    def weight(self) -> int:
        """``sum (part + 1)``, i.e. ``sum (p + 1/2)`` over the modes."""
        return sum(k + 1 for c in self.components for k in c)

    @property
    def block_weight(self) -> Fraction:
        """``sum p`` over the modes: the power of z the minor carries."""
        return sum((k + HALF for c in self.components for k in c), Fraction(0))

    def indices(self) -> list[tuple[int, HalfInt]]:
        """Coloured modes in canonical order: colour ascending, ``p`` descending."""
        return [(alpha, HalfInt.from_part(k)) for alpha, c in enumerate(self.components) for k in c]

    def shifted_label(self) -> str:
        """Label with every part raised by one and empty components written ``(0)``.

        This is the notation in which a mode ``p`` is recorded as ``p + 1/2``.
        """
        def one(c):
            return "(" + ",".join(str(k + 1) for k in c) + ")" if c else "(0)"

        return "(" + ",".join(one(c) for c in self.components) + ")"

    @classmethod
    def from_indices(cls, N: int, indices) -> StrictTuple:
        comps = [[] for _ in range(N)]
        for alpha, p in indices:
            comps[alpha].append(p.part)
        return cls(tuple(tuple(sorted(c, reverse=True)) for c in comps))

    @classmethod
    def parse(cls, text: str) -> StrictTuple:
        """Inverse of :meth:`__str__`; ``()`` and ``{}`` also accepted for an empty part."""
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ConfigurationError(f"cannot parse strict tuple {text!r}")
        body = body[1:-1].replace(EMPTY, "()").replace("{}", "()")
        comps = re.findall(r"\(([^()]*)\)", body)
        if re.sub(r"\(([^()]*)\)", "", body).replace(",", "").strip():
            raise ConfigurationError(f"cannot parse strict tuple {text!r}")
        return cls(tuple(tuple(int(x) for x in c.split(",") if x.strip()) for c in comps))

    def __str__(self):
        parts = [EMPTY if not c else "(" + ",".join(map(str, c)) + ")" for c in self.components]
        return "(" + ",".join(parts) + ")"


@lru_cache(maxsize=None)
def _strict_with_cost(total: int, largest: int, shift: int) -> tuple[tuple[int, ...], ...]:
    """Strict partitions with parts < ``largest`` and ``sum (2*part + shift) == total``."""
    if total == 0:
        return ((),)
    out = []
    for k in range(min(largest - 1, (total - shift) // 2), -1, -1):
        cost = 2 * k + shift
        if cost > total:
            continue
        for rest in _strict_with_cost(total - cost, k, shift):
            out.append((k,) + rest)
    return tuple(out)


def strict_partitions_of_weight(w: int) -> tuple[tuple[int, ...], ...]:
    """Strict partitions with ``sum (part + 1) == w``."""
    return _strict_with_cost(2 * w, w + 1, 2)


def _tuples_of_cost(N: int, total: int, shift: int) -> Iterator[StrictTuple]:
    def rec(alpha: int, remaining: int, acc: list):
        if alpha == N - 1:
            for c in _strict_with_cost(remaining, remaining + 1, shift):
                yield StrictTuple(tuple(acc + [c]))
            return
        for here in range(remaining, -1, -1):
            comps = _strict_with_cost(here, here + 1, shift)
            if not comps:
                continue
            for c in comps:
                yield from rec(alpha + 1, remaining - here, acc + [c])

    yield from rec(0, total, [])


def enumerate_strict_tuples(
    N: int, max_weight: int, *, min_weight: int = 0, grading: str = "strict"
) -> Iterator[StrictTuple]:
    """All N-tuples of strict partitions up to ``max_weight``, in weight order.

    ``grading="strict"`` uses ``|lambda| = sum (part + 1)``; ``grading="block"``
    uses ``sum (part + 1/2)`` (the z-power of a minor) and then only even
    cardinalities have integer weight, so ``max_weight`` may be a Fraction.
    """
    if N < 1:
        raise ConfigurationError("N must be positive")
    if grading == "strict":
        shift, lo, hi = 2, 2 * min_weight, 2 * int(max_weight)
    elif grading == "block":
        shift, lo, hi = 1, int(2 * Fraction(min_weight)), int(2 * Fraction(max_weight))
    else:
        raise ConfigurationError(f"unknown grading {grading!r}")
    for total in range(max(lo, 0), hi + 1):
        yield from _tuples_of_cost(N, total, shift)


def combined_strict_partition(t: StrictTuple, N: int | None = None) -> tuple[tuple[int, ...], bool]:
    """Merge an N-tuple into one partition by ``part -> N - alpha + part (N - 1)``.

    Returns the merged parts sorted decreasingly and whether they are distinct.
    Only a labelling aid: it is not injective and can produce repeated parts.
    """
    N = t.N if N is None else N
    merged = sorted(
        (N - alpha + k * (N - 1) for alpha, c in enumerate(t.components, start=1) for k in c),
        reverse=True,
    )
    return tuple(merged), len(set(merged)) == len(merged)


# ---------------------------------------------------------------------------
# Maya diagrams and charged Young diagrams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MayaDiagram:
    """Particles at positive half-integers ``p`` and holes at ``-q`` (``q`` positive)."""

    particles: tuple[Fraction, ...]
    holes: tuple[Fraction, ...]

    def __post_init__(self):
        ps = tuple(sorted((Fraction(x) for x in self.particles), reverse=True))
        qs = tuple(sorted((Fraction(x) for x in self.holes), reverse=True))
        for x in ps + qs:
            if x <= 0 or (2 * x).denominator != 1 or (2 * x).numerator % 2 == 0:
                raise ConfigurationError(f"{x} is not a positive half-odd integer")
        if len(set(ps)) != len(ps) or len(set(qs)) != len(qs):
            raise ConfigurationError("repeated position in Maya diagram")
        object.__setattr__(self, "particles", ps)
        object.__setattr__(self, "holes", qs)

    @property
    def charge(self) -> int:
        return len(self.particles) - len(self.holes)

    def occupied(self, depth: int) -> list[Fraction]:
        """Occupied positions, decreasing, down to ``-depth - 1/2``."""
        holes = {-q for q in self.holes}
        neg = [Fraction(-2 * k - 1, 2) for k in range(depth + 1)]
        return list(self.particles) + [x for x in neg if x not in holes]


def maya_to_charged_young(m: MayaDiagram) -> tuple[tuple[int, ...], int]:
    """Young diagram and charge of a Maya diagram: ``lambda_i = m_i - n + i - 1/2``."""
    n = m.charge
    depth = int(max([0, *m.holes])) + len(m.particles) + 1
    occ = m.occupied(depth)
    parts = []
    for i, x in enumerate(occ, start=1):
        lam = x - n + i - HALF
        if lam <= 0:
            break
        parts.append(int(lam))
    return tuple(parts), n


def charged_young_to_maya(shape: Sequence[int], charge: int) -> MayaDiagram:
    shape = list(shape)
    if any(a < b for a, b in zip(shape, shape[1:])) or any(x < 0 for x in shape):
        raise ConfigurationError(f"{shape} is not a partition")
    length = len(shape) + abs(charge) + 1
    shape += [0] * length
    occ = [shape[i - 1] + charge - i + HALF for i in range(1, len(shape) + 1)]
    lowest = occ[-1]
    particles = tuple(x for x in occ if x > 0)
    occupied = set(occ)
    holes = tuple(
        -x for x in (Fraction(-2 * k - 1, 2) for k in range(int(-lowest))) if x > lowest and x not in occupied
    )
    return MayaDiagram(particles, holes)


def frobenius(shape: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Frobenius coordinates ``(a | b)`` with ``a_i = lambda_i - i``, ``b_i = lambda'_i - i``."""
    shape = [x for x in shape if x]
    conj = [sum(1 for x in shape if x > j) for j in range(shape[0])] if shape else []
    d = sum(1 for i, x in enumerate(shape) if x > i)
    return tuple(shape[i] - i - 1 for i in range(d)), tuple(conj[i] - i - 1 for i in range(d))
