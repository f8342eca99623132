"""Exact and floating-point scalar rings, small matrices, truncated matrix series.

Two scalar rings are provided.  :class:`PolyRing` is the ring of multivariate
polynomials with rational coefficients (``gmpy2.mpq``, which interoperates
with :class:`fractions.Fraction`) over a declared,
ordered set of variable names; its zero test is structural.  :class:`ComplexField`
wraps Python ``complex`` with an absolute zero tolerance.  Both expose the same
small interface (``zero``, ``one``, ``coerce``, ``scalar``, ``is_zero``,
``is_unit``, ``invert``) so the matrix, series and tau code is written once.

Matrices are tuples of row tuples.  :class:`MatSeries` is a matrix-valued
Laurent series ``sum_k C_k x^k`` with a lowest power ``kmin`` and a precision
``kmax``: coefficients above ``kmax`` are unknown and dropped, ``kmax=None``
marks an exact (polynomial) series.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from operator import add as _add
from typing import Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq as _mpq

_MPQ_TYPE = type(_mpq(0))


def _Q(x=0, den=None):
    """``mpq`` from ints, mpq or any :class:`numbers.Rational` (including Fractions of mpz)."""
    if den is not None:
        return _mpq(x, den)
    if type(x) is _MPQ_TYPE:
        return x
    if isinstance(x, Rational) and not isinstance(x, int):
        return _mpq(int(x.numerator), int(x.denominator))
    return _mpq(x)


class ConfigurationError(ValueError):
    """Raised on incompatible inputs (variable sets, sizes, malformed text)."""


class SeriesError(ArithmeticError):
    """Raised when a series operation cannot be carried out within its window."""


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"\s*([+-]?)\s*([^+-]+)")
_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(\d+))?$")


class PolyRing:
    """Polynomials over the rationals in an ordered tuple of variables."""

    tolerance = 0

    def __init__(self, variables: Iterable[str]):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ConfigurationError(f"repeated variable in {self.variables}")
        self.nvars = len(self.variables)
        self._index = {v: i for i, v in enumerate(self.variables)}
        self._zero_exp = (0,) * self.nvars

    def __eq__(self, other):
        return isinstance(other, PolyRing) and other.variables == self.variables

    def __hash__(self):
        return hash(("PolyRing", self.variables))

    def __repr__(self):
        return f"PolyRing({self.variables!r})"

    # ring interface -------------------------------------------------------
    def zero(self) -> Poly:
        return Poly(self, {})

    def one(self) -> Poly:
        return Poly(self, {self._zero_exp: _Q(1)})

    def scalar(self, c) -> Poly:
        c = _Q(c)
        return Poly(self, {self._zero_exp: c} if c else {})

    const = scalar

    def coerce(self, x) -> Poly:
        if isinstance(x, Poly):
            if x.ring != self:
                raise ConfigurationError(
                    f"variable sets differ: {x.ring.variables} vs {self.variables}"
                )
            return x
        if isinstance(x, (int, Rational)):
            return self.scalar(x)
        if isinstance(x, str):
            return self.parse(x)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self!r}")

    def is_zero(self, x) -> bool:
        return not self.coerce(x).terms

    def is_unit(self, x) -> bool:
        x = self.coerce(x)
        return len(x.terms) == 1 and self._zero_exp in x.terms

    is_field = False

    def exact_div(self, x, y) -> Poly:
        return self.coerce(x).exact_div(self.coerce(y))

    def invert(self, x) -> Poly:
        x = self.coerce(x)
        if not self.is_unit(x):
            raise ZeroDivisionError(f"{x} is not a unit in {self!r}")
        return self.scalar(1 / x.terms[self._zero_exp])

    # constructors ---------------------------------------------------------
    def gen(self, name: str) -> Poly:
        try:
            i = self._index[name]
        except KeyError:
            raise ConfigurationError(f"unknown variable {name!r}") from None
        exp = [0] * self.nvars
        exp[i] = 1
        return Poly(self, {tuple(exp): _Q(1)})

    def gens(self) -> tuple[Poly, ...]:
        return tuple(self.gen(v) for v in self.variables)

    def from_terms(self, terms: Mapping[tuple[int, ...], object]) -> Poly:
        clean = {}
        for e, c in terms.items():
            c = _Q(c)
            if c:
                clean[tuple(e)] = c
        return Poly(self, clean)

    def parse(self, text: str) -> Poly:
        """Parse a sum of monomials such as ``"1 - 1/2*a*t1 + t1^2/16"``.

        Only rational literals and declared variables are accepted; a term is a
        ``*``-separated product of rationals, ``x`` or ``x^k``, optionally
        followed by ``/n``.
        """
        s = text.strip()
        if not s:
            raise ConfigurationError("empty polynomial text")
        out = self.zero()
        pos = 0
        s = s.replace(" ", "")
        while pos < len(s):
            m = _TERM_RE.match(s, pos)
            if not m or not m.group(2):
                raise ConfigurationError(f"cannot parse polynomial {text!r}")
            sign = -1 if m.group(1) == "-" else 1
            out = out + self._parse_term(m.group(2), text) * sign
            pos = m.end()
        return out

    def _parse_term(self, term: str, text: str) -> Poly:
        coeff = _Q(1)
        exp = [0] * self.nvars
        # split a trailing "/n" division off every factor: "t1^2/16"
        for factor in term.split("*"):
            parts = factor.split("/")
            head, dens = parts[0], parts[1:]
            if not head:
                raise ConfigurationError(f"cannot parse polynomial {text!r}")
            if head.isdigit():
                coeff *= int(head)
            else:
                m = _FACTOR_RE.match(head)
                if not m or m.group(1) not in self._index:
                    raise ConfigurationError(f"unknown symbol {head!r} in {text!r}")
                exp[self._index[m.group(1)]] += int(m.group(2) or 1)
            for d in dens:
                if not d.isdigit() or int(d) == 0:
                    raise ConfigurationError(f"bad denominator in {text!r}")
                coeff /= int(d)
        return Poly(self, {tuple(exp): coeff} if coeff else {})


class Poly:
    """Immutable polynomial; ``terms`` maps exponent tuples to nonzero rationals (gmpy2 ``mpq``)."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: PolyRing, terms: dict):
        self.ring = ring
        self.terms = terms

    # arithmetic -----------------------------------------------------------
    def _other(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ConfigurationError(
                    f"variable sets differ: {self.ring.variables} vs {other.ring.variables}"
                )
            return other
        if isinstance(other, (int, Rational)):
            return self.ring.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Poly):
            c = _Q(other)
            if not c:
                return Poly(self.ring, {})
            return Poly(self.ring, {e: v * c for e, v in self.terms.items()})
        other = self._other(other)
        if other is NotImplemented:
            return other
        if not self.terms or not other.terms:
            return Poly(self.ring, {})
        out: dict = {}
        get = out.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(map(_add, e1, e2))
                v = get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return Poly(self.ring, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Poly):
            return self * (1 / _Q(other))
        other = self._other(other)
        return self * self.ring.invert(other)

    def exact_div(self, other: Poly) -> Poly:
        """Quotient by ``other`` when it divides ``self``; raises otherwise."""
        other = self._other(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        key = lambda e: e
        lead_e = max(other.terms, key=key)
        lead_c = other.terms[lead_e]
        rem = self
        quot: dict = {}
        while rem.terms:
            e = max(rem.terms, key=key)
            d = tuple(x - y for x, y in zip(e, lead_e))
            if min(d, default=0) < 0:
                raise ArithmeticError(f"{other} does not divide {self}")
            c = rem.terms[e] / lead_c
            quot[d] = c
            rem = rem - other * Poly(self.ring, {d: c})
        return Poly(self.ring, quot)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = self.ring.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, Poly):
            other = self.ring.scalar(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring.variables, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # inspection -----------------------------------------------------------
    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {self.ring._zero_exp}

    def constant_term(self) -> Fraction:
        return self.terms.get(self.ring._zero_exp, _Q(0))

    def degree(self, weights: Sequence[int] | None = None) -> int:
        """Total (optionally weighted) degree; ``-1`` for the zero polynomial."""
        if not self.terms:
            return -1
        if weights is None:
            return max(sum(e) for e in self.terms)
        return max(sum(w * x for w, x in zip(weights, e)) for e in self.terms)

    def truncate(self, max_degree: int, weights: Sequence[int] | None = None) -> Poly:
        w = weights or (1,) * self.ring.nvars
        return Poly(
            self.ring,
            {e: c for e, c in self.terms.items() if sum(a * b for a, b in zip(w, e)) <= max_degree},
        )

    def subs(self, values: Mapping[str, object]) -> Poly:
        """Substitute rational values for some variables; result stays in the same ring."""
        idx = {self.ring._index[k]: _Q(v) for k, v in values.items()}
        out = self.ring.zero()
        for e, c in self.terms.items():
            coeff = c
            ne = list(e)
            for i, v in idx.items():
                coeff *= v ** ne[i]
                ne[i] = 0
            out = out + Poly(self.ring, {tuple(ne): coeff} if coeff else {})
        return out

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a full assignment (numbers of any kind)."""
        vals = [values[v] for v in self.ring.variables]
        total = 0
        for e, c in self.terms.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term = term * v**k
            total = total + term
        return total

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms by ascending total degree, then lexicographic in the variable order."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.ring.variables, e) if k
            )
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = _frac_str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_frac_str(a)}*{mono}"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({str(self)!r})"


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# Plain rationals and complex floats
# ---------------------------------------------------------------------------


class RationalField:
    """Plain :class:`~fractions.Fraction` scalars; used for constant matrices."""

    tolerance = 0

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("RationalField")

    def __repr__(self):
        return "RationalField()"

    def zero(self) -> Fraction:
        return Fraction(0)

    def one(self) -> Fraction:
        return Fraction(1)

    def scalar(self, c) -> Fraction:
        return Fraction(c)

    coerce = scalar

    def is_zero(self, x) -> bool:
        return x == 0

    def is_unit(self, x) -> bool:
        return x != 0

    def invert(self, x) -> Fraction:
        return 1 / Fraction(x)

    is_field = True

    def exact_div(self, x, y) -> Fraction:
        return Fraction(x) / Fraction(y)


QQ = RationalField()



class ComplexField:
    """Complex numbers with an absolute zero tolerance."""

    def __init__(self, tolerance: float = 1e-12):
        self.tolerance = tolerance

    def __eq__(self, other):
        return isinstance(other, ComplexField) and other.tolerance == self.tolerance

    def __hash__(self):
        return hash(("ComplexField", self.tolerance))

    def __repr__(self):
        return f"ComplexField(tolerance={self.tolerance})"

    def zero(self) -> complex:
        return 0j

    def one(self) -> complex:
        return 1 + 0j

    def scalar(self, c) -> complex:
        return complex(c)

    def coerce(self, x) -> complex:
        return complex(x)

    def is_zero(self, x) -> bool:
        return abs(x) <= self.tolerance

    def is_unit(self, x) -> bool:
        return abs(x) > self.tolerance

    def invert(self, x) -> complex:
        if not self.is_unit(x):
            raise ZeroDivisionError(f"{x} is numerically zero")
        return 1 / complex(x)

    is_field = True

    def exact_div(self, x, y) -> complex:
        return complex(x) / complex(y)


def format_scalar(x) -> str:
    """Canonical text for a scalar of any supported ring (17 significant digits for floats)."""
    if isinstance(x, Poly):
        return str(x)
    if isinstance(x, Rational):
        return _frac_str(Fraction(x))
    z = complex(x)
    return f"{z.real:.17g}{z.imag:+.17g}j"


# ---------------------------------------------------------------------------
# Matrices (tuples of row tuples)
# ---------------------------------------------------------------------------

Matrix = tuple


def identity(n: int, ring) -> Matrix:
    z, o = ring.zero(), ring.one()
    return tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))


def zeros(n: int, ring, m: int | None = None) -> Matrix:
    z = ring.zero()
    return tuple(tuple(z for _ in range(n if m is None else m)) for _ in range(n))


def matrix(rows, ring) -> Matrix:
    return tuple(tuple(ring.coerce(x) for x in r) for r in rows)


def elementary(n: int, i: int, j: int, ring, value=1) -> Matrix:
    """``value * e_{ij}`` with 1-based indices."""
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"e_({i},{j}) is outside an {n} x {n} matrix (indices are 1-based)")
    z = ring.zero()
    v = ring.coerce(value)
    return tuple(
        tuple(v if (r == i - 1 and c == j - 1) else z for c in range(n)) for r in range(n)
    )


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_neg(A: Matrix) -> Matrix:
    return tuple(tuple(-a for a in r) for r in A)


def mat_scale(c, A: Matrix) -> Matrix:
    return tuple(tuple(a * c for a in r) for r in A)


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def mat_mul(A: Matrix, B: Matrix, ring) -> Matrix:
    if len(A[0]) != len(B):
        raise ConfigurationError("matrix size mismatch")
    zero = ring.zero()
    cols = list(zip(*B))
    out = []
    for row in A:
        nz = [(k, a) for k, a in enumerate(row) if a]
        new_row = []
        for col in cols:
            acc = zero
            for k, a in nz:
                b = col[k]
                if b:
                    acc = acc + a * b
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)


def mat_is_zero(A: Matrix, ring) -> bool:
    return all(ring.is_zero(x) for r in A for x in r)


def mat_equal(A: Matrix, B: Matrix, ring) -> bool:
    return mat_is_zero(mat_sub(A, B), ring)


def commutator(A: Matrix, B: Matrix, ring) -> Matrix:
    return mat_sub(mat_mul(A, B, ring), mat_mul(B, A, ring))


def mat_inverse(A: Matrix, ring) -> Matrix:
    """Gauss-Jordan inverse; pivots must be units of ``ring``.

    Over :class:`PolyRing` this succeeds for matrices such as unipotent ones
    whose elimination only meets constant pivots.
    """
    n = len(A)
    M = [list(r) + list(e) for r, e in zip(A, identity(n, ring))]
    for col in range(n):
        if isinstance(ring, (ComplexField, RationalField)):
            piv = max(range(col, n), key=lambda r: abs(M[r][col]))
            if not ring.is_unit(M[piv][col]):
                raise SeriesError("singular matrix")
            if isinstance(ring, RationalField):
                piv = next(r for r in range(col, n) if M[r][col] != 0)
        else:
            piv = next((r for r in range(col, n) if ring.is_unit(M[r][col])), None)
            if piv is None:
                if all(ring.is_zero(M[r][col]) for r in range(col, n)):
                    raise SeriesError("singular matrix")
                raise SeriesError("no unit pivot available for exact inversion")
        M[col], M[piv] = M[piv], M[col]
        inv = ring.invert(M[col][col])
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return tuple(tuple(r[n:]) for r in M)


def mat_map(f: Callable, A: Matrix) -> Matrix:
    return tuple(tuple(f(x) for x in r) for r in A)


def lift(A: Matrix, ring) -> Matrix:
    """Coerce every entry of a (rational or numeric) matrix into ``ring``."""
    return tuple(tuple(ring.coerce(x) for x in r) for r in A)


# ---------------------------------------------------------------------------
# Truncated matrix Laurent series
# ---------------------------------------------------------------------------


def _min_opt(*vals):
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


@dataclass(frozen=True)
class MatSeries:
    """``sum_{kmin <= k <= kmax} C_k x^k`` with N x N coefficients.

    ``kmax=None`` means the series is exact (a Laurent polynomial).  A finite
    ``kmax`` is a precision: higher powers are unknown and never stored.
    ``grading_cutoff`` optionally drops polynomial terms of total degree above
    the cutoff (weighted by ``grading_weights`` when given).
    """

    ring: object
    n: int
    coeffs: Mapping[int, Matrix] = field(default_factory=dict)
    kmin: int = 0
    kmax: int | None = None
    grading_cutoff: int | None = None
    grading_weights: tuple[int, ...] | None = None

    def __post_init__(self):
        clean = {}
        for k, C in self.coeffs.items():
            if k < self.kmin:
                if mat_is_zero(C, self.ring):
                    continue
                raise SeriesError(f"coefficient at power {k} below window start {self.kmin}")
            if self.kmax is not None and k > self.kmax:
                continue
            if self.grading_cutoff is not None:
                C = mat_map(lambda x: x.truncate(self.grading_cutoff, self.grading_weights), C)
            if not mat_is_zero(C, self.ring):
                clean[k] = C
        object.__setattr__(self, "coeffs", clean)

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, C: Matrix, ring, kmax=None) -> MatSeries:
        return cls(ring, len(C), {0: C}, 0, kmax)

    @classmethod
    def identity(cls, n: int, ring, kmax=None) -> MatSeries:
        return cls(ring, n, {0: identity(n, ring)}, 0, kmax)

    @classmethod
    def monomial(cls, C: Matrix, k: int, ring, kmax=None) -> MatSeries:
        return cls(ring, len(C), {k: C}, min(k, 0), kmax)

    def _replace(self, **kw) -> MatSeries:
        args = dict(
            ring=self.ring,
            n=self.n,
            coeffs=self.coeffs,
            kmin=self.kmin,
            kmax=self.kmax,
            grading_cutoff=self.grading_cutoff,
            grading_weights=self.grading_weights,
        )
        args.update(kw)
        return MatSeries(**args)

    # access ---------------------------------------------------------------
    def coeff(self, k: int) -> Matrix:
        if self.kmax is not None and k > self.kmax:
            raise SeriesError(f"power {k} beyond series precision {self.kmax}")
        return self.coeffs.get(k) or zeros(self.n, self.ring)

    @property
    def powers(self) -> list[int]:
        return sorted(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def truncate(self, kmax: int | None) -> MatSeries:
        return self._replace(kmax=_min_opt(self.kmax, kmax))

    def equals(self, other: MatSeries) -> bool:
        """Coefficientwise equality on the common known window."""
        return (self - other).is_zero()

    # arithmetic -----------------------------------------------------------
    def _check(self, other: MatSeries):
        if not isinstance(other, MatSeries):
            raise TypeError("expected MatSeries")
        if other.n != self.n:
            raise ConfigurationError(f"size mismatch {self.n} vs {other.n}")
        if other.ring != self.ring:
            raise ConfigurationError("scalar rings differ")

    def __add__(self, other: MatSeries) -> MatSeries:
        self._check(other)
        out = dict(self.coeffs)
        for k, C in other.coeffs.items():
            out[k] = mat_add(out[k], C) if k in out else C
        return self._replace(
            coeffs=out,
            kmin=min(self.kmin, other.kmin),
            kmax=_min_opt(self.kmax, other.kmax),
            grading_cutoff=_min_opt(self.grading_cutoff, other.grading_cutoff),
        )

    def __neg__(self) -> MatSeries:
        return self._replace(coeffs={k: mat_neg(C) for k, C in self.coeffs.items()})

    def __sub__(self, other: MatSeries) -> MatSeries:
        return self + (-other)

    def scale(self, c) -> MatSeries:
        c = self.ring.coerce(c)
        return self._replace(coeffs={k: mat_scale(c, C) for k, C in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, MatSeries):
            return series_mul(self, other)
        return self.scale(other)

    def left_const(self, C: Matrix) -> MatSeries:
        return self._replace(coeffs={k: mat_mul(C, A, self.ring) for k, A in self.coeffs.items()})

    def right_const(self, C: Matrix) -> MatSeries:
        return self._replace(coeffs={k: mat_mul(A, C, self.ring) for k, A in self.coeffs.items()})

    def transpose(self) -> MatSeries:
        return self._replace(coeffs={k: transpose(C) for k, C in self.coeffs.items()})

    def map_entries(self, f: Callable) -> MatSeries:
        return self._replace(coeffs={k: mat_map(f, C) for k, C in self.coeffs.items()})

    def inverse_variable(self) -> MatSeries:
        """Rewrite an exact Laurent polynomial in ``x`` as one in ``1/x``."""
        if self.kmax is None:
            top = max(self.coeffs, default=0)
            return self._replace(coeffs={-k: C for k, C in self.coeffs.items()}, kmin=min(-top, 0))
        raise SeriesError("only exact series can be re-expanded in the inverse variable")

    def evaluate(self, x) -> Matrix:
        out = zeros(self.n, self.ring)
        for k, C in self.coeffs.items():
            out = mat_add(out, mat_scale(x**k, C))
        return out

    def __repr__(self):
        return f"MatSeries(n={self.n}, powers={self.powers}, kmin={self.kmin}, kmax={self.kmax})"


def series_mul(A: MatSeries, B: MatSeries, kmax: int | None = None) -> MatSeries:
    """Cauchy product, keeping only the powers both factors determine."""
    A._check(B)
    prec = _min_opt(
        None if A.kmax is None else A.kmax + B.kmin,
        None if B.kmax is None else B.kmax + A.kmin,
        kmax,
    )
    out: dict[int, Matrix] = {}
    for i, Ci in A.coeffs.items():
        for j, Cj in B.coeffs.items():
            k = i + j
            if prec is not None and k > prec:
                continue
            P = mat_mul(Ci, Cj, A.ring)
            out[k] = mat_add(out[k], P) if k in out else P
    return MatSeries(
        A.ring,
        A.n,
        out,
        A.kmin + B.kmin,
        prec,
        _min_opt(A.grading_cutoff, B.grading_cutoff),
        A.grading_weights or B.grading_weights,
    )


def series_exp(X: MatSeries, kmax: int | None = None, max_power: int = 64) -> MatSeries:
    """``exp(X)``, summed until a power of ``X`` vanishes inside the window.

    Raises :class:`SeriesError` if no power up to ``max_power`` vanishes,
    which is how non-terminating exponentials are detected.
    """
    ident = MatSeries.identity(X.n, X.ring, kmax=_min_opt(X.kmax, kmax))
    ident = ident._replace(
        grading_cutoff=X.grading_cutoff, grading_weights=X.grading_weights
    )
    total = ident
    term = ident
    for k in range(1, max_power + 1):
        term = series_mul(term, X, kmax).scale(X.ring.scalar(Fraction(1, k)))
        if term.is_zero():
            return total.truncate(_min_opt(X.kmax, kmax))
        total = total + term
    raise SeriesError(f"exponential did not terminate within {max_power} powers")


def series_inverse(A: MatSeries, kmax: int | None = None) -> MatSeries:
    """Inverse of ``A = x^m (C_m + C_{m+1} x + ...)`` with ``C_m`` invertible.

    Exact inputs need ``kmax`` unless the inverse turns out to be exact, which
    is only assumed when ``A`` is a constant matrix.
    """
    if A.is_zero():
        raise SeriesError("cannot invert the zero series")
    ring = A.ring
    m = min(A.coeffs)
    try:
        lead_inv = mat_inverse(A.coeffs[m], ring)
    except (SeriesError, ZeroDivisionError) as exc:
        raise SeriesError(f"leading coefficient at power {m} is not invertible") from exc
    if A.kmax is None and len(A.coeffs) == 1:
        return A._replace(coeffs={-m: lead_inv}, kmin=min(-m, 0), kmax=kmax)
    prec = _min_opt(None if A.kmax is None else A.kmax - 2 * m, kmax)
    if prec is None:
        raise SeriesError("inverse of an exact non-constant series needs a precision kmax")
    # B = x^{-m} sum_j B_j x^j with  sum_{i+j=k} C_{m+i} B_j = delta_{k0}
    B: dict[int, Matrix] = {}
    for k in range(0, prec + m + 1):
        if k == 0:
            B[0] = lead_inv
            continue
        acc = zeros(A.n, ring)
        for i in range(1, k + 1):
            Ci = A.coeffs.get(m + i)
            if Ci is not None and B.get(k - i) is not None:
                acc = mat_add(acc, mat_mul(Ci, B[k - i], ring))
        B[k] = mat_neg(mat_mul(lead_inv, acc, ring))
    return MatSeries(
        ring,
        A.n,
        {j - m: C for j, C in B.items()},
        min(-m, 0),
        prec,
        A.grading_cutoff,
        A.grading_weights,
    )


def is_s_orthogonal(A: MatSeries, S: Matrix) -> bool:
    """True iff ``A(x) S A(x)^t == S`` on the known window of ``A``."""
    ring = A.ring
    lhs = series_mul(A.right_const(S), A.transpose())
    return lhs.equals(MatSeries.constant(S, ring))
