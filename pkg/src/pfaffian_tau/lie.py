"""Matrix realizations of the orthogonal affine algebras B_l^(1) and D_l^(1).

Elementary matrices are indexed from 1 as ``e(i, j)`` so the generator
formulas read like their textbook form.  Every generator ``X`` satisfies
``X^t = -S X S`` for the Chevalley involution ``S``, an antidiagonal
signature matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from pfaffian_tau.algebra import (
    QQ,
    ConfigurationError,
    MatSeries,
    Matrix,
    commutator,
    lift,
    mat_add,
    mat_equal,
    mat_mul,
    mat_neg,
    mat_scale,
    transpose,
    zeros,
)


@dataclass(frozen=True)
class AlgebraSpec:
    series: str
    rank: int

    def __post_init__(self):
        if self.series not in ("B", "D"):
            raise ConfigurationError(f"unsupported series {self.series!r}; use 'B' or 'D'")
        if not isinstance(self.rank, int) or self.rank < (1 if self.series == "B" else 2):
            raise ConfigurationError(f"invalid rank {self.rank} for series {self.series}")

    @property
    def N(self) -> int:
        return 2 * self.rank + 1 if self.series == "B" else 2 * self.rank

    @property
    def coxeter(self) -> int:
        return 2 * self.rank if self.series == "B" else 2 * self.rank - 2

    h = coxeter

    def __str__(self):
        return f"{self.series}{self.rank}^(1)"


@dataclass(frozen=True)
class ChevalleyData:
    spec: AlgebraSpec
    E: tuple[Matrix, ...]
    F: tuple[Matrix, ...]
    H: tuple[Matrix, ...]
    S: Matrix
    cartan: tuple[tuple[int, ...], ...]

    @property
    def N(self) -> int:
        return self.spec.N

    def generators(self) -> list[Matrix]:
        return [*self.E, *self.F, *self.H]

    def in_ring(self, M: Matrix, ring) -> Matrix:
        return lift(M, ring)


def _e(N: int, i: int, j: int, c=1) -> Matrix:
    rows = [[Fraction(0)] * N for _ in range(N)]
    rows[i - 1][j - 1] = Fraction(c)
    return tuple(tuple(r) for r in rows)


def _sum(*ms: Matrix) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = mat_add(out, m)
    return out


def chevalley_involution(spec: AlgebraSpec) -> Matrix:
    """The signed antidiagonal matrix ``S`` with ``S^2 = 1``, ``S^t = S``."""
    N = spec.N
    if spec.series == "B":
        signs = [(-1) ** i for i in range(N)]
    else:
        # alternating to the middle, then mirrored: the middle sign repeats
        half = [(-1) ** i for i in range(spec.rank)]
        signs = half + half[::-1]
    rows = [[Fraction(0)] * N for _ in range(N)]
    for i, s in enumerate(signs):
        rows[i][N - 1 - i] = Fraction(s)
    return tuple(tuple(r) for r in rows)


def standard_cartan(spec: AlgebraSpec) -> tuple[tuple[int, ...], ...]:
    """Affine Cartan matrix with node 0 the affine node, ``A[i][j] = <a_i^v, a_j>``."""
    l = spec.rank
    n = l + 1
    A = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def bond(i, j, aij=-1, aji=-1):
        A[i][j] = aij
        A[j][i] = aji

    if spec.series == "B":
        if l == 1:
            bond(0, 1, -2, -2)
        elif l == 2:
            bond(0, 2, -1, -2)
            bond(1, 2, -1, -2)
        else:
            bond(0, 2)
            bond(1, 2)
            for i in range(2, l - 1):
                bond(i, i + 1)
            bond(l - 1, l, -1, -2)
    else:
        if l == 2:
            # degenerate: node 1 decouples
            bond(0, 2, -2, -2)
        elif l == 3:
            for i in (0, 1):
                for j in (2, 3):
                    bond(i, j)
        else:
            bond(0, 2)
            bond(1, 2)
            for i in range(2, l - 2):
                bond(i, i + 1)
            bond(l - 2, l - 1)
            bond(l - 2, l)
    return tuple(tuple(r) for r in A)


def _raw_generators(spec: AlgebraSpec):
    l, N = spec.rank, spec.N
    E, F, H = [], [], []
    if spec.series == "B":
        E.append(_sum(_e(N, 1, 2 * l, Fraction(1, 2)), _e(N, 2, 2 * l + 1, Fraction(1, 2))))
        F.append(_sum(_e(N, 2 * l, 1, 2), _e(N, 2 * l + 1, 2, 2)))
        H.append(_sum(_e(N, 1, 1), _e(N, 2, 2), _e(N, 2 * l, 2 * l, -1), _e(N, 2 * l + 1, 2 * l + 1, -1)))
        for i in range(1, l):
            E.append(_sum(_e(N, i + 1, i), _e(N, 2 * l + 2 - i, 2 * l + 1 - i)))
            F.append(_sum(_e(N, i, i + 1), _e(N, 2 * l + 1 - i, 2 * l + 2 - i)))
            H.append(
                _sum(
                    _e(N, i, i, -1),
                    _e(N, i + 1, i + 1),
                    _e(N, 2 * l + 1 - i, 2 * l + 1 - i, -1),
                    _e(N, 2 * l + 2 - i, 2 * l + 2 - i),
                )
            )
        E.append(_sum(_e(N, l + 1, l), _e(N, l + 2, l + 1)))
        F.append(_sum(_e(N, l, l + 1), _e(N, l + 1, l + 2)))
        H.append(_sum(_e(N, l, l, -1), _e(N, l + 2, l + 2)))
    else:
        E.append(_sum(_e(N, 1, 2 * l - 1, Fraction(1, 2)), _e(N, 2, 2 * l, Fraction(1, 2))))
        F.append(_sum(_e(N, 2 * l - 1, 1, 2), _e(N, 2 * l, 2, 2)))
        H.append(_sum(_e(N, 1, 1), _e(N, 2, 2), _e(N, 2 * l - 1, 2 * l - 1, -1), _e(N, 2 * l, 2 * l, -1)))
        for i in range(1, l):
            E.append(_sum(_e(N, i + 1, i), _e(N, 2 * l + 1 - i, 2 * l - i)))
            F.append(_sum(_e(N, i, i + 1), _e(N, 2 * l - i, 2 * l + 1 - i)))
            H.append(
                _sum(
                    _e(N, i, i, -1),
                    _e(N, i + 1, i + 1),
                    _e(N, 2 * l - i, 2 * l - i, -1),
                    _e(N, 2 * l + 1 - i, 2 * l + 1 - i),
                )
            )
        E.append(_sum(_e(N, l + 1, l - 1, Fraction(1, 2)), _e(N, l + 2, l, Fraction(1, 2))))
        F.append(_sum(_e(N, l - 1, l + 1, 2), _e(N, l, l + 2, 2)))
        H.append(_sum(_e(N, l - 1, l - 1, -1), _e(N, l, l, -1), _e(N, l + 1, l + 1), _e(N, l + 2, l + 2)))
    return E, F, H


def build_algebra(spec: AlgebraSpec) -> ChevalleyData:
    """Weyl generators, Cartan matrix and Chevalley involution for ``spec``.

    The E_i are taken verbatim from the standard realization.  For the short
    roots of the B series (node l, and both nodes when l = 1) the literal F_i
    and H_i are doubled: as printed they give ``[H_i, E_i] = E_i``, and the
    doubling restores ``[H_i, E_i] = 2 E_i`` without touching E_i (so the
    shift matrix and all tau-functions are unaffected).
    """
    E, F, H = _raw_generators(spec)
    if spec.series == "B":
        short = (0, 1) if spec.rank == 1 else (spec.rank,)
        for i in short:
            F[i] = mat_scale(Fraction(2), F[i])
            H[i] = mat_scale(Fraction(2), H[i])
    data = ChevalleyData(
        spec, tuple(E), tuple(F), tuple(H), chevalley_involution(spec), standard_cartan(spec)
    )
    problems = verify_chevalley(data)
    if problems:
        raise AssertionError(f"realization of {spec} is inconsistent: {problems[:3]}")
    return data


def satisfies_chevalley_antisymmetry(X: Matrix, S: Matrix) -> bool:
    """``X^t == -S X S``."""
    return mat_equal(transpose(X), mat_neg(mat_mul(mat_mul(S, X, QQ), S, QQ)), QQ)


def verify_chevalley(data: ChevalleyData) -> list[str]:
    """Every failed structural relation, as a readable string; empty when all hold."""
    out = []
    S, A = data.S, data.cartan
    N = data.N
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(N)) for i in range(N))
    if not mat_equal(mat_mul(S, S, QQ), ident, QQ):
        out.append("S^2 != 1")
    if not mat_equal(transpose(S), S, QQ):
        out.append("S^t != S")
    for name, gens in (("E", data.E), ("F", data.F), ("H", data.H)):
        for i, X in enumerate(gens):
            if not satisfies_chevalley_antisymmetry(X, S):
                out.append(f"{name}_{i}^t != -S {name}_{i} S")
    n = len(data.E)
    for i in range(n):
        for j in range(n):
            Aij = Fraction(A[i][j])
            if not mat_equal(commutator(data.H[i], data.E[j], QQ), mat_scale(Aij, data.E[j]), QQ):
                out.append(f"[H_{i}, E_{j}] != {Aij} E_{j}")
            if not mat_equal(commutator(data.H[i], data.F[j], QQ), mat_scale(-Aij, data.F[j]), QQ):
                out.append(f"[H_{i}, F_{j}] != {-Aij} F_{j}")
            target = data.H[i] if i == j else zeros(N, QQ)
            if not mat_equal(commutator(data.E[i], data.F[j], QQ), target, QQ):
                out.append(f"[E_{i}, F_{j}] != delta H")
    return out


def shift_matrix(spec: AlgebraSpec | ChevalleyData, ring=QQ) -> MatSeries:
    """``Lambda = sum_{i>=1} E_i + z E_0`` as an exact series in ``z`` over ``ring``."""
    data = spec if isinstance(spec, ChevalleyData) else build_algebra(spec)
    E = data.E
    low = E[1]
    for M in E[2:]:
        low = mat_add(low, M)
    return MatSeries(ring, data.N, {0: lift(low, ring), 1: lift(E[0], ring)}, 0, None)
