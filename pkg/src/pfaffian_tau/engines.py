"""Pfaffians, determinants and the minor expansions of the two tau-functions.

Conventions fixed here and pinned by the golden tests:

* Modes of a strict N-tuple are ordered colour ascending, ``p`` descending.
* ``Pf(S a)_lambda`` uses entries ``(S a^{p_i}_{-p_j})_{alpha_i alpha_j}``.
* ``Pf(d S)_lambda`` uses entries ``(d^{-p_i}_{p_j} S)_{alpha_i alpha_j}``.
* ``tau_O = sum_lambda Pf(S a)_lambda Pf(d S)_lambda`` and
  ``tau_W = sum (-1)^k det(a^P_{-Q}) det(d^{-Q}_P)`` over index sets with
  ``#P = #Q = k``; both have constant term 1.

Two gradings are used for truncation.  ``strict`` is ``|lambda| = sum (p+1/2)``.
``block`` is ``sum p``, the total power of z carried by a term: under
``Psi_+(z) -> Psi_+(s z)``, ``Psi_-(z) -> Psi_-(z/s)`` every block is scaled
by ``s^{p+q}``, so a term of block weight ``w`` scales as ``s^w`` on both sides
of ``tau_W = tau_O^2``.  The square relation therefore holds degree by degree
in this grading, which is what :func:`square_check` compares.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from pfaffian_tau.algebra import (
    QQ,
    ComplexField,
    ConfigurationError,
    Matrix,
    Poly,
    PolyRing,
    format_scalar,
    lift,
    mat_mul,
)
from pfaffian_tau.combinatorics import HalfInt, StrictTuple
from pfaffian_tau.kernels import KernelBlocks, check_antisymmetry

EXPANSION_LIMIT = 8


def infer_ring(M: Sequence[Sequence]):
    for row in M:
        for x in row:
            if isinstance(x, Poly):
                return x.ring
            if isinstance(x, complex) or isinstance(x, float):
                return ComplexField()
    return QQ


# ---------------------------------------------------------------------------
# Pfaffian and determinant
# ---------------------------------------------------------------------------


def _constant_entries(M, ring):
    """The matrix of constant terms when every entry of a polynomial matrix is constant."""
    if not isinstance(ring, PolyRing):
        return None
    out = []
    for row in M:
        if not all(x.is_constant() for x in row):
            return None
        out.append([x.constant_term() for x in row])
    return out


def _is_antisymmetric(M, ring) -> bool:
    n = len(M)
    return all(ring.is_zero(M[i][j] + M[j][i]) for i in range(n) for j in range(i, n))


def _pf_expand(M, idx: tuple[int, ...], ring, memo: dict):
    if not idx:
        return ring.one()
    got = memo.get(idx)
    if got is not None:
        return got
    i, rest = idx[0], idx[1:]
    total = ring.zero()
    for k, j in enumerate(rest):
        m = M[i][j]
        if ring.is_zero(m):
            continue
        sub = _pf_expand(M, rest[:k] + rest[k + 1 :], ring, memo)
        if ring.is_zero(sub):
            continue
        total = total + m * sub if k % 2 == 0 else total - m * sub
    memo[idx] = total
    return total


def _pf_field(M, ring):
    """Elimination with a pivot per pair of rows (largest modulus for floats)."""
    A = [list(r) for r in M]
    n = len(A)
    out = ring.one()
    numeric = isinstance(ring, ComplexField)
    for k in range(0, n - 1, 2):
        if numeric:
            piv = max(range(k + 1, n), key=lambda j: abs(A[k][j]))
        else:
            piv = next((j for j in range(k + 1, n) if A[k][j] != 0), k + 1)
        if ring.is_zero(A[k][piv]) and (numeric or A[k][piv] == 0):
            if not numeric or abs(A[k][piv]) == 0:
                return ring.zero()
        if piv != k + 1:
            A[k + 1], A[piv] = A[piv], A[k + 1]
            for row in A:
                row[k + 1], row[piv] = row[piv], row[k + 1]
            out = -out
        p = A[k][k + 1]
        out = out * p
        if k + 2 < n:
            tau = [A[k][j] / p for j in range(k + 2, n)]
            col = [A[i][k + 1] for i in range(k + 2, n)]
            for a, i in enumerate(range(k + 2, n)):
                row = A[i]
                ti, ci = tau[a], col[a]
                for b, j in enumerate(range(k + 2, n)):
                    row[j] = row[j] + ti * col[b] - ci * tau[b]
    return out


def _pf_fraction_free(M, ring):
    """Pfaffian analogue of Bareiss elimination: all divisions are exact.

    After step k the entry (i, j) equals the Pfaffian of the principal minor on
    the first 2k pivot indices together with i and j.
    """
    A = [list(r) for r in M]
    n = len(A)
    sign = 1
    prev = ring.one()
    for k in range(0, n - 2, 2):
        if ring.is_zero(A[k][k + 1]):
            j = next((j for j in range(k + 2, n) if not ring.is_zero(A[k][j])), None)
            if j is None:
                return ring.zero()
            A[k + 1], A[j] = A[j], A[k + 1]
            for row in A:
                row[k + 1], row[j] = row[j], row[k + 1]
            sign = -sign
        p = A[k][k + 1]
        rk, rk1 = A[k], A[k + 1]
        B = [row[:] for row in A]
        for i in range(k + 2, n):
            for j in range(i + 1, n):
                v = p * A[i][j] - rk[i] * rk1[j] + rk[j] * rk1[i]
                v = ring.exact_div(v, prev)
                B[i][j] = v
                B[j][i] = -v
        A = B
        prev = p
    out = A[n - 2][n - 1]
    return out if sign > 0 else -out


def pfaffian(M: Sequence[Sequence], ring=None, check: bool = True):
    """Pfaffian of an antisymmetric matrix; 0 for odd sizes, 1 for the empty matrix.

    Sizes up to 8 use recursive expansion along the first row.  Larger
    matrices use pivoted elimination over fields and the fraction-free
    recurrence over polynomial rings.
    """
    ring = ring or infer_ring(M)
    n = len(M)
    if check and not _is_antisymmetric(M, ring):
        raise ConfigurationError("matrix is not antisymmetric")
    if n % 2:
        return ring.zero()
    if n == 0:
        return ring.one()
    if n == 2:
        return M[0][1]
    const = _constant_entries(M, ring)
    if const is not None:
        return ring.scalar(pfaffian(const, QQ, check=False))
    if n <= EXPANSION_LIMIT:
        return _pf_expand(M, tuple(range(n)), ring, {})
    if ring.is_field:
        return _pf_field(M, ring)
    return _pf_fraction_free(M, ring)


def det(M: Sequence[Sequence], ring=None):
    """Determinant: pivoted elimination over fields, Bareiss otherwise."""
    ring = ring or infer_ring(M)
    n = len(M)
    if n == 0:
        return ring.one()
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    const = _constant_entries(M, ring)
    if const is not None:
        return ring.scalar(det(const, QQ))
    A = [list(r) for r in M]
    sign = 1
    if ring.is_field:
        numeric = isinstance(ring, ComplexField)
        out = ring.one()
        for k in range(n):
            if numeric:
                piv = max(range(k, n), key=lambda r: abs(A[r][k]))
            else:
                piv = next((r for r in range(k, n) if A[r][k] != 0), None)
                if piv is None:
                    return ring.zero()
            if A[piv][k] == 0:
                return ring.zero()
            if piv != k:
                A[k], A[piv] = A[piv], A[k]
                sign = -sign
            p = A[k][k]
            out = out * p
            for r in range(k + 1, n):
                f = A[r][k] / p
                if f:
                    A[r] = [x - f * y for x, y in zip(A[r], A[k])]
        return out if sign > 0 else -out
    prev = ring.one()
    for k in range(n - 1):
        if ring.is_zero(A[k][k]):
            piv = next((r for r in range(k + 1, n) if not ring.is_zero(A[r][k])), None)
            if piv is None:
                return ring.zero()
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = ring.exact_div(A[k][k] * A[i][j] - A[i][k] * A[k][j], prev)
        prev = A[k][k]
    return A[n - 1][n - 1] if sign > 0 else -A[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Minor assembly
# ---------------------------------------------------------------------------

Index = tuple[int, HalfInt]


class _MinorBuilder:
    """Caches ``S a`` and ``d S`` blocks and assembles minors from index lists."""

    def __init__(self, a: KernelBlocks | None, d: KernelBlocks, S: Matrix | None):
        self.a, self.d = a, d
        self.ring = d.ring
        self.S = None if S is None else lift(S, self.ring)
        self._sa: dict = {}
        self._ds: dict = {}

    def sa(self, p: HalfInt, q: HalfInt) -> Matrix:
        got = self._sa.get((p, q))
        if got is None:
            got = mat_mul(self.S, self.a.block(p, q), self.ring)
            self._sa[(p, q)] = got
        return got

    def ds(self, p: HalfInt, q: HalfInt) -> Matrix:
        """``d^{-p}_q S`` (stored block key is ``(q, p)``)."""
        got = self._ds.get((p, q))
        if got is None:
            got = mat_mul(self.d.block(q, p), self.S, self.ring)
            self._ds[(p, q)] = got
        return got

    # diagonal entries vanish by antisymmetry and are not read from the blocks
    def pf_a_matrix(self, idx: Sequence[Index]) -> list[list]:
        z = self.ring.zero()
        return [[z if i == j else self.sa(p, q)[al][be] for j, (be, q) in enumerate(idx)] for i, (al, p) in enumerate(idx)]

    def pf_d_matrix(self, idx: Sequence[Index]) -> list[list]:
        z = self.ring.zero()
        return [[z if i == j else self.ds(p, q)[al][be] for j, (be, q) in enumerate(idx)] for i, (al, p) in enumerate(idx)]

    def det_a_matrix(self, P: Sequence[Index], Q: Sequence[Index]) -> list[list]:
        return [[self.a.entry(al, p, be, q) for be, q in Q] for al, p in P]

    def det_d_matrix(self, P: Sequence[Index], Q: Sequence[Index]) -> list[list]:
        # rows (beta, q), columns (alpha, p): (d^{-q}_p)_{beta alpha}
        return [[self.d.entry(be, p, al, q) for al, p in P] for be, q in Q]


def _d_pf_support(d: KernelBlocks, S: Matrix) -> set[Index]:
    """Modes (alpha, p) whose row in the ``d S`` form is not identically zero."""
    ring = d.ring
    Sr = lift(S, ring)
    out = set()
    for (p, q), B in d.blocks.items():
        BS = mat_mul(B, Sr, ring)  # d^{-q}_p S: row index goes with q
        for al in range(d.N):
            if any(not ring.is_zero(x) for x in BS[al]):
                out.add((al, q))
    return out


def _generic_rank(M: list[list], ring) -> int:
    """Rank at random rational points (exact; max over two points)."""
    if not M:
        return 0
    if isinstance(ring, PolyRing):
        best = 0
        for seed in (12345, 67890):
            rng = random.Random(seed)
            vals = {v: Fraction(rng.randint(-97, 97), rng.randint(1, 13)) for v in ring.variables}
            num = [[x.evaluate(vals) for x in row] for row in M]
            best = max(best, _rank_field(num, QQ))
        return best
    return _rank_field(M, ring)


def _rank_field(M, ring) -> int:
    A = [list(r) for r in M]
    rank = 0
    rows, cols = len(A), len(A[0]) if A else 0
    for c in range(cols):
        piv = next((r for r in range(rank, rows) if not ring.is_zero(A[r][c])), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(rows):
            if r != rank and not ring.is_zero(A[r][c]):
                f = A[r][c] / A[rank][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def _weight_of(idx: Iterable[Index], grading: str) -> Fraction:
    off = Fraction(1, 2) if grading == "strict" else Fraction(0)
    return sum((p.value + off for _, p in idx), Fraction(0))


def _ordered(indices: Iterable[Index]) -> list[Index]:
    return sorted(indices, key=lambda t: (t[0], -t[1].twice))


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass
class TauResult:
    """A truncated tau value with the ledger of contributing terms.

    ``exact`` is True when every term beyond the truncation is known to vanish.
    """

    value: object
    terms: list = field(default_factory=list)
    truncation: object = None
    grading: str = "strict"
    exact: bool = False

    def __str__(self):
        return format_scalar(self.value)


def _exactness_bound(support: set[Index], rank: int, grading: str) -> Fraction:
    ws = sorted((_weight_of([ix], grading) for ix in support), reverse=True)
    return sum(ws[: rank - rank % 2], Fraction(0))


def _index_sets(support: Sequence[Index], max_weight, grading: str, even: bool = True):
    """Subsets of ``support`` (kept in canonical order) with weight <= ``max_weight``."""
    modes = _ordered(support)
    weights = [_weight_of([ix], grading) for ix in modes]
    W = Fraction(max_weight)
    n = len(modes)

    def rec(start: int, acc: list, w: Fraction):
        if acc and (not even or len(acc) % 2 == 0):
            yield list(acc), w
        for k in range(start, n):
            wk = w + weights[k]
            if wk <= W:
                acc.append(modes[k])
                yield from rec(k + 1, acc, wk)
                acc.pop()

    yield from rec(0, [], Fraction(0))


def exactness_bound(d: KernelBlocks, S: Matrix, grading: str = "strict") -> Fraction | None:
    """Largest weight a nonzero ``Pf(d S)`` minor can have, for complete ``d``; else None.

    Uses the generic rank ``r`` of the full ``d S`` form on its support: a
    nonzero minor has at most ``r`` modes, so its weight is at most the sum of
    the ``r`` largest mode weights.
    """
    if not d.complete:
        return None
    support = _d_pf_support(d, S)
    mb = _MinorBuilder(None, d, S)
    full = mb.pf_d_matrix(_ordered(support))
    return _exactness_bound(support, _generic_rank(full, d.ring), grading)


def pfaffian_tau(
    a: KernelBlocks,
    d: KernelBlocks,
    S: Matrix,
    max_weight=None,
    *,
    grading: str = "strict",
    keep_terms: bool = True,
    check: bool = True,
) -> TauResult:
    """``tau_O = sum_lambda Pf(S a)_lambda Pf(d S)_lambda`` up to ``max_weight``.

    Only tuples whose modes all lie in the support of the ``d S`` form are
    visited, and ``Pf(d S)`` is evaluated first.  With ``max_weight=None`` and
    complete (nilpotent) ``d`` the cutoff is :func:`exactness_bound`.
    """
    if a.kind != "a" or d.kind != "d" or a.N != d.N:
        raise ConfigurationError("need an 'a' and a 'd' kernel of equal size")
    if check:
        for kb in (a, d):
            bad = check_antisymmetry(kb, S)
            if bad:
                p, q, al, be, r = bad[0]
                raise ConfigurationError(
                    f"{kb.kind} kernel is not S-antisymmetric at block ({p}, {q}), entry ({al}, {be})"
                )
    mb = _MinorBuilder(a, d, S)
    ring = d.ring
    support = _d_pf_support(d, S)
    bound = exactness_bound(d, S, grading)
    if max_weight is None:
        if bound is None:
            raise ConfigurationError("max_weight is required unless the d kernel is complete")
        max_weight = bound
    total = ring.one()
    terms = []
    for idx, _w in _index_sets(support, max_weight, grading):
        pd = pfaffian(mb.pf_d_matrix(idx), ring, check=False)
        if ring.is_zero(pd):
            continue
        pa = pfaffian(mb.pf_a_matrix(idx), ring, check=False)
        total = total + pa * pd
        if keep_terms:
            terms.append((StrictTuple.from_indices(d.N, idx), pd, pa))
    key = (lambda t: (t[0].weight, str(t[0]))) if grading == "strict" else (lambda t: (t[0].block_weight, str(t[0])))
    terms.sort(key=key)
    if keep_terms:
        terms.insert(0, (StrictTuple(((),) * d.N), ring.one(), ring.one()))
    exact = bound is not None and Fraction(max_weight) >= bound
    return TauResult(total, terms, max_weight, grading, exact)


def minor_tables(a: KernelBlocks, d: KernelBlocks, S: Matrix, max_weight: int) -> list[dict]:
    """Rows ``{tuple, weight, pf_d, pf_a}`` for every nonempty tuple with nonzero ``Pf(d S)``."""
    res = pfaffian_tau(a, d, S, max_weight, keep_terms=True)
    rows = []
    for lam, pd, pa in res.terms:
        if lam.cardinality == 0:
            continue
        rows.append({"tuple": lam, "weight": lam.weight, "pf_d": pd, "pf_a": pa})
    return rows


def format_minor_table(rows: list[dict], extra: dict | None = None) -> str:
    """Aligned text, grouped by weight: ``Pf(d) | Pf(a) | tuple``."""
    lines = []
    current = None
    for r in rows:
        if r["weight"] != current:
            current = r["weight"]
            group = [x for x in rows if x["weight"] == current]
            width_d = max(5, *(len(format_scalar(x["pf_d"])) for x in group))
            width_a = max(5, *(len(format_scalar(x["pf_a"])) for x in group))
            labelled = bool(extra) and any(x.get("q_label") for x in group)
            width_t = max(5, *(len(str(x["tuple"])) for x in group)) if labelled else 0
            lines.append(f"# weight {current}")
            header = f"{'Pf(d)':<{width_d}} | {'Pf(a)':<{width_a}} | {'tuple':<{width_t}}"
            lines.append(header + " | Q label" if labelled else header.rstrip())
        line = f"{format_scalar(r['pf_d']):<{width_d}} | {format_scalar(r['pf_a']):<{width_a}} | {str(r['tuple']):<{width_t}}"
        if labelled and r.get("q_label"):
            line += f" | {r['q_label']}"
        lines.append(line.rstrip())
    return "\n".join(lines)


def _widom_modes(d: KernelBlocks) -> tuple[set[Index], set[Index]]:
    """Modes that can occur: ``p`` as a column of ``(d^{-q}_p)_{beta alpha}``, ``q`` as a row."""
    ring, N = d.ring, d.N
    cols, rows = set(), set()
    for (p, q), B in d.blocks.items():
        for be in range(N):
            for al in range(N):
                if not ring.is_zero(B[be][al]):
                    cols.add((al, p))
                    rows.add((be, q))
    return cols, rows


def _series_mul(x: dict, y: dict, top: int, ring) -> dict:
    out: dict = {}
    for i, u in x.items():
        for j, v in y.items():
            if i + j <= top:
                w = u * v
                out[i + j] = out[i + j] + w if i + j in out else w
    return {k: v for k, v in out.items() if not ring.is_zero(v)}


def _series_sub(x: dict, y: dict, ring) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out[k] - v if k in out else -v
    return {k: v for k, v in out.items() if not ring.is_zero(v)}


def _series_unit_inverse(x: dict, top: int, ring) -> dict:
    """Inverse of a series with constant term 1."""
    tail = {k: -v for k, v in x.items() if k > 0}
    out, power = {0: ring.one()}, {0: ring.one()}
    for _ in range(top):
        power = _series_mul(power, tail, top, ring)
        if not power:
            break
        out = _series_sub(out, {k: -v for k, v in power.items()}, ring)
    return out


def _widom_series_det(a: KernelBlocks, d: KernelBlocks, max_weight: int):
    """``det(I - K(s))`` modulo ``s^{W+1}``, ``K_{PP'} = sum_Q a^P_{-Q} d^{-Q}_{P'} s^{p+q}``.

    By Cauchy-Binet the coefficient of ``s^w`` collects exactly the terms of
    the minor expansion with ``sum p + sum q = w``.
    """
    ring = d.ring
    W = int(max_weight)
    cols, rows = _widom_modes(d)
    P = [m for m in _ordered(cols) if m[1].twice < 2 * W]
    Q = [m for m in _ordered(rows) if m[1].twice < 2 * W]
    n = len(P)
    if n == 0:
        return ring.one()
    M = []
    for i, (al, p) in enumerate(P):
        row = []
        for j, (al2, p2) in enumerate(P):
            entry: dict = {0: ring.one()} if i == j else {}
            for be, q in Q:
                e = (p.twice + q.twice) // 2
                if e > W:
                    continue
                dv = d.entry(be, p2, al2, q)
                if ring.is_zero(dv):
                    continue
                av = a.entry(al, p, be, q)
                if ring.is_zero(av):
                    continue
                v = av * dv
                entry[e] = entry[e] - v if e in entry else -v
            row.append({k: v for k, v in entry.items() if not ring.is_zero(v)})
        M.append(row)
    out = {0: ring.one()}
    for k in range(n):
        piv = M[k][k]
        out = _series_mul(out, piv, W, ring)
        if not out:
            return ring.zero()
        inv = _series_unit_inverse(piv, W, ring)
        for r in range(k + 1, n):
            if not M[r][k]:
                continue
            f = _series_mul(M[r][k], inv, W, ring)
            Mr, Mk = M[r], M[k]
            for c in range(k + 1, n):
                if Mk[c]:
                    Mr[c] = _series_sub(Mr[c], _series_mul(f, Mk[c], W, ring), ring)
    total = ring.zero()
    for v in out.values():
        total = total + v
    return total


def widom_tau(
    a: KernelBlocks,
    d: KernelBlocks,
    max_weight,
    *,
    keep_terms: bool = False,
    method: str = "minors",
) -> TauResult:
    """``tau_W = sum (-1)^k det(a^P_{-Q}) det(d^{-Q}_P)`` with ``sum p + sum q <= max_weight``.

    ``P`` and ``Q`` are sets of coloured modes of equal size ``k``.
    ``method="minors"`` sums the expansion term by term.  ``method="series"``
    resums it as the Fredholm determinant ``det(I - a d)`` over power series
    in a block-weight parameter, which is much cheaper for generic data;
    ``terms`` is then left empty.
    """
    if a.kind != "a" or d.kind != "d" or a.N != d.N:
        raise ConfigurationError("need an 'a' and a 'd' kernel of equal size")
    if method not in ("minors", "series"):
        raise ConfigurationError(f"unknown widom method {method!r}")
    ring = d.ring
    mb = _MinorBuilder(a, d, None)
    cols, rows = _widom_modes(d)
    exact = False
    W = Fraction(max_weight)
    if d.complete:
        Dm = [[mb.d.entry(be, p, al, q) for al, p in _ordered(cols)] for be, q in _ordered(rows)]
        r = _generic_rank(Dm, ring)
        wc = sorted((p.value for _, p in cols), reverse=True)[:r]
        wr = sorted((q.value for _, q in rows), reverse=True)[:r]
        exact = W >= sum(wc, Fraction(0)) + sum(wr, Fraction(0))
    if method == "series":
        if W.denominator != 1:
            raise ConfigurationError("the series method needs an integer weight cutoff")
        return TauResult(_widom_series_det(a, d, int(W)), [], max_weight, "block", exact)
    P_sets: dict[int, list] = {}
    Q_sets: dict[int, list] = {}
    for idx, w in _index_sets(cols, max_weight, "block", even=False):
        P_sets.setdefault(len(idx), []).append((w, idx))
    for idx, w in _index_sets(rows, max_weight, "block", even=False):
        Q_sets.setdefault(len(idx), []).append((w, idx))
    total = ring.one()
    terms = []
    for k in sorted(P_sets):
        Ps = P_sets[k]
        Qs = sorted(Q_sets.get(k, []), key=lambda x: x[0])
        for wp, P in Ps:
            for wq, Q in Qs:
                if wp + wq > W:
                    break
                dd = det(mb.det_d_matrix(P, Q), ring)
                if ring.is_zero(dd):
                    continue
                da = det(mb.det_a_matrix(P, Q), ring)
                term = da * dd
                total = total - term if k % 2 else total + term
                if keep_terms:
                    terms.append(((tuple(P), tuple(Q)), da, dd))
    return TauResult(total, terms, max_weight, "block", exact)


def square_check(a: KernelBlocks, d: KernelBlocks, S: Matrix, max_weight, *, method: str = "minors") -> dict:
    """Compare ``tau_W`` with ``tau_O^2``, both truncated at block weight ``max_weight``.

    The square keeps only products of minors whose block weights add up to at
    most ``max_weight``, the range in which both truncations are complete.
    """
    ring = d.ring
    tw = widom_tau(a, d, max_weight, method=method)
    to = pfaffian_tau(a, d, S, max_weight, grading="block", keep_terms=True)
    by_weight: dict[Fraction, object] = {}
    for lam, pd, pa in to.terms:
        w = lam.block_weight
        by_weight[w] = by_weight[w] + pa * pd if w in by_weight else pa * pd
    sq = ring.zero()
    W = Fraction(max_weight)
    for w1, x in by_weight.items():
        for w2, y in by_weight.items():
            if w1 + w2 <= W:
                sq = sq + x * y
    diff = tw.value - sq
    out = {
        "max_weight": max_weight,
        "tau_w": tw.value,
        "tau_o": to.value,
        "tau_o_squared": sq,
        "difference": diff,
        "tau_w_exact": tw.exact,
        "tau_o_exact": to.exact,
    }
    if isinstance(ring, ComplexField):
        out["residual"] = abs(diff) / abs(tw.value) if tw.value else abs(diff)
        out["agrees"] = out["residual"] <= 1e-6
    else:
        out["agrees"] = ring.is_zero(diff)
    return out


def fredholm_pfaffian_truncated(a: KernelBlocks, d: KernelBlocks, S: Matrix, M: int):
    """Normalized ``Pf(Omega + blockdiag(S a Omega_+, d S Omega_-))`` on modes ``p <= M - 1/2``.

    In the basis ``(e_p, f_p)`` with ``e_p = z^{p-1/2}``, ``f_p = z^{-p-1/2}``
    the 2-form is ``[[A, I], [-I, -D]]`` with ``A`` and ``D`` the full ``S a``
    and ``d S`` forms on the retained modes (in canonical order).  The result
    is divided by ``Pf`` of the ``a = d = 0`` form, so the constant term is 1.
    For exact rings, modes where the ``d S`` form vanishes identically are
    dropped first: their rows only ever multiply ``Pf(D_I) = 0``.
    """
    if M < 1:
        raise ConfigurationError("mode cutoff must be positive")
    ring = d.ring
    mb = _MinorBuilder(a, d, S)
    modes = [(al, HalfInt.from_part(k)) for al in range(d.N) for k in range(M - 1, -1, -1)]
    if not isinstance(ring, ComplexField):
        support = _d_pf_support(d, S)
        modes = [ix for ix in modes if ix in support]
    n = len(modes)
    if n == 0:
        return ring.one()
    A = mb.pf_a_matrix(modes)
    D = mb.pf_d_matrix(modes)
    one, zero = ring.one(), ring.zero()
    F = [[zero] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            F[i][j] = A[i][j]
            F[n + i][n + j] = -D[i][j]
        F[i][n + i] = one
        F[n + i][i] = -one
    value = pfaffian(F, ring, check=False)
    # Pf([[0, I], [-I, 0]]) = (-1)^{n(n-1)/2}
    return value if (n * (n - 1) // 2) % 2 == 0 else -value
