"""The ``a`` and ``d`` kernels of a factorized loop and their Fourier blocks.

With ``a(z,w) = (I - Psi_+(z) Psi_+(w)^{-1}) / (z - w)`` and
``d(z,w) = (Psi_-(z) Psi_-(w)^{-1} - I) / (z - w)``, the blocks are

* ``a^p_{-q}``: coefficient of ``z^{p-1/2} w^{q-1/2}`` in ``a``,
* ``d^{-q}_p``: coefficient of ``z^{-q-1/2} w^{-p-1/2}`` in ``d``,

for positive half-integers ``p, q``.  Both are stored under the key ``(p, q)``.

The division by ``z - w`` is done termwise.  For a series
``Phi(x) = sum Phi_m x^m`` with inverse ``G = sum G_n x^n``,

    (I - Phi(x) G(y)) / (x - y) = sum_{i,j>=0} c_ij x^i y^j,
    c_ij = sum_{m=0}^{i} Phi_m G_{i+j+1-m},

which uses the telescoping ``(x^m - y^m)/(x - y)`` and ``Phi G = I``.  The
``a`` blocks are ``c_ij`` for ``Psi_+`` in ``z``; the ``d`` blocks are ``c_ij``
for ``Psi_-`` re-expanded in ``u = 1/z``, because
``d = u v (I - Phi(u) G(v)) / (u - v)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from pfaffian_tau.algebra import (
    MatSeries,
    Matrix,
    SeriesError,
    format_scalar,
    identity,
    mat_add,
    mat_equal,
    mat_mul,
    series_inverse,
    series_mul,
    zeros,
)
from pfaffian_tau.combinatorics import HalfInt


@dataclass(frozen=True)
class KernelBlocks:
    """Blocks of an ``a`` or ``d`` kernel keyed by ``(p, q)``.

    ``max_weight`` bounds ``p + q`` for the stored blocks.  ``complete`` means
    every block beyond ``max_weight`` is known to vanish (nilpotent data).
    """

    kind: str
    N: int
    ring: object
    blocks: Mapping[tuple[HalfInt, HalfInt], Matrix] = field(repr=False)
    max_weight: int
    complete: bool = False

    def __post_init__(self):
        if self.kind not in ("a", "d"):
            raise ValueError(f"kind must be 'a' or 'd', not {self.kind!r}")

    def block(self, p: HalfInt, q: HalfInt) -> Matrix:
        if p.twice <= 0 or q.twice <= 0:
            raise ValueError("block indices must be positive half-integers")
        got = self.blocks.get((p, q))
        if got is not None:
            return got
        if (p.twice + q.twice) // 2 > self.max_weight and not self.complete:
            raise SeriesError(
                f"block ({p}, {q}) lies beyond the computed weight {self.max_weight}"
            )
        return zeros(self.N, self.ring)

    def entry(self, alpha: int, p: HalfInt, beta: int, q: HalfInt):
        got = self.blocks.get((p, q))
        if got is None:
            return self.block(p, q)[alpha][beta]
        return got[alpha][beta]

    def support_weight(self) -> int:
        """Largest ``p + q`` carrying a nonzero block (0 if none)."""
        return max(((p.twice + q.twice) // 2 for p, q in self.blocks), default=0)

    def to_json(self) -> str:
        data = {
            f"{p.twice}/{q.twice}": [[format_scalar(x) for x in row] for row in M]
            for (p, q), M in sorted(self.blocks.items())
        }
        return json.dumps(
            {"kind": self.kind, "N": self.N, "max_weight": self.max_weight, "blocks": data},
            sort_keys=True,
        )


def _coeff(series: MatSeries, k: int) -> Matrix:
    return series.coeffs.get(k) or zeros(series.n, series.ring)


def division_blocks(phi: MatSeries, g: MatSeries, max_weight: int) -> dict[tuple[int, int], Matrix]:
    """``c_ij`` for ``i + j + 1 <= max_weight`` after checking ``Phi G = I`` up to that order.

    Uses ``c_ij = c_{i-1,j+1} + Phi_i G_{j+1}`` and ``c_0j = G_{j+1}`` so each
    product ``Phi_m G_n`` is formed once.
    """
    ring, n = phi.ring, phi.n
    prods: dict[tuple[int, int], Matrix] = {}

    def prod(m: int, k: int):
        key = (m, k)
        if key not in prods:
            A, B = phi.coeffs.get(m), g.coeffs.get(k)
            prods[key] = None if A is None or B is None else mat_mul(A, B, ring)
        return prods[key]

    for K in range(max_weight + 1):
        acc = zeros(n, ring)
        for m in range(K + 1):
            P = prod(m, K - m)
            if P is not None:
                acc = mat_add(acc, P)
        target = identity(n, ring) if K == 0 else zeros(n, ring)
        if not mat_equal(acc, target, ring):
            raise SeriesError(
                f"numerator is not divisible by (z - w) at order {K}: "
                "the supplied inverse or truncation window is too small"
            )
    out = {}
    for K in range(1, max_weight + 1):
        acc = None
        for i in range(K):
            j = K - 1 - i
            P = prod(i, j + 1)
            if P is not None:
                acc = P if acc is None else mat_add(acc, P)
            if acc is not None and any(not ring.is_zero(x) for row in acc for x in row):
                out[(i, j)] = acc
    return out


def _check_window(series: MatSeries, needed: int, what: str):
    if series.kmax is not None and series.kmax < needed:
        raise SeriesError(f"{what} known only to order {series.kmax}, need {needed}")
    if min(series.coeffs, default=0) < 0:
        raise SeriesError(f"{what} has negative powers; expected a series analytic at 0")


def build_a(psi_plus: MatSeries, max_weight: int, psi_plus_inverse: MatSeries | None = None) -> KernelBlocks:
    """Blocks ``a^p_{-q}`` with ``p + q <= max_weight`` from ``Psi_+`` (a series in z)."""
    _check_window(psi_plus, max_weight, "Psi_+")
    inv = psi_plus_inverse
    if inv is None:
        inv = series_inverse(psi_plus, kmax=max_weight)
    _check_window(inv, max_weight, "Psi_+^{-1}")
    raw = division_blocks(psi_plus, inv, max_weight)
    blocks = {(HalfInt.from_part(i), HalfInt.from_part(j)): M for (i, j), M in raw.items()}
    return KernelBlocks("a", psi_plus.n, psi_plus.ring, blocks, max_weight)


def build_d(
    psi_minus: MatSeries,
    max_weight: int | None = None,
    psi_minus_inverse: MatSeries | None = None,
) -> KernelBlocks:
    """Blocks ``d^{-q}_p`` from ``Psi_-``, a series in ``1/z`` with ``Psi_-(inf) = I``.

    ``psi_minus`` is given in powers of ``z`` (non-positive).  When it is an
    exact Laurent polynomial whose inverse is also polynomial (nilpotent
    initial data), ``max_weight`` may be omitted; the block family is then
    finite and the result is marked complete.
    """
    if max(psi_minus.coeffs, default=0) > 0:
        raise SeriesError("Psi_- has positive powers of z; expected a series analytic at infinity")
    if not mat_equal(_coeff(psi_minus, 0), identity(psi_minus.n, psi_minus.ring), psi_minus.ring):
        raise SeriesError("Psi_- must tend to the identity at infinity")
    phi = _in_inverse_variable(psi_minus)
    g = None if psi_minus_inverse is None else _in_inverse_variable(psi_minus_inverse)
    if g is None:
        if max_weight is None:
            deg = max(phi.coeffs, default=0)
            g = series_inverse(phi, kmax=(phi.n - 1) * deg + 1)
            if max(g.coeffs, default=0) > (phi.n - 1) * deg:
                raise SeriesError("Psi_- has no polynomial inverse; give max_weight")
            g = g._replace(kmax=None)
        else:
            g = series_inverse(phi, kmax=max_weight)
    if max_weight is None:
        if g.kmax is not None:
            raise SeriesError("max_weight is required when the inverse is truncated")
        if not series_mul(phi, g).equals(MatSeries.identity(phi.n, phi.ring)):
            raise SeriesError("supplied inverse of Psi_- is not exact")
    complete = False
    if phi.kmax is None and g.kmax is None:
        bound = max(max(phi.coeffs, default=0) + max(g.coeffs, default=0) - 1, 0)
        if max_weight is None:
            max_weight = bound
        complete = max_weight >= bound
    raw = division_blocks(phi, g, max_weight)
    # c_ij is the coefficient of u^{i+1} v^{j+1}: q = i + 1/2, p = j + 1/2
    blocks = {(HalfInt.from_part(j), HalfInt.from_part(i)): M for (i, j), M in raw.items()}
    return KernelBlocks("d", psi_minus.n, psi_minus.ring, blocks, max_weight, complete)


def _in_inverse_variable(s: MatSeries) -> MatSeries:
    if s.kmax is not None:
        raise SeriesError("Psi_- must be an exact Laurent polynomial in 1/z for the series route")
    return s.inverse_variable()


def check_antisymmetry(kb: KernelBlocks, S: Matrix, tol: float | None = None) -> list[tuple]:
    """Entries violating ``(K^p_q)_{ab} = -(S K^q_p S)_{ba}``, with their residuals.

    The same relation holds for ``a^p_{-q}`` and ``d^{-q}_p`` when the loops are
    S-orthogonal.  Returns ``(p, q, alpha, beta, residual)`` tuples; residuals
    are absolute values for floating rings, and the raw difference otherwise.
    """
    ring = kb.ring
    if tol is None:
        is_zero = ring.is_zero
    else:
        is_zero = lambda x: abs(x) <= tol
    keys = set(kb.blocks) | {(q, p) for p, q in kb.blocks}
    out = []
    for p, q in sorted(keys):
        A = kb.blocks.get((p, q)) or zeros(kb.N, ring)
        B = kb.blocks.get((q, p)) or zeros(kb.N, ring)
        SBS = mat_mul(mat_mul(S, B, ring), S, ring)
        for al in range(kb.N):
            for be in range(kb.N):
                r = A[al][be] + SBS[be][al]
                if not is_zero(r):
                    out.append((p, q, al, be, abs(r) if ring.is_field and not isinstance(r, Fraction) else r))
    return out


def max_antisymmetry_residual(kb: KernelBlocks, S: Matrix) -> float:
    """Largest ``|(K^p_q)_{ab} + (S K^q_p S)_{ba}|`` over the stored blocks (floating rings)."""
    return max((abs(v[-1]) for v in check_antisymmetry(kb, S, tol=-1.0)), default=0.0)
