"""Numeric 4-point isomonodromic kernels and the SL(2) -> SO(3) square relation.

The 3-point SL(2) solutions are built from Gauss hypergeometric series, mapped
to SO(3) by the adjoint representation, sampled on the circle ``|z| = R`` and
turned into Fourier blocks.  Everything is rescaled to the unit circle by
``z = R zeta``; minor products are invariant under this rescaling, while the
blocks decay geometrically (like ``R^{p+q}`` for ``a`` and ``(t/R)^{p+q}``
for ``d``), which is what makes a finite mode cutoff accurate.
"""

from __future__ import annotations

import cmath
import time
from dataclasses import asdict, dataclass
from typing import Literal

import numpy as np

from pfaffian_tau.algebra import ComplexField, ConfigurationError, MatSeries
from pfaffian_tau.combinatorics import HalfInt
from pfaffian_tau.engines import pfaffian_tau, widom_tau
from pfaffian_tau.kernels import KernelBlocks, division_blocks, max_antisymmetry_residual

Side = Literal["plus", "minus"]

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


class ConvergenceError(ArithmeticError):
    """A series or a truncation did not reach its tolerance."""


@dataclass(frozen=True)
class IsoParams:
    theta0: complex
    thetat: complex
    theta1: complex
    thetainf: complex
    sigma: complex
    eta: complex = 0.0
    t: complex = 0.2
    R: float = 0.5
    quad_nodes: int = 256
    M: int = 16

    def __post_init__(self):
        two_s = 2 * complex(self.sigma)
        if abs(two_s.imag) < 1e-14 and abs(two_s.real - round(two_s.real)) < 1e-12:
            raise ConfigurationError(f"resonant sigma: 2*sigma = {two_s.real:g} is an integer")
        if not (0 < abs(self.t) < self.R < 1):
            raise ConfigurationError(f"need 0 < |t| < R < 1, got |t| = {abs(self.t):g}, R = {self.R:g}")
        if self.quad_nodes <= 0 or self.quad_nodes % 2:
            raise ConfigurationError("quad_nodes must be a positive even integer")
        if self.M < 1:
            raise ConfigurationError("mode cutoff M must be positive")
        if 2 * self.M >= self.quad_nodes:
            raise ConfigurationError("mode cutoff must be below half the number of quadrature nodes")

    def replace(self, **kw) -> IsoParams:
        d = asdict(self)
        d.update(kw)
        return IsoParams(**d)

    @classmethod
    def from_mapping(cls, cfg) -> IsoParams:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigurationError(f"unknown iso parameters: {sorted(unknown)}")
        try:
            vals = {k: _as_number(v) for k, v in cfg.items()}
            for k in ("quad_nodes", "M"):
                if k in vals:
                    vals[k] = int(vals[k].real) if isinstance(vals[k], complex) else int(vals[k])
            if "R" in vals:
                vals["R"] = float(vals["R"].real if isinstance(vals["R"], complex) else vals["R"])
            return cls(**vals)
        except TypeError as exc:
            raise ConfigurationError(f"malformed iso parameters: {exc}") from exc


def _as_number(v):
    if isinstance(v, (int, float, complex)):
        return v
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    raise ConfigurationError(f"cannot read {v!r} as a number")


DEFAULT_PARAMS = IsoParams(0.1, 0.15, 0.2, 0.45, 0.35, 0.0, 0.2, 0.5, 256, 16)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def hyp2f1(a, b, c, x, *, rtol: float = 1e-14, max_terms: int = 10_000):
    """Gauss series ``sum (a)_n (b)_n / ((c)_n n!) x^n`` for ``|x| < 1``.

    ``x`` may be a numpy array; the sum stops when every term is below
    ``rtol`` relative to its partial sum.
    """
    c = complex(c)
    if abs(c.imag) < 1e-15 and c.real <= 0 and abs(c.real - round(c.real)) < 1e-15:
        raise ConfigurationError(f"2F1 has a pole: c = {c.real:g} is a non-positive integer")
    xs = np.asarray(x, dtype=complex)
    if np.any(np.abs(xs) >= 1):
        raise ConfigurationError("2F1 series needs |x| < 1 (no analytic continuation)")
    total = np.ones_like(xs)
    term = np.ones_like(xs)
    a, b = complex(a), complex(b)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1))) * xs
        total = total + term
        if np.all(np.abs(term) <= rtol * np.maximum(np.abs(total), 1e-300)):
            return total if xs.ndim else complex(total)
    raise ConvergenceError(f"2F1({a}, {b}; {c}; x) did not converge in {max_terms} terms")


def psi_sl2(params: IsoParams, side: Side, z, *, unimodular: bool = True) -> np.ndarray:
    """The 3-point SL(2) solution ``Psi_+`` (inside) or ``Psi_-`` (outside), shape ``(..., 2, 2)``.

    The hypergeometric matrices as written have ``det Psi_+ = (1 - z)^{-2 theta_1}``
    and ``det Psi_- = (1 - t/z)^{-2 theta_t}``.  With ``unimodular`` (the
    default) they are multiplied by ``(1 - z)^{theta_1}`` and
    ``(1 - t/z)^{theta_t}``, which keeps the normalization at 0 and infinity
    and puts the jump in the loop group of SL(2).
    """
    th0, tht, th1, thi = (complex(x) for x in (params.theta0, params.thetat, params.theta1, params.thetainf))
    s = complex(params.sigma)
    for den in (2 * s * (1 + 2 * s), 2 * s * (1 - 2 * s)):
        if abs(den) < 1e-14:
            raise ConfigurationError("resonant sigma: 2 sigma (1 +- 2 sigma) vanishes")
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (2, 2), dtype=complex)
    if side == "plus":
        out[..., 0, 0] = hyp2f1(th1 + thi + s, th1 - thi + s, 2 * s, z)
        out[..., 0, 1] = (
            z * (thi**2 - (th1 + s) ** 2) / (2 * s * (1 + 2 * s))
            * hyp2f1(1 + th1 + thi + s, 1 + th1 - thi + s, 2 + 2 * s, z)
        )
        out[..., 1, 0] = (
            -z * (thi**2 - (th1 - s) ** 2) / (2 * s * (1 - 2 * s))
            * hyp2f1(1 + th1 + thi - s, 1 + th1 - thi - s, 2 - 2 * s, z)
        )
        out[..., 1, 1] = hyp2f1(th1 + thi - s, th1 - thi - s, -2 * s, z)
        if unimodular:
            out *= np.exp(th1 * np.log(1 - z))[..., None, None]
    elif side == "minus":
        t = complex(params.t)
        x = t / z
        t2s = cmath.exp(2 * s * cmath.log(t))  # principal branch
        phase = cmath.exp(1j * complex(params.eta))
        out[..., 0, 0] = hyp2f1(tht + th0 - s, tht - th0 - s, -2 * s, x)
        out[..., 0, 1] = (
            -(1 / t2s) / phase * x * (th0**2 - (tht - s) ** 2) / (2 * s * (1 - 2 * s))
            * hyp2f1(1 + tht + th0 - s, 1 + tht - th0 - s, 2 - 2 * s, x)
        )
        out[..., 1, 0] = (
            t2s * phase * x * (th0**2 - (tht + s) ** 2) / (2 * s * (1 + 2 * s))
            * hyp2f1(1 + tht + th0 + s, 1 + tht - th0 + s, 2 + 2 * s, x)
        )
        out[..., 1, 1] = hyp2f1(tht + th0 + s, tht - th0 + s, 2 * s, x)
        if unimodular:
            out *= np.exp(tht * np.log(1 - x))[..., None, None]
    else:
        raise ConfigurationError(f"side must be 'plus' or 'minus', not {side!r}")
    return out


def sl2_to_so3(phi2: np.ndarray) -> np.ndarray:
    """Adjoint image ``Phi_ab = 1/2 tr(sigma_a Phi2 sigma_b Phi2^{-1})``; works on stacks."""
    phi2 = np.asarray(phi2, dtype=complex)
    det = phi2[..., 0, 0] * phi2[..., 1, 1] - phi2[..., 0, 1] * phi2[..., 1, 0]
    if np.any(np.abs(det) < 1e-300):
        raise ConfigurationError("singular SL(2) matrix")
    inv = np.linalg.inv(phi2)
    # tr(s_a P s_b P^{-1}) = sum (s_a)_{ij} P_{jk} (s_b)_{kl} (P^{-1})_{li}
    return 0.5 * np.einsum("aij,...jk,bkl,...li->...ab", PAULI, phi2, PAULI, inv)


def orthogonality_residual(phi: np.ndarray) -> float:
    """Largest ``|Phi Phi^T - I|`` entry over a stack of 3 x 3 matrices."""
    eye = np.eye(phi.shape[-1])
    return float(np.max(np.abs(np.einsum("...ij,...kj->...ik", phi, phi) - eye)))


def jmu_exponent(params: IsoParams) -> complex:
    """``1/4 tr(S^2 - Theta_0^2 - Theta_t^2)`` in the adjoint representation.

    An SL(2) exponent ``theta`` has adjoint weights ``2 theta, 0, -2 theta``,
    so ``tr Theta^2 = 8 theta^2`` and the exponent is ``2 (sigma^2 - theta_0^2 - theta_t^2)``.
    """
    s, a, b = (complex(x) for x in (params.sigma, params.theta0, params.thetat))
    return 0.25 * 8 * (s * s - a * a - b * b)


# ---------------------------------------------------------------------------
# Sampling and blocks
# ---------------------------------------------------------------------------


def unit_nodes(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


def sampled_loop(params: IsoParams, side: Side, group: str = "so3") -> np.ndarray:
    """``Psi_{side}(R zeta)`` at the ``quad_nodes`` points ``zeta`` of the unit circle."""
    z = params.R * unit_nodes(params.quad_nodes)
    psi = psi_sl2(params, side, z)
    if group == "sl2":
        return psi
    if group == "so3":
        return sl2_to_so3(psi)
    raise ConfigurationError(f"group must be 'sl2' or 'so3', not {group!r}")


def _fourier(vals: np.ndarray) -> np.ndarray:
    """Coefficients ``c_m`` of ``sum_m c_m zeta^m`` (index ``m mod n``)."""
    return np.fft.fft(vals, axis=0) / vals.shape[0]


def _derivative(vals: np.ndarray) -> np.ndarray:
    n = vals.shape[0]
    c = _fourier(vals)
    m = np.fft.fftfreq(n, d=1.0 / n).reshape((n,) + (1,) * (vals.ndim - 1))
    zeta = unit_nodes(n).reshape((n,) + (1,) * (vals.ndim - 1))
    return np.fft.ifft(c * m, axis=0) * n / zeta


def _to_blocks(coef: np.ndarray, kind: str, M: int, lead_index) -> dict:
    blocks = {}
    for i in range(M):
        for j in range(M):
            C = coef[lead_index(i), lead_index(j)]
            mat = tuple(tuple(complex(x) for x in row) for row in C)
            if kind == "a":
                blocks[(HalfInt.from_part(i), HalfInt.from_part(j))] = mat
            else:
                blocks[(HalfInt.from_part(j), HalfInt.from_part(i))] = mat
    return blocks


def dft_blocks(vals: np.ndarray, kind: str, M: int, ring: ComplexField) -> tuple[KernelBlocks, float]:
    """Blocks from the bivariate DFT of the kernel sampled on the unit circle.

    Off the diagonal the kernel is evaluated directly; on it the limit
    ``-Psi' Psi^{-1}`` (``a``) or ``Psi' Psi^{-1}`` (``d``) is used, with a
    spectral derivative.  Returns the blocks and the ratio of the largest
    retained block entry at the last mode to the largest entry overall.
    """
    n = vals.shape[0]
    N = vals.shape[-1]
    zeta = unit_nodes(n)
    inv = np.linalg.inv(vals)
    prod = np.einsum("jab,kbc->jkac", vals, inv)
    diff = zeta[:, None] - zeta[None, :]
    np.fill_diagonal(diff, 1.0)
    eye = np.eye(N)
    if kind == "a":
        K = (eye - prod) / diff[:, :, None, None]
        diag = -np.einsum("jab,jbc->jac", _derivative(vals), inv)
    else:
        K = (prod - eye) / diff[:, :, None, None]
        diag = np.einsum("jab,jbc->jac", _derivative(vals), inv)
    idx = np.arange(n)
    K[idx, idx] = diag
    coef = np.fft.fft2(K, axes=(0, 1)) / (n * n)
    if kind == "a":
        lead = lambda i: i
    else:
        lead = lambda i: (n - i - 1) % n
    blocks = _to_blocks(coef, kind, M, lead)
    top = max(abs(x) for B in blocks.values() for row in B for x in row) or 1.0
    edge = max(
        abs(x)
        for (p, q), B in blocks.items()
        if max(p.part, q.part) == M - 1
        for row in B
        for x in row
    )
    return KernelBlocks(kind, N, ring, blocks, M), edge / top


def series_blocks(vals: np.ndarray, kind: str, M: int, ring: ComplexField) -> KernelBlocks:
    """Blocks from the one-variable Fourier coefficients and the ``c_ij`` formula."""
    n = vals.shape[0]
    N = vals.shape[-1]
    c = _fourier(vals)
    g = _fourier(np.linalg.inv(vals))
    K = 2 * M + 1
    if kind == "a":
        pick = lambda arr, m: arr[m]
    else:
        pick = lambda arr, m: arr[(-m) % n]  # coefficient of zeta^{-m} = u^m
    mk = lambda arr: MatSeries(
        ring, N, {m: tuple(tuple(complex(x) for x in row) for row in pick(arr, m)) for m in range(K + 1)}, 0, K
    )
    raw = division_blocks(mk(c), mk(g), 2 * M)
    blocks = {}
    for (i, j), C in raw.items():
        if i < M and j < M:
            key = (HalfInt.from_part(i), HalfInt.from_part(j)) if kind == "a" else (HalfInt.from_part(j), HalfInt.from_part(i))
            blocks[key] = C
    return KernelBlocks(kind, N, ring, blocks, M)


def numeric_blocks(
    params: IsoParams,
    kind: str,
    group: str = "so3",
    method: str = "dft",
) -> KernelBlocks:
    """``a`` (from ``Psi_+``) or ``d`` (from ``Psi_-``) blocks with ``p, q <= M - 1/2``."""
    side = "plus" if kind == "a" else "minus"
    vals = sampled_loop(params, side, group)
    ring = ComplexField(tolerance=1e-9 if method == "series" else 1e-15)
    if method == "dft":
        return dft_blocks(vals, kind, params.M, ring)[0]
    if method == "series":
        return series_blocks(vals, kind, params.M, ring)
    raise ConfigurationError(f"method must be 'dft' or 'series', not {method!r}")


def max_block_difference(x: KernelBlocks, y: KernelBlocks) -> float:
    keys = set(x.blocks) | set(y.blocks)
    out = 0.0
    for k in keys:
        A = x.blocks.get(k)
        B = y.blocks.get(k)
        A = np.zeros((x.N, x.N)) if A is None else np.array(A)
        B = np.zeros((x.N, x.N)) if B is None else np.array(B)
        out = max(out, float(np.max(np.abs(A - B))))
    return out


# ---------------------------------------------------------------------------
# Square relation
# ---------------------------------------------------------------------------


def iso_taus(params: IsoParams, max_weight=None) -> dict:
    """``tau_W[J^(2)]`` and ``tau_O[J^(3)]`` with both expansions cut at block weight ``max_weight``."""
    W = params.M if max_weight is None else max_weight
    ring = ComplexField(tolerance=1e-15)
    plus2, minus2 = sampled_loop(params, "plus", "sl2"), sampled_loop(params, "minus", "sl2")
    plus3, minus3 = sl2_to_so3(plus2), sl2_to_so3(minus2)
    a2, ra2 = dft_blocks(plus2, "a", params.M, ring)
    d2, rd2 = dft_blocks(minus2, "d", params.M, ring)
    a3, ra3 = dft_blocks(plus3, "a", params.M, ring)
    d3, rd3 = dft_blocks(minus3, "d", params.M, ring)
    S = tuple(tuple(1.0 if i == j else 0.0 for j in range(3)) for i in range(3))
    tw = widom_tau(a2, d2, W)
    to = pfaffian_tau(a3, d3, S, W, grading="block", keep_terms=False, check=False)
    return {
        "tau_w_sl2": tw.value,
        "tau_o_so3": to.value,
        "orthogonality_residual": max(orthogonality_residual(plus3), orthogonality_residual(minus3)),
        "antisymmetry_residual": max(max_antisymmetry_residual(a3, S), max_antisymmetry_residual(d3, S)),
        "edge_ratio": max(ra2, rd2, ra3, rd3),
    }


def iso_square_check(params: IsoParams = DEFAULT_PARAMS, refinements=None) -> dict:
    """Residual ``|tau_O - tau_W^2| / |tau_W^2|`` and its behaviour under mode refinement.

    ``refinements`` lists the mode cutoffs of the convergence table (weight
    cutoff equal to the mode cutoff); the headline numbers use ``params.M``.
    """
    start = time.perf_counter()
    Ms = sorted(set(refinements or [params.M]) | {params.M})
    table = []
    head = None
    for M in Ms:
        p = params.replace(M=M)
        r = iso_taus(p)
        tw2 = r["tau_w_sl2"] ** 2
        resid = abs(r["tau_o_so3"] - tw2) / abs(tw2)
        row = {"M": M, "tau_w_sl2": r["tau_w_sl2"], "tau_o_so3": r["tau_o_so3"], "residual": resid}
        table.append(row)
        if M == params.M:
            head = dict(r, residual=resid)
    warnings = []
    if head["edge_ratio"] > 1e-8:
        warnings.append(f"quadrature or mode cutoff under-resolved: edge/max block ratio {head['edge_ratio']:.3g}")
    residuals = [row["residual"] for row in table]
    return {
        "params": {k: _jsonable(v) for k, v in asdict(params).items()},
        "tau_w_sl2": head["tau_w_sl2"],
        "tau_o_so3": head["tau_o_so3"],
        "residual": head["residual"],
        "exponent": jmu_exponent(params),
        "orthogonality_residual": head["orthogonality_residual"],
        "antisymmetry_residual": head["antisymmetry_residual"],
        "edge_ratio": head["edge_ratio"],
        "convergence_table": table,
        "monotone": all(x > y for x, y in zip(residuals, residuals[1:])),
        "warnings": warnings,
        "seconds": time.perf_counter() - start,
    }


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v
