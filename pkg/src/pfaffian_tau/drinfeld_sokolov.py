"""Polynomial Drinfeld-Sokolov tau-functions for orthogonal loop algebras.

``Psi_+ = exp(sum_k t_k Lambda^k)`` over odd times, expanded as
``sum_n q_n(t) Lambda^n`` with the Q-Schur generators ``q_n``.  The initial
condition is ``Psi_- = exp(X)`` for a nilpotent ``X(z)`` in negative powers of
z, so ``Psi_-`` and its inverse ``exp(-X)`` are exact and the ``d`` kernel has
finitely many blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from pfaffian_tau.algebra import (
    ConfigurationError,
    MatSeries,
    Matrix,
    PolyRing,
    SeriesError,
    lift,
    mat_add,
    mat_equal,
    mat_mul,
    mat_neg,
    mat_scale,
    series_exp,
    series_mul,
    transpose,
    zeros,
)
from pfaffian_tau.engines import TauResult, exactness_bound, minor_tables, pfaffian_tau
from pfaffian_tau.kernels import KernelBlocks, build_a, build_d
from pfaffian_tau.lie import AlgebraSpec, ChevalleyData, build_algebra, shift_matrix
from pfaffian_tau.qschur import q_r


def lambda_powers(data: ChevalleyData, n_max: int, kmax: int, ring) -> list[MatSeries]:
    """``[Lambda^0, ..., Lambda^n_max]`` truncated at ``z^kmax``."""
    lam = shift_matrix(data, ring).truncate(kmax)
    out = [MatSeries.identity(data.N, ring, kmax=kmax)]
    for _ in range(n_max):
        out.append(series_mul(out[-1], lam))
    return out


def time_ring(parameters: Sequence[str], times: Sequence[int]) -> PolyRing:
    for k in times:
        if k < 1 or k % 2 == 0:
            raise ConfigurationError(f"time t{k} is not an odd positive flow")
    names = list(parameters) + [f"t{k}" for k in times]
    if len(set(names)) != len(names):
        raise ConfigurationError("parameter names clash with time variables")
    return PolyRing(names)


def psi_plus(data: ChevalleyData, ring: PolyRing, kmax: int, sign: int = 1) -> MatSeries:
    """``exp(sign * sum_k t_k Lambda^k)`` up to ``z^kmax``.

    ``Lambda^n`` carries ``z^{floor((n-1)/h)}`` and higher, so powers
    ``n <= (kmax + 1) h`` suffice.  ``sign = -1`` gives the inverse, since
    ``q_n(-t) = (-1)^n q_n(t)`` for odd flows.
    """
    h = data.spec.coxeter
    n_max = (kmax + 1) * h
    pows = lambda_powers(data, n_max, kmax, ring)
    coeffs: dict[int, Matrix] = {}
    for n, P in enumerate(pows):
        q = q_r(n, ring)
        if ring.is_zero(q):
            continue
        if sign < 0 and n % 2:
            q = -q
        for k, C in P.coeffs.items():
            T = mat_scale(q, C)
            coeffs[k] = mat_add(coeffs[k], T) if k in coeffs else T
    return MatSeries(ring, data.N, coeffs, 0, kmax)


def flow_exponent(data: ChevalleyData, ring: PolyRing, kmax: int) -> MatSeries:
    """``Y = sum_k t_k Lambda^k`` over the odd times present in ``ring``."""
    times = sorted(int(v[1:]) for v in ring.variables if v.startswith("t") and v[1:].isdigit())
    pows = lambda_powers(data, max(times, default=0), kmax, ring)
    out = MatSeries(ring, data.N, {}, 0, kmax)
    for k in times:
        out = out + pows[k].scale(ring.gen(f"t{k}"))
    return out


def check_loop_element(X: MatSeries, S: Matrix) -> list[int]:
    """Powers of z at which ``X_k^t != -S X_k S``."""
    ring = X.ring
    Sr = lift(S, ring)
    return [
        k
        for k, C in sorted(X.coeffs.items())
        if not mat_equal(transpose(C), mat_neg(mat_mul(mat_mul(Sr, C, ring), Sr, ring)), ring)
    ]


def initial_condition(X: MatSeries, *, max_power: int = 64) -> tuple[MatSeries, MatSeries]:
    """``(exp(X), exp(-X))`` for nilpotent ``X`` in negative powers of z."""
    if any(k >= 0 for k in X.coeffs):
        raise ConfigurationError("initial data must only contain negative powers of z")
    if X.kmax is not None:
        raise ConfigurationError("initial data must be exact")
    try:
        return series_exp(X, max_power=max_power), series_exp(-X, max_power=max_power)
    except SeriesError as exc:
        raise ConfigurationError("initial data is not nilpotent: exp(X) does not terminate") from exc


@dataclass
class DSProblem:
    """A polynomial DS problem: algebra, scalar ring, and initial data ``X``."""

    spec: AlgebraSpec
    ring: PolyRing
    X: MatSeries
    name: str = ""
    flow_sign: int = 1
    data: ChevalleyData = field(init=False, repr=False)

    def __post_init__(self):
        self.data = build_algebra(self.spec)
        if self.flow_sign not in (1, -1):
            raise ConfigurationError("flow_sign must be +1 or -1")
        if self.X.n != self.spec.N:
            raise ConfigurationError(f"initial data has size {self.X.n}, algebra needs {self.spec.N}")

    @property
    def S(self) -> Matrix:
        return self.data.S

    def validate(self):
        bad = check_loop_element(self.X, self.S)
        if bad:
            raise ConfigurationError(f"initial data is not in the orthogonal loop algebra (powers {bad})")

    def d_kernel(self) -> KernelBlocks:
        psi_m, psi_m_inv = initial_condition(self.X)
        return build_d(psi_m, psi_minus_inverse=psi_m_inv)

    def a_kernel(self, max_weight: int) -> KernelBlocks:
        kmax = max(max_weight, 1)
        s = self.flow_sign
        return build_a(psi_plus(self.data, self.ring, kmax, s), kmax, psi_plus(self.data, self.ring, kmax, -s))

    def kernels(self, max_weight: int | None = None) -> tuple[KernelBlocks, KernelBlocks, int]:
        """``(a, d, cutoff)``; the cutoff defaults to the largest weight with nonzero minors."""
        d = self.d_kernel()
        if max_weight is None:
            max_weight = int(exactness_bound(d, self.S))
        # Pf(S a) only needs blocks with p + q <= |lambda| - 1
        a = self.a_kernel(max(int(max_weight) - 1, 1))
        return a, d, int(max_weight)

    def tau(self, max_weight: int | None = None, *, validate: bool = True) -> TauResult:
        if validate:
            self.validate()
        a, d, w = self.kernels(max_weight)
        return pfaffian_tau(a, d, self.S, w)

    def tables(self, max_weight: int | None = None) -> list[dict]:
        self.validate()
        a, d, w = self.kernels(max_weight)
        return minor_tables(a, d, self.S, w)


# ---------------------------------------------------------------------------
# configs
# ---------------------------------------------------------------------------


def problem_from_config(cfg: Mapping) -> DSProblem:
    """Build a problem from a JSON-style mapping.

    Keys: ``algebra`` (``{"series": "B", "rank": 1}``), ``parameters`` (names),
    ``times`` (odd integers, default ``[1, 3, 5]``), ``X``, a mapping from
    a negative z-power to a matrix of polynomial strings, and optionally
    ``flow_sign`` (``-1`` for ``Psi_+ = exp(-sum_k t_k Lambda^k)``).
    """
    try:
        alg = cfg["algebra"]
        spec = AlgebraSpec(str(alg["series"]), int(alg["rank"]))
        ring = time_ring(list(cfg.get("parameters", [])), list(cfg.get("times", [1, 3, 5])))
        raw = cfg["X"]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed config: missing {exc}") from exc
    coeffs = {}
    for key, rows in raw.items():
        k = int(key)
        if len(rows) != spec.N or any(len(r) != spec.N for r in rows):
            raise ConfigurationError(f"X coefficient at z^{k} is not {spec.N} x {spec.N}")
        coeffs[k] = tuple(tuple(ring.parse(str(x)) for x in r) for r in rows)
    X = MatSeries(ring, spec.N, coeffs, min([0, *coeffs]), None)
    sign = cfg.get("flow_sign", 1)
    if sign not in (1, -1):
        raise ConfigurationError("flow_sign must be 1 or -1")
    return DSProblem(spec, ring, X, str(cfg.get("name", "")), int(sign))


def load_config(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigurationError(f"no such config file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config is not valid JSON: {exc}") from exc


def _lower_shift_rows(N: int, entries: Mapping[tuple[int, int], str]) -> list[list[str]]:
    rows = [["0"] * N for _ in range(N)]
    for (i, j), v in entries.items():
        rows[i - 1][j - 1] = v
    return rows


def example_configs() -> dict[str, dict]:
    """The worked polynomial examples: two B1 problems, one B2 and one D4."""
    return {
        "J1": {
            "name": "J1",
            "algebra": {"series": "B", "rank": 1},
            "parameters": ["a"],
            "X": {"-1": _lower_shift_rows(3, {(2, 1): "a", (3, 2): "a"})},
        },
        "J2": {
            "name": "J2",
            "algebra": {"series": "B", "rank": 1},
            "parameters": ["b"],
            "X": {"-1": _lower_shift_rows(3, {(1, 2): "b", (2, 3): "b"})},
        },
        "J3": {
            "name": "J3",
            "algebra": {"series": "B", "rank": 2},
            "parameters": ["a2", "a3", "a4", "a5"],
            # the worked B2 flow is displayed as -(t1 L + t3 L^3 + t5 L^5)
            "flow_sign": -1,
            "X": {
                "-1": _lower_shift_rows(
                    5,
                    {
                        (2, 1): "a2",
                        (3, 1): "a3",
                        (3, 2): "a5",
                        (4, 1): "a4",
                        (4, 3): "a5",
                        (5, 2): "a4",
                        (5, 3): "-a3",
                        (5, 4): "a2",
                    },
                )
            },
        },
        "J4": {
            "name": "J4",
            "algebra": {"series": "D", "rank": 4},
            "parameters": ["a"],
            "X": {"-1": _lower_shift_rows(8, {(7, 1): "a", (8, 2): "a"})},
        },
    }


def example_problem(name: str) -> DSProblem:
    cfgs = example_configs()
    if name not in cfgs:
        raise ConfigurationError(f"unknown example {name!r}; choose from {sorted(cfgs)}")
    return problem_from_config(cfgs[name])
