"""Shared test utilities: reference data and an expression evaluator over PolyRing."""

from __future__ import annotations

import ast
import json
import operator
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from pfaffian_tau.algebra import Poly, PolyRing

GOLDEN = Path(__file__).parent / "golden"

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}


@lru_cache(maxsize=None)
def reference() -> dict:
    return json.loads((GOLDEN / "reference_tables.json").read_text(encoding="utf-8"))


def poly(expr: str, ring: PolyRing) -> Poly:
    """Evaluate a transcribed arithmetic expression (+ - * / ** and parentheses) in ``ring``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return ring.scalar(node.value)
        if isinstance(node, ast.Name):
            return ring.gen(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            assert isinstance(node.right, ast.Constant)
            return ev(node.left) ** node.right.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Div):
                assert right.is_constant()
                return left * (1 / Fraction(right.constant_term()))
            return _BINOPS[type(node.op)](left, right)
        raise ValueError(f"unsupported syntax in {expr!r}")

    return ev(ast.parse(expr, mode="eval"))


def random_loop_problem(spec, rng, times=(1, 3, 5)):
    """A DS problem with random strictly lower ``X = (L - S L^T S)/z``.

    ``L`` has entries ``randint(-5, 5) / randint(1, 4)``, so ``X`` has
    magnitude at most 10, is nilpotent, and lies in the orthogonal loop algebra.
    """
    from pfaffian_tau.algebra import MatSeries
    from pfaffian_tau.drinfeld_sokolov import DSProblem, time_ring
    from pfaffian_tau.lie import build_algebra

    N, S = spec.N, build_algebra(spec).S
    L = [[Fraction(rng.randint(-5, 5), rng.randint(1, 4)) if i > j else Fraction(0) for j in range(N)] for i in range(N)]
    X = [[L[i][j] - S[i][N - 1 - i] * L[N - 1 - j][N - 1 - i] * S[N - 1 - j][j] for j in range(N)] for i in range(N)]
    ring = time_ring([], list(times))
    coeffs = {-1: tuple(tuple(ring.scalar(x) for x in row) for row in X)}
    return DSProblem(spec, ring, MatSeries(ring, N, coeffs, -1, None), name=f"random {spec}")


# acceptance criterion number -> (passed, detail); printed by conftest.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}
