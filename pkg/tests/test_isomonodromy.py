import cmath
from types import SimpleNamespace

import numpy as np
import pytest

from pfaffian_tau.algebra import ComplexField, ConfigurationError
from pfaffian_tau.isomonodromy import (
    DEFAULT_PARAMS,
    PAULI,
    IsoParams,
    dft_blocks,
    hyp2f1,
    iso_taus,
    jmu_exponent,
    max_block_difference,
    numeric_blocks,
    orthogonality_residual,
    psi_sl2,
    sampled_loop,
    series_blocks,
    sl2_to_so3,
)
from pfaffian_tau.kernels import max_antisymmetry_residual

SMALL = DEFAULT_PARAMS.replace(M=6, quad_nodes=64)
I3 = tuple(tuple(1.0 if i == j else 0.0 for j in range(3)) for i in range(3))


def expm(A, terms=60):
    out = term = np.eye(A.shape[0], dtype=complex)
    for n in range(1, terms):
        term = term @ A / n
        out = out + term
    return out


def random_sl2(rng):
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return A / np.sqrt(np.linalg.det(A))


class TestHypergeometric:
    def test_at_zero(self):
        assert hyp2f1(0.3, -0.2, 1.7, 0) == 1

    def test_logarithm_closed_form(self):
        x = 0.3 + 0.1j
        assert abs(hyp2f1(1, 1, 2, x) - (-cmath.log(1 - x) / x)) <= 1e-14

    @pytest.mark.parametrize("x", [0.2 + 0.1j, -0.4 + 0.3j, 0.5j, 0.45])
    def test_ode_residual(self, x):
        a, b, c = 0.45 + 0.1j, -0.3, 0.7
        h = 0.01
        # 7-point central stencils, truncation error O(h^6); the series is summed
        # to full precision so rounding is not amplified by 1/h^2
        f = [hyp2f1(a, b, c, x + k * h, rtol=1e-17) for k in range(-3, 4)]
        d1 = (-f[0] + 9 * f[1] - 45 * f[2] + 45 * f[4] - 9 * f[5] + f[6]) / (60 * h)
        d2 = (2 * f[0] - 27 * f[1] + 270 * f[2] - 490 * f[3] + 270 * f[4] - 27 * f[5] + 2 * f[6]) / (180 * h * h)
        res = x * (1 - x) * d2 + (c - (a + b + 1) * x) * d1 - a * b * f[3]
        assert abs(res) <= 1e-10

    def test_array_argument(self):
        xs = np.array([0.1, 0.2j])
        assert np.allclose(hyp2f1(1, 1, 2, xs), [-cmath.log(1 - x) / x for x in xs], atol=1e-14)

    @pytest.mark.parametrize("c", [0, -1, -3])
    def test_pole(self, c):
        with pytest.raises(ConfigurationError):
            hyp2f1(0.5, 0.5, c, 0.1)

    def test_outside_disc(self):
        with pytest.raises(ConfigurationError):
            hyp2f1(0.5, 0.5, 1.5, 1.0)


class TestSL2Solution:
    def test_plus_at_origin(self):
        assert np.allclose(psi_sl2(DEFAULT_PARAMS, "plus", 0.0), np.eye(2), atol=0)

    def test_minus_at_infinity(self):
        assert np.allclose(psi_sl2(DEFAULT_PARAMS, "minus", 1e15), np.eye(2), atol=1e-14)

    @pytest.mark.parametrize("side", ["plus", "minus"])
    def test_unit_determinant_on_circle(self, side):
        z = DEFAULT_PARAMS.R * np.exp(2j * np.pi * (np.arange(16) + 0.3) / 16)
        dets = np.linalg.det(psi_sl2(DEFAULT_PARAMS, side, z))
        assert np.max(np.abs(dets - 1)) <= 1e-10

    def test_raw_determinant_is_a_power(self):
        # without the unimodular factor det Psi_+ = (1 - z)^{-2 theta_1}
        z = 0.4 * np.exp(1j * np.linspace(0, 6, 7))
        dets = np.linalg.det(psi_sl2(DEFAULT_PARAMS, "plus", z, unimodular=False))
        expected = np.exp(-2 * DEFAULT_PARAMS.theta1 * np.log(1 - z))
        assert np.max(np.abs(dets - expected)) <= 1e-10

    def test_bad_side(self):
        with pytest.raises(ConfigurationError):
            psi_sl2(DEFAULT_PARAMS, "left", 0.1)


class TestAdjointMap:
    def test_identity(self):
        assert np.allclose(sl2_to_so3(np.eye(2)), np.eye(3), atol=0)

    def test_diagonal_exponential(self):
        phi = 0.2
        image = sl2_to_so3(expm(phi * PAULI[2]))
        # induced generator: G_ab = 1/2 tr(s_a [s_3, s_b])
        G = np.array([[0.5 * np.trace(PAULI[a] @ (PAULI[2] @ PAULI[b] - PAULI[b] @ PAULI[2])) for b in range(3)] for a in range(3)])
        assert np.max(np.abs(image - expm(phi * G))) <= 1e-12
        assert abs(image[2, 2] - 1) <= 1e-14
        assert orthogonality_residual(image) <= 1e-12

    def test_multiplicative_and_inverse(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            A, B = random_sl2(rng), random_sl2(rng)
            assert np.max(np.abs(sl2_to_so3(A @ B) - sl2_to_so3(A) @ sl2_to_so3(B))) <= 1e-11
            assert np.max(np.abs(sl2_to_so3(A) @ sl2_to_so3(np.linalg.inv(A)) - np.eye(3))) <= 1e-11
            assert orthogonality_residual(sl2_to_so3(A)) <= 1e-11

    def test_singular(self):
        with pytest.raises(ConfigurationError):
            sl2_to_so3(np.zeros((2, 2)))

    def test_loop_is_orthogonal_at_every_node(self):
        for side in ("plus", "minus"):
            assert orthogonality_residual(sampled_loop(DEFAULT_PARAMS, side)) <= 1e-10


class TestBlocks:
    def test_identity_loop(self):
        vals = np.broadcast_to(np.eye(3, dtype=complex), (64, 3, 3)).copy()
        kb, _ = dft_blocks(vals, "a", 8, ComplexField())
        assert max(abs(x) for B in kb.blocks.values() for row in B for x in row) <= 1e-14

    @pytest.mark.parametrize("kind", ["a", "d"])
    def test_so3_blocks_are_antisymmetric(self, kind):
        kb = numeric_blocks(DEFAULT_PARAMS, kind)
        assert max_antisymmetry_residual(kb, I3) <= 1e-10

    @pytest.mark.parametrize("kind", ["a", "d"])
    def test_doubling_nodes(self, kind):
        p = DEFAULT_PARAMS.replace(M=10, quad_nodes=128)
        coarse = numeric_blocks(p, kind)
        fine = numeric_blocks(p.replace(quad_nodes=256), kind)
        assert max_block_difference(coarse, fine) <= 1e-12

    @pytest.mark.parametrize("kind", ["a", "d"])
    def test_dft_agrees_with_series_route(self, kind):
        p = DEFAULT_PARAMS.replace(M=8)
        assert max_block_difference(numeric_blocks(p, kind), numeric_blocks(p, kind, method="series")) <= 1e-10

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            numeric_blocks(SMALL, "a", method="quad")


class TestTaus:
    def test_small_t_limit(self):
        ts = (1e-2, 1e-4, 1e-6, 1e-8)
        gaps = [abs(iso_taus(SMALL.replace(t=t))["tau_w_sl2"] - 1) for t in ts]
        assert all(x > y for x, y in zip(gaps, gaps[1:]))
        # the d kernel is led by the t^{-2 sigma} (t / z) entry of Psi_-
        slope = np.log(gaps[-1] / gaps[-2]) / np.log(ts[-1] / ts[-2])
        assert slope == pytest.approx(1 - 2 * SMALL.sigma, abs=0.01)

    def test_log_tau_smooth_along_stencil(self):
        h = 0.01
        logs = [cmath.log(iso_taus(SMALL.replace(t=DEFAULT_PARAMS.t + k * h))["tau_w_sl2"]) for k in range(-2, 3)]
        assert all(cmath.isfinite(x) for x in logs)
        derivative = (logs[0] - 8 * logs[1] + 8 * logs[3] - logs[4]) / (12 * h)
        second = (logs[1] - 2 * logs[2] + logs[3]) / h**2
        assert cmath.isfinite(derivative) and cmath.isfinite(second)
        # a smooth function: the fourth difference is far below the values themselves
        fourth = logs[0] - 4 * logs[1] + 6 * logs[2] - 4 * logs[3] + logs[4]
        assert abs(fourth) <= 1e-3 * max(abs(x) for x in logs)

    def test_square_relation_small_cutoff(self):
        r = iso_taus(DEFAULT_PARAMS.replace(M=8))
        assert abs(r["tau_o_so3"] - r["tau_w_sl2"] ** 2) / abs(r["tau_w_sl2"] ** 2) <= 1e-6


class TestExponent:
    def test_zero(self):
        # sigma = 0 is resonant for the loop itself, but the exponent is still defined
        assert jmu_exponent(SimpleNamespace(theta0=0, thetat=0, sigma=0)) == 0

    def test_sigma_only(self):
        p = IsoParams(0, 0, 0.2, 0.45, 0.35)
        assert jmu_exponent(p) == pytest.approx(2 * 0.35**2)

    def test_adjoint_weight_oracle(self):
        s, a, b = 0.35, 0.1, 0.15

        def trace_sq(theta):
            X = np.diag([theta, -theta])
            G = np.array([[0.5 * np.trace(PAULI[i] @ (X @ PAULI[j] - PAULI[j] @ X)) for j in range(3)] for i in range(3)])
            return np.trace(G @ G).real

        expected = 0.25 * (trace_sq(s) - trace_sq(a) - trace_sq(b))
        assert jmu_exponent(IsoParams(a, b, 0.2, 0.45, s)) == pytest.approx(expected)
        assert expected == pytest.approx(2 * (s**2 - a**2 - b**2))


@pytest.mark.parametrize(
    "kw",
    [{"sigma": 0.5}, {"sigma": 1.0}, {"t": 0.6}, {"R": 1.2}, {"quad_nodes": 31}, {"M": 200}, {"M": 0}],
)
def test_invalid_parameters(kw):
    with pytest.raises(ConfigurationError):
        DEFAULT_PARAMS.replace(**kw)


def test_params_from_mapping():
    p = IsoParams.from_mapping({"theta0": 0.1, "thetat": "0.15", "theta1": [0.2, 0], "thetainf": 0.45, "sigma": 0.35})
    assert p.theta1 == 0.2 and p.M == 16
    with pytest.raises(ConfigurationError):
        IsoParams.from_mapping({"sigma": 0.35, "bogus": 1})
