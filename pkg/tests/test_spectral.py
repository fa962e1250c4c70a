"""Gap conditions, chain regularity, spectral radii, certification."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import linear_sum_assignment

from nwbackfit.kernels import ConstantBandwidth, Kernel, PerPointBandwidth
from nwbackfit.simulate import IndependentUniform, SimSpec, generate
from nwbackfit.smoothers import Dataset, build_pair, build_smoother, center
from nwbackfit.spectral import (
    PowerIterationNonConvergence,
    Verdict,
    certify,
    check_gap_conditions,
    check_regularity,
    power_iteration_radius,
    spectral_radius,
)

from conftest import ALL_KERNELS, gap_passing_constant


def random_stochastic(rng, n, style):
    """Row-stochastic matrices with varied positivity patterns."""
    if style == 0:
        m = rng.random((n, n)) + 1e-3
    elif style == 1:
        m = rng.random((n, n)) * (rng.random((n, n)) < 0.3)
        m[np.arange(n), rng.integers(0, n, n)] += 0.5  # keep every row nonzero
    elif style == 2:
        m = np.zeros((n, n))
        m[np.arange(n), (np.arange(n) + 1) % n] = 1.0  # pure cycle
    elif style == 3:
        m = np.zeros((n, n))
        m[np.arange(n), (np.arange(n) + 1) % n] = 0.7
        m[np.arange(n), rng.integers(0, n, n)] += 0.3  # cycle plus chords
    else:
        k = max(1, n // 2)
        m = np.zeros((n, n))
        m[:k, :k] = rng.random((k, k)) + 0.01
        m[k:, k:] = rng.random((n - k, n - k)) + 0.01  # two blocks
    return m / m.sum(axis=1, keepdims=True)


def brute_force_regular(s):
    """Reference oracle: some boolean power of the pattern is all-positive."""
    b = s > 0.0
    p = np.eye(len(s), dtype=bool)
    for _ in range(len(s) ** 2):
        p = p @ b
        if p.all():
            return True
    return False


class TestGapConditions:
    def test_gaussian_always_holds(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            x = rng.normal(size=int(rng.integers(2, 40)))
            h = float(rng.uniform(0.01, 2.0))
            rep = check_gap_conditions(x, Kernel.GAUSSIAN, ConstantBandwidth(h))
            assert rep.condition_holds and rep.failing_indices == []

    def test_uniform_with_oversized_gap(self):
        rep = check_gap_conditions(
            np.array([0.0, 0.3, 2.0]), Kernel.UNIFORM, ConstantBandwidth(1.0)
        )
        assert not rep.condition_holds
        assert rep.failing_indices == [1, 2]  # both endpoints of the 0.3 to 2.0 gap
        assert_allclose(rep.gaps, [0.3, 1.7])
        assert rep.max_gap == pytest.approx(1.7)

    def test_uniform_constant_bandwidth_reduces_to_max_gap(self):
        # with a constant-h uniform kernel the check is exactly h > max gap
        rng = np.random.default_rng(52)
        for _ in range(30):
            x = rng.uniform(0.0, 1.0, 25)
            g = float(np.diff(np.sort(x)).max())
            above = check_gap_conditions(x, Kernel.UNIFORM, ConstantBandwidth(g * 1.01))
            below = check_gap_conditions(x, Kernel.UNIFORM, ConstantBandwidth(g * 0.99))
            assert above.condition_holds
            assert not below.condition_holds

    def test_per_point_bandwidths_one_sided_failure(self):
        # only the last point's bandwidth is too small for its left gap
        rep = check_gap_conditions(
            np.array([0.0, 1.0, 2.0]),
            Kernel.UNIFORM,
            PerPointBandwidth(np.array([3.0, 3.0, 0.5])),
        )
        assert rep.failing_indices == [2]

    def test_unsorted_input_handled(self):
        a = check_gap_conditions(np.array([2.0, 0.0, 0.3]), Kernel.UNIFORM, ConstantBandwidth(1.0))
        b = check_gap_conditions(np.array([0.0, 0.3, 2.0]), Kernel.UNIFORM, ConstantBandwidth(1.0))
        assert a.failing_indices == b.failing_indices
        assert_allclose(a.gaps, b.gaps)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            check_gap_conditions(np.array([1.0]), Kernel.GAUSSIAN, ConstantBandwidth(1.0))

    def test_report_serializes(self):
        rep = check_gap_conditions(np.array([0.0, 1.0]), Kernel.GAUSSIAN, ConstantBandwidth(1.0))
        json.dumps(rep.to_dict())


class TestRegularity:
    def test_complete_graph(self):
        n = 5
        assert check_regularity(np.full((n, n), 1.0 / n))

    def test_block_diagonal(self):
        m = np.zeros((4, 4))
        m[:2, :2] = 0.5
        m[2:, 2:] = 0.5
        assert not check_regularity(m)

    def test_pure_cycle_is_periodic(self):
        m = np.zeros((4, 4))
        m[np.arange(4), (np.arange(4) + 1) % 4] = 1.0
        assert not check_regularity(m)  # irreducible but period 4

    def test_cycle_with_self_loop_is_regular(self):
        m = np.zeros((4, 4))
        m[np.arange(4), (np.arange(4) + 1) % 4] = 1.0
        m[0, 0] = 0.5
        m[0, 1] = 0.5
        assert check_regularity(m)

    def test_two_cycle_lengths_coprime(self):
        # cycle of length 3 plus a chord creating a 2-cycle: gcd(3, 2) = 1
        m = np.zeros((3, 3))
        m[0, 1] = 1.0
        m[1, 2] = 0.5
        m[1, 0] = 0.5
        m[2, 0] = 1.0
        assert check_regularity(m)

    def test_smoother_with_oversized_gap(self):
        s = build_smoother(np.array([0.0, 0.3, 2.0]), Kernel.UNIFORM, ConstantBandwidth(1.0))
        assert not check_regularity(s)
        assert not brute_force_regular(s)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(53)
        for trial in range(150):
            n = int(rng.integers(2, 13))
            m = random_stochastic(rng, n, trial % 5)
            assert check_regularity(m) == brute_force_regular(m)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            check_regularity(np.array([[0.5, 0.4], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            check_regularity(np.array([[1.5, -0.5], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            check_regularity(np.zeros((2, 3)))


class TestSpectralRadius:
    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((4, 4))) == 0.0
        assert spectral_radius(np.zeros((4, 4)), method="power") == 0.0

    def test_stochastic_has_radius_one(self):
        rng = np.random.default_rng(54)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            m = random_stochastic(rng, n, 0)
            assert abs(spectral_radius(m) - 1.0) <= 1e-10

    def test_hand_two_by_two(self):
        m = np.array([[0.2, -0.2], [-0.2, 0.2]])
        assert spectral_radius(m) == pytest.approx(0.4, abs=1e-12)
        assert spectral_radius(m, method="power") == pytest.approx(0.4, abs=1e-8)

    def test_power_handles_complex_pair(self):
        rot = 0.9 * np.array([[0.0, -1.0], [1.0, 0.0]])
        assert spectral_radius(rot, method="power") == pytest.approx(0.9, abs=1e-8)

    def test_power_agrees_with_dense(self):
        rng = np.random.default_rng(55)
        for _ in range(25):
            n = int(rng.integers(2, 25))
            m = rng.normal(size=(n, n))
            m *= float(rng.uniform(0.1, 1.5)) / max(np.abs(np.linalg.eigvals(m)).max(), 1e-12)
            assert spectral_radius(m, method="power") == pytest.approx(
                spectral_radius(m, method="dense"), abs=1e-7
            )

    def test_power_reports_non_convergence(self):
        # three eigenvalues of equal modulus defeat the two-term recurrence
        m = np.zeros((3, 3))
        m[0, 1] = m[1, 2] = m[2, 0] = 1.0
        with pytest.raises(PowerIterationNonConvergence) as exc:
            spectral_radius(m, method="power", max_iter=200)
        assert not exc.value.result.converged
        assert exc.value.result.iterations == 200

    def test_power_iteration_result_fields(self):
        res = power_iteration_radius(np.zeros((2, 2)))
        assert res.converged and res.radius == 0.0 and res.iterations == 0

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            spectral_radius(np.eye(2), method="qr")

    def test_non_square(self):
        with pytest.raises(ValueError):
            spectral_radius(np.zeros((2, 3)))


class TestEigenstructure:
    def test_perron_pair_sweep(self):
        # stochastic smoothers: radius 1, constant vector fixed
        rng = np.random.default_rng(56)
        for trial in range(40):
            n = int(rng.integers(5, 45))
            x = rng.normal(size=n)
            kernel = ALL_KERNELS[trial % 4]
            s = build_smoother(x, kernel, gap_passing_constant(x, rng))
            theta = np.full(n, 1.0 / np.sqrt(n))
            assert np.linalg.norm(s @ theta - theta) <= 1e-10
            assert abs(spectral_radius(s) - 1.0) <= 1e-10

    def test_centered_spectrum_swaps_unit_eigenvalue_for_zero(self):
        # eigenvalues of center(s) are {0} plus the non-unit eigenvalues
        # of s, checked by optimal matching on distinct-spectrum cases
        # small matrices: large n drives the trailing eigenvalues of a
        # Gaussian smoother together and the distinctness filter skips all
        rng = np.random.default_rng(57)
        checked = 0
        for trial in range(80):
            n = int(rng.integers(5, 10))
            x = rng.normal(size=n)
            s = build_smoother(x, Kernel.GAUSSIAN, ConstantBandwidth(float(rng.uniform(0.4, 2.0))))
            eigs = np.linalg.eigvals(s)
            dists = np.abs(eigs[:, None] - eigs[None, :])[np.triu_indices(n, 1)]
            if dists.min() <= 1e-6:
                continue
            near_one = np.abs(eigs - 1.0) <= 1e-8
            assert near_one.sum() == 1
            target = np.concatenate([[0.0], eigs[~near_one]])
            got = np.linalg.eigvals(center(s))
            cost = np.abs(got[:, None] - target[None, :])
            r, c = linear_sum_assignment(cost)
            assert cost[r, c].max() <= 1e-6
            checked += 1
        assert checked >= 25


def certified_problem(seed, n=40):
    spec = SimSpec(n=n, design=IndependentUniform(), noise_sd=0.2, seed=seed)
    data = generate(spec)
    rng = np.random.default_rng(seed + 1)
    kernel = ALL_KERNELS[seed % 4]
    bw_u = gap_passing_constant(data.u, rng)
    bw_v = gap_passing_constant(data.v, rng)
    return data, kernel, bw_u, bw_v


class TestCertify:
    def test_gaussian_always_gap_certified(self):
        spec = SimSpec(n=50, seed=58)
        data = generate(spec)
        bw = ConstantBandwidth(0.2)
        pair = build_pair(data, Kernel.GAUSSIAN, bw, bw)
        cert = certify(pair, Kernel.GAUSSIAN, bw, bw, data)
        assert cert.verdict is Verdict.CERTIFIED_BY_GAP_CONDITIONS
        assert cert.certified
        assert cert.regular_s1 and cert.regular_s2
        assert cert.spectral.top_eigenvalue_simple
        assert abs(cert.spectral.top_eigenvalue_s1) == pytest.approx(1.0, abs=1e-10)

    def test_huge_bandwidth_gives_zero_radius(self):
        spec = SimSpec(n=20, seed=59)
        data = generate(spec)
        bw = ConstantBandwidth(1e6)
        pair = build_pair(data, Kernel.UNIFORM, bw, bw)
        cert = certify(pair, Kernel.UNIFORM, bw, bw, data)
        assert cert.verdict is Verdict.CERTIFIED_BY_GAP_CONDITIONS
        assert cert.spectral.rho_product <= 1e-14

    def test_spectral_route_when_gaps_fail(self):
        # u splits into two clusters at its bandwidth, but a huge v
        # bandwidth kills the centered product, so the computed radius
        # still certifies convergence
        rng = np.random.default_rng(60)
        u = np.concatenate([rng.uniform(0.0, 0.5, 6), rng.uniform(10.0, 10.5, 6)])
        v = rng.uniform(0.0, 1.0, 12)
        data = Dataset(y=rng.normal(size=12), u=u, v=v)
        bw_u = ConstantBandwidth(1.0)
        bw_v = ConstantBandwidth(1e6)
        pair = build_pair(data, Kernel.UNIFORM, bw_u, bw_v)
        cert = certify(pair, Kernel.UNIFORM, bw_u, bw_v, data)
        assert not cert.gap_u.condition_holds
        assert cert.gap_v.condition_holds
        assert cert.verdict is Verdict.CERTIFIED_BY_SPECTRAL_RADIUS
        assert cert.spectral.rho_product < 1e-8

    def test_two_cluster_not_certified(self, uniform_cluster_problem):
        data, kernel, bw = uniform_cluster_problem
        pair = build_pair(data, kernel, bw, bw)
        cert = certify(pair, kernel, bw, bw, data)
        assert cert.verdict is Verdict.NOT_CERTIFIED
        assert not cert.certified
        assert not cert.regular_s1 and not cert.regular_s2
        assert cert.spectral.rho_s1_star == pytest.approx(1.0, abs=1e-6)
        assert cert.spectral.rho_product >= 1.0 - 1e-8
        assert "condition estimate" in cert.notes

    def test_verdict_invariants_sweep(self):
        for seed in range(12):
            data, kernel, bw_u, bw_v = certified_problem(seed)
            pair = build_pair(data, kernel, bw_u, bw_v)
            cert = certify(pair, kernel, bw_u, bw_v, data)
            if cert.verdict is not Verdict.NOT_CERTIFIED:
                assert cert.spectral.rho_product < 1.0 - 1e-8
            if cert.verdict is Verdict.CERTIFIED_BY_GAP_CONDITIONS:
                assert cert.gap_u.condition_holds and cert.gap_v.condition_holds
            assert cert.spectral.perron_vector_check <= 1e-10

    def test_power_method_matches_dense(self):
        data, kernel, bw_u, bw_v = certified_problem(3)
        pair = build_pair(data, kernel, bw_u, bw_v)
        dense = certify(pair, kernel, bw_u, bw_v, data, method="dense")
        power = certify(pair, kernel, bw_u, bw_v, data, method="power")
        assert power.verdict is dense.verdict
        assert power.spectral.rho_product == pytest.approx(
            dense.spectral.rho_product, abs=1e-7
        )

    def test_certificate_serializes(self):
        data, kernel, bw_u, bw_v = certified_problem(4)
        pair = build_pair(data, kernel, bw_u, bw_v)
        cert = certify(pair, kernel, bw_u, bw_v, data)
        blob = json.dumps(cert.to_dict(), sort_keys=True)
        assert "verdict" in blob

    def test_unknown_method(self):
        data, kernel, bw_u, bw_v = certified_problem(5)
        pair = build_pair(data, kernel, bw_u, bw_v)
        with pytest.raises(ValueError):
            certify(pair, kernel, bw_u, bw_v, data, method="qr")
