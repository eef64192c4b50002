import math

import numpy as np
import pytest
from conftest import corpus, paths, random_path
from hypothesis import given, settings
from hypothesis import strategies as st

from bdspectra import (
    WeightedPath,
    classify_type,
    ehrenfest,
    from_birth_death,
    principal_subpath,
    rayleigh,
    shoot,
    shoot_clipped,
    shoot_reverse,
    sign_changes,
    simple_random_walk,
)
from bdspectra.oracle import det_A, oracle_spectrum
from bdspectra.solvers import default_bracket

SRW3 = simple_random_walk(3)


class TestShoot:
    def test_srw3_below_second(self):
        s = shoot(SRW3, 0.5)
        np.testing.assert_allclose(s.values, [-1, 0, 1], atol=1e-15)
        assert s.type_index == 1
        assert s.peak_valleys == ((1, 3),)
        assert s.mean_is_zero and s.mean_sign == 0

    def test_srw3_second_eigenvalue(self):
        s = shoot(SRW3, 1.5)
        np.testing.assert_allclose(s.values, [-1, 2, -1], atol=1e-15)
        assert s.type_index == 2
        assert s.peak_valleys == ((1, 2), (2, 3))

    def test_partial_sums(self, rng):
        p = random_path(rng, 12, 2.0)
        s = shoot(p, 0.3)
        np.testing.assert_allclose(s.partial_sums, np.cumsum(p.pi * s.values), rtol=1e-9, atol=1e-12 * s.abs_mass)

    def test_recursion(self, rng):
        p = random_path(rng, 10, 1.0)
        lam = 0.4
        x = shoot(p, lam).values
        for k in range(1, p.n - 1):
            rhs = x[k] + ((x[k] - x[k - 1]) * p.nu[k - 1] - lam * p.pi[k] * x[k]) / p.nu[k]
            assert x[k + 1] == pytest.approx(rhs, rel=1e-10, abs=1e-12 * np.abs(x).max())

    def test_rejects_bad_lambda(self):
        for lam in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                shoot(SRW3, lam)

    def test_rescaling_keeps_values_finite(self):
        p = simple_random_walk(3000)
        s = shoot(p, 4.0)
        assert s.log_scale > 0
        assert np.all(np.isfinite(s.values))
        assert s.values[0] == pytest.approx(-(2.0**-s.log_scale))

    def test_reverse_matches_reversed_path(self, rng):
        p = random_path(rng, 9, 2.0)
        b = shoot_reverse(p, 0.7)
        f = shoot(p.reversed(), 0.7)
        np.testing.assert_array_equal(b.values, f.values[::-1])
        assert b.values[-1] == f.values[0]
        assert b.type_index == f.type_index
        assert b.boundary_value == f.values[0]
        for (a1, b1), (a2, b2) in zip(b.peak_valleys, f.peak_valleys):
            assert (a1, b1) == (p.n + 1 - a2, p.n + 1 - b2)

    def test_mean_vanishes_at_eigenvalues(self):
        for n in (5, 10, 17):
            p = simple_random_walk(n)
            for i in range(1, n):
                lam = 1 - math.cos(i * math.pi / n)
                s = shoot(p, lam)
                assert abs(s.pi_mean) <= 1e-11 * s.abs_mass


class TestClassify:
    def test_increasing(self):
        t = classify_type([-1, -0.5, 0])
        assert t.type_index == 1 and t.peak_valleys == ((1, 3),) and not t.trailing_plateau

    def test_up_down(self):
        assert classify_type([-1, 2, -1]).type_index == 2

    def test_flat_pair(self):
        t = classify_type([-1, 0, 1, 1, 0.5])
        assert t.type_index == 2
        (a1, b1), (a2, b2) = t.peak_valleys
        assert (a1, b1, a2, b2) == (1, 3, 4, 5)
        assert a2 - b1 in (0, 1)

    def test_shared_peak(self):
        (_, b1), (a2, _) = classify_type([-1, 0, 1, 0.5]).peak_valleys
        assert a2 == b1 == 3

    def test_trailing_plateau(self):
        t = classify_type([-1, 1, 1])
        assert t.type_index == 1 and t.trailing_plateau and t.peak_valleys == ((1, 2),)

    def test_tolerance_is_relative_to_running_max(self):
        assert classify_type([-1.0, 1.0, 1.0 - 1e-14, 1.0]).type_index == 1
        assert classify_type([-1.0, 1.0, 1.0 - 1e-10, 1.0]).type_index == 3

    @pytest.mark.parametrize("v", [[1.0, 2.0], [0.0, 1.0], [], [-1.0], [-1.0, -1.0]])
    def test_rejects(self, v):
        with pytest.raises(ValueError):
            classify_type(v)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=20), st.floats(0.1, 100))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariance(self, tail, c):
        v = np.array([-1.0] + tail)
        try:
            t = classify_type(v)
        except ValueError:
            return
        u = classify_type(c * v)
        assert (u.type_index, u.peak_valleys) == (t.type_index, t.peak_valleys)


class TestSignChanges:
    def test_examples(self):
        np.testing.assert_array_equal(sign_changes([-1, 0, 1]), [2, 4])
        np.testing.assert_array_equal(sign_changes([-1, 2, -1]), [2, 3])
        np.testing.assert_array_equal(sign_changes([-1, -2, -3, -4]), [5, 5, 5])

    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_in_lambda(self, seed):
        rng = np.random.default_rng(seed)
        p = random_path(rng, int(rng.integers(3, 26)), 2.0)
        lams = np.sort(rng.uniform(1e-3, default_bracket(p)[1], 40))
        prev = None
        for lam in lams:
            s = sign_changes(shoot(p, lam).values)
            if prev is not None:
                assert np.all(prev >= s)
            prev = s


class TestRayleigh:
    def test_srw3(self):
        assert rayleigh(SRW3, [-1, 0, 1]) == pytest.approx(0.5, rel=1e-15)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            rayleigh(SRW3, [2.0, 2.0, 2.0])

    def test_shape_rejected(self):
        with pytest.raises(ValueError):
            rayleigh(SRW3, [1.0, 2.0])

    def test_eigenvector(self):
        p = simple_random_walk(8)
        lam = 1 - math.cos(3 * math.pi / 8)
        v = np.cos(3 * math.pi * (np.arange(8) + 0.5) / 8)
        assert rayleigh(p, v) == pytest.approx(lam, rel=1e-12)

    @given(paths(n_max=15), st.floats(0.01, 100), st.integers(0, 2**31))
    @settings(max_examples=50, deadline=None)
    def test_homogeneous(self, p, c, seed):
        v = np.random.default_rng(seed).normal(size=p.n)
        assert rayleigh(p, c * v) == pytest.approx(rayleigh(p, v), rel=1e-12)
        assert rayleigh(p, -v) == pytest.approx(rayleigh(p, v), rel=1e-12)


class TestClipped:
    def test_srw3_below(self):
        c = shoot_clipped(SRW3, 0.5)
        np.testing.assert_allclose(c.values, [-1, 0, 1], atol=1e-15)

    def test_srw3_clips(self):
        c = shoot_clipped(SRW3, 1.5)
        np.testing.assert_allclose(c.values, [-1, 2, 2], atol=1e-15)
        assert c.plateau_start == 1
        e = 9 / 6
        var = (1 + 4 + 4) / 3 - 1
        assert c.energy == pytest.approx(e, rel=1e-14)
        assert c.variance == pytest.approx(var, rel=1e-14)
        assert c.rayleigh == pytest.approx(0.75, rel=1e-14)
        resid = c.energy - 1.5 * c.variance - 1.5 * c.pi_mean * (c.pi_mean - c.values[-1])
        assert abs(resid) < 1e-14

    def test_arguments(self):
        with pytest.raises(ValueError):
            shoot_clipped(SRW3, 0.5, 0)
        with pytest.raises(ValueError):
            shoot_clipped(SRW3, 0.5, 1, 1.0)
        with pytest.raises(ValueError):
            shoot_clipped(SRW3, -0.5)

    @given(paths(n_max=30), st.floats(1e-3, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_order_one_shape_and_energy_identity(self, p, frac):
        lam = frac * default_bracket(p)[1]
        c = shoot_clipped(p, lam)
        d = np.diff(c.values)
        assert np.all(d >= 0)
        assert np.all(d[: c.plateau_start] > 0)
        assert np.all(d[c.plateau_start :] == 0)
        if np.all(d == 0):
            return
        resid = c.energy - lam * c.variance - lam * c.pi_mean * (c.pi_mean - c.values[-1])
        assert abs(resid) <= 1e-10 * c.energy
        assert c.rayleigh == pytest.approx(rayleigh(p, c.values), rel=1e-12)

    @given(paths(n_max=30), st.floats(1e-3, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_order_one_is_truncation(self, p, frac):
        lam = frac * default_bracket(p)[1]
        c = shoot_clipped(p, lam)
        s = shoot(p, lam)
        v = s.values.copy()
        if s.type_index > 1:
            b = s.peak_valleys[0][1] - 1
            v[b:] = v[b]
        v = v / -v[0]
        np.testing.assert_allclose(c.values, v, rtol=1e-9, atol=1e-9 * np.abs(v).max())

    @pytest.mark.parametrize("j", [2, 3, 4])
    def test_higher_orders_truncate(self, j, rng):
        p = random_path(rng, 12, 2.0)
        for lam in rng.uniform(0.05, default_bracket(p)[1], 20):
            s = shoot(p, lam)
            c = shoot_clipped(p, lam, j)
            if s.type_index > j:
                b = s.peak_valleys[j - 1][1]
                np.testing.assert_array_equal(c.values[:b], s.values[:b])
                assert np.all(c.values[b - 1 :] == s.values[b - 1])
                assert c.plateau_start == b - 1
            else:
                np.testing.assert_array_equal(c.values, s.values)

    @given(paths(n_max=20), st.floats(1e-3, 1.0), st.floats(0.01, 100.0))
    @settings(max_examples=60, deadline=None)
    def test_start_value_scale(self, p, frac, a):
        lam = frac * default_bracket(p)[1]
        c1 = shoot_clipped(p, lam, 1, -1.0)
        ca = shoot_clipped(p, lam, 1, -a)
        np.testing.assert_allclose(ca.values, a * c1.values, rtol=1e-12, atol=1e-12 * a * np.abs(c1.values).max())
        if np.any(c1.values != c1.values[0]):
            assert ca.rayleigh == pytest.approx(c1.rayleigh, rel=1e-10)


class TestStructure:
    @pytest.mark.parametrize("seed", range(20))
    def test_mean_matches_determinant(self, seed):
        rng = np.random.default_rng(seed)
        p = random_path(rng, int(rng.integers(2, 51)), 2.0)
        for lam in rng.uniform(0.0, default_bracket(p)[1], 10):
            s = shoot(p, lam)
            mean = math.ldexp(s.pi_mean, s.log_scale)
            d = -p.pi[0] * det_A(p, lam, p.n - 1)
            if abs(d) < 1e-6 * math.ldexp(s.abs_mass, s.log_scale):
                continue  # too close to an eigenvalue for a relative check
            assert mean == pytest.approx(d, rel=1e-8)

    @pytest.mark.parametrize("seed", range(30))
    def test_type_steps_at_alphas(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = random_path(rng, int(rng.integers(3, 31)), 2.0)
        alpha = oracle_spectrum(principal_subpath(p, p.n - 1)).eigenvalues[1:]
        for lam in rng.uniform(0.0, default_bracket(p)[1], 60):
            if np.any(np.abs(lam - alpha) <= 1e-9 * lam):
                continue
            assert shoot(p, lam).type_index == 1 + np.count_nonzero(alpha < lam)
        for j, a in enumerate(alpha, start=1):
            assert shoot(p, a * (1 - 1e-8)).type_index == j
            assert shoot(p, a * (1 + 1e-8)).type_index == j + 1

    def test_plateau_at_alpha(self):
        # SRW n=3: leading 2-vertex subpath has gap nu/(pi pi) rescaled = 1
        s = shoot(SRW3, 1.0)
        np.testing.assert_allclose(s.values, [-1, 1, 1], atol=1e-15)
        assert s.trailing_plateau and s.type_index == 1
        assert shoot(SRW3, 1.0 + 1e-8).type_index == 2
        assert shoot(SRW3, 1.0 - 1e-8).type_index == 1


def test_six_decade_corpus_profiles_finite():
    for p in corpus(7, 50, 40):
        for lam in (1e-6, 0.1, 1.0, 1.9):
            s = shoot(p, lam)
            assert np.all(np.isfinite(s.values)) and s.values[0] < 0


def test_decayed_profile_keeps_increment_signs():
    # after the profile drops 1e20 below its peak the increments are still
    # resolved against their own scale, not the accumulated mass
    n = 60
    p = from_birth_death(ehrenfest(n))
    for i in (20, 45, 59):
        lam = 2 * i / n
        below = shoot(p, lam * (1 - 1e-9))
        above = shoot(p, lam * (1 + 1e-9))
        assert below.type_index <= above.type_index
        assert below.mean_sign != 0 and above.mean_sign != 0
        assert below.mean_sign != above.mean_sign
