from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussmaps.errors import (
    ConstantFunction,
    EvaluatedAtPuncture,
    InvalidMetric,
    PreconditionViolated,
    PunctureNotIsolated,
)
from gaussmaps.mero import INF, OneForm, Z
from gaussmaps.metric import (
    MetricSpec,
    RamificationProfile,
    classify_completeness,
    conformal_factor,
    fujimoto_lhs,
    gamma,
    gaussian_curvature,
    hypothesis_check,
    is_complete,
    local_exponent,
    spherical_derivative,
)
from oracles import fd_curvature, numeric_divergence, ray_start

UNICITY_OMEGA = OneForm(1 / (Z * (Z - 2) * (2 * Z - 1)))


def enneper():
    return MetricSpec(Z, OneForm(1), 2)


def catenoid():
    return MetricSpec(Z, OneForm(1 / Z**2), 2)


class TestConformalFactor:
    def test_enneper_origin(self):
        assert conformal_factor(enneper(), 0) == pytest.approx(1.0)

    @pytest.mark.parametrize("m", [0, 1, 2, 5])
    def test_constant_g(self, m):
        spec = MetricSpec(0.5 + 0.5j, OneForm(1), m)
        assert conformal_factor(spec, 1.3 - 2j) == pytest.approx(1.5 ** (m / 2))

    def test_catenoid_at_one(self):
        assert conformal_factor(catenoid(), 1) == pytest.approx(2.0)

    def test_puncture_rejected(self):
        with pytest.raises(EvaluatedAtPuncture):
            conformal_factor(catenoid(), 0)
        with pytest.raises(EvaluatedAtPuncture):
            conformal_factor(catenoid(), INF)

    def test_regular_near_pole_of_g(self):
        spec = MetricSpec(1 / Z, OneForm(Z**2), 2, [INF])
        # λ = (1+|z|^-2)|z|^2 = |z|^2 + 1, regular through z = 0
        z = np.array([1e-9, 1e-3, 0.5])
        np.testing.assert_allclose(conformal_factor(spec, z), np.abs(z) ** 2 + 1, rtol=1e-12)
        assert conformal_factor(spec, 0) == pytest.approx(1.0)

    def test_missing_natural_puncture(self):
        with pytest.raises(InvalidMetric):
            MetricSpec(Z, OneForm(1 / Z**2), 2, [INF])

    def test_punctures_not_isolated(self):
        with pytest.raises(PunctureNotIsolated):
            MetricSpec(Z, OneForm(1), 2, [INF, 1, 1 + 1e-12])


class TestCurvature:
    def test_enneper_origin(self):
        assert gaussian_curvature(enneper(), 0) == pytest.approx(-4.0)
        assert fd_curvature(enneper(), 0) == pytest.approx(-4.0, rel=1e-4)

    def test_constant_g_flat(self):
        spec = MetricSpec(3, OneForm(1 / Z), 2)
        np.testing.assert_allclose(gaussian_curvature(spec, np.array([0.5, 2j, -1 + 1j])), 0)

    def test_m_zero_flat(self):
        spec = MetricSpec(Z**2, OneForm(1), 0)
        assert gaussian_curvature(spec, 0.7) == 0

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=3),
        st.integers(1, 4),
        st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    )
    def test_nonpositive(self, roots, m, z):
        g = Z
        for r in roots:
            g = g * (Z - r) + 1
        spec = MetricSpec(g, OneForm(1), m)
        k = gaussian_curvature(spec, z)
        assert k <= 1e-12

    @pytest.mark.parametrize(
        "spec",
        [
            MetricSpec(Z**2 / (Z - 3), OneForm(Z - 3), 2),
            MetricSpec((Z + 1j) / (2 * Z - 1), OneForm(1 / Z), 1),
            MetricSpec(Z, UNICITY_OMEGA, 2),
        ],
    )
    def test_matches_finite_differences(self, spec):
        rng = np.random.default_rng(7)
        z = rng.uniform(-1.5, 1.5, 20) + 1j * rng.uniform(-1.5, 1.5, 20)
        near = np.array([min(abs(p - w) for p in spec.domain_punctures if p is not INF) for w in z])
        z = z[near > 0.1]
        exact = gaussian_curvature(spec, z)
        for w, k in zip(z, exact):
            assert fd_curvature(spec, w) == pytest.approx(k, rel=1e-4, abs=1e-9)

    def test_spherical_derivative_chart_switch(self):
        g = 1 / Z
        z = np.array([1e-12, 1e-6, 0.3])
        # |g'|/(1+|g|^2) = 1/(1+|z|^2) for g = 1/z
        np.testing.assert_allclose(spherical_derivative(g, z), 1 / (1 + np.abs(z) ** 2), rtol=1e-12)


class TestGamma:
    def test_all_infinite(self):
        prof = RamificationProfile.uniform([0, 1, -1, 2, INF], INF)
        assert gamma(prof) == 5

    def test_nine_twos(self):
        prof = RamificationProfile.uniform(range(9), 2)
        assert gamma(prof) == Fraction(9, 2)

    def test_seven_twos(self):
        prof = RamificationProfile.uniform(range(7), 2)
        assert gamma(prof) == Fraction(7, 2)

    @given(st.lists(st.integers(2, 30), min_size=1, max_size=6), st.data())
    def test_monotone(self, nus, data):
        prof = RamificationProfile(tuple((complex(i), n) for i, n in enumerate(nus)))
        j = data.draw(st.integers(0, len(nus) - 1))
        bumped = list(nus)
        bumped[j] += data.draw(st.integers(1, 10))
        prof2 = RamificationProfile(tuple((complex(i), n) for i, n in enumerate(bumped)))
        assert gamma(prof2) >= gamma(prof)
        inf_prof = RamificationProfile(tuple((complex(i), INF if i == j else n) for i, n in enumerate(nus)))
        assert gamma(inf_prof) >= gamma(prof2)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            RamificationProfile(((0j, 2), (0j, 3)))
        with pytest.raises(ValueError):
            RamificationProfile(((0j, 1),))


class TestHypothesis:
    def test_square_satisfies(self):
        spec = MetricSpec(Z**2, OneForm(1), 2)
        assert hypothesis_check(spec, RamificationProfile.uniform([0], 2)).satisfied

    def test_identity_violates(self):
        spec = MetricSpec(Z, OneForm(1), 2)
        v = hypothesis_check(spec, RamificationProfile.uniform([0], 2))
        assert not v.satisfied
        assert list(v.per_alpha[0].points) == [(0j, 1)]

    def test_vacuous_when_punctured(self):
        spec = catenoid()
        assert hypothesis_check(spec, RamificationProfile.uniform([0], INF)).satisfied

    def test_constant(self):
        with pytest.raises(ConstantFunction):
            hypothesis_check(MetricSpec(1, OneForm(1), 2), RamificationProfile.uniform([0], 2))


class TestCompleteness:
    def test_catenoid(self):
        reps = classify_completeness(catenoid())
        assert [r.k for r in reps] == [-2, -2]
        assert all(r.complete_at for r in reps)

    def test_enneper(self):
        (rep,) = classify_completeness(enneper())
        assert rep.k == -4 and rep.complete_at

    def test_unicity_data(self):
        spec = MetricSpec(Z, UNICITY_OMEGA, 2, [0, 2, 0.5, INF])
        reps = classify_completeness(spec)
        assert [r.k for r in reps] == [-1, -1, -1, -1]
        assert is_complete(spec)

    def test_disk_like_puncture_incomplete(self):
        # λ = |z|^2 + 1 near ∞ grows: but a puncture at a regular point is incomplete
        spec = MetricSpec(Z, OneForm(1), 2, [0, INF])
        assert local_exponent(spec.g, spec.omega, 2, 0) == 0
        assert not is_complete(spec)

    def test_scaling_by_z_power(self):
        # ω = z^a dz with g = 1: k = a at 0, and -a-2 at ∞
        for a in range(-3, 3):
            spec = MetricSpec(1, OneForm(Z**a), 2, [0, INF])
            ks = {str(r.puncture): r.k for r in classify_completeness(spec)}
            assert ks == {"0j": a, "INF": -a - 2}

    @pytest.mark.parametrize(
        "spec",
        [
            catenoid(),
            enneper(),
            MetricSpec(Z, UNICITY_OMEGA, 2, [0, 2, 0.5, INF]),
            MetricSpec(1 / Z, UNICITY_OMEGA, 2, [0, 2, 0.5, INF]),
            MetricSpec(Z, OneForm(1), 2, [0, INF]),
            MetricSpec(Z, OneForm(1 / Z), 1, [0, INF]),
        ],
    )
    def test_matches_path_length_oracle(self, spec):
        for rep in classify_completeness(spec):
            start = ray_start(spec, rep.puncture)
            diverges, _ = numeric_divergence(spec, start, rep.puncture)
            assert diverges == rep.complete_at, (rep.puncture, rep.k)


class TestFujimoto:
    def test_constant_g(self):
        prof = RamificationProfile.uniform([0, 1, INF], INF)
        assert fujimoto_lhs(2.0, prof, 0, 0.1, 0.3) == 0

    def test_zero_exponent_reduces_to_spherical_derivative(self):
        prof = RamificationProfile.uniform([0, 1, INF], INF)
        z = 0.4 + 0.2j
        val = fujimoto_lhs(Z, prof, 0.5, 0.5, z, strict=False)
        assert val == pytest.approx(spherical_derivative(Z, z))

    def test_bounded_on_disk(self):
        # z + 5 omits 0, 1 and ∞ on the unit disk, so the weighted quantity stays bounded
        prof = RamificationProfile.uniform([0, 1, INF], INF)
        x = np.linspace(-0.99, 0.99, 81)
        zz = (x[:, None] + 1j * x[None, :]).ravel()
        zz = zz[np.abs(zz) < 0.99]
        vals = fujimoto_lhs(Z + 5, prof, 0.0, 0.1, zz) * (1 - np.abs(zz) ** 2)
        assert np.all(np.isfinite(vals)) and np.all(vals > 0)
        assert vals.max() < 1.0
        assert 0 < fujimoto_lhs(Z, prof, 0.0, 0.1, 0.5) < np.inf

    def test_preconditions(self):
        prof = RamificationProfile.uniform([0, 1, INF], INF)
        with pytest.raises(PreconditionViolated):
            fujimoto_lhs(Z, prof, 0, 0, 0.5)
        with pytest.raises(PreconditionViolated):
            fujimoto_lhs(Z, RamificationProfile.uniform([0, 1], INF), 0, 0.1, 0.5)
        with pytest.raises(PreconditionViolated):
            fujimoto_lhs(Z, prof, 0.2, 0.2, 0.5)
