import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gaussmaps.analysis import (
    default_eps,
    find_islands,
    islands_verdict,
    make_unicity_example,
    omitted_values,
    ramification_verdict,
    shared_values,
    unicity_report,
)
from gaussmaps.catalog import CATALOG
from gaussmaps.errors import ConstantFunction, EpsTooLarge, InvalidAlphas, UnresolvedComponent
from gaussmaps.mero import INF, MeroExpr, OneForm, Z, chordal, is_inf
from gaussmaps.mesh import DomainSpec, build_mesh
from gaussmaps.metric import MetricSpec, RamificationProfile, is_complete


def _as_set(points):
    out = set()
    for p in points:
        out.add("inf" if is_inf(p) else (round(complex(p).real, 9), round(complex(p).imag, 9)))
    return out


@pytest.fixture(scope="module")
def disk():
    return build_mesh(DomainSpec.disk(1.0, edge=0.05))


class TestOmitted:
    def test_enneper(self):
        rep = omitted_values(Z, [INF], 2)
        assert _as_set(rep.omitted) == {"inf"}
        assert rep.within_bound and rep.bound == 4

    def test_catenoid(self):
        rep = omitted_values(Z, [0, INF], 2)
        assert _as_set(rep.omitted) == {(0.0, 0.0), "inf"}

    def test_sharpness_entry(self):
        e = CATALOG["sharpness"]
        rep = omitted_values(e.metric().g, e.punctures_list(), e.m)
        assert rep.count == 4 == rep.bound

    def test_value_taken_elsewhere_not_omitted(self):
        # z^2 - 1 takes 0 at ±1; removing +1 leaves -1
        rep = omitted_values(Z**2 - 1, [1, INF], 2)
        assert _as_set(rep.omitted) == {"inf"}

    def test_constant(self):
        with pytest.raises(ConstantFunction):
            omitted_values(MeroExpr.constant(2), [INF], 2)

    def test_to_dict(self):
        d = omitted_values(Z, [0, INF], 2).to_dict()
        assert d["count"] == 2 and d["within_bound"] is True


class TestRamification:
    def test_consistent(self):
        spec = MetricSpec(Z, OneForm(1), 2, [INF])
        prof = RamificationProfile.uniform([0, 1, -1, 2, 3], INF)
        v = ramification_verdict(spec, prof)
        assert v.complete and v.status == "consistent"

    def test_silent_when_incomplete(self):
        spec = MetricSpec(Z, OneForm(1), 2, [0, INF])
        v = ramification_verdict(spec, RamificationProfile.uniform([1, 2], 2))
        assert not v.complete and v.status == "silent"

    def test_trivial_for_constant(self):
        spec = MetricSpec(MeroExpr.constant(0.5), OneForm(1), 2, [INF])
        assert ramification_verdict(spec, RamificationProfile.uniform([1], 2)).status == "trivial"

    @pytest.mark.parametrize("name", ["enneper", "catenoid", "sharpness"])
    def test_no_contradiction_on_genuine_data(self, name):
        e = CATALOG[name]
        omitted = omitted_values(e.metric().g, e.punctures_list(), e.m).omitted
        prof = RamificationProfile.uniform(list(omitted) + [3 + 1j], INF)
        assert ramification_verdict(e.metric(), prof).status != "contradiction"


class TestIslands:
    def test_double_island(self, disk):
        rep = find_islands(Z**2, disk, 0, 0.25)
        assert rep.multiplicities == [2] and rep.simple_count == 0

    def test_simple_island(self, disk):
        rep = find_islands(Z, disk, 0, 0.25)
        assert rep.multiplicities == [1] and rep.simple_count == 1
        assert rep.islands[0].winding == 1

    def test_island_over_infinity(self, disk):
        rep = find_islands(1 / (Z - 0.2) ** 3, disk, INF, 0.25)
        assert rep.multiplicities == [3]

    def test_two_islands(self, disk):
        rep = find_islands(Z**2 - 0.25, disk, 0, 0.1)
        assert sorted(rep.multiplicities) == [1, 1]

    def test_boundary_component_discarded(self, disk):
        rep = find_islands(Z, disk, 0.9, 0.25)
        assert rep.islands == () and rep.boundary_components == 1

    def test_eps_range(self, disk):
        with pytest.raises(EpsTooLarge):
            find_islands(Z, disk, 0, 0)
        with pytest.raises(EpsTooLarge):
            islands_verdict(Z, disk, [(0, 2), (1, 2)], eps=0.5)

    def test_unresolved_when_mesh_too_coarse(self, disk):
        # two zeros and a pole packed well inside one triangle fan
        g = Z - MeroExpr.coerce(1e-4) / Z
        with pytest.raises(UnresolvedComponent, match="winding"):
            find_islands(g, disk, 0, 0.25)

    def test_default_eps(self):
        assert default_eps([0]) == 0.25
        assert default_eps([0, INF]) == pytest.approx(0.25)

    def test_verdict_silent_without_completeness(self, disk):
        v = islands_verdict(Z**2, disk, [(0, 2), (INF, 2)])
        assert v.status == "silent" and v.hypothesis_holds
        assert v.targets[0].min_multiplicity == 2

    def test_verdict_low_multiplicity(self, disk):
        v = islands_verdict(Z, disk, [(0, 2)])
        assert not v.targets[0].ok and not v.hypothesis_holds


class TestShared:
    def test_m2(self):
        rep = unicity_report(2, [2])
        assert rep.complete_first and not rep.complete_second
        assert not rep.shared.identical
        assert rep.shared.shared_count == 6
        assert _as_set(rep.shared.shared) == {
            (-1.0, 0.0), (0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (2.0, 0.0), "inf"
        }

    def test_m4(self):
        rep = unicity_report(4, [2, 3])
        assert rep.complete_first and rep.shared.shared_count == 8

    def test_isometric_variant_complete(self):
        rep = unicity_report(2, [2], omega_hat="isometric")
        assert rep.complete_first and rep.complete_second
        assert rep.shared.shared_count == 6

    def test_identical_maps(self):
        s = shared_values(Z, Z, [INF])
        assert s.identical

    def test_distinct_polynomials_share_few(self):
        s = shared_values(Z, Z + 1, [INF], m=2)
        assert _as_set(s.shared) == {"inf"}
        assert s.to_dict()["forces_identity"] is False

    @pytest.mark.parametrize("alphas", [[1], [0], [-1], [2, 2], [2, 0.5], [2, 3, 4]])
    def test_invalid_alphas(self, alphas):
        with pytest.raises(InvalidAlphas):
            make_unicity_example(4 if len(alphas) == 2 else 2, alphas)

    def test_odd_m(self):
        with pytest.raises(InvalidAlphas):
            make_unicity_example(3, [2])

    def test_to_dict_keys(self):
        d = unicity_report(2, [2]).to_dict()
        assert d["shared_count"] == 6 and d["sharpness_bound"] == 6 and d["unicity_threshold"] == 7


real_alpha = st.floats(1.1, 20) | st.floats(-20, -1.1)


@settings(max_examples=25, deadline=None)
@given(a=real_alpha)
def test_example_always_shares_m_plus_4(a):
    rep = unicity_report(2, [a])
    assert rep.complete_first
    assert rep.shared.shared_count == 6 and not rep.shared.identical


@settings(max_examples=25, deadline=None)
@given(a=real_alpha, b=real_alpha)
def test_example_m4(a, b):
    assume(abs(a - b) > 1e-3 and abs(a * b - 1) > 1e-3)
    rep = unicity_report(4, [a, b])
    assert is_complete(make_unicity_example(4, [a, b]).first)
    assert rep.shared.shared_count == 8


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-3, 3), y=st.floats(-3, 3))
def test_shared_values_symmetric(x, y):
    assume(abs(complex(x, y) + 2) > 1e-6)
    gh = (Z + complex(x, y)) / (Z - 2)
    a = shared_values(Z**2, gh, [INF, 2])
    b = shared_values(gh, Z**2, [INF, 2])
    assert _as_set(a.shared) == _as_set(b.shared)


def test_chordal_gap_default_below_half():
    alphas = [0, 1, INF]
    eps = default_eps(alphas)
    gaps = [chordal(p, q) for i, p in enumerate(alphas) for q in alphas[i + 1:]]
    assert eps < min(gaps) / 2
