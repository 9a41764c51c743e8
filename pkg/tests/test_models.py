import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from hvsinglet.geometry import UnitVector3, X, Y, Z, make_rng, sample_unit_uniform
from hvsinglet.models import (
    CapP,
    ConstantP,
    FSpec,
    HiddenState,
    InvalidModelError,
    ModelFamily,
    ModelParams,
    ProbabilityTable,
    Settings,
    UndefinedConditionalError,
    bhv_product_joint,
    conditional,
    fhv_conditional_closed_form,
    fhv_joint,
    joint,
    lhv_feasible_c_range,
    lhv_malus_joint,
    malus_check,
    marginal,
    outcome_dependence_witness,
    qm_joint,
    sample_hidden,
    sample_outcomes,
    shv_joint,
    thv_joint,
    thv_positivity_margin,
)

SQRT2 = math.sqrt(2.0)


def units():
    return st.builds(
        lambda z, az: UnitVector3.normalized(
            math.sqrt(max(0.0, 1.0 - z * z)) * math.cos(az),
            math.sqrt(max(0.0, 1.0 - z * z)) * math.sin(az),
            z,
        ),
        st.floats(-1.0, 1.0),
        st.floats(0.0, 2.0 * math.pi),
    )


def random_rotation(rng):
    """Haar-ish random rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class TestModelParams:
    def test_epsilon_is_derived(self):
        p = ModelParams.fhv(1.0)
        assert p.epsilon == pytest.approx(0.5, abs=1e-15)
        assert p.with_eta(3.0).epsilon == pytest.approx(0.75, abs=1e-15)

    def test_negative_eta_rejected(self):
        with pytest.raises(InvalidModelError):
            ModelParams.fhv(-0.1)

    def test_f_coeff_above_half_rejected(self):
        with pytest.raises(InvalidModelError):
            FSpec(coeff=0.6)

    def test_p_sup_matches_declared(self):
        spec = ConstantP((0.0, 0.3, 0.4))
        assert spec.p_sup() == pytest.approx(0.5, abs=1e-9)
        cap = CapP(axis=Z, half_angle=0.5, magnitude=0.8)
        assert cap.p_sup() == 0.8
        # every sampled carrier respects |p| <= p_m
        draws = cap.sample(make_rng(0), 5000)
        assert np.max(np.linalg.norm(draws, axis=1)) <= 0.8 + 1e-12

    def test_cap_mean_is_shrunk_axis(self):
        cap = CapP(axis=Z, half_angle=math.pi / 3, magnitude=1.0)
        assert np.allclose(cap.p_mean(), [0.0, 0.0, 0.75], atol=1e-15)

    def test_with_pm_rescales(self):
        p = ModelParams.shv(ConstantP((0.0, 0.0, 0.5))).with_pm(0.25)
        assert p.p_m == pytest.approx(0.25, abs=1e-15)
        assert np.allclose(p.p_mean(), [0.0, 0.0, 0.25])


class TestThvAudit:
    def test_margin_positive_inside(self):
        assert thv_positivity_margin(1.0) >= -1e-9
        assert thv_positivity_margin(1.999) >= -1e-9

    def test_margin_negative_beyond_two(self):
        assert thv_positivity_margin(2.05) < -1e-3

    def test_construction_rejects_bad_zeta(self):
        ModelParams.thv(2.0)
        with pytest.raises(InvalidModelError):
            ModelParams.thv(2.2)


class TestFhvJoint:
    def test_hand_value(self):
        # f(x)=x/2, eta=1, u=a, v=b, a.b=0, outcome (+,+):
        # 1/4 + (1*(1/2+1/2) - 0)/8 = 3/8
        params = ModelParams.fhv(1.0)
        t = fhv_joint(params, X, Y, Settings(X, Y))
        assert t.pp == pytest.approx(0.375, abs=1e-15)

    def test_eta_zero_collapses_to_qm(self):
        params = ModelParams.fhv(0.0)
        rng = make_rng(3)
        for _ in range(20):
            u, v = sample_unit_uniform(rng), sample_unit_uniform(rng)
            a, b = sample_unit_uniform(rng), sample_unit_uniform(rng)
            t = fhv_joint(params, u, v, Settings(a, b))
            q = qm_joint(Settings(a, b))
            assert t.as_dict() == pytest.approx(q.as_dict(), abs=1e-15)

    def test_wrong_family_rejected(self):
        with pytest.raises(InvalidModelError):
            fhv_joint(ModelParams.qm(), X, Y, Settings(X, Y))

    @given(units(), units(), units(), units(), st.floats(0.0, 5.0))
    def test_normalization(self, u, v, a, b, eta):
        t = fhv_joint(ModelParams.fhv(eta), u, v, Settings(a, b))
        assert t.total() == pytest.approx(1.0, abs=1e-12)


class TestShvJoint:
    def test_uniform_when_everything_vanishes(self):
        params = ModelParams.shv(ConstantP((0.0, 0.0, 0.0)))
        t = shv_joint(params, HiddenState.carrier((0.0, 0.0, 0.0)), Settings(X, Y))
        assert t.as_dict() == pytest.approx({"++": 0.25, "+-": 0.25, "-+": 0.25, "--": 0.25})

    def test_hand_value(self):
        # a=x, b=y, p=z, pm=1: P(+,+) = 1/4 - 1/(4*sqrt(2))
        params = ModelParams.shv(ConstantP((0.0, 0.0, 1.0)))
        t = shv_joint(params, HiddenState.carrier((0.0, 0.0, 1.0)), Settings(X, Y))
        assert t.pp == pytest.approx(0.07322330470336313, abs=1e-15)

    def test_marginals_exactly_half(self):
        params = ModelParams.shv()
        rng = make_rng(9)
        for _ in range(50):
            h = sample_hidden(params, rng)
            t = shv_joint(params, h, Settings(sample_unit_uniform(rng), sample_unit_uniform(rng)))
            assert marginal(t, "A") == (0.5, 0.5)
            assert marginal(t, "B") == (0.5, 0.5)

    def test_inconsistent_carrier_rejected(self):
        params = ModelParams.shv(ConstantP((0.0, 0.0, 0.5)))
        with pytest.raises(InvalidModelError):
            shv_joint(params, HiddenState.carrier((0.0, 0.0, 0.9)), Settings(X, Y))

    def test_positivity_bulk(self):
        # oracle: |a.b + (a x b).p| <= sqrt(1+|p|^2) by Cauchy-Schwarz plus
        # the Lagrange identity, so every entry stays nonnegative
        rng = make_rng(17)
        pm = 1.3
        params = ModelParams.shv(ConstantP((0.0, 0.0, pm)))
        a = np.array([sample_unit_uniform(rng).arr for _ in range(200)])
        for i in range(200):
            direction = sample_unit_uniform(rng).arr
            p = float(rng.uniform(0, pm)) * direction
            h = HiddenState.carrier(p)
            t = shv_joint(params, h, Settings(
                UnitVector3.from_array(a[i]), sample_unit_uniform(rng)))
            assert min(t.pp, t.pm, t.mp, t.mm) >= 0.0


class TestThvJoint:
    def test_zeta_zero_is_qm(self):
        t = thv_joint(ModelParams.thv(0.0), Z, Settings(X, Y))
        assert t.as_dict() == pytest.approx(qm_joint(Settings(X, Y)).as_dict(), abs=1e-15)

    def test_orthogonal_u_kills_cubic_term(self):
        t = thv_joint(ModelParams.thv(1.5), Z, Settings(X, Y))
        assert t.as_dict() == pytest.approx(qm_joint(Settings(X, Y)).as_dict(), abs=1e-15)

    def test_hand_value(self):
        # a=b=u=z, zeta=1: cubic term is (1)^3*(-1)^3 = -1, so P(+,+) = 1/4
        t = thv_joint(ModelParams.thv(1.0), Z, Settings(Z, Z))
        assert t.pp == pytest.approx(0.25, abs=1e-15)


class TestQmJoint:
    def test_perfect_anticorrelation(self):
        t = qm_joint(Settings(Z, Z))
        assert t.as_dict() == pytest.approx({"++": 0.0, "+-": 0.5, "-+": 0.5, "--": 0.0})

    def test_orthogonal_settings_uniform(self):
        t = qm_joint(Settings(X, Y))
        assert t.as_dict() == pytest.approx({"++": 0.25, "+-": 0.25, "-+": 0.25, "--": 0.25})

    def test_intermediate_angle(self):
        b = UnitVector3.normalized(1.0, 1.0, 0.0)
        t = qm_joint(Settings(X, b))
        assert t.pp == pytest.approx(0.07322330470336313, abs=1e-15)

    def test_correlator_equals_minus_ab(self):
        rng = make_rng(1)
        for _ in range(50):
            a, b = sample_unit_uniform(rng), sample_unit_uniform(rng)
            t = qm_joint(Settings(a, b))
            ab = a.x * b.x + a.y * b.y + a.z * b.z
            assert t.correlator() == pytest.approx(-ab, abs=1e-12)


class TestFrameInvariance:
    def test_tables_depend_only_on_relative_angles(self):
        rng = make_rng(23)
        params = ModelParams.fhv(0.7)
        for _ in range(25):
            u, v = sample_unit_uniform(rng), sample_unit_uniform(rng)
            a, b = sample_unit_uniform(rng), sample_unit_uniform(rng)
            rot = random_rotation(rng)
            t1 = fhv_joint(params, u, v, Settings(a, b))
            t2 = fhv_joint(
                params,
                UnitVector3.from_array(rot @ u.arr),
                UnitVector3.from_array(rot @ v.arr),
                Settings(
                    UnitVector3.from_array(rot @ a.arr),
                    UnitVector3.from_array(rot @ b.arr),
                ),
            )
            assert t1.as_dict() == pytest.approx(t2.as_dict(), abs=1e-12)


class TestMarginalsConditionals:
    def test_fhv_marginal_hand_value(self):
        # f=x/2, eta=1, u=a: marginal(+) = (1 + (1/2)(1/2))/2 = 0.625
        params = ModelParams.fhv(1.0)
        t = fhv_joint(params, Z, X, Settings(Z, Y))
        assert marginal(t, "A")[0] == pytest.approx(0.625, abs=1e-15)

    def test_uniform_table(self):
        t = ProbabilityTable(0.25, 0.25, 0.25, 0.25)
        assert marginal(t, "A") == (0.5, 0.5)
        assert marginal(t, "B") == (0.5, 0.5)

    def test_conditional_doubles_joint_for_flat_marginals(self):
        params = ModelParams.thv(1.0)
        rng = make_rng(31)
        for _ in range(20):
            h = sample_hidden(params, rng)
            t = thv_joint(params, h.u, Settings(sample_unit_uniform(rng), sample_unit_uniform(rng)))
            for tau in (1, -1):
                got = conditional(t, tau)
                assert got[0] == pytest.approx(2.0 * t.prob(1, tau), abs=1e-12)
                assert got[1] == pytest.approx(2.0 * t.prob(-1, tau), abs=1e-12)

    def test_qm_anticorrelated_conditional(self):
        t = qm_joint(Settings(Z, Z))
        assert conditional(t, 1) == (0.0, 1.0)

    def test_zero_probability_conditioning_rejected(self):
        t = ProbabilityTable(0.5, 0.0, 0.5, 0.0)
        with pytest.raises(UndefinedConditionalError):
            conditional(t, -1)

    @given(units(), units(), units(), units(),
           st.sampled_from([1, -1]), st.sampled_from([1, -1]))
    @hyp_settings(max_examples=200)
    def test_fhv_conditional_dual_route(self, u, v, a, b, sigma, tau):
        params = ModelParams.fhv(eta=2.0)  # fixed eta; vectors vary
        t = fhv_joint(params, u, v, Settings(a, b))
        from_table = conditional(t, tau)[0 if sigma == 1 else 1]
        closed = fhv_conditional_closed_form(params, u, v, Settings(a, b), sigma, tau)
        assert from_table == pytest.approx(closed, abs=1e-12)


class TestNoSignaling:
    @pytest.mark.parametrize("family", ["fhv", "shv", "thv"])
    def test_remote_setting_invariance(self, family):
        params = {
            "fhv": ModelParams.fhv(1.0),
            "shv": ModelParams.shv(),
            "thv": ModelParams.thv(1.0),
        }[family]
        rng = make_rng(7)
        for _ in range(100):
            h = sample_hidden(params, rng)
            a = sample_unit_uniform(rng)
            b1, b2 = sample_unit_uniform(rng), sample_unit_uniform(rng)
            m1 = marginal(joint(params, h, Settings(a, b1)), "A")
            m2 = marginal(joint(params, h, Settings(a, b2)), "A")
            assert m1[0] == pytest.approx(m2[0], abs=1e-12)


class TestSampleHidden:
    def test_thv_support(self):
        rng = make_rng(2)
        for _ in range(200):
            h = sample_hidden(ModelParams.thv(1.0), rng)
            assert (h.u.x + h.v.x, h.u.y + h.v.y, h.u.z + h.v.z) == (0.0, 0.0, 0.0)

    def test_determinism(self):
        p = ModelParams.fhv(0.3)
        s1 = [sample_hidden(p, make_rng(5)) for _ in range(1)]
        s2 = [sample_hidden(p, make_rng(5)) for _ in range(1)]
        assert s1 == s2

    def test_fhv_zero_mean_response(self):
        # sphere average of f(u.a) vanishes for odd f under the uniform draw
        params = ModelParams.fhv(1.0)
        rng = make_rng(13)
        n = 200_000
        from hvsinglet.models import _sample_hidden_batch

        u = _sample_hidden_batch(params, n, rng)["u"]
        vals = params.f_spec(u @ Z.arr)
        stderr = float(np.std(vals, ddof=1)) / math.sqrt(n)
        assert abs(float(np.mean(vals))) <= 4.0 * stderr

    def test_qm_has_no_sampler(self):
        with pytest.raises(InvalidModelError):
            sample_hidden(ModelParams.qm(), make_rng(0))


class TestSampleOutcomes:
    def test_degenerate_table(self):
        t = ProbabilityTable(1.0, 0.0, 0.0, 0.0)
        rng = make_rng(0)
        assert all(sample_outcomes(t, rng) == (1, 1) for _ in range(100))

    def test_uniform_frequencies(self):
        t = ProbabilityTable(0.25, 0.25, 0.25, 0.25)
        rng = make_rng(4)
        n = 100_000
        counts: dict[tuple[int, int], int] = {}
        for _ in range(n):
            key = sample_outcomes(t, rng)
            counts[key] = counts.get(key, 0) + 1
        stderr = math.sqrt(0.25 * 0.75 / n)
        for key in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            assert abs(counts.get(key, 0) / n - 0.25) <= 4 * stderr

    def test_zero_cells_never_drawn(self):
        t = qm_joint(Settings(Z, Z))
        rng = make_rng(8)
        for _ in range(10_000):
            s, tau = sample_outcomes(t, rng)
            assert s != tau


class TestComparisonClasses:
    def test_bhv_uniform(self):
        t = bhv_product_joint(lambda l, a: 0.0, lambda l, b: 0.0, None, Settings(X, Y))
        assert t.as_dict() == pytest.approx({"++": 0.25, "+-": 0.25, "-+": 0.25, "--": 0.25})

    def test_bhv_deterministic_limit(self):
        t = bhv_product_joint(lambda l, a: 1.0, lambda l, b: -1.0, None, Settings(X, Y))
        assert t.pm == pytest.approx(1.0, abs=1e-15)

    def test_bhv_rejects_out_of_range(self):
        with pytest.raises(InvalidModelError):
            bhv_product_joint(lambda l, a: 1.5, lambda l, b: 0.0, None, Settings(X, Y))

    def test_bhv_outcome_independence(self):
        rng = make_rng(21)
        for _ in range(200):
            abar, bbar = rng.uniform(-0.99, 0.99, 2)
            t = bhv_product_joint(lambda l, a: abar, lambda l, b: bbar, None, Settings(X, Y))
            assert conditional(t, 1)[0] == pytest.approx(conditional(t, -1)[0], abs=1e-12)

    def test_lhv_boundary_case(self):
        # u.a = v.b = 0 leaves only the correlation term; C = -1 gives the
        # perfectly anticorrelated table
        t = lhv_malus_joint(Z, Z, -1.0, Settings(X, Y))
        assert t.as_dict() == pytest.approx({"++": 0.0, "+-": 0.5, "-+": 0.5, "--": 0.0})

    def test_lhv_malus_marginals(self):
        rng = make_rng(25)
        for _ in range(100):
            u, v = sample_unit_uniform(rng), sample_unit_uniform(rng)
            a, b = sample_unit_uniform(rng), sample_unit_uniform(rng)
            ua = u.x * a.x + u.y * a.y + u.z * a.z
            vb = v.x * b.x + v.y * b.y + v.z * b.z
            lo, hi = lhv_feasible_c_range(ua, vb)
            c = float(rng.uniform(lo, hi))
            t = lhv_malus_joint(u, v, c, Settings(a, b))
            assert marginal(t, "A")[0] == pytest.approx((1 + ua) / 2, abs=1e-12)
            assert marginal(t, "B")[0] == pytest.approx((1 + vb) / 2, abs=1e-12)

    @given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-3.0, 3.0))
    @hyp_settings(max_examples=300)
    def test_lhv_feasibility_matches_bruteforce(self, ua, vb, c):
        # brute-force oracle: all four cells of [1 + s*ua + t*vb + s*t*c]/4
        feasible_brute = all(
            1.0 + s * ua + t * vb + s * t * c >= -1e-12
            for s in (1, -1)
            for t in (1, -1)
        )
        lo, hi = lhv_feasible_c_range(ua, vb)
        assert feasible_brute == (lo - 1e-12 <= c <= hi + 1e-12)

    def test_lhv_infeasible_rejected(self):
        with pytest.raises(InvalidModelError):
            lhv_malus_joint(X, X, -0.9, Settings(X, X))  # lower bound is |1+1|-1 = 1


class TestMalusCheck:
    def test_fhv_deviation(self):
        rep = malus_check(ModelParams.fhv(1.0))
        # at u=a: marginal 0.625 vs Malus 1.0 -> deviation 0.375
        assert rep.deviation_at_alignment == pytest.approx(0.375, abs=1e-12)
        assert not rep.compliant

    def test_shv_flat_marginal(self):
        rep = malus_check(ModelParams.shv())
        assert rep.max_deviation == pytest.approx(0.5, abs=1e-12)

    def test_lhv_reference_compliant(self):
        rep = malus_check(ModelParams(ModelFamily.LHV))
        assert rep.max_deviation == 0.0
        assert rep.compliant


class TestOutcomeDependence:
    @pytest.mark.parametrize("family", ["fhv", "shv", "thv"])
    def test_witness_found(self, family):
        params = {
            "fhv": ModelParams.fhv(1.0),
            "shv": ModelParams.shv(),
            "thv": ModelParams.thv(1.0),
        }[family]
        found = outcome_dependence_witness(params, make_rng(19), trials=500)
        assert found.delta > 0.1
