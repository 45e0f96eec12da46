"""Oracle self-checks against closed forms derived by hand.

For the cos^2 transmission pair the joint probability over a uniform
polarization angle is

    P(joint | delta) = (1/pi) * Integral cos^2(x) cos^2(x - delta) dx
                     = 1/4 + cos(2 delta)/8,

and the equal-outcome probability is 1/2 + cos(2 delta)/4.  For the sharp
threshold pair both devices transmit iff lambda falls in the overlap of
two half-pi-wide windows offset by delta, giving 1/2 - |delta|/pi for
|delta| <= pi/2.  These forms anchor the quadrature oracle to pencil and
paper rather than to the code under test.
"""

import math

import pytest

from bellmc.errors import ConfigurationError, OracleApplicabilityError, ResourceError
from bellmc.geometry import Lattice
from bellmc.inequalities import SettingsQuad
from bellmc.models import build_model
from bellmc.oracle import (
    DeterministicExtremum,
    discretized_bound_check,
    enumerate_deterministic_max,
    make_pair_prob_fn,
    qm_pair_probs,
    quadrature_coincidence,
    quadrature_pair_probs,
    quadrature_residual,
    quadrature_singles,
    transmission_fn,
)

MALUS = build_model("malus-probabilistic", {})
DET = build_model("malus-deterministic", {})
QUAD = SettingsQuad(0.0, math.pi / 4, math.pi / 8, -math.pi / 8)


def malus_joint(delta: float) -> float:
    return 0.25 + math.cos(2.0 * delta) / 8.0


def malus_equal(delta: float) -> float:
    return 0.5 + math.cos(2.0 * delta) / 4.0


def det_joint(delta: float) -> float:
    return 0.5 - abs(delta) / math.pi


class TestEnumeration:
    def test_joint_form_extremes(self):
        ext = enumerate_deterministic_max("joint")
        assert isinstance(ext, DeterministicExtremum)
        assert ext.maximum == 2.0
        assert ext.minimum == -1.0
        assert (1, 1, 1, 1) in ext.maximizers
        # v(a,b) + v(a,b') + v(a',b) - v(a',b') with v = AND
        for a, ap, b, bp in ext.maximizers:
            assert a * b + a * bp + ap * b - ap * bp == 2

    def test_equal_outcome_form_extremes(self):
        ext = enumerate_deterministic_max("equal-outcome")
        assert ext.maximum == 2.0
        assert ext.minimum == 0.0
        assert (1, 1, 1, 1) in ext.maximizers

    def test_unknown_form_rejected(self):
        with pytest.raises(ConfigurationError):
            enumerate_deterministic_max("product")


class TestQuadrature:
    def test_malus_singles_are_half(self):
        for gamma in (0.0, 0.3, 1.9):
            assert quadrature_singles(MALUS, gamma) == pytest.approx(0.5, abs=1e-9)
            assert quadrature_singles(DET, gamma) == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("delta", [0.0, math.pi / 8, math.pi / 4, 1.0, -0.6])
    def test_malus_pair_probs_closed_form(self, delta):
        probs = quadrature_pair_probs(MALUS, MALUS, 0.3, 0.3 + delta)
        assert probs["joint"] == pytest.approx(malus_joint(delta), abs=1e-9)
        assert probs["equal"] == pytest.approx(malus_equal(delta), abs=1e-9)
        assert probs["p1"] == pytest.approx(0.5, abs=1e-9)
        assert probs["p2"] == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8])
    def test_deterministic_pair_closed_form(self, delta):
        # jump points of the indicator integrand align with the midpoint
        # grids at these angles, so quadrature is exact here
        got = quadrature_coincidence(DET, DET, 0.0, delta)
        assert got == pytest.approx(det_joint(delta), abs=1e-6)

    def test_setting_only_depends_on_difference(self):
        a = quadrature_pair_probs(MALUS, MALUS, 0.1, 0.4)
        b = quadrature_pair_probs(MALUS, MALUS, 1.1, 1.4)
        assert a["joint"] == pytest.approx(b["joint"], abs=1e-9)

    def test_impact_using_model_rejected_without_impact(self):
        modulated = build_model("impact-modulated", {"epsilon": 0.5})
        with pytest.raises(OracleApplicabilityError):
            transmission_fn(modulated)
        with pytest.raises(OracleApplicabilityError):
            quadrature_pair_probs(modulated, MALUS, 0.0, 0.0)

    def test_fixed_impact_transmission(self):
        modulated = build_model("impact-modulated", {"epsilon": 0.5})
        fn = transmission_fn(modulated, (0.3, 0.1))
        import numpy as np

        lam = np.array([0.0, 0.7, 2.1])
        for i, value in enumerate(fn(lam, 0.2)):
            assert value == pytest.approx(
                modulated.evaluate(float(lam[i]), (0.3, 0.1), 0.2), abs=1e-12
            )


class TestEntangledReference:
    def test_pair_probs(self):
        probs = qm_pair_probs(0.0, math.pi / 8)
        c2 = math.cos(math.pi / 8) ** 2
        assert probs["joint"] == pytest.approx(0.5 * c2, abs=1e-15)
        assert probs["equal"] == pytest.approx(c2, abs=1e-15)
        assert probs["p1"] == 0.5 and probs["p2"] == 0.5

    def test_equal_outcome_statistic_hits_known_maximum(self):
        value = sum(
            qm_pair_probs(a, b)["equal"]
            for a, b in [
                (QUAD.alpha, QUAD.beta),
                (QUAD.alpha, QUAD.beta_prime),
                (QUAD.alpha_prime, QUAD.beta),
            ]
        ) - qm_pair_probs(QUAD.alpha_prime, QUAD.beta_prime)["equal"]
        assert value == pytest.approx(1.0 + math.sqrt(2.0), abs=1e-12)


class TestResidualOracle:
    def test_zero_for_impact_independent_models(self):
        value = quadrature_residual(
            MALUS, MALUS, QUAD, (0.3, 0.1), (0.2, -0.1), (-0.3, 0.2)
        )
        assert value == 0.0

    def test_zero_when_reductions_coincide(self):
        modulated = build_model("impact-modulated", {"epsilon": 0.5})
        value = quadrature_residual(
            modulated, modulated, QUAD, (0.3, 0.1), (0.2, -0.1), (0.2, -0.1)
        )
        assert value == pytest.approx(0.0, abs=1e-15)

    def test_nonzero_for_impact_dependent_models(self):
        modulated = build_model("impact-modulated", {"epsilon": 0.5})
        value = quadrature_residual(
            modulated, modulated, QUAD, (0.3, 0.1), (0.25, 0.18), (-0.2, 0.05)
        )
        assert abs(value) > 1e-3


class TestDiscretizedBound:
    def test_malus_matches_trig_closed_form(self):
        # 64 midpoints integrate degree-4 trig polynomials exactly
        report = discretized_bound_check(MALUS, MALUS, QUAD)
        expected_equal = (
            malus_equal(-math.pi / 8) + malus_equal(math.pi / 8)
            + malus_equal(math.pi / 8) - malus_equal(3 * math.pi / 8)
        )
        assert report.s_equal == pytest.approx(expected_equal, abs=1e-12)
        assert report.s_equal == pytest.approx(1.0 + math.sqrt(2.0) / 2.0, abs=1e-12)
        assert report.within_bound

    @pytest.mark.parametrize("params", [
        {"epsilon": 0.25}, {"epsilon": 0.5},
        {"epsilon": 1.0, "radial_profile": "gaussian", "scale": 0.3},
    ])
    def test_impact_modulated_stays_within_bound(self, params):
        model = build_model("impact-modulated", params)
        report = discretized_bound_check(model, model, QUAD)
        assert report.within_bound
        assert report.s_joint <= 2.0 and report.s_equal <= 2.0

    def test_resource_guard(self):
        with pytest.raises(ResourceError):
            discretized_bound_check(MALUS, MALUS, QUAD, lambda_bins=1024, lattice_bins=128)
        with pytest.raises(ConfigurationError):
            discretized_bound_check(MALUS, MALUS, QUAD, lambda_bins=1)

    def test_custom_lattice(self):
        report = discretized_bound_check(
            DET, DET, QUAD, lattice=Lattice(period=0.5, rotation_center=(0.1, 0.0))
        )
        assert report.within_bound


class TestPairProbCache:
    def test_memoization_returns_same_object(self):
        fn = make_pair_prob_fn(model_1=MALUS, model_2=MALUS)
        first = fn(0.0, math.pi / 8)
        second = fn(0.0, math.pi / 8)
        assert first is second
        assert first["joint"] == pytest.approx(malus_joint(math.pi / 8), abs=1e-9)

    def test_qm_mode(self):
        fn = make_pair_prob_fn(qm=True)
        assert fn(0.1, 0.5)["equal"] == pytest.approx(math.cos(0.4) ** 2, abs=1e-15)
