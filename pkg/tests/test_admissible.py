import math

import numpy as np
import pytest

from besovcex import admissible as adm
from besovcex.errors import DomainError, ParameterError

INF = math.inf


class TestEvaluation:
    def test_constant(self):
        psi = adm.Constant(1.0)
        for t in (1e-9, 0.3, 1.0):
            assert psi(t) == 1.0

    def test_logpow_substitution(self):
        psi = adm.LogPower(0.5, 1.0)
        assert psi(0.5) == pytest.approx(2.0)  # |log2(1/4)|

    def test_logpow_dyadic(self):
        psi = adm.LogPower(0.25, -1.0)
        for j in range(0, 40):
            assert psi.at_dyadic(j) == pytest.approx(1.0 / (j + 2))
            if j <= 30:
                assert psi(2.0**-j) == pytest.approx(1.0 / (j + 2))

    def test_domain(self):
        psi = adm.LogPower(0.5, 1.0)
        with pytest.raises(DomainError):
            psi(0.0)
        with pytest.raises(DomainError):
            psi(1.5)

    def test_loglogpow_parameter_guard(self):
        with pytest.raises(ParameterError):
            adm.LogLogPower(0.5, 1.0)  # |log2(c x)| = 1 at t = 1
        with pytest.raises(ParameterError):
            adm.LogLogPower(0.7, 1.0)
        psi = adm.LogLogPower(0.25, -1.0)
        assert psi(1.0) == pytest.approx(1.0)  # log2|log2(1/4)| = 1

    def test_bad_family_parameters(self):
        with pytest.raises(ParameterError):
            adm.Constant(0.0)
        with pytest.raises(ParameterError):
            adm.LogPower(1.5, 1.0)

    def test_monotone_direction(self):
        up = adm.LogPower(0.25, -1.0)   # grows with t
        down = adm.LogPower(0.25, 2.0)  # falls with t
        t = 2.0 ** -np.arange(0, 30)
        assert np.all(np.diff(up(t)) <= 0)    # t decreasing along the grid
        assert np.all(np.diff(down(t)) >= 0)
        assert up.direction == "increasing"
        assert down.direction == "decreasing"


class TestAdmissibilityCheck:
    def test_constant(self):
        ratio, monotone = adm.admissibility_check(adm.Constant(2.0))
        assert ratio == 1.0 and monotone

    def test_logpow_doubling_ratio(self):
        ratio, monotone = adm.admissibility_check(adm.LogPower(0.5, 1.0), jmax=512)
        assert monotone
        assert ratio <= 2.0 and ratio > 1.9  # (1+2j)/(1+j) climbs toward 2

    def test_logpow_cubed(self):
        ratio, _ = adm.admissibility_check(adm.LogPower(0.5, -3.0), jmax=512)
        assert ratio <= 8.0 and ratio > 7.0


class TestCInfinity:
    def test_constant(self):
        assert adm.c_infinity(adm.Constant(3.0)) == pytest.approx(0.0, abs=1e-12)

    def test_logpow_negative_power(self):
        assert adm.c_infinity(adm.LogPower(0.25, -1.0)) == pytest.approx(1.0)

    def test_logpow_positive_power(self):
        # ratio (1+u)/(1+2u) <= 1 so the sup sits at t = 1
        assert adm.c_infinity(adm.LogPower(0.5, 1.0)) == pytest.approx(0.0, abs=1e-9)

    def test_scaling_invariance(self):
        base = adm.LogPower(0.25, -1.0)
        scaled = adm.Tabulated([3.0 * base.at_dyadic(j) for j in range(161)])
        a = adm.c_infinity(base)
        b = adm.c_infinity(scaled, grid_size=512)
        assert b == pytest.approx(a, abs=0.05)  # tabulated tail is clipped

    def test_grid_size_guard(self):
        with pytest.raises(ParameterError):
            adm.c_infinity(adm.Constant(1.0), grid_size=1)


class TestWeightSeries:
    def test_convergent_logpow(self):
        psi = adm.LogPower(0.25, -1.0)
        res = adm.weight_series(psi, 2.0, 10**6)
        assert res.verdict == "converges" and res.analytic
        # tail sum_{j>=1} (j+2)^-2 = pi^2/6 - 1 - 1/4
        assert res.partial_sum == pytest.approx(math.pi**2 / 6 - 1.25, abs=1e-3)

    def test_divergent_logpow(self):
        res = adm.weight_series(adm.LogPower(0.25, -1.0), 1.0, 10**4)
        assert res.verdict == "diverges" and res.analytic

    def test_constant_diverges(self):
        for chi in (0.5, 1.0, 7.0):
            assert adm.weight_series(adm.Constant(1.0), chi, 100).verdict == "diverges"

    def test_loglog_always_diverges(self):
        psi = adm.LogLogPower(0.25, -3.0)
        res = adm.weight_series(psi, 5.0, 1000)
        assert res.verdict == "diverges" and res.analytic

    def test_chi_guard(self):
        with pytest.raises(ParameterError):
            adm.weight_series(adm.Constant(1.0), 0.0, 10)

    def test_threshold_consistency_with_c_infinity(self):
        # for b < 0: convergence of the chi-series iff chi > 1/c_inf = 1/|b|
        for b in (-0.5, -1.0, -2.0):
            psi = adm.LogPower(0.25, b)
            cinf = adm.c_infinity(psi)
            assert cinf == pytest.approx(-b, abs=1e-9)
            for chi in (0.9 / cinf, 1.1 / cinf):
                verdict = adm.weight_series(psi, chi, 100).verdict
                assert verdict == ("converges" if chi > 1.0 / cinf else "diverges")


class TestTabulated:
    def test_heuristic_verdicts(self):
        decay = adm.Tabulated([(j + 2.0) ** -2 for j in range(200)])
        res = adm.weight_series(decay, 1.0, 150)
        assert not res.analytic and res.verdict == "converges"
        flat = adm.Tabulated([1.0 + 1.0 / (j + 1) for j in range(200)])
        res = adm.weight_series(flat, 1.0, 150)
        assert not res.analytic and res.verdict == "diverges"

    def test_nonmonotone_rejected(self):
        with pytest.raises(ParameterError):
            adm.Tabulated([1.0, 2.0, 1.5])


class TestParsing:
    def test_constant(self):
        psi = adm.parse_weight("constant:2.5")
        assert isinstance(psi, adm.Constant) and psi.a == 2.5

    def test_logpow(self):
        psi = adm.parse_weight("logpow:c=0.25,b=-1")
        assert isinstance(psi, adm.LogPower)
        assert (psi.c, psi.b) == (0.25, -1.0)

    def test_loglogpow(self):
        psi = adm.parse_weight("loglogpow:c=0.25,b=-1")
        assert isinstance(psi, adm.LogLogPower)

    def test_roundtrip(self):
        for spec in ("constant:1.0", "logpow:c=0.25,b=-1.0", "loglogpow:c=0.125,b=2.0"):
            assert adm.parse_weight(adm.parse_weight(spec).spec_string()) is not None

    def test_errors(self):
        for bad in ("nope", "gauss:1", "logpow:c=0.25"):
            with pytest.raises(ParameterError):
                adm.parse_weight(bad)
