import json
import math

import numpy as np
import pytest

from besovcex import admissible as adm
from besovcex import normest as ne
from besovcex import quark, restrict
from besovcex import seqspace as ss
from besovcex.errors import ParameterError

INF = math.inf


def plain_spec(jmax=12, s=0.5, p=1.0, q=INF):
    seq = ss.construct_lambda(p, q, jmax)
    return quark.CounterexampleSpec(N=2, s=s, p=p, q=q, jmax=jmax, sequence=seq)


BUMP1 = quark.psi_bump(1)
BUMP2 = quark.psi_bump(2)


class TestSlice:
    def test_hand_value_at_station_one(self):
        spec = plain_spec()
        g = restrict.slice_counterexample(spec, BUMP2, 1.0, (-2.0, 14.0), 8)
        i = round((6.0 + 2.0) * 2**8)
        assert g.values[i] == pytest.approx(3 * math.sqrt(2) / 8, rel=1e-12)

    def test_outside_profile_support_is_zero(self):
        spec = plain_spec()
        # supports of the level profiles live inside [0, 3]
        g = restrict.slice_counterexample(spec, BUMP2, 3.5, (-2.0, 14.0), 6)
        assert not np.any(g.values)

    def test_agrees_with_synthesize_then_restrict(self):
        spec = plain_spec(jmax=6)
        coeffs = quark.counterexample_coeffs(spec, jcap=6)
        params = ne.BesovParams(N=2, s=spec.s, p=spec.p, q=spec.q, d=1, M=spec.M)
        for x2 in (1.0, 1.0 + 37 / 256, 1.75):
            direct = restrict.slice_counterexample(spec, BUMP2, x2, (-2.0, 40.0), 7)
            via = quark.synthesize(
                coeffs, BUMP2, params, ((-2.0, 40.0),), 7, x_fixed=(x2,)
            )
            assert np.max(np.abs(direct.values - via.values)) <= 1e-10


class TestBCoefficient:
    def test_single_entry(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0).add((0, 0), 0, (0, 1), 1.0)
        x = 1.37
        b = restrict.b_coefficient(c, BUMP2, (0,), 0, (0,), (x,), 1.0)
        assert b == pytest.approx(float(BUMP1.profile(x - 1)))

    def test_empty_cloud(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0)
        assert restrict.b_coefficient(c, BUMP2, (0,), 0, (0,), (1.4,), 1.0) == 0.0

    def test_partition_bound(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0)
        x = 1.62
        c.add((0, 0), 0, (0, math.floor(x)), 1.0)
        c.add((0, 0), 0, (0, math.floor(x) + 1), 1.0)
        b = restrict.b_coefficient(c, BUMP2, (0,), 0, (0,), (x,), 1.0)
        frac = x - math.floor(x)
        assert b == pytest.approx(
            float(BUMP1.profile(frac)) + float(BUMP1.profile(frac - 1))
        )
        assert 0.0 < b <= 1.0


class TestJFunctional:
    def test_single_hit(self):
        x = 1.29
        c = quark.QuarkCoeffs(ndim=2, rho=2.0)
        c.add((0, 0), 0, (0, math.floor(x)), 1.0)
        assert restrict.j_functional(c, (x,), 1.0, 2.0, 1.0, (0,)) == pytest.approx(1.0)

    def test_delta_miss(self):
        x = 1.29
        c = quark.QuarkCoeffs(ndim=2, rho=2.0)
        c.add((0, 0), 0, (0, math.floor(x)), 1.0)
        assert restrict.j_functional(c, (x,), 1.0, 2.0, 1.0, (1,)) == 0.0

    def test_weight_scales_levels(self):
        x = 1.29
        psi = adm.LogPower(0.25, -1.0)
        c = quark.QuarkCoeffs(ndim=2, rho=2.0)
        c.add((0, 0), 3, (0, math.floor(8 * x)), 1.0)
        plain = restrict.j_functional(c, (x,), 1.0, 2.0, 1.0, (0,))
        tilded = restrict.j_functional(c, (x,), 1.0, 2.0, 1.0, (0,), psi=psi)
        assert tilded == pytest.approx(plain * psi.at_dyadic(3))


class TestLemma41:
    @pytest.mark.parametrize("pq", [(1.0, 2.0), (0.5, 1.0), (2.0, INF)])
    @pytest.mark.parametrize("nfix", [1, 2])
    def test_random_instances(self, pq, nfix):
        p, q = pq
        rng = np.random.default_rng(42)
        ndim = 1 + nfix
        for _ in range(50):
            cloud = quark.QuarkCoeffs(ndim=ndim, rho=3.0)
            x_fixed = tuple(rng.uniform(1.0, 2.0, nfix))
            delta = tuple(int(b) for b in rng.integers(0, 2, nfix))
            for _ in range(int(rng.integers(3, 30))):
                beta = tuple(int(b) for b in rng.integers(0, 4, ndim))
                nu = int(rng.integers(0, 6))
                mp = int(rng.integers(-4, 5))
                mtail = tuple(
                    math.floor(math.ldexp(x_fixed[i], nu))
                    + (delta[i] if rng.uniform() < 0.8 else int(rng.integers(-2, 3)))
                    for i in range(nfix)
                )
                cloud.add(beta, nu, (mp,) + mtail, float(rng.normal()))
            res = restrict.lemma41_check(cloud, x_fixed, p, q, 1.0, 2.0, delta)
            assert res["holds"]

    def test_constant_formula(self):
        # K_a = (1 - 2^-a)^-(N-d) composed per the proof's three factors
        a, p, q, nfix = 1.0, 1.0, 2.0, 2
        k = lambda t: (1.0 - 2.0**-t) ** -nfix
        expect = k(0.5) * k(0.25) * k(0.5) ** 0.5
        assert restrict.lemma41_constant(a, p, q, nfix) == pytest.approx(expect)

    def test_requires_positive_gap(self):
        with pytest.raises(ParameterError):
            restrict.lemma41_constant(0.0, 1.0, 1.0, 1)


class TestRestrictionBound:
    def test_zero_cloud(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0).add((0, 0), 0, (0, 1), 0.0)
        params = ne.BesovParams(N=2, s=0.5, p=1.0, q=1.0, d=1, M=1)
        lhs, rhs, ratio = restrict.restriction_bound_check(
            c, BUMP2, params, (1.0, 2.0), n_quad=4, level=6
        )
        assert lhs == 0.0

    def test_single_quark_finite_ratio(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0).add((0, 0), 0, (0, 1), 1.0)
        params = ne.BesovParams(N=2, s=0.5, p=1.0, q=1.0, d=1, M=1)
        lhs, rhs, ratio = restrict.restriction_bound_check(
            c, BUMP2, params, (1.0, 2.0), n_quad=8, level=7
        )
        assert 0 < lhs < INF and 0 < ratio < INF

    def test_requires_q_at_most_p(self):
        c = quark.QuarkCoeffs(ndim=2, rho=2.0).add((0, 0), 0, (0, 1), 1.0)
        params = ne.BesovParams(N=2, s=0.5, p=1.0, q=2.0, d=1, M=1)
        with pytest.raises(ParameterError):
            restrict.restriction_bound_check(c, BUMP2, params, (1.0, 2.0))


class TestDivergenceScan:
    def test_plain_scan_all_divergent(self):
        spec = plain_spec(jmax=14)
        report = restrict.restriction_divergence_scan(spec, n_samples=50, seed=7)
        assert report.fraction_divergent == 1.0
        assert np.all(np.diff(report.curves, axis=1) >= 0)

    def test_weighted_scan_identity(self):
        psi = adm.LogPower(0.25, -1.0)
        seq = ss.construct_weighted_lambda(1.0, INF, psi, 30)
        spec = quark.CounterexampleSpec(
            N=2, s=0.5, p=1.0, q=INF, jmax=30, sequence=seq, psi=psi, mode="weighted"
        )
        report = restrict.restriction_divergence_scan(spec, n_samples=40, seed=5)
        ident = report.extra["identity"]
        assert ident["max_deviation"] <= 1e-9
        # the weighted witness at a covered level is the beta partial sum
        beta = np.array([psi.at_dyadic(j) for j in range(31)])
        x = float(report.samples[0])
        for j in range(1, 31):
            lam = seq.lookup(j, math.floor(math.ldexp(x, j)))
            if lam:
                expect = np.sum(beta[: j + 1])
                assert psi.at_dyadic(j) * 2.0**j * lam == pytest.approx(expect)

    def test_report_serialization(self, tmp_path):
        spec = plain_spec(jmax=10)
        report = restrict.restriction_divergence_scan(spec, n_samples=5, seed=3)
        payload = json.loads(report.to_json())
        assert set(payload) >= {"mode", "samples", "curves", "verdicts"}
        path = tmp_path / "curves.csv"
        with open(path, "w") as fh:
            report.write_csv(fh)
        lines = path.read_text().splitlines()
        assert lines[0] == "sample_index,sample,jmax,value"
        assert len(lines) == 1 + 5 * 11


class TestEmbeddingScan:
    def test_mode_preconditions(self):
        spec = plain_spec(jmax=8, s=0.5)
        with pytest.raises(ParameterError):
            restrict.embedding_failure_scan(spec, "holder", n_samples=4)
        with pytest.raises(ParameterError):
            restrict.embedding_failure_scan(spec, "bmo", n_samples=4)
        spec2 = plain_spec(jmax=8, s=1.5)
        with pytest.raises(ParameterError):
            restrict.embedding_failure_scan(spec2, "weaklp", n_samples=4)

    def test_weaklp_exponent(self):
        spec = plain_spec(jmax=10, s=0.5)
        rep = restrict.embedding_failure_scan(spec, "weaklp", n_samples=10, seed=1)
        assert rep.extra["weak_r"] == pytest.approx(2.0)

    def test_bmo_witness_proportional_to_profile(self):
        spec = plain_spec(jmax=10, s=1.0)
        rep = restrict.embedding_failure_scan(spec, "bmo", n_samples=10, seed=1)
        # bmo curves are running maxima of c' Lambda_k, so strictly positive
        assert np.all(rep.curves[:, -1] > 0)
        assert rep.fraction_divergent == 1.0

    def test_holder_matches_plain_witness(self):
        spec = plain_spec(jmax=12, s=1.5)
        rep_h = restrict.embedding_failure_scan(spec, "holder", n_samples=12, seed=2)
        rep_d = restrict.restriction_divergence_scan(spec, n_samples=12, seed=2)
        assert np.allclose(rep_h.curves, rep_d.curves)


class TestWeightedMembership:
    def test_bounded_witness_under_convergent_series(self):
        spec = plain_spec(jmax=30, s=0.5, p=2.0, q=INF)
        psi = adm.LogPower(0.25, -1.0)  # chi = p = 2: series converges
        out = restrict.weighted_membership_check(spec, psi, n_samples=50, seed=3)
        assert out["weighted_max"] <= 1.0
        assert out["control_min"] > out["weighted_max"]

    def test_divergent_series_rejected(self):
        spec = plain_spec(jmax=10, s=0.5, p=1.0, q=INF)
        psi = adm.LogPower(0.25, -1.0)  # chi = 1: series diverges
        with pytest.raises(ParameterError):
            restrict.weighted_membership_check(spec, psi, n_samples=4)

    def test_boundary_weight_keeps_zeta_witness_at_one(self):
        # the unweighted construction against the borderline weight: the
        # weighted witness values are j/(j+2) <= 1 at covered levels
        psi = adm.LogPower(0.25, -1.0)
        seq = ss.construct_lambda(1.0, INF, 30)
        samples = restrict.draw_samples(40, 11, depth=36)
        w = restrict.witness_matrix(seq, samples, 1.0, 30)
        weights = np.array([psi.at_dyadic(j) for j in range(31)])
        weighted = w * weights
        assert np.max(weighted) <= 1.0
        covered = w > 0
        js = np.broadcast_to(np.arange(31), w.shape)
        assert np.allclose(
            weighted[covered], (js / (js + 2.0))[covered], rtol=1e-12
        )

    def test_grid_plateau(self):
        spec = plain_spec(jmax=12, s=0.5, p=2.0, q=INF)
        psi = adm.LogPower(0.25, -1.0)
        out = restrict.weighted_membership_check(
            spec, psi, n_samples=8, seed=3, grid_levels=(7, 9), n_grid_samples=2
        )
        assert all(g >= 0 for g in out["grid_rel_growth"])


class TestEmbeddingInequality:
    def test_random_sequences(self):
        rng = np.random.default_rng(17)
        psi = adm.LogPower(0.25, -1.0)
        for _ in range(25):
            runs = []
            for j in range(1, 9):
                length = int(rng.integers(1, (1 << j) + 1))
                runs.append(ss.LevelRun(j, 1 << j, length, float(rng.uniform(0, 2))))
            seq = ss.DyadicSequence(tuple(runs), 8)
            for (p, q, r) in ((1.0, 2.0, 1.0), (2.0, INF, 1.5), (1.0, 3.0, 0.5)):
                lhs, rhs, holds = restrict.embedding_inequality_check(seq, p, q, r, psi)
                assert holds

    def test_counterexample_sequence(self):
        seq = ss.construct_lambda(1.0, INF, 20)
        psi = adm.LogPower(0.25, -2.0)
        lhs, rhs, holds = restrict.embedding_inequality_check(seq, 1.0, INF, 1.0, psi)
        assert holds and np.isfinite(rhs)

    def test_exponent_guards(self):
        seq = ss.construct_lambda(1.0, INF, 6)
        psi = adm.Constant(1.0)
        with pytest.raises(ParameterError):
            restrict.embedding_inequality_check(seq, 1.0, 2.0, 1.5, psi)  # r > p
        with pytest.raises(ParameterError):
            restrict.embedding_inequality_check(seq, 1.0, 1.0, 1.0, psi)  # r = q


class TestGridFunctionalCoherence:
    def test_slice_norm_dominated_by_pinned_functionals(self):
        # the grid norm of a slice stays below the sum over delta of the
        # pinned-index functionals, uniformly over random clouds
        rng = np.random.default_rng(77)
        for _ in range(8):
            cloud = quark.QuarkCoeffs(ndim=2, rho=3.0)
            x2 = float(rng.uniform(1.0, 2.0))
            for _ in range(int(rng.integers(4, 16))):
                beta = (int(rng.integers(0, 2)), int(rng.integers(0, 2)))
                nu = int(rng.integers(0, 4))
                mp = int(rng.integers(-3, 4))
                m2 = math.floor(math.ldexp(x2, nu)) + int(rng.integers(0, 2))
                cloud.add(beta, nu, (mp, m2), float(rng.uniform(0.1, 1.0)))
            params = ne.BesovParams(N=2, s=0.5, p=1.0, q=2.0, d=1, M=1)
            g = quark.synthesize(cloud, BUMP2, params, ((-6.0, 6.0),), 8, x_fixed=(x2,))
            gridnorm = ne.besov_seminorm(g, params.for_dim(1), range(0, 6)).total
            jsum = sum(
                restrict.j_functional(cloud, (x2,), 1.0, 2.0, 2.0, d)
                for d in ((0,), (1,))
            )
            assert gridnorm <= 2.0 * jsum

    def test_three_dimensional_slices(self):
        # d = N - 1 = 2: stations sit on the diagonal of the leading plane
        seq = ss.construct_lambda(1.0, INF, 8)
        spec = quark.CounterexampleSpec(N=3, s=0.5, p=1.0, q=INF, jmax=8, sequence=seq)
        bump3 = quark.psi_bump(3)
        coeffs = quark.counterexample_coeffs(spec, jcap=3)
        params = ne.BesovParams(N=3, s=0.5, p=1.0, q=INF, d=2, M=1)
        box = ((4.0, 8.0), (4.0, 8.0))
        direct = restrict.slice_counterexample(spec, bump3, 1.0, box, 5)
        via = quark.synthesize(coeffs, bump3, params, box, 5, x_fixed=(1.0,))
        assert np.max(np.abs(direct.values - via.values)) <= 1e-10
        rep = restrict.restriction_divergence_scan(spec, n_samples=20, seed=4)
        assert rep.fraction_divergent == 1.0

    def test_low_integrability_spec_end_to_end(self):
        # p < 1 raises the regularity floor: sigma_p = 2 at p = 1/2, N = 2
        seq = ss.construct_lambda(0.5, 1.0, 20)
        spec = quark.CounterexampleSpec(N=2, s=2.5, p=0.5, q=1.0, jmax=20, sequence=seq)
        assert spec.M == 3 and spec.station_gap == 10
        rep = restrict.restriction_divergence_scan(spec, n_samples=30, seed=3)
        assert rep.fraction_divergent == 1.0
        hol = restrict.embedding_failure_scan(spec, "holder", n_samples=20, seed=3)
        assert hol.fraction_divergent == 1.0


class TestSampling:
    def test_deterministic(self):
        a = restrict.draw_samples(16, 123)
        b = restrict.draw_samples(16, 123)
        assert np.array_equal(a, b)

    def test_range_and_non_dyadic(self):
        xs = restrict.draw_samples(64, 5, depth=20)
        assert np.all((xs >= 1.0) & (xs < 2.0))
        scaled = np.ldexp(xs, 20)
        assert not np.any(scaled == np.floor(scaled))
