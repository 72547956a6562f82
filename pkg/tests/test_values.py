import math
import random

import pytest

from qmu.values import (
    INF,
    NonConvergenceError,
    SolverConfig,
    abs_change,
    deviation,
    eps_above,
    eps_below,
    eps_close,
    ext,
    ext_mul,
    ext_recip,
    value_from_json,
    value_to_json,
)


def sample_values(rng, n, include_extremes=True):
    out = []
    if include_extremes:
        out += [0.0, INF]
    while len(out) < n:
        out.append(rng.choice([rng.uniform(0, 8), rng.choice([0.25, 0.5, 1.0, 2.0, 4.0])]))
    return out


class TestExtMul:
    def test_ordinary_product(self):
        assert ext_mul(2.0, 3.0) == 6.0

    def test_infinity_absorbs(self):
        assert ext_mul(0.5, INF) == INF
        assert ext_mul(INF, 3.0) == INF

    def test_identity(self):
        assert ext_mul(1.0, 7.25) == 7.25

    def test_zero_times_infinity_rejected(self):
        with pytest.raises(ValueError):
            ext_mul(0.0, INF)
        with pytest.raises(ValueError):
            ext_mul(INF, 0.0)


class TestExtRecip:
    def test_zero_maps_to_infinity(self):
        assert ext_recip(0.0) == INF

    def test_infinity_maps_to_zero(self):
        assert ext_recip(INF) == 0.0

    def test_finite(self):
        assert ext_recip(4.0) == 0.25

    def test_involution(self):
        rng = random.Random(7)
        for x in sample_values(rng, 200):
            y = ext_recip(ext_recip(x))
            if x == 0.0 or math.isinf(x):
                assert y == x
            else:
                # round trip through two float divisions: within one ulp
                assert abs(y - x) <= math.ulp(x)

    def test_reverses_order(self):
        rng = random.Random(11)
        vals = sample_values(rng, 100)
        for x in vals:
            for y in vals:
                if x <= y:
                    assert ext_recip(y) <= ext_recip(x)


class TestEpsClose:
    def test_finite_approximation_of_infinity(self):
        # boundary: k >= 1/eps with equality
        assert eps_close(10.0, INF, 0.1)
        assert not eps_close(9.999, INF, 0.1)

    def test_infinity_is_close_to_nothing_finite(self):
        assert not eps_close(INF, 5.0, 0.5)

    def test_finite_boundary(self):
        assert eps_close(1.05, 1.0, 0.05)
        assert not eps_close(1.0500001, 1.0, 0.05)

    def test_infinity_close_to_infinity(self):
        assert eps_close(INF, INF, 0.5)

    def test_eps_domain_validated(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                eps_close(1.0, 1.0, bad)

    def test_above_and_below(self):
        assert eps_above(0.95, 1.0, 0.1)
        assert not eps_above(0.85, 1.0, 0.1)
        assert eps_above(INF, 1.0, 0.1)
        assert eps_above(10.0, INF, 0.1)
        assert not eps_above(5.0, INF, 0.1)

        assert eps_below(1.05, 1.0, 0.1)
        assert not eps_below(1.15, 1.0, 0.1)
        assert eps_below(0.0, 1.0, 0.1)
        # everything sits below some approximation of infinity (inf itself)
        assert eps_below(INF, INF, 0.1)
        assert eps_below(123.0, INF, 0.1)

    def test_deviation_agrees_with_eps_close(self):
        rng = random.Random(13)
        vals = sample_values(rng, 40)
        for k in vals:
            for p in vals:
                for eps in (0.005, 0.1, 0.6):
                    dev = deviation(k, p)
                    if math.isinf(dev) or abs(dev - eps) > 1e-12:
                        assert eps_close(k, p, eps) == (dev <= eps)


class TestClosenessLemma:
    """Scaling and chaining behaviour of the closeness relations."""

    def _scaled_pairs(self, seed):
        rng = random.Random(seed)
        for _ in range(500):
            y = rng.choice([0.0, INF, rng.uniform(0, 6)])
            eps = rng.uniform(0.01, 0.9)
            delta = rng.choice([0.25, 0.5, 1.0, 2.0, 4.0, rng.uniform(0.1, 5.0)])
            dd = max(delta, 1.0 / delta)
            # pick x close to y at the tightened tolerance
            if math.isinf(y):
                x = rng.choice([INF, dd / eps * rng.uniform(1.0, 3.0)])
            else:
                x = max(0.0, y + rng.uniform(-1.0, 1.0) * (eps / dd))
            yield x, y, eps, delta, dd

    def test_scaling_preserves_closeness(self):
        for x, y, eps, delta, dd in self._scaled_pairs(17):
            if eps_close(x, y, eps / dd):
                assert eps_close(delta * x, delta * y, eps)

    def test_scaling_preserves_above_below(self):
        for x, y, eps, delta, dd in self._scaled_pairs(19):
            if eps_above(x, y, eps / dd):
                assert eps_above(delta * x, delta * y, eps)
            if eps_below(x, y, eps / dd):
                assert eps_below(delta * x, delta * y, eps)

    def test_half_tolerance_chains(self):
        rng = random.Random(23)
        for _ in range(500):
            eps = rng.uniform(0.01, 0.9)
            z = rng.choice([0.0, INF, rng.uniform(0, 6)])
            if math.isinf(z):
                y = rng.choice([INF, 2.0 / eps * rng.uniform(1.0, 2.0)])
            else:
                y = max(0.0, z + rng.uniform(-1.0, 1.0) * eps / 2.0)
            if math.isinf(y):
                x = rng.choice([INF, 2.0 / eps * rng.uniform(1.0, 2.0)])
            else:
                x = max(0.0, y + rng.uniform(-1.0, 1.0) * eps / 2.0)
            if eps_close(x, y, eps / 2.0) and eps_close(y, z, eps / 2.0):
                assert eps_close(x, z, eps)
            if eps_above(x, y, eps / 2.0) and eps_above(y, z, eps / 2.0):
                assert eps_above(x, z, eps)
            if eps_below(x, y, eps / 2.0) and eps_below(y, z, eps / 2.0):
                assert eps_below(x, z, eps)


class TestConstructionAndJson:
    def test_ext_rejects_nan_and_negative(self):
        with pytest.raises(ValueError):
            ext(float("nan"))
        with pytest.raises(ValueError):
            ext(-1.0)

    def test_json_round_trip(self):
        for v in (0.0, 1.5, 3.0, INF):
            assert value_from_json(value_to_json(v)) == v
        assert value_to_json(INF) == "inf"
        assert value_to_json(3.0) == 3

    def test_json_rejects_garbage(self):
        for bad in ("nope", None, [1], True, -2):
            with pytest.raises(ValueError):
                value_from_json(bad)

    def test_abs_change(self):
        assert abs_change(INF, INF) == 0.0
        assert abs_change(INF, 5.0) == INF
        assert abs_change(1.0, 1.5) == 0.5

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SolverConfig(tol_fix=0.0)
        with pytest.raises(ValueError):
            SolverConfig(cap=INF)
        with pytest.raises(ValueError):
            SolverConfig(max_iters=0)

    def test_nonconvergence_carries_residual(self):
        err = NonConvergenceError("test loop", 0.25, 10)
        assert err.residual == 0.25
        assert "0.25" in str(err)
