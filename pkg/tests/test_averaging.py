import math

import numpy as np
import pytest

from estrack import (AveragedSystem, ControllerConfig, LemmaOneParams,
                     NumericError, SaturationCaps, UnsupportedConfigError,
                     asymptotic_schedule, averaged_rhs, dilate_time,
                     dilation_rate, exponential_schedule, lemma1_bound,
                     lemma1_trajectory, lie_bracket, transform_state)

from conftest import make_origin_quadratic
from oracles import BruteForceAverage, reference_decay_solution


class TestLieBracket:
    def test_field_with_itself_vanishes(self):
        f = lambda x, t: np.array([x[0] * x[1], math.sin(x[0]) + t])
        out = lie_bracket(f, f, [0.7, -0.4], 1.3)
        assert np.max(np.abs(out)) <= 1e-8

    def test_linear_scalar_pair(self):
        f = lambda x, t: np.array([x[0]])
        g = lambda x, t: np.array([1.0])
        out = lie_bracket(f, g, [2.0], 0.0)
        assert out == pytest.approx([-1.0], abs=1e-9)

    def test_constant_fields_commute(self):
        f = lambda x, t: np.array([1.0, 2.0])
        g = lambda x, t: np.array([-0.5, 0.25])
        out = lie_bracket(f, g, [0.0, 0.0], 0.0)
        assert np.max(np.abs(out)) <= 1e-12

    def test_nonfinite_field_raises(self):
        f = lambda x, t: np.array([float("nan"), 0.0])
        g = lambda x, t: np.array([1.0, 1.0])
        with pytest.raises(NumericError):
            lie_bracket(f, g, [0.0, 0.0], 0.0)


class TestTransformState:
    def test_identity_at_t0(self):
        for sched in (asymptotic_schedule(1.0, 2.0, 0.5),
                      exponential_schedule(0.1, 0.51)):
            out = transform_state(sched, [1.0, -2.0], sched.t0)
            assert np.array_equal(out, [1.0, -2.0])

    def test_exponential_forward_value(self):
        sched = exponential_schedule(lam=0.1, p=0.51)
        out = transform_state(sched, [1.0, 0.0], 10.0)
        assert out == pytest.approx([math.e, 0.0], rel=1e-14)

    @pytest.mark.parametrize("sched", [
        asymptotic_schedule(1.0, 2.0, 0.5),
        exponential_schedule(0.1, 0.51),
    ])
    def test_round_trip(self, sched):
        vec = np.array([0.3, -1.7])
        for t in (0.0, 1.0, 7.5, 30.0):
            fwd = transform_state(sched, vec, t, "forward")
            back = transform_state(sched, fwd, t, "inverse")
            assert np.max(np.abs(back - vec)) <= 1e-12 * np.max(np.abs(vec))

    def test_caps_rejected(self):
        sched = exponential_schedule(0.1, 0.5, caps=SaturationCaps(nu_max=5.0))
        with pytest.raises(UnsupportedConfigError):
            transform_state(sched, [1.0, 1.0], 1.0)

    def test_bad_direction(self):
        sched = exponential_schedule(0.1, 0.5)
        with pytest.raises(ValueError):
            transform_state(sched, [1.0, 1.0], 1.0, "sideways")


def _cfg(sched, k=(1.0, 0.7), alpha=(0.8, 1.2)):
    return ControllerConfig(dim_n=2, omega=10.0, omega_hat=(1.0, 1.5),
                            alpha=alpha, k=k, schedule=sched)


class TestAveragedRhs:
    def test_equilibrium_constant_optimum(self, const_cost):
        for sched in (asymptotic_schedule(1.0, 2.0, 0.5),
                      exponential_schedule(0.1, 0.51)):
            sys = AveragedSystem(cfg=_cfg(sched), cost=const_cost)
            out = averaged_rhs(sys, [0.0, 0.0], 2.0)
            assert np.max(np.abs(out)) <= 1e-8

    def test_domains_are_consistent(self, const_cost):
        sched = exponential_schedule(0.1, 0.5)
        sys_t = AveragedSystem(cfg=_cfg(sched), cost=const_cost)
        sys_tau = AveragedSystem(cfg=_cfg(sched), cost=const_cost,
                                 domain="dilated-time")
        x = [0.8, -0.3]
        for t in (0.0, 1.0, 4.0):
            tau = dilate_time(sched, t)
            lhs = averaged_rhs(sys_t, x, t)
            rhs = averaged_rhs(sys_tau, x, tau) * dilation_rate(sched, t)
            assert lhs == pytest.approx(rhs, rel=1e-13)

    @pytest.mark.parametrize("sched", [
        asymptotic_schedule(1.0, 2.0, 0.5),
        exponential_schedule(0.1, 0.5),
    ])
    def test_matches_brute_force_average(self, sched, const_cost):
        cfg = _cfg(sched)
        sys = AveragedSystem(cfg=cfg, cost=const_cost)
        oracle = BruteForceAverage(cfg, const_cost)
        for x in ([1.0, -0.5], [-1.5, 0.75]):
            for t in (0.5, 2.0):
                got = averaged_rhs(sys, x, t)
                ref = oracle.t_rhs(x, t)
                assert np.linalg.norm(got - ref) <= 1e-3 * np.linalg.norm(ref)

    def test_exponential_contraction_sign(self):
        # isotropic quadratic: contraction at every t iff k*alpha > 4 lam^2 / kappa1,
        # with the tightest margin at t = t0 where the demodulation gain is 1
        cost = make_origin_quadratic()
        lam = 0.1
        threshold = 4.0 * lam * lam / 2.0
        x = np.array([0.5, -0.25])
        sched = exponential_schedule(lam=lam, p=1.0)

        cfg = _cfg(sched, k=(2.5 * threshold,) * 2, alpha=(1.0, 1.0))
        sys = AveragedSystem(cfg=cfg, cost=cost)
        for t in (0.0, 3.0, 8.0):
            assert float(x @ averaged_rhs(sys, x, t)) < 0.0

        cfg = _cfg(sched, k=(0.5 * threshold,) * 2, alpha=(1.0, 1.0))
        sys = AveragedSystem(cfg=cfg, cost=cost)
        assert float(x @ averaged_rhs(sys, x, 0.0)) > 0.0

    def test_caps_rejected(self, const_cost):
        sched = exponential_schedule(0.1, 0.5, caps=SaturationCaps(phi_max=9.0))
        with pytest.raises(UnsupportedConfigError):
            AveragedSystem(cfg=_cfg(sched), cost=const_cost)

    def test_dimension_mismatch(self, const_cost):
        sys = AveragedSystem(cfg=_cfg(exponential_schedule(0.1, 0.5)),
                             cost=const_cost)
        with pytest.raises(ValueError):
            averaged_rhs(sys, [1.0], 0.0)


class TestLemmaOne:
    def test_homogeneous_closed_form(self):
        params = LemmaOneParams(eps_a=1.0, eps_b=0.0, m1=0.0, m2=-1.0,
                                beta=0.5, v0=1.0)
        values, bounds = lemma1_trajectory(params, [0.0, 1.0])
        assert values[1] == pytest.approx(math.exp(-1.0), abs=1e-6)
        assert np.all(values <= bounds + 1e-6)

    def test_zero_initial_state_stays_zero(self):
        params = LemmaOneParams(eps_a=1.0, eps_b=0.0, m1=0.0, m2=-1.0,
                                beta=0.5, v0=0.0)
        values, _ = lemma1_trajectory(params, np.linspace(0.0, 20.0, 21))
        assert np.all(values == 0.0)

    def test_forced_decay_example(self):
        params = LemmaOneParams(eps_a=2.0, eps_b=1.0, m1=0.0, m2=-1.0,
                                beta=1.0, v0=1.0)
        grid = np.linspace(0.0, 50.0, 201)
        values, bounds = lemma1_trajectory(params, grid)
        assert abs(values[-1]) < 1e-2
        assert np.all(values <= bounds + 1e-6)

    def test_against_scipy_reference(self):
        params = LemmaOneParams(eps_a=2.0, eps_b=1.0, m1=0.0, m2=-1.0,
                                beta=1.0, v0=1.0)
        grid = np.linspace(0.0, 50.0, 51)
        values, _ = lemma1_trajectory(params, grid)
        ref = reference_decay_solution(params, grid)
        assert np.max(np.abs(values - ref)) <= 1e-7

    def test_m1_equals_minus_one_bound_branch(self):
        params = LemmaOneParams(eps_a=2.0, eps_b=0.5, m1=-1.0, m2=-2.0,
                                beta=1.0, v0=1.0)
        grid = np.linspace(0.0, 30.0, 61)
        values, bounds = lemma1_trajectory(params, grid)
        assert np.all(values <= bounds + 1e-6)
        assert bounds[0] == pytest.approx(
            lemma1_bound(params, 0.0), rel=1e-14)

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            LemmaOneParams(eps_a=1.0, eps_b=0.0, m1=-1.5, m2=-2.0, beta=1.0)
        with pytest.raises(ValueError):
            LemmaOneParams(eps_a=0.5, eps_b=0.0, m1=0.0, m2=-1.0, beta=1.0)
        with pytest.raises(ValueError):
            LemmaOneParams(eps_a=2.0, eps_b=0.0, m1=0.0, m2=0.5, beta=1.0)

    def test_grid_validation(self):
        params = LemmaOneParams(eps_a=1.0, eps_b=0.0, m1=0.0, m2=-1.0,
                                beta=0.5, v0=1.0)
        with pytest.raises(ValueError):
            lemma1_trajectory(params, [1.0, 2.0])
        with pytest.raises(ValueError):
            lemma1_trajectory(params, [0.0, 2.0, 1.0])
