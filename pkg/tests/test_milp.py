from dataclasses import replace

import numpy as np
import pytest

from rislink import solvers
from rislink.allocation import validate
from rislink.milp import ModelError, brute_force_optimum, build_model, extract_schedule
from rislink.scenario import ScenarioConfig, generate, precompute

from conftest import tiny_config


def solve_objective(scenario, tables, backend="highs", **kwargs):
    model = build_model(tables, scenario, **kwargs)
    res = solvers.solve(model, backend)
    if res.status == "infeasible":
        return None, None, model
    assert res.status == "optimal"
    return round(res.objective), res, model


class TestBuildModel:
    def test_single_robot_single_bs(self):
        cfg = ScenarioConfig(n_bs=1, n_ris=0, n_robots=1, n_slots=1, n_obstacles=0, k_range=(2, 2))
        s = generate(cfg, 0)
        t = precompute(s)
        model = build_model(t, s)
        families = {name.split("_")[0] for name in model.var_names}
        assert families == {"Xb", "Zb", "O"}
        obj, res, model = solve_objective(s, t)
        assert obj == 0

    def test_uncovered_robot_forced_outage(self):
        cfg = tiny_config(n_bs=1, n_ris=0, n_robots=1, n_slots=3, k_range=(4, 4))
        s = generate(cfg, 0)
        # wall the robot in: blockage everywhere
        from rislink.geometry import Obstacle
        s.obstacles = [Obstacle(0.5, 0.5, 24.5, 24.5)]
        t = precompute(s)
        model = build_model(t, s)
        assert all(model.ub[model.xb(0, 0, n)] == 0 for n in range(3))
        obj, res, _ = solve_objective(s, t)
        assert obj == 1 * 3

    def test_window_infeasibility(self):
        cfg = tiny_config(n_bs=1, n_ris=0, n_robots=1, n_slots=3, k_range=(2, 2))
        s = generate(cfg, 0)
        from rislink.geometry import Obstacle
        s.obstacles = [Obstacle(0.5, 0.5, 24.5, 24.5)]
        t = precompute(s)
        obj, res, _ = solve_objective(s, t)
        assert obj is None

    def test_insufficient_big_m_rejected(self):
        s = generate(tiny_config(), 3)
        t = precompute(s)
        with pytest.raises(ModelError, match="insufficient"):
            build_model(t, s, mu=1e-3)

    def test_explicit_big_m_accepted_when_large(self):
        s = generate(tiny_config(), 3)
        t = precompute(s)
        model = build_model(t, s, mu=1e16)
        assert (model.mu == 1e16).all()

    def test_strengthen_rows_do_not_change_optimum(self):
        for seed in range(6):
            s = generate(tiny_config(), seed)
            t = precompute(s)
            plain = solvers.solve(build_model(t, s, strengthen=False), "highs")
            cut = solvers.solve(build_model(t, s, strengthen=True), "highs")
            assert plain.status == cut.status
            if plain.status == "optimal":
                assert round(plain.objective) == round(cut.objective)


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(25))
    def test_highs_matches_brute_force(self, seed):
        cfg = tiny_config(
            n_bs=1 + seed % 2,
            n_ris=1 + (seed // 2) % 2,
            d_reconfig=1 + seed % 3,
            u_override=1 + seed % 2,
            n_obstacles=2 + seed % 3,
        )
        s = generate(cfg, seed)
        t = precompute(s)
        bf_obj, bf_sched = brute_force_optimum(t, s)
        obj, res, model = solve_objective(s, t)
        assert obj == bf_obj
        if bf_obj is not None:
            assert validate(s, t, bf_sched).ok
            sched = extract_schedule(model, res.values)
            assert validate(s, t, sched).ok

    @pytest.mark.parametrize("seed", range(8))
    def test_bundled_bnb_matches_brute_force(self, seed):
        cfg = tiny_config(n_obstacles=2 + seed % 3, d_reconfig=1 + seed % 2)
        s = generate(cfg, seed)
        t = precompute(s)
        bf_obj, _ = brute_force_optimum(t, s)
        obj, res, model = solve_objective(s, t, backend="bnb")
        assert obj == bf_obj
        if obj is not None:
            assert validate(s, t, extract_schedule(model, res.values)).ok

    def test_guard_rejects_large_instances(self):
        s = generate(tiny_config(n_robots=3, n_slots=5), 0)
        t = precompute(s)
        with pytest.raises(ValueError, match="guard"):
            brute_force_optimum(t, s)


class TestMonotonicity:
    def base(self, seed):
        return tiny_config(n_obstacles=3, u_override=1, d_reconfig=2, k_range=(2, 2))

    @pytest.mark.parametrize("seed", range(5))
    def test_larger_capacity_never_hurts(self, seed):
        cfg = self.base(seed)
        s1 = generate(cfg, seed)
        o1 = brute_force_optimum(precompute(s1), s1)[0]
        s2 = generate(replace(cfg, u_override=2), seed)
        o2 = brute_force_optimum(precompute(s2), s2)[0]
        if o1 is not None:
            assert o2 is not None and o2 <= o1

    @pytest.mark.parametrize("seed", range(5))
    def test_longer_outage_budget_never_hurts(self, seed):
        cfg = self.base(seed)
        s1 = generate(cfg, seed)
        o1 = brute_force_optimum(precompute(s1), s1)[0]
        s2 = generate(replace(cfg, k_range=(4, 4)), seed)
        s2.trajectories = s1.trajectories.copy()
        s2.psi = s1.psi.copy()
        o2 = brute_force_optimum(precompute(s2), s2)[0]
        if o1 is not None:
            assert o2 is not None and o2 <= o1

    @pytest.mark.parametrize("seed", range(5))
    def test_lower_threshold_never_hurts(self, seed):
        cfg = self.base(seed)
        s1 = generate(cfg, seed)
        o1 = brute_force_optimum(precompute(s1), s1)[0]
        s2 = generate(cfg, seed)
        s2.psi = s1.psi / 10.0
        o2 = brute_force_optimum(precompute(s2), s2)[0]
        if o1 is not None:
            assert o2 is not None and o2 <= o1

    @pytest.mark.parametrize("seed", range(5))
    def test_removing_surface_never_helps(self, seed):
        cfg = self.base(seed)
        s1 = generate(cfg, seed)
        o1 = brute_force_optimum(precompute(s1), s1)[0]
        s2 = generate(cfg, seed)
        s2.ris_mounts = s1.ris_mounts[:1]
        s2.config = replace(cfg, n_ris=1)
        o2 = brute_force_optimum(precompute(s2), s2)[0]
        if o2 is not None:
            assert o1 is not None and o1 <= o2


class TestBigMInertness:
    @pytest.mark.parametrize("seed", range(5))
    def test_deactivated_rows_have_slack(self, seed):
        s = generate(tiny_config(), seed)
        t = precompute(s)
        model = build_model(t, s)
        res = solvers.solve(model, "highs")
        if res.status != "optimal":
            return
        x = res.values
        for k in range(model.n_rows):
            name = model.row_names[k]
            if not (name.startswith("snrB") or name.startswith("snrI")):
                continue
            cols, coefs = model.row_cols[k], model.row_coefs[k]
            z_col = cols[1]  # [x, z, interference...]
            if x[z_col] < 0.5:
                continue
            activity = float(coefs @ x[cols])
            rhs = model.row_rhs[k]
            interference = -float(coefs[2:] @ x[cols[2:]])  # psi-scaled sum
            slack_bound = float(x[z_col] * coefs[1]) - interference - rhs
            assert slack_bound > 0
            assert activity - rhs >= slack_bound - 1e-6


class TestExtractSchedule:
    def test_inconsistent_solution_raises(self):
        cfg = ScenarioConfig(n_bs=1, n_ris=0, n_robots=1, n_slots=1, n_obstacles=0, k_range=(2, 2))
        s = generate(cfg, 0)
        t = precompute(s)
        model = build_model(t, s)
        bogus = np.zeros(model.n_vars)  # served flag with no allocation bit
        with pytest.raises(RuntimeError, match="inconsistent"):
            extract_schedule(model, bogus)
