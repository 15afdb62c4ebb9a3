import dataclasses

import numpy as np
import pytest

from psokit.constraints import ConstraintSet, InitializationError, is_feasible
from psokit.engine import (
    ConfigError,
    EvaluationError,
    PRESETS,
    SubSwarmSpec,
    SwarmConfig,
    init_swarm,
    preset_config,
    run,
    step,
)
from psokit.kinematics import ParameterSet, PinnedDraws
from psokit.objectives import ObjectiveSpec, UserObjective, benchmark_spec
from psokit.stopping import StoppingConfig

SPHERE_1D = ObjectiveSpec("sphere", 1, -100.0, 100.0, 0.01)
SPHERE_2D = benchmark_spec("sphere", dimension=2)
BOXED = ObjectiveSpec("sphere", 2, 0.0, 300.0, 0.01)
FEASIBLE = ConstraintSet(box=([50.0, 50.0], [250.0, 250.0]))


def _single(params, objective=SPHERE_1D, mode="none", **kw):
    return SwarmConfig([SubSwarmSpec(1, params)], objective, constraint_mode=mode, **kw)


# --- presets ------------------------------------------------------------------

@pytest.mark.parametrize("name,w,aw2", [("bst", 0.7, 2.0), ("bst_c", 0.7298, 1.49609),
                                        ("bst_p", 0.5, 2.0)])
def test_homogeneous_presets(name, w, aw2):
    cfg = preset_config(name)
    mins = [s for s in cfg.sub_swarms if s.role == "minimizer"]
    assert len(mins) == 1 and mins[0].count == 30
    assert (mins[0].params.w, mins[0].params.iw, mins[0].params.sw) == (w, aw2, aw2)
    assert mins[0].in_clustering_group


def test_gp_preset_composition():
    cfg = preset_config("gp")
    groups = [(s.count, s.role, s.params.w, s.params.iw, s.in_clustering_group)
              for s in cfg.sub_swarms]
    assert groups == [
        (10, "minimizer", 0.7, 2.0, False),
        (10, "minimizer", 0.5, 2.0, True),
        (10, "minimizer", 0.7298, 1.49609, True),
        (5, "maximizer", 0.7, 2.0, False),
    ]
    assert cfg.size == 35
    assert sum(s.count for s in preset_config("gp", maximizers=0).sub_swarms) == 30


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset_config("bst_x")
    assert sorted(PRESETS) == ["bst", "bst_c", "bst_p", "gp"]


def test_config_validation():
    maxi = SubSwarmSpec(5, ParameterSet(0.7, 2, 2), role="maximizer")
    with pytest.raises(ConfigError):
        SwarmConfig([maxi], SPHERE_2D)
    with pytest.raises(ConfigError):
        SubSwarmSpec(0, ParameterSet(0.7, 2, 2))
    params = ParameterSet(0.7, 2, 2)
    with pytest.raises(ConfigError):
        _single(params, mode="bogus")
    nonbox = ConstraintSet(inequalities=[lambda x: x[0]])
    with pytest.raises(ConfigError):
        _single(params, mode="cutoff", constraints=nonbox)
    with pytest.raises(ConfigError):
        _single(params, init_region=([5.0], [1.0]))


# --- initialization ---------------------------------------------------------

def test_init_reproducible_and_inside_box():
    cfg = preset_config("bst", maximizers=0, seed=4)
    a = init_swarm(cfg, np.random.default_rng(4))
    b = init_swarm(cfg, np.random.default_rng(4))
    assert a.x.shape == (30, 30)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.v, b.v)
    assert np.all((a.x >= -100) & (a.x <= 100))


@pytest.mark.parametrize("mode", ["none", "preserve"])
def test_init_stream_order(mode):
    cfg = preset_config("bst", "sphere", dimension=3, maximizers=0, constraint_mode=mode)
    state = init_swarm(cfg, np.random.default_rng(11))
    ref = np.random.default_rng(11)
    x = -100 + 200 * ref.random((30, 3))
    v = -100 + 200 * ref.random((30, 3))  # v_max = half the span
    assert np.array_equal(state.x, x)
    assert np.allclose(state.v, v, rtol=0, atol=1e-12)
    assert state.cgbest == state.pbest_conflict.min()
    assert state.cgworst == state.pbest_conflict.max()


def test_init_region_subbox_then_free_flight():
    cfg = preset_config("bst", SPHERE_2D, maximizers=0, seed=2,
                        init_region=([-75.0, -75.0], [-25.0, -25.0]), t_max=200)
    state = init_swarm(cfg, np.random.default_rng(2))
    assert np.all((state.x >= -75) & (state.x <= -25))
    rng = np.random.default_rng(3)
    left = False
    for _ in range(50):
        step(state, cfg, rng)
        left |= bool(np.any(state.x > -25))
    assert left


def test_preserve_init_feasible():
    cfg = preset_config("bst", BOXED, constraints=FEASIBLE, seed=9)
    state = init_swarm(cfg, np.random.default_rng(9))
    assert all(is_feasible(p, FEASIBLE) for p in state.pbest)


def test_preserve_init_failure_propagates():
    never = ConstraintSet(inequalities=[lambda x: 1.0])
    cfg = preset_config("bst", SPHERE_2D, constraints=never, max_init_attempts=20)
    with pytest.raises(InitializationError):
        run(cfg)


# --- single-step semantics ----------------------------------------------------

def _hand_state(cfg, x, v, pbest, gbest):
    state = init_swarm(cfg, np.random.default_rng(0))
    state.x = np.array([[x]])
    state.v = np.array([[v]])
    state.pbest = np.array([[pbest]])
    state.pbest_conflict = np.array([pbest ** 2])
    state.gbest = np.array([gbest])
    state.cgbest = gbest ** 2
    return state


def test_one_step_hand_trace():
    cfg = _single(ParameterSet(0.7, 2.0, 2.0))
    state = _hand_state(cfg, 20.0, 5.0, 10.0, -4.0)
    step(state, cfg, PinnedDraws([0.25, 0.75]))
    # 0.7*5 + 2*0.25*(10-20) + 2*0.75*(-4-20) = -37.5
    assert state.v.tolist() == [[-37.5]]
    assert state.x.tolist() == [[-17.5]]
    assert state.conflict.tolist() == [306.25]
    assert state.pbest.tolist() == [[10.0]]
    assert state.t == 1


def test_clamped_tie_keeps_incumbent():
    cfg = _single(ParameterSet(0.7, 2.0, 2.0, v_max=10.0))
    state = _hand_state(cfg, 20.0, 5.0, 10.0, -4.0)
    step(state, cfg, PinnedDraws([0.25, 0.75]))
    assert state.v.tolist() == [[-10.0]]
    assert state.conflict.tolist() == [100.0]
    # equal to the stored pbest conflict: no replacement
    assert state.pbest.tolist() == [[10.0]]
    assert state.cgbest == 16.0


def test_fixed_point_at_optimum():
    cfg = preset_config("bst", SPHERE_2D, maximizers=0, velocity_init="zero")
    state = init_swarm(cfg, np.random.default_rng(0))
    for arr in (state.x, state.pbest):
        arr[:] = 0.0
    state.gbest = np.zeros(2)
    state.cgbest = 0.0
    state.pbest_conflict[:] = 0.0
    step(state, cfg, np.random.default_rng(1))
    assert np.all(state.x == 0) and np.all(state.v == 0)
    assert state.cgbest == 0.0 and state.t == 1


def test_group_parameters_applied_per_particle():
    cfg = preset_config("gp", SPHERE_2D, constraint_mode="none")
    state = init_swarm(cfg, np.random.default_rng(0))
    state.x[:] = 1.0
    state.v[:] = 1.0
    state.pbest[:] = 0.0
    state.gbest = np.zeros(2)
    state.gworst = np.full(2, 3.0)
    step(state, cfg, PinnedDraws(0.5))
    expected = np.concatenate([
        np.full(10, 0.7 - 2.0),
        np.full(10, 0.5 - 2.0),
        np.full(10, 0.7298 - 1.49609),
        np.full(5, 0.7 - 1.0 + 2.0),  # pulled towards gworst at 3
    ])
    assert np.allclose(state.v[:, 0], expected, rtol=0, atol=1e-12)
    assert np.array_equal(state.v[:, 0], state.v[:, 1])


def test_maximizer_follows_worst_found_by_minimizer():
    params = ParameterSet(1.0, 2.0, 2.0)
    cfg = SwarmConfig([SubSwarmSpec(1, params), SubSwarmSpec(1, params, role="maximizer")],
                      SPHERE_1D, constraint_mode="none")
    state = init_swarm(cfg, np.random.default_rng(0))
    state.x = np.array([[50.0], [10.0]])
    state.v = np.array([[40.0], [0.0]])
    state.pbest = state.x.copy()
    state.pbest_conflict = np.array([2500.0, 100.0])
    state.gbest, state.cgbest = np.array([10.0]), 100.0
    state.gworst, state.cgworst = np.array([50.0]), 2500.0

    step(state, cfg, PinnedDraws(0.0))
    assert state.x.tolist() == [[90.0], [10.0]]
    assert state.cgworst == 8100.0 and state.gworst.tolist() == [90.0]
    assert state.pbest.tolist() == [[50.0], [10.0]]

    step(state, cfg, PinnedDraws(0.25))
    # maximizer: 0.5*(90-10) towards gworst; minimizer ignores gworst
    assert state.v[1, 0] == 40.0
    assert state.v[0, 0] == 40.0 + 0.5 * (50 - 90) + 0.5 * (10 - 90)


def test_evaluation_failure_aborts():
    bad = UserObjective(lambda x: float("nan"), [-1.0], [1.0])
    with pytest.raises(EvaluationError):
        run(_single(ParameterSet(0.7, 2, 2), objective=bad))


# --- whole runs -------------------------------------------------------------

def test_runs_are_bit_identical():
    cfg = preset_config("gp", "rastrigin", seed=5, t_max=300)
    assert run(cfg) == run(cfg)
    other = run(dataclasses.replace(cfg, seed=6))
    assert other != run(cfg)


def test_tmax_cap():
    # neither set attainable: zero thresholds, stall window of nine steps
    never = StoppingConfig(t_max=10, stall_fraction=0.99, thresholds=(1e-300,) * 7)
    rec = run(preset_config("bst", "sphere", stopping=never))
    assert rec.termination == "tmax" and rec.steps == 10
    assert rec.t.tolist() == list(range(1, 11))
    assert np.all(np.isnan(rec.errors))


def test_constant_objective_stalls_at_first_eligible_step():
    flat = UserObjective(lambda x: 1.0, [-10.0, -10.0], [10.0, 10.0])
    rec = run(preset_config("bst", flat, t_max=1000, maximizers=0))
    assert rec.termination == "set2"
    assert rec.steps == 351


def test_invariants_along_a_run():
    cfg = preset_config("gp", "griewank", seed=3, t_max=400)
    rng = np.random.default_rng(cfg.seed)
    state = init_swarm(cfg, rng)
    seen_min, seen_max = state.conflict.min(), state.conflict.max()
    for _ in range(400):
        prev = state.cgbest
        step(state, cfg, rng)
        assert np.all(np.abs(state.v) <= state.v_max)
        assert state.cgbest <= prev
        seen_min = min(seen_min, state.conflict[state.feasible].min(initial=np.inf))
        seen_max = max(seen_max, state.conflict[state.feasible].max(initial=-np.inf))
        assert state.cgbest == seen_min and state.cgworst == seen_max
    rec = run(cfg)
    assert np.all(np.diff(rec.cgbest) <= 0)


def test_preserve_keeps_memory_feasible():
    cfg = preset_config("bst", BOXED, constraints=FEASIBLE, seed=1, t_max=300)
    rng = np.random.default_rng(1)
    state = init_swarm(cfg, rng)
    infeasible_seen = False
    for _ in range(300):
        step(state, cfg, rng)
        infeasible_seen |= bool((~state.feasible).any())
        assert is_feasible(state.gbest, FEASIBLE)
        assert all(is_feasible(p, FEASIBLE) for p in state.pbest)
    assert infeasible_seen


def test_cutoff_keeps_positions_inside():
    cfg = preset_config("bst", BOXED, constraints=FEASIBLE, constraint_mode="cutoff",
                        seed=1, t_max=100)
    rng = np.random.default_rng(1)
    state = init_swarm(cfg, rng)
    for _ in range(100):
        step(state, cfg, rng)
        assert np.all((state.x >= 50) & (state.x <= 250))


def test_penalty_mode_tracks_raw_and_penalized():
    cfg = preset_config("bst", BOXED, constraints=FEASIBLE, constraint_mode="penalty",
                        seed=2, t_max=500)
    rng = np.random.default_rng(cfg.seed)
    state = init_swarm(cfg, rng)
    for _ in range(300):
        step(state, cfg, rng)
    # infeasible leaders early on push lambda upwards
    assert state.penalty.lam > 1.0
    assert len(state.penalty.history) == 5
    assert np.all(state.conflict >= state.raw_conflict)
    assert np.array_equal(state.conflict[state.feasible], state.raw_conflict[state.feasible])
    rec = run(cfg)
    assert rec.best_raw_conflict <= rec.best_conflict
