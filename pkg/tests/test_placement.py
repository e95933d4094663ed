"""Selection scoring and the three solvers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from crossview import (
    InstanceTooLargeError,
    PlacementProblem,
    Selection,
    VisibilityMatrix,
    evaluate_selection,
    solve_branch_bound,
    solve_exhaustive,
    solve_greedy,
)

from conftest import random_problem
from oracles import coverage_objective_reference


def make_problem(lidar, radar, weights=None, budget=2, threshold=1.0,
                 mode="count", lidar_costs=None, radar_costs=None):
    lidar = np.asarray(lidar, dtype=float)
    radar = np.asarray(radar, dtype=float)
    if weights is None:
        weights = np.ones(lidar.shape[1])
    return PlacementProblem.from_matrices(
        VisibilityMatrix("lidar", lidar),
        VisibilityMatrix("radar", radar),
        np.asarray(weights, dtype=float),
        budget=budget,
        seen_threshold=threshold,
        budget_mode=mode,
        lidar_costs=None if lidar_costs is None else np.asarray(lidar_costs, float),
        radar_costs=None if radar_costs is None else np.asarray(radar_costs, float),
    )


def test_evaluate_selection_single_cell():
    # One cell with v = 1 - 1/e on both modalities: each log term is
    # exactly the unit threshold, so the cell is seen and the objective
    # is the summed visibility, 2 * (1 - 1/e).
    v = 1.0 - math.exp(-1.0)
    problem = make_problem([[v]], [[v]], budget=2)
    result = evaluate_selection(problem, Selection.of([0], [0]))
    assert result.seen.tolist() == [True]
    assert result.objective == pytest.approx(2.0 * v, abs=1e-12)


def test_seen_requires_both_modalities():
    v = 1.0 - math.exp(-1.0)
    problem = make_problem([[v]], [[v]], budget=2)
    lidar_only = evaluate_selection(problem, Selection.of([0], []))
    radar_only = evaluate_selection(problem, Selection.of([], [0]))
    assert not lidar_only.seen[0]
    assert not radar_only.seen[0]
    assert lidar_only.objective == 0.0
    assert radar_only.objective == 0.0


def test_visibilities_accumulate_across_mounts():
    # Two half-strength mounts per modality jointly cross the threshold.
    v = 1.0 - math.exp(-0.5)
    problem = make_problem([[v], [v]], [[v], [v]], budget=4)
    both = evaluate_selection(problem, Selection.of([0, 1], [0, 1]))
    assert both.seen[0]
    assert both.objective == pytest.approx(4.0 * v, abs=1e-12)
    one_each = evaluate_selection(problem, Selection.of([0], [0]))
    assert not one_each.seen[0]


def test_evaluate_selection_ignores_budget():
    v = 1.0 - math.exp(-1.0)
    problem = make_problem([[v], [v]], [[v], [v]], budget=0)
    result = evaluate_selection(problem, Selection.of([0, 1], [0, 1]))
    assert result.objective > 0.0


def test_evaluate_selection_rejects_bad_indices():
    problem = make_problem([[0.5]], [[0.5]])
    with pytest.raises(IndexError):
        evaluate_selection(problem, Selection.of([1], []))
    with pytest.raises(IndexError):
        evaluate_selection(problem, Selection.of([], [-1]))


def test_weights_scale_the_objective():
    v = 1.0 - math.exp(-1.0)
    problem = make_problem([[v, v]], [[v, v]], weights=[1.0, 3.0], budget=2)
    result = evaluate_selection(problem, Selection.of([0], [0]))
    assert result.objective == pytest.approx(2.0 * v * 4.0, abs=1e-12)


def test_exhaustive_picks_the_better_pair():
    v = 1.0 - math.exp(-1.0)
    # Lidar 1 and radar 1 cover a second cell; selecting them dominates.
    lidar = [[v, 0.0], [v, v]]
    radar = [[v, 0.0], [v, v]]
    solution = solve_exhaustive(make_problem(lidar, radar, budget=2))
    assert solution.selection == Selection.of([1], [1])
    assert solution.objective == pytest.approx(4.0 * v, abs=1e-12)
    assert solution.optimal


def test_exhaustive_canonical_tie_break():
    v = 1.0 - math.exp(-1.0)
    # All candidates identical: every one-per-modality pick ties, so the
    # lexicographically smallest index pair must win.
    lidar = [[v], [v]]
    radar = [[v], [v]]
    solution = solve_exhaustive(make_problem(lidar, radar, budget=2))
    assert solution.selection == Selection.of([0], [0])


def test_exhaustive_guard():
    rng = np.random.default_rng(0)
    lidar = rng.uniform(0, 0.9, (11, 4))
    radar = rng.uniform(0, 0.9, (10, 4))
    with pytest.raises(InstanceTooLargeError):
        solve_exhaustive(make_problem(lidar, radar, budget=2))


def test_branch_bound_matches_exhaustive_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(60):
        problem = random_problem(rng)
        bb = solve_branch_bound(problem)
        ex = solve_exhaustive(problem)
        assert bb.objective == ex.objective
        assert bb.selection == ex.selection
        assert bb.optimal and ex.optimal


def test_branch_bound_matches_exhaustive_cost_mode():
    rng = np.random.default_rng(77)
    for _ in range(50):
        problem = random_problem(rng, budget_mode="cost")
        bb = solve_branch_bound(problem)
        ex = solve_exhaustive(problem)
        assert bb.objective == ex.objective
        assert bb.selection == ex.selection


def test_objective_matches_scalar_reference():
    rng = np.random.default_rng(11)
    for _ in range(30):
        problem = random_problem(rng)
        sol = solve_branch_bound(problem)
        expected = coverage_objective_reference(
            problem.lidar_vis.tolist(),
            problem.radar_vis.tolist(),
            problem.weights.tolist(),
            sorted(sol.selection.lidar_ids),
            sorted(sol.selection.radar_ids),
            problem.seen_threshold,
        )
        assert sol.objective == pytest.approx(expected, abs=1e-9)


def test_branch_bound_empty_when_nothing_coverable():
    # Visibilities too weak for any cell to reach the threshold.
    problem = make_problem([[0.3, 0.2]], [[0.25, 0.1]], budget=2)
    solution = solve_branch_bound(problem)
    assert solution.selection == Selection.of()
    assert solution.objective == 0.0
    assert solution.optimal


def test_budget_zero_selects_nothing():
    v = 1.0 - math.exp(-1.0)
    solution = solve_branch_bound(make_problem([[v]], [[v]], budget=0))
    assert solution.selection == Selection.of()


def test_cost_mode_respects_cap():
    v = 1.0 - math.exp(-1.0)
    # The strong pair is unaffordable; the optimizer settles for the
    # affordable weaker pair.
    lidar = [[v, v], [v, 0.0]]
    radar = [[v, v], [v, 0.0]]
    problem = make_problem(
        lidar, radar, budget=4.0, mode="cost",
        lidar_costs=[10.0, 2.0], radar_costs=[10.0, 2.0],
    )
    solution = solve_branch_bound(problem)
    assert solution.selection == Selection.of([1], [1])
    ex = solve_exhaustive(problem)
    assert ex.selection == solution.selection


def test_greedy_never_beats_optimal_and_respects_budget():
    rng = np.random.default_rng(5)
    for _ in range(40):
        problem = random_problem(rng)
        greedy = solve_greedy(problem)
        best = solve_exhaustive(problem)
        assert greedy.objective <= best.objective + 1e-12
        assert greedy.selection.size <= problem.budget
        assert not greedy.optimal


def test_greedy_finds_obvious_optimum():
    v = 1.0 - math.exp(-1.0)
    lidar = [[v, v, 0.0], [0.0, 0.0, v]]
    radar = [[v, v, 0.0], [0.0, 0.0, v]]
    greedy = solve_greedy(make_problem(lidar, radar, budget=2))
    assert greedy.selection == Selection.of([0], [0])
    assert greedy.objective == pytest.approx(4.0 * v, abs=1e-12)


def test_from_matrices_validation():
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5, 0.5]])
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], weights=[1.0, 2.0])
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], weights=[-1.0])
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], threshold=0.0)
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], budget=-1)
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], mode="weird")
    with pytest.raises(ValueError):
        make_problem([[0.5]], [[0.5]], mode="cost")  # costs missing


def test_selection_canonical_key_sorted():
    sel = Selection.of([3, 1], [2])
    assert sel.canonical_key() == ((1, 3), (2,))
    assert sel.size == 3
