from qcsched.bounds import (compute_bounds, horizon_bound, max_swap_distance,
                            ps_task_bound, swap_task_bound)
from qcsched.instance import Instance, build_grid_chip, build_preset_chip


def _instance(chip, goals, stages=1):
    return Instance(chip=chip, goals=goals, stages=stages)


def test_max_swap_distance_presets():
    assert max_swap_distance(_instance(build_preset_chip("rigetti-8"),
                                       ((1, 2),))) == 3
    assert max_swap_distance(_instance(build_preset_chip("rigetti-21"),
                                       ((1, 2),))) == 7


def test_horizon_single_stage():
    chip = build_preset_chip("rigetti-8")
    instance = _instance(chip, ((1, 2), (3, 4), (5, 6), (7, 8), (1, 3)))
    # five goals, each up to 3 swaps of 2 cycles plus the slowest gate (4)
    assert horizon_bound(instance) == 5 * (3 * 2 + 4)


def test_horizon_two_stage():
    chip = build_grid_chip(2)
    instance = _instance(chip, ((1, 4),), stages=2)
    single = 1 * ((2 * 2 - 3) * 2 + 4)
    assert horizon_bound(instance) == 2 * single + 1


def test_horizon_no_goals():
    chip = build_grid_chip(2)
    assert horizon_bound(_instance(chip, ())) == 0
    assert horizon_bound(_instance(chip, (), stages=2)) == 1


def test_task_bounds():
    chip = build_preset_chip("rigetti-8")
    one = _instance(chip, ((1, 2), (3, 4), (5, 6), (7, 8), (1, 3)))
    assert ps_task_bound(one) == 5
    assert swap_task_bound(one) == 5
    two = _instance(chip, ((1, 2), (3, 4)), stages=2)
    assert ps_task_bound(two) == 4
    assert swap_task_bound(two) == 4
    assert swap_task_bound(two, multiplier=3) == 12


def test_compute_bounds_wiring():
    chip = build_preset_chip("rigetti-8")
    instance = _instance(chip, ((3, 4),))
    bounds = compute_bounds(instance)
    assert bounds.horizon == horizon_bound(instance)
    assert bounds.swaps_per_gate == 1
    assert bounds.ps_tasks_per_gate == 1
    assert bounds.max_swap_distance == 3
    assert bounds.max_ps_duration == 4
