import math

import numpy as np
import pytest

from oracles import harmonic_tail, one_disk_opt, two_disk_reflection_opt
from touring.approx import (FAT_ACCURACY, PACKING_CONSTANT, RefusedError, choose_algorithm,
                            constant_approx, eps_schedule, group_split, pseudo_approx,
                            rounding_error_decomposition, solve, solve_balls, solve_convex_unions,
                            solve_fat, solve_fat_grouped, trivial_approx)
from touring.certify import brute_oracle, dual_certificate, refine_local
from touring.generators import (gen_random_disjoint_balls, gen_tangent_construction,
                                line_reflection_instance, two_disk_reflection_instance)
from touring.geometry import (Ball, Box, FatMeta, GeometryError, Instance, Segment, Tour, Union,
                              is_valid_tour)

SQRT8 = 2 * math.sqrt(2)
SINGLE = Instance((0, 0), (0, 0), (Ball((3, 0), 1),), disjoint=True)


def _scaled(inst: Instance, k: float) -> Instance:
    regions = tuple(Ball(np.array(b.center) * k, b.radius * k) for b in inst.regions)
    return Instance(np.array(inst.start) * k, np.array(inst.end) * k, regions, (), inst.disjoint)


# ---------------------------------------------------------------------------
# trivial, pseudo and constant approximations


def test_trivial_single_disk_is_optimal():
    t = trivial_approx(SINGLE)
    assert np.allclose(t.points, [(0, 0), (2, 0), (0, 0)])
    assert t.length == 4


def test_trivial_empty_instance():
    inst = Instance((0, 0), (3, 4))
    assert trivial_approx(inst).length == 5


def test_trivial_ratio_on_random_five_disk_instances():
    for seed in range(10):
        inst = gen_random_disjoint_balls(5, 2, seed=seed)
        assert trivial_approx(inst).length <= 11 * brute_oracle(inst).length + 1e-9


def test_pseudo_with_exact_bound():
    assert pseudo_approx(SINGLE, 4.0, 1.0).length <= 8


def test_pseudo_line_reflection():
    t = pseudo_approx(line_reflection_instance(), 4.0, 0.1)
    assert t.length <= SQRT8 + 0.4


def test_pseudo_with_tiny_bound_is_still_valid():
    inst = gen_random_disjoint_balls(4, 2, seed=3)
    opt = brute_oracle(inst).length
    t = pseudo_approx(inst, opt / 100, 1.0)
    assert is_valid_tour(inst, t)


def test_pseudo_rejects_bad_gamma():
    with pytest.raises(GeometryError):
        pseudo_approx(SINGLE, 4.0, 0.0)


def test_constant_single_disk_bracket():
    _, br = constant_approx(SINGLE)
    assert 4 <= br.L <= 16
    assert br.lower <= 4 + 1e-12


def test_constant_empty_instance():
    t, br = constant_approx(Instance((0, 0), (3, 4)))
    assert br.L == 5 and br.B == 1 and t.length == 5


def test_constant_zero_opt_short_circuits():
    inst = Instance((0, 0), (0, 0), (Ball((0, 0), 1), Box((-1, -1), (1, 1))))
    t, br = constant_approx(inst)
    assert t.length == 0 and br.L == 0


def test_constant_bracket_and_iterations_on_random_instances():
    for seed in range(10):
        inst = gen_random_disjoint_balls(int(2 + seed % 6), 2, seed=seed, radius_law="uniform")
        opt = brute_oracle(inst).length
        t, br = constant_approx(inst)
        assert opt - 1e-9 <= br.L <= 4 * opt + 1e-9
        assert br.B <= 4
        n = inst.n
        assert t.info["iterations"] <= math.ceil(math.log2(math.log2(2 * n + 1))) + 3


# ---------------------------------------------------------------------------
# unions of convex bodies


def test_unions_line_reflection():
    t = solve_convex_unions(line_reflection_instance(), 0.01)
    assert t.length <= 1.01 * SQRT8


def test_unions_identical_disks_on_the_line():
    disk = Ball((0, 0), 1)
    inst = Instance((-3, 0), (3, 0), (disk, disk), disjoint=False)
    t = solve_convex_unions(inst, 0.1)
    assert t.length == pytest.approx(6.0, abs=1e-9)
    assert is_valid_tour(inst, t)


def test_unions_picks_the_cheaper_member():
    near, far = Ball((0, 3), 1), Ball((40, 3), 1)
    inst = Instance((-2, 0), (2, 0), (Union((near, far)),), disjoint=True)
    t = solve_convex_unions(inst, 0.1)
    best = min(one_disk_opt((-2, 0), (2, 0), b.center, 1) for b in (near, far))
    assert near.contains(t.points[1], 1e-9)
    assert t.length <= 1.1 * best


def test_unions_mixed_region_types():
    regions = (Box((1, 1), (2, 2)), Segment((4, -1), (4, 1)),
               Union((Ball((7, 3), 0.5), Ball((7, -3), 0.5))))
    inst = Instance((0, 0), (9, 0), regions, disjoint=True)
    t = solve_convex_unions(inst, 0.1)
    assert is_valid_tour(inst, t)
    assert t.length <= 1.1 * brute_oracle(inst, 0.02).length + 1e-9


# ---------------------------------------------------------------------------
# grouping and fat bodies


def test_group_split_forced_two_groups():
    inst = gen_random_disjoint_balls(3, 2, seed=1)
    plan = group_split(inst, 5)
    assert plan.k == 2 and plan.reps == [0, 4]


def test_group_split_uniform_radii_take_first():
    inst = gen_random_disjoint_balls(10, 2, seed=2)
    plan = group_split(inst, 3)
    assert plan.reps == [0] + [g.start for g in plan.groups[1:-1]] + [plan.reps[-1]]
    assert plan.reps[-1] in plan.groups[-1]
    assert sorted(j for g in plan.groups for j in g) == list(range(12))


def test_group_split_reps_minimize_radius():
    rng = np.random.default_rng(3)
    radii = rng.permutation(np.arange(1, 13)) / 10
    balls = tuple(Ball((3.0 * i, 0), r) for i, r in enumerate(radii, start=1))
    inst = Instance((0, 5), (40, 5), balls, disjoint=True)
    plan = group_split(inst, 4)
    full = [0.0] + list(radii) + [0.0]
    for g, rep in zip(plan.groups, plan.reps):
        assert full[rep] == min(full[j] for j in g)
    for rep, anchor in zip(plan.reps[1:-1], plan.anchors[1:-1]):
        assert inst.regions[rep - 1].contains(anchor, 1e-9)


def test_group_split_needs_fat_data():
    inst = Instance((0, 0), (5, 0), (Segment((1, -1), (1, 1)),), disjoint=True)
    with pytest.raises(RefusedError):
        solve_fat(inst, 0.5)


def test_solve_fat_two_far_disks():
    inst = Instance((0, 0), (60, 0), (Ball((10, 5), 1), Ball((50, -5), 1)), disjoint=True)
    assert solve_fat(inst, 0.1).length <= 1.1 * brute_oracle(inst).length


def test_solve_fat_refuses_overlap():
    inst = Instance((0, 0), (5, 0), (Ball((2, 0), 1), Ball((2.5, 0), 1)), disjoint=True)
    with pytest.raises(RefusedError):
        solve_fat(inst, 0.5)
    boxes = Instance((0, 0), (5, 0), (Box((0, 0), (1, 1)), Box((3, 0), (4, 1))), disjoint=False)
    with pytest.raises(RefusedError):
        solve_fat(boxes, 0.5)


def test_solve_fat_boxes_on_a_line():
    boxes = tuple(Box((3.0 * i, 0), (3.0 * i + 1, 1)) for i in range(20))
    fat = tuple(FatMeta(0.5, math.sqrt(2)) for _ in boxes)
    inst = Instance((-2, 3), (62, -1), boxes, fat, disjoint=True)
    eps = 0.1
    t = solve_fat(inst, eps)
    assert is_valid_tour(inst, t)
    cap = 2 * 2 * 2 * (math.ceil(FAT_ACCURACY / eps) + 1)
    assert max(t.info["candidates"]) <= cap
    prefix = Instance((-2, 3), (22, -1), boxes[:8], fat[:8], disjoint=True)
    assert solve_fat(prefix, eps).length <= (1 + eps) * brute_oracle(prefix, 0.02).length + 1e-9


def test_solve_fat_scale_equivariance():
    inst = gen_random_disjoint_balls(6, 2, seed=4)
    a = solve_fat(inst, 0.2).length
    b = solve_fat(_scaled(inst, 10.0), 0.2).length
    assert b == pytest.approx(10 * a, rel=1e-9)


def test_grouped_degenerate_single_subproblem():
    inst = gen_random_disjoint_balls(3, 2, seed=5)
    a = solve_fat_grouped(inst, 0.2)
    b = solve_fat(inst, 0.2)
    assert np.array_equal(a.points, b.points)


def test_grouped_order_independent():
    inst = gen_random_disjoint_balls(20, 2, seed=6)
    a = solve_fat_grouped(inst, 0.25)
    k = a.info["groups"] - 1
    b = solve_fat_grouped(inst, 0.25, order=list(reversed(range(k))))
    assert np.array_equal(a.points, b.points)


def test_grouped_close_to_ungrouped():
    inst = gen_random_disjoint_balls(40, 2, seed=7)
    assert solve_fat_grouped(inst, 0.25).length <= 2.0 * solve_fat(inst, 0.25).length


# ---------------------------------------------------------------------------
# balls


def test_balls_two_disk_reflection():
    inst = two_disk_reflection_instance()
    oracle = brute_oracle(inst)
    assert oracle.length == pytest.approx(two_disk_reflection_opt(), abs=1e-9)
    for eps in (0.5, 0.1, 0.02):
        assert solve_balls(inst, eps).length <= (1 + eps) * oracle.length + 1e-9


def test_balls_single_ball_on_segment():
    inst = Instance((-3, 0), (3, 0), (Ball((0, 0.5), 1),), disjoint=True)
    assert solve_balls(inst, 0.1).length == pytest.approx(6.0, abs=1e-12)


def test_balls_reject_non_balls_and_overlap():
    with pytest.raises(GeometryError):
        solve_balls(line_reflection_instance(), 0.1)
    inst = Instance((0, 0), (5, 0), (Ball((2, 0), 1), Ball((2.5, 0), 1)), disjoint=True)
    with pytest.raises(RefusedError):
        solve_balls(inst, 0.1)


def test_eps_schedule_increases_with_rank():
    vals = [eps_schedule(i, 100, 0.04) for i in range(1, 101)]
    assert vals[0] == vals[2] and vals[-1] == pytest.approx(0.04)
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_balls_3d_small():
    inst = gen_random_disjoint_balls(3, 3, seed=8)
    assert solve_balls(inst, 0.1).length <= 1.1 * brute_oracle(inst).length + 1e-9


# ---------------------------------------------------------------------------
# invariants across solvers


@pytest.mark.parametrize("seed", range(6))
def test_all_solvers_return_valid_tours(seed):
    inst = gen_random_disjoint_balls(5, 2, seed=seed, radius_law="loguniform")
    for algo in ("unions", "fat", "balls"):
        t = solve(inst, 0.2, algo)
        assert is_valid_tour(inst, t)
        assert t.info["algorithm"] == algo


def test_choose_algorithm():
    assert choose_algorithm(gen_random_disjoint_balls(3, 2, seed=1), 0.1) == "balls"
    boxes = Instance((0, 0), (9, 0), (Box((1, 1), (2, 2)), Box((5, 1), (6, 2))), disjoint=True)
    assert choose_algorithm(boxes, 0.1) == "fat"
    assert choose_algorithm(line_reflection_instance(), 0.1) == "unions"


def test_packing_lower_bound_on_unit_disk_grids():
    for rows, cols in [(3, 3), (4, 5), (6, 6)]:
        balls = []
        for r in range(rows):
            order = range(cols) if r % 2 == 0 else reversed(range(cols))
            balls += [Ball((2.5 * c, 2.5 * r), 1.0) for c in order]
        inst = Instance((-2, 0), (-2, 2.5 * (rows - 1)), tuple(balls), disjoint=True)
        t = solve_balls(inst, 0.1)
        assert dual_certificate(inst, t).bound >= PACKING_CONSTANT * len(balls) * 1.0


@pytest.mark.parametrize("n", [30, 100])
def test_tangent_construction_log_gap(n):
    inst = gen_tangent_construction(n)
    eps = 0.1
    assert solve_balls(inst, eps).length <= 8 + eps
    radii = sorted((b.radius for b in inst.regions), reverse=True)
    assert sum(radii[2:]) == pytest.approx(harmonic_tail(n), rel=1e-12)
    assert sum(radii[2:]) >= math.log(n) - 1.6


# ---------------------------------------------------------------------------
# rounding decomposition


def test_rounding_identity_is_zero_for_equal_tours():
    inst = two_disk_reflection_instance()
    opt = refine_local(inst, trivial_approx(inst))
    br = rounding_error_decomposition(opt, opt, inst)
    assert np.all(br.extra1 == 0) and np.allclose(br.extra2, 0, atol=1e-15)


def test_rounding_line_reflection_second_order():
    opt = Tour.from_points([(-1, 1), (0, 0), (1, 1)])
    for delta in (1e-2, 1e-3):
        moved = Tour.from_points([(-1, 1), (delta, 0), (1, 1)])
        br = rounding_error_decomposition(opt, moved)
        expected = math.sqrt(1 + (1 + delta) ** 2) + math.sqrt(1 + (1 - delta) ** 2) - SQRT8
        assert br.total == pytest.approx(expected, rel=1e-6)
        assert br.total / delta ** 2 == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-2)


def test_rounding_identity_on_perturbed_optimum():
    inst = gen_random_disjoint_balls(3, 2, seed=9)
    opt = brute_oracle(inst)
    rng = np.random.default_rng(9)
    pts = opt.points.copy()
    pts[1:-1] += rng.normal(scale=0.05, size=pts[1:-1].shape)
    moved = Tour.from_points(pts)
    br = rounding_error_decomposition(opt, moved, inst)
    lhs = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    assert lhs == pytest.approx(opt.length + br.total, rel=1e-9)


def test_rounding_flags_zero_segments():
    opt = Tour.from_points([(0, 0), (0, 0), (1, 0)])
    br = rounding_error_decomposition(opt, opt)
    assert br.flagged == [0]
