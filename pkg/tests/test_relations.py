import pytest
from hypothesis import given, settings, strategies as st

from visprog3d import relations as R
from visprog3d.relations import DegenerateSegmentError, EmptySetError, ObjectSet, RelationConfig
from visprog3d.scene import Aabb, ObjectInstance, Scene, Vec3

import oracle
from scenegen import random_scene, random_subset, to_oracle


def make(*specs):
    """Scene from (id, label, center[, size]) tuples."""
    objs = []
    for spec in specs:
        oid, label, center = spec[:3]
        size = spec[3] if len(spec) > 3 else (1, 1, 1)
        objs.append(ObjectInstance(oid, label, Aabb(Vec3(*map(float, center)), Vec3(*map(float, size)))))
    return Scene("t", tuple(objs))


def sel(scene, *ids):
    return ObjectSet.of_ids(scene, ids)


KB = make((1, "keyboard", (1, 0, 0.8), (0.4, 0.15, 0.05)),
          (2, "keyboard", (4, 0, 0.8), (0.4, 0.15, 0.05)),
          (3, "door", (5, 0, 1), (1, 0.2, 2)))


def test_closest_keyboard_to_door():
    assert R.closest(sel(KB, 1, 2), sel(KB, 3)).ids == (2,)


def test_farthest_keyboard_from_door():
    assert R.farthest(sel(KB, 1, 2), sel(KB, 3)).ids == (1,)


def test_single_target_wins_regardless():
    assert R.closest(sel(KB, 1), sel(KB, 3)).ids == (1,)
    assert R.farthest(sel(KB, 2), sel(KB, 3)).ids == (2,)


def test_ties_go_to_lowest_id():
    s = make((7, "a", (1, 0, 0)), (2, "a", (-1, 0, 0)), (4, "b", (0, 0, 0)))
    assert R.closest(sel(s, 2, 7), sel(s, 4)).ids == (2,)
    assert R.farthest(sel(s, 2, 7), sel(s, 4)).ids == (2,)


def test_object_is_never_its_own_anchor():
    assert R.closest(sel(KB, 1, 2, 3), sel(KB, 1, 2, 3)).ids == (2,)


NEAR_SCENE = make((1, "a", (0.5, 0, 0)), (2, "a", (3, 0, 0)), (3, "anchor", (0, 0, 0)))


def test_near_filters_by_threshold():
    out = R.near(sel(NEAR_SCENE, 1, 2), sel(NEAR_SCENE, 3), 1.5)
    assert out.ids == (1,) and not out.fallback


def test_near_fallback_is_nearest():
    out = R.near(sel(NEAR_SCENE, 1, 2), sel(NEAR_SCENE, 3), 0.1)
    assert out.ids == (1,) and out.fallback


def test_near_zero_threshold_keeps_coincident():
    s = make((1, "a", (0, 0, 0)), (2, "a", (3, 0, 0)), (3, "b", (0, 0, 0)))
    assert R.near(sel(s, 1, 2), sel(s, 3), 0.0).ids == (1,)


def test_near_uses_config_default():
    cfg = RelationConfig(near_threshold=5.0)
    assert R.near(sel(NEAR_SCENE, 1, 2), sel(NEAR_SCENE, 3), cfg=cfg).ids == (1, 2)


def test_far_is_complement():
    out = R.far(sel(NEAR_SCENE, 1, 2), sel(NEAR_SCENE, 3), 1.5)
    assert out.ids == (2,) and not out.fallback
    out = R.far(sel(NEAR_SCENE, 1, 2), sel(NEAR_SCENE, 3), 10)
    assert out.ids == (2,) and out.fallback


STACK = make((1, "lamp", (0, 0, 1.5), (0.3, 0.3, 0.4)),
             (2, "table", (0, 0, 0.7), (1, 1, 0.1)),
             (3, "lamp", (5, 0, 2.5), (1, 1, 1)))


def test_above_keeps_overlapping_higher_object():
    out = R.above(sel(STACK, 1, 3), sel(STACK, 2))
    assert out.ids == (1,) and not out.fallback


def test_above_excludes_disjoint_footprint():
    out = R.above(sel(STACK, 3), sel(STACK, 2))
    assert out.fallback


def test_below_mirrors_above():
    out = R.below(sel(STACK, 2), sel(STACK, 1, 3))
    assert out.ids == (2,) and not out.fallback


def _on_scene(gap):
    return make((1, "book", (0, 0, 1.0 + gap + 0.1), (0.2, 0.2, 0.2)),
                (2, "table", (0, 0, 0.5), (1, 1, 1)))


@pytest.mark.parametrize("gap, kept", [(0.05, True), (0.5, False), (0.0, True), (0.15, True)])
def test_on_contact_gap(gap, kept):
    s = _on_scene(gap)
    out = R.on(sel(s, 1), sel(s, 2))
    assert out.fallback != kept


def test_higher_and_lower():
    s = make((1, "shelf", (0, 0, 1.2)), (2, "shelf", (3, 0, 0.4)), (3, "shelf", (6, 0, 0.4)))
    assert R.higher(sel(s, 1, 2)).ids == (1,)
    assert R.lower(sel(s, 1, 2, 3)).ids == (2,)
    assert R.higher(sel(s, 2)).ids == (2,)


def test_middle_of_three_chairs():
    s = make((1, "chair", (0, 0, 0)), (2, "chair", (2, 0, 0)), (3, "chair", (9, 0, 0)))
    everyone = sel(s, 1, 2, 3)
    assert R.middle(everyone, everyone).ids == (2,)


def test_middle_symmetric_trio():
    s = make((1, "chair", (-3, 0, 0)), (2, "chair", (0, 0, 0)), (3, "chair", (3, 0, 0)))
    assert R.middle(sel(s, 1, 2, 3)).ids == (2,)


# room centered at the origin; windows ahead along +y
WINDOWS = make((1, "window", (-2, 5, 1)), (2, "window", (2, 5, 1)),
               (3, "floor", (0, 0, -1), (20, 20, 0.1)), (4, "ceiling", (0, 0, 3), (20, 20, 0.1)))


def test_left_without_anchors_is_leftmost():
    out = R.left(sel(WINDOWS, 1, 2))
    assert out.ids == (1,) and "targets-as-anchors" in out.notes
    assert R.leftmost(sel(WINDOWS, 1, 2)).ids == (1,)
    assert R.rightmost(sel(WINDOWS, 1, 2)).ids == (2,)
    assert R.right(sel(WINDOWS, 1, 2)).ids == (2,)


CABINETS = make((1, "window", (-1.5, 5, 1)), (2, "window", (1.0, 5, 1)), (3, "cabinet", (0, 5, 0.5)),
                (4, "floor", (0, 0, -1), (20, 20, 0.1)), (5, "ceiling", (0, 0, 2), (20, 20, 0.1)))


def test_left_of_anchor():
    out = R.left(sel(CABINETS, 1, 2), sel(CABINETS, 3))
    assert out.ids == (1,) and not out.fallback


def test_right_of_anchor():
    assert R.right(sel(CABINETS, 1, 2), sel(CABINETS, 3)).ids == (2,)


def test_left_fallback_when_all_right():
    out = R.left(sel(CABINETS, 2), sel(CABINETS, 3))
    assert out.ids == (2,) and out.fallback


def test_left_deadzone():
    cfg = RelationConfig(lr_deadzone=2.0)
    out = R.left(sel(CABINETS, 1, 2), sel(CABINETS, 3), cfg)
    assert out.fallback and out.ids == (1,)


DEPTH = make((1, "chair", (0, 3, 0)), (2, "table", (0, 5, 0)), (3, "chair", (0, 7, 0)),
             (4, "chair", (0, 5, 0)),
             (5, "floor", (0, 0, -1), (20, 20, 0.1)), (6, "ceiling", (0, 0, 1.5), (20, 20, 0.1)))


def test_front_keeps_closer_to_camera():
    out = R.front(sel(DEPTH, 1, 3), sel(DEPTH, 2))
    assert out.ids == (1,) and not out.fallback


def test_front_fallback_when_only_behind():
    out = R.front(sel(DEPTH, 3), sel(DEPTH, 2))
    assert out.ids == (3,) and out.fallback


def test_behind_mirrors_front():
    out = R.behind(sel(DEPTH, 1, 3), sel(DEPTH, 2))
    assert out.ids == (3,) and not out.fallback


def test_front_equal_depth_excluded():
    assert R.front(sel(DEPTH, 4), sel(DEPTH, 2)).fallback


def test_degenerate_camera_is_nudged():
    # the anchor sits exactly at the room center
    s = make((1, "a", (-1, 0, 0)), (2, "b", (0, 0, 0)), (3, "c", (1, 0, 0)))
    # the eye moves to -y, so the camera faces +y and x < 0 reads as left
    out = R.left(sel(s, 1, 3), sel(s, 2))
    assert out.ids == (1,) and not out.fallback


SEGMENT = make((1, "a", (0, 0, 0)), (2, "b", (10, 0, 0)), (3, "x", (5, 1, 0)), (4, "x", (20, 0, 0)),
               (5, "x", (5, 0, 0)))


def test_between_keeps_point_over_segment():
    out = R.between(sel(SEGMENT, 3, 4), sel(SEGMENT, 1), sel(SEGMENT, 2))
    assert out.ids == (3,) and not out.fallback


def test_between_midpoint_kept():
    assert R.between(sel(SEGMENT, 5), sel(SEGMENT, 1), sel(SEGMENT, 2)).ids == (5,)


def test_between_degenerate_segment():
    with pytest.raises(DegenerateSegmentError):
        R.between(sel(SEGMENT, 3), sel(SEGMENT, 1), sel(SEGMENT, 1))


def test_segment_coordinates():
    s, d_line, d_seg = R.segment_coordinates((20, 3, 0), (0, 0, 0), (10, 0, 0))
    assert (s, d_line, d_seg) == pytest.approx((2.0, 3.0, (100 + 9) ** 0.5))


def test_extremal_properties():
    s = make((1, "box", (0, 0, 0), (1, 1, 1)), (2, "box", (3, 0, 0), (2, 1, 1)), (3, "box", (6, 0, 0), (0.5, 3, 2)))
    everyone = sel(s, 1, 2, 3)
    assert R.extremal(everyone, "MAX", "SIZE").ids == (3,)
    assert R.extremal(sel(s, 1, 2), "MAX", "SIZE").ids == (2,)
    assert R.extremal(everyone, "MAX", "LENGTH").ids == (3,)
    assert R.extremal(everyone, "MIN", "WIDTH").ids == (3,)
    assert R.extremal(everyone, "max", "height").ids == (3,)
    assert R.extremal(sel(s, 2), "MIN", "SIZE").ids == (2,)


def test_empty_sets_raise():
    empty = ObjectSet(KB, ())
    with pytest.raises(EmptySetError):
        R.closest(empty, sel(KB, 3))
    with pytest.raises(EmptySetError):
        R.left(empty)


def test_object_set_rejects_foreign_objects():
    with pytest.raises(ValueError):
        ObjectSet(KB, (STACK.get(1),))


def test_config_validation():
    with pytest.raises(ValueError):
        RelationConfig(near_threshold=-1)


def _compare(scene, rng):
    S = to_oracle(scene)
    T, A, B = (random_subset(rng, S) for _ in range(3))

    def os_(X):
        return ObjectSet.of_ids(scene, [o[0] for o in X])

    pairs = [
        (R.closest(os_(T), os_(A)), oracle.closest(T, A)),
        (R.far(os_(T), os_(A)), oracle.far(T, A)),
        (R.on(os_(T), os_(A)), oracle.on(T, A)),
        (R.right(os_(T), os_(A)), oracle.right(S, T, A)),
        (R.behind(os_(T), os_(A)), oracle.behind(S, T, A)),
        (R.middle(os_(T), os_(A)), oracle.middle(T, A)),
    ]
    for got, (ids, fb) in pairs:
        assert list(got.ids) == ids and got.fallback == fb


@settings(max_examples=150)
@given(st.randoms(use_true_random=False))
def test_agrees_with_oracle(rng):
    _compare(random_scene(rng), rng)


@settings(max_examples=100)
@given(st.randoms(use_true_random=False))
def test_filters_return_subsets(rng):
    scene = random_scene(rng)
    ids = rng.sample([o.id for o in scene.objects], rng.randint(1, len(scene.objects)))
    T = ObjectSet.of_ids(scene, ids)
    A = ObjectSet.everything(scene)
    for out in (R.near(T, A), R.above(T, A), R.on(T, A), R.left(T, A), R.front(T, A)):
        assert out.members and set(out.ids) <= set(T.ids)
        assert list(out.ids) == sorted(out.ids)
        if out.fallback:
            assert len(out) == 1
