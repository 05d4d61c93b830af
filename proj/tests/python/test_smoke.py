"""End-to-end smoke test for the python bindings (plain asserts, no runner)."""

import os
import tempfile

import boxvote as bv


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    # Geometry round trip.
    a = bv.Aabb(center=(0.0, 0.0, 0.0), size=(2.0, 2.0, 2.0), label=1)
    b = bv.Aabb(center=(1.0, 0.0, 0.0), size=(2.0, 2.0, 2.0), label=1)
    assert approx(bv.volume(a), 8.0)
    assert approx(bv.iou_aabb(a, b), 4.0 / 12.0)
    assert bv.contains(a, (1.0, 1.0, 1.0))
    assert not bv.contains(a, (1.1, 0.0, 0.0))

    # Synthetic scene -> weak labels -> votes -> clusters -> masks -> score.
    params = bv.SceneGenParams()
    params.num_objects = 6
    params.points_per_object = 250
    params.background_points = 500
    params.segments_per_object = 4
    params.seed = 42
    gen = bv.gen_scene(params)
    scene, boxes = gen.scene, gen.boxes
    assert scene.size() == 6 * 250 + 500
    assert len(boxes.boxes) == 6
    scene.validate()

    assoc = bv.associate(scene, boxes, bv.AssocStrategy.SmallestBox)
    assert len(assoc.tag) == scene.size()
    assert bv.undecided_fraction(assoc) == 0.0

    votes = bv.simulate_votes(scene, boxes, assoc, bv.VoteNoise())
    votes.validate()
    fg = bv.filter_background(votes, scene.background_class())
    agg = bv.aggregate_votes_by_segment(
        fg, bv.vote_segments(fg, scene.segment_ids))
    assert agg.size() < fg.size()

    clustering = bv.nmc(agg, tau=0.3)
    assert len(clustering.clusters) == 6
    masks = bv.back_project(clustering, agg)
    report = bv.evaluate(masks, bv.gt_masks(scene))
    assert report.map50 == 1.0
    assert report.map25 >= report.map50 >= report.map

    # Losses at the oracle configuration collapse to the score-entropy floor.
    pred = bv.predictions_from_votes(votes, scene, len(scene.class_names))
    targets = bv.make_targets(assoc, scene, boxes)
    assert bv.loss_offset(pred, targets, assoc) == 0.0
    assert bv.loss_total(pred, targets, assoc, scene, boxes) < 1e-5

    # One-call pipeline agrees with the manual chain.
    result = bv.run_pipeline(scene, boxes, bv.PipelineParams())
    assert result.report.map50 == 1.0
    assert len(result.masks) == len(masks)

    # Label-quality benchmark and box degradation.
    quality = bv.label_quality(scene, boxes, bv.AssocStrategy.SmallestBox)
    assert quality.map50 == 1.0
    degraded = bv.degrade_annotations(boxes, 0.5, 0.0, seed=7)
    assert len(degraded.boxes) < len(boxes.boxes)

    # File IO round trip.
    with tempfile.TemporaryDirectory() as d:
        scene_path = os.path.join(d, "scene.json")
        bv.save_scene_json(scene_path, scene, boxes)
        scene2, boxes2 = bv.load_scene_json(scene_path)
        assert scene2.size() == scene.size()
        assert len(boxes2.boxes) == len(boxes.boxes)
        assert boxes2.boxes[0] == boxes.boxes[0]

        masks_path = os.path.join(d, "masks.json")
        bv.save_masks_json(masks_path, masks)
        masks2 = bv.load_masks_json(masks_path)
        assert len(masks2) == len(masks)
        assert masks2[0].points == masks[0].points

    # Deterministic rng contract.
    assert bv.Rng(3).uniform01() == bv.Rng(3).uniform01()
    assert bv.Rng.derive(1, 2) == bv.Rng.derive(1, 2)

    print("python smoke ok")


if __name__ == "__main__":
    main()
