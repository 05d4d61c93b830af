#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "boxvote/pipeline.hpp"
#include "boxvote/rng.hpp"

namespace py = pybind11;
using namespace boxvote;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Instance segmentation from 3D box supervision: weak labels, vote "
              "clustering, back-projection and benchmarks";

    py::class_<Vec3>(m, "Vec3")
        .def(py::init<>())
        .def(py::init<double, double, double>())
        .def(py::init([](const std::array<double, 3>& a) {
            return Vec3{a[0], a[1], a[2]};
        }))
        .def_readwrite("x", &Vec3::x)
        .def_readwrite("y", &Vec3::y)
        .def_readwrite("z", &Vec3::z)
        .def("norm", &Vec3::norm)
        .def("__getitem__",
             [](const Vec3& v, int i) {
                 if (i < 0 || i > 2) throw py::index_error();
                 return v[i];
             })
        .def("__repr__", [](const Vec3& v) {
            return "Vec3(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " +
                   std::to_string(v.z) + ")";
        });
    py::implicitly_convertible<py::iterable, Vec3>();

    py::class_<Aabb>(m, "Aabb")
        .def(py::init<>())
        .def(py::init([](const Vec3& center, const Vec3& size, int label) {
                 Aabb b;
                 b.center = center;
                 b.size = size;
                 b.label = label;
                 return b;
             }),
             py::arg("center"), py::arg("size"), py::arg("label") = 0)
        .def_readwrite("center", &Aabb::center)
        .def_readwrite("size", &Aabb::size)
        .def_readwrite("label", &Aabb::label)
        .def("min_corner", &Aabb::min_corner)
        .def("max_corner", &Aabb::max_corner)
        .def("__eq__", [](const Aabb& a, const Aabb& b) { return a == b; });

    m.def("volume", &volume, py::arg("box"));
    m.def("iou_aabb", &iou_aabb, py::arg("a"), py::arg("b"));
    m.def("contains", &contains, py::arg("box"), py::arg("point"));
    m.def("fit_aabb", &fit_aabb, py::arg("points"), py::arg("label") = 0);

    py::class_<SceneCloud>(m, "SceneCloud")
        .def(py::init<>())
        .def_readwrite("positions", &SceneCloud::positions)
        .def_readwrite("colors", &SceneCloud::colors)
        .def_readwrite("normals", &SceneCloud::normals)
        .def_readwrite("segment_ids", &SceneCloud::segment_ids)
        .def_readwrite("gt_instance_ids", &SceneCloud::gt_instance_ids)
        .def_readwrite("gt_semantics", &SceneCloud::gt_semantics)
        .def_readwrite("class_names", &SceneCloud::class_names)
        .def("size", &SceneCloud::size)
        .def("has_segments", &SceneCloud::has_segments)
        .def("has_gt", &SceneCloud::has_gt)
        .def("background_class", &SceneCloud::background_class)
        .def("validate", &SceneCloud::validate);

    py::class_<BoxAnnotationSet>(m, "BoxAnnotationSet")
        .def(py::init<>())
        .def(py::init([](std::vector<Aabb> boxes) {
            BoxAnnotationSet s;
            s.boxes = std::move(boxes);
            return s;
        }))
        .def_readwrite("boxes", &BoxAnnotationSet::boxes)
        .def("size", &BoxAnnotationSet::size)
        .def("empty", &BoxAnnotationSet::empty);

    m.def("validate_boxes", &validate_boxes, py::arg("boxes"), py::arg("scene"));

    py::class_<VoxelCell>(m, "VoxelCell")
        .def_readonly("index", &VoxelCell::index)
        .def_readonly("point", &VoxelCell::point);

    py::class_<VoxelMap>(m, "VoxelMap")
        .def_readonly("cell_size", &VoxelMap::cell_size)
        .def_readonly("cells", &VoxelMap::cells)
        .def_readonly("point_cell", &VoxelMap::point_cell);

    m.def("voxelize", &voxelize, py::arg("scene"), py::arg("cell_size") = 0.02);

    py::enum_<AssocStrategy>(m, "AssocStrategy")
        .value("DecidedOnly", AssocStrategy::DecidedOnly)
        .value("ClosestBox", AssocStrategy::ClosestBox)
        .value("SmallestBox", AssocStrategy::SmallestBox);

    py::class_<Association>(m, "Association")
        .def_readonly("tag", &Association::tag)
        .def_readonly_static("BACKGROUND", &Association::kBackground)
        .def_readonly_static("UNDECIDED", &Association::kUndecided);

    m.def("associate", &associate, py::arg("scene"), py::arg("boxes"),
          py::arg("strategy") = AssocStrategy::SmallestBox);
    m.def("undecided_fraction", &undecided_fraction, py::arg("assoc"));
    m.def("labels_to_masks", &labels_to_masks, py::arg("assoc"), py::arg("boxes"));
    m.def("degrade_annotations", &degrade_annotations, py::arg("boxes"),
          py::arg("drop_rate"), py::arg("corner_jitter_max"), py::arg("seed"));

    py::class_<TrainingTargets>(m, "TrainingTargets")
        .def_readonly("offset", &TrainingTargets::offset)
        .def_readonly("size", &TrainingTargets::size)
        .def_readonly("sem", &TrainingTargets::sem);

    m.def("make_targets", &make_targets, py::arg("assoc"), py::arg("scene"),
          py::arg("boxes"));

    py::class_<Vote>(m, "Vote")
        .def(py::init<>())
        .def_readwrite("box", &Vote::box)
        .def_readwrite("score", &Vote::score)
        .def_readwrite("semantic", &Vote::semantic);

    py::class_<VoteSet>(m, "VoteSet")
        .def(py::init<>())
        .def_readwrite("votes", &VoteSet::votes)
        .def_readwrite("expansion", &VoteSet::expansion)
        .def("size", &VoteSet::size)
        .def("validate", &VoteSet::validate);

    m.def("vote_segments", &vote_segments, py::arg("votes"), py::arg("segment_ids"));
    m.def("aggregate_votes_by_segment", &aggregate_votes_by_segment, py::arg("votes"),
          py::arg("segments"));
    m.def("filter_background", &filter_background, py::arg("votes"),
          py::arg("background_class"));

    py::class_<VotePrediction>(m, "VotePrediction")
        .def(py::init<>())
        .def_readwrite("offset", &VotePrediction::offset)
        .def_readwrite("size", &VotePrediction::size)
        .def_readwrite("iou", &VotePrediction::iou)
        .def_readwrite("sem_probs", &VotePrediction::sem_probs)
        .def_readwrite("num_classes", &VotePrediction::num_classes)
        .def("validate", &VotePrediction::validate);

    m.def("loss_offset", &loss_offset, py::arg("pred"), py::arg("targets"),
          py::arg("assoc"));
    m.def("loss_size", &loss_size, py::arg("pred"), py::arg("targets"),
          py::arg("assoc"));
    m.def("loss_score", &loss_score, py::arg("pred"), py::arg("assoc"),
          py::arg("scene"), py::arg("boxes"));
    m.def("loss_sem", &loss_sem, py::arg("pred"), py::arg("targets"),
          py::arg("assoc"));
    m.def("loss_total", &loss_total, py::arg("pred"), py::arg("targets"),
          py::arg("assoc"), py::arg("scene"), py::arg("boxes"));
    m.def("bce", &bce, py::arg("target"), py::arg("p"));

    py::class_<Cluster>(m, "Cluster")
        .def(py::init<>())
        .def_readwrite("representative", &Cluster::representative)
        .def_readwrite("members", &Cluster::members);

    py::class_<Clustering>(m, "Clustering")
        .def(py::init<>())
        .def_readwrite("clusters", &Clustering::clusters)
        .def("validate", &Clustering::validate, py::arg("num_votes"));

    py::enum_<NmcMode>(m, "NmcMode")
        .value("Auto", NmcMode::Auto)
        .value("Naive", NmcMode::Naive)
        .value("Grid", NmcMode::Grid);

    m.def("nmc", &nmc, py::arg("votes"), py::arg("tau") = 0.3,
          py::arg("mode") = NmcMode::Auto);
    m.def("spatial_cluster", &spatial_cluster, py::arg("votes"), py::arg("radius"));
    m.def("cluster_per_semantic", &cluster_per_semantic, py::arg("votes"),
          py::arg("inner"));

    py::class_<InstanceMask>(m, "InstanceMask")
        .def(py::init<>())
        .def_readwrite("points", &InstanceMask::points)
        .def_readwrite("label", &InstanceMask::label)
        .def_readwrite("score", &InstanceMask::score);

    m.def("back_project", &back_project, py::arg("clustering"), py::arg("votes"));
    m.def("masks_to_boxes", &masks_to_boxes, py::arg("masks"), py::arg("scene"));
    m.def("detector_baseline", &detector_baseline, py::arg("votes"), py::arg("scene"),
          py::arg("nms_thresh") = 0.25,
          py::arg("strategy") = AssocStrategy::DecidedOnly);
    m.def("mask_iou", &mask_iou, py::arg("a"), py::arg("b"));
    m.def("nms", &nms, py::arg("boxes"), py::arg("iou_thresh"),
          "Kept indices of (box, score) pairs after greedy NMS");

    py::enum_<SceneGenParams::Mode>(m, "OverlapMode")
        .value("None_", SceneGenParams::Mode::None)
        .value("Nested", SceneGenParams::Mode::Nested)
        .value("Touching", SceneGenParams::Mode::Touching);

    py::class_<SceneGenParams>(m, "SceneGenParams")
        .def(py::init<>())
        .def_readwrite("room", &SceneGenParams::room)
        .def_readwrite("num_objects", &SceneGenParams::num_objects)
        .def_readwrite("class_size_ranges", &SceneGenParams::class_size_ranges)
        .def_readwrite("points_per_object", &SceneGenParams::points_per_object)
        .def_readwrite("background_points", &SceneGenParams::background_points)
        .def_readwrite("overlap_mode", &SceneGenParams::overlap_mode)
        .def_readwrite("segments_per_object", &SceneGenParams::segments_per_object)
        .def_readwrite("seed", &SceneGenParams::seed)
        .def("validate", &SceneGenParams::validate);

    py::class_<VoteNoise>(m, "VoteNoise")
        .def(py::init<>())
        .def_readwrite("center_sigma", &VoteNoise::center_sigma)
        .def_readwrite("size_sigma", &VoteNoise::size_sigma)
        .def_readwrite("score_noise_sigma", &VoteNoise::score_noise_sigma)
        .def_readwrite("sem_flip_prob", &VoteNoise::sem_flip_prob)
        .def_readwrite("seed", &VoteNoise::seed)
        .def("validate", &VoteNoise::validate);

    py::class_<GeneratedScene>(m, "GeneratedScene")
        .def_readonly("scene", &GeneratedScene::scene)
        .def_readonly("boxes", &GeneratedScene::boxes);

    m.def("gen_scene", &gen_scene, py::arg("params"));
    m.def("simulate_votes", &simulate_votes, py::arg("scene"), py::arg("boxes"),
          py::arg("assoc"), py::arg("noise"));
    m.def("predictions_from_votes", &predictions_from_votes, py::arg("votes"),
          py::arg("scene"), py::arg("num_classes"));

    py::class_<ClassEval>(m, "ClassEval")
        .def_readonly("class_id", &ClassEval::class_id)
        .def_readonly("ap", &ClassEval::ap)
        .def_readonly("tp", &ClassEval::tp)
        .def_readonly("fp", &ClassEval::fp)
        .def_readonly("fn", &ClassEval::fn)
        .def_readonly("precision50", &ClassEval::precision50)
        .def_readonly("recall50", &ClassEval::recall50);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("thresholds", &EvalReport::thresholds)
        .def_readonly("classes", &EvalReport::classes)
        .def_readonly("ignored_pred_classes", &EvalReport::ignored_pred_classes)
        .def_readonly("map25", &EvalReport::map25)
        .def_readonly("map50", &EvalReport::map50)
        .def_readonly("map", &EvalReport::map)
        .def_readonly("mprec50", &EvalReport::mprec50)
        .def_readonly("mrec50", &EvalReport::mrec50)
        .def_readonly("empty_predictions", &EvalReport::empty_predictions);

    m.def("default_thresholds", &default_thresholds);
    m.def("evaluate", &evaluate, py::arg("preds"), py::arg("gts"),
          py::arg("thresholds") = std::vector<double>{});
    m.def("evaluate_detection", &evaluate_detection, py::arg("preds"), py::arg("gts"),
          py::arg("scene"), py::arg("thresholds") = std::vector<double>{});
    m.def("gt_masks", &gt_masks, py::arg("scene"));
    m.def("label_quality", &label_quality, py::arg("scene"), py::arg("boxes"),
          py::arg("strategy") = AssocStrategy::SmallestBox,
          py::arg("thresholds") = std::vector<double>{});
    m.def("report_table", &report_table, py::arg("report"), py::arg("class_names"));

    py::enum_<PipelineParams::Algo>(m, "ClusterAlgo")
        .value("Nmc", PipelineParams::Algo::Nmc)
        .value("Sc", PipelineParams::Algo::Sc);

    py::class_<PipelineParams>(m, "PipelineParams")
        .def(py::init<>())
        .def_readwrite("strategy", &PipelineParams::strategy)
        .def_readwrite("algo", &PipelineParams::algo)
        .def_readwrite("tau", &PipelineParams::tau)
        .def_readwrite("sc_radius", &PipelineParams::sc_radius)
        .def_readwrite("per_semantic", &PipelineParams::per_semantic)
        .def_readwrite("noise", &PipelineParams::noise)
        .def_readwrite("thresholds", &PipelineParams::thresholds);

    py::class_<PipelineResult>(m, "PipelineResult")
        .def_readonly("assoc", &PipelineResult::assoc)
        .def_readonly("clustered_votes", &PipelineResult::clustered_votes)
        .def_readonly("clustering", &PipelineResult::clustering)
        .def_readonly("masks", &PipelineResult::masks)
        .def_readonly("report", &PipelineResult::report)
        .def_readonly("undecided", &PipelineResult::undecided);

    m.def("run_pipeline", &run_pipeline, py::arg("scene"), py::arg("boxes"),
          py::arg("params") = PipelineParams{});

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("uniform01", &Rng::uniform01)
        .def("uniform", &Rng::uniform, py::arg("lo"), py::arg("hi"))
        .def("uniform_index", &Rng::uniform_index, py::arg("n"))
        .def("normal", &Rng::normal, py::arg("mean") = 0.0, py::arg("sigma") = 1.0)
        .def_static("derive", &Rng::derive, py::arg("seed"), py::arg("index"));

    m.def(
        "load_scene_json",
        [](const std::string& path) {
            BoxAnnotationSet boxes;
            SceneCloud scene = load_scene_json(path, &boxes);
            return py::make_tuple(scene, boxes);
        },
        py::arg("path"), "Returns (scene, boxes); boxes is empty when absent");
    m.def(
        "save_scene_json",
        [](const std::string& path, const SceneCloud& scene,
           const BoxAnnotationSet* boxes) { save_scene_json(path, scene, boxes); },
        py::arg("path"), py::arg("scene"), py::arg("boxes") = nullptr);
    m.def("load_ply", &load_ply, py::arg("path"));
    m.def("load_boxes_json", &load_boxes_json, py::arg("path"));
    m.def("save_boxes_json", &save_boxes_json, py::arg("path"), py::arg("boxes"));
    m.def("load_votes_json", &load_votes_json, py::arg("path"));
    m.def("save_votes_json", &save_votes_json, py::arg("path"), py::arg("votes"));
    m.def("load_masks_json", &load_masks_json, py::arg("path"));
    m.def("save_masks_json", &save_masks_json, py::arg("path"), py::arg("masks"));
    m.def("save_masks_ply", &save_masks_ply, py::arg("path"), py::arg("scene"),
          py::arg("masks"), py::arg("color_seed") = 0);
    m.def("load_clustering_json", &load_clustering_json, py::arg("path"));
    m.def("save_clustering_json", &save_clustering_json, py::arg("path"),
          py::arg("clustering"));
}
