#include "boxvote/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace boxvote {

using nlohmann::json;

std::vector<double> default_thresholds() {
    std::vector<double> t{0.25};
    for (int k = 0; k <= 9; ++k) t.push_back(0.50 + 0.05 * k);
    return t;
}

double mask_iou(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() && b.empty())
        throw std::invalid_argument("mask_iou: both sets empty");
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else ++inter, ++i, ++j;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Descending score, ties by larger mask, then lower first point index, then
// input order. Works for box-proxy evaluation too (same masks carried along).
std::vector<int> pred_order(const std::vector<InstanceMask>& preds) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (preds[x].score != preds[y].score) return preds[x].score > preds[y].score;
        if (preds[x].points.size() != preds[y].points.size())
            return preds[x].points.size() > preds[y].points.size();
        const int fx = preds[x].points.empty() ? -1 : preds[x].points.front();
        const int fy = preds[y].points.empty() ? -1 : preds[y].points.front();
        if (fx != fy) return fx < fy;
        return x < y;
    });
    return order;
}

double ap_from_flags(const std::vector<char>& matched, std::size_t n_gts) {
    if (n_gts == 0) return matched.empty() ? 1.0 : 0.0;
    if (matched.empty()) return 0.0;
    const std::size_t k = matched.size();
    std::vector<double> prec(k);
    int tp = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (matched[i]) ++tp;
        prec[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    }
    for (std::size_t i = k - 1; i-- > 0;)
        prec[i] = std::max(prec[i], prec[i + 1]);
    double ap = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        if (matched[i]) ap += prec[i];
    return ap / static_cast<double>(n_gts);
}

// Greedy matching over an arbitrary pairwise-IoU table.
template <typename IouFn>
MatchResult match_generic(const std::vector<InstanceMask>& preds,
                          std::size_t n_gts, IouFn&& iou, double thresh) {
    const std::vector<int> order = pred_order(preds);
    std::vector<bool> gt_used(n_gts, false);
    std::vector<char> matched;
    matched.reserve(order.size());
    for (int pi : order) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < n_gts; ++g) {
            if (gt_used[g]) continue;
            const double v = iou(pi, g);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_iou >= thresh) {
            gt_used[best] = true;
            matched.push_back(1);
        } else {
            matched.push_back(0);
        }
    }
    MatchResult r;
    r.ap = ap_from_flags(matched, n_gts);
    r.tp = static_cast<int>(std::count(matched.begin(), matched.end(), 1));
    r.fp = static_cast<int>(matched.size()) - r.tp;
    r.fn = static_cast<int>(n_gts) - r.tp;
    return r;
}

Aabb fit_mask_box(const InstanceMask& mask, const SceneCloud& scene) {
    std::vector<Vec3> pts;
    pts.reserve(mask.points.size());
    for (int p : mask.points) {
        if (p < 0 || static_cast<std::size_t>(p) >= scene.size())
            throw std::runtime_error("mask point index " + std::to_string(p) +
                                     " outside the scene");
        pts.push_back(scene.positions[p]);
    }
    return fit_aabb(pts, mask.label);
}

// Shared by mask and box-proxy evaluation; `iou_table(pred_idx, gt_idx)`
// closes over whichever IoU is in use.
template <typename IouMaker>
EvalReport evaluate_impl(const std::vector<InstanceMask>& preds,
                         const std::vector<InstanceMask>& gts,
                         std::vector<double> thresholds, IouMaker&& make_iou) {
    if (thresholds.empty()) thresholds = default_thresholds();
    for (double t : thresholds)
        if (!(t > 0.0 && t <= 1.0))
            throw std::invalid_argument("evaluate: thresholds must be in (0, 1]");

    std::map<int, std::vector<int>> gt_by_class, pred_by_class;
    for (std::size_t i = 0; i < gts.size(); ++i)
        gt_by_class[gts[i].label].push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < preds.size(); ++i)
        pred_by_class[preds[i].label].push_back(static_cast<int>(i));

    EvalReport report;
    report.thresholds = thresholds;
    report.empty_predictions = preds.empty();
    for (const auto& [cls, idx] : pred_by_class) {
        (void)idx;
        if (!gt_by_class.count(cls)) report.ignored_pred_classes.push_back(cls);
    }

    double sum25 = 0, sum50 = 0, summ = 0, sump = 0, sumr = 0;
    for (const auto& [cls, gt_idx] : gt_by_class) {
        std::vector<InstanceMask> cpreds, cgts;
        if (auto it = pred_by_class.find(cls); it != pred_by_class.end())
            for (int i : it->second) cpreds.push_back(preds[i]);
        for (int i : gt_idx) cgts.push_back(gts[i]);
        auto iou = make_iou(cpreds, cgts);

        ClassEval ce;
        ce.class_id = cls;
        for (double t : thresholds) {
            const MatchResult m = match_generic(cpreds, cgts.size(), iou, t);
            ce.ap.push_back(m.ap);
            ce.tp.push_back(m.tp);
            ce.fp.push_back(m.fp);
            ce.fn.push_back(m.fn);
        }
        const MatchResult m50 = match_generic(cpreds, cgts.size(), iou, 0.50);
        ce.precision50 = (m50.tp + m50.fp) > 0
                             ? static_cast<double>(m50.tp) / (m50.tp + m50.fp)
                             : 0.0;
        ce.recall50 = (m50.tp + m50.fn) > 0
                          ? static_cast<double>(m50.tp) / (m50.tp + m50.fn)
                          : 0.0;
        sum25 += match_generic(cpreds, cgts.size(), iou, 0.25).ap;
        sum50 += m50.ap;
        double cm = 0.0;
        for (int k = 0; k <= 9; ++k)
            cm += match_generic(cpreds, cgts.size(), iou, 0.50 + 0.05 * k).ap;
        summ += cm / 10.0;
        sump += ce.precision50;
        sumr += ce.recall50;
        report.classes.push_back(std::move(ce));
    }

    const double nc = static_cast<double>(report.classes.size());
    if (nc > 0) {
        report.map25 = sum25 / nc;
        report.map50 = sum50 / nc;
        report.map = summ / nc;
        report.mprec50 = sump / nc;
        report.mrec50 = sumr / nc;
    }
    return report;
}

}  // namespace

MatchResult match_and_ap(const std::vector<InstanceMask>& preds,
                         const std::vector<InstanceMask>& gts, double iou_thresh) {
    auto iou = [&](int p, std::size_t g) {
        return mask_iou(preds[p].points, gts[g].points);
    };
    return match_generic(preds, gts.size(), iou, iou_thresh);
}

EvalReport evaluate(const std::vector<InstanceMask>& preds,
                    const std::vector<InstanceMask>& gts,
                    std::vector<double> thresholds) {
    return evaluate_impl(preds, gts, std::move(thresholds),
                         [](const std::vector<InstanceMask>& cp,
                            const std::vector<InstanceMask>& cg) {
                             return [&cp, &cg](int p, std::size_t g) {
                                 return mask_iou(cp[p].points, cg[g].points);
                             };
                         });
}

EvalReport evaluate_detection(const std::vector<InstanceMask>& preds,
                              const std::vector<InstanceMask>& gts,
                              const SceneCloud& scene,
                              std::vector<double> thresholds) {
    return evaluate_impl(
        preds, gts, std::move(thresholds),
        [&scene](const std::vector<InstanceMask>& cp,
                 const std::vector<InstanceMask>& cg) {
            auto pb = std::make_shared<std::vector<Aabb>>();
            auto gb = std::make_shared<std::vector<Aabb>>();
            for (const InstanceMask& m : cp) pb->push_back(fit_mask_box(m, scene));
            for (const InstanceMask& m : cg) gb->push_back(fit_mask_box(m, scene));
            return [pb, gb](int p, std::size_t g) {
                return iou_aabb((*pb)[p], (*gb)[g]);
            };
        });
}

std::vector<InstanceMask> gt_masks(const SceneCloud& scene) {
    if (!scene.has_gt())
        throw std::runtime_error("gt_masks: scene has no ground-truth instance labels");
    std::map<int, InstanceMask> by_id;
    for (std::size_t p = 0; p < scene.size(); ++p) {
        const int id = scene.gt_instance_ids[p];
        if (id < 0) continue;
        auto [it, inserted] = by_id.try_emplace(id);
        if (inserted) {
            it->second.label = scene.gt_semantics[p];
            it->second.score = 1.0;
        } else if (it->second.label != scene.gt_semantics[p]) {
            throw std::runtime_error("gt_masks: instance " + std::to_string(id) +
                                     " mixes semantic classes");
        }
        it->second.points.push_back(static_cast<int>(p));
    }
    std::vector<InstanceMask> out;
    out.reserve(by_id.size());
    for (auto& [id, m] : by_id) {
        (void)id;
        out.push_back(std::move(m));
    }
    return out;
}

EvalReport label_quality(const SceneCloud& scene, const BoxAnnotationSet& boxes,
                         AssocStrategy strategy, std::vector<double> thresholds) {
    const Association assoc = associate(scene, boxes, strategy);
    return evaluate(labels_to_masks(assoc, boxes), gt_masks(scene),
                    std::move(thresholds));
}

std::string report_table(const EvalReport& report,
                         const std::vector<std::string>& class_names) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %7s %7s %7s %7s %7s\n", "class", "AP@25",
                  "AP@50", "mAP", "P@50", "R@50");
    out += line;
    auto ap_at = [&](const ClassEval& ce, double t) {
        for (std::size_t i = 0; i < report.thresholds.size(); ++i)
            if (std::abs(report.thresholds[i] - t) < 1e-9) return ce.ap[i];
        return -1.0;  // threshold not evaluated
    };
    for (const ClassEval& ce : report.classes) {
        const std::string name =
            ce.class_id >= 0 && static_cast<std::size_t>(ce.class_id) < class_names.size()
                ? class_names[ce.class_id]
                : "class_" + std::to_string(ce.class_id);
        double m = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < report.thresholds.size(); ++i)
            if (report.thresholds[i] >= 0.5 - 1e-9) m += ce.ap[i], ++n;
        std::snprintf(line, sizeof line, "%-16s %7.3f %7.3f %7.3f %7.3f %7.3f\n",
                      name.c_str(), ap_at(ce, 0.25), ap_at(ce, 0.50),
                      n > 0 ? m / n : -1.0, ce.precision50, ce.recall50);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-16s %7.3f %7.3f %7.3f %7.3f %7.3f\n", "mean",
                  report.map25, report.map50, report.map, report.mprec50,
                  report.mrec50);
    out += line;
    return out;
}

void save_report_json(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& class_names) {
    json classes = json::array();
    for (const ClassEval& ce : report.classes) {
        json jc;
        jc["id"] = ce.class_id;
        if (ce.class_id >= 0 &&
            static_cast<std::size_t>(ce.class_id) < class_names.size())
            jc["name"] = class_names[ce.class_id];
        jc["ap"] = ce.ap;
        jc["tp"] = ce.tp;
        jc["fp"] = ce.fp;
        jc["fn"] = ce.fn;
        jc["precision50"] = ce.precision50;
        jc["recall50"] = ce.recall50;
        classes.push_back(std::move(jc));
    }
    json j;
    j["thresholds"] = report.thresholds;
    j["classes"] = std::move(classes);
    j["mAP25"] = report.map25;
    j["mAP50"] = report.map50;
    j["mAP"] = report.map;
    j["mPrec50"] = report.mprec50;
    j["mRec50"] = report.mrec50;
    j["empty_predictions"] = report.empty_predictions;
    j["ignored_prediction_classes"] = report.ignored_pred_classes;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace boxvote
