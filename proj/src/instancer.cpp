#include "boxvote/instancer.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace boxvote {

VoteSet filter_background(const VoteSet& votes, int background_class) {
    VoteSet out;
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (votes.votes[i].semantic == background_class) continue;
        out.votes.push_back(votes.votes[i]);
        out.expansion.push_back(votes.expansion[i]);
    }
    return out;
}

std::vector<InstanceMask> back_project(const Clustering& clustering,
                                       const VoteSet& votes) {
    clustering.validate(votes.size());

    std::vector<const Cluster*> order;
    order.reserve(clustering.clusters.size());
    for (const Cluster& c : clustering.clusters) order.push_back(&c);
    std::sort(order.begin(), order.end(), [](const Cluster* a, const Cluster* b) {
        return a->representative < b->representative;
    });

    std::vector<InstanceMask> masks;
    masks.reserve(order.size());
    for (const Cluster* c : order) {
        InstanceMask m;
        std::map<int, std::size_t> weight;  // semantic -> expansion points
        for (int v : c->members) {
            m.points.insert(m.points.end(), votes.expansion[v].begin(),
                            votes.expansion[v].end());
            weight[votes.votes[v].semantic] += votes.expansion[v].size();
        }
        std::sort(m.points.begin(), m.points.end());
        m.label = weight.begin()->first;
        std::size_t best = weight.begin()->second;
        for (const auto& [cls, w] : weight)
            if (w > best) m.label = cls, best = w;
        m.score = votes.votes[c->representative].score;
        masks.push_back(std::move(m));
    }
    return masks;
}

std::vector<int> nms(const std::vector<std::pair<Aabb, double>>& boxes,
                     double iou_thresh) {
    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (boxes[a].second != boxes[b].second) return boxes[a].second > boxes[b].second;
        return a < b;
    });
    std::vector<int> kept;
    for (int i : order) {
        bool ok = true;
        for (int k : kept)
            if (iou_aabb(boxes[i].first, boxes[k].first) > iou_thresh) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(i);
    }
    return kept;
}

std::vector<InstanceMask> detector_baseline(const VoteSet& votes,
                                            const SceneCloud& scene,
                                            double nms_thresh,
                                            AssocStrategy strategy) {
    const int bg = scene.background_class();
    const VoteSet fg = filter_background(votes, bg);

    std::vector<std::pair<Aabb, double>> candidates;
    candidates.reserve(fg.size());
    for (const Vote& v : fg.votes) candidates.emplace_back(v.box, v.score);
    const std::vector<int> kept = nms(candidates, nms_thresh);

    BoxAnnotationSet detected;
    std::vector<double> det_score;
    for (int i : kept) {
        Aabb b = fg.votes[i].box;
        b.label = fg.votes[i].semantic;
        detected.boxes.push_back(b);
        det_score.push_back(fg.votes[i].score);
    }
    if (detected.empty()) return {};

    const Association assoc = associate(scene, detected, strategy);
    std::vector<std::vector<int>> points(detected.size());
    for (std::size_t p = 0; p < assoc.size(); ++p)
        if (assoc.tag[p] >= 0) points[assoc.tag[p]].push_back(static_cast<int>(p));

    std::vector<InstanceMask> masks;
    for (std::size_t b = 0; b < detected.size(); ++b) {
        if (points[b].empty()) continue;
        InstanceMask m;
        m.points = std::move(points[b]);
        m.label = detected.boxes[b].label;
        m.score = det_score[b];
        masks.push_back(std::move(m));
    }
    return masks;
}

BoxAnnotationSet masks_to_boxes(const std::vector<InstanceMask>& masks,
                                const SceneCloud& scene) {
    BoxAnnotationSet out;
    out.boxes.reserve(masks.size());
    for (const InstanceMask& m : masks) {
        std::vector<Vec3> pts;
        pts.reserve(m.points.size());
        for (int p : m.points) {
            if (p < 0 || static_cast<std::size_t>(p) >= scene.size())
                throw std::runtime_error("masks_to_boxes: point index " +
                                         std::to_string(p) + " outside the scene");
            pts.push_back(scene.positions[p]);
        }
        out.boxes.push_back(fit_aabb(pts, m.label));
    }
    return out;
}

}  // namespace boxvote
