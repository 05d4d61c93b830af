#include "boxvote/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boxvote {

namespace {

constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

}  // namespace

void VotePrediction::validate(std::size_t n) const {
    if (offset.size() != n || size.size() != n || iou.size() != n)
        throw std::runtime_error("prediction: per-point arrays must have length " +
                                 std::to_string(n));
    if (num_classes <= 0 || sem_probs.size() != n * static_cast<std::size_t>(num_classes))
        throw std::runtime_error("prediction: sem_probs must be N x num_classes");
    for (std::size_t p = 0; p < n; ++p)
        for (int c = 0; c < 3; ++c)
            if (!(size[p][c] > 0.0))
                throw std::runtime_error("prediction: size[" + std::to_string(p) +
                                         "] must be positive");
}

double bce(double target, double p) {
    const double q = clamp_prob(p);
    return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

std::vector<double> normalize_probs(const std::vector<double>& scores) {
    double sum = 0.0;
    for (double s : scores) {
        if (s < 0.0) throw std::invalid_argument("normalize_probs: negative score");
        sum += s;
    }
    std::vector<double> out(scores.size());
    if (sum <= 0.0) {
        if (scores.empty()) return out;
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(scores.size()));
        return out;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] / sum;
    return out;
}

double loss_offset(const VotePrediction& pred, const TrainingTargets& targets,
                   const Association& assoc) {
    pred.validate(assoc.size());
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < assoc.size(); ++p) {
        if (!assoc.is_foreground(p)) continue;
        sum += (targets.offset[p] - pred.offset[p]).l1_norm();
        ++n;
    }
    if (n == 0) throw std::runtime_error("loss_offset: no foreground points");
    return sum / static_cast<double>(n);
}

double loss_size(const VotePrediction& pred, const TrainingTargets& targets,
                 const Association& assoc) {
    pred.validate(assoc.size());
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < assoc.size(); ++p) {
        if (!assoc.is_foreground(p)) continue;
        sum += (targets.size[p] - pred.size[p]).l1_norm();
        ++n;
    }
    if (n == 0) throw std::runtime_error("loss_size: no foreground points");
    return sum / static_cast<double>(n);
}

double loss_score(const VotePrediction& pred, const Association& assoc,
                  const SceneCloud& scene, const BoxAnnotationSet& boxes) {
    pred.validate(assoc.size());
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < assoc.size(); ++p) {
        if (!assoc.is_foreground(p)) continue;
        Aabb predicted;
        predicted.center = scene.positions[p] + pred.offset[p];
        predicted.size = pred.size[p];
        const double t = iou_aabb(predicted, boxes.boxes[assoc.tag[p]]);
        sum += bce(t, pred.iou[p]);
        ++n;
    }
    if (n == 0) throw std::runtime_error("loss_score: no foreground points");
    return sum / static_cast<double>(n);
}

double loss_sem(const VotePrediction& pred, const TrainingTargets& targets,
                const Association& assoc) {
    pred.validate(assoc.size());
    double sum = 0.0;
    std::size_t n = 0;
    const std::size_t c = static_cast<std::size_t>(pred.num_classes);
    for (std::size_t p = 0; p < assoc.size(); ++p) {
        if (!assoc.is_decided(p)) continue;
        const int cls = targets.sem[p];
        if (cls < 0 || cls >= pred.num_classes)
            throw std::runtime_error("loss_sem: target class out of range at point " +
                                     std::to_string(p));
        sum += -std::log(std::max(pred.sem_probs[p * c + cls], kProbClamp));
        ++n;
    }
    if (n == 0) throw std::runtime_error("loss_sem: no decided points");
    return sum / static_cast<double>(n);
}

double loss_total(const VotePrediction& pred, const TrainingTargets& targets,
                  const Association& assoc, const SceneCloud& scene,
                  const BoxAnnotationSet& boxes) {
    return loss_offset(pred, targets, assoc) + loss_size(pred, targets, assoc) +
           loss_score(pred, assoc, scene, boxes) + loss_sem(pred, targets, assoc);
}

}  // namespace boxvote
