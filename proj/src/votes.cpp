#include "boxvote/votes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace boxvote {

using nlohmann::json;

void VoteSet::validate() const {
    if (expansion.size() != votes.size())
        throw std::runtime_error("votes: expansion list length differs from vote count");
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (!std::isfinite(votes[i].score) || votes[i].score <= 0.0 || votes[i].score >= 1.0)
            throw std::runtime_error("votes[" + std::to_string(i) +
                                     "]: score must be a finite value in (0, 1)");
        if (expansion[i].empty())
            throw std::runtime_error("votes[" + std::to_string(i) + "]: empty expansion");
        for (int p : expansion[i]) {
            if (p < 0)
                throw std::runtime_error("votes[" + std::to_string(i) +
                                         "]: negative point index in expansion");
            if (!seen.insert(p).second)
                throw std::runtime_error("votes: point " + std::to_string(p) +
                                         " appears in more than one expansion");
        }
    }
}

std::vector<int> vote_segments(const VoteSet& votes,
                               const std::vector<int>& point_segment_ids) {
    std::vector<int> out(votes.size());
    for (std::size_t i = 0; i < votes.size(); ++i) {
        if (votes.expansion[i].empty())
            throw std::runtime_error("vote_segments: votes[" + std::to_string(i) +
                                     "] has an empty expansion");
        int seg = -1;
        for (int p : votes.expansion[i]) {
            if (p < 0 || static_cast<std::size_t>(p) >= point_segment_ids.size())
                throw std::runtime_error("vote_segments: point index " + std::to_string(p) +
                                         " outside the segment id table");
            const int s = point_segment_ids[p];
            if (seg == -1) seg = s;
            else if (s != seg)
                throw std::runtime_error("vote_segments: votes[" + std::to_string(i) +
                                         "] spans segments " + std::to_string(seg) +
                                         " and " + std::to_string(s));
        }
        out[i] = seg;
    }
    return out;
}

VoteSet aggregate_votes_by_segment(const VoteSet& votes,
                                   const std::vector<int>& segment_ids) {
    if (segment_ids.size() != votes.size())
        throw std::invalid_argument(
            "aggregate_votes_by_segment: need one segment id per vote");

    std::map<int, std::vector<int>> groups;  // segment id -> vote indices
    for (std::size_t i = 0; i < votes.size(); ++i)
        groups[segment_ids[i]].push_back(static_cast<int>(i));

    VoteSet out;
    out.votes.reserve(groups.size());
    out.expansion.reserve(groups.size());
    for (const auto& [seg, members] : groups) {
        (void)seg;
        Vec3 center{0, 0, 0}, size{0, 0, 0};
        double score = 0.0;
        std::map<int, int> sem_count;
        std::vector<int> points;
        for (int vi : members) {
            const Vote& v = votes.votes[vi];
            center += v.box.center;
            size += v.box.size;
            score += v.score;
            ++sem_count[v.semantic];
            points.insert(points.end(), votes.expansion[vi].begin(),
                          votes.expansion[vi].end());
        }
        const double inv = 1.0 / static_cast<double>(members.size());
        int best_sem = sem_count.begin()->first;
        int best_n = sem_count.begin()->second;
        for (const auto& [cls, n] : sem_count)
            if (n > best_n) { best_sem = cls; best_n = n; }
        std::sort(points.begin(), points.end());
        Vote agg;
        agg.box.center = center * inv;
        agg.box.size = size * inv;
        agg.box.label = best_sem;
        agg.score = score * inv;
        agg.semantic = best_sem;
        out.votes.push_back(agg);
        out.expansion.push_back(std::move(points));
    }
    return out;
}

VoteSet load_votes_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("votes") || !j["votes"].is_array())
        throw std::runtime_error(path + ": expected an object with a \"votes\" array");

    VoteSet set;
    const json& arr = j["votes"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& v = arr[i];
        const std::string ctx = "votes[" + std::to_string(i) + "]";
        auto vec3_of = [&](const char* key) -> Vec3 {
            if (!v.contains(key) || !v[key].is_array() || v[key].size() != 3)
                throw std::runtime_error(ctx + "." + key + " must be an array of 3 numbers");
            const json& a = v[key];
            for (int c = 0; c < 3; ++c)
                if (!a[c].is_number())
                    throw std::runtime_error(ctx + "." + key + " must contain numbers");
            return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
        };
        Vote vote;
        vote.box.center = vec3_of("center");
        vote.box.size = vec3_of("size");
        if (!v.contains("label") || !v["label"].is_number_integer())
            throw std::runtime_error(ctx + ".label must be an integer");
        vote.semantic = v["label"].get<int>();
        vote.box.label = vote.semantic;
        if (!v.contains("score") || !v["score"].is_number())
            throw std::runtime_error(ctx + ".score must be a number");
        vote.score = v["score"].get<double>();
        if (!v.contains("points") || !v["points"].is_array() || v["points"].empty())
            throw std::runtime_error(ctx + ".points must be a nonempty array");
        std::vector<int> pts;
        for (const json& p : v["points"]) {
            if (!p.is_number_integer())
                throw std::runtime_error(ctx + ".points must contain integers");
            pts.push_back(p.get<int>());
        }
        set.votes.push_back(vote);
        set.expansion.push_back(std::move(pts));
    }
    set.validate();
    return set;
}

void save_votes_json(const std::string& path, const VoteSet& set) {
    json arr = json::array();
    for (std::size_t i = 0; i < set.votes.size(); ++i) {
        const Vote& v = set.votes[i];
        json jv;
        jv["center"] = {v.box.center.x, v.box.center.y, v.box.center.z};
        jv["size"] = {v.box.size.x, v.box.size.y, v.box.size.z};
        jv["label"] = v.semantic;
        jv["score"] = v.score;
        jv["points"] = set.expansion[i];
        arr.push_back(std::move(jv));
    }
    json j;
    j["votes"] = std::move(arr);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump() << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace boxvote
