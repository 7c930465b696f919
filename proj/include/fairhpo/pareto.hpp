#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fairhpo/common.hpp"

namespace fairhpo {

inline constexpr double kDominanceEps = 1e-9;

// Minimization dominance: a <= b in every coordinate (with eps slack) and
// strictly better in at least one.
inline bool dominates(const std::vector<double>& a, const std::vector<double>& b,
                      double eps = kDominanceEps) {
    if (a.size() != b.size()) throw ValidationError("dominates: length mismatch");
    bool strict = false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i] + eps) return false;
        if (a[i] < b[i] - eps) strict = true;
    }
    return strict;
}

struct ArchiveEntry {
    std::vector<double> objectives; // raw (non-scalarized) objective values
    uint64_t config_hash = 0;
    int budget = 0;
    size_t trial_index = 0; // position in the run log
};

// Nondominated set over the active objective pair. Only trials evaluated at
// the full budget may enter.
class ParetoArchive {
public:
    explicit ParetoArchive(int full_budget = 10) : full_budget_(full_budget) {}

    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    int full_budget() const { return full_budget_; }

    // Insert iff not dominated; drops entries the candidate dominates.
    // Re-inserting an identical entry is a no-op. Returns true if inserted.
    bool update(const ArchiveEntry& candidate) {
        if (candidate.budget != full_budget_)
            throw ValidationError("archive: candidate not at full budget");
        for (const auto& e : entries_) {
            if (e.config_hash == candidate.config_hash && e.objectives == candidate.objectives)
                return false; // duplicate
            if (dominates(e.objectives, candidate.objectives)) return false;
        }
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [&](const ArchiveEntry& e) {
                                          return dominates(candidate.objectives, e.objectives);
                                      }),
                       entries_.end());
        entries_.push_back(candidate);
        return true;
    }

    // Invariant: no entry dominates another.
    bool consistent() const {
        for (size_t i = 0; i < entries_.size(); ++i)
            for (size_t j = 0; j < entries_.size(); ++j)
                if (i != j && dominates(entries_[i].objectives, entries_[j].objectives))
                    return false;
        return true;
    }

private:
    int full_budget_;
    std::vector<ArchiveEntry> entries_;
};

// O(n^2) nondominated filter; the test oracle for archive updates and the
// baseline front builder.
inline std::vector<size_t> nondominated_indices(const std::vector<std::vector<double>>& points) {
    std::vector<size_t> keep;
    for (size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (size_t j = 0; j < points.size() && !dominated; ++j) {
            if (j == i) continue;
            if (dominates(points[j], points[i])) dominated = true;
            // among exact duplicates keep only the first
            if (j < i && points[j] == points[i]) dominated = true;
        }
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

// Area dominated by a 2-D minimization front w.r.t. the reference point.
// Points must not exceed the reference in either coordinate; dominated
// points contribute nothing.
inline double hypervolume2d(std::vector<std::vector<double>> front,
                            const std::vector<double>& reference) {
    if (reference.size() != 2) throw ValidationError("hypervolume2d: reference must be 2-D");
    for (const auto& p : front) {
        if (p.size() != 2) throw ValidationError("hypervolume2d: points must be 2-D");
        if (p[0] > reference[0] || p[1] > reference[1])
            throw ValidationError("hypervolume2d: point beyond reference");
    }
    std::sort(front.begin(), front.end());
    double area = 0.0;
    double best_y = reference[1];
    for (const auto& p : front) {
        if (p[1] < best_y) {
            area += (reference[0] - p[0]) * (best_y - p[1]);
            best_y = p[1];
        }
    }
    return area;
}

} // namespace fairhpo
