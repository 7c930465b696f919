#pragma once

#include <cmath>
#include <vector>

#include "fairhpo/common.hpp"

namespace fairhpo {

// Paper-fidelity defaults: budgets are training epochs in [1, 10], eta 3.
struct HyperbandConfig {
    int min_budget = 1;
    int max_budget = 10;
    int eta = 3;

    void validate() const {
        if (min_budget < 1 || max_budget < min_budget)
            throw ValidationError("hyperband: require 1 <= min_budget <= max_budget");
        if (eta < 2) throw ValidationError("hyperband: eta must be >= 2");
    }
};

struct Rung {
    int n_configs = 0;
    int budget = 0;
};

struct Bracket {
    int s = 0;
    std::vector<Rung> rungs;
};

// Successive-halving bracket table: s_max = floor(log_eta(max/min)); bracket
// s starts n = ceil((s_max+1)/(s+1) * eta^s) configs at budget
// round(max * eta^-s), keeping the top floor(n/eta) at each promotion.
inline std::vector<Bracket> hyperband_schedule(const HyperbandConfig& cfg) {
    cfg.validate();
    const double eta = static_cast<double>(cfg.eta);
    const int s_max = static_cast<int>(std::floor(
        std::log(static_cast<double>(cfg.max_budget) / cfg.min_budget) / std::log(eta)));
    std::vector<Bracket> brackets;
    for (int s = s_max; s >= 0; --s) {
        Bracket b;
        b.s = s;
        int n = static_cast<int>(std::ceil(static_cast<double>(s_max + 1) /
                                           static_cast<double>(s + 1) * std::pow(eta, s)));
        double r = cfg.max_budget * std::pow(eta, -s);
        for (int i = 0; i <= s; ++i) {
            Rung rung;
            rung.n_configs = n;
            int budget = static_cast<int>(std::llround(r * std::pow(eta, i)));
            rung.budget = std::min(cfg.max_budget, std::max(cfg.min_budget, budget));
            b.rungs.push_back(rung);
            n = n / cfg.eta; // floor(n / eta) promoted
            if (n < 1 && i < s) break;
        }
        brackets.push_back(std::move(b));
    }
    return brackets;
}

} // namespace fairhpo
