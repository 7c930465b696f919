#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairhpo/csv.hpp"
#include "fairhpo/evaluator.hpp"
#include "fairhpo/optimizer.hpp"
#include "fairhpo/pareto.hpp"

namespace fairhpo::reports {

struct Stats {
    double mean = 0.0, std = 0.0, min = 0.0, max = 0.0;
    double spread() const { return max - min; }

    static Stats of(const std::vector<double>& v) {
        Stats s;
        if (v.empty()) return s;
        s.min = *std::min_element(v.begin(), v.end());
        s.max = *std::max_element(v.begin(), v.end());
        for (double x : v) s.mean += x;
        s.mean /= static_cast<double>(v.size());
        if (v.size() > 1) {
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
        }
        return s;
    }

    nlohmann::json to_json() const {
        return {{"mean", mean}, {"std", std}, {"min", min}, {"max", max}, {"spread", spread()}};
    }
};

inline std::string fmt(double v) {
    char buf[40];
    snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

// ---- probe outputs ----

inline csv::Table probe_scatter_table(const SearchSpace& space,
                                      const std::vector<TrialEvaluator::ProbeSummary>& summaries) {
    csv::Table t;
    t.header = {"config_hash"};
    for (const auto& d : space.domains) t.header.push_back(d.name);
    for (const char* m : {"mean_accuracy", "mean_balanced_accuracy", "mean_spd_abs",
                          "mean_aod_abs", "mean_eod_abs", "mean_disparate_impact",
                          "trivial_fraction", "n_diverged"})
        t.header.push_back(m);
    for (const auto& s : summaries) {
        std::vector<std::string> row{hex64(s.config.hash())};
        for (const auto& v : s.config.values) row.push_back(value_to_string(v));
        row.push_back(fmt(s.mean_accuracy));
        row.push_back(fmt(s.mean_balanced_accuracy));
        row.push_back(fmt(s.mean_spd_abs));
        row.push_back(fmt(s.mean_aod_abs));
        row.push_back(fmt(s.mean_eod_abs));
        row.push_back(fmt_opt(s.mean_disparate_impact));
        row.push_back(fmt(s.trivial_fraction));
        row.push_back(std::to_string(s.n_diverged));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json probe_summary_json(const TrialEvaluator::ProbeResult& result,
                                         size_t n_seeds) {
    std::vector<double> acc, bacc, spd, aod, eod;
    for (const auto& s : result.summaries) {
        acc.push_back(s.mean_accuracy);
        bacc.push_back(s.mean_balanced_accuracy);
        spd.push_back(s.mean_spd_abs);
        aod.push_back(s.mean_aod_abs);
        eod.push_back(s.mean_eod_abs);
    }
    return {{"n_configs", result.summaries.size()},
            {"n_seeds", n_seeds},
            {"n_records", result.records.size()},
            {"trivial_rate", result.trivial_rate},
            {"stats",
             {{"accuracy", Stats::of(acc).to_json()},
              {"balanced_accuracy", Stats::of(bacc).to_json()},
              {"spd_abs", Stats::of(spd).to_json()},
              {"aod_abs", Stats::of(aod).to_json()},
              {"eod_abs", Stats::of(eod).to_json()}}}};
}

// ---- archive outputs ----

inline void metric_columns(std::vector<std::string>& header, const std::string& prefix) {
    for (const char* m : {"accuracy", "balanced_accuracy", "spd", "disparate_impact", "aod", "eod"})
        header.push_back(prefix + m);
}

inline void metric_values(std::vector<std::string>& row, const MetricVector& m) {
    row.push_back(fmt(m.accuracy));
    row.push_back(fmt_opt(m.balanced_accuracy));
    row.push_back(fmt_opt(m.statistical_parity_difference));
    row.push_back(fmt_opt(m.disparate_impact));
    row.push_back(fmt_opt(m.average_odds_difference));
    row.push_back(fmt_opt(m.equal_opportunity_difference));
}

// One row per archive entry: configuration, objectives on the archive axes,
// validation metrics, test metrics.
inline csv::Table archive_table(const SearchSpace& space, const ObjectiveSpec& axes,
                                const OptimizeResult& result) {
    csv::Table t;
    t.header = {"trial_id", "config_hash", "budget", "seed", "pipeline"};
    for (const auto& d : space.domains) t.header.push_back(d.name);
    for (const auto& n : axes.names()) t.header.push_back("objective_" + n);
    metric_columns(t.header, "val_");
    metric_columns(t.header, "test_");

    std::vector<ArchiveEntry> entries = result.archive.entries();
    std::sort(entries.begin(), entries.end(),
              [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.trial_index < b.trial_index; });
    for (const auto& e : entries) {
        const TrialRecord* rec = nullptr;
        for (const auto& r : result.trials)
            if (r.trial_id == e.trial_index) { rec = &r; break; }
        if (!rec) continue;
        std::vector<std::string> row{std::to_string(e.trial_index), hex64(e.config_hash),
                                     std::to_string(e.budget), std::to_string(rec->request.seed),
                                     rec->request.pipeline
                                         ? rec->request.pipeline->to_json().dump()
                                         : ""};
        for (const auto& v : rec->request.config.values) row.push_back(value_to_string(v));
        for (double o : e.objectives) row.push_back(fmt(o));
        metric_values(row, rec->metrics);
        if (rec->has_test_metrics) metric_values(row, rec->test_metrics);
        else for (int i = 0; i < 6; ++i) row.emplace_back();
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline nlohmann::json archive_json(const SearchSpace& space, const ObjectiveSpec& axes,
                                   const OptimizeResult& result) {
    nlohmann::json entries = nlohmann::json::array();
    std::vector<ArchiveEntry> sorted = result.archive.entries();
    std::sort(sorted.begin(), sorted.end(),
              [](const ArchiveEntry& a, const ArchiveEntry& b) { return a.trial_index < b.trial_index; });
    for (const auto& e : sorted) {
        const TrialRecord* rec = nullptr;
        for (const auto& r : result.trials)
            if (r.trial_id == e.trial_index) { rec = &r; break; }
        if (!rec) continue;
        nlohmann::json je = trial_to_json(space, *rec);
        nlohmann::json obj;
        auto names = axes.names();
        for (size_t i = 0; i < names.size(); ++i) obj[names[i]] = e.objectives[i];
        je["objectives"] = obj;
        entries.push_back(std::move(je));
    }
    return {{"objective_names", axes.names()}, {"entries", entries}};
}

// ---- plot data (static SVG scatter, no dependencies) ----

struct SvgSeries {
    std::string name;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

inline void write_svg_scatter(const std::string& path, const std::string& title,
                              const std::string& xlabel, const std::string& ylabel,
                              const std::vector<SvgSeries>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmax += 0.5; xmin -= 0.5; }
    if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }
    const double W = 640, H = 480, L = 70, B = 50, T = 40, R = 30;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    std::ofstream out(path);
    if (!out) throw TrialError("svg: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    out << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - R << "' y2='" << H - B
        << "' stroke='black'/>\n";
    out << "<line x1='" << L << "' y1='" << T << "' x2='" << L << "' y2='" << H - B
        << "' stroke='black'/>\n";
    out << "<text x='" << W / 2 << "' y='" << H - 10 << "' text-anchor='middle' font-size='12'>"
        << xlabel << "</text>\n";
    out << "<text x='18' y='" << H / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 18 "
        << H / 2 << ")'>" << ylabel << "</text>\n";
    for (double f : {0.0, 0.5, 1.0}) {
        double xv = xmin + f * (xmax - xmin), yv = ymin + f * (ymax - ymin);
        out << "<text x='" << px(xv) << "' y='" << H - B + 16 << "' text-anchor='middle' font-size='10'>"
            << fmt(xv) << "</text>\n";
        out << "<text x='" << L - 6 << "' y='" << py(yv) + 3 << "' text-anchor='end' font-size='10'>"
            << fmt(yv) << "</text>\n";
    }
    double ly = T;
    for (const auto& s : series) {
        for (auto [x, y] : s.points)
            out << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='3' fill='" << s.color
                << "' fill-opacity='0.7'/>\n";
        out << "<circle cx='" << W - R - 120 << "' cy='" << ly << "' r='4' fill='" << s.color
            << "'/><text x='" << W - R - 110 << "' y='" << ly + 4 << "' font-size='11'>" << s.name
            << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
}

} // namespace fairhpo::reports
