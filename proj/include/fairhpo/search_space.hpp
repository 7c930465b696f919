#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fairhpo/common.hpp"

namespace fairhpo {

enum class Family { MLP, ResNet, FTTransformer };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::MLP: return "mlp";
        case Family::ResNet: return "resnet";
        case Family::FTTransformer: return "ft_transformer";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "mlp") return Family::MLP;
    if (s == "resnet") return Family::ResNet;
    if (s == "ft_transformer" || s == "ft-transformer") return Family::FTTransformer;
    throw ValidationError("unknown model family: " + s);
}

using ConfigValue = std::variant<int64_t, double, std::string>;

inline std::string value_to_string(const ConfigValue& v) {
    if (std::holds_alternative<int64_t>(v)) return std::to_string(std::get<int64_t>(v));
    if (std::holds_alternative<double>(v)) {
        char buf[40];
        snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
        return buf;
    }
    return std::get<std::string>(v);
}

inline double value_as_number(const ConfigValue& v) {
    if (std::holds_alternative<int64_t>(v)) return static_cast<double>(std::get<int64_t>(v));
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    throw ValidationError("configuration value is not numeric: " + std::get<std::string>(v));
}

struct HyperparameterDomain {
    enum class Kind { ContinuousLog, ContinuousLinear, IntegerSet, CategoricalSet };

    std::string name;
    Kind kind = Kind::ContinuousLinear;
    double lo = 0.0, hi = 1.0;       // continuous kinds
    std::vector<ConfigValue> values; // set kinds
    ConfigValue default_value;
    bool architectural = false;

    bool is_continuous() const {
        return kind == Kind::ContinuousLog || kind == Kind::ContinuousLinear;
    }

    bool contains(const ConfigValue& v) const {
        if (is_continuous()) {
            if (!std::holds_alternative<double>(v) && !std::holds_alternative<int64_t>(v))
                return false;
            double x = value_as_number(v);
            return x >= lo && x <= hi;
        }
        for (const auto& cand : values)
            if (cand == v) return true;
        return false;
    }

    size_t value_index(const ConfigValue& v) const {
        for (size_t i = 0; i < values.size(); ++i)
            if (values[i] == v) return i;
        throw ValidationError("value not in domain '" + name + "': " + value_to_string(v));
    }
};

struct Configuration {
    Family family = Family::MLP;
    std::vector<ConfigValue> values; // aligned with SearchSpace::domains

    uint64_t hash() const {
        uint64_t h = fnv1a64(family_name(family));
        for (const auto& v : values) {
            if (std::holds_alternative<int64_t>(v)) {
                int64_t x = std::get<int64_t>(v);
                h = fnv1a64(&x, sizeof(x), h ^ 0x11);
            } else if (std::holds_alternative<double>(v)) {
                double x = std::get<double>(v);
                uint64_t bits;
                std::memcpy(&bits, &x, sizeof(bits));
                h = fnv1a64(&bits, sizeof(bits), h ^ 0x22);
            } else {
                h = fnv1a64(std::get<std::string>(v), h ^ 0x33);
            }
        }
        return h;
    }
};

struct SearchSpace {
    Family family = Family::MLP;
    std::vector<HyperparameterDomain> domains;

    const HyperparameterDomain& domain(const std::string& name) const {
        for (const auto& d : domains)
            if (d.name == name) return d;
        throw ValidationError("search space has no domain '" + name + "'");
    }

    size_t domain_index(const std::string& name) const {
        for (size_t i = 0; i < domains.size(); ++i)
            if (domains[i].name == name) return i;
        throw ValidationError("search space has no domain '" + name + "'");
    }

    void validate(const Configuration& c) const {
        if (c.family != family) throw ValidationError("configuration family mismatch");
        if (c.values.size() != domains.size())
            throw ValidationError("configuration arity mismatch");
        for (size_t i = 0; i < domains.size(); ++i)
            if (!domains[i].contains(c.values[i]))
                throw ValidationError("configuration value out of domain '" + domains[i].name +
                                      "': " + value_to_string(c.values[i]));
    }
};

namespace detail {

inline HyperparameterDomain cont_log(std::string name, double lo, double hi, double def) {
    HyperparameterDomain d;
    d.name = std::move(name);
    d.kind = HyperparameterDomain::Kind::ContinuousLog;
    d.lo = lo;
    d.hi = hi;
    d.default_value = def;
    return d;
}

inline HyperparameterDomain cont_lin(std::string name, double lo, double hi, double def) {
    HyperparameterDomain d;
    d.name = std::move(name);
    d.kind = HyperparameterDomain::Kind::ContinuousLinear;
    d.lo = lo;
    d.hi = hi;
    d.default_value = def;
    return d;
}

inline HyperparameterDomain int_set(std::string name, std::vector<int64_t> vals, int64_t def,
                                    bool architectural) {
    HyperparameterDomain d;
    d.name = std::move(name);
    d.kind = HyperparameterDomain::Kind::IntegerSet;
    for (int64_t v : vals) d.values.emplace_back(v);
    d.default_value = def;
    d.architectural = architectural;
    return d;
}

inline HyperparameterDomain num_cat(std::string name, std::vector<double> vals, double def,
                                    bool architectural) {
    HyperparameterDomain d;
    d.name = std::move(name);
    d.kind = HyperparameterDomain::Kind::CategoricalSet;
    for (double v : vals) d.values.emplace_back(v);
    d.default_value = def;
    d.architectural = architectural;
    return d;
}

inline HyperparameterDomain str_cat(std::string name, std::vector<std::string> vals,
                                    std::string def, bool architectural) {
    HyperparameterDomain d;
    d.name = std::move(name);
    d.kind = HyperparameterDomain::Kind::CategoricalSet;
    for (auto& v : vals) d.values.emplace_back(std::move(v));
    d.default_value = std::move(def);
    d.architectural = architectural;
    return d;
}

inline std::vector<HyperparameterDomain> training_domains() {
    std::vector<HyperparameterDomain> ds;
    ds.push_back(cont_log("learning_rate", 1e-5, 1e-2, 1e-3));
    ds.push_back(cont_log("weight_decay", 1e-6, 1e-3, 1e-5));
    ds.push_back(cont_lin("dropout", 0.0, 0.5, 0.1));
    HyperparameterDomain bs = int_set("batch_size", {64, 128, 256, 512}, 64, false);
    bs.kind = HyperparameterDomain::Kind::CategoricalSet;
    ds.push_back(std::move(bs));
    return ds;
}

} // namespace detail

// The three fixed configuration spaces. Architectural value sets factor the
// published combination counts: MLP 875 = 5*7*5*5, ResNet 350 = 5*7*5*2,
// FT-Transformer 324 = 3*4*3*3*3. Training ranges bracket rtdl-style
// defaults and are shared across families.
inline SearchSpace space(Family family) {
    SearchSpace s;
    s.family = family;
    const std::vector<int64_t> widths = {16, 32, 64, 128, 256, 512, 1024};
    const std::vector<double> multipliers = {0.25, 0.5, 1.0, 2.0, 4.0};
    switch (family) {
        case Family::MLP:
            s.domains.push_back(detail::int_set("depth", {1, 2, 3, 4, 5}, 2, true));
            s.domains.push_back(detail::int_set("base_width", widths, 128, true));
            s.domains.push_back(detail::num_cat("first_layer_multiplier", multipliers, 1.0, true));
            s.domains.push_back(detail::num_cat("last_layer_multiplier", multipliers, 1.0, true));
            break;
        case Family::ResNet:
            s.domains.push_back(detail::int_set("n_blocks", {1, 2, 3, 4, 5}, 2, true));
            s.domains.push_back(detail::int_set("main_width", widths, 128, true));
            s.domains.push_back(
                detail::num_cat("hidden_expansion", {0.5, 1.0, 2.0, 3.0, 4.0}, 2.0, true));
            s.domains.push_back(
                detail::str_cat("normalization", {"batch-norm", "layer-norm"}, "batch-norm", true));
            break;
        case Family::FTTransformer:
            s.domains.push_back(detail::int_set("n_blocks", {1, 2, 3}, 2, true));
            s.domains.push_back(detail::int_set("n_heads", {1, 2, 4, 8}, 4, true));
            s.domains.push_back(detail::int_set("token_dim", {64, 128, 192}, 128, true));
            s.domains.push_back(detail::int_set("ffn_expansion", {1, 2, 4}, 2, true));
            s.domains.push_back(detail::int_set("ffn_hidden_layers", {1, 2, 3}, 1, true));
            break;
    }
    for (auto& d : detail::training_domains()) s.domains.push_back(std::move(d));
    return s;
}

// Product of architectural value-set sizes; continuous training ranges are
// excluded (infinitely many combinations).
inline uint64_t cardinality(const SearchSpace& s) {
    uint64_t n = 1;
    for (const auto& d : s.domains)
        if (d.architectural) n *= d.values.size();
    return n;
}

inline Configuration sample(const SearchSpace& s, uint64_t seed) {
    Rng rng(derive_seed(seed, "config-sample"));
    Configuration c;
    c.family = s.family;
    for (const auto& d : s.domains) {
        switch (d.kind) {
            case HyperparameterDomain::Kind::ContinuousLog:
                c.values.emplace_back(
                    std::pow(10.0, rng.uniform(std::log10(d.lo), std::log10(d.hi))));
                break;
            case HyperparameterDomain::Kind::ContinuousLinear:
                c.values.emplace_back(rng.uniform(d.lo, d.hi));
                break;
            case HyperparameterDomain::Kind::IntegerSet:
            case HyperparameterDomain::Kind::CategoricalSet:
                c.values.push_back(d.values[rng.index(d.values.size())]);
                break;
        }
    }
    return c;
}

// Enumerate the architectural grid (training domains at their defaults).
// `index` runs over [0, cardinality).
inline Configuration enumerate_architecture(const SearchSpace& s, uint64_t index) {
    Configuration c;
    c.family = s.family;
    uint64_t rem = index;
    std::vector<ConfigValue> vals(s.domains.size());
    for (size_t i = s.domains.size(); i-- > 0;) {
        const auto& d = s.domains[i];
        if (d.architectural) {
            uint64_t k = rem % d.values.size();
            rem /= d.values.size();
            vals[i] = d.values[k];
        } else {
            vals[i] = d.default_value;
        }
    }
    if (rem != 0) throw ValidationError("enumerate_architecture: index out of range");
    c.values = std::move(vals);
    return c;
}

// Numeric encoding for the surrogate: log10 for log-continuous domains,
// raw value for integer sets, set index for categoricals, each min-max
// scaled to [0,1].
inline std::vector<double> encode_for_surrogate(const SearchSpace& s, const Configuration& c) {
    std::vector<double> x;
    x.reserve(s.domains.size());
    for (size_t i = 0; i < s.domains.size(); ++i) {
        const auto& d = s.domains[i];
        switch (d.kind) {
            case HyperparameterDomain::Kind::ContinuousLog: {
                double v = std::log10(value_as_number(c.values[i]));
                x.push_back((v - std::log10(d.lo)) / (std::log10(d.hi) - std::log10(d.lo)));
                break;
            }
            case HyperparameterDomain::Kind::ContinuousLinear:
                x.push_back((value_as_number(c.values[i]) - d.lo) / (d.hi - d.lo));
                break;
            case HyperparameterDomain::Kind::IntegerSet: {
                double vmin = value_as_number(d.values.front());
                double vmax = value_as_number(d.values.back());
                double v = value_as_number(c.values[i]);
                x.push_back(vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.0);
                break;
            }
            case HyperparameterDomain::Kind::CategoricalSet: {
                size_t idx = d.value_index(c.values[i]);
                size_t n = d.values.size();
                x.push_back(n > 1 ? static_cast<double>(idx) / static_cast<double>(n - 1) : 0.0);
                break;
            }
        }
    }
    return x;
}

// One-field neighbor: used to seed acquisition candidates around the
// incumbent. Continuous fields move by a small deterministic step, set
// fields to an adjacent (integer) or different random (categorical) value.
inline Configuration mutate_one_field(const SearchSpace& s, const Configuration& c, Rng& rng) {
    Configuration out = c;
    size_t i = rng.index(s.domains.size());
    const auto& d = s.domains[i];
    switch (d.kind) {
        case HyperparameterDomain::Kind::ContinuousLog: {
            double v = value_as_number(c.values[i]);
            double lg = std::log10(v) + rng.uniform(-0.25, 0.25);
            lg = std::min(std::log10(d.hi), std::max(std::log10(d.lo), lg));
            out.values[i] = std::pow(10.0, lg);
            break;
        }
        case HyperparameterDomain::Kind::ContinuousLinear: {
            double v = value_as_number(c.values[i]) + rng.uniform(-0.1, 0.1) * (d.hi - d.lo);
            out.values[i] = std::min(d.hi, std::max(d.lo, v));
            break;
        }
        case HyperparameterDomain::Kind::IntegerSet: {
            size_t idx = d.value_index(c.values[i]);
            size_t j = (idx == 0) ? 1
                       : (idx + 1 == d.values.size()) ? idx - 1
                       : (rng.bernoulli(0.5) ? idx - 1 : idx + 1);
            out.values[i] = d.values[j];
            break;
        }
        case HyperparameterDomain::Kind::CategoricalSet: {
            if (d.values.size() > 1) {
                size_t idx = d.value_index(c.values[i]);
                size_t j = rng.index(d.values.size() - 1);
                if (j >= idx) ++j;
                out.values[i] = d.values[j];
            }
            break;
        }
    }
    return out;
}

inline nlohmann::json value_to_json(const ConfigValue& v) {
    if (std::holds_alternative<int64_t>(v)) return std::get<int64_t>(v);
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    return std::get<std::string>(v);
}

inline ConfigValue value_from_json(const nlohmann::json& j, const HyperparameterDomain& d) {
    if (j.is_string()) return j.get<std::string>();
    if (d.kind == HyperparameterDomain::Kind::IntegerSet ||
        (j.is_number_integer() && !d.is_continuous() &&
         !d.values.empty() && std::holds_alternative<int64_t>(d.values.front())))
        return j.get<int64_t>();
    return j.get<double>();
}

inline nlohmann::json config_to_json(const SearchSpace& s, const Configuration& c) {
    nlohmann::json j;
    j["family"] = family_name(c.family);
    for (size_t i = 0; i < s.domains.size(); ++i)
        j["values"][s.domains[i].name] = value_to_json(c.values[i]);
    return j;
}

inline Configuration config_from_json(const SearchSpace& s, const nlohmann::json& j) {
    Configuration c;
    c.family = parse_family(j.at("family").get<std::string>());
    for (const auto& d : s.domains)
        c.values.push_back(value_from_json(j.at("values").at(d.name), d));
    s.validate(c);
    return c;
}

// Space overrides from the run-config format: continuous ranges may be
// re-pinned per experiment.
inline nlohmann::json space_to_json(const SearchSpace& s) {
    nlohmann::json doms = nlohmann::json::array();
    for (const auto& d : s.domains) {
        nlohmann::json jd{{"name", d.name}, {"architectural", d.architectural}};
        switch (d.kind) {
            case HyperparameterDomain::Kind::ContinuousLog: jd["kind"] = "continuous-log"; break;
            case HyperparameterDomain::Kind::ContinuousLinear: jd["kind"] = "continuous-linear"; break;
            case HyperparameterDomain::Kind::IntegerSet: jd["kind"] = "integer-set"; break;
            case HyperparameterDomain::Kind::CategoricalSet: jd["kind"] = "categorical-set"; break;
        }
        if (d.is_continuous()) {
            jd["lo"] = d.lo;
            jd["hi"] = d.hi;
        } else {
            nlohmann::json vals = nlohmann::json::array();
            for (const auto& v : d.values) vals.push_back(value_to_json(v));
            jd["values"] = vals;
        }
        jd["default"] = value_to_json(d.default_value);
        doms.push_back(std::move(jd));
    }
    return nlohmann::json{{"family", family_name(s.family)}, {"domains", doms}};
}

inline void apply_space_overrides(SearchSpace& s, const nlohmann::json& overrides) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        auto& d = s.domains[s.domain_index(it.key())];
        if (!d.is_continuous())
            throw ValidationError("space override: only continuous ranges can be re-pinned, got '" +
                                  it.key() + "'");
        d.lo = it.value().at("lo").get<double>();
        d.hi = it.value().at("hi").get<double>();
        if (!(d.lo < d.hi))
            throw ValidationError("space override: lo must be < hi for '" + it.key() + "'");
        d.default_value = std::min(std::max(value_as_number(d.default_value), d.lo), d.hi);
    }
}

} // namespace fairhpo
