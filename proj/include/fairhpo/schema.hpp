#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairhpo/common.hpp"

namespace fairhpo {

// Dataset schema: names the label and protected columns, their favorable /
// privileged values and the kind of every feature column. Stored as JSON,
// see data/schemas/ for the bundled benchmark schemas.
struct DatasetSchema {
    std::string name;
    std::string label_column;
    std::string favorable_value;
    std::string protected_column;
    std::string privileged_value;
    // (column, kind) in declaration order; kind is "numeric" or "categorical".
    std::vector<std::pair<std::string, std::string>> feature_columns;
    std::vector<std::string> missing_tokens{"", "?", "NA"};
    std::optional<int64_t> expected_rows;

    static DatasetSchema from_json(const nlohmann::json& j) {
        DatasetSchema s;
        try {
            s.name = j.at("name").get<std::string>();
            s.label_column = j.at("label").at("column").get<std::string>();
            s.favorable_value = j.at("label").at("favorable").get<std::string>();
            s.protected_column = j.at("protected").at("column").get<std::string>();
            s.privileged_value = j.at("protected").at("privileged").get<std::string>();
            for (const auto& col : j.at("columns")) {
                std::string cname = col.at("name").get<std::string>();
                std::string kind = col.at("kind").get<std::string>();
                if (kind != "numeric" && kind != "categorical")
                    throw ValidationError("schema: column '" + cname +
                                          "' has unknown kind '" + kind + "'");
                s.feature_columns.emplace_back(cname, kind);
            }
            if (j.contains("missing_tokens"))
                s.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
            if (j.contains("expected_rows"))
                s.expected_rows = j.at("expected_rows").get<int64_t>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("schema: malformed json: ") + e.what());
        }
        if (s.feature_columns.empty())
            throw ValidationError("schema: no feature columns declared");
        return s;
    }

    static DatasetSchema load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("schema: cannot open file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("schema: parse error in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    nlohmann::json to_json() const {
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& [cname, kind] : feature_columns)
            cols.push_back({{"name", cname}, {"kind", kind}});
        nlohmann::json j{
            {"name", name},
            {"label", {{"column", label_column}, {"favorable", favorable_value}}},
            {"protected", {{"column", protected_column}, {"privileged", privileged_value}}},
            {"columns", cols},
            {"missing_tokens", missing_tokens},
        };
        if (expected_rows) j["expected_rows"] = *expected_rows;
        return j;
    }

    bool is_missing(const std::string& value) const {
        for (const auto& t : missing_tokens)
            if (value == t) return true;
        return false;
    }
};

} // namespace fairhpo
