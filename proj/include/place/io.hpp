#pragma once

// File formats: line-delimited diagram records, the scale-configuration
// record shared between runs, and delimited report tables.

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "place/diagram.hpp"
#include "place/embedding.hpp"

namespace place {

struct DiagramRecord {
    PersistenceDiagram diagram;
    std::optional<int> label;
};

/// One diagram per line: {"points": [[b, d], ...], "dim": 0, "label": 1}.
/// "dim" and "label" are optional.
inline std::vector<DiagramRecord> read_diagram_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_diagram_file: cannot open " + path);
    std::vector<DiagramRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        DiagramRecord rec;
        if (!j.contains("points") || !j["points"].is_array())
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": record needs a 'points' array");
        for (const auto& p : j["points"]) {
            if (!p.is_array() || p.size() != 2)
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": each point must be [birth, death]");
            DiagramPoint pt{p[0].get<double>(), p[1].get<double>()};
            if (!valid_point(pt))
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": invalid point (need 0 <= birth < death)");
            rec.diagram.points.push_back(pt);
        }
        if (j.contains("dim")) rec.diagram.homology_dim = j["dim"].get<int>();
        if (j.contains("label")) rec.label = j["label"].get<int>();
        out.push_back(std::move(rec));
    }
    return out;
}

inline void write_diagram_file(const std::string& path,
                               const std::vector<DiagramRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_diagram_file: cannot open " + path);
    for (const auto& rec : records) {
        nlohmann::json j;
        j["points"] = nlohmann::json::array();
        for (const auto& p : rec.diagram.points)
            j["points"].push_back({p.birth, p.death});
        j["dim"] = rec.diagram.homology_dim;
        if (rec.label) j["label"] = *rec.label;
        out << j.dump() << "\n";
    }
}

/// Serialize the scale configuration so train and predict runs share the
/// exact grids; grids are rebuilt deterministically from (scales, L).
inline nlohmann::json scale_config_to_json(const ScaleConfig& cfg) {
    nlohmann::json j;
    j["scales"] = cfg.scales;
    j["weights"] = cfg.weights;
    j["L"] = cfg.bound;
    j["total_dim"] = cfg.total_dim();
    return j;
}

inline ScaleConfig scale_config_from_json(const nlohmann::json& j) {
    ScaleConfig cfg = make_config(j.at("scales").get<std::vector<double>>(),
                                  j.at("weights").get<std::vector<double>>(),
                                  j.at("L").get<double>());
    if (j.contains("total_dim") && j["total_dim"].get<std::size_t>() != cfg.total_dim())
        throw std::runtime_error("scale_config_from_json: stored dimension " +
                                 std::to_string(j["total_dim"].get<std::size_t>()) +
                                 " does not match rebuilt grids (" +
                                 std::to_string(cfg.total_dim()) + ")");
    return cfg;
}

/// Dense embedded rows, one sample per line: label then coordinates.
inline void write_embedding_matrix(const std::string& path,
                                   const std::vector<EmbeddedVector>& X,
                                   const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_embedding_matrix: cannot open " + path);
    out.precision(17);
    for (std::size_t i = 0; i < X.size(); ++i) {
        out << labels[i];
        for (Eigen::Index c = 0; c < X[i].size(); ++c) out << '\t' << X[i][c];
        out << '\n';
    }
}

}  // namespace place
