#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/metric_graph.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

using json = nlohmann::ordered_json;

namespace io_detail {

inline const json &require_field(const json &j, const std::string &key,
                                 const std::string &where) {
    if (!j.is_object() || !j.contains(key)) {
        throw schema_error(where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

inline double require_number(const json &j, const std::string &where) {
    if (!j.is_number()) throw schema_error(where + ": expected a number");
    return j.get<double>();
}

inline std::string require_string(const json &j, const std::string &where) {
    if (!j.is_string()) throw schema_error(where + ": expected a string");
    return j.get<std::string>();
}

// Distances serialize as numbers, with the string "inf" as the sentinel for
// +infinity (JSON has no infinity literal).
inline json distance_to_json(double d) {
    if (std::isinf(d)) return json("inf");
    return json(d);
}

inline double distance_from_json(const json &j, const std::string &where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return infinite_distance;
        throw schema_error(where + ": unknown distance sentinel '" + j.get<std::string>() + "'");
    }
    return require_number(j, where);
}

} // namespace io_detail

inline json space_to_json(const SampledSpace &s) {
    json points = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        json p;
        p["id"] = s.point_ids[i];
        if (!s.coordinates.empty() && s.coordinates[i].has_value()) {
            p["coord"] = {(*s.coordinates[i])[0], (*s.coordinates[i])[1]};
        }
        points.push_back(std::move(p));
    }
    json dist = json::array();
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            dist.push_back(io_detail::distance_to_json(s.dist(i, j)));
    json out;
    out["points"] = std::move(points);
    out["dist"] = std::move(dist);
    out["weights"] = s.weights;
    return out;
}

inline SampledSpace space_from_json(const json &j) {
    using namespace io_detail;
    SampledSpace s;
    const json &points = require_field(j, "points", "space");
    if (!points.is_array()) throw schema_error("space.points: expected an array");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const json &p = points[i];
        const std::string where = "space.points[" + std::to_string(i) + "]";
        s.point_ids.push_back(require_string(require_field(p, "id", where), where + ".id"));
        if (p.contains("coord")) {
            const json &c = p.at("coord");
            if (!c.is_array() || c.size() != 2) {
                throw schema_error(where + ".coord: expected [x, y]");
            }
            s.coordinates.push_back(std::array<double, 2>{
                require_number(c[0], where + ".coord[0]"),
                require_number(c[1], where + ".coord[1]")});
        } else {
            s.coordinates.push_back(std::nullopt);
        }
    }
    const std::size_t n = s.point_ids.size();
    const json &dist = require_field(j, "dist", "space");
    if (!dist.is_array() || dist.size() != n * n) {
        throw schema_error("space.dist: expected a dense row-major array of " +
                           std::to_string(n * n) + " entries");
    }
    s.dist = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            s.dist(i, k) = distance_from_json(
                dist[i * n + k], "space.dist[" + std::to_string(i * n + k) + "]");
    const json &w = require_field(j, "weights", "space");
    if (!w.is_array() || w.size() != n) {
        throw schema_error("space.weights: expected " + std::to_string(n) + " entries");
    }
    for (std::size_t i = 0; i < n; ++i)
        s.weights.push_back(require_number(w[i], "space.weights[" + std::to_string(i) + "]"));
    s.validate();
    return s;
}

// Graph description file:
// {"vertices": [id], "edges": [{"u", "v", "length", "q_samples"?, "b_samples"?}],
//  "dirichlet": [id], "delta": {id: sigma}}
inline MetricGraph graph_from_json(const json &j) {
    using namespace io_detail;
    MetricGraph g;
    const json &verts = require_field(j, "vertices", "graph");
    if (!verts.is_array() || verts.empty()) {
        throw schema_error("graph.vertices: expected a nonempty array of ids");
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const std::string id =
            require_string(verts[i], "graph.vertices[" + std::to_string(i) + "]");
        if (index.count(id)) throw schema_error("graph.vertices: duplicate id '" + id + "'");
        index[id] = i;
        g.vertex_ids.push_back(id);
    }
    auto lookup = [&](const std::string &id, const std::string &where) {
        auto it = index.find(id);
        if (it == index.end()) throw schema_error(where + ": unknown vertex '" + id + "'");
        return it->second;
    };
    const json &edges = require_field(j, "edges", "graph");
    if (!edges.is_array()) throw schema_error("graph.edges: expected an array");
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string where = "graph.edges[" + std::to_string(k) + "]";
        const json &e = edges[k];
        GraphEdge edge;
        edge.u = lookup(require_string(require_field(e, "u", where), where + ".u"), where + ".u");
        edge.v = lookup(require_string(require_field(e, "v", where), where + ".v"), where + ".v");
        edge.length = require_number(require_field(e, "length", where), where + ".length");
        for (const char *field : {"q_samples", "b_samples"}) {
            if (!e.contains(field)) continue;
            const json &arr = e.at(field);
            if (!arr.is_array()) throw schema_error(where + "." + field + ": expected an array");
            std::vector<double> samples;
            for (std::size_t s = 0; s < arr.size(); ++s) {
                samples.push_back(require_number(
                    arr[s], where + "." + field + "[" + std::to_string(s) + "]"));
            }
            (std::string(field) == "q_samples" ? edge.electric : edge.magnetic).samples =
                std::move(samples);
        }
        g.edges.push_back(std::move(edge));
    }
    if (j.contains("dirichlet")) {
        const json &d = j.at("dirichlet");
        if (!d.is_array()) throw schema_error("graph.dirichlet: expected an array of ids");
        for (std::size_t i = 0; i < d.size(); ++i) {
            const std::string where = "graph.dirichlet[" + std::to_string(i) + "]";
            g.dirichlet.insert(lookup(require_string(d[i], where), where));
        }
    }
    if (j.contains("delta")) {
        const json &d = j.at("delta");
        if (!d.is_object()) throw schema_error("graph.delta: expected an object {id: sigma}");
        for (auto it = d.begin(); it != d.end(); ++it) {
            g.delta_strengths[lookup(it.key(), "graph.delta")] =
                io_detail::require_number(it.value(), "graph.delta." + it.key());
        }
    }
    g.validate();
    return g;
}

inline json graph_to_json(const MetricGraph &g) {
    json out;
    out["vertices"] = g.vertex_ids;
    json edges = json::array();
    for (const auto &e : g.edges) {
        json je;
        je["u"] = g.vertex_ids[e.u];
        je["v"] = g.vertex_ids[e.v];
        je["length"] = e.length;
        if (!e.electric.zero()) je["q_samples"] = e.electric.samples;
        if (!e.magnetic.zero()) je["b_samples"] = e.magnetic.samples;
        edges.push_back(std::move(je));
    }
    out["edges"] = std::move(edges);
    json dirichlet = json::array();
    for (std::size_t v : g.dirichlet) dirichlet.push_back(g.vertex_ids[v]);
    out["dirichlet"] = std::move(dirichlet);
    json delta = json::object();
    for (const auto &[v, sigma] : g.delta_strengths) delta[g.vertex_ids[v]] = sigma;
    out["delta"] = std::move(delta);
    return out;
}

inline json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw schema_error(path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write file: " + path);
    out << content;
}

} // namespace heatlab
