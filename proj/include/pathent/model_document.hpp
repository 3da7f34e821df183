#pragma once

// Model file format: a single JSON document (comments allowed) that either
// spells out the system directly,
//
//   {
//     "schema_version": 1,
//     "label": "serial-2",
//     "dimension": 2,
//     "u": [1, 0],
//     "B": [[-1, 0], [1, -1]],            // row-major
//     "units": {"flux": "PgC/yr", "rate": "1/yr", "stock": "PgC"}
//   }
//
// or names a builtin,
//
//   {"schema_version": 1, "builtin": {"name": "emanuel", "params": {"xi": 2}}}.
//
// Exactly one of (u, B) or builtin must be present.

#include <json.hpp>
#include <map>
#include <optional>
#include <string>

#include "pathent/comsys.hpp"
#include "pathent/models.hpp"

namespace pathent {

struct ModelDocument {
    int schema_version = 1;
    std::string label;
    std::optional<int> dimension;
    std::optional<Vector> u;
    std::optional<Matrix> B;
    struct Units {
        std::string flux, rate, stock;
        bool operator==(const Units&) const = default;
    } units;
    struct Builtin {
        std::string name; // emanuel | wang | table1
        std::map<std::string, double> params;
        bool operator==(const Builtin&) const = default;
    };
    std::optional<Builtin> builtin;

    bool operator==(const ModelDocument& other) const {
        auto array_eq = [](const auto& a, const auto& b) {
            if (a.has_value() != b.has_value()) return false;
            if (!a.has_value()) return true;
            return a->rows() == b->rows() && a->cols() == b->cols() &&
                   (a->array() == b->array()).all();
        };
        return schema_version == other.schema_version && label == other.label &&
               dimension == other.dimension && array_eq(u, other.u) && array_eq(B, other.B) &&
               units == other.units && builtin == other.builtin;
    }
};

inline ModelDocument parse_model_document(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseFailure, e.what());
    }
    auto fail = [](const std::string& what) -> ModelDocument {
        throw Error(ErrorCode::ParseFailure, what);
    };
    if (!doc.is_object()) return fail("top-level value must be an object");

    ModelDocument model;
    model.schema_version = doc.value("schema_version", 1);
    model.label = doc.value("label", std::string{});
    if (doc.contains("dimension")) {
        if (!doc["dimension"].is_number_integer()) return fail("dimension must be an integer");
        model.dimension = doc["dimension"].get<int>();
    }
    if (doc.contains("units")) {
        const auto& units = doc["units"];
        if (!units.is_object()) return fail("units must be an object");
        model.units.flux = units.value("flux", std::string{});
        model.units.rate = units.value("rate", std::string{});
        model.units.stock = units.value("stock", std::string{});
    }

    const bool has_direct = doc.contains("u") || doc.contains("B");
    const bool has_builtin = doc.contains("builtin");
    if (has_direct == has_builtin) {
        return fail("exactly one of (u, B) or builtin must be present");
    }

    if (has_builtin) {
        const auto& builtin = doc["builtin"];
        if (!builtin.is_object() || !builtin.contains("name")) {
            return fail("builtin needs a name");
        }
        ModelDocument::Builtin spec;
        spec.name = builtin["name"].get<std::string>();
        if (builtin.contains("params")) {
            for (const auto& [key, value] : builtin["params"].items()) {
                if (!value.is_number()) return fail("builtin params must be numbers");
                spec.params[key] = value.get<double>();
            }
        }
        model.builtin = std::move(spec);
        return model;
    }

    if (!doc.contains("u") || !doc.contains("B")) return fail("u and B must both be present");
    const auto& u = doc["u"];
    const auto& B = doc["B"];
    if (!u.is_array() || u.empty()) return fail("u must be a nonempty array");
    const auto d = Eigen::Index(u.size());
    Vector input(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!u[size_t(i)].is_number()) return fail("u entries must be numbers");
        input[i] = u[size_t(i)].get<double>();
    }
    if (!B.is_array() || Eigen::Index(B.size()) != d) return fail("B must be a d x d array of rows");
    Matrix rates(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& row = B[size_t(i)];
        if (!row.is_array() || Eigen::Index(row.size()) != d) return fail("B rows must have length d");
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!row[size_t(j)].is_number()) return fail("B entries must be numbers");
            rates(i, j) = row[size_t(j)].get<double>();
        }
    }
    if (model.dimension && *model.dimension != int(d)) {
        return fail("dimension field disagrees with the array sizes");
    }
    model.u = std::move(input);
    model.B = std::move(rates);
    return model;
}

inline std::string serialize_model_document(const ModelDocument& model) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = model.schema_version;
    if (!model.label.empty()) doc["label"] = model.label;
    if (model.builtin) {
        doc["builtin"]["name"] = model.builtin->name;
        for (const auto& [key, value] : model.builtin->params) {
            doc["builtin"]["params"][key] = value;
        }
    } else {
        doc["dimension"] = int(model.u->size());
        doc["u"] = std::vector<double>(model.u->begin(), model.u->end());
        auto rows = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < model.B->rows(); ++i) {
            auto row = nlohmann::ordered_json::array();
            for (Eigen::Index j = 0; j < model.B->cols(); ++j) row.push_back((*model.B)(i, j));
            rows.push_back(std::move(row));
        }
        doc["B"] = std::move(rows);
    }
    if (!model.units.flux.empty() || !model.units.rate.empty() || !model.units.stock.empty()) {
        doc["units"]["flux"] = model.units.flux;
        doc["units"]["rate"] = model.units.rate;
        doc["units"]["stock"] = model.units.stock;
    }
    return doc.dump(2) + "\n";
}

inline ModelDocument document_from_system(const CompartmentalSystem& sys) {
    ModelDocument model;
    model.label = sys.label;
    model.dimension = int(sys.dimension());
    model.u = sys.u;
    model.B = sys.B;
    return model;
}

/// Builds the concrete system a document describes, resolving builtins.
inline CompartmentalSystem instantiate(const ModelDocument& model) {
    if (!model.builtin) {
        CompartmentalSystem sys{*model.u, *model.B, model.label};
        return sys;
    }
    const auto& spec = *model.builtin;
    auto param = [&](const std::string& key, double fallback) {
        auto found = spec.params.find(key);
        return found == spec.params.end() ? fallback : found->second;
    };
    if (spec.name == "emanuel") {
        return emanuel(param("xi", 1.0));
    }
    if (spec.name == "wang") {
        WangParameters p;
        p.mu_b = param("mu_b", p.mu_b);
        p.F_NPP = param("F_NPP", p.F_NPP);
        p.K_s = param("K_s", p.K_s);
        p.V_s = param("V_s", p.V_s);
        p.epsilon = param("epsilon", p.epsilon);
        return wang(p);
    }
    if (spec.name == "table1") {
        const int row = int(param("row", 0.0));
        auto systems = table1_systems(param("lambda", 1.0));
        if (row < 1 || row > int(systems.size())) {
            throw Error(ErrorCode::ParseFailure, "table1 row must be in 1..7");
        }
        return systems[size_t(row - 1)];
    }
    throw Error(ErrorCode::ParseFailure, "unknown builtin '" + spec.name + "'");
}

} // namespace pathent
