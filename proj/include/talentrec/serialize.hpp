#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "talentrec/centrality.hpp"
#include "talentrec/csv.hpp"
#include "talentrec/embed.hpp"
#include "talentrec/error.hpp"
#include "talentrec/eval.hpp"
#include "talentrec/features.hpp"
#include "talentrec/graph.hpp"
#include "talentrec/model.hpp"

namespace talentrec {

using json = nlohmann::json;

// All artifacts are written via temp-plus-rename so a crashed stage never
// leaves a half-written file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

inline json load_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("malformed json in " + path.string() + ": " + e.what());
    }
}

// ---- matrices ----

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DataError("checkpoint: malformed matrix");
    Matrix m(j.size(), j[0].size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != m.cols()) throw DataError("checkpoint: ragged matrix");
        for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

// ---- checkpoint.json ----

inline constexpr const char* kCheckpointFormat = "talentrec-checkpoint-v1";

inline json checkpoint_to_json(const FusionModel& m) {
    json j;
    j["format"] = kCheckpointFormat;
    j["kind"] = kind_name(m.kind);
    j["dims"] = {{"in", m.in_dim}, {"hidden", m.hidden_dim}, {"out", m.out_dim}};
    j["seed"] = m.seed;
    auto tower_json = [](const GCNTower& t) {
        return json{{"w1", matrix_to_json(t.l1.w)},
                    {"b1", t.l1.b},
                    {"w2", matrix_to_json(t.l2.w)},
                    {"b2", t.l2.b}};
    };
    j["towers"]["str"] = tower_json(m.tower_str);
    if (kind_uses_two_towers(m.kind)) j["towers"]["ssim"] = tower_json(m.tower_ssim);
    if (m.kind == ModelKind::weighted_sum) j["head"] = {{"alpha", m.alpha}};
    if (m.kind == ModelKind::attention) {
        j["head"] = {{"attn_w", m.attn_w}, {"attn_b", m.attn_b}};
    }
    if (m.kind == ModelKind::gating) {
        j["head"] = {{"gate_w", matrix_to_json(m.gate_w)}, {"gate_b", m.gate_b}};
    }
    return j;
}

inline void save_checkpoint(const FusionModel& m, const std::filesystem::path& path) {
    write_file_atomic(path, checkpoint_to_json(m).dump(1) + "\n");
}

inline FusionModel checkpoint_from_json(const json& j) {
    if (!j.contains("format") || j["format"] != kCheckpointFormat) {
        throw DataError("checkpoint: unknown format tag");
    }
    FusionModel m;
    m.kind = kind_from_name(j.at("kind").get<std::string>());
    if (!kind_is_gnn(m.kind)) throw DataError("checkpoint: heuristic has no checkpoint");
    m.in_dim = j.at("dims").at("in").get<int>();
    m.hidden_dim = j.at("dims").at("hidden").get<int>();
    m.out_dim = j.at("dims").at("out").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    auto tower_from = [](const json& t) {
        GCNTower tower;
        tower.l1.w = matrix_from_json(t.at("w1"));
        tower.l1.b = t.at("b1").get<std::vector<double>>();
        tower.l2.w = matrix_from_json(t.at("w2"));
        tower.l2.b = t.at("b2").get<std::vector<double>>();
        return tower;
    };
    m.tower_str = tower_from(j.at("towers").at("str"));
    if (kind_uses_two_towers(m.kind)) m.tower_ssim = tower_from(j.at("towers").at("ssim"));
    if (m.kind == ModelKind::weighted_sum) m.alpha = j.at("head").at("alpha").get<double>();
    if (m.kind == ModelKind::attention) {
        m.attn_w = j.at("head").at("attn_w").get<std::vector<double>>();
        m.attn_b = j.at("head").at("attn_b").get<double>();
    }
    if (m.kind == ModelKind::gating) {
        m.gate_w = matrix_from_json(j.at("head").at("gate_w"));
        m.gate_b = j.at("head").at("gate_b").get<std::vector<double>>();
    }
    return m;
}

inline FusionModel load_checkpoint(const std::filesystem::path& path) {
    return checkpoint_from_json(load_json(path));
}

// ---- embeddings.json / centroids.csv ----

inline void save_embeddings(const WordEmbeddings& emb, const std::filesystem::path& path) {
    json j;
    j["dim"] = emb.dim;
    j["vocab"] = emb.vocab;
    j["vectors"] = matrix_to_json(emb.vectors);
    write_file_atomic(path, j.dump(1) + "\n");
}

inline WordEmbeddings load_embeddings(const std::filesystem::path& path) {
    const json j = load_json(path);
    WordEmbeddings emb;
    emb.dim = j.at("dim").get<int>();
    emb.vocab = j.at("vocab").get<std::vector<std::string>>();
    emb.vectors = matrix_from_json(j.at("vectors"));
    for (std::size_t i = 0; i < emb.vocab.size(); ++i) emb.index[emb.vocab[i]] = static_cast<int>(i);
    return emb;
}

inline void save_centroids(const NodeSemantics& sem, const std::filesystem::path& path) {
    std::string out;
    out += "employee_id,coverage";
    for (int d = 0; d < sem.dim; ++d) out += ",v" + std::to_string(d);
    out += '\n';
    for (std::size_t i = 0; i < sem.order.size(); ++i) {
        out += sem.order[i] + ',' + std::to_string(sem.coverage[i]);
        auto row = sem.centroid.row(i);
        for (int d = 0; d < sem.dim; ++d) out += ',' + fmt_double(row[d]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

inline NodeSemantics load_centroids(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    NodeSemantics sem;
    sem.dim = static_cast<int>(table.header.size()) - 2;
    sem.centroid = Matrix(table.rows.size(), sem.dim);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        sem.index[row[0]] = static_cast<int>(i);
        sem.order.push_back(row[0]);
        sem.coverage.push_back(std::stoi(row[1]));
        for (int d = 0; d < sem.dim; ++d) sem.centroid(i, d) = std::stod(row[2 + d]);
    }
    return sem;
}

// ---- graph files: edge-list csv plus a json header ----

inline void save_graph(const WeightedGraph& g, const std::filesystem::path& csv_path,
                       const std::filesystem::path& json_path) {
    std::string out = "i,j,weight\n";
    for (const auto& e : g.edges) {
        out += std::to_string(e.u) + ',' + std::to_string(e.v) + ',' + fmt_double(e.w) + '\n';
    }
    write_file_atomic(csv_path, out);
    json j;
    j["n"] = g.n();
    j["node_index"] = g.node_index;
    write_file_atomic(json_path, j.dump(1) + "\n");
}

inline WeightedGraph load_graph(const std::filesystem::path& csv_path,
                                const std::filesystem::path& json_path) {
    WeightedGraph g;
    const json j = load_json(json_path);
    const auto index = j.at("node_index").get<std::map<std::string, int>>();
    g.ids.resize(j.at("n").get<int>());
    for (const auto& [id, idx] : index) {
        g.node_index[id] = idx;
        g.ids[idx] = id;
    }
    const CsvTable table = read_csv(csv_path);
    for (const auto& row : table.rows) {
        g.edges.push_back({std::stoi(row[0]), std::stoi(row[1]), std::stod(row[2])});
    }
    g.validate();
    return g;
}

// ---- centrality.csv ----

inline void save_centralities(const CentralityVector& c, const std::filesystem::path& path) {
    std::string out = "employee_id,degree,closeness,betweenness,eigenvector\n";
    for (std::size_t i = 0; i < c.order.size(); ++i) {
        out += c.order[i] + ',' + fmt_double(c.degree[i]) + ',' + fmt_double(c.closeness[i]) + ',' +
               fmt_double(c.betweenness[i]) + ',' + fmt_double(c.eigenvector[i]) + '\n';
    }
    write_file_atomic(path, out);
}

inline CentralityVector load_centralities(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    CentralityVector c;
    for (const auto& row : table.rows) {
        c.order.push_back(row[0]);
        c.degree.push_back(std::stod(row[1]));
        c.closeness.push_back(std::stod(row[2]));
        c.betweenness.push_back(std::stod(row[3]));
        c.eigenvector.push_back(std::stod(row[4]));
    }
    return c;
}

// ---- features.csv ----

inline void save_features(const NodeFeatures& f, const std::filesystem::path& path) {
    const int dim = static_cast<int>(f.x.cols());
    std::string out = "employee_id";
    for (int d = 0; d < dim; ++d) out += ",x" + std::to_string(d);
    out += '\n';
    for (std::size_t i = 0; i < f.order.size(); ++i) {
        out += f.order[i];
        for (int d = 0; d < dim; ++d) out += ',' + fmt_double(f.x(i, d));
        out += '\n';
    }
    write_file_atomic(path, out);
}

inline NodeFeatures load_features(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    NodeFeatures f;
    const int dim = static_cast<int>(table.header.size()) - 1;
    f.semantic_dim = dim - 4;
    f.x = Matrix(table.rows.size(), dim);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        f.order.push_back(table.rows[i][0]);
        for (int d = 0; d < dim; ++d) f.x(i, d) = std::stod(table.rows[i][1 + d]);
    }
    return f;
}

// ---- report.json / rankings.csv ----

inline json ranking_report_to_json(const RankingReport& report, const GateReport* gate = nullptr) {
    json j;
    j["model_kind"] = report.model_kind;
    j["seed"] = report.seed;
    json hits;
    for (const auto& [k, v] : report.hit_at) hits[std::to_string(k)] = v;
    j["hit_at"] = std::move(hits);
    j["skipped_queries"] = report.skipped_queries;
    json queries = json::array();
    for (const auto& [query, ranked] : report.per_query) {
        json entry;
        entry["query"] = query;
        json list = json::array();
        for (const auto& rc : ranked) list.push_back({rc.id, rc.score});
        entry["ranking"] = std::move(list);
        queries.push_back(std::move(entry));
    }
    j["queries"] = std::move(queries);
    if (gate) {
        j["gate"] = {{"per_family_mean_gate", gate->per_family_mean_gate},
                     {"per_role_gate_variance", gate->per_role_gate_variance}};
    }
    return j;
}

inline void save_rankings_csv(const RankingReport& report, const std::filesystem::path& path) {
    std::string out = "query,candidate,rank,score\n";
    for (const auto& [query, ranked] : report.per_query) {
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            out += query + ',' + ranked[r].id + ',' + std::to_string(r + 1) + ',' +
                   fmt_double(ranked[r].score) + '\n';
        }
    }
    write_file_atomic(path, out);
}

inline json gate_report_to_json(const GateReport& g) {
    return {{"per_family_mean_gate", g.per_family_mean_gate},
            {"per_role_gate_variance", g.per_role_gate_variance}};
}

} // namespace talentrec
