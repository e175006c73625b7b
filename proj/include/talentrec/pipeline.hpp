#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "talentrec/baseline.hpp"
#include "talentrec/centrality.hpp"
#include "talentrec/embed.hpp"
#include "talentrec/eval.hpp"
#include "talentrec/features.hpp"
#include "talentrec/graph.hpp"
#include "talentrec/model.hpp"
#include "talentrec/orgdata.hpp"
#include "talentrec/serialize.hpp"
#include "talentrec/sha256.hpp"
#include "talentrec/textprep.hpp"
#include "talentrec/trainer.hpp"

namespace talentrec {

namespace fs = std::filesystem;

struct PipelineConfig {
    // external inputs (ingest mode)
    std::string emails_path;
    std::string roster_path;
    std::string blocklist_path;
    std::string job_corpus_path; // optional supplementary training sentences
    std::string workdir = "work";
    bool synthetic = false;

    SyntheticOrgConfig synth;
    PruneOptions prune;
    SkipgramConfig embedding;
    double tau = 0.75;
    double tau_percentile = -1.0; // >= 0 derives tau from the cosine distribution
    bool log_structure_weights = false;
    BaselineWeights baseline;
    TrainConfig train;
    ComboF1Config validation;
    std::vector<int> ks = {30, 100};
    std::vector<std::string> models = {"heuristic",    "single-str", "single-ssim",
                                       "early-concat", "late-concat", "weighted",
                                       "attention",    "gating"};

    // One master seed drives every stage of a run.
    void set_master_seed(std::uint64_t seed) {
        synth.rng_seed = seed;
        embedding.seed = seed;
        train.seed = seed;
        validation.seed = seed;
    }
};

inline PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    auto get = [&](const json& obj, const char* key, auto& out) {
        if (obj.contains(key)) out = obj.at(key).get<std::decay_t<decltype(out)>>();
    };
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        get(p, "emails", cfg.emails_path);
        get(p, "roster", cfg.roster_path);
        get(p, "blocklist", cfg.blocklist_path);
        get(p, "job_corpus", cfg.job_corpus_path);
        get(p, "workdir", cfg.workdir);
    }
    get(j, "synthetic", cfg.synthetic);
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        get(s, "n_employees", cfg.synth.n_employees);
        get(s, "n_families", cfg.synth.n_families);
        get(s, "n_roles_per_family", cfg.synth.n_roles_per_family);
        get(s, "vocab_per_family", cfg.synth.vocab_per_family);
        get(s, "topic_overlap", cfg.synth.topic_overlap);
        get(s, "intra_role_email_rate", cfg.synth.intra_role_email_rate);
        get(s, "cross_family_email_rate", cfg.synth.cross_family_email_rate);
        get(s, "text_informativeness", cfg.synth.text_informativeness);
        get(s, "structure_informativeness", cfg.synth.structure_informativeness);
        get(s, "rng_seed", cfg.synth.rng_seed);
    }
    if (j.contains("prune")) {
        get(j.at("prune"), "rank_trim_fraction", cfg.prune.rank_trim_fraction);
        get(j.at("prune"), "tfidf_floor", cfg.prune.tfidf_floor);
    }
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        get(e, "dim", cfg.embedding.dim);
        get(e, "window", cfg.embedding.window);
        get(e, "negatives", cfg.embedding.negatives);
        get(e, "epochs", cfg.embedding.epochs);
        get(e, "learning_rate", cfg.embedding.learning_rate);
        get(e, "seed", cfg.embedding.seed);
    }
    get(j, "tau", cfg.tau);
    get(j, "tau_percentile", cfg.tau_percentile);
    get(j, "log_structure_weights", cfg.log_structure_weights);
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        get(b, "alpha_s", cfg.baseline.alpha_s);
        get(b, "alpha_d", cfg.baseline.alpha_d);
        get(b, "alpha_c", cfg.baseline.alpha_c);
        get(b, "alpha_b", cfg.baseline.alpha_b);
        get(b, "alpha_e", cfg.baseline.alpha_e);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        get(t, "margin", cfg.train.margin);
        get(t, "negatives_per_positive", cfg.train.negatives_per_positive);
        get(t, "epochs", cfg.train.epochs);
        get(t, "learning_rate", cfg.train.learning_rate);
        get(t, "seed", cfg.train.seed);
        get(t, "query_holdout_fraction", cfg.train.query_holdout_fraction);
        get(t, "hidden_dim", cfg.train.hidden_dim);
        get(t, "out_dim", cfg.train.out_dim);
    }
    if (j.contains("validation")) {
        const auto& v = j.at("validation");
        get(v, "folds", cfg.validation.folds);
        get(v, "epochs", cfg.validation.epochs);
        get(v, "learning_rate", cfg.validation.learning_rate);
        get(v, "l2", cfg.validation.l2);
    }
    get(j, "ks", cfg.ks);
    get(j, "models", cfg.models);
    return cfg;
}

inline PipelineConfig load_config(const fs::path& path) {
    try {
        return config_from_json(load_json(path));
    } catch (const json::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
}

// Orchestrates the stage graph over one working directory. Stage outputs are
// written atomically; manifest.json records input/output hashes so stale
// artifacts are detected instead of silently reused.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)), wd_(cfg_.workdir) {
        fs::create_directories(wd_);
        manifest_path_ = wd_ / "manifest.json";
        if (fs::exists(manifest_path_)) {
            manifest_ = load_json(manifest_path_);
        } else {
            manifest_ = json{{"stages", json::object()}};
        }
    }

    const PipelineConfig& config() const { return cfg_; }

    void run_stage(const std::string& stage) {
        if (stage == "synth") stage_synth();
        else if (stage == "ingest") stage_ingest();
        else if (stage == "embed") stage_embed();
        else if (stage == "graphs") stage_graphs();
        else if (stage == "features") stage_features();
        else if (stage == "validate") stage_validate();
        else if (stage == "baseline") stage_baseline();
        else if (stage == "gates") stage_gates();
        else if (stage == "compare") stage_compare();
        else throw ConfigError("unknown stage '" + stage + "'");
    }

    void run_all() {
        if (cfg_.synthetic) stage_synth();
        else stage_ingest();
        stage_embed();
        stage_graphs();
        stage_features();
        stage_validate();
        for (const auto& name : cfg_.models) {
            const ModelKind kind = kind_from_name(name);
            if (kind == ModelKind::heuristic) {
                stage_baseline();
            } else {
                stage_train(kind);
                stage_evaluate(kind);
            }
        }
        if (has_model("gating")) stage_gates();
        stage_compare();
    }

    // ---- stages ----

    void stage_synth() {
        const auto org = generate_synthetic_org(cfg_.synth);
        write_emails_to(org.emails, wd_ / "emails.csv");
        write_roster_to(org.roster, wd_ / "roster.csv");
        record_stage("synth", {}, {"emails.csv", "roster.csv"},
                     {{"config", synth_params_json()}});
    }

    void stage_ingest() {
        if (cfg_.emails_path.empty() || cfg_.roster_path.empty()) {
            throw ConfigError("ingest: paths.emails and paths.roster must be configured");
        }
        const OrgRoster roster = load_roster(cfg_.roster_path);
        const EmailLog log = load_email_log(cfg_.emails_path, roster);
        write_emails_to(log.records, wd_ / "emails.csv");
        write_roster_to(roster, wd_ / "roster.csv");
        record_stage("ingest", {}, {"emails.csv", "roster.csv"},
                     {{"dropped_rows", log.dropped_rows},
                      {"source_emails_sha256", sha256_file(cfg_.emails_path)},
                      {"source_roster_sha256", sha256_file(cfg_.roster_path)}});
    }

    void stage_embed() {
        require_inputs("embed", {"emails.csv", "roster.csv"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const EmailLog log = load_email_log(wd_ / "emails.csv", roster);
        const CorpusStats stats = build_corpus_stats(log.records);
        std::set<std::string> blocklist;
        if (!cfg_.blocklist_path.empty()) blocklist = load_blocklist(cfg_.blocklist_path);
        const PruneResult pruned = prune_tokens(log.records, stats, blocklist, cfg_.prune);
        std::vector<std::vector<std::string>> extra;
        if (!cfg_.job_corpus_path.empty()) extra = load_job_corpus(cfg_.job_corpus_path);
        const SkipgramResult sg = train_skipgram(pruned.records, cfg_.embedding, extra);
        const NodeSemantics sem = node_centroids(pruned.records, sg.embeddings, roster);

        write_emails_to(pruned.records, wd_ / "pruned_emails.csv");
        save_embeddings(sg.embeddings, wd_ / "embeddings.json");
        save_centroids(sem, wd_ / "centroids.csv");
        json summary;
        summary["removed_tokens"] = json(std::vector<std::string>(pruned.removed_tokens.begin(),
                                                                  pruned.removed_tokens.end()));
        summary["dropped_records"] = pruned.dropped_records;
        summary["epoch_loss"] = sg.epoch_loss;
        write_file_atomic(wd_ / "prune_summary.json", summary.dump(1) + "\n");
        record_stage("embed", {"emails.csv", "roster.csv"},
                     {"pruned_emails.csv", "embeddings.json", "centroids.csv", "prune_summary.json"},
                     {{"prune",
                       {{"rank_trim_fraction", cfg_.prune.rank_trim_fraction},
                        {"tfidf_floor", cfg_.prune.tfidf_floor}}},
                      {"skipgram",
                       {{"dim", cfg_.embedding.dim},
                        {"window", cfg_.embedding.window},
                        {"negatives", cfg_.embedding.negatives},
                        {"epochs", cfg_.embedding.epochs},
                        {"learning_rate", cfg_.embedding.learning_rate},
                        {"seed", cfg_.embedding.seed}}}});
    }

    void stage_graphs() {
        require_inputs("graphs", {"emails.csv", "roster.csv", "centroids.csv"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const EmailLog log = load_email_log(wd_ / "emails.csv", roster);
        WeightedGraph g_str = build_structure_network(log.records, roster);
        if (cfg_.log_structure_weights) {
            for (auto& e : g_str.edges) e.w = std::log1p(e.w);
        }
        const NodeSemantics sem = load_centroids(wd_ / "centroids.csv");
        const double tau = effective_tau(sem);
        const WeightedGraph g_ssim = build_semantic_network(sem, tau);
        save_graph(g_str, wd_ / "g_str.csv", wd_ / "g_str.json");
        save_graph(g_ssim, wd_ / "g_ssim.csv", wd_ / "g_ssim.json");
        record_stage("graphs", {"emails.csv", "roster.csv", "centroids.csv"},
                     {"g_str.csv", "g_str.json", "g_ssim.csv", "g_ssim.json"},
                     {{"tau", tau}, {"log_structure_weights", cfg_.log_structure_weights}});
    }

    void stage_features() {
        require_inputs("features", {"g_str.csv", "g_str.json", "centroids.csv"});
        const WeightedGraph g_str = load_graph(wd_ / "g_str.csv", wd_ / "g_str.json");
        const NodeSemantics sem = load_centroids(wd_ / "centroids.csv");
        const CentralityVector cent = compute_centralities(g_str);
        const NodeFeatures features = assemble_features(sem, cent);
        save_centralities(cent, wd_ / "centrality.csv");
        save_features(features, wd_ / "features.csv");
        record_stage("features", {"g_str.csv", "g_str.json", "centroids.csv"},
                     {"centrality.csv", "features.csv"}, json::object());
    }

    void stage_validate();

    void stage_baseline() {
        require_inputs("baseline", {"centroids.csv", "features.csv", "roster.csv"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const NodeSemantics sem = load_centroids(wd_ / "centroids.csv");
        const NodeFeatures features = load_features(wd_ / "features.csv");
        const Split split = make_split(roster, cfg_.train);
        std::map<EmployeeId, int> index;
        for (std::size_t i = 0; i < features.order.size(); ++i) {
            index[features.order[i]] = static_cast<int>(i);
        }
        RankingReport report = hit_at_k(
            [&](const EmployeeId& q, const EmployeeId& c) {
                return heuristic_score(index.at(q), index.at(c), sem, features, cfg_.baseline);
            },
            split, roster, cfg_.ks, "heuristic", cfg_.train.seed);
        const std::string dir = "models/heuristic/";
        write_file_atomic(wd_ / (dir + "report.json"),
                          ranking_report_to_json(report).dump(1) + "\n");
        save_rankings_csv(report, wd_ / (dir + "rankings.csv"));
        record_stage("baseline", {"centroids.csv", "features.csv", "roster.csv"},
                     {dir + "report.json", dir + "rankings.csv"},
                     {{"weights",
                       {{"alpha_s", cfg_.baseline.alpha_s},
                        {"alpha_d", cfg_.baseline.alpha_d},
                        {"alpha_c", cfg_.baseline.alpha_c},
                        {"alpha_b", cfg_.baseline.alpha_b},
                        {"alpha_e", cfg_.baseline.alpha_e}}},
                      {"split", split_params_json()}});
    }

    void stage_train(ModelKind kind) {
        if (kind == ModelKind::heuristic) {
            stage_baseline();
            return;
        }
        require_inputs("train", {"features.csv", "roster.csv", "g_str.csv", "g_str.json",
                                 "g_ssim.csv", "g_ssim.json"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const NodeFeatures features = load_features(wd_ / "features.csv");
        const Loaded ops = load_operators(kind);
        const Split split = make_split(roster, cfg_.train);
        const TrainResult result = train(kind, features, ops.set, roster, split, cfg_.train);
        const std::string dir = std::string("models/") + kind_name(kind) + "/";
        save_checkpoint(result.model, wd_ / (dir + "checkpoint.json"));
        std::string curve = "epoch,loss\n";
        for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
            curve += std::to_string(e) + ',' + fmt_double(result.loss_curve[e]) + '\n';
        }
        write_file_atomic(wd_ / (dir + "loss_curve.csv"), curve);
        record_stage(std::string("train:") + kind_name(kind),
                     {"features.csv", "roster.csv", "g_str.csv", "g_ssim.csv"},
                     {dir + "checkpoint.json", dir + "loss_curve.csv"}, train_params_json());
    }

    void stage_evaluate(ModelKind kind) {
        if (kind == ModelKind::heuristic) {
            stage_baseline();
            return;
        }
        const std::string dir = std::string("models/") + kind_name(kind) + "/";
        require_inputs("evaluate",
                       {dir + "checkpoint.json", "features.csv", "roster.csv", "g_str.csv",
                        "g_str.json", "g_ssim.csv", "g_ssim.json"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const NodeFeatures features = load_features(wd_ / "features.csv");
        const FusionModel model = load_checkpoint(wd_ / (dir + "checkpoint.json"));
        const Loaded ops = load_operators(kind);
        const Split split = make_split(roster, cfg_.train);
        ForwardCache cache;
        const Matrix& h = forward(model, features.x, ops.set, cache);
        RankingReport report =
            evaluate_embeddings(h, features, split, roster, cfg_.ks, kind, cfg_.train.seed);
        std::optional<GateReport> gate;
        if (kind == ModelKind::gating) {
            gate = gate_analysis(model, features, ops.set, roster);
        }
        write_file_atomic(wd_ / (dir + "report.json"),
                          ranking_report_to_json(report, gate ? &*gate : nullptr).dump(1) + "\n");
        save_rankings_csv(report, wd_ / (dir + "rankings.csv"));
        record_stage(std::string("evaluate:") + kind_name(kind),
                     {dir + "checkpoint.json", "features.csv", "roster.csv"},
                     {dir + "report.json", dir + "rankings.csv"},
                     {{"ks", cfg_.ks}, {"split", split_params_json()}});
    }

    void stage_gates() {
        const std::string checkpoint = "models/gating/checkpoint.json";
        require_inputs("gates", {checkpoint, "features.csv", "roster.csv", "g_str.csv",
                                 "g_str.json", "g_ssim.csv", "g_ssim.json"});
        const OrgRoster roster = load_roster(wd_ / "roster.csv");
        const NodeFeatures features = load_features(wd_ / "features.csv");
        const FusionModel model = load_checkpoint(wd_ / checkpoint);
        const Loaded ops = load_operators(ModelKind::gating);
        const GateReport report = gate_analysis(model, features, ops.set, roster);
        write_file_atomic(wd_ / "models/gating/gate_report.json",
                          gate_report_to_json(report).dump(1) + "\n");
        record_stage("gates", {checkpoint, "features.csv", "roster.csv"},
                     {"models/gating/gate_report.json"}, json::object());
    }

    void stage_compare();

    // ---- support ----

    json manifest() const { return manifest_; }

    fs::path artifact(const std::string& rel) const { return wd_ / rel; }

private:
    struct Loaded {
        WeightedGraph g_str, g_ssim, g_early;
        NormalizedOperator op_str, op_ssim, op_early;
        OperatorSet set;
    };

    Loaded load_operators(ModelKind kind) {
        Loaded out;
        out.g_str = load_graph(wd_ / "g_str.csv", wd_ / "g_str.json");
        out.g_ssim = load_graph(wd_ / "g_ssim.csv", wd_ / "g_ssim.json");
        out.op_str = normalize(out.g_str);
        out.op_ssim = normalize(out.g_ssim);
        out.set.str = &out.op_str;
        out.set.ssim = &out.op_ssim;
        if (kind == ModelKind::early_concat) {
            out.g_early = early_fuse(out.g_str, out.g_ssim);
            out.op_early = normalize(out.g_early);
            out.set.early = &out.op_early;
        }
        return out;
    }

    double effective_tau(const NodeSemantics& sem) const {
        if (cfg_.tau_percentile < 0.0) return cfg_.tau;
        std::vector<double> sims;
        const int n = static_cast<int>(sem.order.size());
        for (int i = 0; i < n; ++i) {
            if (sem.coverage[i] == 0) continue;
            for (int j = i + 1; j < n; ++j) {
                if (sem.coverage[j] == 0) continue;
                sims.push_back(cosine(sem.centroid.row(i), sem.centroid.row(j)));
            }
        }
        if (sims.empty()) return cfg_.tau;
        std::sort(sims.begin(), sims.end());
        const std::size_t idx = std::min(sims.size() - 1,
                                         static_cast<std::size_t>(cfg_.tau_percentile * sims.size()));
        const double tau = sims[idx];
        if (!(tau > 0.0 && tau < 1.0)) return cfg_.tau;
        return tau;
    }

    bool has_model(const std::string& name) const {
        for (const auto& m : cfg_.models) {
            if (m == name) return true;
        }
        return false;
    }

    static std::vector<std::vector<std::string>> load_job_corpus(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw DataError("job corpus: cannot open " + path.string());
        std::vector<std::vector<std::string>> sentences;
        std::string line;
        while (std::getline(in, line)) {
            auto tokens = detail::tokenize_subject(line);
            if (!tokens.empty()) sentences.push_back(std::move(tokens));
        }
        return sentences;
    }

    void write_emails_to(const std::vector<EmailRecord>& emails, const fs::path& path) {
        fs::create_directories(path.parent_path());
        const fs::path tmp = path.string() + ".tmp";
        write_emails_csv(emails, tmp);
        fs::rename(tmp, path);
    }

    void write_roster_to(const OrgRoster& roster, const fs::path& path) {
        fs::create_directories(path.parent_path());
        const fs::path tmp = path.string() + ".tmp";
        write_roster_csv(roster, tmp);
        fs::rename(tmp, path);
    }

    json synth_params_json() const {
        return {{"n_employees", cfg_.synth.n_employees},
                {"n_families", cfg_.synth.n_families},
                {"n_roles_per_family", cfg_.synth.n_roles_per_family},
                {"vocab_per_family", cfg_.synth.vocab_per_family},
                {"topic_overlap", cfg_.synth.topic_overlap},
                {"intra_role_email_rate", cfg_.synth.intra_role_email_rate},
                {"cross_family_email_rate", cfg_.synth.cross_family_email_rate},
                {"text_informativeness", cfg_.synth.text_informativeness},
                {"structure_informativeness", cfg_.synth.structure_informativeness},
                {"rng_seed", cfg_.synth.rng_seed}};
    }

    json split_params_json() const {
        return {{"seed", cfg_.train.seed},
                {"query_holdout_fraction", cfg_.train.query_holdout_fraction}};
    }

    json train_params_json() const {
        return {{"margin", cfg_.train.margin},
                {"negatives_per_positive", cfg_.train.negatives_per_positive},
                {"epochs", cfg_.train.epochs},
                {"learning_rate", cfg_.train.learning_rate},
                {"seed", cfg_.train.seed},
                {"query_holdout_fraction", cfg_.train.query_holdout_fraction},
                {"hidden_dim", cfg_.train.hidden_dim},
                {"out_dim", cfg_.train.out_dim}};
    }

    // The stage that produces each artifact, for actionable error messages.
    std::string producer_of(const std::string& artifact) const {
        if (artifact == "emails.csv" || artifact == "roster.csv") {
            return cfg_.synthetic ? "synth" : "ingest";
        }
        if (artifact == "pruned_emails.csv" || artifact == "embeddings.json" ||
            artifact == "centroids.csv" || artifact == "prune_summary.json") {
            return "embed";
        }
        if (artifact.rfind("g_", 0) == 0) return "graphs";
        if (artifact == "centrality.csv" || artifact == "features.csv") return "features";
        if (artifact.find("checkpoint.json") != std::string::npos ||
            artifact.find("loss_curve.csv") != std::string::npos) {
            return "train";
        }
        if (artifact.find("models/heuristic/") == 0) return "baseline";
        if (artifact.find("report.json") != std::string::npos ||
            artifact.find("rankings.csv") != std::string::npos) {
            return "evaluate";
        }
        return "an earlier stage";
    }

    void require_inputs(const std::string& stage, const std::vector<std::string>& inputs) {
        for (const auto& rel : inputs) {
            const fs::path p = wd_ / rel;
            if (!fs::exists(p)) {
                throw DataError(stage + ": missing upstream artifact '" + rel + "' — run '" +
                                producer_of(rel) + "' first");
            }
            // Stale-cache detection: the hash recorded when the artifact was
            // produced must match the file on disk.
            const json& stages = manifest_.at("stages");
            for (auto it = stages.begin(); it != stages.end(); ++it) {
                const json& outputs = it.value().value("outputs", json::object());
                if (outputs.contains(rel)) {
                    if (outputs.at(rel).get<std::string>() != sha256_file(p)) {
                        throw DataError(stage + ": stale cache — '" + rel +
                                        "' changed since stage '" + it.key() +
                                        "' produced it; rerun '" + it.key() + "'");
                    }
                }
            }
        }
    }

    void record_stage(const std::string& stage, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs, const json& params) {
        json entry;
        json in = json::object();
        for (const auto& rel : inputs) in[rel] = sha256_file(wd_ / rel);
        json out = json::object();
        for (const auto& rel : outputs) out[rel] = sha256_file(wd_ / rel);
        entry["inputs"] = std::move(in);
        entry["outputs"] = std::move(out);
        entry["params"] = params;
        manifest_["stages"][stage] = std::move(entry);
        write_file_atomic(manifest_path_, manifest_.dump(1) + "\n");
    }

    PipelineConfig cfg_;
    fs::path wd_;
    fs::path manifest_path_;
    json manifest_;
};

// ---- validate stage: the exploratory analytics of the feature space ----

inline void Pipeline::stage_validate() {
    require_inputs("validate", {"centroids.csv", "centrality.csv", "features.csv", "roster.csv"});
    const OrgRoster roster = load_roster(wd_ / "roster.csv");
    const NodeSemantics sem = load_centroids(wd_ / "centroids.csv");
    const CentralityVector cent = load_centralities(wd_ / "centrality.csv");
    const NodeFeatures features = load_features(wd_ / "features.csv");

    const std::vector<std::string> families = roster.family_names();
    const std::vector<std::string> roles = roster.role_names();
    std::map<std::string, int> family_code, role_code;
    for (std::size_t i = 0; i < families.size(); ++i) family_code[families[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < roles.size(); ++i) role_code[roles[i]] = static_cast<int>(i);
    const int n = static_cast<int>(features.order.size());
    std::vector<int> family_labels(n), role_labels(n);
    std::vector<bool> is_leader(n);
    for (int i = 0; i < n; ++i) {
        const Employee* e = roster.find(features.order[i]);
        if (!e) throw DataError("validate: node missing from roster");
        family_labels[i] = family_code.at(e->job_family);
        role_labels[i] = role_code.at(e->role);
        is_leader[i] = e->role == "leader";
    }

    json report;

    // Per-feature silhouette against job families and role AUC. The 100-d
    // semantic block is reduced to its first principal component for the AUC.
    {
        Matrix s_block(n, features.semantic_dim);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < features.semantic_dim; ++d) s_block(i, d) = features.x(i, d);
        }
        json sil, auc;
        sil["s"] = silhouette(s_block, family_labels);
        const Matrix pc = pca_scores(s_block, 1);
        std::vector<double> pc1(n);
        for (int i = 0; i < n; ++i) pc1[i] = pc(i, 0);
        auc["s"] = role_auc(pc1, is_leader);
        const char* names[] = {"d", "c", "b", "e"};
        for (int c = 0; c < 4; ++c) {
            Matrix col(n, 1);
            std::vector<double> scalar(n);
            for (int i = 0; i < n; ++i) {
                col(i, 0) = features.x(i, features.centrality_column(c));
                scalar[i] = col(i, 0);
            }
            sil[names[c]] = silhouette(col, family_labels);
            auc[names[c]] = role_auc(scalar, is_leader);
        }
        report["silhouette_by_feature"] = std::move(sil);
        report["auc_by_feature"] = std::move(auc);
    }

    // 31-combination classification table.
    const std::vector<ComboF1Row> table =
        combo_f1(features, family_labels, role_labels, static_cast<int>(families.size()),
                 static_cast<int>(roles.size()), cfg_.validation);
    {
        json rows = json::array();
        std::string csv = "no,s,d,c,b,e,f1_job_family,f1_role\n";
        int no = 1;
        for (const auto& row : table) {
            rows.push_back({{"combo", row.combo},
                            {"f1_job_family", row.f1_family},
                            {"f1_role", row.f1_role}});
            csv += std::to_string(no++) + ',' + (row.has_s ? "1" : "0") + ',' +
                   (row.has_d ? "1" : "0") + ',' + (row.has_c ? "1" : "0") + ',' +
                   (row.has_b ? "1" : "0") + ',' + (row.has_e ? "1" : "0") + ',' +
                   fmt_double(row.f1_family) + ',' + fmt_double(row.f1_role) + '\n';
        }
        report["f1_table"] = std::move(rows);
        write_file_atomic(wd_ / "f1_table.csv", csv);
    }

    // Cross-family centroid similarity matrix.
    {
        const Matrix sim = family_similarity_matrix(sem, family_labels,
                                                    static_cast<int>(families.size()));
        report["family_similarity"] = {{"families", families}, {"matrix", matrix_to_json(sim)}};
    }

    // K-means on covered centroids (K = number of families) plus the
    // cluster-vs-family contingency table.
    {
        std::vector<int> covered;
        for (int i = 0; i < n; ++i) {
            if (sem.coverage[i] > 0) covered.push_back(i);
        }
        const int k = static_cast<int>(families.size());
        json km;
        if (static_cast<int>(covered.size()) >= k) {
            Matrix pts(covered.size(), sem.dim);
            std::vector<int> fam(covered.size());
            for (std::size_t i = 0; i < covered.size(); ++i) {
                for (int d = 0; d < sem.dim; ++d) pts(i, d) = sem.centroid(covered[i], d);
                fam[i] = family_labels[covered[i]];
            }
            const KmeansResult result = kmeans(pts, k, cfg_.validation.seed);
            km["k"] = k;
            km["inertia"] = result.inertia;
            km["contingency"] =
                contingency_table(result.assignment, fam, k, static_cast<int>(families.size()));
        } else {
            km["k"] = k;
            km["skipped"] = "fewer covered nodes than clusters";
        }
        report["kmeans"] = std::move(km);
    }

    // 2-d PCA projection of the semantic block, for external plotting.
    {
        Matrix s_block(n, features.semantic_dim);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < features.semantic_dim; ++d) s_block(i, d) = features.x(i, d);
        }
        const Matrix proj = pca_scores(s_block, 2);
        std::string csv = "employee_id,job_family,pc1,pc2\n";
        for (int i = 0; i < n; ++i) {
            csv += features.order[i] + ',' + families[family_labels[i]] + ',' +
                   fmt_double(proj(i, 0)) + ',' + fmt_double(proj(i, 1)) + '\n';
        }
        write_file_atomic(wd_ / "pca_projection.csv", csv);
    }

    write_file_atomic(wd_ / "validation_report.json", report.dump(1) + "\n");
    record_stage("validate", {"centroids.csv", "centrality.csv", "features.csv", "roster.csv"},
                 {"validation_report.json", "f1_table.csv", "pca_projection.csv"},
                 {{"folds", cfg_.validation.folds},
                  {"epochs", cfg_.validation.epochs},
                  {"learning_rate", cfg_.validation.learning_rate},
                  {"l2", cfg_.validation.l2},
                  {"seed", cfg_.validation.seed}});
}

// ---- compare stage: the seven-row summary across fusion strategies ----
//
// The two single-tower models share one "single-gcn" row (the better Hit@100
// of the two), matching the layout of the published comparison.

inline void Pipeline::stage_compare() {
    struct Row {
        std::string label;
        std::string note;
        std::map<int, double> hit_at;
    };
    auto load_report = [&](const std::string& kind) -> std::optional<json> {
        const fs::path p = wd_ / ("models/" + kind + "/report.json");
        if (!fs::exists(p)) return std::nullopt;
        return load_json(p);
    };
    auto hit_of = [&](const json& report) {
        std::map<int, double> hits;
        for (auto it = report.at("hit_at").begin(); it != report.at("hit_at").end(); ++it) {
            hits[std::stoi(it.key())] = it.value().get<double>();
        }
        return hits;
    };
    const int primary_k = cfg_.ks.empty() ? 100 : cfg_.ks.back();

    std::vector<Row> rows;
    std::vector<std::string> missing;
    for (const char* kind : {"gating", "attention", "weighted", "late-concat", "early-concat"}) {
        if (!has_model(kind)) continue;
        if (auto report = load_report(kind)) {
            rows.push_back({kind, "", hit_of(*report)});
        } else {
            missing.push_back(kind);
        }
    }
    {
        std::optional<Row> best_single;
        for (const char* kind : {"single-str", "single-ssim"}) {
            if (!has_model(kind)) continue;
            auto report = load_report(kind);
            if (!report) {
                missing.push_back(kind);
                continue;
            }
            Row row{"single-gcn", kind, hit_of(*report)};
            if (!best_single || row.hit_at[primary_k] > best_single->hit_at[primary_k]) {
                best_single = std::move(row);
            }
        }
        if (best_single) rows.push_back(std::move(*best_single));
    }
    if (has_model("heuristic")) {
        if (auto report = load_report("heuristic")) {
            rows.push_back({"heuristic", "", hit_of(*report)});
        } else {
            missing.push_back("heuristic");
        }
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        throw DataError("compare: missing reports for " + names +
                        " — run 'train' and 'evaluate' (or 'baseline') first");
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
        auto ita = a.hit_at.find(primary_k);
        auto itb = b.hit_at.find(primary_k);
        const double va = ita == a.hit_at.end() ? 0.0 : ita->second;
        const double vb = itb == b.hit_at.end() ? 0.0 : itb->second;
        return va > vb;
    });

    std::string csv = "model";
    for (int k : cfg_.ks) csv += ",hit_at_" + std::to_string(k);
    csv += ",note\n";
    for (const auto& row : rows) {
        csv += row.label;
        for (int k : cfg_.ks) {
            auto it = row.hit_at.find(k);
            csv += ',' + fmt_double(it == row.hit_at.end() ? 0.0 : it->second);
        }
        csv += ',' + row.note + '\n';
    }
    write_file_atomic(wd_ / "compare.csv", csv);
    record_stage("compare", {}, {"compare.csv"}, {{"ks", cfg_.ks}});
}

} // namespace talentrec
