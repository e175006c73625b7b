// Command-line front end for the talent-recommendation pipeline. Stages are
// chained by `all` or run individually; artifacts live in one working
// directory whose manifest tracks input hashes.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "talentrec/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string workdir;
    std::string model;
    std::string models = "all";
    long long seed = -1;
    int epochs = -1;
    bool synthetic = false;
    bool from_scratch = false;
};

talentrec::PipelineConfig make_config(const CliOptions& opt) {
    talentrec::PipelineConfig cfg;
    if (!opt.config_path.empty()) cfg = talentrec::load_config(opt.config_path);
    if (!opt.workdir.empty()) cfg.workdir = opt.workdir;
    if (opt.synthetic) cfg.synthetic = true;
    if (opt.seed >= 0) cfg.set_master_seed(static_cast<std::uint64_t>(opt.seed));
    if (opt.epochs >= 0) cfg.train.epochs = opt.epochs;
    if (opt.models != "all") {
        cfg.models.clear();
        std::string cur;
        for (char c : opt.models + ",") {
            if (c == ',') {
                if (!cur.empty()) cfg.models.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        for (const auto& name : cfg.models) talentrec::kind_from_name(name); // validate early
    }
    return cfg;
}

void wipe_workdir(const talentrec::PipelineConfig& cfg) {
    std::error_code ec;
    std::filesystem::remove_all(cfg.workdir, ec);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-view talent recommendation pipeline"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON configuration file");
    app.add_option("--workdir", opt.workdir, "working directory for artifacts");
    app.add_option("--seed", opt.seed, "master seed for every stage");
    app.add_flag("--synthetic", opt.synthetic, "use the synthetic organization generator");
    app.add_flag("--from-scratch", opt.from_scratch, "delete the working directory first");

    auto* synth = app.add_subcommand("synth", "generate the synthetic organization");
    auto* ingest = app.add_subcommand("ingest", "load and validate emails.csv / roster.csv");
    auto* embed = app.add_subcommand("embed", "prune the corpus, train embeddings, pool centroids");
    auto* graphs = app.add_subcommand("graphs", "build the structure and semantic networks");
    auto* features = app.add_subcommand("features", "centralities and the 104-d node features");
    auto* validate = app.add_subcommand("validate", "feature-space analytics report");
    auto* baseline = app.add_subcommand("baseline", "rank with the score-based heuristic");
    auto* train_cmd = app.add_subcommand("train", "train one model kind");
    auto* evaluate = app.add_subcommand("evaluate", "Hit@K evaluation of a trained model");
    auto* gates = app.add_subcommand("gates", "gate interpretability report (gating model)");
    auto* compare = app.add_subcommand("compare", "summary table across model kinds");
    auto* all = app.add_subcommand("all", "run every stage in order");

    const std::string kinds =
        "heuristic|single-str|single-ssim|early-concat|late-concat|weighted|attention|gating";
    train_cmd->add_option("--model", opt.model, "model kind: " + kinds)->required();
    train_cmd->add_option("--epochs", opt.epochs, "override training epochs");
    evaluate->add_option("--model", opt.model, "model kind: " + kinds)->required();
    compare->add_option("--models", opt.models, "comma list of kinds, or 'all'");

    // global flags may follow the subcommand, e.g. `pipeline all --seed 7`
    for (auto* sub : {synth, ingest, embed, graphs, features, validate, baseline, train_cmd,
                      evaluate, gates, compare, all}) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        talentrec::PipelineConfig cfg = make_config(opt);
        if (opt.from_scratch) wipe_workdir(cfg);
        talentrec::Pipeline pipeline(cfg);
        if (synth->parsed()) pipeline.stage_synth();
        else if (ingest->parsed()) pipeline.stage_ingest();
        else if (embed->parsed()) pipeline.stage_embed();
        else if (graphs->parsed()) pipeline.stage_graphs();
        else if (features->parsed()) pipeline.stage_features();
        else if (validate->parsed()) pipeline.stage_validate();
        else if (baseline->parsed()) pipeline.stage_baseline();
        else if (train_cmd->parsed()) pipeline.stage_train(talentrec::kind_from_name(opt.model));
        else if (evaluate->parsed()) pipeline.stage_evaluate(talentrec::kind_from_name(opt.model));
        else if (gates->parsed()) pipeline.stage_gates();
        else if (compare->parsed()) pipeline.stage_compare();
        else if (all->parsed()) pipeline.run_all();
        return 0;
    } catch (const talentrec::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const talentrec::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const talentrec::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
