#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "talentrec/pipeline.hpp"
#include "talentrec/sha256.hpp"

using namespace talentrec;
namespace fs = std::filesystem;

namespace {

// Small, fast configuration used across the pipeline tests.
PipelineConfig tiny_config(const fs::path& workdir, std::uint64_t seed = 7) {
    PipelineConfig cfg;
    cfg.workdir = workdir.string();
    cfg.synthetic = true;
    // 40-member families keep every (family, role) class big enough for the
    // default 5-fold stratification in the validate stage
    cfg.synth.n_employees = 120;
    cfg.synth.n_families = 3;
    cfg.embedding.dim = 16;
    cfg.embedding.epochs = 2;
    cfg.train.epochs = 8;
    cfg.train.hidden_dim = 8;
    cfg.train.out_dim = 6;
    cfg.validation.epochs = 40;
    cfg.ks = {5, 15};
    cfg.models = {"heuristic", "single-str", "gating"};
    cfg.set_master_seed(seed);
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("sha256 matches the published test vectors", "[pipeline]") {
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
          "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
}

TEST_CASE("the full synthetic pipeline produces every artifact", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_all");
    Pipeline pipeline(tiny_config(wd));
    pipeline.run_all();
    for (const char* artifact :
         {"emails.csv", "roster.csv", "pruned_emails.csv", "embeddings.json", "centroids.csv",
          "g_str.csv", "g_str.json", "g_ssim.csv", "g_ssim.json", "centrality.csv",
          "features.csv", "validation_report.json", "f1_table.csv", "pca_projection.csv",
          "models/heuristic/report.json", "models/heuristic/rankings.csv",
          "models/single-str/checkpoint.json", "models/single-str/loss_curve.csv",
          "models/single-str/report.json", "models/gating/checkpoint.json",
          "models/gating/report.json", "models/gating/gate_report.json", "compare.csv",
          "manifest.json"}) {
        INFO(artifact);
        REQUIRE(fs::exists(wd / artifact));
    }
    const json manifest = load_json(wd / "manifest.json");
    CHECK(manifest.at("stages").contains("synth"));
    CHECK(manifest.at("stages").contains("embed"));
    CHECK(manifest.at("stages").contains("train:gating"));

    // f1_table carries all 31 combinations
    const CsvTable f1 = read_csv(wd / "f1_table.csv");
    CHECK(f1.rows.size() == 31);
}

TEST_CASE("two runs with one seed are bit-identical", "[pipeline]") {
    const fs::path wd_a = fresh_dir("tr_pipe_det_a");
    const fs::path wd_b = fresh_dir("tr_pipe_det_b");
    Pipeline(tiny_config(wd_a)).run_all();
    Pipeline(tiny_config(wd_b)).run_all();
    for (const char* artifact :
         {"manifest.json", "models/gating/checkpoint.json", "models/gating/report.json",
          "models/single-str/checkpoint.json", "models/heuristic/report.json", "compare.csv",
          "embeddings.json", "features.csv"}) {
        INFO(artifact);
        REQUIRE(read_file(wd_a / artifact) == read_file(wd_b / artifact));
    }
}

TEST_CASE("different seeds change the artifacts", "[pipeline]") {
    const fs::path wd_a = fresh_dir("tr_pipe_seed_a");
    const fs::path wd_b = fresh_dir("tr_pipe_seed_b");
    Pipeline(tiny_config(wd_a, 7)).run_all();
    Pipeline(tiny_config(wd_b, 8)).run_all();
    CHECK(read_file(wd_a / "models/gating/checkpoint.json") !=
          read_file(wd_b / "models/gating/checkpoint.json"));
}

TEST_CASE("evaluate before train names the missing producer", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_order");
    Pipeline pipeline(tiny_config(wd));
    pipeline.stage_synth();
    pipeline.stage_embed();
    pipeline.stage_graphs();
    pipeline.stage_features();
    try {
        pipeline.stage_evaluate(ModelKind::gating);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("train") != std::string::npos);
    }
}

TEST_CASE("an out-of-band artifact edit trips the stale-cache check", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_stale");
    Pipeline pipeline(tiny_config(wd));
    pipeline.stage_synth();
    pipeline.stage_embed();
    pipeline.stage_graphs();
    pipeline.stage_features();
    {
        std::ofstream out(wd / "features.csv", std::ios::app);
        out << "tampered\n";
    }
    try {
        pipeline.stage_train(ModelKind::gating);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("stale cache") != std::string::npos);
    }
}

TEST_CASE("re-running a stage with unchanged inputs leaves the manifest fixed", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_idem");
    Pipeline pipeline(tiny_config(wd));
    pipeline.stage_synth();
    pipeline.stage_embed();
    const std::string before = read_file(wd / "manifest.json");
    pipeline.stage_embed();
    CHECK(read_file(wd / "manifest.json") == before);
}

TEST_CASE("compare cross-checks each model's individual report", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_compare");
    PipelineConfig cfg = tiny_config(wd);
    cfg.models = {"heuristic",    "single-str", "single-ssim", "early-concat",
                  "late-concat",  "weighted",   "attention",   "gating"};
    Pipeline pipeline(cfg);
    pipeline.run_all();
    const CsvTable table = read_csv(wd / "compare.csv");
    REQUIRE(table.rows.size() == 7); // the two single towers share one row
    const int hit_col = static_cast<int>(table.header.size()) - 2; // hit at the larger K
    double prev = 2.0;
    for (const auto& row : table.rows) {
        const double hit = std::stod(row[hit_col]);
        REQUIRE(hit <= prev); // ordered by the primary metric, descending
        prev = hit;
        // each row's number equals the model's own report
        std::string kind = row[0];
        if (kind == "single-gcn") kind = row.back(); // note column holds the winner
        const json report = load_json(wd / ("models/" + kind + "/report.json"));
        REQUIRE(report.at("hit_at").at(std::to_string(cfg.ks.back())).get<double>() == hit);
    }
}

TEST_CASE("config files overlay the defaults", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_cfg");
    fs::create_directories(wd);
    const fs::path cfg_path = wd / "config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
  "paths": {"workdir": ")" << (wd / "work").string() << R"("},
  "synthetic": true,
  "synth": {"n_employees": 30, "n_families": 3},
  "tau": 0.7,
  "train": {"epochs": 3, "hidden_dim": 4, "out_dim": 4},
  "models": ["heuristic"],
  "ks": [3, 9]
})";
    }
    const PipelineConfig cfg = load_config(cfg_path);
    CHECK(cfg.synth.n_employees == 30);
    CHECK(cfg.tau == 0.7);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.ks == std::vector<int>{3, 9});
    CHECK(cfg.models == std::vector<std::string>{"heuristic"});
    PipelineConfig seeded = cfg;
    seeded.set_master_seed(99);
    CHECK(seeded.synth.rng_seed == 99);
    CHECK(seeded.train.seed == 99);
}

TEST_CASE("malformed config json is a config error", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_badcfg");
    fs::create_directories(wd);
    const fs::path cfg_path = wd / "broken.json";
    {
        std::ofstream out(cfg_path);
        out << "{ not json";
    }
    CHECK_THROWS(load_config(cfg_path));
}

TEST_CASE("the cli binary maps error classes to exit codes", "[pipeline]") {
    const std::string bin = PIPELINE_BIN;
    const fs::path wd = fresh_dir("tr_pipe_cli");
    // unknown model kind -> config error -> exit 2
    const int config_err = std::system(
        (bin + " --workdir " + wd.string() + " train --model bogus >/dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(config_err) == 2);
    // evaluate with an empty workdir -> data error -> exit 3
    const int data_err = std::system(
        (bin + " --workdir " + wd.string() + " evaluate --model gating >/dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(data_err) == 3);
    // a tiny end-to-end synthetic run exits 0
    const fs::path run_wd = fresh_dir("tr_pipe_cli_run");
    const int ok = std::system((bin + " --workdir " + run_wd.string() +
                                " --synthetic --seed 5 synth >/dev/null 2>&1")
                                   .c_str());
    CHECK(WEXITSTATUS(ok) == 0);
    CHECK(fs::exists(run_wd / "emails.csv"));
}

TEST_CASE("checkpoints round-trip through json", "[pipeline]") {
    for (ModelKind kind : {ModelKind::single_str, ModelKind::late_concat, ModelKind::weighted_sum,
                           ModelKind::attention, ModelKind::gating}) {
        const FusionModel m = FusionModel::init(kind, 12, 6, 4, 123);
        const fs::path p = fs::temp_directory_path() / "ckpt_rt.json";
        save_checkpoint(m, p);
        const FusionModel loaded = load_checkpoint(p);
        CHECK(loaded.kind == m.kind);
        CHECK(loaded.tower_str.l1.w.data() == m.tower_str.l1.w.data());
        CHECK(loaded.tower_str.l2.b == m.tower_str.l2.b);
        if (kind_uses_two_towers(kind)) {
            CHECK(loaded.tower_ssim.l2.w.data() == m.tower_ssim.l2.w.data());
        }
        if (kind == ModelKind::attention) CHECK(loaded.attn_w == m.attn_w);
        if (kind == ModelKind::gating) CHECK(loaded.gate_w.data() == m.gate_w.data());
        if (kind == ModelKind::weighted_sum) CHECK(loaded.alpha == m.alpha);
    }
}

TEST_CASE("graphs and centroids round-trip through their files", "[pipeline]") {
    const fs::path wd = fresh_dir("tr_pipe_rt");
    fs::create_directories(wd);
    Rng rng(405);
    WeightedGraph g;
    g.ids = {"a", "b", "c"};
    g.node_index = {{"a", 0}, {"b", 1}, {"c", 2}};
    g.edges = {{0, 1, 2.5}, {1, 2, 0.125}};
    save_graph(g, wd / "g.csv", wd / "g.json");
    const WeightedGraph loaded = load_graph(wd / "g.csv", wd / "g.json");
    CHECK(loaded.ids == g.ids);
    REQUIRE(loaded.edges.size() == 2);
    CHECK(loaded.edges[0].w == 2.5);
    CHECK(loaded.edges[1].w == 0.125);

    NodeSemantics sem;
    sem.dim = 4;
    sem.order = {"a", "b"};
    sem.index = {{"a", 0}, {"b", 1}};
    sem.coverage = {2, 0};
    sem.centroid = Matrix(2, 4);
    for (auto& v : sem.centroid.data()) v = rng.gaussian();
    save_centroids(sem, wd / "cent.csv");
    const NodeSemantics sem2 = load_centroids(wd / "cent.csv");
    CHECK(sem2.coverage == sem.coverage);
    CHECK(sem2.centroid.data() == sem.centroid.data());
}
