#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "talentrec/features.hpp"

using namespace talentrec;

namespace {

NodeSemantics semantics_of(const std::vector<std::vector<double>>& centroids) {
    NodeSemantics sem;
    sem.dim = static_cast<int>(centroids[0].size());
    sem.centroid = Matrix(centroids.size(), sem.dim);
    char buf[8];
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        std::snprintf(buf, sizeof buf, "n%03zu", i);
        sem.index[buf] = static_cast<int>(i);
        sem.order.push_back(buf);
        for (int d = 0; d < sem.dim; ++d) sem.centroid(i, d) = centroids[i][d];
    }
    sem.coverage.assign(centroids.size(), 1);
    return sem;
}

NodeSemantics random_semantics(int n, Rng& rng) {
    std::vector<std::vector<double>> centroids(n, std::vector<double>(kSemanticDim));
    for (auto& c : centroids) {
        for (auto& v : c) v = rng.gaussian();
    }
    return semantics_of(centroids);
}

CentralityVector centralities_of(const NodeSemantics& sem, Rng& rng) {
    CentralityVector cent;
    cent.order = sem.order;
    const int n = static_cast<int>(sem.order.size());
    for (int i = 0; i < n; ++i) {
        cent.degree.push_back(static_cast<double>(rng.below(20)));
        cent.closeness.push_back(rng.uniform());
        cent.betweenness.push_back(rng.uniform() * 40.0);
        cent.eigenvector.push_back(rng.uniform());
    }
    return cent;
}

} // namespace

TEST_CASE("feature assembly min-max normalizes the centrality block", "[features]") {
    Rng rng(101);
    const NodeSemantics sem = random_semantics(12, rng);
    CentralityVector cent = centralities_of(sem, rng);
    cent.degree[3] = 99.0; // force a known maximum
    const NodeFeatures f = assemble_features(sem, cent);
    CHECK(f.x(3, kSemanticDim) == 1.0);
    for (std::size_t i = 0; i < 12; ++i) {
        for (int c = 0; c < 4; ++c) {
            CHECK(f.x(i, kSemanticDim + c) >= 0.0);
            CHECK(f.x(i, kSemanticDim + c) <= 1.0);
        }
        for (int d = 0; d < kSemanticDim; ++d) REQUIRE(f.x(i, d) == sem.centroid(i, d));
    }
}

TEST_CASE("a constant centrality column collapses to zero", "[features]") {
    Rng rng(103);
    const NodeSemantics sem = random_semantics(6, rng);
    CentralityVector cent = centralities_of(sem, rng);
    cent.closeness.assign(6, 0.42);
    const NodeFeatures f = assemble_features(sem, cent);
    for (int i = 0; i < 6; ++i) CHECK(f.x(i, kSemanticDim + 1) == 0.0);
}

TEST_CASE("feature layout round-trips its inputs up to normalization", "[features]") {
    Rng rng(107);
    const NodeSemantics sem = random_semantics(9, rng);
    const CentralityVector cent = centralities_of(sem, rng);
    const NodeFeatures f = assemble_features(sem, cent);
    const double lo = *std::min_element(cent.degree.begin(), cent.degree.end());
    const double hi = *std::max_element(cent.degree.begin(), cent.degree.end());
    for (int i = 0; i < 9; ++i) {
        const double denorm = f.x(i, kSemanticDim) * (hi - lo) + lo;
        REQUIRE(denorm == Catch::Approx(cent.degree[i]).margin(1e-12));
    }
}

TEST_CASE("assembly rejects mismatched node sets", "[features]") {
    Rng rng(109);
    const NodeSemantics sem = random_semantics(5, rng);
    CentralityVector cent = centralities_of(sem, rng);
    cent.order.pop_back();
    CHECK_THROWS_AS(assemble_features(sem, cent), DataError);
}

TEST_CASE("silhouette of two tight distant blobs approaches one", "[features]") {
    Rng rng(113);
    Matrix pts(20, 2);
    std::vector<int> labels(20);
    for (int i = 0; i < 20; ++i) {
        const bool second = i >= 10;
        labels[i] = second ? 1 : 0;
        pts(i, 0) = (second ? 100.0 : 0.0) + rng.gaussian() * 0.1;
        pts(i, 1) = rng.gaussian() * 0.1;
    }
    CHECK(silhouette(pts, labels) > 0.9);
}

TEST_CASE("random labels on one blob give a near-zero silhouette", "[features]") {
    double total = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Matrix pts(40, 3);
        std::vector<int> labels(40);
        for (int i = 0; i < 40; ++i) {
            labels[i] = static_cast<int>(rng.below(2));
            for (int d = 0; d < 3; ++d) pts(i, d) = rng.gaussian();
        }
        total += silhouette(pts, labels);
    }
    CHECK(std::abs(total / 10.0) < 0.1);
}

TEST_CASE("silhouette matches direct formula evaluation on six points", "[features]") {
    Matrix pts(6, 2);
    const double coords[6][2] = {{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}};
    std::vector<int> labels = {0, 0, 0, 1, 1, 1};
    for (int i = 0; i < 6; ++i) {
        pts(i, 0) = coords[i][0];
        pts(i, 1) = coords[i][1];
    }
    auto dist = [&](int i, int j) {
        return std::hypot(coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
    };
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < 6; ++j) {
            if (j == i) continue;
            if (labels[j] == labels[i]) a += dist(i, j);
            else b += dist(i, j);
        }
        a /= 2.0;
        b /= 3.0;
        expected += (b - a) / std::max(a, b);
    }
    expected /= 6.0;
    CHECK(silhouette(pts, labels) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("silhouette needs at least two labels", "[features]") {
    Matrix pts(3, 1);
    CHECK_THROWS_AS(silhouette(pts, {0, 0, 0}), DataError);
}

TEST_CASE("auc is one for perfect separation and half for a constant", "[features]") {
    CHECK(role_auc({1.0, 2.0, 3.0, 10.0, 11.0}, {false, false, false, true, true}) == 1.0);
    CHECK(role_auc({5.0, 5.0, 5.0, 5.0}, {true, false, true, false}) == 0.5);
}

TEST_CASE("auc matches the brute-force pairwise comparison", "[features]") {
    Rng rng(127);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> scalar(20);
        std::vector<bool> labels(20);
        int positives = 0;
        for (int i = 0; i < 20; ++i) {
            scalar[i] = static_cast<double>(rng.below(8)); // force ties
            labels[i] = rng.uniform() < 0.4;
            positives += labels[i] ? 1 : 0;
        }
        if (positives == 0 || positives == 20) continue;
        REQUIRE(role_auc(scalar, labels) ==
                Catch::Approx(oracles::brute_auc(scalar, labels)).margin(1e-12));
    }
}

TEST_CASE("auc requires both classes", "[features]") {
    CHECK_THROWS_AS(role_auc({1.0, 2.0}, {true, true}), DataError);
}

TEST_CASE("auc is invariant under strictly increasing transforms", "[features]") {
    Rng rng(131);
    std::vector<double> scalar(30);
    std::vector<bool> labels(30);
    for (int i = 0; i < 30; ++i) {
        scalar[i] = rng.gaussian();
        labels[i] = i % 3 == 0;
    }
    std::vector<double> transformed(30);
    for (int i = 0; i < 30; ++i) transformed[i] = std::exp(2.0 * scalar[i]) + 5.0;
    CHECK(role_auc(scalar, labels) == Catch::Approx(role_auc(transformed, labels)).margin(1e-12));
}

TEST_CASE("a planted single-column signal is learnable by the classifier", "[features]") {
    Rng rng(137);
    const int n = 60;
    NodeFeatures f;
    f.x = Matrix(n, kFeatureDim, 0.0);
    std::vector<int> labels(n);
    char buf[8];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "n%03d", i);
        f.order.push_back(buf);
        labels[i] = static_cast<int>(rng.below(3));
        for (int d = 0; d < kSemanticDim; ++d) f.x(i, d) = rng.gaussian() * 0.01;
        // degree column carries the label exactly
        f.x(i, kSemanticDim) = labels[i] * 0.5;
        for (int c = 1; c < 4; ++c) f.x(i, kSemanticDim + c) = rng.uniform() * 0.01;
    }
    ComboF1Config cfg;
    cfg.epochs = 400;
    cfg.learning_rate = 0.5;
    const auto rows = combo_f1(f, labels, labels, 3, 3, cfg);
    for (const auto& row : rows) {
        if (row.combo == "d") {
            CHECK(row.f1_family > 0.95);
            CHECK(row.f1_role > 0.95);
        }
    }
}

TEST_CASE("random labels stay near chance for every combination", "[features]") {
    Rng rng(139);
    const int n = 100;
    NodeFeatures f;
    f.x = Matrix(n, kFeatureDim, 0.0);
    std::vector<int> labels(n);
    char buf[8];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "n%03d", i);
        f.order.push_back(buf);
        labels[i] = static_cast<int>(rng.below(4));
        for (int d = 0; d < kFeatureDim; ++d) f.x(i, d) = rng.gaussian();
    }
    ComboF1Config cfg;
    cfg.epochs = 120;
    const auto rows = combo_f1(f, labels, labels, 4, 4, cfg);
    double total = 0.0;
    for (const auto& row : rows) total += row.f1_family;
    // chance macro-F1 for 4 balanced classes is ~0.25
    CHECK(total / rows.size() == Catch::Approx(0.25).margin(0.1));
}

TEST_CASE("semantic combos dominate centrality-only combos for a planted family signal",
          "[features]") {
    Rng rng(149);
    const int n = 90;
    NodeFeatures f;
    f.x = Matrix(n, kFeatureDim, 0.0);
    std::vector<int> family(n), role(n);
    char buf[8];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "n%03d", i);
        f.order.push_back(buf);
        family[i] = i % 3;
        role[i] = static_cast<int>(rng.below(3));
        // family signal lives in the semantic block
        for (int d = 0; d < kSemanticDim; ++d) {
            f.x(i, d) = (d % 3 == family[i] ? 1.0 : 0.0) + rng.gaussian() * 0.3;
        }
        for (int c = 0; c < 4; ++c) f.x(i, kSemanticDim + c) = rng.uniform();
    }
    ComboF1Config cfg;
    cfg.epochs = 150;
    const auto rows = combo_f1(f, family, role, 3, 3, cfg);
    double best_with_s = 0.0, best_without_s = 0.0;
    for (const auto& row : rows) {
        auto& best = row.has_s ? best_with_s : best_without_s;
        best = std::max(best, row.f1_family);
    }
    CHECK(best_with_s > best_without_s);
    // rows are sorted by family F1: the top row must contain the semantic block
    CHECK(rows.front().has_s);
}

TEST_CASE("stratification rejects classes smaller than the fold count", "[features]") {
    Rng rng(151);
    NodeFeatures f;
    f.x = Matrix(8, kFeatureDim, 0.0);
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        std::snprintf(buf, sizeof buf, "n%03d", i);
        f.order.push_back(buf);
    }
    const std::vector<int> labels = {0, 0, 0, 0, 0, 0, 1, 1}; // class 1 has 2 < 5 members
    CHECK_THROWS_AS(combo_f1(f, labels, labels, 2, 2, {}), DataError);
}

TEST_CASE("identical centroids give the all-ones family matrix", "[features]") {
    const NodeSemantics sem =
        semantics_of({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
    const Matrix m = family_similarity_matrix(sem, {0, 0, 1, 1}, 2);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) REQUIRE(m(a, b) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("orthogonal families have zero cross similarity", "[features]") {
    const NodeSemantics sem =
        semantics_of({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}});
    const Matrix m = family_similarity_matrix(sem, {0, 0, 1, 1}, 2);
    CHECK(m(0, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(m(1, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(m(0, 0) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("family similarity is symmetric with unit-bounded entries", "[features]") {
    Rng rng(157);
    const NodeSemantics sem = random_semantics(24, rng);
    std::vector<int> labels(24);
    for (auto& l : labels) l = static_cast<int>(rng.below(4));
    const Matrix m = family_similarity_matrix(sem, labels, 4);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            REQUIRE(m(a, b) == m(b, a));
            REQUIRE(std::abs(m(a, b)) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("kmeans recovers well-separated planted blobs", "[features]") {
    Rng rng(163);
    const int per_blob = 15;
    Matrix pts(4 * per_blob, 3);
    std::vector<int> plant(4 * per_blob);
    for (int blob = 0; blob < 4; ++blob) {
        for (int i = 0; i < per_blob; ++i) {
            const int row = blob * per_blob + i;
            plant[row] = blob;
            for (int d = 0; d < 3; ++d) {
                pts(row, d) = (d == blob % 3 ? 50.0 * (blob + 1) : 0.0) + rng.gaussian();
            }
        }
    }
    const KmeansResult result = kmeans(pts, 4, 7);
    CHECK(oracles::adjusted_rand_index(result.assignment, plant) > 0.9);
}

TEST_CASE("kmeans with as many clusters as points has zero inertia", "[features]") {
    Rng rng(167);
    Matrix pts(6, 2);
    for (auto& v : pts.data()) v = rng.gaussian();
    const KmeansResult result = kmeans(pts, 6, 11);
    CHECK(result.inertia == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("kmeans is deterministic for a fixed seed", "[features]") {
    Rng rng(173);
    Matrix pts(30, 4);
    for (auto& v : pts.data()) v = rng.gaussian();
    const KmeansResult a = kmeans(pts, 5, 21);
    const KmeansResult b = kmeans(pts, 5, 21);
    CHECK(a.assignment == b.assignment);
    CHECK(a.inertia == b.inertia);
}

TEST_CASE("pca first component aligns with the dominant direction", "[features]") {
    Rng rng(179);
    Matrix pts(50, 4);
    for (int i = 0; i < 50; ++i) {
        const double t = rng.gaussian() * 10.0;
        pts(i, 0) = t + rng.gaussian() * 0.01;
        pts(i, 1) = -t + rng.gaussian() * 0.01;
        pts(i, 2) = rng.gaussian() * 0.01;
        pts(i, 3) = rng.gaussian() * 0.01;
    }
    const Matrix scores = pca_scores(pts, 2);
    // PC1 scores must correlate almost perfectly with t = (x0 - x1) / 2;
    // scores are centered, so center the reference too
    double t_mean = 0.0;
    for (int i = 0; i < 50; ++i) t_mean += (pts(i, 0) - pts(i, 1)) / 2.0;
    t_mean /= 50.0;
    double num = 0.0, d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double t = (pts(i, 0) - pts(i, 1)) / 2.0 - t_mean;
        num += scores(i, 0) * t;
        d1 += scores(i, 0) * scores(i, 0);
        d2 += t * t;
    }
    CHECK(std::abs(num) / std::sqrt(d1 * d2) > 0.999);
}
