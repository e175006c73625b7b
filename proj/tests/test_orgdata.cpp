#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "talentrec/orgdata.hpp"
#include "talentrec/serialize.hpp"

using namespace talentrec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

OrgRoster tiny_roster() {
    OrgRoster roster;
    roster.employees = {{"e1", "res", "member", "L1"}, {"e2", "res", "member", "L1"}};
    roster.sort_and_validate();
    return roster;
}

} // namespace

TEST_CASE("email log parses a well-formed row", "[orgdata]") {
    const auto path = temp_file("emails_ok.csv",
                                "sender,recipient,timestamp,subject\n"
                                "e1,e2,1700000000,Payroll Adjustment REQUEST\n");
    const EmailLog log = load_email_log(path, tiny_roster());
    REQUIRE(log.records.size() == 1);
    REQUIRE(log.dropped_rows == 0);
    const auto& rec = log.records[0];
    CHECK(rec.sender == "e1");
    CHECK(rec.recipient == "e2");
    CHECK(rec.timestamp == 1700000000);
    CHECK(rec.subject_tokens == std::vector<std::string>{"payroll", "adjustment", "request"});
}

TEST_CASE("email log drops self-loops and empty subjects with a count", "[orgdata]") {
    const auto path = temp_file("emails_drop.csv",
                                "sender,recipient,timestamp,subject\n"
                                "e1,e1,1700000000,hello\n"
                                "e1,e2,1700000001,   \n"
                                "e1,e2,1700000002,kept\n");
    const EmailLog log = load_email_log(path, tiny_roster());
    CHECK(log.records.size() == 1);
    CHECK(log.dropped_rows == 2);
}

TEST_CASE("email log fails fast on a malformed row, naming the line", "[orgdata]") {
    const auto path = temp_file("emails_bad.csv",
                                "sender,recipient,timestamp,subject\n"
                                "e1,e2,1700000000,ok\n"
                                "e2,e1,not-a-number,broken\n"
                                "e1,e2,1700000002,ok too\n");
    try {
        load_email_log(path, tiny_roster());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("email log rejects ids missing from the roster", "[orgdata]") {
    const auto path = temp_file("emails_ref.csv",
                                "sender,recipient,timestamp,subject\n"
                                "e1,ghost,1700000000,hi\n");
    REQUIRE_THROWS_AS(load_email_log(path, tiny_roster()), DataError);
}

TEST_CASE("synthetic generation is byte-identical for a fixed seed", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 60;
    cfg.rng_seed = 7;
    const SyntheticOrg a = generate_synthetic_org(cfg);
    const SyntheticOrg b = generate_synthetic_org(cfg);
    const fs::path pa = fs::temp_directory_path() / "synth_a.csv";
    const fs::path pb = fs::temp_directory_path() / "synth_b.csv";
    write_emails_csv(a.emails, pa);
    write_emails_csv(b.emails, pb);
    CHECK(read_file(pa) == read_file(pb));
    REQUIRE(a.roster.employees.size() == b.roster.employees.size());
    for (std::size_t i = 0; i < a.roster.employees.size(); ++i) {
        CHECK(a.roster.employees[i].id == b.roster.employees[i].id);
        CHECK(a.roster.employees[i].job_family == b.roster.employees[i].job_family);
        CHECK(a.roster.employees[i].role == b.roster.employees[i].role);
    }
}

TEST_CASE("fully informative text with zero overlap stays inside family vocabularies",
          "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 50;
    cfg.topic_overlap = 0.0;
    cfg.text_informativeness = {1.0};
    const SyntheticOrg org = generate_synthetic_org(cfg);
    std::map<EmployeeId, int> family_of;
    for (std::size_t i = 0; i < org.roster.employees.size(); ++i) {
        family_of[org.roster.employees[i].id] = org.family_index[i];
    }
    for (const auto& rec : org.emails) {
        const auto& vocab = org.family_vocab[family_of[rec.sender]];
        for (const auto& tok : rec.subject_tokens) {
            REQUIRE(std::find(vocab.begin(), vocab.end(), tok) != vocab.end());
        }
    }
}

TEST_CASE("email volume tracks the analytic expectation", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 300;
    cfg.rng_seed = 11;
    const SyntheticOrg org = generate_synthetic_org(cfg);
    double expected = 0.0;
    const int n = cfg.n_employees;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            expected += expected_pair_rate(cfg, org.family_index[i], org.role_index[i],
                                           org.family_index[j], org.role_index[j]);
        }
    }
    const double actual = static_cast<double>(org.emails.size());
    CHECK(actual > 0.8 * expected);
    CHECK(actual < 1.2 * expected);
}

TEST_CASE("positive pairs form the complete triangle of a three-member cell", "[orgdata]") {
    OrgRoster roster;
    roster.employees = {{"a", "res", "member", "L1"},
                        {"b", "res", "member", "L1"},
                        {"c", "res", "member", "L1"}};
    roster.sort_and_validate();
    const auto pairs = positive_pairs(roster);
    CHECK(pairs.size() == 3);
    CHECK(pairs.count({"a", "b"}) == 1);
    CHECK(pairs.count({"a", "c"}) == 1);
    CHECK(pairs.count({"b", "c"}) == 1);
}

TEST_CASE("same family with different roles is not a positive pair", "[orgdata]") {
    OrgRoster roster;
    roster.employees = {{"a", "res", "leader", "L3"}, {"b", "res", "member", "L1"}};
    roster.sort_and_validate();
    CHECK(positive_pairs(roster).empty());
}

TEST_CASE("positive pairs match the brute-force double loop on a synthetic roster", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 80;
    const SyntheticOrg org = generate_synthetic_org(cfg);
    const auto pairs = positive_pairs(org.roster);
    std::set<std::pair<EmployeeId, EmployeeId>> brute;
    const auto& emp = org.roster.employees;
    for (std::size_t i = 0; i < emp.size(); ++i) {
        for (std::size_t j = 0; j < emp.size(); ++j) {
            if (i == j) continue;
            if (emp[i].job_family == emp[j].job_family && emp[i].role == emp[j].role) {
                brute.insert({std::min(emp[i].id, emp[j].id), std::max(emp[i].id, emp[j].id)});
            }
        }
    }
    CHECK(pairs == brute);
    // |pairs| = sum over (family, role) cells of C(size, 2)
    std::map<std::pair<std::string, std::string>, long long> cell_size;
    for (const auto& e : emp) ++cell_size[{e.job_family, e.role}];
    long long expected = 0;
    for (const auto& [cell, size] : cell_size) expected += size * (size - 1) / 2;
    CHECK(static_cast<long long>(pairs.size()) == expected);
}

TEST_CASE("uninformative text draws only from the background vocabulary", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 40;
    cfg.topic_overlap = 0.0;
    cfg.text_informativeness = {0.0};
    const SyntheticOrg org = generate_synthetic_org(cfg);
    std::set<std::string> background(org.background_vocab.begin(), org.background_vocab.end());
    for (const auto& rec : org.emails) {
        for (const auto& tok : rec.subject_tokens) REQUIRE(background.count(tok) == 1);
    }
}

TEST_CASE("config validation rejects out-of-range values", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 0;
    CHECK_THROWS_AS(generate_synthetic_org(cfg), ConfigError);
    cfg = {};
    cfg.topic_overlap = 1.5;
    CHECK_THROWS_AS(generate_synthetic_org(cfg), ConfigError);
    cfg = {};
    cfg.intra_role_email_rate = -1.0;
    CHECK_THROWS_AS(generate_synthetic_org(cfg), ConfigError);
}

TEST_CASE("roster round-trips through csv", "[orgdata]") {
    SyntheticOrgConfig cfg;
    cfg.n_employees = 25;
    const SyntheticOrg org = generate_synthetic_org(cfg);
    const fs::path p = fs::temp_directory_path() / "roster_rt.csv";
    write_roster_csv(org.roster, p);
    const OrgRoster loaded = load_roster(p);
    REQUIRE(loaded.employees.size() == org.roster.employees.size());
    for (std::size_t i = 0; i < loaded.employees.size(); ++i) {
        CHECK(loaded.employees[i].id == org.roster.employees[i].id);
        CHECK(loaded.employees[i].job_family == org.roster.employees[i].job_family);
        CHECK(loaded.employees[i].role == org.roster.employees[i].role);
        CHECK(loaded.employees[i].level == org.roster.employees[i].level);
    }
}
