#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "talentrec/csv.hpp"
#include "talentrec/error.hpp"
#include "talentrec/rng.hpp"

namespace talentrec {

using EmployeeId = std::string;

struct EmailRecord {
    EmployeeId sender;
    EmployeeId recipient;
    std::int64_t timestamp = 0;
    std::vector<std::string> subject_tokens;
};

struct Employee {
    EmployeeId id;
    std::string job_family;
    std::string role;
    std::string level;
};

// HRIS roster. Employees kept sorted by id so every downstream index is
// deterministic.
struct OrgRoster {
    std::vector<Employee> employees;

    const Employee* find(const EmployeeId& id) const {
        auto it = std::lower_bound(employees.begin(), employees.end(), id,
                                   [](const Employee& e, const EmployeeId& k) { return e.id < k; });
        if (it == employees.end() || it->id != id) return nullptr;
        return &*it;
    }

    bool contains(const EmployeeId& id) const { return find(id) != nullptr; }

    void sort_and_validate() {
        std::sort(employees.begin(), employees.end(),
                  [](const Employee& a, const Employee& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < employees.size(); ++i) {
            if (employees[i].id == employees[i - 1].id) {
                throw DataError("roster: duplicate employee id " + employees[i].id);
            }
        }
    }

    std::vector<std::string> family_names() const {
        std::set<std::string> s;
        for (const auto& e : employees) s.insert(e.job_family);
        return {s.begin(), s.end()};
    }

    std::vector<std::string> role_names() const {
        std::set<std::string> s;
        for (const auto& e : employees) s.insert(e.role);
        return {s.begin(), s.end()};
    }
};

// Configuration of the synthetic organization generator. Informativeness
// fractions are per family: entry f controls family f. A vector shorter than
// n_families is cycled.
struct SyntheticOrgConfig {
    int n_employees = 300;
    int n_families = 5;
    int n_roles_per_family = 3;
    int vocab_per_family = 40;
    double topic_overlap = 0.05;
    double intra_role_email_rate = 4.0;
    double cross_family_email_rate = 0.015;
    // Default regimes, family order res/biz/dev/sal/mnq: "res" is informative
    // in both views, "dev" carries signal in text but near-uniform structure,
    // "sal" has uninformative text with decisive structure; "biz" and "mnq"
    // lean on background vocabulary enough that their text blurs into sal's.
    std::vector<double> text_informativeness = {0.90, 0.38, 0.90, 0.02, 0.30};
    std::vector<double> structure_informativeness = {0.45, 0.55, 0.03, 1.00, 0.70};
    std::uint64_t rng_seed = 7;

    void validate() const {
        if (n_employees < 1 || n_families < 1 || n_roles_per_family < 1 || vocab_per_family < 1) {
            throw ConfigError("synthetic org: all counts must be >= 1");
        }
        if (intra_role_email_rate < 0.0 || cross_family_email_rate < 0.0) {
            throw ConfigError("synthetic org: rates must be >= 0");
        }
        auto check_fraction = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ConfigError(std::string("synthetic org: ") + name + " must lie in [0,1]");
            }
        };
        check_fraction(topic_overlap, "topic_overlap");
        if (text_informativeness.empty() || structure_informativeness.empty()) {
            throw ConfigError("synthetic org: informativeness vectors must be non-empty");
        }
        for (double v : text_informativeness) check_fraction(v, "text_informativeness");
        for (double v : structure_informativeness) check_fraction(v, "structure_informativeness");
    }

    double text_info(int family) const {
        return text_informativeness[family % text_informativeness.size()];
    }
    double structure_info(int family) const {
        return structure_informativeness[family % structure_informativeness.size()];
    }
};

struct SyntheticOrg {
    OrgRoster roster;
    std::vector<EmailRecord> emails;
    // Diagnostics for tests and analysis; tokens the generator could emit and
    // the planted assignment, aligned with the sorted roster order.
    std::vector<std::vector<std::string>> family_vocab;
    std::vector<std::string> background_vocab;
    std::vector<int> family_index;
    std::vector<int> role_index;
};

namespace detail {

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline std::vector<std::string> tokenize_subject(const std::string& subject) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : subject) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                tokens.push_back(lowercase(cur));
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(lowercase(cur));
    return tokens;
}

inline std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

// Canonical family short-names for the default five-family layout; extra
// families get generated names.
inline std::string family_name(int f) {
    static const char* names[] = {"res", "biz", "dev", "sal", "mnq"};
    if (f < 5) return names[f];
    return "fam" + std::to_string(f);
}

inline std::string role_name(int r) {
    if (r == 0) return "leader";
    if (r == 1) return "senior";
    if (r == 2) return "member";
    return "role" + std::to_string(r);
}

// Hub propensity by role, applied to the background (non-cell) email tier:
// leaders mail broadly across the organization, which is what gives the
// centrality features their role signal.
inline double hub_activity(int role_index) {
    if (role_index == 0) return 5.0;
    if (role_index == 1) return 1.5;
    return 1.0;
}

// Role share of a family's headcount. Leader and senior cells are kept tiny
// (pairs at the default scale) so retrieval has rare-positive queries; the
// rank-and-file role absorbs the remainder.
inline double role_share(int role_index, int n_roles) {
    if (n_roles == 1) return 1.0;
    if (role_index == 0) return 0.04;
    if (role_index == 1) return 0.04;
    double rest = 1.0 - 0.04 - 0.04;
    return rest / (n_roles - 2 > 0 ? n_roles - 2 : 1);
}

} // namespace detail

// Headcount of one (family, role) cell under the deterministic assignment:
// families round-robin over ids, roles split each family by fixed shares.
inline int synthetic_cell_size(const SyntheticOrgConfig& cfg, int family, int role) {
    const int m = cfg.n_employees / cfg.n_families +
                  (family < cfg.n_employees % cfg.n_families ? 1 : 0);
    int assigned = 0;
    for (int r = 0; r < cfg.n_roles_per_family; ++r) {
        int count;
        if (r == cfg.n_roles_per_family - 1) {
            count = m - assigned;
        } else {
            count = static_cast<int>(detail::role_share(r, cfg.n_roles_per_family) * m + 0.5);
            count = std::min(count, m - assigned);
        }
        if (r == role) return count;
        assigned += count;
    }
    return 0;
}

// Cell mates are not uniformly connected: each member collaborates closely
// with about this many colleagues, so cells stay sparse but their ties are
// heavy — decisive rather than diffuse.
inline constexpr double kCellCollaborators = 6.0;

// Probability that a same-cell pair are collaborators.
inline double collaborator_probability(const SyntheticOrgConfig& cfg, int family, int role) {
    const int fanout = std::max(1, synthetic_cell_size(cfg, family, role) - 1);
    return std::min(1.0, kCellCollaborators / fanout);
}

// Expected number of emails between employees i and j under the generator's
// rate model. A same-cell pair collaborates with probability
// collaborator_probability; collaborators exchange mail at the planted rate,
// interpolated toward the background by the family's structure
// informativeness, everyone else sits on the background tier, amplified by
// the endpoints' hub propensity. Exposed so expectation-based checks can
// recompute totals analytically.
inline double expected_pair_rate(const SyntheticOrgConfig& cfg,
                                 int family_i, int role_i,
                                 int family_j, int role_j) {
    const double background = cfg.cross_family_email_rate * detail::hub_activity(role_i) *
                              detail::hub_activity(role_j);
    if (family_i == family_j && role_i == role_j) {
        const double s = cfg.structure_info(family_i);
        const double collaborator_rate =
            cfg.cross_family_email_rate +
            s * (cfg.intra_role_email_rate - cfg.cross_family_email_rate);
        const double q = collaborator_probability(cfg, family_i, role_i);
        return q * collaborator_rate + (1.0 - q) * background;
    }
    return background;
}

// Deterministic synthetic organization. Plants two recoverable regimes via
// the per-family informativeness profiles: with the defaults, family "sal"
// has near-uninformative subjects but decisive link structure, while "res"
// carries signal in both views.
inline SyntheticOrg generate_synthetic_org(const SyntheticOrgConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.rng_seed);
    SyntheticOrg org;

    const int n = cfg.n_employees;
    const int id_width = static_cast<int>(std::to_string(n).size());

    // Family assignment round-robins over ids; roles split each family by
    // fixed shares so cell sizes are reproducible without sampling.
    std::vector<int> family_of(n), role_of(n);
    std::vector<std::vector<int>> family_members(cfg.n_families);
    for (int i = 0; i < n; ++i) {
        family_of[i] = i % cfg.n_families;
        family_members[family_of[i]].push_back(i);
    }
    for (int f = 0; f < cfg.n_families; ++f) {
        const auto& members = family_members[f];
        const int m = static_cast<int>(members.size());
        int assigned = 0;
        for (int r = 0; r < cfg.n_roles_per_family; ++r) {
            int count;
            if (r == cfg.n_roles_per_family - 1) {
                count = m - assigned;
            } else {
                count = static_cast<int>(detail::role_share(r, cfg.n_roles_per_family) * m + 0.5);
                count = std::min(count, m - assigned);
            }
            for (int k = 0; k < count; ++k) role_of[members[assigned + k]] = r;
            assigned += count;
        }
        for (; assigned < m; ++assigned) role_of[members[assigned]] = cfg.n_roles_per_family - 1;
    }

    for (int i = 0; i < n; ++i) {
        Employee e;
        e.id = "e" + detail::zero_pad(i + 1, id_width);
        e.job_family = detail::family_name(family_of[i]);
        e.role = detail::role_name(role_of[i]);
        e.level = role_of[i] == 0 ? "L3" : (role_of[i] == 1 ? "L2" : "L1");
        org.roster.employees.push_back(std::move(e));
    }
    org.roster.sort_and_validate();
    org.family_index = family_of; // id order equals generation order (fixed width)
    org.role_index = role_of;

    // Vocabulary: a shared background pool plus per-family pools. A fraction
    // topic_overlap of each family pool is borrowed from the background.
    const int v = cfg.vocab_per_family;
    org.background_vocab.reserve(v);
    for (int k = 0; k < v; ++k) org.background_vocab.push_back("core" + std::to_string(k));
    org.family_vocab.resize(cfg.n_families);
    for (int f = 0; f < cfg.n_families; ++f) {
        const int n_shared = static_cast<int>(cfg.topic_overlap * v + 0.5);
        for (int k = 0; k < n_shared; ++k) {
            org.family_vocab[f].push_back(org.background_vocab[(f * 7 + k) % v]);
        }
        for (int k = n_shared; k < v; ++k) {
            org.family_vocab[f].push_back("w" + detail::family_name(f) + std::to_string(k));
        }
    }

    // Emails: per unordered pair a Poisson count at the planted rate, then a
    // random direction, timestamp and subject per email.
    constexpr std::int64_t window_start = 1700000000;
    constexpr std::int64_t window_len = 15552000; // ~6 months
    const std::vector<EmployeeId> ids = [&] {
        std::vector<EmployeeId> out(n);
        for (int i = 0; i < n; ++i) out[i] = org.roster.employees[i].id;
        return out;
    }();
    // Per-node mailing temperament on the background tier: lognormal with
    // unit mean, so pair expectations match expected_pair_rate exactly.
    std::vector<double> temperament(n);
    for (int i = 0; i < n; ++i) temperament[i] = std::exp(1.0 * rng.gaussian() - 0.5);
    // roster is sorted by id which preserves the generation order (same width).
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // sample the collaborator mixture explicitly: ties are either
            // heavy (collaborators) or background, not their average
            double rate = cfg.cross_family_email_rate * detail::hub_activity(role_of[i]) *
                          detail::hub_activity(role_of[j]) * temperament[i] * temperament[j];
            if (family_of[i] == family_of[j] && role_of[i] == role_of[j]) {
                const double q = collaborator_probability(cfg, family_of[i], role_of[i]);
                if (rng.uniform() < q) {
                    const double s = cfg.structure_info(family_of[i]);
                    rate = cfg.cross_family_email_rate +
                           s * (cfg.intra_role_email_rate - cfg.cross_family_email_rate);
                }
            }
            const int count = rng.poisson(rate);
            for (int c = 0; c < count; ++c) {
                EmailRecord rec;
                const bool forward = rng.uniform() < 0.5;
                rec.sender = forward ? ids[i] : ids[j];
                rec.recipient = forward ? ids[j] : ids[i];
                rec.timestamp = window_start + static_cast<std::int64_t>(rng.uniform() * window_len);
                const int sender_family = forward ? family_of[i] : family_of[j];
                const double ti = cfg.text_info(sender_family);
                // whole subjects draw from one pool: the sender's family
                // vocabulary with probability text_informativeness, the
                // shared background otherwise
                const auto& pool = rng.uniform() < ti ? org.family_vocab[sender_family]
                                                      : org.background_vocab;
                const int len = rng.uniform_int(3, 8);
                for (int t = 0; t < len; ++t) {
                    rec.subject_tokens.push_back(pool[rng.below(pool.size())]);
                }
                org.emails.push_back(std::move(rec));
            }
        }
    }
    std::stable_sort(org.emails.begin(), org.emails.end(),
                     [](const EmailRecord& a, const EmailRecord& b) {
                         if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                         if (a.sender != b.sender) return a.sender < b.sender;
                         return a.recipient < b.recipient;
                     });
    return org;
}

// All unordered (i, j) pairs sharing both job family and role: the weak
// positive labels. Pairs stored with first < second.
inline std::set<std::pair<EmployeeId, EmployeeId>> positive_pairs(const OrgRoster& roster) {
    std::map<std::pair<std::string, std::string>, std::vector<EmployeeId>> cells;
    for (const auto& e : roster.employees) {
        cells[{e.job_family, e.role}].push_back(e.id);
    }
    std::set<std::pair<EmployeeId, EmployeeId>> pairs;
    for (const auto& [cell, members] : cells) {
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                pairs.insert({members[a], members[b]});
            }
        }
    }
    return pairs;
}

struct EmailLog {
    std::vector<EmailRecord> records;
    int dropped_rows = 0;
};

// roster.csv: employee_id,job_family,role,level
inline OrgRoster load_roster(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected = {"employee_id", "job_family", "role", "level"};
    if (table.header != expected) {
        throw DataError("roster: unexpected header in " + path.string());
    }
    OrgRoster roster;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != 4) {
            throw DataError("roster: malformed row at line " +
                            std::to_string(table.line_numbers[r]));
        }
        roster.employees.push_back({row[0], row[1], row[2], row[3]});
    }
    roster.sort_and_validate();
    return roster;
}

// emails.csv: sender,recipient,timestamp,subject. Self-loops and empty
// subjects are dropped (counted); malformed rows and ids missing from the
// roster are hard errors.
inline EmailLog load_email_log(const std::filesystem::path& path, const OrgRoster& roster) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected = {"sender", "recipient", "timestamp", "subject"};
    if (table.header != expected) {
        throw DataError("emails: unexpected header in " + path.string());
    }
    EmailLog log;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const int line = table.line_numbers[r];
        const auto& row = table.rows[r];
        if (row.size() != 4) {
            throw DataError("emails: malformed row at line " + std::to_string(line));
        }
        EmailRecord rec;
        rec.sender = row[0];
        rec.recipient = row[1];
        try {
            std::size_t pos = 0;
            rec.timestamp = std::stoll(row[2], &pos);
            if (pos != row[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("emails: bad timestamp at line " + std::to_string(line));
        }
        if (!roster.contains(rec.sender)) {
            throw DataError("emails: unknown employee id '" + rec.sender + "' at line " +
                            std::to_string(line));
        }
        if (!roster.contains(rec.recipient)) {
            throw DataError("emails: unknown employee id '" + rec.recipient + "' at line " +
                            std::to_string(line));
        }
        rec.subject_tokens = detail::tokenize_subject(row[3]);
        if (rec.sender == rec.recipient || rec.subject_tokens.empty()) {
            ++log.dropped_rows;
            continue;
        }
        log.records.push_back(std::move(rec));
    }
    return log;
}

inline void write_roster_csv(const OrgRoster& roster, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.write_row({"employee_id", "job_family", "role", "level"});
    for (const auto& e : roster.employees) {
        w.write_row({e.id, e.job_family, e.role, e.level});
    }
}

inline void write_emails_csv(const std::vector<EmailRecord>& emails,
                             const std::filesystem::path& path) {
    CsvWriter w(path);
    w.write_row({"sender", "recipient", "timestamp", "subject"});
    for (const auto& rec : emails) {
        std::string subject;
        for (std::size_t i = 0; i < rec.subject_tokens.size(); ++i) {
            if (i) subject += ' ';
            subject += rec.subject_tokens[i];
        }
        w.write_row({rec.sender, rec.recipient, std::to_string(rec.timestamp), subject});
    }
}

} // namespace talentrec
