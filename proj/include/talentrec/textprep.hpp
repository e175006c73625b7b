#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "talentrec/error.hpp"
#include "talentrec/orgdata.hpp"

namespace talentrec {

struct CorpusStats {
    std::map<std::string, int> token_doc_freq;   // records containing the token
    std::map<std::string, int> token_total_freq; // occurrences across the corpus
    int n_docs = 0;
};

inline CorpusStats build_corpus_stats(const std::vector<EmailRecord>& records) {
    if (records.empty()) throw DataError("corpus: no records");
    CorpusStats stats;
    stats.n_docs = static_cast<int>(records.size());
    for (const auto& rec : records) {
        std::set<std::string> seen;
        for (const auto& tok : rec.subject_tokens) {
            ++stats.token_total_freq[tok];
            seen.insert(tok);
        }
        for (const auto& tok : seen) ++stats.token_doc_freq[tok];
    }
    return stats;
}

struct PruneOptions {
    // Fraction of the frequency-ranked vocabulary trimmed at each extreme.
    double rank_trim_fraction = 0.05;
    // Tokens whose corpus-level tf-idf score falls below this are removed.
    double tfidf_floor = 0.05;
};

struct PruneResult {
    std::vector<EmailRecord> records;
    std::set<std::string> removed_tokens;
    int dropped_records = 0; // records left with zero tokens
};

// Date/time shaped tokens: ISO and slashed dates, clock times, bare years.
inline bool looks_like_datetime(const std::string& tok) {
    auto all_digits = [](const std::string& s, std::size_t from, std::size_t to) {
        if (from >= to) return false;
        for (std::size_t i = from; i < to; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        }
        return true;
    };
    // yyyy-mm-dd / yyyy/mm/dd / yyyy.mm.dd and d-m / d/m shapes
    int separators = 0;
    char sep = 0;
    for (char c : tok) {
        if (c == '-' || c == '/' || c == '.') {
            ++separators;
            sep = c;
        } else if (!std::isdigit(static_cast<unsigned char>(c))) {
            separators = -1;
            break;
        }
    }
    if (separators == 1 || separators == 2) {
        bool parts_ok = true;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= tok.size(); ++i) {
            if (i == tok.size() || tok[i] == sep) {
                if (!all_digits(tok, start, i)) {
                    parts_ok = false;
                    break;
                }
                start = i + 1;
            }
        }
        if (parts_ok) return true;
    }
    // hh:mm and hh:mm:ss
    int colons = 0;
    bool digits_and_colons = !tok.empty();
    for (char c : tok) {
        if (c == ':') ++colons;
        else if (!std::isdigit(static_cast<unsigned char>(c))) digits_and_colons = false;
    }
    if (digits_and_colons && (colons == 1 || colons == 2)) return true;
    // bare years
    if (tok.size() == 4 && all_digits(tok, 0, 4)) {
        const int year = std::stoi(tok);
        if (year >= 1900 && year <= 2099) return true;
    }
    return false;
}

// Corpus-level tf-idf: mean, over records containing the token, of the
// in-record term frequency, scaled by log(n_docs / doc_freq). Tokens present
// in nearly every record score near zero.
inline double tfidf_score(const std::string& token, const CorpusStats& stats,
                          const std::vector<EmailRecord>& records) {
    auto df_it = stats.token_doc_freq.find(token);
    if (df_it == stats.token_doc_freq.end()) return 0.0;
    const double idf = std::log(static_cast<double>(stats.n_docs) / df_it->second);
    double tf_sum = 0.0;
    int containing = 0;
    for (const auto& rec : records) {
        int count = 0;
        for (const auto& tok : rec.subject_tokens) {
            if (tok == token) ++count;
        }
        if (count > 0) {
            tf_sum += static_cast<double>(count) / rec.subject_tokens.size();
            ++containing;
        }
    }
    if (containing == 0) return 0.0;
    return (tf_sum / containing) * idf;
}

// Removes, in one pass over a removal set derived from `stats`:
//   - the top and bottom rank_trim_fraction of the frequency-ranked
//     vocabulary (ranked by total frequency, ties broken lexicographically),
//   - date/time shaped tokens,
//   - blocklisted tokens,
//   - tokens scoring below the tf-idf floor.
// Records emptied by the removal are dropped. The removal set is a function
// of the supplied stats, so re-applying with the same stats is a no-op.
inline PruneResult prune_tokens(const std::vector<EmailRecord>& records,
                                const CorpusStats& stats,
                                const std::set<std::string>& blocklist,
                                const PruneOptions& opts = {}) {
    std::vector<std::pair<std::string, int>> ranked;
    ranked.reserve(stats.token_total_freq.size());
    for (const auto& [tok, freq] : stats.token_total_freq) ranked.emplace_back(tok, freq);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    PruneResult result;
    const std::size_t v = ranked.size();
    // ceil keeps the trimmed share at least the requested fraction for any
    // vocabulary size
    const std::size_t k = static_cast<std::size_t>(std::ceil(opts.rank_trim_fraction * v));
    for (std::size_t i = 0; i < k && i < v; ++i) result.removed_tokens.insert(ranked[i].first);
    for (std::size_t i = 0; i < k && i < v; ++i) {
        result.removed_tokens.insert(ranked[v - 1 - i].first);
    }
    for (const auto& [tok, freq] : ranked) {
        if (result.removed_tokens.count(tok)) continue;
        if (looks_like_datetime(tok) || blocklist.count(tok) ||
            tfidf_score(tok, stats, records) < opts.tfidf_floor) {
            result.removed_tokens.insert(tok);
        }
    }

    for (const auto& rec : records) {
        EmailRecord kept = rec;
        kept.subject_tokens.clear();
        for (const auto& tok : rec.subject_tokens) {
            if (!result.removed_tokens.count(tok)) kept.subject_tokens.push_back(tok);
        }
        if (kept.subject_tokens.empty()) {
            ++result.dropped_records;
        } else {
            result.records.push_back(std::move(kept));
        }
    }
    return result;
}

// blocklist.txt: one token per line; blank lines and '#' comments ignored.
inline std::set<std::string> load_blocklist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("blocklist: cannot open " + path.string());
    std::set<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        tokens.insert(detail::lowercase(line));
    }
    return tokens;
}

} // namespace talentrec
