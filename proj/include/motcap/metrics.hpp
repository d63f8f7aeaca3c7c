#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace motcap {

using TokenSeq = std::vector<std::string>;
using RefSet = std::vector<TokenSeq>;

namespace metrics_detail {

// n-grams as joined keys; \x1f cannot appear in tokens.
inline std::map<std::string, int> ngram_counts(const TokenSeq& tokens, int n) {
    std::map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key.push_back('\x1f');
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

inline int lcs_length(const TokenSeq& a, const TokenSeq& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1, 0), cur(m + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        for (size_t j = 1; j <= m; ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

// Sorted summation so corpus scores are exactly permutation invariant.
inline double stable_mean(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

inline void check_corpus(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs,
                         const char* op) {
    if (hyps.size() != refs.size()) {
        throw std::invalid_argument(std::string(op) + ": " + std::to_string(hyps.size()) +
                                    " hypotheses vs " + std::to_string(refs.size()) +
                                    " reference sets");
    }
    if (hyps.empty()) throw std::invalid_argument(std::string(op) + ": empty corpus");
    for (const auto& rs : refs) {
        if (rs.empty()) throw std::invalid_argument(std::string(op) + ": empty reference set");
    }
}

}  // namespace metrics_detail

// Corpus BLEU: clipped modified n-gram precision, uniform weights, brevity
// penalty with closest reference length (ties break short). Zero match
// counts are epsilon-smoothed so tiny test corpora stay finite.
inline double bleu(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs,
                   int max_n = 4, double epsilon = 1e-9) {
    using namespace metrics_detail;
    check_corpus(hyps, refs, "bleu");
    if (max_n < 1) throw std::invalid_argument("bleu: max_n must be >= 1");

    std::vector<long long> matches(max_n, 0), totals(max_n, 0);
    long long hyp_len = 0, ref_len = 0;
    for (size_t s = 0; s < hyps.size(); ++s) {
        const auto& hyp = hyps[s];
        hyp_len += static_cast<long long>(hyp.size());
        // closest reference length; ties to the shorter
        long long best_ref = static_cast<long long>(refs[s][0].size());
        for (const auto& r : refs[s]) {
            const long long len = static_cast<long long>(r.size());
            const auto diff = [&](long long x) { return std::llabs(x - static_cast<long long>(hyp.size())); };
            if (diff(len) < diff(best_ref) || (diff(len) == diff(best_ref) && len < best_ref)) {
                best_ref = len;
            }
        }
        ref_len += best_ref;

        for (int n = 1; n <= max_n; ++n) {
            auto hyp_counts = ngram_counts(hyp, n);
            std::map<std::string, int> max_ref_counts;
            for (const auto& r : refs[s]) {
                for (auto& [key, cnt] : ngram_counts(r, n)) {
                    auto& slot = max_ref_counts[key];
                    slot = std::max(slot, cnt);
                }
            }
            for (auto& [key, cnt] : hyp_counts) {
                totals[n - 1] += cnt;
                auto it = max_ref_counts.find(key);
                if (it != max_ref_counts.end()) matches[n - 1] += std::min(cnt, it->second);
            }
        }
    }

    double log_prec_sum = 0.0;
    for (int n = 0; n < max_n; ++n) {
        const double num = matches[n] > 0 ? static_cast<double>(matches[n]) : epsilon;
        const double den = totals[n] > 0 ? static_cast<double>(totals[n]) : 1.0;
        log_prec_sum += std::log(num / den);
    }
    const double geo_mean = std::exp(log_prec_sum / max_n);
    const double bp = hyp_len >= ref_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len > 0 ? hyp_len : 1));
    return 100.0 * bp * geo_mean;
}

// ROUGE-L: LCS F-measure (beta = 1.2), best reference per sample, corpus mean.
inline double rouge_l(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs) {
    using namespace metrics_detail;
    check_corpus(hyps, refs, "rouge_l");
    constexpr double beta2 = 1.2 * 1.2;
    std::vector<double> scores;
    scores.reserve(hyps.size());
    for (size_t s = 0; s < hyps.size(); ++s) {
        double best = 0.0;
        for (const auto& r : refs[s]) {
            if (hyps[s].empty() || r.empty()) continue;
            const int lcs = lcs_length(hyps[s], r);
            if (lcs == 0) continue;
            const double prec = static_cast<double>(lcs) / hyps[s].size();
            const double rec = static_cast<double>(lcs) / r.size();
            best = std::max(best, (1.0 + beta2) * prec * rec / (rec + beta2 * prec));
        }
        scores.push_back(best);
    }
    return 100.0 * stable_mean(std::move(scores));
}

// CIDEr (length-penalty-free): TF-IDF 1..4-gram cosine averaged over
// references and n, x10 per sample as is conventional, corpus mean, x100 on
// top to match the percentage scale of the other metrics.
inline double cider(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs,
                    int max_n = 4) {
    using namespace metrics_detail;
    check_corpus(hyps, refs, "cider");
    const size_t n_samples = hyps.size();
    if (n_samples < 2) {
        throw std::invalid_argument("cider: IDF needs at least 2 samples, got " +
                                    std::to_string(n_samples));
    }

    // document frequency over reference sets
    std::vector<std::map<std::string, int>> df(max_n);
    for (const auto& rs : refs) {
        for (int n = 1; n <= max_n; ++n) {
            std::map<std::string, int> seen;
            for (const auto& r : rs) {
                for (auto& [key, cnt] : ngram_counts(r, n)) seen[key] = 1;
            }
            for (auto& [key, one] : seen) df[n - 1][key] += 1;
        }
    }
    const double log_n = std::log(static_cast<double>(n_samples));
    auto idf = [&](int n, const std::string& key) {
        auto it = df[n - 1].find(key);
        const double d = it == df[n - 1].end() ? 0.0 : static_cast<double>(it->second);
        return log_n - std::log(std::max(1.0, d));
    };

    std::vector<double> scores;
    scores.reserve(n_samples);
    for (size_t s = 0; s < n_samples; ++s) {
        double sum_over_n = 0.0;
        for (int n = 1; n <= max_n; ++n) {
            auto hyp_vec = ngram_counts(hyps[s], n);
            double hyp_norm2 = 0.0;
            for (auto& [key, cnt] : hyp_vec) {
                const double w = cnt * idf(n, key);
                hyp_norm2 += w * w;
            }
            double ref_mean = 0.0;
            for (const auto& r : refs[s]) {
                auto ref_vec = ngram_counts(r, n);
                double ref_norm2 = 0.0, dot = 0.0;
                for (auto& [key, cnt] : ref_vec) {
                    const double w = cnt * idf(n, key);
                    ref_norm2 += w * w;
                    auto it = hyp_vec.find(key);
                    if (it != hyp_vec.end()) dot += w * (it->second * idf(n, key));
                }
                if (hyp_norm2 > 0.0 && ref_norm2 > 0.0) {
                    ref_mean += dot / (std::sqrt(hyp_norm2) * std::sqrt(ref_norm2));
                }
            }
            sum_over_n += ref_mean / static_cast<double>(refs[s].size());
        }
        scores.push_back(10.0 * sum_over_n / static_cast<double>(max_n));
    }
    return 100.0 * stable_mean(std::move(scores));
}

struct EvalReport {
    double bleu1 = 0.0, bleu2 = 0.0, bleu3 = 0.0, bleu4 = 0.0;
    double rougeL = 0.0;
    double cider = 0.0;
    int n_samples = 0;
    std::string smoothing = "bleu: epsilon=1e-9 on zero match counts";
};

inline EvalReport evaluate(const std::vector<TokenSeq>& hyps, const std::vector<RefSet>& refs) {
    EvalReport r;
    r.bleu1 = bleu(hyps, refs, 1);
    r.bleu2 = bleu(hyps, refs, 2);
    r.bleu3 = bleu(hyps, refs, 3);
    r.bleu4 = bleu(hyps, refs, 4);
    r.rougeL = rouge_l(hyps, refs);
    r.cider = hyps.size() >= 2 ? motcap::cider(hyps, refs) : 0.0;
    r.n_samples = static_cast<int>(hyps.size());
    return r;
}

}  // namespace motcap
