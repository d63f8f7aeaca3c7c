#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/attention.hpp"
#include "motcap/supervision.hpp"
#include "motcap/vocab.hpp"

namespace motcap {

// On-disk attention dump, one file per generated caption:
// {"id", "tokens", "beta": [t], "m": [t], "sigma": [t],
//  "gamma": [t][T_x], "Gamma": [t][T_x], "alpha": [t][T_x][parts]}
struct AttentionDump {
    std::string id;
    std::vector<std::string> tokens;  // generated tokens, <eos> included
    std::vector<AttentionState> steps;
};

inline nlohmann::ordered_json dump_to_json(const AttentionDump& dump) {
    nlohmann::ordered_json j;
    j["id"] = dump.id;
    j["tokens"] = dump.tokens;
    nlohmann::ordered_json beta = nlohmann::ordered_json::array();
    nlohmann::ordered_json m = nlohmann::ordered_json::array();
    nlohmann::ordered_json sigma = nlohmann::ordered_json::array();
    nlohmann::ordered_json gamma = nlohmann::ordered_json::array();
    nlohmann::ordered_json window = nlohmann::ordered_json::array();
    nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
    for (const auto& s : dump.steps) {
        beta.push_back(s.beta);
        m.push_back(s.mean);
        sigma.push_back(s.sigma);
        gamma.push_back(s.gamma);
        window.push_back(s.window);
        nlohmann::ordered_json frames = nlohmann::ordered_json::array();
        for (int k = 0; k < s.frames; ++k) {
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (int p = 0; p < s.parts; ++p) parts.push_back(s.alpha_at(p, k));
            frames.push_back(std::move(parts));
        }
        alpha.push_back(std::move(frames));
    }
    j["beta"] = std::move(beta);
    j["m"] = std::move(m);
    j["sigma"] = std::move(sigma);
    j["gamma"] = std::move(gamma);
    j["Gamma"] = std::move(window);
    j["alpha"] = std::move(alpha);
    return j;
}

inline AttentionDump dump_from_json(const nlohmann::json& j) {
    AttentionDump dump;
    dump.id = j.at("id").get<std::string>();
    dump.tokens = j.at("tokens").get<std::vector<std::string>>();
    const auto& beta = j.at("beta");
    const auto& m = j.at("m");
    const auto& sigma = j.at("sigma");
    const auto& gamma = j.at("gamma");
    const auto& window = j.at("Gamma");
    const auto& alpha = j.at("alpha");
    for (size_t t = 0; t < dump.tokens.size(); ++t) {
        AttentionState s;
        s.beta = beta.at(t).get<double>();
        s.mean = m.at(t).get<double>();
        s.sigma = sigma.at(t).get<double>();
        s.gamma = gamma.at(t).get<std::vector<double>>();
        s.window = window.at(t).get<std::vector<double>>();
        s.frames = static_cast<int>(s.gamma.size());
        const auto& af = alpha.at(t);
        s.parts = static_cast<int>(af.at(0).size());
        s.alpha.assign(static_cast<size_t>(s.frames) * s.parts, 0.0);
        for (int k = 0; k < s.frames; ++k)
            for (int p = 0; p < s.parts; ++p)
                s.alpha[static_cast<size_t>(p) * s.frames + k] = af.at(k).at(p).get<double>();
        dump.steps.push_back(std::move(s));
    }
    return dump;
}

inline void write_dump(const AttentionDump& dump, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write attention dump " + path);
    out << dump_to_json(dump).dump();
}

inline AttentionDump read_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read attention dump " + path);
    nlohmann::json j;
    in >> j;
    return dump_from_json(j);
}

// One generated token with its attention, the unit of every analysis below.
struct InterpRecord {
    std::string sample_id;
    std::string word;
    std::string word_stem;
    double beta = 0.0;
    double mean = 0.0;
    double sigma = 0.0;
    std::vector<double> window;  // T_x
    std::vector<double> alpha;   // parts x T_x, part-major
    int frames = 0;
    int parts = kNumParts;

    double alpha_at(int part, int frame) const {
        return alpha[static_cast<size_t>(part) * frames + frame];
    }
};

// Specials other than <eos> never carry usable attention; <eos> is kept
// (its gate is motion-related) but analyses that report "words" skip it.
inline std::vector<InterpRecord> collect_records(const std::vector<AttentionDump>& dumps) {
    std::vector<InterpRecord> records;
    for (const auto& d : dumps) {
        for (size_t t = 0; t < d.tokens.size(); ++t) {
            if (d.tokens[t] == "<pad>" || d.tokens[t] == "<bos>" || d.tokens[t] == "<unk>") continue;
            InterpRecord r;
            r.sample_id = d.id;
            r.word = d.tokens[t];
            r.word_stem = stem(r.word);
            r.beta = d.steps[t].beta;
            r.mean = d.steps[t].mean;
            r.sigma = d.steps[t].sigma;
            r.window = d.steps[t].window;
            r.alpha = d.steps[t].alpha;
            r.frames = d.steps[t].frames;
            r.parts = d.steps[t].parts;
            records.push_back(std::move(r));
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// gate densities
// ---------------------------------------------------------------------------

struct BetaDensity {
    std::string word_stem;
    int count = 0;
    bool low_count = false;  // fewer than 5 occurrences
    double mean = 0.0;
    double median = 0.0;
    double bandwidth = 0.0;
    std::vector<double> grid;     // beta axis, 0..1
    std::vector<double> density;  // same length as grid
};

// Gaussian KDE with Silverman's bandwidth over the gate values of one stem.
inline BetaDensity beta_density(const std::vector<InterpRecord>& records,
                                const std::string& word_stem, int grid_points = 201) {
    if (records.empty()) throw std::invalid_argument("beta_density: no records");
    std::vector<double> values;
    for (const auto& r : records)
        if (r.word_stem == word_stem) values.push_back(r.beta);

    BetaDensity out;
    out.word_stem = word_stem;
    out.count = static_cast<int>(values.size());
    out.low_count = out.count < 5;
    if (values.empty()) return out;

    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / values.size();
    out.median = values.size() % 2 == 1
                     ? values[values.size() / 2]
                     : 0.5 * (values[values.size() / 2 - 1] + values[values.size() / 2]);

    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    const double iqr = values[static_cast<size_t>(0.75 * (values.size() - 1))] -
                       values[static_cast<size_t>(0.25 * (values.size() - 1))];
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(sd, 1e-3);
    out.bandwidth =
        std::max(1e-3, 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2));

    out.grid.resize(grid_points);
    out.density.resize(grid_points);
    const double inv_nh = 1.0 / (values.size() * out.bandwidth * std::sqrt(2.0 * 3.14159265358979323846));
    for (int i = 0; i < grid_points; ++i) {
        const double x = static_cast<double>(i) / (grid_points - 1);
        out.grid[i] = x;
        double d = 0.0;
        for (double v : values) {
            const double z = (x - v) / out.bandwidth;
            d += std::exp(-0.5 * z * z);
        }
        out.density[i] = d * inv_nh;
    }
    return out;
}

// ---------------------------------------------------------------------------
// temporal-max body-part histograms
// ---------------------------------------------------------------------------

struct PartHistogram {
    std::string word_stem;
    std::array<int, kNumParts> counts{};
    int total = 0;
    int modal_part = -1;   // ties break to the lowest part index
    double modal_share = 0.0;
};

// For each occurrence: frame of maximal window, then the argmax part at that
// frame (all ties to the lowest index).
inline int peak_frame(const InterpRecord& r) {
    int best = 0;
    for (int k = 1; k < r.frames; ++k)
        if (r.window[k] > r.window[best]) best = k;
    return best;
}

inline int top_part_at_peak(const InterpRecord& r) {
    const int k = peak_frame(r);
    int best = 0;
    for (int p = 1; p < r.parts; ++p)
        if (r.alpha_at(p, k) > r.alpha_at(best, k)) best = p;
    return best;
}

inline PartHistogram part_histogram(const std::vector<InterpRecord>& records,
                                    const std::string& word_stem) {
    PartHistogram h;
    h.word_stem = word_stem;
    for (const auto& r : records) {
        if (r.word_stem != word_stem) continue;
        ++h.counts[top_part_at_peak(r)];
        ++h.total;
    }
    for (int p = 0; p < kNumParts; ++p) {
        if (h.modal_part < 0 || h.counts[p] > h.counts[h.modal_part]) h.modal_part = p;
    }
    if (h.total > 0) h.modal_share = static_cast<double>(h.counts[h.modal_part]) / h.total;
    return h;
}

// ---------------------------------------------------------------------------
// action localization from the Gaussian window
// ---------------------------------------------------------------------------

struct Span {
    int start = 0;
    int end = 0;
};

// start/end = m -/+ kappa*sigma, rounded and clamped to the frame range.
// Depends only on (m, sigma), so it is invariant to any rescaling of Gamma.
inline Span localize(double mean, double sigma, int frames, double kappa = 1.5) {
    Span s;
    s.start = static_cast<int>(std::max<long>(0, std::lround(mean - kappa * sigma)));
    s.end = static_cast<int>(std::min<long>(frames - 1, std::lround(mean + kappa * sigma)));
    return s;
}

inline Span localize(const InterpRecord& r, double kappa = 1.5) {
    return localize(r.mean, r.sigma, r.frames, kappa);
}

// ---------------------------------------------------------------------------
// fine-grained caption report
// ---------------------------------------------------------------------------

struct FineGrainedEntry {
    std::string word;
    double beta = 0.0;
    double mean = 0.0;
    Span span;
    int top_part = -1;
};

struct FineGrainedReport {
    std::string sample_id;
    std::vector<FineGrainedEntry> motion_words;  // beta > tau, ordered by m
};

// Motion words of one decoded caption (gate above tau), each with its
// localized span and top-1 body part. <eos> is a terminator, not a word.
inline FineGrainedReport fine_grained_report(const AttentionDump& dump, double tau_beta = 0.5,
                                             double kappa = 1.5) {
    FineGrainedReport report;
    report.sample_id = dump.id;
    std::vector<AttentionDump> one = {dump};
    for (const auto& r : collect_records(one)) {
        if (r.word == "<eos>") continue;
        if (r.beta <= tau_beta) continue;
        FineGrainedEntry e;
        e.word = r.word;
        e.beta = r.beta;
        e.mean = r.mean;
        e.span = localize(r, kappa);
        e.top_part = top_part_at_peak(r);
        report.motion_words.push_back(std::move(e));
    }
    std::stable_sort(report.motion_words.begin(), report.motion_words.end(),
                     [](const FineGrainedEntry& a, const FineGrainedEntry& b) { return a.mean < b.mean; });
    return report;
}

inline nlohmann::ordered_json report_to_json(const FineGrainedReport& r) {
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (const auto& e : r.motion_words) {
        words.push_back({{"word", e.word},
                         {"beta", e.beta},
                         {"m", e.mean},
                         {"start", e.span.start},
                         {"end", e.span.end},
                         {"part", e.top_part >= 0 ? part_names()[e.top_part] : "none"}});
    }
    return {{"id", r.sample_id}, {"motion_words", words}};
}

}  // namespace motcap
