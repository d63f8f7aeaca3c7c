#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/skeleton.hpp"
#include "motcap/vocab.hpp"

namespace motcap {

// Deterministic suffix stripper: ing / ed / es-after-sibilant / s, one
// suffix at most, only when at least 3 characters remain.
inline std::string stem(const std::string& word) {
    auto ends_with = [&](const std::string& s) {
        return word.size() >= s.size() && word.compare(word.size() - s.size(), s.size(), s) == 0;
    };
    auto residual_ok = [&](size_t suffix_len) { return word.size() - suffix_len >= 3; };

    if (ends_with("ing") && residual_ok(3)) return word.substr(0, word.size() - 3);
    if (ends_with("ed") && residual_ok(2)) return word.substr(0, word.size() - 2);
    if (ends_with("es") && residual_ok(2)) {
        const std::string res = word.substr(0, word.size() - 2);
        const char last = res.back();
        const bool sibilant = last == 's' || last == 'x' || last == 'z' ||
                              (res.size() >= 2 && (res.compare(res.size() - 2, 2, "ch") == 0 ||
                                                   res.compare(res.size() - 2, 2, "sh") == 0));
        if (sibilant) return res;
    }
    if (ends_with("s") && !ends_with("ss") && residual_ok(1)) return word.substr(0, word.size() - 1);
    return word;
}

// Category of dictionary words with an optional body-part target.
struct DictionaryCategory {
    std::string name;
    std::vector<std::string> words;
    std::vector<BodyPart> parts;  // empty for connection/subject categories
};

class GuidanceDictionary {
public:
    explicit GuidanceDictionary(std::vector<DictionaryCategory> categories)
        : categories_(std::move(categories)) {
        for (int ci = 0; ci < static_cast<int>(categories_.size()); ++ci) {
            for (const auto& w : categories_[ci].words) {
                const std::string s = stem(w);
                auto [it, inserted] = stem_to_category_.emplace(s, ci);
                if (!inserted && it->second != ci) {
                    throw std::invalid_argument("dictionary: stem '" + s +
                                                "' appears in two categories");
                }
            }
        }
    }

    const std::vector<DictionaryCategory>& categories() const { return categories_; }

    const DictionaryCategory* lookup(const std::string& token) const {
        auto it = stem_to_category_.find(stem(token));
        return it == stem_to_category_.end() ? nullptr : &categories_[it->second];
    }

    // 0/1 target over the six parts for part-mapped words, nullopt otherwise.
    std::optional<std::array<double, kNumParts>> spatial_target(const std::string& token) const {
        const auto* cat = lookup(token);
        if (!cat || cat->parts.empty()) return std::nullopt;
        std::array<double, kNumParts> target{};
        for (BodyPart p : cat->parts) target[static_cast<int>(p)] = 1.0;
        return target;
    }

    bool is_part_mapped(const std::string& token) const {
        const auto* cat = lookup(token);
        return cat != nullptr && !cat->parts.empty();
    }

    static GuidanceDictionary from_json(const nlohmann::json& j) {
        std::vector<DictionaryCategory> cats;
        for (auto it = j.begin(); it != j.end(); ++it) {
            DictionaryCategory cat;
            cat.name = it.key();
            for (const auto& w : it.value().at("words")) cat.words.push_back(w.get<std::string>());
            for (const auto& p : it.value().at("parts")) cat.parts.push_back(part_from_name(p.get<std::string>()));
            cats.push_back(std::move(cat));
        }
        return GuidanceDictionary(std::move(cats));
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        for (const auto& cat : categories_) {
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (BodyPart p : cat.parts) parts.push_back(part_names()[static_cast<int>(p)]);
            j[cat.name] = {{"words", cat.words}, {"parts", parts}};
        }
        return j;
    }

    // Default used by the synthetic corpus; per-dataset word lists can be
    // swapped in from JSON.
    static GuidanceDictionary builtin_default() {
        const BodyPart LA = BodyPart::LeftArm, RA = BodyPart::RightArm, TO = BodyPart::Torso,
                       LL = BodyPart::LeftLeg, RL = BodyPart::RightLeg, RO = BodyPart::Root;
        return GuidanceDictionary({
            {"trajectory",
             {"circle", "circuit", "clockwise", "anticlockwise", "forward", "backward", "walks",
              "turns"},
             {RO}},
            {"arms",
             {"open", "waves", "wipe", "throws", "punch", "pick", "boxing", "clean", "swipe",
              "catch", "handstand", "draw"},
             {LA, RA}},
            {"legs",
             {"kicks", "stomp", "lift", "kneel", "squats", "squad", "stand", "stumble", "rotate",
              "jumps"},
             {LL, RL}},
            {"torso", {"bend", "bows"}, {TO}},
            {"connection", {"is", "the", "of", "his", "her", "its", "on", "their", "with", "then", "and"}, {}},
            {"subject", {"a", "person", "human", "man", "someone"}, {}},
        });
    }

private:
    std::vector<DictionaryCategory> categories_;
    std::map<std::string, int> stem_to_category_;
};

// Motion/function word lists used for the adaptive-gate ground truth where
// the part-mapped dictionary does not apply (qualifiers, body nouns).
struct Lexicon {
    std::vector<std::string> motion_words;
    std::vector<std::string> function_words;

    bool is_motion(const std::string& token) const { return motion_stems_.count(stem(token)) > 0; }
    bool is_function(const std::string& token) const { return function_stems_.count(stem(token)) > 0; }

    void build_index() {
        motion_stems_.clear();
        function_stems_.clear();
        for (const auto& w : motion_words) motion_stems_.insert(stem(w));
        for (const auto& w : function_words) function_stems_.insert(stem(w));
    }

    static Lexicon from_json(const nlohmann::json& j) {
        Lexicon lex;
        for (const auto& w : j.at("motion_words")) lex.motion_words.push_back(w.get<std::string>());
        for (const auto& w : j.at("function_words")) lex.function_words.push_back(w.get<std::string>());
        lex.build_index();
        return lex;
    }

    nlohmann::ordered_json to_json() const {
        return {{"motion_words", motion_words}, {"function_words", function_words}};
    }

    static Lexicon builtin_default() {
        Lexicon lex;
        lex.motion_words = {"slowly", "quickly", "twice",  "left", "right", "both", "arm",
                            "hand",   "leg",     "foot",   "up",   "down",  "high", "deep",
                            "fast",   "air",     "place",  "side"};
        lex.function_words = {"a",   "person", "human", "man",  "someone", "is",  "the", "of",
                              "his", "her",    "its",   "on",   "their",   "with", "then", "and",
                              "in",  "at"};
        lex.build_index();
        return lex;
    }

private:
    std::set<std::string> motion_stems_;
    std::set<std::string> function_stems_;
};

struct SupervisionTargets {
    // One slot per prediction step: caption tokens then EOS.
    std::vector<double> beta;
    std::vector<std::array<double, kNumParts>> alpha_target;  // zeros when unsupervised
    std::vector<bool> supervised;
    int n_supervised = 0;  // N_y

    size_t steps() const { return beta.size(); }
};

// beta_t = 1 for dictionary/lexicon motion words, 0 otherwise; the EOS slot
// is motion-related (emitting it depends on the motion having ended).
inline std::vector<double> build_beta_targets(const std::vector<std::string>& tokens,
                                              const GuidanceDictionary& dict, const Lexicon& lex) {
    std::vector<double> beta;
    beta.reserve(tokens.size() + 1);
    for (const auto& tok : tokens) {
        const bool motion = dict.is_part_mapped(tok) || lex.is_motion(tok);
        beta.push_back(motion ? 1.0 : 0.0);
    }
    beta.push_back(1.0);  // EOS
    return beta;
}

// Spatial targets for part-mapped dictionary words, constant across frames;
// temporal filtering is the Gaussian window's job. N_y counts supervised
// words; captions with N_y = 0 skip the spatial loss entirely.
inline SupervisionTargets build_spatial_targets(const std::vector<std::string>& tokens,
                                                const GuidanceDictionary& dict, const Lexicon& lex) {
    SupervisionTargets t;
    t.beta = build_beta_targets(tokens, dict, lex);
    const size_t steps = tokens.size() + 1;
    t.alpha_target.assign(steps, {});
    t.supervised.assign(steps, false);
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (auto target = dict.spatial_target(tokens[i])) {
            t.alpha_target[i] = *target;
            t.supervised[i] = true;
            ++t.n_supervised;
        }
    }
    return t;
}

inline GuidanceDictionary load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read dictionary " + path);
    nlohmann::json j;
    in >> j;
    return GuidanceDictionary::from_json(j);
}

inline Lexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read lexicon " + path);
    nlohmann::json j;
    in >> j;
    return Lexicon::from_json(j);
}

}  // namespace motcap
