#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/losses.hpp"
#include "motcap/model.hpp"
#include "motcap/trainer.hpp"

namespace motcap {

namespace config_detail {

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Scalar TOML value -> JSON value. Strings are quoted, numbers bare,
// booleans true/false; arrays hold scalars.
inline nlohmann::ordered_json parse_scalar(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated string");
        }
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        size_t pos = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            const long long i = std::stoll(v, &pos);
            if (pos == v.size()) return i;
        } else {
            const double d = std::stod(v, &pos);
            if (pos == v.size()) return d;
        }
    } catch (...) {
    }
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

}  // namespace config_detail

// Minimal TOML reader covering what run configs need: [table] headers
// (dotted allowed), key = value with string/int/float/bool/flat-array
// values, # comments. Anything else is rejected loudly.
inline nlohmann::ordered_json parse_toml(const std::string& text) {
    using config_detail::parse_scalar;
    using config_detail::trim;
    nlohmann::ordered_json root = nlohmann::ordered_json::object();
    nlohmann::ordered_json* table = &root;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) {
            // keep # inside quotes
            const size_t quote_open = line.find('"');
            if (quote_open == std::string::npos || hash < quote_open) line = line.substr(0, hash);
        }
        const std::string t = trim(line);
        if (t.empty()) continue;

        if (t.front() == '[') {
            if (t.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad table header");
            std::string path = trim(t.substr(1, t.size() - 2));
            if (path.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty table name");
            table = &root;
            std::istringstream parts(path);
            std::string part;
            while (std::getline(parts, part, '.')) {
                part = trim(part);
                if (part.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad table name");
                table = &(*table)[part];
                if (!table->is_object() && !table->is_null()) {
                    throw std::invalid_argument("config line " + std::to_string(line_no) + ": table clashes with a value");
                }
            }
            continue;
        }

        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");

        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated array");
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            std::string body = value.substr(1, value.size() - 2);
            std::string item;
            std::istringstream items(body);
            while (std::getline(items, item, ',')) {
                if (!trim(item).empty()) arr.push_back(parse_scalar(item, line_no));
            }
            (*table)[key] = std::move(arr);
        } else {
            (*table)[key] = parse_scalar(value, line_no);
        }
    }
    return root;
}

// TOML first, JSON fallback by extension (or content when extension is odd).
inline nlohmann::ordered_json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const bool looks_json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    if (looks_json) return nlohmann::ordered_json::parse(text);
    return parse_toml(text);
}

// key.path=value overrides; values parsed like TOML scalars, falling back to
// a bare string so `--set data.dictionary=path.json` works unquoted.
inline void apply_override(nlohmann::ordered_json& root, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override must be key=value, got '" + assignment + "'");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    nlohmann::ordered_json* node = &root;
    std::istringstream parts(path);
    std::string part;
    std::vector<std::string> keys;
    while (std::getline(parts, part, '.')) keys.push_back(config_detail::trim(part));
    for (size_t i = 0; i + 1 < keys.size(); ++i) node = &(*node)[keys[i]];
    try {
        (*node)[keys.back()] = config_detail::parse_scalar(value, 0);
    } catch (...) {
        (*node)[keys.back()] = value;
    }
}

// Typed run settings with strict unknown-key rejection.
struct RunSettings {
    TrainConfig train;          // includes model dims and loss weights
    std::string dictionary;     // path; empty selects the built-in
    std::string lexicon;
    std::string decode = "greedy";
    int beam_width = 2;

    static RunSettings from_json(const nlohmann::ordered_json& j) {
        RunSettings s;
        static const std::vector<std::string> sections = {"model", "train", "data", "decode"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::find(sections.begin(), sections.end(), it.key()) == sections.end()) {
                throw std::invalid_argument("config: unknown section '" + it.key() + "'");
            }
        }
        auto get = [](const nlohmann::ordered_json& obj, const char* key, auto fallback) {
            using T = decltype(fallback);
            if (!obj.contains(key)) return fallback;
            return obj.at(key).get<T>();
        };
        auto check_keys = [](const nlohmann::ordered_json& obj, const std::vector<std::string>& known,
                             const std::string& section) {
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
                    throw std::invalid_argument("config: unknown key '" + section + "." + it.key() + "'");
                }
            }
        };

        if (j.contains("model")) {
            const auto& m = j.at("model");
            check_keys(m, {"h1", "h2", "h_dec", "d_emb", "d_att", "d_common", "sigma_min", "max_len"},
                       "model");
            s.train.model.enc.h1 = get(m, "h1", 32);
            s.train.model.enc.h2 = get(m, "h2", 16);
            s.train.model.h_dec = get(m, "h_dec", 64);
            s.train.model.d_emb = get(m, "d_emb", 32);
            s.train.model.att.d_att = get(m, "d_att", 0);
            s.train.model.att.d_common = get(m, "d_common", 0);
            s.train.model.att.sigma_min = get(m, "sigma_min", 0.5);
            s.train.model.max_len = get(m, "max_len", 30);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            check_keys(t, {"lambda_spat", "lambda_adapt", "learning_rate", "batch_size", "epochs",
                           "seed", "clip_norm", "early_stop_patience"},
                       "train");
            s.train.weights.spat = get(t, "lambda_spat", 0.0);
            s.train.weights.adapt = get(t, "lambda_adapt", 0.0);
            s.train.learning_rate = get(t, "learning_rate", 1e-3);
            s.train.batch_size = get(t, "batch_size", 32);
            s.train.epochs = get(t, "epochs", 30);
            s.train.seed = static_cast<uint64_t>(get(t, "seed", 1LL));
            s.train.clip_norm = get(t, "clip_norm", 5.0);
            s.train.early_stop_patience = get(t, "early_stop_patience", 10);
        }
        if (j.contains("data")) {
            const auto& d = j.at("data");
            check_keys(d, {"dictionary", "lexicon"}, "data");
            s.dictionary = get(d, "dictionary", std::string());
            s.lexicon = get(d, "lexicon", std::string());
        }
        if (j.contains("decode")) {
            const auto& d = j.at("decode");
            check_keys(d, {"strategy", "beam_width"}, "decode");
            s.decode = get(d, "strategy", std::string("greedy"));
            s.beam_width = get(d, "beam_width", 2);
            if (s.decode != "greedy" && s.decode != "beam") {
                throw std::invalid_argument("config: decode.strategy must be greedy or beam");
            }
        }
        s.train.validate();
        return s;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["model"] = model_config_to_json(train.model);
        j["train"] = {{"lambda_spat", train.weights.spat},
                      {"lambda_adapt", train.weights.adapt},
                      {"learning_rate", train.learning_rate},
                      {"batch_size", train.batch_size},
                      {"epochs", train.epochs},
                      {"seed", train.seed},
                      {"clip_norm", train.clip_norm},
                      {"early_stop_patience", train.early_stop_patience}};
        j["data"] = {{"dictionary", dictionary}, {"lexicon", lexicon}};
        j["decode"] = {{"strategy", decode}, {"beam_width", beam_width}};
        return j;
    }
};

inline uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    uint64_t hash = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        if (!in) break;
    }
    return hash;
}

}  // namespace motcap
