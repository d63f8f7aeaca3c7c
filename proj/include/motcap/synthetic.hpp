#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/rng.hpp"
#include "motcap/skeleton.hpp"
#include "motcap/supervision.hpp"

namespace motcap {

struct ActionSpec {
    std::string name;        // wave, kick, walk, turn, bow, squat, throw, jump
    std::string word;        // surface form used in the caption ("kicks")
    std::string laterality;  // left / right / both / none
    int onset = 0;
    int offset = 0;  // inclusive window [onset, offset]
    double amplitude = 0.0;
    double frequency = 0.0;
    std::vector<BodyPart> acting_parts;

    double center() const { return 0.5 * (onset + offset); }
};

struct SyntheticSample {
    std::string id;
    MotionSequence motion;  // global coordinates
    std::vector<std::string> caption;
    std::vector<ActionSpec> actions;
    std::string split;  // train / val / test
};

struct SyntheticCorpus {
    std::vector<SyntheticSample> samples;
    uint64_t seed = 0;
    double noise_sigma = 0.0;

    std::vector<const SyntheticSample*> split(const std::string& name) const {
        std::vector<const SyntheticSample*> out;
        for (const auto& s : samples)
            if (s.split == name) out.push_back(&s);
        return out;
    }
};

struct SynthConfig {
    int n = 500;
    uint64_t seed = 7;
    int tx_min = 40;
    int tx_max = 80;
    double noise_sigma = 0.01;
    double frame_rate = 20.0;
    double two_action_prob = 0.7;  // applied when T_x is long enough for two windows
};

namespace synth_detail {

struct JointOffsets {
    // root-relative rest pose, y up, z forward, x lateral
    std::array<std::array<double, 3>, 13> rest;
    static JointOffsets standard() {
        JointOffsets j;
        auto set = [&](int idx, double x, double y, double z) { j.rest[idx] = {x, y, z}; };
        set(0, 0.0, 0.0, 0.0);      // root (offsets are relative to it)
        set(1, 0.0, 0.15, 0.0);     // spine
        set(2, 0.0, 0.30, 0.0);     // chest
        set(3, 0.0, 0.45, 0.0);     // neck
        set(4, 0.0, 0.60, 0.0);     // head
        set(5, 0.25, 0.35, 0.0);    // l_elbow
        set(6, 0.45, 0.20, 0.0);    // l_hand
        set(7, -0.25, 0.35, 0.0);   // r_elbow
        set(8, -0.45, 0.20, 0.0);   // r_hand
        set(9, 0.12, -0.40, 0.0);   // l_knee
        set(10, 0.12, -0.85, 0.0);  // l_foot
        set(11, -0.12, -0.40, 0.0); // r_knee
        set(12, -0.12, -0.85, 0.0); // r_foot
        return j;
    }
};

inline double envelope(double tau) {
    const double s = std::sin(3.14159265358979323846 * tau);
    return s * s;
}

struct Phrase {
    std::vector<std::string> tokens;
};

// Three template variants per action; {side} expands to the laterality word
// and limb nouns pluralize for "both".
inline Phrase action_phrase(const std::string& action, const std::string& side, int variant) {
    auto limb = [&](const char* sing, const char* plur) {
        return side == "both" ? std::string(plur) : std::string(sing);
    };
    Phrase p;
    if (action == "wave") {
        if (variant == 0) p.tokens = {"waves", "with", "the", side, limb("arm", "arms")};
        else if (variant == 1) p.tokens = {"waves", "the", side, limb("hand", "hands"), "slowly"};
        else p.tokens = {"waves", "quickly", "with", "the", side, limb("arm", "arms")};
    } else if (action == "kick") {
        if (variant == 0) p.tokens = {"kicks", "with", "the", side, "leg"};
        else if (variant == 1) p.tokens = {"kicks", "the", side, "foot", "high"};
        else p.tokens = {"kicks", "quickly", "with", "the", side, "leg"};
    } else if (action == "walk") {
        if (variant == 0) p.tokens = {"walks", "forward", "slowly"};
        else if (variant == 1) p.tokens = {"walks", "forward"};
        else p.tokens = {"walks", "quickly", "forward"};
    } else if (action == "turn") {
        if (variant == 0) p.tokens = {"turns", "around", "slowly"};
        else if (variant == 1) p.tokens = {"turns", "in", "a", "circle"};
        else p.tokens = {"turns", "around", "quickly"};
    } else if (action == "bow") {
        if (variant == 0) p.tokens = {"bows", "deeply"};
        else if (variant == 1) p.tokens = {"bows", "slowly"};
        else p.tokens = {"bows", "twice"};
    } else if (action == "squat") {
        if (variant == 0) p.tokens = {"squats", "down", "slowly"};
        else if (variant == 1) p.tokens = {"squats", "down", "low"};
        else p.tokens = {"squats", "twice"};
    } else if (action == "throw") {
        if (variant == 0) p.tokens = {"throws", "with", "the", side, "arm"};
        else if (variant == 1) p.tokens = {"throws", "with", "the", side, "hand"};
        else p.tokens = {"throws", "quickly", "with", "the", side, "arm"};
    } else if (action == "jump") {
        if (variant == 0) p.tokens = {"jumps", "up", "and", "down"};
        else if (variant == 1) p.tokens = {"jumps", "in", "place"};
        else p.tokens = {"jumps", "high", "twice"};
    } else {
        throw std::invalid_argument("unknown synthetic action " + action);
    }
    return p;
}

inline const char* action_word(const std::string& action) {
    if (action == "wave") return "waves";
    if (action == "kick") return "kicks";
    if (action == "walk") return "walks";
    if (action == "turn") return "turns";
    if (action == "bow") return "bows";
    if (action == "squat") return "squats";
    if (action == "throw") return "throws";
    if (action == "jump") return "jumps";
    throw std::invalid_argument("unknown synthetic action " + action);
}

inline std::vector<BodyPart> acting_parts_for(const std::string& action, const std::string& side) {
    auto lateral = [&](BodyPart left, BodyPart right) -> std::vector<BodyPart> {
        if (side == "left") return {left};
        if (side == "right") return {right};
        return {left, right};
    };
    if (action == "wave" || action == "throw") return lateral(BodyPart::LeftArm, BodyPart::RightArm);
    if (action == "kick" || action == "squat" || action == "jump")
        return lateral(BodyPart::LeftLeg, BodyPart::RightLeg);
    if (action == "bow") return {BodyPart::Torso};
    if (action == "walk" || action == "turn") return {BodyPart::Root};
    throw std::invalid_argument("unknown synthetic action " + action);
}

}  // namespace synth_detail

// Realizes one motion from explicit action specs. Written against the
// 13-joint default layout; acting joints carry the parameterized trajectory,
// everything else is rest pose plus Gaussian noise.
inline MotionSequence realize_motion(int frames, const std::vector<ActionSpec>& actions,
                                     double noise_sigma, double frame_rate, Rng& rng) {
    if (frames < 2) throw std::invalid_argument("realize_motion: need at least 2 frames");
    for (const auto& a : actions) {
        if (a.onset < 0 || a.offset <= a.onset || a.offset >= frames) {
            throw std::invalid_argument("realize_motion: window [" + std::to_string(a.onset) + "," +
                                        std::to_string(a.offset) + "] does not fit in " +
                                        std::to_string(frames) + " frames");
        }
    }

    const auto layout = default_layout();
    const auto offsets = synth_detail::JointOffsets::standard();
    const int J = layout.num_joints();

    MotionSequence seq;
    seq.layout = layout;
    seq.frame_rate = frame_rate;
    seq.positions = Tensor(frames, J * 3, 0.0);

    // Root trajectory: static hip height unless a walk or turn window moves it.
    // amplitude is the peak speed (m/frame for walk, rad/frame for turn).
    std::vector<std::array<double, 3>> root(frames, {0.0, 0.9, 0.0});
    for (const auto& a : actions) {
        if (a.name == "walk") {
            double z = 0.0;
            for (int k = 1; k < frames; ++k) {
                if (k >= a.onset && k <= a.offset) {
                    const double tau = double(k - a.onset) / double(a.offset - a.onset);
                    z += a.amplitude * synth_detail::envelope(tau);
                }
                root[k][2] += z;
            }
        } else if (a.name == "turn") {
            const double radius = 1.0;
            double theta = 0.0;
            for (int k = 1; k < frames; ++k) {
                if (k >= a.onset && k <= a.offset) {
                    const double tau = double(k - a.onset) / double(a.offset - a.onset);
                    theta += a.amplitude * synth_detail::envelope(tau);
                }
                root[k][0] += radius * std::sin(theta);
                root[k][2] += radius * (1.0 - std::cos(theta));
            }
        }
    }

    // Limb/torso displacements in the root frame.
    auto joints_of_parts = [&](const std::vector<BodyPart>& parts) {
        std::vector<int> joints;
        for (BodyPart p : parts) {
            auto js = layout.joints_of(p);
            joints.insert(joints.end(), js.begin(), js.end());
        }
        return joints;
    };

    Tensor local(frames, J * 3, 0.0);
    for (const auto& a : actions) {
        if (a.name == "walk" || a.name == "turn") continue;
        const auto joints = joints_of_parts(a.acting_parts);
        for (int k = a.onset; k <= a.offset; ++k) {
            const double t = double(k - a.onset);
            const double tau = t / double(a.offset - a.onset);
            const double env = synth_detail::envelope(tau);
            for (int j : joints) {
                double dx = 0.0, dy = 0.0, dz = 0.0;
                if (a.name == "wave") {
                    dx = a.amplitude * std::sin(2.0 * 3.14159265358979323846 * a.frequency * t) * env;
                    dy = 0.25 * env;
                } else if (a.name == "kick") {
                    dz = a.amplitude * std::sin(3.14159265358979323846 * a.frequency * t) * env;
                } else if (a.name == "throw") {
                    dz = a.amplitude * std::sin(3.14159265358979323846 * a.frequency * t) * env;
                    dy = 0.4 * a.amplitude * env;
                } else if (a.name == "bow") {
                    // frequency counts bows; the sin^2 profile is zero-ended
                    const double h = offsets.rest[j][1];
                    const double s = std::sin(3.14159265358979323846 * a.frequency * tau);
                    const double phi = a.amplitude * s * s;
                    dz = h * std::sin(phi);
                    dy = -h * (1.0 - std::cos(phi));
                } else if (a.name == "squat") {
                    const double s = std::sin(3.14159265358979323846 * a.frequency * tau);
                    dy = -a.amplitude * s * s;
                } else if (a.name == "jump") {
                    const double s = std::sin(3.14159265358979323846 * a.frequency * tau);
                    dy = a.amplitude * s * s;
                }
                local(k, j * 3 + 0) += dx;
                local(k, j * 3 + 1) += dy;
                local(k, j * 3 + 2) += dz;
            }
        }
    }

    for (int k = 0; k < frames; ++k) {
        for (int j = 0; j < J; ++j) {
            for (int d = 0; d < 3; ++d) {
                const double rest = j == 0 ? 0.0 : offsets.rest[j][d];
                seq.pos(k, j, d) =
                    root[k][d] + rest + local(k, j * 3 + d) + rng.normal(0.0, noise_sigma);
            }
        }
    }
    return seq;
}

inline SyntheticCorpus generate_corpus(const SynthConfig& cfg) {
    if (cfg.n < 10) throw std::invalid_argument("generate_corpus: need at least 10 samples");
    if (cfg.tx_min < 30 || cfg.tx_max < cfg.tx_min) {
        throw std::invalid_argument("generate_corpus: bad T_x range");
    }
    Rng rng(cfg.seed);
    static const std::vector<std::string> kActions = {"wave", "kick", "walk", "turn",
                                                      "bow",  "squat", "throw", "jump"};
    static const std::vector<std::vector<std::string>> kSubjects = {
        {"a", "person"}, {"a", "man"}, {"someone"}};

    SyntheticCorpus corpus;
    corpus.seed = cfg.seed;
    corpus.noise_sigma = cfg.noise_sigma;

    for (int i = 0; i < cfg.n; ++i) {
        const int frames = rng.uniform_int(cfg.tx_min, cfg.tx_max);
        const bool two = frames >= 50 && rng.uniform() < cfg.two_action_prob;

        std::vector<int> action_ids;
        action_ids.push_back(rng.uniform_int(0, static_cast<int>(kActions.size()) - 1));
        if (two) {
            int second = rng.uniform_int(0, static_cast<int>(kActions.size()) - 2);
            if (second >= action_ids[0]) ++second;  // distinct from the first
            action_ids.push_back(second);
        }

        // windows: [on1, off1] (+gap >= 5) [on2, off2], all inside [0, frames-1]
        std::vector<std::pair<int, int>> windows;
        if (two) {
            const int on1 = rng.uniform_int(4, 8);
            const int d1 = rng.uniform_int(12, 18);
            const int gap = rng.uniform_int(5, 9);
            const int on2 = on1 + d1 + gap;
            const int d2_max = std::min(18, frames - 4 - on2);
            const int d2 = rng.uniform_int(12, std::max(12, d2_max));
            windows = {{on1, on1 + d1}, {on2, on2 + d2}};
        } else {
            const int dur = rng.uniform_int(12, 22);
            const int on = rng.uniform_int(4, frames - dur - 4);
            windows = {{on, on + dur}};
        }

        SyntheticSample sample;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "s%05d", i);
        sample.id = idbuf;

        std::vector<std::string> caption = kSubjects[rng.uniform_int(0, 2)];
        for (size_t ai = 0; ai < action_ids.size(); ++ai) {
            const std::string& name = kActions[action_ids[ai]];
            ActionSpec spec;
            spec.name = name;
            spec.word = synth_detail::action_word(name);
            spec.onset = windows[ai].first;
            spec.offset = windows[ai].second;

            const int duration = spec.offset - spec.onset;
            if (name == "wave") {
                spec.laterality = std::array<const char*, 3>{"left", "right", "both"}[rng.uniform_int(0, 2)];
                spec.amplitude = rng.uniform(0.40, 0.55);
                spec.frequency = rng.uniform(0.16, 0.24);
            } else if (name == "kick") {
                spec.laterality = rng.uniform_int(0, 1) == 0 ? "left" : "right";
                spec.amplitude = rng.uniform(0.70, 0.85);
                spec.frequency = rng.uniform(0.20, 0.28);
            } else if (name == "throw") {
                spec.laterality = rng.uniform_int(0, 1) == 0 ? "left" : "right";
                spec.amplitude = rng.uniform(0.65, 0.80);
                spec.frequency = rng.uniform(0.16, 0.22);
            } else if (name == "walk") {
                spec.laterality = "none";
                spec.amplitude = rng.uniform(0.26, 0.36);  // peak meters/frame
            } else if (name == "turn") {
                spec.laterality = "none";
                spec.amplitude = rng.uniform(0.24, 0.33);  // peak radians/frame
            } else if (name == "bow") {
                spec.laterality = "none";
                spec.amplitude = rng.uniform(1.4, 1.7);  // peak pitch, radians
                spec.frequency = std::max(2.0, std::round(duration / 8.0));  // bows in the window
            } else if (name == "squat" || name == "jump") {
                spec.laterality = "none";
                spec.amplitude = rng.uniform(0.55, 0.65);
                spec.frequency = std::max(2.0, std::round(duration / 6.0));  // dips/hops
            }
            spec.acting_parts = synth_detail::acting_parts_for(name, spec.laterality);

            if (ai > 0) caption.push_back("then");
            auto phrase = synth_detail::action_phrase(name, spec.laterality, rng.uniform_int(0, 2));
            caption.insert(caption.end(), phrase.tokens.begin(), phrase.tokens.end());
            sample.actions.push_back(std::move(spec));
        }

        sample.caption = std::move(caption);
        sample.motion = realize_motion(frames, sample.actions, cfg.noise_sigma, cfg.frame_rate, rng);
        corpus.samples.push_back(std::move(sample));
    }

    // splits: 80/10/10, train rounded down
    const int n_train = (cfg.n * 8) / 10;
    const int n_val = cfg.n / 10;
    for (int i = 0; i < cfg.n; ++i) {
        corpus.samples[i].split = i < n_train ? "train" : (i < n_train + n_val ? "val" : "test");
    }
    return corpus;
}

// Gold interpretability record for one sample.
struct GoldWord {
    std::string word;
    std::string word_stem;
    std::vector<BodyPart> parts;
    double center = 0.0;
    int onset = 0;
    int offset = 0;
};

struct GoldAnnotation {
    std::string id;
    std::vector<GoldWord> words;               // one per action, caption order
    std::vector<double> token_motion_flags;    // per caption token + EOS
};

inline GoldAnnotation annotate(const SyntheticSample& sample, const GuidanceDictionary& dict,
                               const Lexicon& lex) {
    GoldAnnotation gold;
    gold.id = sample.id;
    for (const auto& a : sample.actions) {
        GoldWord w;
        w.word = a.word;
        w.word_stem = stem(a.word);
        w.parts = a.acting_parts;
        w.center = a.center();
        w.onset = a.onset;
        w.offset = a.offset;
        gold.words.push_back(std::move(w));
    }
    gold.token_motion_flags = build_beta_targets(sample.caption, dict, lex);
    return gold;
}

// Mean squared frame-to-frame displacement of one part inside a window,
// computed on root-relative coordinates so a moving root does not leak into
// the limbs.
inline double part_energy(const MotionSequence& global_seq, BodyPart part, int onset, int offset) {
    auto rel = to_root_relative(global_seq);
    const auto joints = global_seq.layout.joints_of(part);
    double sum = 0.0;
    int count = 0;
    for (int k = std::max(1, onset); k <= offset; ++k) {
        for (int j : joints) {
            for (int d = 0; d < 3; ++d) {
                const double diff = rel.pos(k, j, d) - rel.pos(k - 1, j, d);
                sum += diff * diff;
                ++count;
            }
        }
    }
    return count == 0 ? 0.0 : sum / count;
}

// ---------------------------------------------------------------------------
// corpus on disk: <dir>/motions/<id>.json + <dir>/annotations.json
// ---------------------------------------------------------------------------

inline void save_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "motions");

    nlohmann::ordered_json root;
    root["seed"] = corpus.seed;
    root["noise_sigma"] = corpus.noise_sigma;
    nlohmann::ordered_json samples = nlohmann::ordered_json::array();
    for (const auto& s : corpus.samples) {
        save_motion(s.motion, (fs::path(dir) / "motions" / (s.id + ".json")).string());
        nlohmann::ordered_json actions = nlohmann::ordered_json::array();
        for (const auto& a : s.actions) {
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (BodyPart p : a.acting_parts) parts.push_back(part_names()[static_cast<int>(p)]);
            actions.push_back({{"name", a.name},
                               {"word", a.word},
                               {"laterality", a.laterality},
                               {"onset", a.onset},
                               {"offset", a.offset},
                               {"amplitude", a.amplitude},
                               {"frequency", a.frequency},
                               {"parts", parts},
                               {"center", a.center()}});
        }
        samples.push_back({{"id", s.id},
                           {"split", s.split},
                           {"caption", s.caption},
                           {"frames", s.motion.num_frames()},
                           {"actions", actions}});
    }
    root["samples"] = std::move(samples);
    std::ofstream out(fs::path(dir) / "annotations.json");
    if (!out) throw std::runtime_error("cannot write annotations in " + dir);
    out << root.dump(1) << "\n";
}

inline SyntheticCorpus load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream in(fs::path(dir) / "annotations.json");
    if (!in) throw std::runtime_error("cannot read annotations in " + dir);
    nlohmann::json root;
    in >> root;

    SyntheticCorpus corpus;
    corpus.seed = root.at("seed").get<uint64_t>();
    corpus.noise_sigma = root.at("noise_sigma").get<double>();
    for (const auto& sj : root.at("samples")) {
        SyntheticSample s;
        s.id = sj.at("id").get<std::string>();
        s.split = sj.at("split").get<std::string>();
        s.caption = sj.at("caption").get<std::vector<std::string>>();
        for (const auto& aj : sj.at("actions")) {
            ActionSpec a;
            a.name = aj.at("name").get<std::string>();
            a.word = aj.at("word").get<std::string>();
            a.laterality = aj.at("laterality").get<std::string>();
            a.onset = aj.at("onset").get<int>();
            a.offset = aj.at("offset").get<int>();
            a.amplitude = aj.at("amplitude").get<double>();
            a.frequency = aj.at("frequency").get<double>();
            for (const auto& pj : aj.at("parts")) a.acting_parts.push_back(part_from_name(pj.get<std::string>()));
            s.actions.push_back(std::move(a));
        }
        s.motion = load_motion((fs::path(dir) / "motions" / (s.id + ".json")).string());
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

}  // namespace motcap
