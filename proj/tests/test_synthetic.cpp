#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include "motcap/synthetic.hpp"
#include "motcap/vocab.hpp"

using namespace motcap;

TEST_CASE("fixed seed regenerates a bit-identical corpus") {
    SynthConfig cfg;
    cfg.n = 20;
    cfg.seed = 7;
    auto a = generate_corpus(cfg);
    auto b = generate_corpus(cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].caption == b.samples[i].caption);
        CHECK(a.samples[i].motion.positions.values() == b.samples[i].motion.positions.values());
    }
    cfg.seed = 8;
    auto c = generate_corpus(cfg);
    CHECK(a.samples[0].motion.positions.values() != c.samples[0].motion.positions.values());
}

TEST_CASE("split sizes follow 80/10/10 with train rounded down") {
    SynthConfig cfg;
    cfg.n = 500;
    cfg.seed = 3;
    auto corpus = generate_corpus(cfg);
    CHECK(corpus.split("train").size() == 400);
    CHECK(corpus.split("val").size() == 50);
    CHECK(corpus.split("test").size() == 50);

    cfg.n = 505;
    auto odd = generate_corpus(cfg);
    CHECK(odd.split("train").size() == 404);
    CHECK(odd.split("val").size() == 50);
    CHECK(odd.split("test").size() == 51);
}

TEST_CASE("kick samples put at least 10x more energy in legs than arms") {
    SynthConfig cfg;
    cfg.n = 60;
    cfg.seed = 11;
    auto corpus = generate_corpus(cfg);
    int checked = 0;
    for (const auto& s : corpus.samples) {
        for (const auto& a : s.actions) {
            if (a.name != "kick") continue;
            const BodyPart leg = a.laterality == "left" ? BodyPart::LeftLeg : BodyPart::RightLeg;
            const double leg_e = part_energy(s.motion, leg, a.onset, a.offset);
            const double arm_e = std::max(part_energy(s.motion, BodyPart::LeftArm, a.onset, a.offset),
                                          part_energy(s.motion, BodyPart::RightArm, a.onset, a.offset));
            CHECK(leg_e >= 10.0 * arm_e);
            ++checked;
        }
    }
    REQUIRE(checked > 0);
}

TEST_CASE("acting parts dominate non-acting parts inside every action window") {
    SynthConfig cfg;
    cfg.n = 100;
    cfg.seed = 13;
    auto corpus = generate_corpus(cfg);
    double min_ratio = 1e300;
    for (const auto& s : corpus.samples) {
        for (const auto& a : s.actions) {
            std::set<int> acting;
            for (BodyPart p : a.acting_parts) acting.insert(static_cast<int>(p));
            double min_acting = 1e300, max_idle = 0.0;
            for (int p = 0; p < kNumParts; ++p) {
                const double e = part_energy(s.motion, static_cast<BodyPart>(p), a.onset, a.offset);
                if (acting.count(p)) {
                    min_acting = std::min(min_acting, e);
                } else {
                    max_idle = std::max(max_idle, e);
                }
            }
            min_ratio = std::min(min_ratio, min_acting / max_idle);
        }
    }
    INFO("worst acting/idle energy ratio " << min_ratio);
    CHECK(min_ratio >= 10.0);
}

TEST_CASE("every caption contains its action words exactly once and parses without UNK") {
    SynthConfig cfg;
    cfg.n = 200;
    cfg.seed = 17;
    auto corpus = generate_corpus(cfg);

    std::vector<std::vector<std::string>> captions;
    for (const auto& s : corpus.samples) captions.push_back(s.caption);
    auto vocab = Vocabulary::build(captions);

    for (const auto& s : corpus.samples) {
        for (const auto& a : s.actions) {
            CHECK(std::count(s.caption.begin(), s.caption.end(), a.word) == 1);
        }
        for (int id : vocab.encode(s.caption)) CHECK(id != Vocabulary::unk_id);
    }
}

TEST_CASE("two-action samples separate their windows by at least 5 frames") {
    SynthConfig cfg;
    cfg.n = 120;
    cfg.seed = 19;
    auto corpus = generate_corpus(cfg);
    int two_action = 0;
    for (const auto& s : corpus.samples) {
        if (s.actions.size() < 2) continue;
        ++two_action;
        CHECK(s.actions[1].onset - s.actions[0].offset >= 5);
        CHECK(s.actions[0].onset >= 0);
        CHECK(s.actions[1].offset < s.motion.num_frames());
    }
    CHECK(two_action > 20);  // the mix actually contains two-action samples
}

TEST_CASE("annotation carries lateral parts, centers, and motion flags") {
    SynthConfig cfg;
    cfg.n = 50;
    cfg.seed = 23;
    auto corpus = generate_corpus(cfg);
    auto dict = GuidanceDictionary::builtin_default();
    auto lex = Lexicon::builtin_default();

    for (const auto& s : corpus.samples) {
        auto gold = annotate(s, dict, lex);
        REQUIRE(gold.words.size() == s.actions.size());
        REQUIRE(gold.token_motion_flags.size() == s.caption.size() + 1);
        for (size_t i = 0; i < s.actions.size(); ++i) {
            CHECK(gold.words[i].center == Catch::Approx(0.5 * (s.actions[i].onset + s.actions[i].offset)));
            CHECK(gold.words[i].parts == s.actions[i].acting_parts);
        }
        // connection/subject tokens stay non-motion
        for (size_t t = 0; t < s.caption.size(); ++t) {
            if (s.caption[t] == "a" || s.caption[t] == "person" || s.caption[t] == "the" ||
                s.caption[t] == "with" || s.caption[t] == "then") {
                CHECK(gold.token_motion_flags[t] == 0.0);
            }
        }
    }
}

TEST_CASE("gold parts sit inside the dictionary category for every action word") {
    SynthConfig cfg;
    cfg.n = 100;
    cfg.seed = 29;
    auto corpus = generate_corpus(cfg);
    auto dict = GuidanceDictionary::builtin_default();

    for (const auto& s : corpus.samples) {
        for (const auto& a : s.actions) {
            auto target = dict.spatial_target(a.word);
            REQUIRE(target.has_value());
            for (BodyPart p : a.acting_parts) {
                CHECK((*target)[static_cast<int>(p)] == 1.0);
            }
        }
    }
}

TEST_CASE("window outside the frame range is rejected") {
    Rng rng(1);
    ActionSpec bad;
    bad.name = "kick";
    bad.word = "kicks";
    bad.laterality = "left";
    bad.onset = 30;
    bad.offset = 45;
    bad.amplitude = 0.4;
    bad.frequency = 0.15;
    bad.acting_parts = {BodyPart::LeftLeg};
    CHECK_THROWS_AS(realize_motion(40, {bad}, 0.01, 20.0, rng), std::invalid_argument);
}

TEST_CASE("corpus save/load round trip") {
    namespace fs = std::filesystem;
    SynthConfig cfg;
    cfg.n = 12;
    cfg.seed = 31;
    auto corpus = generate_corpus(cfg);
    const std::string dir = "test_corpus_roundtrip";
    save_corpus(corpus, dir);
    auto loaded = load_corpus(dir);
    fs::remove_all(dir);

    REQUIRE(loaded.samples.size() == corpus.samples.size());
    for (size_t i = 0; i < corpus.samples.size(); ++i) {
        CHECK(loaded.samples[i].id == corpus.samples[i].id);
        CHECK(loaded.samples[i].split == corpus.samples[i].split);
        CHECK(loaded.samples[i].caption == corpus.samples[i].caption);
        REQUIRE(loaded.samples[i].actions.size() == corpus.samples[i].actions.size());
        CHECK(loaded.samples[i].actions[0].onset == corpus.samples[i].actions[0].onset);
        CHECK(loaded.samples[i].motion.positions.values() ==
              corpus.samples[i].motion.positions.values());
    }
}
