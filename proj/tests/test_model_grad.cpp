#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "motcap/rng.hpp"
#include "motcap/trainer.hpp"

using namespace motcap;

namespace {

// Toy setup used by the full-model gradient checks: T_x = 4, a 3-token
// caption, K_y = 6, all hidden sizes 8.
struct ToyModel {
    ModelConfig cfg;
    Vocabulary vocab;
    CaptionModel model;
    CaptionSample sample;

    ToyModel()
        : cfg(make_config()),
          vocab(Vocabulary::from_words({"kicks", "slowly"})),
          model(cfg, default_layout(), vocab, 1234),
          sample(make_sample(vocab)) {}

    static ModelConfig make_config() {
        ModelConfig cfg;
        cfg.enc = {8, 4};  // h_enc = 8
        cfg.h_dec = 8;
        cfg.d_emb = 8;
        return cfg;
    }

    static CaptionSample make_sample(const Vocabulary& vocab) {
        SyntheticSample s;
        s.id = "toy";
        Rng rng(99);
        MotionSequence seq;
        seq.layout = default_layout();
        seq.frame_rate = 20.0;
        seq.positions = Tensor(4, seq.layout.num_joints() * 3);
        for (int i = 0; i < seq.positions.numel(); ++i) seq.positions[i] = rng.uniform(-1, 1);
        s.motion = seq;
        s.caption = {"kicks", "slowly", "kicks"};
        return make_caption_sample(s, vocab, GuidanceDictionary::builtin_default(),
                                   Lexicon::builtin_default());
    }
};

}  // namespace

TEST_CASE("full global loss gradients match finite differences for every group") {
    ToyModel toy;
    REQUIRE(toy.vocab.size() == 6);
    REQUIRE(toy.sample.targets.n_supervised == 2);  // both "kicks" occurrences

    const LossWeights weights{2.0, 3.0};
    const auto start = std::chrono::steady_clock::now();
    auto report = grad_check(
        [&]() { return sample_loss(toy.model, toy.sample, weights).total; },
        toy.model.params(), 1e-5, 1e-4);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    INFO("worst group " << report.worst_param << " rel err " << report.worst_rel_err << ", "
                        << report.entries.size() << " groups in " << seconds << " s");
    CHECK(report.pass);
    CHECK(seconds < 30.0);
    for (const auto& e : report.entries) {
        INFO(e.name << " max rel err " << e.max_rel_err);
        CHECK(e.pass);
    }
}

TEST_CASE("pure language loss gradients also pass at 1e-4") {
    ToyModel toy;
    auto report = grad_check(
        [&]() {
            auto pre = toy.model.encode(toy.sample.parts);
            auto tf = toy.model.teacher_forced(pre, toy.sample.caption_ids);
            std::vector<Var> probs;
            for (const auto& s : tf.steps) probs.push_back(s.probs);
            return language_loss(probs, tf.targets);
        },
        toy.model.params(), 1e-5, 1e-4);
    INFO("worst group " << report.worst_param << " rel err " << report.worst_rel_err);
    CHECK(report.pass);
}
