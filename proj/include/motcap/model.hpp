#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "motcap/decoder.hpp"

namespace motcap {

struct ModelConfig {
    EncoderConfig enc;
    int h_dec = 64;
    int d_emb = 32;
    AttentionConfig att;
    int max_len = 30;
};

inline nlohmann::ordered_json model_config_to_json(const ModelConfig& c) {
    return {{"h1", c.enc.h1},         {"h2", c.enc.h2},          {"h_dec", c.h_dec},
            {"d_emb", c.d_emb},       {"d_att", c.att.d_att},    {"d_common", c.att.d_common},
            {"sigma_min", c.att.sigma_min}, {"max_len", c.max_len}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.enc.h1 = j.at("h1").get<int>();
    c.enc.h2 = j.at("h2").get<int>();
    c.h_dec = j.at("h_dec").get<int>();
    c.d_emb = j.at("d_emb").get<int>();
    c.att.d_att = j.at("d_att").get<int>();
    c.att.d_common = j.at("d_common").get<int>();
    c.att.sigma_min = j.at("sigma_min").get<double>();
    c.max_len = j.at("max_len").get<int>();
    return c;
}

// The full captioning model: part-based encoder, spatio-temporal attention
// with adaptive gate, two-LSTM decoder. Owns its tape; parameters live as
// leaves, so Tape::clear() between samples drops only the transient graph.
class CaptionModel {
public:
    CaptionModel(ModelConfig cfg, SkeletonLayout layout, Vocabulary vocab, uint64_t seed)
        : cfg_(cfg), layout_(std::move(layout)), vocab_(std::move(vocab)),
          tape_(std::make_unique<Tape>()) {
        Rng rng(seed);
        encoder_ = Encoder::init(*tape_, params_, layout_, cfg_.enc, rng);
        attention_ = AttentionParams::init(*tape_, params_, cfg_.enc.h_enc(), cfg_.h_dec, cfg_.d_emb,
                                           cfg_.att, rng);
        decoder_ = DecoderParams::init(*tape_, params_, vocab_.size(), cfg_.d_emb, cfg_.h_dec,
                                       attention_.cfg.d_common, rng);
    }

    const ModelConfig& config() const { return cfg_; }
    const SkeletonLayout& layout() const { return layout_; }
    const Vocabulary& vocab() const { return vocab_; }
    Tape& tape() { return *tape_; }
    ParamList& params() { return params_; }
    const ParamList& params() const { return params_; }
    const Encoder& encoder() const { return encoder_; }
    const AttentionParams& attention() const { return attention_; }
    const DecoderParams& decoder() const { return decoder_; }

    void zero_grad() {
        for (auto& [name, p] : params_) p->grad.fill(0.0);
    }

    AttentionPrecomp encode(const PartArrays& parts) const {
        const int frames = parts.positions[0].rows();
        auto p_mat = encoder_.encode(*tape_, parts);
        return attention_precompute(attention_, p_mat, frames);
    }

    AttentionPrecomp encode(const MotionSequence& seq) const {
        return encode(gather_parts(seq));
    }

    DecodeState initial_state() const {
        DecodeState s;
        s.bottom = decoder_.bottom.zero_state(*tape_);
        s.top = decoder_.top.zero_state(*tape_);
        return s;
    }

    StepResult step(int prev_token, const DecodeState& state, const AttentionPrecomp& pre) const {
        DecodeState in = state;
        in.prev_token = prev_token;
        return decoder_step(decoder_, attention_, pre, in);
    }

    struct TeacherForced {
        std::vector<StepVars> steps;   // one per prediction
        std::vector<int> targets;      // caption ids then EOS
    };

    // Teacher forcing: inputs are BOS then the gold words; predictions are the
    // gold words then EOS.
    TeacherForced teacher_forced(const AttentionPrecomp& pre, const std::vector<int>& caption_ids) const {
        TeacherForced out;
        out.targets = caption_ids;
        out.targets.push_back(Vocabulary::eos_id);
        DecodeState state = initial_state();
        int prev = Vocabulary::bos_id;
        for (int target : out.targets) {
            auto step = decoder_step(decoder_, attention_, pre, with_prev(state, prev));
            out.steps.push_back(step.vars);
            state = step.next;
            prev = target;
        }
        return out;
    }

    DecodedCaption greedy(const AttentionPrecomp& pre) const {
        return greedy_decode(decoder_, attention_, pre, *tape_, cfg_.max_len);
    }

    DecodedCaption beam(const AttentionPrecomp& pre, int width) const {
        return beam_decode(decoder_, attention_, pre, *tape_, width, cfg_.max_len);
    }

    // Teacher-forced log-probability of an exact token sequence (which must
    // end with EOS or be a prefix stopped at max_len).
    double sequence_logprob(const AttentionPrecomp& pre, const std::vector<int>& tokens) const {
        double sum = 0.0;
        DecodeState state = initial_state();
        int prev = Vocabulary::bos_id;
        for (int token : tokens) {
            auto step = decoder_step(decoder_, attention_, pre, with_prev(state, prev));
            sum += std::log(std::max(step.vars.probs->value[token], 1e-300));
            state = step.next;
            prev = token;
        }
        return sum;
    }

private:
    static DecodeState with_prev(const DecodeState& s, int prev) {
        DecodeState out = s;
        out.prev_token = prev;
        return out;
    }

    ModelConfig cfg_;
    SkeletonLayout layout_;
    Vocabulary vocab_;
    std::unique_ptr<Tape> tape_;
    ParamList params_;
    Encoder encoder_;
    AttentionParams attention_;
    DecoderParams decoder_;
};

}  // namespace motcap
