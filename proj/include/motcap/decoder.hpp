#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "motcap/attention.hpp"
#include "motcap/autodiff.hpp"
#include "motcap/encoder.hpp"
#include "motcap/vocab.hpp"

namespace motcap {

// Single LSTM cell with fused gate weights, gate order i, f, g, o.
struct LstmParams {
    Var w_x, w_h, b;
    int hidden = 0;

    static LstmParams init(Tape& tape, ParamList& reg, const std::string& prefix, int input,
                           int hidden, Rng& rng) {
        LstmParams p;
        p.hidden = hidden;
        p.w_x = make_param(tape, reg, prefix + ".w_x", uniform_init(rng, 4 * hidden, input, input));
        p.w_h = make_param(tape, reg, prefix + ".w_h", uniform_init(rng, 4 * hidden, hidden, hidden));
        p.b = make_param(tape, reg, prefix + ".b", Tensor(4 * hidden, 1, 0.0));
        return p;
    }

    struct State {
        Var h, cell;
    };

    State zero_state(Tape& tape) const {
        return {constant(tape, Tensor(hidden, 1, 0.0)), constant(tape, Tensor(hidden, 1, 0.0))};
    }

    State step(const Var& x, const State& prev) const {
        auto gates = add(add(matmul(w_x, x), matmul(w_h, prev.h)), b);
        auto i = sigmoid(slice_rows(gates, 0, hidden));
        auto f = sigmoid(slice_rows(gates, hidden, 2 * hidden));
        auto g = motcap::tanh(slice_rows(gates, 2 * hidden, 3 * hidden));
        auto o = sigmoid(slice_rows(gates, 3 * hidden, 4 * hidden));
        State next;
        next.cell = add(mul(i, g), mul(f, prev.cell));
        next.h = mul(o, motcap::tanh(next.cell));
        return next;
    }
};

struct DecoderParams {
    Var embedding;  // d_emb x K_y, one column per word
    LstmParams bottom;
    LstmParams top;
    // Deep output layer: a tanh bottleneck over [c_bar; prev emb; h_t]
    // followed by a linear projection to vocabulary logits.
    Var w_head, b_head;  // h_dec x (d_common + d_emb + h_dec)
    Var w_out, b_out;    // K_y x h_dec
    int vocab_size = 0;
    int d_emb = 0;

    static DecoderParams init(Tape& tape, ParamList& reg, int vocab_size, int d_emb, int h_dec,
                              int d_common, Rng& rng) {
        DecoderParams p;
        p.vocab_size = vocab_size;
        p.d_emb = d_emb;
        p.embedding = make_param(tape, reg, "dec.embedding",
                                 uniform_init(rng, d_emb, vocab_size, d_emb));
        p.bottom = LstmParams::init(tape, reg, "dec.bottom", d_emb, h_dec, rng);
        p.top = LstmParams::init(tape, reg, "dec.top", d_common + d_emb, h_dec, rng);
        const int head_in = d_common + d_emb + h_dec;
        p.w_head = make_param(tape, reg, "dec.head.w", uniform_init(rng, h_dec, head_in, head_in));
        p.b_head = make_param(tape, reg, "dec.head.b", Tensor(h_dec, 1, 0.0));
        p.w_out = make_param(tape, reg, "dec.out.w", uniform_init(rng, vocab_size, h_dec, h_dec));
        p.b_out = make_param(tape, reg, "dec.out.b", Tensor(vocab_size, 1, 0.0));
        return p;
    }

    Var embed(int token) const {
        if (token < 0 || token >= vocab_size) {
            throw std::invalid_argument("decoder: token id " + std::to_string(token) +
                                        " outside vocabulary of size " + std::to_string(vocab_size));
        }
        return select_column(embedding, token);
    }
};

struct DecodeState {
    LstmParams::State bottom;
    LstmParams::State top;
    int prev_token = Vocabulary::bos_id;
    int step = 0;
};

// Differentiable handles for one decoding step, used to assemble losses.
struct StepVars {
    Var probs;    // K_y x 1
    Var gamma;    // T_x x 1
    Var window;   // T_x x 1
    Var alpha;    // parts x T_x
    Var beta;     // 1x1
    Var mean, sigma;
    Var h_bottom;
};

struct StepResult {
    StepVars vars;
    DecodeState next;
};

inline AttentionState snapshot_attention(const StepVars& s) {
    AttentionState a;
    a.gamma = s.gamma->value.values();
    a.window = s.window->value.values();
    a.alpha = s.alpha->value.values();
    a.mean = s.mean->value.item();
    a.sigma = s.sigma->value.item();
    a.beta = s.beta->value.item();
    a.frames = s.gamma->value.rows();
    a.parts = s.alpha->value.rows();
    return a;
}

// One decoder step: Bottom LSTM -> spatio-temporal attention with the
// Gaussian window -> Top LSTM -> adaptive blend -> bounded output head.
inline StepResult decoder_step(const DecoderParams& dec, const AttentionParams& att,
                               const AttentionPrecomp& pre, const DecodeState& state) {
    StepResult out;
    auto emb = dec.embed(state.prev_token);
    out.next.bottom = dec.bottom.step(emb, state.bottom);
    const Var& h_t = out.next.bottom.h;

    out.vars.gamma = temporal_attention(att, pre, h_t);
    auto refit = gaussian_refit(att, out.vars.gamma);
    out.vars.window = refit.window;
    out.vars.mean = refit.mean;
    out.vars.sigma = refit.sigma;
    out.vars.alpha = spatial_attention(att, pre, h_t);
    auto context = context_vector(refit.window, out.vars.alpha, pre);

    auto e_t = motion_embedding(att, context);
    out.next.top = dec.top.step(concat(e_t, emb, 0), state.top);
    auto r_t = language_embedding(att, out.next.top.h);
    out.vars.beta = adaptive_gate(att, h_t, emb);
    auto c_bar = adaptive_blend(e_t, r_t, out.vars.beta);

    auto head_in = concat({c_bar, emb, h_t}, 0);
    auto hidden = motcap::tanh(add(matmul(dec.w_head, head_in), dec.b_head));
    auto logits = add(matmul(dec.w_out, hidden), dec.b_out);
    out.vars.probs = softmax(logits, 0);
    out.vars.h_bottom = h_t;
    out.next.prev_token = state.prev_token;  // caller overwrites with the emitted token
    out.next.step = state.step + 1;
    return out;
}

struct DecodedCaption {
    std::vector<int> tokens;           // emitted ids, EOS included when reached
    std::vector<double> step_logprobs; // log p of each emitted token
    double score = 0.0;                // sum(log p) / length
    std::vector<AttentionState> attention;
};

namespace detail {

// Argmax over emittable tokens; PAD and BOS are never valid outputs. Ties
// break to the lowest index.
inline int argmax_emittable(const Tensor& t) {
    int best = -1;
    for (int i = 0; i < t.numel(); ++i) {
        if (i == Vocabulary::pad_id || i == Vocabulary::bos_id) continue;
        if (best < 0 || t[i] > t[best]) best = i;
    }
    return best;
}

}  // namespace detail

inline DecodedCaption greedy_decode(const DecoderParams& dec, const AttentionParams& att,
                                    const AttentionPrecomp& pre, Tape& tape, int max_len = 30) {
    if (max_len < 1) throw std::invalid_argument("greedy_decode: max_len must be >= 1");
    DecodedCaption out;
    DecodeState state;
    state.bottom = dec.bottom.zero_state(tape);
    state.top = dec.top.zero_state(tape);
    for (int t = 0; t < max_len; ++t) {
        auto step = decoder_step(dec, att, pre, state);
        const int token = detail::argmax_emittable(step.vars.probs->value);
        out.tokens.push_back(token);
        out.step_logprobs.push_back(std::log(std::max(step.vars.probs->value[token], 1e-300)));
        out.attention.push_back(snapshot_attention(step.vars));
        state = step.next;
        state.prev_token = token;
        if (token == Vocabulary::eos_id) break;
    }
    double sum = 0.0;
    for (double lp : out.step_logprobs) sum += lp;
    out.score = sum / static_cast<double>(out.tokens.size());
    return out;
}

// Beam search with length-normalized ranking (sum of log p divided by
// length). The greedy rollout joins the final candidate pool, so the result
// never ranks below greedy under the same normalization.
inline DecodedCaption beam_decode(const DecoderParams& dec, const AttentionParams& att,
                                  const AttentionPrecomp& pre, Tape& tape, int beam_width,
                                  int max_len = 30) {
    if (beam_width < 1) throw std::invalid_argument("beam_decode: beam_width must be >= 1");

    struct Hyp {
        std::vector<int> tokens;
        std::vector<double> logprobs;
        double logprob_sum = 0.0;
        DecodeState state;
        std::vector<AttentionState> attention;
    };

    auto normalized = [](const Hyp& h) { return h.logprob_sum / static_cast<double>(h.tokens.size()); };

    Hyp root;
    root.state.bottom = dec.bottom.zero_state(tape);
    root.state.top = dec.top.zero_state(tape);
    std::vector<Hyp> live = {root};
    std::vector<Hyp> finished;

    for (int t = 0; t < max_len && !live.empty(); ++t) {
        std::vector<Hyp> candidates;
        for (const auto& hyp : live) {
            auto step = decoder_step(dec, att, pre, hyp.state);
            const Tensor& probs = step.vars.probs->value;
            const auto attn = snapshot_attention(step.vars);
            for (int w = 0; w < probs.numel(); ++w) {
                if (w == Vocabulary::pad_id || w == Vocabulary::bos_id) continue;
                Hyp next = hyp;
                next.tokens.push_back(w);
                const double lp = std::log(std::max(probs[w], 1e-300));
                next.logprobs.push_back(lp);
                next.logprob_sum += lp;
                next.state = step.next;
                next.state.prev_token = w;
                next.attention.push_back(attn);
                candidates.push_back(std::move(next));
            }
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Hyp& a, const Hyp& b) { return a.logprob_sum > b.logprob_sum; });
        live.clear();
        int taken = 0;
        for (auto& c : candidates) {
            if (taken >= beam_width) break;
            ++taken;
            if (c.tokens.back() == Vocabulary::eos_id || static_cast<int>(c.tokens.size()) >= max_len) {
                finished.push_back(std::move(c));
            } else {
                live.push_back(std::move(c));
            }
        }
    }
    for (auto& h : live) finished.push_back(std::move(h));

    auto greedy = greedy_decode(dec, att, pre, tape, max_len);
    Hyp greedy_hyp;
    greedy_hyp.tokens = greedy.tokens;
    greedy_hyp.logprobs = greedy.step_logprobs;
    for (double lp : greedy.step_logprobs) greedy_hyp.logprob_sum += lp;
    greedy_hyp.attention = greedy.attention;
    finished.push_back(std::move(greedy_hyp));

    const Hyp* best = &finished.front();
    for (const auto& h : finished)
        if (normalized(h) > normalized(*best)) best = &h;

    DecodedCaption out;
    out.tokens = best->tokens;
    out.step_logprobs = best->logprobs;
    out.score = normalized(*best);
    out.attention = best->attention;
    return out;
}

}  // namespace motcap
