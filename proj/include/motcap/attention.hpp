#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "motcap/autodiff.hpp"
#include "motcap/encoder.hpp"

namespace motcap {

struct AttentionConfig {
    int d_att = 0;     // attention hidden size; 0 means "use h_dec"
    int d_common = 0;  // shared embedding space for motion/language context; 0 means "use h_dec"
    double sigma_min = 0.5;
};

struct AttentionParams {
    AttentionConfig cfg;
    int num_parts = kNumParts;
    // temporal scores
    Var w_p, w_h, v_h;
    // spatial scores
    Var w_ps, w_hs, v_s;
    // adaptive gate
    Var w_gate_h, w_gate_e;
    // common-space embeddings of motion context and language state
    Var w_ctx, b_ctx, w_lang, b_lang;

    static AttentionParams init(Tape& tape, ParamList& reg, int h_enc, int h_dec, int d_emb,
                                AttentionConfig cfg, Rng& rng) {
        if (cfg.d_att <= 0) cfg.d_att = h_dec;
        if (cfg.d_common <= 0) cfg.d_common = h_dec;
        if (cfg.sigma_min <= 0.0) throw std::invalid_argument("attention: sigma_min must be > 0");
        AttentionParams p;
        p.cfg = cfg;
        const int d = cfg.d_att;
        p.w_p = make_param(tape, reg, "att.temporal.w_p", uniform_init(rng, d, h_enc, h_enc));
        p.w_h = make_param(tape, reg, "att.temporal.w_h", uniform_init(rng, d, h_dec, h_dec));
        p.v_h = make_param(tape, reg, "att.temporal.v", uniform_init(rng, d, 1, d));
        p.w_ps = make_param(tape, reg, "att.spatial.w_p", uniform_init(rng, d, h_enc, h_enc));
        p.w_hs = make_param(tape, reg, "att.spatial.w_h", uniform_init(rng, d, h_dec, h_dec));
        p.v_s = make_param(tape, reg, "att.spatial.v", uniform_init(rng, d, 1, d));
        p.w_gate_h = make_param(tape, reg, "att.gate.w_h", uniform_init(rng, 1, h_dec, h_dec));
        p.w_gate_e = make_param(tape, reg, "att.gate.w_e", uniform_init(rng, 1, d_emb, d_emb));
        p.w_ctx = make_param(tape, reg, "att.ctx.w", uniform_init(rng, cfg.d_common, h_enc, h_enc));
        p.b_ctx = make_param(tape, reg, "att.ctx.b", Tensor(cfg.d_common, 1, 0.0));
        p.w_lang = make_param(tape, reg, "att.lang.w", uniform_init(rng, cfg.d_common, h_dec, h_dec));
        p.b_lang = make_param(tape, reg, "att.lang.b", Tensor(cfg.d_common, 1, 0.0));
        return p;
    }
};

// Per-sample projections of the part embeddings; they do not depend on the
// decoding step, so they are computed once and the per-step cost stays small.
struct AttentionPrecomp {
    Var p_mat;         // h_enc x (a*T_x), part-major columns
    Var pre_temporal;  // d x (a*T_x)
    Var pre_spatial;   // d x (a*T_x)
    int frames = 0;
    int parts = 0;
};

inline AttentionPrecomp attention_precompute(const AttentionParams& params, const Var& p_mat,
                                             int frames) {
    AttentionPrecomp pre;
    pre.p_mat = p_mat;
    pre.frames = frames;
    pre.parts = params.num_parts;
    if (p_mat->value.cols() != frames * params.num_parts) {
        throw std::invalid_argument("attention: P* has " + std::to_string(p_mat->value.cols()) +
                                    " columns, expected parts*frames = " +
                                    std::to_string(frames * params.num_parts));
    }
    pre.pre_temporal = matmul(params.w_p, p_mat);
    pre.pre_spatial = matmul(params.w_ps, p_mat);
    return pre;
}

// Per-frame temporal weights: scores over (part, frame) are mean-pooled over
// the part axis, then softmaxed over frames. Returns gamma as T_x x 1.
inline Var temporal_attention(const AttentionParams& params, const AttentionPrecomp& pre,
                              const Var& h_t) {
    auto scores = fused_scores(pre.pre_temporal, matmul(params.w_h, h_t), params.v_h);
    auto grid = reshape(scores, pre.parts, pre.frames);              // parts x T
    auto pooled = transpose(reduce_mean(grid, 0));                   // T x 1
    return softmax(pooled, 0);
}

// Per-frame part weights: one score per (part, frame), softmax over the part
// axis independently per frame. Returns alpha as parts x T_x.
inline Var spatial_attention(const AttentionParams& params, const AttentionPrecomp& pre,
                             const Var& h_t) {
    auto scores = fused_scores(pre.pre_spatial, matmul(params.w_hs, h_t), params.v_s);
    return softmax(reshape(scores, pre.parts, pre.frames), 0);
}

struct GaussianRefit {
    Var mean;    // 1x1
    Var sigma;   // 1x1, floored at sigma_min
    Var window;  // T_x x 1, exp(-(k-m)^2 / (2 sigma^2)), unnormalized
};

// First/second moments of gamma over raw frame indices 0..T_x-1, then the
// Gaussian window that replaces gamma in the context computation. All three
// outputs stay differentiable through gamma.
inline GaussianRefit gaussian_refit(const AttentionParams& params, const Var& gamma) {
    double sum = 0.0;
    for (int i = 0; i < gamma->value.numel(); ++i) sum += gamma->value[i];
    if (std::abs(sum - 1.0) > 1e-6) {
        throw std::runtime_error("gaussian_refit: gamma is not normalized (sum=" +
                                 std::to_string(sum) + ")");
    }
    Tape& tape = *gamma->tape;
    const int frames = gamma->value.rows();
    Tensor k(frames, 1);
    for (int i = 0; i < frames; ++i) k[i] = static_cast<double>(i);
    auto kvec = constant(tape, std::move(k));

    GaussianRefit g;
    g.mean = reduce_sum(mul(gamma, kvec));
    auto dev = sub(kvec, g.mean);
    auto dev2 = mul(dev, dev);
    auto variance = reduce_sum(mul(gamma, dev2));
    g.sigma = clamp_min(motcap::sqrt(variance), params.cfg.sigma_min);
    auto denom = mul_scalar(mul(g.sigma, g.sigma), 2.0);
    g.window = motcap::exp(neg(div(dev2, denom)));
    return g;
}

// beta_hat = sigmoid(W_b^h h_t + W_e emb(prev word)), scalar gate in (0,1).
inline Var adaptive_gate(const AttentionParams& params, const Var& h_t, const Var& prev_embedding) {
    return sigmoid(add(matmul(params.w_gate_h, h_t), matmul(params.w_gate_e, prev_embedding)));
}

// c_t = sum_{k,i} Gamma_k alpha_{ik} P_{ik}; alpha is parts x T, window T x 1.
inline Var context_vector(const Var& window, const Var& alpha, const AttentionPrecomp& pre) {
    auto weights = mul(alpha, transpose(window));                    // parts x T
    auto flat = reshape(weights, pre.parts * pre.frames, 1);         // part-major, matches p_mat
    return matmul(pre.p_mat, flat);                                  // h_enc x 1
}

// e_t: motion context embedded into the shared bounded space.
inline Var motion_embedding(const AttentionParams& params, const Var& context) {
    return motcap::tanh(add(matmul(params.w_ctx, context), params.b_ctx));
}

// r_t: top hidden state embedded into the shared bounded space.
inline Var language_embedding(const AttentionParams& params, const Var& h_top) {
    return motcap::tanh(add(matmul(params.w_lang, h_top), params.b_lang));
}

// c_bar = beta e + (1 - beta) r.
inline Var adaptive_blend(const Var& motion, const Var& language, const Var& beta) {
    auto one_minus = add_scalar(neg(beta), 1.0);
    return add(mul(motion, beta), mul(language, one_minus));
}

struct AdaptiveContext {
    Var motion;    // e_t
    Var language;  // r_t
    Var blended;   // c_bar
};

inline AdaptiveContext adaptive_context(const AttentionParams& params, const Var& context,
                                        const Var& h_top, const Var& beta) {
    AdaptiveContext out;
    out.motion = motion_embedding(params, context);
    out.language = language_embedding(params, h_top);
    out.blended = adaptive_blend(out.motion, out.language, beta);
    return out;
}

// Plain-data snapshot of one decoding step's attention, as written to dumps.
struct AttentionState {
    std::vector<double> gamma;
    std::vector<double> window;
    std::vector<double> alpha;  // parts x T_x row-major
    double mean = 0.0;
    double sigma = 0.0;
    double beta = 0.0;
    int frames = 0;
    int parts = kNumParts;

    double alpha_at(int part, int frame) const { return alpha[static_cast<size_t>(part) * frames + frame]; }
};

}  // namespace motcap
