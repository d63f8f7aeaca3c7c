#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "motcap/checkpoint.hpp"
#include "motcap/losses.hpp"
#include "motcap/metrics.hpp"
#include "motcap/model.hpp"
#include "motcap/synthetic.hpp"

namespace motcap {

struct TrainConfig {
    LossWeights weights;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 30;
    uint64_t seed = 1;
    double clip_norm = 5.0;
    int early_stop_patience = 10;  // 0 disables early stopping
    ModelConfig model;

    void validate() const {
        weights.validate();
        if (learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
        if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
        if (clip_norm <= 0.0) throw std::invalid_argument("train: clip_norm must be > 0");
        if (early_stop_patience < 0) throw std::invalid_argument("train: patience must be >= 0");
    }
};

// A preprocessed sample: root-relative coordinates, velocities, part arrays,
// token ids and supervision targets.
struct CaptionSample {
    std::string id;
    PartArrays parts;
    int frames = 0;
    std::vector<std::string> caption_tokens;
    std::vector<int> caption_ids;
    SupervisionTargets targets;
};

inline CaptionSample make_caption_sample(const SyntheticSample& s, const Vocabulary& vocab,
                                         const GuidanceDictionary& dict, const Lexicon& lex) {
    CaptionSample out;
    out.id = s.id;
    auto rel = to_root_relative(s.motion);
    out.parts = gather_parts(compute_velocities(rel));
    out.frames = s.motion.num_frames();
    out.caption_tokens = s.caption;
    out.caption_ids = vocab.encode(s.caption);
    out.targets = build_spatial_targets(s.caption, dict, lex);
    return out;
}

inline std::vector<CaptionSample> make_caption_samples(
    const std::vector<const SyntheticSample*>& split, const Vocabulary& vocab,
    const GuidanceDictionary& dict, const Lexicon& lex) {
    std::vector<CaptionSample> out;
    out.reserve(split.size());
    for (const auto* s : split) out.push_back(make_caption_sample(*s, vocab, dict, lex));
    return out;
}

struct SampleLoss {
    Var total;
    LossBreakdown parts;
};

inline SampleLoss sample_loss(const CaptionModel& model, const CaptionSample& sample,
                              const LossWeights& weights) {
    auto pre = model.encode(sample.parts);
    auto tf = model.teacher_forced(pre, sample.caption_ids);

    std::vector<Var> probs, betas, alphas;
    probs.reserve(tf.steps.size());
    for (const auto& s : tf.steps) {
        probs.push_back(s.probs);
        betas.push_back(s.beta);
        alphas.push_back(s.alpha);
    }

    auto lang = language_loss(probs, tf.targets);
    auto adapt = adaptive_loss(betas, sample.targets.beta);
    std::optional<Var> spat;
    if (sample.targets.n_supervised > 0) spat = spatial_loss(alphas, sample.targets);

    SampleLoss out;
    out.total = global_loss(lang, spat ? &*spat : nullptr, &adapt, weights);
    out.parts = breakdown(lang, spat ? &*spat : nullptr, &adapt, weights);
    return out;
}

// Global-norm gradient clipping; rescales in place, never changes direction.
inline double clip_gradients(ParamList& params, double max_norm) {
    double norm2 = 0.0;
    for (auto& [name, p] : params)
        for (int i = 0; i < p->grad.numel(); ++i) norm2 += p->grad[i] * p->grad[i];
    const double norm = std::sqrt(norm2);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto& [name, p] : params)
            for (int i = 0; i < p->grad.numel(); ++i) p->grad[i] *= scale;
    }
    return norm;
}

class AdamOptimizer {
public:
    AdamOptimizer(const ParamList& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& [name, p] : params) {
            m_.emplace_back(p->value.rows(), p->value.cols(), 0.0);
            v_.emplace_back(p->value.rows(), p->value.cols(), 0.0);
        }
    }

    void step(ParamList& params) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            auto& p = params[i].second;
            for (int j = 0; j < p->value.numel(); ++j) {
                const double g = p->grad[j];
                m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
                v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                p->value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

private:
    std::vector<Tensor> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct EpochLog {
    int epoch = 0;
    double lang = 0.0, spat = 0.0, adapt = 0.0, total = 0.0;
    double val_bleu4 = 0.0;
    double grad_norm = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    double best_val_bleu4 = 0.0;
    int best_epoch = -1;
    std::vector<Tensor> best_params;  // aligned with model.params() order
};

inline double greedy_bleu4(const CaptionModel& model, const std::vector<CaptionSample>& samples,
                           Tape& tape) {
    if (samples.empty()) return 0.0;
    std::vector<TokenSeq> hyps;
    std::vector<RefSet> refs;
    for (const auto& s : samples) {
        auto pre = model.encode(s.parts);
        auto decoded = model.greedy(pre);
        tape.clear();
        hyps.push_back(model.vocab().decode(decoded.tokens));
        refs.push_back({s.caption_tokens});
    }
    return bleu(hyps, refs, 4);
}

// Teacher-forced training with per-sample gradient accumulation in a fixed
// order (mean over the batch), global-norm clipping and Adam. The best
// validation checkpoint is kept; ties go to the later epoch so guidance
// losses keep refining after BLEU saturates.
inline TrainResult train(CaptionModel& model, const std::vector<CaptionSample>& train_set,
                         const std::vector<CaptionSample>& val_set, const TrainConfig& cfg,
                         const std::string& log_csv_path = "") {
    cfg.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty training set");

    AdamOptimizer adam(model.params(), cfg.learning_rate);
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    TrainResult result;

    std::ofstream log_csv;
    if (!log_csv_path.empty()) {
        log_csv.open(log_csv_path);
        if (!log_csv) throw std::runtime_error("cannot write training log " + log_csv_path);
        log_csv << "epoch,lang,spat,adapt,total,val_bleu4\n";
    }

    int epochs_since_improvement = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<int> order(train_set.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        shuffle_rng.shuffle(order);

        EpochLog ep;
        ep.epoch = epoch;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const size_t end = std::min(order.size(), start + cfg.batch_size);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            model.zero_grad();
            for (size_t i = start; i < end; ++i) {
                const auto& sample = train_set[order[i]];
                SampleLoss loss;
                try {
                    loss = sample_loss(model, sample, cfg.weights);
                } catch (const std::exception& e) {
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", sample " + sample.id +
                                             ": " + e.what());
                }
                if (!std::isfinite(loss.parts.total)) {
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch) + ", sample " + sample.id +
                                             " (lang=" + std::to_string(loss.parts.lang) +
                                             ", spat=" + std::to_string(loss.parts.spat) +
                                             ", adapt=" + std::to_string(loss.parts.adapt) + ")");
                }
                auto scaled = mul_scalar(loss.total, inv_batch);
                model.tape().backward(scaled);
                model.tape().clear();
                ep.lang += loss.parts.lang;
                ep.spat += loss.parts.spat;
                ep.adapt += loss.parts.adapt;
                ep.total += loss.parts.total;
            }
            ep.grad_norm = std::max(ep.grad_norm, clip_gradients(model.params(), cfg.clip_norm));
            adam.step(model.params());
        }
        const double inv_n = 1.0 / static_cast<double>(train_set.size());
        ep.lang *= inv_n;
        ep.spat *= inv_n;
        ep.adapt *= inv_n;
        ep.total *= inv_n;

        ep.val_bleu4 = greedy_bleu4(model, val_set, model.tape());
        result.log.push_back(ep);
        if (log_csv.is_open()) {
            log_csv << ep.epoch << ',' << ep.lang << ',' << ep.spat << ',' << ep.adapt << ','
                    << ep.total << ',' << ep.val_bleu4 << "\n";
        }

        // Snapshot on >= (ties keep the later epoch); the early-stop counter
        // resets only on strict improvement.
        const bool first = result.best_epoch < 0;
        if (first || ep.val_bleu4 > result.best_val_bleu4) {
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
        }
        if (first || ep.val_bleu4 >= result.best_val_bleu4) {
            result.best_val_bleu4 = ep.val_bleu4;
            result.best_epoch = epoch;
            result.best_params.clear();
            for (const auto& [name, p] : model.params()) result.best_params.push_back(p->value);
        }
        if (cfg.early_stop_patience > 0 && epochs_since_improvement >= cfg.early_stop_patience) {
            break;
        }
    }

    // leave the model at the best-validation parameters
    if (!result.best_params.empty()) {
        size_t i = 0;
        for (auto& [name, p] : model.params()) p->value = result.best_params[i++];
    }
    return result;
}

struct SweepCell {
    double lambda_spat = 0.0;
    double lambda_adapt = 0.0;
    uint64_t seed = 1;
};

struct SweepRow {
    SweepCell cell;
    EvalReport report;
    bool ok = false;
    std::string error;
};

// One train+eval per cell; a failing cell is recorded and the sweep moves on.
template <class MakeModel>
std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const TrainConfig& base,
                            MakeModel make_model, const std::vector<CaptionSample>& train_set,
                            const std::vector<CaptionSample>& val_set,
                            const std::vector<CaptionSample>& test_set) {
    if (cells.empty()) throw std::invalid_argument("sweep: empty grid");
    std::vector<SweepRow> rows;
    for (const auto& cell : cells) {
        SweepRow row;
        row.cell = cell;
        try {
            TrainConfig cfg = base;
            cfg.weights = {cell.lambda_spat, cell.lambda_adapt};
            cfg.seed = cell.seed;
            CaptionModel model = make_model(cell.seed);
            train(model, train_set, val_set, cfg);

            std::vector<TokenSeq> hyps;
            std::vector<RefSet> refs;
            for (const auto& s : test_set) {
                auto decoded = model.greedy(model.encode(s.parts));
                model.tape().clear();
                hyps.push_back(model.vocab().decode(decoded.tokens));
                refs.push_back({s.caption_tokens});
            }
            row.report = evaluate(hyps, refs);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep csv " + path);
    out << "lambda_spat,lambda_adapt,seed,status,bleu1,bleu2,bleu3,bleu4,rougeL,cider,n_samples\n";
    for (const auto& r : rows) {
        out << r.cell.lambda_spat << ',' << r.cell.lambda_adapt << ',' << r.cell.seed << ','
            << (r.ok ? "ok" : "failed") << ',' << r.report.bleu1 << ',' << r.report.bleu2 << ','
            << r.report.bleu3 << ',' << r.report.bleu4 << ',' << r.report.rougeL << ','
            << r.report.cider << ',' << r.report.n_samples << "\n";
    }
}

}  // namespace motcap
