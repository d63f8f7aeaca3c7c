// motcap command-line interface: synth | train | sweep | eval | decode |
// analyze | gradcheck. Every run writes a manifest (effective config, seed,
// versions, input hashes) next to its outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "motcap/checkpoint.hpp"
#include "motcap/config.hpp"
#include "motcap/interp.hpp"
#include "motcap/metrics.hpp"
#include "motcap/synthetic.hpp"
#include "motcap/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "motcap 0.1.0";

std::string compiler_id() {
#if defined(__clang__)
    return "clang " + std::to_string(__clang_major__) + "." + std::to_string(__clang_minor__);
#elif defined(__GNUC__)
    return "gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__);
#else
    return "unknown";
#endif
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const ordered_json& effective_config, uint64_t seed,
                    const std::vector<std::string>& input_paths) {
    ordered_json manifest;
    manifest["command"] = command;
    manifest["config"] = effective_config;
    manifest["seed"] = seed;
    manifest["versions"] = {{"motcap", kVersion}, {"compiler", compiler_id()}};
    ordered_json hashes = ordered_json::object();
    for (const auto& p : input_paths) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(motcap::fnv1a_file(p)));
        hashes[p] = buf;
    }
    manifest["input_hashes"] = std::move(hashes);
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
    out << manifest.dump(2) << "\n";
}

struct LoadedData {
    motcap::SyntheticCorpus corpus;
    motcap::GuidanceDictionary dict = motcap::GuidanceDictionary::builtin_default();
    motcap::Lexicon lex = motcap::Lexicon::builtin_default();
    motcap::Vocabulary vocab;  // built from the train split only
    std::vector<motcap::CaptionSample> train, val, test;
    std::string dict_path, lexicon_path;
};

LoadedData load_data(const std::string& data_dir, const motcap::RunSettings& settings) {
    LoadedData d;
    d.corpus = motcap::load_corpus(data_dir);

    auto pick_path = [&](const std::string& configured, const char* fallback) {
        if (!configured.empty()) return configured;
        const fs::path p = fs::path(data_dir) / fallback;
        return fs::exists(p) ? p.string() : std::string();
    };
    d.dict_path = pick_path(settings.dictionary, "dictionary.json");
    d.lexicon_path = pick_path(settings.lexicon, "lexicon.json");
    if (!d.dict_path.empty()) d.dict = motcap::load_dictionary(d.dict_path);
    if (!d.lexicon_path.empty()) d.lex = motcap::load_lexicon(d.lexicon_path);

    std::vector<std::vector<std::string>> train_captions;
    for (const auto* s : d.corpus.split("train")) train_captions.push_back(s->caption);
    if (train_captions.empty()) throw std::runtime_error("data has no train split: " + data_dir);
    d.vocab = motcap::Vocabulary::build(train_captions);

    d.train = motcap::make_caption_samples(d.corpus.split("train"), d.vocab, d.dict, d.lex);
    d.val = motcap::make_caption_samples(d.corpus.split("val"), d.vocab, d.dict, d.lex);
    d.test = motcap::make_caption_samples(d.corpus.split("test"), d.vocab, d.dict, d.lex);
    return d;
}

motcap::RunSettings settings_from(const std::string& config_path,
                                  const std::vector<std::string>& overrides,
                                  ordered_json& effective) {
    ordered_json j = ordered_json::object();
    if (!config_path.empty()) j = motcap::load_config_file(config_path);
    for (const auto& o : overrides) motcap::apply_override(j, o);
    auto settings = motcap::RunSettings::from_json(j);
    effective = settings.to_json();
    return settings;
}

void decode_split(motcap::CaptionModel& model, const std::vector<motcap::CaptionSample>& samples,
                  const std::string& out_dir, const std::string& strategy, int beam_width) {
    fs::create_directories(fs::path(out_dir) / "attn");
    std::ofstream jsonl(fs::path(out_dir) / "captions.jsonl");
    if (!jsonl) throw std::runtime_error("cannot write captions.jsonl in " + out_dir);
    for (const auto& s : samples) {
        auto pre = model.encode(s.parts);
        auto decoded = strategy == "beam" ? model.beam(pre, beam_width) : model.greedy(pre);
        model.tape().clear();

        motcap::AttentionDump dump;
        dump.id = s.id;
        for (int tok : decoded.tokens) dump.tokens.push_back(model.vocab().word(tok));
        dump.steps = decoded.attention;
        const std::string attn_rel = "attn/" + s.id + ".json";
        motcap::write_dump(dump, (fs::path(out_dir) / attn_rel).string());

        ordered_json row;
        row["id"] = s.id;
        row["tokens"] = model.vocab().decode(decoded.tokens);
        row["score"] = decoded.score;
        row["attention"] = attn_rel;
        jsonl << row.dump() << "\n";
    }
}

motcap::EvalReport eval_captions(const std::string& hyp_jsonl, const motcap::SyntheticCorpus& corpus,
                                 const std::string& split) {
    std::map<std::string, std::vector<motcap::TokenSeq>> refs_by_id;
    for (const auto& s : corpus.samples) {
        if (!split.empty() && s.split != split) continue;
        refs_by_id[s.id].push_back(s.caption);
    }
    std::ifstream in(hyp_jsonl);
    if (!in) throw std::runtime_error("cannot read " + hyp_jsonl);
    std::vector<motcap::TokenSeq> hyps;
    std::vector<motcap::RefSet> refs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = nlohmann::json::parse(line);
        const std::string id = row.at("id").get<std::string>();
        auto it = refs_by_id.find(id);
        if (it == refs_by_id.end()) continue;  // outside the requested split
        hyps.push_back(row.at("tokens").get<std::vector<std::string>>());
        refs.push_back(it->second);
    }
    if (hyps.empty()) throw std::runtime_error("no hypotheses matched split '" + split + "'");
    return motcap::evaluate(hyps, refs);
}

void write_eval_outputs(const motcap::EvalReport& r, const std::string& out_dir) {
    ordered_json j = {{"bleu1", r.bleu1}, {"bleu2", r.bleu2}, {"bleu3", r.bleu3},
                      {"bleu4", r.bleu4}, {"rougeL", r.rougeL}, {"cider", r.cider},
                      {"n_samples", r.n_samples}, {"smoothing", r.smoothing}};
    std::ofstream js(fs::path(out_dir) / "eval.json");
    js << j.dump(2) << "\n";
    std::ofstream csv(fs::path(out_dir) / "eval.csv");
    csv << "bleu1,bleu2,bleu3,bleu4,rougeL,cider,n_samples\n";
    csv << r.bleu1 << ',' << r.bleu2 << ',' << r.bleu3 << ',' << r.bleu4 << ',' << r.rougeL << ','
        << r.cider << ',' << r.n_samples << "\n";
}

std::vector<motcap::AttentionDump> load_dumps(const std::string& dump_dir) {
    std::vector<fs::path> files;
    const fs::path attn = fs::path(dump_dir) / "attn";
    const fs::path base = fs::exists(attn) ? attn : fs::path(dump_dir);
    for (const auto& entry : fs::directory_iterator(base)) {
        if (entry.path().extension() == ".json" && entry.path().filename() != "manifest.json" &&
            entry.path().filename() != "eval.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<motcap::AttentionDump> dumps;
    for (const auto& f : files) dumps.push_back(motcap::read_dump(f.string()));
    if (dumps.empty()) throw std::runtime_error("no attention dumps found under " + dump_dir);
    return dumps;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Interpretable motion-to-text captioning"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic skeleton-motion corpus");
    int synth_n = 500;
    uint64_t synth_seed = 7;
    int tx_min = 40, tx_max = 80;
    double noise = 0.01, frame_rate = 20.0, two_action = 0.7;
    std::string synth_out;
    synth->add_option("--n", synth_n, "number of samples")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "corpus seed");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--tx-min", tx_min, "minimum frames");
    synth->add_option("--tx-max", tx_max, "maximum frames");
    synth->add_option("--noise", noise, "joint noise sigma, meters");
    synth->add_option("--frame-rate", frame_rate, "frames per second metadata");
    synth->add_option("--two-action-prob", two_action, "probability of a second action");

    // shared train/sweep/decode/eval options
    std::string config_path, data_dir, out_dir, checkpoint_dir;
    std::vector<std::string> overrides;

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "Train a captioning model");
    train_cmd->add_option("--config", config_path, "TOML or JSON config");
    train_cmd->add_option("--set", overrides, "override config keys, e.g. train.epochs=40");
    train_cmd->add_option("--data", data_dir, "corpus directory from synth")->required();
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "Train/eval a (lambda_spat, lambda_adapt) grid");
    std::string grid = "0,0;0,3;2,3";
    std::string seeds_arg = "1";
    sweep_cmd->add_option("--config", config_path, "TOML or JSON config");
    sweep_cmd->add_option("--set", overrides, "override config keys");
    sweep_cmd->add_option("--data", data_dir, "corpus directory")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();
    sweep_cmd->add_option("--grid", grid, "cells as \"ls,la;ls,la;...\"");
    sweep_cmd->add_option("--seeds", seeds_arg, "comma-separated training seeds per cell");

    // ---- decode ----
    auto* decode_cmd = app.add_subcommand("decode", "Decode a split with attention dumps");
    std::string split = "test", strategy;
    int beam_width = 0;
    decode_cmd->add_option("--checkpoint", checkpoint_dir, "checkpoint directory")->required();
    decode_cmd->add_option("--data", data_dir, "corpus directory")->required();
    decode_cmd->add_option("--out", out_dir, "output directory")->required();
    decode_cmd->add_option("--split", split, "train|val|test");
    decode_cmd->add_option("--strategy", strategy, "greedy|beam (default from config)");
    decode_cmd->add_option("--beam", beam_width, "beam width when strategy is beam");
    decode_cmd->add_option("--config", config_path, "TOML or JSON config");
    decode_cmd->add_option("--set", overrides, "override config keys");

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "Score generated captions against references");
    std::string hyp_path;
    eval_cmd->add_option("--hyp", hyp_path, "captions.jsonl from decode")->required();
    eval_cmd->add_option("--data", data_dir, "corpus directory")->required();
    eval_cmd->add_option("--out", out_dir, "output directory")->required();
    eval_cmd->add_option("--split", split, "train|val|test");

    // ---- analyze ----
    auto* analyze_cmd = app.add_subcommand("analyze", "Interpretability analytics over dumps");
    std::string dump_dir, words_arg = "kick,wave,turn,walk,bow,squat,throw,jump";
    double tau_beta = 0.5, kappa = 1.5;
    analyze_cmd->add_option("--dump", dump_dir, "decode output directory (or its attn/)")->required();
    analyze_cmd->add_option("--out", out_dir, "output directory")->required();
    analyze_cmd->add_option("--words", words_arg, "comma-separated words or stems");
    analyze_cmd->add_option("--tau", tau_beta, "motion-word gate threshold");
    analyze_cmd->add_option("--kappa", kappa, "span half-width in sigmas");

    // ---- gradcheck ----
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
    double tol = 1e-4, fd_step = 1e-5;
    uint64_t grad_seed = 1234;
    grad_cmd->add_option("--tol", tol, "max relative error");
    grad_cmd->add_option("--step", fd_step, "central difference step");
    grad_cmd->add_option("--seed", grad_seed, "model init seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return 2;
    }

    if (synth->parsed()) {
        motcap::SynthConfig cfg;
        cfg.n = synth_n;
        cfg.seed = synth_seed;
        cfg.tx_min = tx_min;
        cfg.tx_max = tx_max;
        cfg.noise_sigma = noise;
        cfg.frame_rate = frame_rate;
        cfg.two_action_prob = two_action;
        auto corpus = motcap::generate_corpus(cfg);
        motcap::save_corpus(corpus, synth_out);
        {
            std::ofstream d(fs::path(synth_out) / "dictionary.json");
            d << motcap::GuidanceDictionary::builtin_default().to_json().dump(2) << "\n";
            std::ofstream l(fs::path(synth_out) / "lexicon.json");
            l << motcap::Lexicon::builtin_default().to_json().dump(2) << "\n";
        }
        ordered_json cfg_json = {{"n", cfg.n},           {"seed", cfg.seed},
                                 {"tx_min", cfg.tx_min}, {"tx_max", cfg.tx_max},
                                 {"noise_sigma", cfg.noise_sigma}, {"frame_rate", cfg.frame_rate},
                                 {"two_action_prob", cfg.two_action_prob}};
        write_manifest(synth_out, "synth", cfg_json, cfg.seed, {});
        std::cout << "wrote " << corpus.samples.size() << " samples to " << synth_out << "\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        ordered_json effective;
        auto settings = settings_from(config_path, overrides, effective);
        auto data = load_data(data_dir, settings);
        motcap::CaptionModel model(settings.train.model, data.corpus.samples.front().motion.layout,
                                   data.vocab, settings.train.seed);
        fs::create_directories(out_dir);
        auto result = motcap::train(model, data.train, data.val, settings.train,
                                    (fs::path(out_dir) / "training_log.csv").string());
        motcap::save_checkpoint(model, (fs::path(out_dir) / "checkpoint").string());

        std::vector<std::string> inputs = {(fs::path(data_dir) / "annotations.json").string()};
        if (!config_path.empty()) inputs.push_back(config_path);
        if (!data.dict_path.empty()) inputs.push_back(data.dict_path);
        if (!data.lexicon_path.empty()) inputs.push_back(data.lexicon_path);
        write_manifest(out_dir, "train", effective, settings.train.seed, inputs);
        std::cout << "trained " << result.log.size() << " epochs, best val BLEU@4 "
                  << result.best_val_bleu4 << " at epoch " << result.best_epoch << "\n";
        return 0;
    }

    if (sweep_cmd->parsed()) {
        ordered_json effective;
        auto settings = settings_from(config_path, overrides, effective);
        auto data = load_data(data_dir, settings);

        std::vector<motcap::SweepCell> cells;
        std::vector<uint64_t> seeds;
        for (const auto& s : split_csv_list(seeds_arg)) seeds.push_back(std::stoull(s));
        if (seeds.empty()) seeds.push_back(settings.train.seed);
        std::istringstream grid_in(grid);
        std::string cell_text;
        while (std::getline(grid_in, cell_text, ';')) {
            auto parts = split_csv_list(cell_text);
            if (parts.size() != 2) throw std::runtime_error("bad sweep cell '" + cell_text + "'");
            for (uint64_t seed : seeds) {
                cells.push_back({std::stod(parts[0]), std::stod(parts[1]), seed});
            }
        }

        const auto layout = data.corpus.samples.front().motion.layout;
        auto rows = motcap::sweep(
            cells, settings.train,
            [&](uint64_t seed) {
                return motcap::CaptionModel(settings.train.model, layout, data.vocab, seed);
            },
            data.train, data.val, data.test);
        fs::create_directories(out_dir);
        motcap::write_sweep_csv(rows, (fs::path(out_dir) / "sweep.csv").string());
        write_manifest(out_dir, "sweep", effective, settings.train.seed,
                       {(fs::path(data_dir) / "annotations.json").string()});
        int failures = 0;
        for (const auto& r : rows) failures += !r.ok;
        std::cout << "sweep finished: " << rows.size() << " cells, " << failures << " failed\n";
        return failures == static_cast<int>(rows.size()) ? 1 : 0;
    }

    if (decode_cmd->parsed()) {
        ordered_json effective;
        auto settings = settings_from(config_path, overrides, effective);
        if (!strategy.empty()) settings.decode = strategy;
        if (beam_width > 0) settings.beam_width = beam_width;
        if (settings.decode != "greedy" && settings.decode != "beam") {
            throw std::runtime_error("decode strategy must be greedy or beam");
        }
        auto model = motcap::load_checkpoint(checkpoint_dir);
        auto corpus = motcap::load_corpus(data_dir);
        motcap::GuidanceDictionary dict = motcap::GuidanceDictionary::builtin_default();
        motcap::Lexicon lex = motcap::Lexicon::builtin_default();
        auto samples = motcap::make_caption_samples(corpus.split(split), model.vocab(), dict, lex);
        if (samples.empty()) throw std::runtime_error("split '" + split + "' is empty");
        decode_split(model, samples, out_dir, settings.decode, settings.beam_width);
        effective["decode"]["strategy"] = settings.decode;
        effective["decode"]["beam_width"] = settings.beam_width;
        write_manifest(out_dir, "decode", effective, 0,
                       {(fs::path(checkpoint_dir) / "manifest.json").string(),
                        (fs::path(data_dir) / "annotations.json").string()});
        std::cout << "decoded " << samples.size() << " samples to " << out_dir << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        auto corpus = motcap::load_corpus(data_dir);
        auto report = eval_captions(hyp_path, corpus, split);
        fs::create_directories(out_dir);
        write_eval_outputs(report, out_dir);
        ordered_json cfg = {{"hyp", hyp_path}, {"split", split}};
        write_manifest(out_dir, "eval", cfg, 0,
                       {hyp_path, (fs::path(data_dir) / "annotations.json").string()});
        std::cout << "bleu4 " << report.bleu4 << " rougeL " << report.rougeL << " cider "
                  << report.cider << " over " << report.n_samples << " samples\n";
        return 0;
    }

    if (analyze_cmd->parsed()) {
        auto dumps = load_dumps(dump_dir);
        auto records = motcap::collect_records(dumps);
        fs::create_directories(out_dir);

        const auto stems_of = [&](const std::string& w) { return motcap::stem(w); };
        std::vector<std::string> stems;
        for (const auto& w : split_csv_list(words_arg)) stems.push_back(stems_of(w));

        std::ofstream dens(fs::path(out_dir) / "beta_density.csv");
        dens << "stem,beta,density\n";
        std::ofstream summ(fs::path(out_dir) / "beta_summary.csv");
        summ << "stem,count,low_count,mean,median,bandwidth\n";
        std::ofstream hist(fs::path(out_dir) / "part_histograms.csv");
        hist << "stem";
        for (const auto& p : motcap::part_names()) hist << ',' << p;
        hist << ",total,modal_part,modal_share\n";
        for (const auto& s : stems) {
            auto d = motcap::beta_density(records, s);
            for (size_t i = 0; i < d.grid.size(); ++i)
                dens << s << ',' << d.grid[i] << ',' << d.density[i] << "\n";
            summ << s << ',' << d.count << ',' << (d.low_count ? 1 : 0) << ',' << d.mean << ','
                 << d.median << ',' << d.bandwidth << "\n";
            auto h = motcap::part_histogram(records, s);
            hist << s;
            for (int p = 0; p < motcap::kNumParts; ++p) hist << ',' << h.counts[p];
            hist << ',' << h.total << ','
                 << (h.modal_part >= 0 ? motcap::part_names()[h.modal_part] : "none") << ','
                 << h.modal_share << "\n";
        }

        std::ofstream loc(fs::path(out_dir) / "localization.csv");
        loc << "id,word,stem,beta,m,sigma,start,end\n";
        for (const auto& r : records) {
            if (r.word == "<eos>") continue;
            auto span = motcap::localize(r, kappa);
            loc << r.sample_id << ',' << r.word << ',' << r.word_stem << ',' << r.beta << ','
                << r.mean << ',' << r.sigma << ',' << span.start << ',' << span.end << "\n";
        }

        ordered_json reports = ordered_json::array();
        for (const auto& d : dumps) {
            reports.push_back(motcap::report_to_json(motcap::fine_grained_report(d, tau_beta, kappa)));
        }
        std::ofstream fg(fs::path(out_dir) / "fine_grained.json");
        fg << reports.dump(2) << "\n";

        ordered_json cfg = {{"dump", dump_dir}, {"words", words_arg}, {"tau", tau_beta},
                            {"kappa", kappa}};
        write_manifest(out_dir, "analyze", cfg, 0, {});
        std::cout << "analyzed " << records.size() << " tokens from " << dumps.size() << " dumps\n";
        return 0;
    }

    if (grad_cmd->parsed()) {
        // Toy setup mirroring the acceptance gradient-fidelity criterion.
        motcap::Rng rng(grad_seed);
        motcap::ModelConfig mc;
        mc.enc = {8, 4};
        mc.h_dec = 8;
        mc.d_emb = 8;
        auto vocab = motcap::Vocabulary::from_words({"kicks", "slowly"});
        motcap::CaptionModel model(mc, motcap::default_layout(), vocab, grad_seed);

        motcap::SyntheticSample s;
        s.id = "gradcheck";
        motcap::MotionSequence seq;
        seq.layout = motcap::default_layout();
        seq.frame_rate = 20.0;
        seq.positions = motcap::Tensor(4, seq.layout.num_joints() * 3);
        for (int i = 0; i < seq.positions.numel(); ++i) seq.positions[i] = rng.uniform(-1, 1);
        s.motion = seq;
        s.caption = {"kicks", "slowly", "kicks"};
        auto sample = motcap::make_caption_sample(s, vocab, motcap::GuidanceDictionary::builtin_default(),
                                                  motcap::Lexicon::builtin_default());

        const motcap::LossWeights weights{2.0, 3.0};
        auto report = motcap::grad_check(
            [&]() { return motcap::sample_loss(model, sample, weights).total; }, model.params(),
            fd_step, tol);
        for (const auto& e : report.entries) {
            std::cout << (e.pass ? "PASS" : "FAIL") << "  " << e.name << "  max_rel_err "
                      << e.max_rel_err << "\n";
        }
        std::cout << (report.pass ? "gradcheck passed" : "gradcheck FAILED: worst " +
                                                             report.worst_param)
                  << " (tol " << tol << ")\n";
        return report.pass ? 0 : 1;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
