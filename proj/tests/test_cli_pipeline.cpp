// Drives the installed CLI binary end to end on a small corpus:
// synth -> train -> decode -> eval -> analyze, plus the determinism contract
// (identical seed and config give bit-identical checkpoints, decodes and
// analysis CSVs).

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
#ifdef MOTCAP_CLI_PATH
    return MOTCAP_CLI_PATH;
#else
    return "./motcap";
#endif
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& sub) const { return (path / sub).string(); }
};

}  // namespace

TEST_CASE("pipeline: synth, train, decode, eval, analyze run green") {
    TempDir dir("motcap_pipeline_test");
    const std::string data = dir / "data";
    REQUIRE(run("synth --n 40 --seed 9 --out " + data) == 0);
    REQUIRE(fs::exists(fs::path(data) / "annotations.json"));
    REQUIRE(fs::exists(fs::path(data) / "dictionary.json"));
    REQUIRE(fs::exists(fs::path(data) / "manifest.json"));

    const std::string cfg = dir / "cfg.toml";
    {
        std::ofstream out(cfg);
        out << "[model]\nh1 = 12\nh2 = 6\nh_dec = 16\nd_emb = 12\n"
            << "[train]\nepochs = 2\nbatch_size = 16\nseed = 3\nearly_stop_patience = 0\n"
            << "lambda_spat = 2.0\nlambda_adapt = 3.0\n";
    }
    const std::string run1 = dir / "run1";
    REQUIRE(run("train --config " + cfg + " --data " + data + " --out " + run1) == 0);
    REQUIRE(fs::exists(fs::path(run1) / "checkpoint" / "params.bin"));
    REQUIRE(fs::exists(fs::path(run1) / "training_log.csv"));
    REQUIRE(fs::exists(fs::path(run1) / "manifest.json"));

    const std::string dec = dir / "dec";
    REQUIRE(run("decode --checkpoint " + run1 + "/checkpoint --data " + data + " --out " + dec +
                " --split test") == 0);
    REQUIRE(fs::exists(fs::path(dec) / "captions.jsonl"));

    const std::string ev = dir / "eval";
    REQUIRE(run("eval --hyp " + dec + "/captions.jsonl --data " + data + " --out " + ev +
                " --split test") == 0);
    REQUIRE(fs::exists(fs::path(ev) / "eval.json"));
    const std::string csv = slurp(fs::path(ev) / "eval.csv");
    CHECK(csv.find("bleu1,bleu2,bleu3,bleu4,rougeL,cider,n_samples") == 0);

    const std::string an = dir / "analysis";
    REQUIRE(run("analyze --dump " + dec + " --out " + an + " --words kick,wave,turn") == 0);
    for (const char* f : {"beta_density.csv", "beta_summary.csv", "part_histograms.csv",
                          "localization.csv", "fine_grained.json", "manifest.json"}) {
        CHECK(fs::exists(fs::path(an) / f));
    }
}

TEST_CASE("pipeline determinism: identical seed and config, bit-identical outputs") {
    TempDir dir("motcap_determinism_test");
    const std::string data = dir / "data";
    REQUIRE(run("synth --n 30 --seed 5 --out " + data) == 0);

    const std::string cfg = dir / "cfg.toml";
    {
        std::ofstream out(cfg);
        out << "[model]\nh1 = 12\nh2 = 6\nh_dec = 16\nd_emb = 12\n"
            << "[train]\nepochs = 2\nbatch_size = 16\nseed = 21\nearly_stop_patience = 0\n"
            << "lambda_spat = 0.0\nlambda_adapt = 3.0\n";
    }
    for (const char* tag : {"a", "b"}) {
        const std::string runs = dir / (std::string("run_") + tag);
        REQUIRE(run("train --config " + cfg + " --data " + data + " --out " + runs) == 0);
        REQUIRE(run("decode --checkpoint " + runs + "/checkpoint --data " + data + " --out " +
                    (dir / (std::string("dec_") + tag)) + " --split val") == 0);
        REQUIRE(run("analyze --dump " + (dir / (std::string("dec_") + tag)) + " --out " +
                    (dir / (std::string("an_") + tag)) + " --words kick,wave") == 0);
    }

    CHECK(slurp(fs::path(dir / "run_a") / "checkpoint" / "params.bin") ==
          slurp(fs::path(dir / "run_b") / "checkpoint" / "params.bin"));
    CHECK(slurp(fs::path(dir / "run_a") / "training_log.csv") ==
          slurp(fs::path(dir / "run_b") / "training_log.csv"));
    CHECK(slurp(fs::path(dir / "dec_a") / "captions.jsonl") ==
          slurp(fs::path(dir / "dec_b") / "captions.jsonl"));
    for (const char* f : {"beta_density.csv", "beta_summary.csv", "part_histograms.csv",
                          "localization.csv"}) {
        CHECK(slurp(fs::path(dir / "an_a") / f) == slurp(fs::path(dir / "an_b") / f));
    }
}

TEST_CASE("cli exit codes: usage 2, runtime failure 1") {
    CHECK(run("definitely-not-a-subcommand") == 2 * 256);
    CHECK(run("synth --n 10") == 2 * 256);  // missing required --out
    CHECK(run("train --data /nonexistent_dir --out /tmp/motcap_nowhere") == 1 * 256);
}
