// elgar command-line front end.  Talks to the library only through elgar.h.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "elgar/elgar.h"

namespace {

struct Common {
  std::string config;
  std::optional<unsigned long long> seed;
  std::optional<double> guidance_w;
  std::optional<int> steps;
  std::optional<double> overlap_s;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Run config JSON (defaults built in)");
  cmd->add_option("--seed", c.seed, "Random seed (default 0)");
  cmd->add_option("--out", c.out, "Output path");
}

void add_sampling(CLI::App* cmd, Common& c) {
  cmd->add_option("--guidance-w", c.guidance_w, "Classifier-free guidance weight w");
  cmd->add_option("--steps", c.steps, "DDIM sampling steps");
  cmd->add_option("--overlap-s", c.overlap_s, "Overlap between 5 s slices in seconds");
}

int fail(elgar_status s) {
  std::fprintf(stderr, "elgar: %s\n", elgar_last_error());
  return static_cast<int>(s);
}

// Owns the config handle; every setter failure maps straight to an exit code.
class Config {
 public:
  ~Config() { elgar_config_free(handle_); }

  elgar_status load(const Common& c) {
    elgar_status s = elgar_config_load(c.config.empty() ? nullptr : c.config.c_str(), &handle_);
    if (s != ELGAR_OK) return s;
    if (c.seed && (s = elgar_config_set_seed(handle_, *c.seed)) != ELGAR_OK) return s;
    if (c.guidance_w && (s = elgar_config_set_guidance_w(handle_, *c.guidance_w)) != ELGAR_OK) return s;
    if (c.steps && (s = elgar_config_set_steps(handle_, *c.steps)) != ELGAR_OK) return s;
    if (c.overlap_s && (s = elgar_config_set_overlap_s(handle_, *c.overlap_s)) != ELGAR_OK) return s;
    return ELGAR_OK;
  }

  elgar_config* get() const { return handle_; }

 private:
  elgar_config* handle_ = nullptr;
};

void print_and_free(char* text) {
  if (!text) return;
  std::cout << text;
  if (*text && text[std::char_traits<char>::length(text) - 1] != '\n') std::cout << '\n';
  elgar_string_free(text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elgar: audio-conditioned cello performance motion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", elgar_version());
  app.footer(
      "Exit codes: 0 ok, 2 input, 3 geometry, 4 divergence, 5 alignment.\n"
      "ELGAR_THREADS caps training parallelism.");

  Common c;

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset of raw takes and audio");
  add_common(synth, c);

  std::string take, audio;
  auto* pre = app.add_subcommand(
      "preprocess",
      "Normalize raw takes and write motion + condition files.\n"
      "With --take: one take, --out is the output prefix.  Without: every raw take of the dataset.");
  add_common(pre, c);
  pre->add_option("--take", take, "Raw take JSON");
  pre->add_option("--audio", audio, "Audio of the take (WAV)");

  auto* train = app.add_subcommand("train", "Train the denoiser on the processed train split");
  add_common(train, c);

  std::string checkpoint, condition;
  double duration = 0.0;
  auto* gen = app.add_subcommand(
      "generate",
      "Sample motion for audio or a condition file.\n"
      "Long inputs are covered by 5 s slices advanced by (5 - overlap) s; with the default 4 s\n"
      "overlap, n slices span 5 + (n-1)*1 s and are blended with linearly decaying weights.");
  add_common(gen, c);
  add_sampling(gen, c);
  gen->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  auto* gen_audio = gen->add_option("--audio", audio, "Audio (WAV)");
  auto* gen_cond = gen->add_option("--condition", condition, "Condition JSONL");
  gen_audio->excludes(gen_cond);
  gen->add_option("--duration", duration, "Seconds to generate (default: full input)")
      ->check(CLI::PositiveNumber);

  std::string motion, gt;
  auto* eval = app.add_subcommand("evaluate", "Compute FCD, BSD, BF1 and BCS for a motion file");
  add_common(eval, c);
  eval->add_option("--motion", motion, "Motion file to evaluate")->required();
  eval->add_option("--condition", condition, "Condition JSONL of the same take")->required();
  eval->add_option("--gt", gt, "Ground-truth motion (enables BF1 and BCS)");

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate every loss-weight preset of the config");
  add_common(ablate, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ELGAR_ERR_INPUT);
  }

  Config cfg;
  if (elgar_status s = cfg.load(c); s != ELGAR_OK) return fail(s);
  const char* out = c.out.empty() ? nullptr : c.out.c_str();

  if (*synth) {
    int takes = 0;
    if (elgar_status s = elgar_synth_dataset(cfg.get(), out, &takes); s != ELGAR_OK) return fail(s);
    std::cout << "wrote " << takes << " takes\n";
    return 0;
  }

  if (*pre) {
    char* summary = nullptr;
    elgar_status s;
    if (!take.empty()) {
      if (!out) {
        std::fprintf(stderr, "elgar: preprocess --take needs --out <prefix>\n");
        return ELGAR_ERR_INPUT;
      }
      s = elgar_preprocess(cfg.get(), take.c_str(), audio.empty() ? nullptr : audio.c_str(), out, &summary);
    } else {
      if (out && (s = elgar_config_set_dataset(cfg.get(), out)) != ELGAR_OK) return fail(s);
      s = elgar_preprocess_dataset(cfg.get(), &summary);
    }
    if (s != ELGAR_OK) return fail(s);
    print_and_free(summary);
    return 0;
  }

  if (*train) {
    if (elgar_status s = elgar_train(cfg.get(), out); s != ELGAR_OK) return fail(s);
    return 0;
  }

  if (*gen) {
    if (audio.empty() == condition.empty()) {
      std::fprintf(stderr, "elgar: generate needs exactly one of --audio or --condition\n");
      return ELGAR_ERR_INPUT;
    }
    if (!out) {
      std::fprintf(stderr, "elgar: generate needs --out <motion file>\n");
      return ELGAR_ERR_INPUT;
    }
    const elgar_status s =
        elgar_generate(cfg.get(), checkpoint.c_str(), audio.empty() ? nullptr : audio.c_str(),
                       condition.empty() ? nullptr : condition.c_str(), duration, out);
    if (s != ELGAR_OK) return fail(s);
    return 0;
  }

  if (*eval) {
    char* table = nullptr;
    const elgar_status s = elgar_evaluate(cfg.get(), motion.c_str(), condition.c_str(),
                                          gt.empty() ? nullptr : gt.c_str(), out, &table);
    if (s != ELGAR_OK) return fail(s);
    print_and_free(table);
    if (gt.empty()) std::cerr << "note: BF1 and BCS need --gt; omitted\n";
    return 0;
  }

  if (*ablate) {
    char* table = nullptr;
    if (elgar_status s = elgar_ablate(cfg.get(), out, &table); s != ELGAR_OK) return fail(s);
    print_and_free(table);
    return 0;
  }
  return 0;
}
