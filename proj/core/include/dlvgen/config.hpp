#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dlvgen/latent.hpp"

namespace dlvgen {

enum class Variant { plain, cvae, dlvgen };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view text);

// How MTLD treats the unfinished last segment.
enum class MtldMode {
  standard,  // partial factor (1 - TTR) / (1 - h) for the remainder
  strict,    // remainder ignored
};

std::string_view mtld_mode_name(MtldMode m);
MtldMode parse_mtld_mode(std::string_view text);

struct ModelConfig {
  Variant variant = Variant::dlvgen;
  std::size_t d_latent = 16;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t vocab_size = 1000;  // upper bound; the built vocabulary may be smaller
  std::size_t max_len = 128;

  std::size_t ff_dim() const { return 4 * d_model; }
};

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 16;
  std::size_t epochs = 20;
  double lambda_r = 0.5;
  double lambda_p = 1.0;
  double kl_warmup_epochs = 2.0;  // 0 disables warm-up
  latent::PrecisionForm reg_p_form = latent::PrecisionForm::elementwise;
  // +1 adds R_r and R_p to the minimized loss; -1 subtracts them.
  double reg_sign = 1.0;
  double clip_norm = 5.0;
  std::size_t early_stop_patience = 3;
};

struct SelectionConfig {
  double h = 0.72;
  std::size_t w = 4;
  std::size_t n_candidates = 3;
  std::size_t beam = 3;
  std::size_t max_response_len = 32;
  MtldMode mtld_mode = MtldMode::standard;
};

struct CorpusConfig {
  std::size_t n_personas = 20;
  std::size_t n_dialogues = 2000;
};

// Output locations. The `paths` key sets all of them under one directory;
// the paths.* keys set them one by one.
struct PathConfig {
  std::filesystem::path root = "out";
  std::filesystem::path corpus = "out/corpus";
  std::filesystem::path checkpoint = "out/model.ckpt";
  std::filesystem::path log = "out/train.log";
  std::filesystem::path report = "out/report";
  std::filesystem::path output = "out/generated.tsv";

  static PathConfig under(const std::filesystem::path& root);
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Run configuration. Text form: one `key = value` per line, `#` starts a
// comment. Keys are listed by Config::keys().
struct Config {
  ModelConfig model;
  TrainConfig train;
  SelectionConfig select;
  CorpusConfig corpus;
  PathConfig paths;
  ServeConfig serve;
  std::uint64_t seed = 1;

  // Throws ParseError for an unknown key or malformed value.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  static const std::vector<std::string>& keys();
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);
  // Canonical text with every key, in keys() order.
  std::string to_text() const;
};

}  // namespace dlvgen
