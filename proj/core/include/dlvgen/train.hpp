#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlvgen/config.hpp"
#include "dlvgen/graph.hpp"
#include "dlvgen/model.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen::train {

// Loss components as they enter the minimized total. KL terms already carry
// the warm-up weight and regularizers the configured sign, so the total is
// always their plain sum.
struct LossBreakdown {
  double recon_nll = 0.0;
  double kl_persona = 0.0;
  double kl_response = 0.0;
  double bow_nll = 0.0;
  double reg_r = 0.0;
  double reg_p = 0.0;
  double total = 0.0;

  double component_sum() const { return recon_nll + kl_persona + kl_response + bow_nll + reg_r + reg_p; }
  LossBreakdown& operator+=(const LossBreakdown& o);
  LossBreakdown scaled(double factor) const;

  static const std::vector<std::string>& field_names();
  std::vector<double> fields() const;
};

struct LossSettings {
  double kl_weight = 1.0;
  double lambda_r = 0.5;
  double lambda_p = 1.0;
  latent::PrecisionForm reg_p_form = latent::PrecisionForm::elementwise;
  double reg_sign = 1.0;

  static LossSettings from(const TrainConfig& config, double kl_weight = 1.0);
};

struct BatchLoss {
  Var total;
  LossBreakdown values;
};

// Batch-mean objective for the model's variant. Latents come from the
// recognition networks with noise drawn from `noise` (persona, then response,
// per example in batch order). plain: reconstruction only; cvae: response
// latent only with z_p fixed at 0; dlvgen: both latents. Regularizers use the
// prior networks' log-variances. Throws NumericError naming the first
// non-finite component.
BatchLoss compute_loss(Graph& g, const DialogueModel& model, std::span<const EncodedExample* const> batch,
                       const LossSettings& settings, Rng& noise);

// Mean breakdown over a data set without gradient tracking, full KL weight
// and a noise stream fixed by `seed`.
LossBreakdown evaluate_loss(const DialogueModel& model, std::span<const EncodedExample> data,
                            const LossSettings& settings, std::uint64_t seed, std::size_t batch = 64);

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the untrained model
  double kl_weight = 0.0;  // weight at the last step of the epoch
  LossBreakdown train;     // mean over the epoch's steps (absent for epoch 0)
  LossBreakdown test;
  double seconds = 0.0;
};

struct TrainHooks {
  std::ostream* log = nullptr;  // tab-separated, one line per epoch
  std::optional<std::filesystem::path> checkpoint;  // rewritten after each epoch
  // Called after each epoch (including epoch 0); returning false stops training.
  std::function<bool(const EpochRecord&)> on_epoch;
};

enum class StopReason { completed, early_stop, callback };

struct TrainResult {
  std::vector<EpochRecord> epochs;
  StopReason stop = StopReason::completed;
};

std::string log_header();
std::string log_line(const EpochRecord& record);

// Adam on shuffled mini-batches with global-norm clipping and a linear KL
// warm-up over the first kl_warmup_epochs. Test loss is measured before
// training and after every epoch; training stops early once test recon_nll
// has risen early_stop_patience epochs in a row. Throws NumericError when an
// epoch's mean total exceeds 10x the first epoch's.
TrainResult train_model(DialogueModel& model, const Config& config, std::span<const EncodedExample> train_set,
                        std::span<const EncodedExample> test_set, const TrainHooks& hooks = {});

std::vector<EncodedExample> encode_all(const DialogueModel& model, std::span<const DialogueExample> examples);

}  // namespace dlvgen::train
