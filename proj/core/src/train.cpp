#include "dlvgen/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dlvgen/errors.hpp"
#include "dlvgen/ops.hpp"
#include "dlvgen/optim.hpp"

namespace dlvgen::train {
namespace {

constexpr std::uint64_t kShuffleStream = 0x5a0f;
constexpr std::uint64_t kNoiseStream = 0x4015;
constexpr std::uint64_t kEvalStream = 0xe7a1;

struct ExampleTerms {
  Var recon;
  std::optional<Var> kl_p, kl_r, bow, reg_r, reg_p;
};

ExampleTerms example_terms(Graph& g, const DialogueModel& model, const EncodedExample& ex,
                           const LossSettings& s, Rng& noise) {
  if (ex.response.empty()) throw ContractError("compute_loss: empty response");
  const auto& dec = model.decoder();
  std::vector<seq::TokenId> targets(ex.response);
  targets.push_back(seq::kEos);

  ExampleTerms t;
  if (model.variant() == Variant::plain) {
    t.recon = log_softmax_nll(dec.forward_logits(g, ex.context, ex.response), targets);
    return t;
  }

  const std::size_t d = model.config().d_latent;
  const Var x = dec.encode_sequence(g, ex.context);
  const Var y = dec.encode_sequence(g, ex.response);
  const auto prior_r = latent::gaussian_from_net(model.response_prior(), x);
  const auto recog_r = latent::gaussian_from_net(model.response_recognition(), x, y);

  Var z_p = g.constant(Tensor({d}));
  if (model.variant() == Variant::dlvgen) {
    const Var xp = dec.encode_sequence(g, ex.persona_view);
    const Var p = dec.encode_sequence(g, ex.persona);
    const auto prior_p = latent::gaussian_from_net(model.persona_prior(), xp);
    const auto recog_p = latent::gaussian_from_net(model.persona_recognition(), xp, p);
    z_p = latent::reparameterize(recog_p, noise);
    t.kl_p = latent::kl_diag_gaussian(recog_p, prior_p);
    t.reg_p = latent::variance_reg_p(prior_p.log_var, s.lambda_p, s.reg_p_form);
  }
  const Var z_r = latent::reparameterize(recog_r, noise);
  t.kl_r = latent::kl_diag_gaussian(recog_r, prior_r);
  t.reg_r = latent::variance_reg_r(prior_r.log_var, s.lambda_r);
  t.bow = bow_loss(model.bow(), z_p, z_r, ex.response);
  t.recon = log_softmax_nll(dec.forward_logits(g, ex.context, ex.response, dec.inject_latent(z_p, z_r)), targets);
  return t;
}

void accumulate(std::optional<Var>& acc, const std::optional<Var>& term) {
  if (!term) return;
  acc = acc ? add(*acc, *term) : *term;
}

void require_finite(double value, const char* component) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string("non-finite ") + component + " in training loss");
  }
}

}  // namespace

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& o) {
  recon_nll += o.recon_nll;
  kl_persona += o.kl_persona;
  kl_response += o.kl_response;
  bow_nll += o.bow_nll;
  reg_r += o.reg_r;
  reg_p += o.reg_p;
  total += o.total;
  return *this;
}

LossBreakdown LossBreakdown::scaled(double f) const {
  return {recon_nll * f, kl_persona * f, kl_response * f, bow_nll * f, reg_r * f, reg_p * f, total * f};
}

const std::vector<std::string>& LossBreakdown::field_names() {
  static const std::vector<std::string> names{"recon_nll", "kl_persona", "kl_response", "bow_nll",
                                              "reg_r",     "reg_p",      "total"};
  return names;
}

std::vector<double> LossBreakdown::fields() const {
  return {recon_nll, kl_persona, kl_response, bow_nll, reg_r, reg_p, total};
}

LossSettings LossSettings::from(const TrainConfig& c, double kl_weight) {
  LossSettings s;
  s.kl_weight = kl_weight;
  s.lambda_r = c.lambda_r;
  s.lambda_p = c.lambda_p;
  s.reg_p_form = c.reg_p_form;
  s.reg_sign = c.reg_sign;
  return s;
}

BatchLoss compute_loss(Graph& g, const DialogueModel& model, std::span<const EncodedExample* const> batch,
                       const LossSettings& s, Rng& noise) {
  if (batch.empty()) throw ContractError("compute_loss: empty batch");
  std::optional<Var> recon, kl_p, kl_r, bow, reg_r, reg_p;
  for (const auto* ex : batch) {
    auto t = example_terms(g, model, *ex, s, noise);
    accumulate(recon, t.recon);
    accumulate(kl_p, t.kl_p);
    accumulate(kl_r, t.kl_r);
    accumulate(bow, t.bow);
    accumulate(reg_r, t.reg_r);
    accumulate(reg_p, t.reg_p);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  BatchLoss out;
  Var total = scale(*recon, inv);
  out.values.recon_nll = total.item();
  auto add_term = [&](const std::optional<Var>& term, double factor, double& slot) {
    if (!term) return;
    const Var v = scale(*term, factor * inv);
    slot = v.item();
    total = add(total, v);
  };
  add_term(kl_p, s.kl_weight, out.values.kl_persona);
  add_term(kl_r, s.kl_weight, out.values.kl_response);
  add_term(bow, 1.0, out.values.bow_nll);
  add_term(reg_r, s.reg_sign, out.values.reg_r);
  add_term(reg_p, s.reg_sign, out.values.reg_p);
  out.total = total;
  out.values.total = total.item();

  require_finite(out.values.recon_nll, "recon_nll");
  require_finite(out.values.kl_persona, "kl_persona");
  require_finite(out.values.kl_response, "kl_response");
  require_finite(out.values.bow_nll, "bow_nll");
  require_finite(out.values.reg_r, "reg_r");
  require_finite(out.values.reg_p, "reg_p");
  require_finite(out.values.total, "total");
  return out;
}

LossBreakdown evaluate_loss(const DialogueModel& model, std::span<const EncodedExample> data,
                            const LossSettings& settings, std::uint64_t seed, std::size_t batch) {
  if (data.empty()) throw ContractError("evaluate_loss: empty data set");
  if (batch == 0) batch = data.size();
  Rng noise(derive_seed(seed, kEvalStream));
  LossBreakdown sum;
  for (std::size_t start = 0; start < data.size(); start += batch) {
    const std::size_t count = std::min(batch, data.size() - start);
    std::vector<const EncodedExample*> ptrs;
    for (std::size_t i = 0; i < count; ++i) ptrs.push_back(&data[start + i]);
    Graph g(false);
    sum += compute_loss(g, model, ptrs, settings, noise).values.scaled(static_cast<double>(count));
  }
  return sum.scaled(1.0 / static_cast<double>(data.size()));
}

std::string log_header() {
  std::ostringstream out;
  out << "epoch\tkl_weight";
  for (const char* split : {"train", "test"}) {
    for (const auto& f : LossBreakdown::field_names()) out << '\t' << split << '.' << f;
  }
  out << "\tseconds";
  return out.str();
}

std::string log_line(const EpochRecord& r) {
  std::ostringstream out;
  out.precision(9);
  out << r.epoch << '\t' << r.kl_weight;
  for (double v : r.train.fields()) out << '\t' << v;
  for (double v : r.test.fields()) out << '\t' << v;
  out.precision(3);
  out << '\t' << std::fixed << r.seconds;
  return out.str();
}

TrainResult train_model(DialogueModel& model, const Config& config, std::span<const EncodedExample> train_set,
                        std::span<const EncodedExample> test_set, const TrainHooks& hooks) {
  if (train_set.empty()) throw ContractError("train_model: empty training set");
  if (test_set.empty()) throw ContractError("train_model: empty test set");
  const auto& tc = config.train;
  if (tc.batch == 0) throw ContractError("train_model: batch must be positive");

  using Clock = std::chrono::steady_clock;
  auto params = model.params().all();
  AdamState adam = AdamState::for_params(params);
  AdamSettings adam_settings;
  adam_settings.lr = tc.lr;
  Rng shuffler(derive_seed(config.seed, kShuffleStream));
  Rng noise(derive_seed(config.seed, kNoiseStream));

  const std::size_t steps_per_epoch = (train_set.size() + tc.batch - 1) / tc.batch;
  const double warmup_steps = tc.kl_warmup_epochs * static_cast<double>(steps_per_epoch);
  const LossSettings eval_settings = LossSettings::from(tc, 1.0);

  TrainResult result;
  auto finish_epoch = [&](EpochRecord rec, Clock::time_point started) {
    rec.test = evaluate_loss(model, test_set, eval_settings, config.seed);
    rec.seconds = std::chrono::duration<double>(Clock::now() - started).count();
    if (hooks.log) *hooks.log << log_line(rec) << '\n' << std::flush;
    if (hooks.checkpoint && rec.epoch > 0) write_checkpoint(*hooks.checkpoint, model.to_checkpoint(config));
    result.epochs.push_back(rec);
    return !hooks.on_epoch || hooks.on_epoch(rec);
  };

  if (hooks.log) *hooks.log << log_header() << '\n';
  if (!finish_epoch(EpochRecord{}, Clock::now())) {
    result.stop = StopReason::callback;
    return result;
  }

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  std::size_t rises = 0;
  double first_total = 0.0;
  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    const auto started = Clock::now();
    shuffler.shuffle(order.begin(), order.end());
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += tc.batch) {
      const std::size_t count = std::min(tc.batch, order.size() - start);
      std::vector<const EncodedExample*> batch;
      for (std::size_t i = 0; i < count; ++i) batch.push_back(&train_set[order[start + i]]);
      rec.kl_weight = warmup_steps > 0 ? std::min(1.0, static_cast<double>(step) / warmup_steps) : 1.0;

      model.params().zero_grad();
      Graph g;
      const auto loss = compute_loss(g, model, batch, LossSettings::from(tc, rec.kl_weight), noise);
      g.backward(loss.total);
      clip_grad_norm(params, tc.clip_norm);
      adam_step(params, adam, adam_settings);
      rec.train += loss.values.scaled(static_cast<double>(count));
      ++step;
    }
    rec.train = rec.train.scaled(1.0 / static_cast<double>(order.size()));

    if (epoch == 1) first_total = std::abs(rec.train.total);
    const bool diverged = epoch > 1 && rec.train.total > 10.0 * first_total;
    const double previous_recon = result.epochs.back().test.recon_nll;
    const bool keep_going = finish_epoch(rec, started);
    if (diverged) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": total " +
                         std::to_string(rec.train.total) + " exceeds 10x the first epoch's " +
                         std::to_string(first_total));
    }
    if (!keep_going) {
      result.stop = StopReason::callback;
      break;
    }
    rises = result.epochs.back().test.recon_nll > previous_recon ? rises + 1 : 0;
    if (tc.early_stop_patience > 0 && rises >= tc.early_stop_patience) {
      result.stop = StopReason::early_stop;
      break;
    }
  }
  return result;
}

std::vector<EncodedExample> encode_all(const DialogueModel& model, std::span<const DialogueExample> examples) {
  std::vector<EncodedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(model.encode(ex));
  return out;
}

}  // namespace dlvgen::train
