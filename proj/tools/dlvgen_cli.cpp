// dlvgen command-line front end: corpus, train, eval, generate, chat, serve.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>

#include "dlvgen/checkpoint.hpp"
#include "dlvgen/config.hpp"
#include "dlvgen/corpus.hpp"
#include "dlvgen/errors.hpp"
#include "dlvgen/generate.hpp"
#include "dlvgen/model.hpp"
#include "dlvgen/report.hpp"
#include "dlvgen/serve.hpp"
#include "dlvgen/train.hpp"

namespace {

using namespace dlvgen;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFile = 3;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

Config load_config(const std::string& path, const std::vector<std::string>& extras) {
  Config cfg;
  if (!path.empty()) {
    if (!std::filesystem::exists(path)) throw FileError("config file not found: " + path);
    cfg = Config::load(path);
  }
  for (const auto& arg : extras) {
    const auto eq = arg.find('=');
    if (!arg.starts_with("--") || eq == std::string::npos) {
      throw UsageError("unexpected argument '" + arg + "' (overrides take the form --key=value)");
    }
    try {
      cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1));
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
  }
  return cfg;
}

void ensure_parent(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + p.string());
  out << text;
}

corpus::LoadedCorpus load_corpus_dir(const Config& cfg) {
  if (!std::filesystem::exists(cfg.paths.corpus / "train.txt")) {
    throw FileError("no corpus at " + cfg.paths.corpus.string() + " (run `dlvgen corpus` first)");
  }
  return corpus::load_corpus(cfg.paths.corpus);
}

DialogueModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileError("checkpoint not found: " + path.string());
  return DialogueModel::load(path);
}

int cmd_corpus(const Config& cfg) {
  const auto c = corpus::generate_corpus(cfg.corpus.n_personas, cfg.corpus.n_dialogues, cfg.seed);
  corpus::write_corpus(cfg.paths.corpus, c);
  std::cout << "wrote " << c.train.size() << " train and " << c.test.size() << " test dialogues ("
            << c.personas.size() << " personas, " << c.test_personas << " held out) to " << cfg.paths.corpus.string()
            << '\n';
  return 0;
}

int cmd_train(const Config& cfg) {
  const auto data = load_corpus_dir(cfg);
  DialogueModel model(cfg.model, corpus::build_vocab(data.train, cfg.model.vocab_size), cfg.seed);
  const auto train_set = train::encode_all(model, data.train);
  const auto test_set = train::encode_all(model, data.test);
  std::cout << variant_name(cfg.model.variant) << ": " << train_set.size() << " train / " << test_set.size()
            << " test examples, vocabulary " << model.vocab().size() << ", " << model.params().scalar_count()
            << " parameters\n";

  ensure_parent(cfg.paths.log);
  std::ofstream log(cfg.paths.log, std::ios::trunc);
  if (!log) throw FileError("cannot write " + cfg.paths.log.string());
  ensure_parent(cfg.paths.checkpoint);
  train::TrainHooks hooks;
  hooks.log = &log;
  hooks.checkpoint = cfg.paths.checkpoint;
  hooks.on_epoch = [](const train::EpochRecord& r) {
    std::cout << "epoch " << std::setw(2) << r.epoch << std::fixed << std::setprecision(4)
              << "  train total " << r.train.total << "  test recon " << r.test.recon_nll << "  test total "
              << r.test.total << std::setprecision(1) << "  (" << r.seconds << " s)\n"
              << std::defaultfloat << std::flush;
    return true;
  };
  if (cfg.train.epochs == 0) write_checkpoint(cfg.paths.checkpoint, model.to_checkpoint(cfg));
  const auto result = train::train_model(model, cfg, train_set, test_set, hooks);
  if (result.stop == train::StopReason::early_stop) std::cout << "stopped early: test recon_nll kept rising\n";
  std::cout << "checkpoint " << cfg.paths.checkpoint.string() << "\nlog " << cfg.paths.log.string() << '\n';
  return 0;
}

int cmd_eval(const Config& cfg, std::vector<std::string> checkpoints) {
  if (checkpoints.empty()) checkpoints.push_back(cfg.paths.checkpoint.string());
  const auto data = load_corpus_dir(cfg);
  if (data.test.empty()) throw ContractError("test set is empty");
  std::vector<eval::ModelEval> rows;
  for (const auto& path : checkpoints) {
    const auto model = load_model(path);
    std::cerr << "evaluating " << path << " (" << variant_name(model.variant()) << ") on " << data.test.size()
              << " contexts\n";
    const std::string label = checkpoints.size() > 1 ? std::filesystem::path(path).stem().string() : "";
    rows.push_back(eval::evaluate_model(model, data.test, data.personas, cfg.select, cfg.seed, label));
  }
  const auto table = eval::format_table(rows);
  std::cout << table;
  auto base = cfg.paths.report;
  write_file(base.string() + ".txt", table);
  write_file(base.string() + ".tsv", eval::format_tsv(rows));
  std::cout << "report " << base.string() << ".txt, " << base.string() << ".tsv\n";
  return 0;
}

int cmd_generate(const Config& cfg, const std::string& select, std::size_t limit) {
  const auto mode = serve::parse_select_mode(select);
  const auto model = load_model(cfg.paths.checkpoint);
  const auto data = load_corpus_dir(cfg);
  const std::size_t count = limit ? std::min(limit, data.test.size()) : data.test.size();
  GenerationSettings gen;
  gen.n = cfg.select.n_candidates;
  gen.beam = cfg.select.beam;
  gen.max_len = cfg.select.max_response_len;

  std::ostringstream out;
  out << "example\tcandidate\tselected\tmtld\tmattr\tcombined\ttext\n";
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(cfg.seed, 0xc0de0000ULL + i));
    auto set = generate_candidates(model, data.test[i].context, gen, rng);
    select_lexdiv(set, cfg.select);
    if (mode == serve::SelectMode::first) set.selected = 0;
    if (mode == serve::SelectMode::random) set.selected = rng.below(set.candidates.size());
    for (std::size_t c = 0; c < set.candidates.size(); ++c) {
      const auto& cand = set.candidates[c];
      out << i << '\t' << c << '\t' << (c == set.selected ? 1 : 0) << std::fixed << std::setprecision(6) << '\t'
          << cand.score.mtld << '\t' << cand.score.mattr << '\t' << cand.score.combined << std::defaultfloat << '\t'
          << cand.text << '\n';
    }
  }
  write_file(cfg.paths.output, out.str());
  std::cout << "wrote " << count << " x " << gen.n << " candidates to " << cfg.paths.output.string() << '\n';
  return 0;
}

int cmd_chat(const Config& cfg) {
  auto model = std::make_shared<const DialogueModel>(load_model(cfg.paths.checkpoint));
  serve::ChatService service(model, cfg.select, cfg.seed, file_hash(cfg.paths.checkpoint));
  const auto id = service.create_session();
  std::cout << "model " << variant_name(model->variant()) << ", " << cfg.select.n_candidates
            << " candidates per turn. Empty line or /quit ends the chat.\n";
  std::string line;
  while (std::cout << "you> " << std::flush, std::getline(std::cin, line)) {
    if (line.empty() || line == "/quit") break;
    serve::MessageRequest req;
    req.text = line;
    const auto reply = service.message(id, req);
    for (std::size_t i = 0; i < reply.candidates.candidates.size(); ++i) {
      const auto& c = reply.candidates.candidates[i];
      std::cout << (i == reply.candidates.selected ? " * " : "   ") << '[' << i << "] " << std::fixed
                << std::setprecision(3) << "mtld " << c.score.mtld << "  mattr " << c.score.mattr << "  combined "
                << c.score.combined << std::defaultfloat << "  " << c.text << '\n';
    }
    std::cout << "agent> " << reply.reply << '\n';
  }
  return 0;
}

int cmd_serve(const Config& cfg) {
  auto model = std::make_shared<const DialogueModel>(load_model(cfg.paths.checkpoint));
  serve::ChatService service(model, cfg.select, cfg.seed, file_hash(cfg.paths.checkpoint));
  serve::HttpServer server(service);
  const int port = server.start(cfg.serve.host, cfg.serve.port);
  std::cout << "serving " << variant_name(model->variant()) << " model on http://" << cfg.serve.host << ':' << port
            << '\n'
            << std::flush;
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DLVGen dual-latent persona dialogue generator"};
  app.require_subcommand(1);
  std::string config_path;

  auto* corpus_cmd = app.add_subcommand("corpus", "Generate the synthetic persona corpus");
  auto* train_cmd = app.add_subcommand("train", "Train a model on the corpus");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints on the test split and write a report");
  auto* gen_cmd = app.add_subcommand("generate", "Write candidate responses for test contexts");
  auto* chat_cmd = app.add_subcommand("chat", "Interactive chat in the terminal");
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP chat service");

  std::vector<std::string> checkpoints;
  eval_cmd->add_option("checkpoints", checkpoints, "Checkpoints to compare (default: paths.checkpoint)");
  std::string select = "lexdiv";
  std::size_t n = 0;
  std::size_t limit = 0;
  gen_cmd->add_option("--select", select, "lexdiv, first or random")->capture_default_str();
  gen_cmd->add_option("--n", n, "Candidates per context (overrides n_candidates)");
  gen_cmd->add_option("--limit", limit, "Only the first N test contexts");

  for (auto* sub : {corpus_cmd, train_cmd, eval_cmd, gen_cmd, chat_cmd, serve_cmd}) {
    sub->add_option("-c,--config", config_path, "Config file (key = value lines)");
    sub->allow_extras();
  }
  app.footer("Any config key can be overridden with --key=value, e.g. --seed=7 --variant=plain.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto* sub = app.get_subcommands().front();
    Config cfg = load_config(config_path, sub->remaining());
    if (sub == corpus_cmd) return cmd_corpus(cfg);
    if (sub == train_cmd) return cmd_train(cfg);
    if (sub == eval_cmd) return cmd_eval(cfg, checkpoints);
    if (sub == gen_cmd) {
      if (n) cfg.select.n_candidates = n;
      return cmd_generate(cfg, select, limit);
    }
    if (sub == chat_cmd) return cmd_chat(cfg);
    if (sub == serve_cmd) return cmd_serve(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const serve::ServiceError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FileError& e) {
    std::cerr << "file error: " << e.what() << '\n';
    return kExitFile;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
