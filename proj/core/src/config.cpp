#include "dlvgen/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dlvgen/errors.hpp"

namespace dlvgen {
namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("invalid value '" + std::string(value) + "' for key " + std::string(key));
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  // from_chars for double is unavailable on some toolchains.
  std::string s(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParseError("invalid value '" + s + "' for key " + std::string(key));
  return out;
}

std::size_t parse_positive(std::string_view key, std::string_view value) {
  const auto n = parse_number<std::size_t>(key, value);
  if (n == 0) throw ParseError("key " + std::string(key) + " must be positive");
  return n;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::plain: return "plain";
    case Variant::cvae: return "cvae";
    case Variant::dlvgen: return "dlvgen";
  }
  return "dlvgen";
}

Variant parse_variant(std::string_view text) {
  if (text == "plain") return Variant::plain;
  if (text == "cvae") return Variant::cvae;
  if (text == "dlvgen") return Variant::dlvgen;
  throw ParseError("unknown variant '" + std::string(text) + "' (expected plain|cvae|dlvgen)");
}

std::string_view mtld_mode_name(MtldMode m) { return m == MtldMode::standard ? "standard" : "strict"; }

MtldMode parse_mtld_mode(std::string_view text) {
  if (text == "standard") return MtldMode::standard;
  if (text == "strict") return MtldMode::strict;
  throw ParseError("unknown mtld_mode '" + std::string(text) + "' (expected standard|strict)");
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> all = {
      "variant",         "d_latent",     "d_model",         "layers",        "heads",
      "vocab_size",      "max_len",      "lr",              "batch",         "epochs",
      "lambda_r",        "lambda_p",     "kl_warmup_epochs", "reg_p_form",   "reg_sign",
      "h",               "w",            "mtld_mode",       "n_candidates",  "beam",
      "n_personas",      "n_dialogues",  "seed",            "host",          "port",
      "paths",           "paths.corpus",    "paths.checkpoint", "paths.log",   "paths.report",  "paths.output",
  };
  return all;
}

void Config::set(std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  if (key == "variant") {
    model.variant = parse_variant(value);
  } else if (key == "d_latent") {
    model.d_latent = parse_positive(key, value);
  } else if (key == "d_model") {
    model.d_model = parse_positive(key, value);
  } else if (key == "layers") {
    model.layers = parse_positive(key, value);
  } else if (key == "heads") {
    model.heads = parse_positive(key, value);
  } else if (key == "vocab_size") {
    model.vocab_size = parse_positive(key, value);
  } else if (key == "max_len") {
    model.max_len = parse_positive(key, value);
  } else if (key == "lr") {
    train.lr = parse_double(key, value);
  } else if (key == "batch") {
    train.batch = parse_positive(key, value);
  } else if (key == "epochs") {
    train.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "lambda_r") {
    train.lambda_r = parse_double(key, value);
  } else if (key == "lambda_p") {
    train.lambda_p = parse_double(key, value);
  } else if (key == "kl_warmup_epochs") {
    train.kl_warmup_epochs = parse_double(key, value);
  } else if (key == "reg_p_form") {
    train.reg_p_form = latent::parse_precision_form(value);
  } else if (key == "reg_sign") {
    const double s = parse_double(key, value);
    if (s != 1.0 && s != -1.0) throw ParseError("reg_sign must be 1 or -1");
    train.reg_sign = s;
  } else if (key == "h") {
    select.h = parse_double(key, value);
    if (!(select.h > 0.0 && select.h < 1.0)) throw ParseError("h must lie in (0, 1)");
  } else if (key == "w") {
    select.w = parse_positive(key, value);
  } else if (key == "mtld_mode") {
    select.mtld_mode = parse_mtld_mode(value);
  } else if (key == "n_candidates") {
    select.n_candidates = parse_positive(key, value);
  } else if (key == "beam") {
    select.beam = parse_positive(key, value);
  } else if (key == "n_personas") {
    corpus.n_personas = parse_positive(key, value);
  } else if (key == "n_dialogues") {
    corpus.n_dialogues = parse_positive(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "host") {
    serve.host = std::string(value);
  } else if (key == "port") {
    serve.port = parse_number<int>(key, value);
  } else if (key == "paths") {
    paths = PathConfig::under(std::string(value));
  } else if (key == "paths.corpus") {
    paths.corpus = std::string(value);
  } else if (key == "paths.checkpoint") {
    paths.checkpoint = std::string(value);
  } else if (key == "paths.log") {
    paths.log = std::string(value);
  } else if (key == "paths.report") {
    paths.report = std::string(value);
  } else if (key == "paths.output") {
    paths.output = std::string(value);
  } else {
    throw ParseError("unknown config key '" + std::string(key) + "'");
  }
}

std::string Config::get(std::string_view key) const {
  if (key == "variant") return std::string(variant_name(model.variant));
  if (key == "d_latent") return std::to_string(model.d_latent);
  if (key == "d_model") return std::to_string(model.d_model);
  if (key == "layers") return std::to_string(model.layers);
  if (key == "heads") return std::to_string(model.heads);
  if (key == "vocab_size") return std::to_string(model.vocab_size);
  if (key == "max_len") return std::to_string(model.max_len);
  if (key == "lr") return format_double(train.lr);
  if (key == "batch") return std::to_string(train.batch);
  if (key == "epochs") return std::to_string(train.epochs);
  if (key == "lambda_r") return format_double(train.lambda_r);
  if (key == "lambda_p") return format_double(train.lambda_p);
  if (key == "kl_warmup_epochs") return format_double(train.kl_warmup_epochs);
  if (key == "reg_p_form") return std::string(latent::precision_form_name(train.reg_p_form));
  if (key == "reg_sign") return format_double(train.reg_sign);
  if (key == "h") return format_double(select.h);
  if (key == "w") return std::to_string(select.w);
  if (key == "mtld_mode") return std::string(mtld_mode_name(select.mtld_mode));
  if (key == "n_candidates") return std::to_string(select.n_candidates);
  if (key == "beam") return std::to_string(select.beam);
  if (key == "n_personas") return std::to_string(corpus.n_personas);
  if (key == "n_dialogues") return std::to_string(corpus.n_dialogues);
  if (key == "seed") return std::to_string(seed);
  if (key == "host") return serve.host;
  if (key == "port") return std::to_string(serve.port);
  if (key == "paths") return paths.root.string();
  if (key == "paths.corpus") return paths.corpus.string();
  if (key == "paths.checkpoint") return paths.checkpoint.string();
  if (key == "paths.log") return paths.log.string();
  if (key == "paths.report") return paths.report.string();
  if (key == "paths.output") return paths.output.string();
  throw ParseError("unknown config key '" + std::string(key) + "'");
}

PathConfig PathConfig::under(const std::filesystem::path& root) {
  PathConfig p;
  p.root = root;
  p.corpus = root / "corpus";
  p.checkpoint = root / "model.ckpt";
  p.log = root / "train.log";
  p.report = root / "report";
  p.output = root / "generated.tsv";
  return p;
}

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& key : keys()) out += key + " = " + get(key) + "\n";
  return out;
}

}  // namespace dlvgen
