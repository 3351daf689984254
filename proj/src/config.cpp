#include "lada/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "lada/csv.hpp"
#include "lada/error.hpp"

namespace lada {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* want) {
  throw ConfigError("config: " + std::string(key) + " = '" + std::string(value) + "' is not " + want);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "a number");
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  std::string s(v);
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, v, "a boolean");
}

std::vector<int> to_int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  std::string item;
  std::istringstream in{std::string(v)};
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(to_int<int>(key, t));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"data.path", [](RunConfig& c, auto, auto v) { c.data_path = std::string(v); }},
      {"data.classes", [](RunConfig& c, auto k, auto v) { c.synth.num_classes = to_int<int>(k, v); }},
      {"data.dim", [](RunConfig& c, auto k, auto v) { c.synth.dim = to_int<int>(k, v); }},
      {"data.samples_per_class",
       [](RunConfig& c, auto k, auto v) { c.synth.samples_per_class = to_int<int>(k, v); }},
      {"data.class_radius", [](RunConfig& c, auto k, auto v) { c.synth.class_radius = to_double(k, v); }},
      {"data.within_std", [](RunConfig& c, auto k, auto v) { c.synth.within_std = to_double(k, v); }},
      {"data.rotation", [](RunConfig& c, auto k, auto v) { c.synth.rotation = to_double(k, v); }},
      {"data.translation", [](RunConfig& c, auto k, auto v) { c.synth.translation = to_double(k, v); }},
      {"data.covariance_ratio",
       [](RunConfig& c, auto k, auto v) { c.synth.covariance_ratio = to_double(k, v); }},
      {"data.rsut_gamma", [](RunConfig& c, auto k, auto v) { c.synth.rsut_gamma = to_double(k, v); }},
      {"data.perturb_u", [](RunConfig& c, auto k, auto v) { c.perturb_u = to_double(k, v); }},
      {"data.kind",
       [](RunConfig& c, auto k, auto v) {
         if (v == "standard") {
           c.dataset_kind = DatasetKind::Standard;
         } else if (v == "huge") {
           c.dataset_kind = DatasetKind::HugePerClass;
         } else {
           bad(k, v, "standard or huge");
         }
       }},
      {"selection.criterion", [](RunConfig& c, auto, auto v) { c.criterion = parse_criterion(v); }},
      {"selection.budget", [](RunConfig& c, auto k, auto v) { c.budget = to_double(k, v); }},
      {"selection.rounds", [](RunConfig& c, auto k, auto v) { c.rounds = to_int<int>(k, v); }},
      {"selection.query_epochs", [](RunConfig& c, auto k, auto v) { c.query_epochs = to_int_list(k, v); }},
      {"selection.query_spacing", [](RunConfig& c, auto k, auto v) { c.query_spacing = to_int<int>(k, v); }},
      {"selection.k", [](RunConfig& c, auto k, auto v) { c.knn_k = to_int<std::size_t>(k, v); }},
      {"train.learning_rate", [](RunConfig& c, auto k, auto v) { c.train.learning_rate = to_double(k, v); }},
      {"train.momentum", [](RunConfig& c, auto k, auto v) { c.train.momentum = to_double(k, v); }},
      {"train.batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = to_int<std::size_t>(k, v); }},
      {"train.mix_beta_a", [](RunConfig& c, auto k, auto v) { c.train.mix_beta_a = to_double(k, v); }},
      {"train.mix_beta_b", [](RunConfig& c, auto k, auto v) { c.train.mix_beta_b = to_double(k, v); }},
      {"train.pretrain_epochs", [](RunConfig& c, auto k, auto v) { c.pretrain_epochs = to_int<int>(k, v); }},
      {"train.adapt_epochs", [](RunConfig& c, auto k, auto v) { c.adapt_epochs = to_int<int>(k, v); }},
      {"train.iterations_per_epoch",
       [](RunConfig& c, auto k, auto v) { c.iterations_per_epoch = to_int<std::size_t>(k, v); }},
      {"train.hidden_dim", [](RunConfig& c, auto k, auto v) { c.hidden_dim = to_int<int>(k, v); }},
      {"paa.mode", [](RunConfig& c, auto, auto v) { c.paa.mode = parse_paa_mode(v); }},
      {"paa.tau", [](RunConfig& c, auto k, auto v) { c.paa.confidence_threshold = to_double(k, v); }},
      {"paa.k", [](RunConfig& c, auto k, auto v) { c.paa.k = to_int<std::size_t>(k, v); }},
      {"paa.noise_scale", [](RunConfig& c, auto k, auto v) { c.paa.noise_scale = to_double(k, v); }},
      {"paa.dropout", [](RunConfig& c, auto k, auto v) { c.paa.dropout = to_double(k, v); }},
      {"ablation.div_sel", [](RunConfig& c, auto k, auto v) { c.ablation.div_sel = to_bool(k, v); }},
      {"ablation.anchor_aug", [](RunConfig& c, auto k, auto v) { c.ablation.anchor_aug = to_bool(k, v); }},
      {"ablation.mixup_aug", [](RunConfig& c, auto k, auto v) { c.ablation.mixup_aug = to_bool(k, v); }},
      {"ablation.cbr", [](RunConfig& c, auto k, auto v) { c.ablation.cbr = to_bool(k, v); }},
      {"run.seed", [](RunConfig& c, auto k, auto v) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"run.out", [](RunConfig& c, auto, auto v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (data_path.empty()) {
    SynthConfig probe = synth;
    if (probe.num_classes < 2 || probe.dim < 2 || probe.samples_per_class < 1) {
      throw ConfigError("config: synthetic data needs classes >= 2, dim >= 2, samples_per_class >= 1");
    }
    for (double v : {probe.class_radius, probe.within_std, probe.translation, probe.covariance_ratio}) {
      if (!std::isfinite(v) || v < 0.0) throw ConfigError("config: synthetic magnitudes must be >= 0");
    }
    if (!(probe.rsut_gamma >= 1.0)) throw ConfigError("config: data.rsut_gamma must be >= 1");
  }
  if (!(perturb_u >= 0.0) || !std::isfinite(perturb_u)) throw ConfigError("config: data.perturb_u must be >= 0");
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("config: selection.budget must be in (0, 1]");
  if (rounds < 1) throw ConfigError("config: selection.rounds must be >= 1");
  if (!query_epochs.empty()) {
    if (query_epochs.size() != static_cast<std::size_t>(rounds)) {
      throw ConfigError("config: selection.query_epochs needs one epoch per round");
    }
    for (std::size_t i = 0; i < query_epochs.size(); ++i) {
      if (query_epochs[i] < pretrain_epochs) {
        throw ConfigError("config: query epochs must not fall inside pretraining");
      }
      if (i && query_epochs[i] <= query_epochs[i - 1]) {
        throw ConfigError("config: query epochs must be strictly increasing");
      }
    }
  }
  if (query_spacing < 1) throw ConfigError("config: selection.query_spacing must be >= 1");
  if (knn_k < 1) throw ConfigError("config: selection.k must be >= 1");
  if (pretrain_epochs < 0 || adapt_epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (hidden_dim < 0) throw ConfigError("config: train.hidden_dim must be >= 0");
  const int last_query = query_epochs.empty() ? pretrain_epochs + query_spacing * (rounds - 1)
                                              : query_epochs.back();
  if (last_query >= pretrain_epochs + adapt_epochs) {
    throw ConfigError("config: the last query epoch falls after the final epoch");
  }
  train.validate();
  paa.validate();
}

RunConfig RunConfig::effective() const {
  RunConfig c = *this;
  if (c.paa.mode == PaaMode::Off) c.ablation.anchor_aug = false;
  if (!c.ablation.anchor_aug) {
    c.ablation.mixup_aug = false;
    c.paa.mode = PaaMode::Off;
  }
  c.paa.class_balance = c.ablation.cbr;
  if (c.criterion == Criterion::Las && !c.ablation.div_sel) c.criterion = Criterion::LasNoDiv;
  if (c.query_epochs.empty()) {
    for (int r = 0; r < c.rounds; ++r) c.query_epochs.push_back(c.pretrain_epochs + c.query_spacing * r);
  }
  return c;
}

void set_option(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + std::string(key) + "'");
  it->second(cfg, key, value);
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto cut = raw.find_first_of("#;");
    auto line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config: line " + std::to_string(lineno) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

void apply_options(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) set_option(cfg, k, v);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  apply_options(cfg, parse_key_values(text));
  return cfg;
}

std::string dump_config(const RunConfig& c) {
  auto num = [](double v) { return csv_number(v); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  std::ostringstream o;
  o << "[data]\n";
  if (!c.data_path.empty()) o << "path = " << c.data_path << '\n';
  o << "classes = " << c.synth.num_classes << "\ndim = " << c.synth.dim
    << "\nsamples_per_class = " << c.synth.samples_per_class << "\nclass_radius = " << num(c.synth.class_radius)
    << "\nwithin_std = " << num(c.synth.within_std) << "\nrotation = " << num(c.synth.rotation)
    << "\ntranslation = " << num(c.synth.translation) << "\ncovariance_ratio = " << num(c.synth.covariance_ratio)
    << "\nrsut_gamma = " << num(c.synth.rsut_gamma) << "\nperturb_u = " << num(c.perturb_u)
    << "\nkind = " << (c.dataset_kind == DatasetKind::Standard ? "standard" : "huge") << "\n\n";
  o << "[selection]\ncriterion = " << criterion_name(c.criterion) << "\nbudget = " << num(c.budget)
    << "\nrounds = " << c.rounds << '\n';
  if (!c.query_epochs.empty()) {
    o << "query_epochs = ";
    for (std::size_t i = 0; i < c.query_epochs.size(); ++i) o << (i ? "," : "") << c.query_epochs[i];
    o << '\n';
  }
  o << "query_spacing = " << c.query_spacing << "\nk = " << c.knn_k << "\n\n";
  o << "[train]\nlearning_rate = " << num(c.train.learning_rate) << "\nmomentum = " << num(c.train.momentum)
    << "\nbatch_size = " << c.train.batch_size << "\nmix_beta_a = " << num(c.train.mix_beta_a)
    << "\nmix_beta_b = " << num(c.train.mix_beta_b) << "\npretrain_epochs = " << c.pretrain_epochs
    << "\nadapt_epochs = " << c.adapt_epochs << "\niterations_per_epoch = " << c.iterations_per_epoch
    << "\nhidden_dim = " << c.hidden_dim << "\n\n";
  o << "[paa]\nmode = " << paa_mode_name(c.paa.mode) << "\ntau = " << num(c.paa.confidence_threshold)
    << "\nk = " << c.paa.k << "\nnoise_scale = " << num(c.paa.noise_scale) << "\ndropout = " << num(c.paa.dropout)
    << "\n\n";
  o << "[ablation]\ndiv_sel = " << flag(c.ablation.div_sel) << "\nanchor_aug = " << flag(c.ablation.anchor_aug)
    << "\nmixup_aug = " << flag(c.ablation.mixup_aug) << "\ncbr = " << flag(c.ablation.cbr) << "\n\n";
  o << "[run]\nseed = " << c.seed << "\nout = " << c.out_dir << '\n';
  return o.str();
}

}  // namespace lada
