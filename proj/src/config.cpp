#include "smor/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace smor::config {

using optim::ManifoldOptimizer;
using stiefel::MetricKind;
using stiefel::TransportKind;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

Index to_index(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<Index>(x);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  // range(left, right, count) or a comma list
  if (v.rfind("range(", 0) == 0 && v.back() == ')') {
    const auto parts = split(v.substr(6, v.size() - 7), ',');
    if (parts.size() != 3) throw ConfigError(key + ": range needs 3 arguments");
    return linspace(to_double(key, parts[0]), to_double(key, parts[1]),
                    to_index(key, parts[2]));
  }
  std::vector<double> out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(key, p));
  return out;
}

std::vector<Index> to_indices(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  if (v.find(':') != std::string::npos) {
    const auto parts = split(v, ':');
    if (parts.size() != 2) throw ConfigError(key + ": use lo:hi");
    for (Index i = to_index(key, parts[0]); i <= to_index(key, parts[1]); ++i)
      out.push_back(i);
    return out;
  }
  for (const auto& p : split(v, ',')) out.push_back(to_index(key, p));
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += f(v[i]);
  }
  return out;
}

}  // namespace

std::vector<double> linspace(double left, double right, Index count) {
  if (count < 1) throw ConfigError("linspace: count must be positive");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = left;
    return out;
  }
  for (Index i = 0; i < count; ++i)
    out[static_cast<std::size_t>(i)] =
        left + (right - left) * static_cast<double>(i) /
                   static_cast<double>(count - 1);
  return out;
}

std::string model_name(Model m) {
  switch (m) {
    case Model::Wave: return "wave";
    case Model::SgSingleSoliton: return "sg_single_soliton";
    case Model::SgDoublets: return "sg_doublets";
  }
  return "?";
}

std::string optimizer_name(ManifoldOptimizer o) {
  switch (o) {
    case ManifoldOptimizer::HomogeneousAdam: return "HomogeneousAdam";
    case ManifoldOptimizer::StiefelAdam: return "StiefelAdam";
    case ManifoldOptimizer::StiefelAdamWithDecay: return "StiefelAdamWithDecay";
    case ManifoldOptimizer::GradientDescent: return "GradientDescent";
  }
  return "?";
}

std::string metric_name(MetricKind m) {
  return m == MetricKind::Canonical ? "canonical" : "euclidean";
}

std::string transport_name(TransportKind t) {
  return t == TransportKind::Submanifold ? "sub" : "diff";
}

std::string loss_name(net::LossKind k) {
  return k == net::LossKind::Relative ? "Relative" : "ScaledMSE";
}

void apply_variant(RunConfig& cfg, const std::string& name) {
  struct Row {
    bool epochwise, normalized;
    net::LossKind loss;
    ManifoldOptimizer opt;
    MetricKind metric;
    TransportKind transport;
  };
  using L = net::LossKind;
  using O = ManifoldOptimizer;
  constexpr auto C = MetricKind::Canonical;
  constexpr auto E = MetricKind::Euclidean;
  constexpr auto S = TransportKind::Submanifold;
  constexpr auto D = TransportKind::Differential;
  static const std::map<std::string, Row> table{
      {"V1", {false, false, L::Relative, O::HomogeneousAdam, C, S}},
      {"V2", {true, false, L::Relative, O::HomogeneousAdam, C, S}},
      {"V3", {true, true, L::Relative, O::HomogeneousAdam, C, S}},
      {"V4", {true, true, L::ScaledMSE, O::HomogeneousAdam, C, S}},
      {"V5", {true, true, L::Relative, O::StiefelAdam, C, S}},
      {"V6", {true, true, L::Relative, O::StiefelAdamWithDecay, C, S}},
      {"V7", {true, true, L::Relative, O::StiefelAdamWithDecay, C, D}},
      {"V8", {true, true, L::Relative, O::StiefelAdamWithDecay, E, S}},
      {"V9", {true, true, L::Relative, O::StiefelAdamWithDecay, E, D}},
      {"V10", {true, true, L::ScaledMSE, O::StiefelAdamWithDecay, C, S}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown variant '" + name + "'");
  const Row& r = it->second;
  cfg.variant = name;
  cfg.epochwise = r.epochwise;
  cfg.normalized = r.normalized;
  cfg.loss = r.loss;
  cfg.optimizer = r.opt;
  cfg.metric = r.metric;
  cfg.transport = r.transport;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (kv.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
    kv[key] = trim(line.substr(eq + 1));
  }

  RunConfig cfg;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  if (auto v = get("model")) {
    if (*v == "wave") cfg.model = Model::Wave;
    else if (*v == "sg_single_soliton") cfg.model = Model::SgSingleSoliton;
    else if (*v == "sg_doublets") cfg.model = Model::SgDoublets;
    else throw ConfigError("model: unknown '" + *v + "'");
  }
  if (cfg.model != Model::Wave) {
    cfg.a = -10.0;
    cfg.b = 10.0;
    cfg.t1 = 4.0;
  }
  if (auto v = get("variant")) apply_variant(cfg, *v);

  bool flags_overridden = false;
  if (auto v = get("loss")) {
    flags_overridden = true;
    if (*v == "Relative") cfg.loss = net::LossKind::Relative;
    else if (*v == "ScaledMSE") cfg.loss = net::LossKind::ScaledMSE;
    else throw ConfigError("loss: unknown '" + *v + "'");
  }
  if (auto v = get("epochwise")) { flags_overridden = true; cfg.epochwise = to_bool("epochwise", *v); }
  if (auto v = get("normalized")) { flags_overridden = true; cfg.normalized = to_bool("normalized", *v); }
  if (auto v = get("optimizer")) {
    flags_overridden = true;
    if (*v == "HomogeneousAdam") cfg.optimizer = ManifoldOptimizer::HomogeneousAdam;
    else if (*v == "StiefelAdam") cfg.optimizer = ManifoldOptimizer::StiefelAdam;
    else if (*v == "StiefelAdamWithDecay") cfg.optimizer = ManifoldOptimizer::StiefelAdamWithDecay;
    else if (*v == "GradientDescent") cfg.optimizer = ManifoldOptimizer::GradientDescent;
    else throw ConfigError("optimizer: unknown '" + *v + "'");
  }
  if (auto v = get("metric")) {
    flags_overridden = true;
    if (*v == "canonical") cfg.metric = MetricKind::Canonical;
    else if (*v == "euclidean") cfg.metric = MetricKind::Euclidean;
    else throw ConfigError("metric: unknown '" + *v + "'");
  }
  if (auto v = get("transport")) {
    flags_overridden = true;
    if (*v == "sub") cfg.transport = TransportKind::Submanifold;
    else if (*v == "diff") cfg.transport = TransportKind::Differential;
    else throw ConfigError("transport: unknown '" + *v + "'");
  }
  if (flags_overridden && !kv.count("variant")) cfg.variant = "custom";
  if (auto v = get("use_ref"))
    if (to_bool("use_ref", *v) != cfg.normalized)
      throw ConfigError(
          "use_ref must equal normalized: normalized data pairs with the "
          "reference-state ROM and unnormalized data with the plain ROM");

  if (auto v = get("N")) cfg.grid = to_index("N", *v);
  if (auto v = get("n_range")) cfg.n_range = to_indices("n_range", *v);
  if (auto v = get("n_epochs")) cfg.n_epochs = to_index("n_epochs", *v);
  if (auto v = get("batch_size")) cfg.batch_size = to_index("batch_size", *v);
  if (auto v = get("time_steps")) cfg.time_steps = to_index("time_steps", *v);
  if (auto v = get("t0")) cfg.t0 = to_double("t0", *v);
  if (auto v = get("t1")) cfg.t1 = to_double("t1", *v);
  if (auto v = get("a")) cfg.a = to_double("a", *v);
  if (auto v = get("b")) cfg.b = to_double("b", *v);
  if (auto v = get("seed")) cfg.seed = static_cast<std::uint64_t>(std::stoull(*v));
  if (auto v = get("eta")) cfg.eta = to_double("eta", *v);
  if (auto v = get("alternate_pq")) cfg.alternate_pq = to_bool("alternate_pq", *v);
  if (auto v = get("testing")) cfg.testing = to_doubles("testing", *v);

  const auto* left = get("mu_left");
  const auto* right = get("mu_right");
  const auto* count = get("n_params");
  const auto* list = get("nu_list");
  if (left || right || count) {
    if (!(left && right && count))
      throw ConfigError("mu_left, mu_right and n_params go together");
    cfg.params = linspace(to_double("mu_left", *left),
                          to_double("mu_right", *right),
                          to_index("n_params", *count));
  }
  if (list) {
    if (left) throw ConfigError("give either mu_left/mu_right/n_params or nu_list");
    cfg.params = to_doubles("nu_list", *list);
  }
  if (auto v = get("speed_pairs")) {
    cfg.speed_pairs.clear();
    for (const auto& p : split(*v, ',')) {
      const auto nn = split(p, 'x');
      if (nn.size() != 2) throw ConfigError("speed_pairs: use NxN,NxN");
      cfg.speed_pairs.emplace_back(to_index("speed_pairs", nn[0]),
                                   to_index("speed_pairs", nn[1]));
    }
  }

  for (const auto& [key, value] : kv)
    if (!used.count(key)) throw ConfigError("unknown key '" + key + "'");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  if (grid < 1) throw ConfigError("N must be at least 1");
  if (n_range.empty()) throw ConfigError("n_range is empty");
  const Index d = model == Model::Wave ? grid + 2 : grid;
  for (Index n : n_range)
    if (n < 1 || n > d)
      throw ConfigError("n_range entry " + std::to_string(n) +
                        " outside [1, " + std::to_string(d) + "]");
  if (n_epochs < 1) throw ConfigError("n_epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (time_steps < 1) throw ConfigError("time_steps must be at least 1");
  if (!(t1 > t0)) throw ConfigError("need t1 > t0");
  if (!(b > a)) throw ConfigError("need b > a");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (model == Model::Wave) {
    if (t0 != 0.0 || t1 != 1.0 || a != -0.5 || b != 0.5)
      throw ConfigError("the wave model fixes I = [0, 1] and Omega = [-1/2, 1/2]");
    for (double mu : params)
      if (!(mu > 0.0)) throw ConfigError("wave speeds must be positive");
    for (double mu : testing)
      if (!(mu > 0.0)) throw ConfigError("wave speeds must be positive");
  } else {
    for (double nu : params)
      if (!(std::abs(nu) < 1.0)) throw ConfigError("sine-Gordon needs |nu| < 1");
    for (double nu : testing)
      if (!(std::abs(nu) < 1.0)) throw ConfigError("sine-Gordon needs |nu| < 1");
  }
  for (const auto& [big, small] : speed_pairs)
    if (small < 1 || big <= small)
      throw ConfigError("speed_pairs need N > n >= 1");
}

train::OptimizerConfig RunConfig::optimizer_config() const {
  train::OptimizerConfig oc;
  oc.manifold = optimizer;
  oc.metric = optimizer == ManifoldOptimizer::HomogeneousAdam
                  ? MetricKind::Canonical
                  : metric;
  oc.transport = transport;
  oc.eta = eta;
  oc.section_seed = seed;
  return oc;
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "model = " << model_name(cfg.model) << '\n'
      << "N = " << cfg.grid << '\n'
      << "n_range = " << join(cfg.n_range, [](Index i) { return std::to_string(i); }) << '\n'
      << "n_epochs = " << cfg.n_epochs << '\n'
      << "batch_size = " << cfg.batch_size << '\n'
      << "time_steps = " << cfg.time_steps << '\n';
  if (!cfg.params.empty()) out << "nu_list = " << join(cfg.params, fmt) << '\n';
  if (!cfg.testing.empty()) out << "testing = " << join(cfg.testing, fmt) << '\n';
  if (cfg.variant != "custom") out << "variant = " << cfg.variant << '\n';
  out << "loss = " << loss_name(cfg.loss) << '\n'
      << "epochwise = " << (cfg.epochwise ? "true" : "false") << '\n'
      << "normalized = " << (cfg.normalized ? "true" : "false") << '\n'
      << "optimizer = " << optimizer_name(cfg.optimizer) << '\n'
      << "metric = " << metric_name(cfg.metric) << '\n'
      << "transport = " << transport_name(cfg.transport) << '\n'
      << "t0 = " << fmt(cfg.t0) << '\n'
      << "t1 = " << fmt(cfg.t1) << '\n'
      << "a = " << fmt(cfg.a) << '\n'
      << "b = " << fmt(cfg.b) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "eta = " << fmt(cfg.eta) << '\n'
      << "alternate_pq = " << (cfg.alternate_pq ? "true" : "false") << '\n'
      << "speed_pairs = "
      << join(cfg.speed_pairs,
              [](const std::pair<Index, Index>& p) {
                return std::to_string(p.first) + "x" + std::to_string(p.second);
              })
      << '\n';
  return out.str();
}

}  // namespace smor::config
