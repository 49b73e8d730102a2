#include "smor/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace smor::io {

namespace {

using json = nlohmann::json;

template <class T>
void put_le(std::vector<unsigned char>& buf, T value) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu));
}

template <class T>
T get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>)
    return std::bit_cast<double>(bits);
  else
    return static_cast<T>(bits);
}

constexpr std::size_t kHeaderSize = 41;

json matrix_to_json(const Matrix& m) {
  json cols = json::array();
  for (Index j = 0; j < m.cols(); ++j)
    cols.push_back(std::vector<double>(m.col(j).data(),
                                       m.col(j).data() + m.rows()));
  return cols;
}

Matrix matrix_from_json(const json& cols, Index rows) {
  Matrix m(rows, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto v = cols[j].get<std::vector<double>>();
    if (static_cast<Index>(v.size()) != rows)
      throw IoError("sidecar: initial state has wrong length");
    m.col(static_cast<Index>(j)) = Eigen::Map<const Vector>(v.data(), rows);
  }
  return m;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& file) {
  return std::filesystem::path(file.string() + ".json");
}

void write_snapshot_file(const std::filesystem::path& file,
                         const mor::SnapshotSet& set, const SnapshotMeta& meta) {
  set.validate();
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderSize + static_cast<std::size_t>(set.data.size()) * 8);
  for (char c : {'S', 'M', 'O', 'R'}) buf.push_back(static_cast<unsigned char>(c));
  put_le<std::uint32_t>(buf, kFormatVersion);
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(set.data.rows()));
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(set.data.cols()));
  put_le<std::uint64_t>(buf, set.params.size());
  put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(set.steps));
  buf.push_back(set.normalized ? 1 : 0);
  const double* p = set.data.data();
  for (Index i = 0; i < set.data.size(); ++i) put_le<double>(buf, p[i]);

  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + file.string());

  json side;
  side["format_version"] = kFormatVersion;
  side["model"] = meta.model;
  side["N"] = meta.grid;
  side["a"] = meta.a;
  side["b"] = meta.b;
  side["seed"] = meta.seed;
  side["params"] = set.params;
  side["t0"] = set.t0;
  side["t1"] = set.t1;
  side["K"] = set.steps;
  side["normalized"] = set.normalized;
  if (set.normalized) side["initial_states"] = matrix_to_json(set.initial_states);
  std::ofstream sc(sidecar_path(file), std::ios::trunc);
  if (!sc) throw IoError("cannot write sidecar for " + file.string());
  sc << side.dump(2) << '\n';
}

SnapshotFile read_snapshot_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderSize || std::memcmp(buf.data(), "SMOR", 4) != 0)
    throw IoError(file.string() + ": not a snapshot file");
  const auto version = get_le<std::uint32_t>(buf.data() + 4);
  if (version != kFormatVersion)
    throw IoError(file.string() + ": unsupported format version " +
                  std::to_string(version));
  const auto rows = get_le<std::uint64_t>(buf.data() + 8);
  const auto cols = get_le<std::uint64_t>(buf.data() + 16);
  const auto n_params = get_le<std::uint64_t>(buf.data() + 24);
  const auto steps = get_le<std::uint64_t>(buf.data() + 32);
  const bool normalized = buf[40] != 0;
  if (buf.size() != kHeaderSize + rows * cols * 8)
    throw IoError(file.string() + ": payload length does not match header");

  SnapshotFile res;
  auto& set = res.set;
  set.data.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  double* p = set.data.data();
  for (std::size_t i = 0; i < rows * cols; ++i)
    p[i] = get_le<double>(buf.data() + kHeaderSize + 8 * i);
  set.steps = static_cast<Index>(steps);
  set.normalized = normalized;

  std::ifstream sc(sidecar_path(file));
  if (!sc) throw IoError("missing sidecar " + sidecar_path(file).string());
  json side;
  try {
    sc >> side;
    set.params = side.at("params").get<std::vector<double>>();
    set.t0 = side.at("t0").get<double>();
    set.t1 = side.at("t1").get<double>();
    res.meta.model = side.at("model").get<std::string>();
    res.meta.grid = side.at("N").get<Index>();
    res.meta.a = side.value("a", 0.0);
    res.meta.b = side.value("b", 0.0);
    res.meta.seed = side.value("seed", std::uint64_t{0});
    if (normalized)
      set.initial_states =
          matrix_from_json(side.at("initial_states"), static_cast<Index>(rows));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad sidecar " + sidecar_path(file).string() + ": " + e.what());
  }
  if (set.params.size() != n_params)
    throw IoError(file.string() + ": header and sidecar disagree on n_params");
  set.validate();
  return res;
}

namespace {

const char* activation_name(kernels::Activation a) {
  switch (a) {
    case kernels::Activation::Tanh: return "tanh";
    case kernels::Activation::Relu: return "relu";
    case kernels::Activation::Explu: return "explu";
  }
  return "tanh";
}

kernels::Activation activation_from(const std::string& s) {
  if (s == "tanh") return kernels::Activation::Tanh;
  if (s == "relu") return kernels::Activation::Relu;
  if (s == "explu") return kernels::Activation::Explu;
  throw IoError("unknown activation '" + s + "'");
}

std::vector<double> to_vec(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Matrix from_vec(const json& j, Index rows, Index cols) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<Index>(v.size()) != rows * cols)
    throw IoError("network file: array has wrong length");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace

void write_network(const std::filesystem::path& file, const net::Network& net) {
  json layers = json::array();
  for (const auto& layer : net.layers) {
    json l;
    if (const auto* g = std::get_if<net::GradientLayer>(&layer)) {
      l["type"] = "gradient";
      l["kind"] = g->kind == net::Half::P ? "P" : "Q";
      l["activation"] = activation_name(g->act);
      l["upscale"] = g->upscale();
      l["half"] = g->half();
      l["K"] = to_vec(g->k);
      l["a"] = to_vec(g->a);
      l["b"] = to_vec(g->b);
    } else {
      const auto& p = std::get<net::PsdLayer>(layer);
      l["type"] = "psd";
      l["direction"] =
          p.direction == net::PsdDirection::Reduce ? "reduce" : "expand";
      l["rows"] = p.weight.rows();
      l["cols"] = p.weight.cols();
      l["weight"] = to_vec(p.weight.matrix());
    }
    layers.push_back(std::move(l));
  }
  json doc{{"full_dim", net.full_dim},
           {"reduced_dim", net.reduced_dim},
           {"encoder_len", net.encoder_len},
           {"layers", std::move(layers)}};
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << doc.dump() << '\n';
}

net::Network read_network(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  net::Network net;
  try {
    json doc;
    in >> doc;
    net.full_dim = doc.at("full_dim").get<Index>();
    net.reduced_dim = doc.at("reduced_dim").get<Index>();
    net.encoder_len = doc.at("encoder_len").get<std::size_t>();
    for (const auto& l : doc.at("layers")) {
      if (l.at("type") == "gradient") {
        net::GradientLayer g;
        g.kind = l.at("kind") == "P" ? net::Half::P : net::Half::Q;
        g.act = activation_from(l.at("activation").get<std::string>());
        const Index up = l.at("upscale").get<Index>();
        const Index half = l.at("half").get<Index>();
        g.k = from_vec(l.at("K"), up, half);
        g.a = from_vec(l.at("a"), up, 1);
        g.b = from_vec(l.at("b"), up, 1);
        net.layers.emplace_back(std::move(g));
      } else {
        const Index rows = l.at("rows").get<Index>();
        const Index cols = l.at("cols").get<Index>();
        net.layers.emplace_back(net::PsdLayer{
            stiefel::StiefelPoint::adopt(from_vec(l.at("weight"), rows, cols)),
            l.at("direction") == "reduce" ? net::PsdDirection::Reduce
                                          : net::PsdDirection::Expand});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad network file " + file.string() + ": " + e.what());
  }
  net.validate();
  return net;
}

}  // namespace smor::io
