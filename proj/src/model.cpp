#include "rfon/model.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rfon/rng.hpp"

namespace rfon {

std::string measure_name(const Measure& measure) {
  struct Visitor {
    std::string operator()(const Quartic&) const { return "quartic"; }
    std::string operator()(const Spherical&) const { return "spherical"; }
    std::string operator()(const GaussianMass&) const { return "gaussian_mass"; }
  };
  return std::visit(Visitor{}, measure);
}

void ModelParams::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!std::isfinite(h)) throw std::invalid_argument("h must be finite");
  if (!std::isfinite(J)) throw std::invalid_argument("J must be finite");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (const auto* q = std::get_if<Quartic>(&measure); q && !(q->u > 0.0))
    throw std::invalid_argument("quartic measure needs u > 0");
  if (const auto* g = std::get_if<GaussianMass>(&measure); g && !(g->mu > 0.0))
    throw std::invalid_argument("gaussian mass measure needs mu > 0");
}

DisorderSample::DisorderSample(const Lattice& lattice, int components, std::vector<double> values,
                               std::uint64_t seed, std::uint64_t stream)
    : components_(components), values_(std::move(values)), seed_(seed), stream_(stream) {
  if (components < 1) throw std::invalid_argument("disorder needs N >= 1");
  if (values_.size() != lattice.volume() * static_cast<std::size_t>(components))
    throw std::invalid_argument("disorder sample does not have V*N entries");
  fourier_ = fourier_forward(std::span<const double>(values_), lattice,
                             static_cast<std::size_t>(components));
}

DisorderSample DisorderSample::combine(double a, const DisorderSample& x, double b,
                                       const DisorderSample& y, std::uint64_t seed,
                                       std::uint64_t stream) {
  if (x.values_.size() != y.values_.size() || x.components_ != y.components_)
    throw std::invalid_argument("cannot combine disorder samples of different shape");
  DisorderSample out;
  out.components_ = x.components_;
  out.seed_ = seed;
  out.stream_ = stream;
  out.values_.resize(x.values_.size());
  for (std::size_t i = 0; i < out.values_.size(); ++i)
    out.values_[i] = a * x.values_[i] + b * y.values_[i];
  out.fourier_ = x.fourier_;
  for (std::size_t i = 0; i < out.fourier_.values.size(); ++i)
    out.fourier_.values[i] = a * x.fourier_.values[i] + b * y.fourier_.values[i];
  return out;
}

DisorderSample draw_disorder(const Lattice& lattice, int components, std::uint64_t base_seed,
                             std::uint64_t stream) {
  auto rng = make_rng(base_seed, StreamTag::kDisorder, {stream});
  std::normal_distribution<double> normal;
  std::vector<double> g(lattice.volume() * static_cast<std::size_t>(components));
  for (auto& v : g) v = normal(rng);
  return DisorderSample(lattice, components, std::move(g), base_seed, stream);
}

DisorderSample zero_disorder(const Lattice& lattice, int components) {
  return DisorderSample(lattice, components,
                        std::vector<double>(lattice.volume() * static_cast<std::size_t>(components)));
}

double exchange_energy(std::span<const double> phi, int components, double J,
                       const Lattice& lattice) {
  double e = 0.0;
  const std::size_t n = static_cast<std::size_t>(components);
  for (std::size_t x = 0; x < lattice.volume(); ++x) {
    for (std::size_t y : lattice.neighbors(x)) {
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += phi[x * n + c] * phi[y * n + c];
      e += dot;
    }
  }
  return -J * e;
}

double hamiltonian(const SpinConfig& config, const DisorderSample& disorder,
                   const ModelParams& params, const Lattice& lattice) {
  const std::size_t expected = lattice.volume() * static_cast<std::size_t>(params.N);
  if (config.phi.size() != expected || disorder.values().size() != expected)
    throw std::invalid_argument("configuration/disorder shape does not match V*N");
  double field = 0.0;
  auto g = disorder.values();
  for (std::size_t i = 0; i < expected; ++i) field += g[i] * config.phi[i];
  return exchange_energy(config.phi, params.N, params.J, lattice) - params.h * field;
}

double disorder_strength_map(double beta, double h) { return beta * beta * h * h; }

namespace {

std::string format_exact(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

}  // namespace

std::filesystem::path save_disorder(const DisorderSample& sample, const std::filesystem::path& stem,
                                    DisorderFormat format) {
  namespace fs = std::filesystem;
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  fs::path data = stem;
  data += format == DisorderFormat::kBinary ? ".bin" : ".csv";
  auto values = sample.values();

  if (format == DisorderFormat::kBinary) {
    static_assert(std::endian::native == std::endian::little, "binary disorder files are little-endian");
    std::ofstream out(data, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + data.string());
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    std::ofstream out(data);
    if (!out) throw std::runtime_error("cannot write " + data.string());
    out << "site,component,g\n";
    const int n = sample.components();
    for (std::size_t i = 0; i < values.size(); ++i)
      out << i / n << ',' << i % n << ',' << format_exact(values[i]) << '\n';
  }

  nlohmann::ordered_json meta;
  meta["seed"] = sample.seed();
  meta["stream"] = sample.stream();
  meta["V"] = sample.volume();
  meta["N"] = sample.components();
  meta["format"] = format == DisorderFormat::kBinary ? "binary" : "csv";
  meta["file"] = data.filename().string();
  fs::path sidecar = stem;
  sidecar += ".json";
  std::ofstream out(sidecar);
  if (!out) throw std::runtime_error("cannot write " + sidecar.string());
  out << meta.dump(2) << '\n';
  return sidecar;
}

DisorderSample load_disorder(const std::filesystem::path& sidecar, const Lattice& lattice) {
  std::ifstream in(sidecar);
  if (!in) throw std::runtime_error("cannot read " + sidecar.string());
  auto meta = nlohmann::json::parse(in);
  const std::size_t volume = meta.at("V").get<std::size_t>();
  const int n = meta.at("N").get<int>();
  if (volume != lattice.volume())
    throw std::invalid_argument("disorder file volume does not match the lattice");
  const auto data = sidecar.parent_path() / meta.at("file").get<std::string>();
  std::vector<double> values(volume * static_cast<std::size_t>(n));

  if (meta.at("format") == "binary") {
    std::ifstream bin(data, std::ios::binary);
    if (!bin) throw std::runtime_error("cannot read " + data.string());
    bin.read(reinterpret_cast<char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (bin.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double)))
      throw std::runtime_error("truncated disorder file " + data.string());
  } else {
    std::ifstream csv(data);
    if (!csv) throw std::runtime_error("cannot read " + data.string());
    std::string line;
    std::getline(csv, line);
    std::size_t row = 0;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      const auto comma = line.rfind(',');
      if (row >= values.size() || comma == std::string::npos)
        throw std::runtime_error("malformed disorder csv " + data.string());
      const char* begin = line.data() + comma + 1;
      auto res = std::from_chars(begin, line.data() + line.size(), values[row]);
      if (res.ec != std::errc()) throw std::runtime_error("malformed value in " + data.string());
      ++row;
    }
    if (row != values.size()) throw std::runtime_error("truncated disorder csv " + data.string());
  }
  return DisorderSample(lattice, n, std::move(values), meta.at("seed").get<std::uint64_t>(),
                        meta.at("stream").get<std::uint64_t>());
}

}  // namespace rfon
