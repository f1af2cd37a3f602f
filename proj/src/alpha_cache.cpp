#include "qvts/alpha_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "qvts/random.hpp"

namespace qvts {

namespace {

constexpr std::array<char, 4> kMagic = {'Q', 'V', 'T', 'C'};

enum class Kind : std::uint8_t { kAlpha = 'A', kBeliefs = 'B', kMdp = 'M' };

struct Header {
  Kind kind;
  bool flag;
  std::uint64_t key;
  std::uint64_t dim;
  std::uint64_t count;
};

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), tmp_(path + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error("cannot write cache file '" + path + "'");
  }
  void header(const Header& h) {
    out_.write(kMagic.data(), kMagic.size());
    bytes(kCacheFormatVersion);
    bytes(static_cast<std::uint8_t>(h.kind));
    bytes(static_cast<std::uint8_t>(h.flag ? 1 : 0));
    bytes(std::uint8_t{0});
    bytes(h.key);
    bytes(h.dim);
    bytes(h.count);
  }
  template <typename T>
  void bytes(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void doubles(std::span<const double> v) {
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void commit() {
    out_.close();
    if (!out_) throw Error("failed writing cache file '" + path_ + "'");
    std::filesystem::rename(tmp_, path_);
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {}

  // Validates magic, version, kind, key and dimension.
  std::optional<Header> header(Kind kind, std::uint64_t key, std::size_t dim) {
    if (!in_) return std::nullopt;
    std::array<char, 4> magic{};
    in_.read(magic.data(), magic.size());
    std::uint8_t version = 0, k = 0, flag = 0, pad = 0;
    Header h{};
    if (!bytes(version) || !bytes(k) || !bytes(flag) || !bytes(pad) ||
        !bytes(h.key) || !bytes(h.dim) || !bytes(h.count)) {
      return std::nullopt;
    }
    if (magic != kMagic || version != kCacheFormatVersion ||
        k != static_cast<std::uint8_t>(kind) || h.key != key || h.dim != dim) {
      return std::nullopt;
    }
    h.kind = kind;
    h.flag = flag != 0;
    return h;
  }
  template <typename T>
  bool bytes(T& v) {
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    return static_cast<bool>(in_);
  }
  bool doubles(std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in_.read(reinterpret_cast<char*>(v.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
    return static_cast<bool>(in_);
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
};

void save_alphas(const std::string& path, Kind kind, std::uint64_t key,
                 const AlphaSet& set, bool flag) {
  Writer w(path);
  w.header({kind, flag, key, set.dimension(), set.size()});
  for (const AlphaVector& v : set) {
    w.bytes(static_cast<std::uint64_t>(v.action));
    w.doubles(v.values);
  }
  w.commit();
}

std::optional<AlphaSet> load_alphas(const std::string& path, Kind kind,
                                    std::uint64_t key, std::size_t n,
                                    bool* flag) {
  Reader r(path);
  const auto h = r.header(kind, key, n);
  if (!h || h->count == 0) return std::nullopt;
  std::vector<AlphaVector> vectors(h->count);
  for (AlphaVector& v : vectors) {
    std::uint64_t action = 0;
    if (!r.bytes(action) || !r.doubles(v.values, n)) return std::nullopt;
    v.action = action;
  }
  if (!r.at_end()) return std::nullopt;
  if (flag != nullptr) *flag = h->flag;
  return AlphaSet(n, std::move(vectors));
}

}  // namespace

std::uint64_t solver_cache_key(const PomdpModel& model, const SolverConfig& config) {
  std::uint64_t key = model.content_hash();
  key = derive_seed(key, std::bit_cast<std::uint64_t>(config.epsilon));
  key = derive_seed(key, config.max_iterations);
  key = derive_seed(key, config.pbvi_sweeps);
  key = derive_seed(key, config.pbvi_target_size);
  key = derive_seed(key, config.rng_seed);
  return key;
}

CachePaths::CachePaths(const std::string& dir)
    : fib(dir + "/fib.alpha"),
      pbvi(dir + "/pbvi.alpha"),
      beliefs(dir + "/beliefs.bin"),
      mdp(dir + "/mdp.bin") {}

void save_alpha_set(const std::string& path, std::uint64_t key,
                    const AlphaSet& set, bool converged) {
  save_alphas(path, Kind::kAlpha, key, set, converged);
}

std::optional<AlphaSet> load_alpha_set(const std::string& path,
                                       std::uint64_t key,
                                       std::size_t num_states,
                                       bool* converged) {
  return load_alphas(path, Kind::kAlpha, key, num_states, converged);
}

void save_beliefs(const std::string& path, std::uint64_t key,
                  const std::vector<Belief>& beliefs) {
  Writer w(path);
  const std::size_t n = beliefs.empty() ? 0 : beliefs.front().size();
  w.header({Kind::kBeliefs, true, key, n, beliefs.size()});
  for (const Belief& b : beliefs) w.doubles(b.probs());
  w.commit();
}

std::optional<std::vector<Belief>> load_beliefs(const std::string& path,
                                                std::uint64_t key,
                                                std::size_t num_states) {
  Reader r(path);
  const auto h = r.header(Kind::kBeliefs, key, num_states);
  if (!h) return std::nullopt;
  std::vector<Belief> out;
  std::vector<double> buf;
  for (std::uint64_t i = 0; i < h->count; ++i) {
    if (!r.doubles(buf, num_states)) return std::nullopt;
    try {
      out.emplace_back(buf);
    } catch (const InvalidBelief&) {
      return std::nullopt;
    }
  }
  if (!r.at_end()) return std::nullopt;
  return out;
}

void save_mdp(const std::string& path, std::uint64_t key,
              const MdpSolution& mdp) {
  Writer w(path);
  w.header({Kind::kMdp, mdp.converged, key, mdp.values.size(), 1});
  w.doubles(mdp.values);
  for (ActionIndex a : mdp.policy) w.bytes(static_cast<std::uint64_t>(a));
  w.bytes(static_cast<std::uint64_t>(mdp.iterations));
  w.bytes(mdp.residual);
  w.commit();
}

std::optional<MdpSolution> load_mdp(const std::string& path, std::uint64_t key,
                                    std::size_t num_states) {
  Reader r(path);
  const auto h = r.header(Kind::kMdp, key, num_states);
  if (!h) return std::nullopt;
  MdpSolution mdp;
  if (!r.doubles(mdp.values, num_states)) return std::nullopt;
  mdp.policy.resize(num_states);
  for (ActionIndex& a : mdp.policy) {
    std::uint64_t v = 0;
    if (!r.bytes(v)) return std::nullopt;
    a = v;
  }
  std::uint64_t iterations = 0;
  if (!r.bytes(iterations) || !r.bytes(mdp.residual)) return std::nullopt;
  if (!r.at_end()) return std::nullopt;
  mdp.iterations = iterations;
  mdp.converged = h->flag;
  return mdp;
}

}  // namespace qvts
