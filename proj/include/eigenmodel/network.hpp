#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eigenmodel/errors.hpp"
#include "eigenmodel/random.hpp"

namespace eigenmodel {

// Index of the unordered pair {i, j}, i != j, in the packed lower triangle.
inline std::size_t pair_index(std::size_t i, std::size_t j) {
  if (i < j) std::swap(i, j);
  return i * (i - 1) / 2 + j;
}

struct NetworkMeta {
  std::size_t n_nodes = 0;
  std::size_t n_layers = 0;
  std::size_t n_steps = 0;
  std::vector<std::string> labels;
};

/// Binary undirected multilayer network observed over time. Indices are
/// zero-based here: layer k < K, time t < T, nodes i != j < n. Dyads are stored
/// once per unordered pair; each is 0, 1, or missing.
class DynamicNetwork {
 public:
  DynamicNetwork() = default;

  DynamicNetwork(std::size_t n_nodes, std::size_t n_layers, std::size_t n_steps)
      : n_(n_nodes), layers_(n_layers), steps_(n_steps) {
    if (n_ < 2) throw ValidationError("network needs at least 2 nodes");
    if (layers_ < 1 || steps_ < 1)
      throw ValidationError("network needs at least one layer and time step");
    codes_.assign(layers_ * steps_ * n_pairs(), 0);
  }

  std::size_t n_nodes() const { return n_; }
  std::size_t n_layers() const { return layers_; }
  std::size_t n_steps() const { return steps_; }
  std::size_t n_pairs() const { return n_ * (n_ - 1) / 2; }
  std::size_t n_dyads() const { return codes_.size(); }

  // Offset of slice (k, t) in the packed dyad array.
  std::size_t slice_offset(std::size_t k, std::size_t t) const {
    return (k * steps_ + t) * n_pairs();
  }

  std::size_t dyad_index(std::size_t k, std::size_t t, std::size_t i,
                         std::size_t j) const {
    check(k, t, i, j);
    return slice_offset(k, t) + pair_index(i, j);
  }

  bool observed(std::size_t k, std::size_t t, std::size_t i,
                std::size_t j) const {
    return codes_[dyad_index(k, t, i, j)] != kMissing;
  }

  bool observed_at(std::size_t dyad) const { return codes_[dyad] != kMissing; }

  int value(std::size_t k, std::size_t t, std::size_t i, std::size_t j) const {
    return value_at(dyad_index(k, t, i, j));
  }

  int value_at(std::size_t dyad) const {
    const auto c = codes_[dyad];
    if (c == kMissing)
      throw MissingDyadError("read of unobserved dyad " + std::to_string(dyad));
    return c;
  }

  void set_value(std::size_t k, std::size_t t, std::size_t i, std::size_t j,
                 int y) {
    if (y != 0 && y != 1) throw ValidationError("dyad value must be 0 or 1");
    codes_[dyad_index(k, t, i, j)] = static_cast<std::int8_t>(y);
  }

  void set_missing(std::size_t k, std::size_t t, std::size_t i, std::size_t j) {
    codes_[dyad_index(k, t, i, j)] = kMissing;
  }

  std::size_t n_missing() const {
    return static_cast<std::size_t>(
        std::count(codes_.begin(), codes_.end(), kMissing));
  }

  std::size_t n_edges() const {
    return static_cast<std::size_t>(std::count(codes_.begin(), codes_.end(), 1));
  }

  // Degrees of the observed edges in slice (k, t).
  std::vector<double> degrees(std::size_t k, std::size_t t) const {
    std::vector<double> deg(n_, 0.0);
    const std::size_t off = slice_offset(k, t);
    for (std::size_t i = 1; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (codes_[off + pair_index(i, j)] == 1) {
          deg[i] += 1.0;
          deg[j] += 1.0;
        }
    return deg;
  }

  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != n_)
      throw ValidationError("label count does not match n_nodes");
    labels_ = std::move(labels);
  }

  NetworkMeta meta() const { return {n_, layers_, steps_, labels_}; }

  bool operator==(const DynamicNetwork&) const = default;

 private:
  static constexpr std::int8_t kMissing = -1;

  void check(std::size_t k, std::size_t t, std::size_t i, std::size_t j) const {
    if (k >= layers_ || t >= steps_ || i >= n_ || j >= n_)
      throw ValidationError("dyad index out of range");
    if (i == j) throw ValidationError("self-loops are not part of the model");
  }

  std::size_t n_ = 0;
  std::size_t layers_ = 0;
  std::size_t steps_ = 0;
  std::vector<std::int8_t> codes_;
  std::vector<std::string> labels_;
};

struct HeldoutDyad {
  std::size_t k, t, i, j;  // i > j
  int value;
  bool operator==(const HeldoutDyad&) const = default;
};

struct HoldoutSplit {
  DynamicNetwork train;
  std::vector<HeldoutDyad> heldout;
};

// ---------------------------------------------------------------------------
// Metadata and edge-list I/O

inline NetworkMeta parse_meta(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metadata: ") + e.what());
  }
  NetworkMeta meta;
  try {
    meta.n_nodes = j.at("n_nodes").get<std::size_t>();
    meta.n_layers = j.at("n_layers").get<std::size_t>();
    meta.n_steps = j.at("n_steps").get<std::size_t>();
    if (j.contains("labels"))
      meta.labels = j.at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metadata: ") + e.what());
  }
  return meta;
}

inline void write_meta(std::ostream& out, const NetworkMeta& meta) {
  nlohmann::ordered_json j;
  j["n_nodes"] = meta.n_nodes;
  j["n_layers"] = meta.n_layers;
  j["n_steps"] = meta.n_steps;
  if (!meta.labels.empty()) j["labels"] = meta.labels;
  out << j.dump(2) << '\n';
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<long long> parse_int_fields(const std::string& line,
                                               std::size_t expected,
                                               std::size_t line_no) {
  std::vector<long long> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(field, &used);
    } catch (const std::exception&) {
      throw ParseError(line_no, "expected integer, got '" + field + "'");
    }
    if (used != field.size())
      throw ParseError(line_no, "expected integer, got '" + field + "'");
    out.push_back(v);
  }
  if (out.size() != expected)
    throw ParseError(line_no, "expected " + std::to_string(expected) +
                                  " comma-separated fields");
  return out;
}

inline std::size_t checked_index(long long v, std::size_t upper,
                                 const char* name, std::size_t line_no) {
  if (v < 1 || static_cast<unsigned long long>(v) > upper)
    throw ParseError(line_no, std::string(name) + " out of range: " +
                                  std::to_string(v));
  return static_cast<std::size_t>(v - 1);
}

}  // namespace detail

/// Builds a fully observed network from "k,t,i,j" lines (1-based), each
/// asserting an edge. An optional "k,t,i,j" header row is skipped.
/// Duplicates and (i,j)/(j,i) repeats collapse.
inline DynamicNetwork load_network(std::istream& edges, const NetworkMeta& meta) {
  DynamicNetwork net(meta.n_nodes, meta.n_layers, meta.n_steps);
  net.set_labels(meta.labels);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(edges, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (s == "k,t,i,j") continue;
    }
    const auto f = detail::parse_int_fields(s, 4, line_no);
    const auto k = detail::checked_index(f[0], meta.n_layers, "layer", line_no);
    const auto t = detail::checked_index(f[1], meta.n_steps, "time", line_no);
    const auto i = detail::checked_index(f[2], meta.n_nodes, "node i", line_no);
    const auto j = detail::checked_index(f[3], meta.n_nodes, "node j", line_no);
    if (i == j) throw ParseError(line_no, "self-loop");
    net.set_value(k, t, i, j, 1);
  }
  return net;
}

/// Writes the present edges of a fully observed network under a "k,t,i,j"
/// header row, one line per edge with i > j, in (k, t, i, j) order.
inline void write_edges(std::ostream& out, const DynamicNetwork& net,
                        const std::string& header = {}) {
  if (net.n_missing() != 0)
    throw ValidationError("edge lists cannot represent missing dyads");
  if (!header.empty()) out << header;
  out << "k,t,i,j\n";
  for (std::size_t k = 0; k < net.n_layers(); ++k)
    for (std::size_t t = 0; t < net.n_steps(); ++t)
      for (std::size_t i = 1; i < net.n_nodes(); ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (net.value(k, t, i, j) == 1)
            out << k + 1 << ',' << t + 1 << ',' << i + 1 << ',' << j + 1
                << '\n';
}

// ---------------------------------------------------------------------------
// Hold-out masks

/// Masks round-half-up(fraction * n(n-1)/2) dyads per (k, t) slice, chosen
/// uniformly without replacement from a per-slice stream of `seed`.
inline HoldoutSplit make_holdout(const DynamicNetwork& net, double fraction,
                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ValidationError("hold-out fraction must lie in (0, 1)");
  if (net.n_missing() != 0)
    throw ValidationError("network already has missing dyads");
  const std::size_t n = net.n_nodes();
  const std::size_t pairs = net.n_pairs();
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(pairs) + 0.5));
  if (count < 1) throw ValidationError("hold-out fraction selects no dyads");

  // Pair index -> (i, j) lookup.
  std::vector<std::pair<std::size_t, std::size_t>> pair_of(pairs);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) pair_of[pair_index(i, j)] = {i, j};

  HoldoutSplit split{net, {}};
  split.heldout.reserve(count * net.n_layers() * net.n_steps());
  const Rng root(seed);
  std::vector<std::size_t> perm(pairs);
  for (std::size_t k = 0; k < net.n_layers(); ++k) {
    for (std::size_t t = 0; t < net.n_steps(); ++t) {
      Rng rng = root.split(k * net.n_steps() + t);
      for (std::size_t p = 0; p < pairs; ++p) perm[p] = p;
      // Partial Fisher-Yates: the first `count` entries are the sample.
      for (std::size_t p = 0; p < count; ++p) {
        const std::size_t r = p + rng.below(pairs - p);
        std::swap(perm[p], perm[r]);
      }
      std::vector<std::size_t> chosen(perm.begin(), perm.begin() + count);
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t p : chosen) {
        const auto [i, j] = pair_of[p];
        split.heldout.push_back({k, t, i, j, net.value(k, t, i, j)});
        split.train.set_missing(k, t, i, j);
      }
    }
  }
  return split;
}

/// Masks a given list of dyads out of a fully observed network.
inline DynamicNetwork apply_holdout(const DynamicNetwork& net,
                                    const std::vector<HeldoutDyad>& heldout) {
  DynamicNetwork train = net;
  for (const auto& h : heldout) {
    if (train.value(h.k, h.t, h.i, h.j) != h.value)
      throw ValidationError("held-out value disagrees with the network");
    train.set_missing(h.k, h.t, h.i, h.j);
  }
  return train;
}

inline void write_heldout(std::ostream& out,
                          const std::vector<HeldoutDyad>& heldout,
                          const std::string& header = {}) {
  if (!header.empty()) out << header;
  out << "k,t,i,j,value\n";
  for (const auto& h : heldout)
    out << h.k + 1 << ',' << h.t + 1 << ',' << h.i + 1 << ',' << h.j + 1 << ','
        << h.value << '\n';
}

inline std::vector<HeldoutDyad> read_heldout(std::istream& in,
                                             const NetworkMeta& meta) {
  std::vector<HeldoutDyad> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (s == "k,t,i,j,value") continue;
    }
    const auto f = detail::parse_int_fields(s, 5, line_no);
    HeldoutDyad h{};
    h.k = detail::checked_index(f[0], meta.n_layers, "layer", line_no);
    h.t = detail::checked_index(f[1], meta.n_steps, "time", line_no);
    h.i = detail::checked_index(f[2], meta.n_nodes, "node i", line_no);
    h.j = detail::checked_index(f[3], meta.n_nodes, "node j", line_no);
    if (h.i == h.j) throw ParseError(line_no, "self-loop");
    if (h.i < h.j) std::swap(h.i, h.j);
    if (f[4] != 0 && f[4] != 1) throw ParseError(line_no, "value must be 0 or 1");
    h.value = static_cast<int>(f[4]);
    out.push_back(h);
  }
  return out;
}

}  // namespace eigenmodel
