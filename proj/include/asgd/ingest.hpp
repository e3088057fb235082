#pragma once

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "asgd/core.hpp"
#include "asgd/errors.hpp"

namespace asgd {

// ---------------------------------------------------------------------------
// libsvm text format: "<label> (<index>:<value>)*", 1-based indices,
// '#' starts a comment.

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

inline double parse_number(std::string_view tok, std::uint64_t line, std::size_t column, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw parse_error(std::string("malformed ") + what + " '" + std::string(tok) + "'", line, column);
  if (!std::isfinite(v)) throw parse_error(std::string("non-finite ") + what, line, column);
  return v;
}

}  // namespace detail

/// Parses one line. Returns nullopt for blank or comment-only lines.
/// `line_no` is only used in error messages.
inline std::optional<Sample> parse_libsvm_record(std::string_view line, std::uint64_t line_no = 1) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::size_t pos = 0;
  auto next_token = [&](std::size_t& column) -> std::string_view {
    while (pos < line.size() && detail::is_space(line[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !detail::is_space(line[pos])) ++pos;
    column = start + 1;
    return line.substr(start, pos - start);
  };

  std::size_t column = 0;
  const std::string_view label_tok = next_token(column);
  if (label_tok.empty()) return std::nullopt;
  if (label_tok.find(':') != std::string_view::npos)
    throw parse_error("missing label before feature '" + std::string(label_tok) + "'", line_no, column);
  const double label = detail::parse_number(label_tok, line_no, column, "label");

  std::vector<Feature> features;
  while (true) {
    const std::string_view tok = next_token(column);
    if (tok.empty()) break;
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
      throw parse_error("expected <index>:<value>, got '" + std::string(tok) + "'", line_no, column);
    std::uint64_t index = 0;
    const std::string_view idx_tok = tok.substr(0, colon);
    const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), index);
    if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size())
      throw parse_error("malformed index '" + std::string(idx_tok) + "'", line_no, column);
    if (index == 0) throw parse_error("feature index must be >= 1", line_no, column);
    if (index > std::uint64_t{UINT32_MAX}) throw parse_error("feature index too large", line_no, column);
    const double value = detail::parse_number(tok.substr(colon + 1), line_no, column + colon + 1, "value");
    features.push_back({static_cast<std::uint32_t>(index - 1), value});
  }
  return Sample{SparseVector::from_pairs(std::move(features)), label};
}

/// Parses a line that must hold a sample.
inline Sample parse_libsvm_line(std::string_view line, std::uint64_t line_no = 1) {
  auto s = parse_libsvm_record(line, line_no);
  if (!s) throw parse_error("empty line", line_no, 1);
  return std::move(*s);
}

/// Formats a sample so that parsing the result gives back an identical sample.
inline std::string format_libsvm(const Sample& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.label);
  std::string out = buf;
  for (const auto& f : s.features.entries()) {
    std::snprintf(buf, sizeof buf, " %u:%.17g", f.index + 1u, f.value);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line reader over plain or gzip-compressed files (zlib reads both).

class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), file_(gzopen(path.c_str(), "rb")) {
    if (!file_) throw data_error("cannot open " + path);
    gzbuffer(file_.get(), 1 << 17);
  }

  /// Reads the next line without its terminator. Returns false at EOF.
  bool next(std::string& line) {
    line.clear();
    char buf[1 << 14];
    while (true) {
      if (!gzgets(file_.get(), buf, sizeof buf)) {
        int err = 0;
        const char* msg = gzerror(file_.get(), &err);
        if (err != Z_OK && err != Z_STREAM_END) throw data_error("read error in " + path_ + ": " + msg);
        if (line.empty()) return false;
        break;
      }
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        break;
      }
    }
    ++line_no_;
    return true;
  }

  std::uint64_t line_no() const noexcept { return line_no_; }
  const std::string& path() const noexcept { return path_; }

 private:
  struct Closer {
    void operator()(gzFile f) const { gzclose(f); }
  };
  std::string path_;
  std::unique_ptr<gzFile_s, Closer> file_;
  std::uint64_t line_no_ = 0;
};

// ---------------------------------------------------------------------------
// Labels

enum class LabelKind { binary, real };

inline std::string_view to_string(LabelKind k) { return k == LabelKind::binary ? "binary" : "real"; }

/// Maps raw labels to ±1 (binary) or leaves them unchanged (passthrough).
class LabelMapping {
 public:
  static LabelMapping passthrough() { return LabelMapping(LabelKind::real); }

  /// {raw → ±1}; `other` is used for any raw label not listed.
  static LabelMapping binary(std::map<double, double> map, std::optional<double> other = std::nullopt) {
    LabelMapping m(LabelKind::binary);
    for (const auto& [k, v] : map)
      if (v != 1.0 && v != -1.0) throw contract_error("binary label map targets must be +1 or -1");
    if (other && *other != 1.0 && *other != -1.0) throw contract_error("default label target must be +1 or -1");
    m.map_ = std::move(map);
    m.other_ = other;
    return m;
  }

  /// Labels already in {−1, +1}.
  static LabelMapping signs() { return binary({{-1.0, -1.0}, {1.0, 1.0}}); }

  /// One-vs-rest: `positive` → +1, everything else → −1.
  static LabelMapping one_vs_rest(double positive) { return binary({{positive, 1.0}}, -1.0); }

  LabelKind kind() const noexcept { return kind_; }

  double apply(double raw) {
    if (kind_ == LabelKind::real) {
      ++real_count_;
      return raw;
    }
    double y = 0.0;
    if (const auto it = map_.find(raw); it != map_.end())
      y = it->second;
    else if (other_)
      y = *other_;
    else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", raw);
      throw data_error(std::string("unmapped label ") + buf);
    }
    ++(y > 0 ? positives_ : negatives_);
    return y;
  }

  std::uint64_t positives() const noexcept { return positives_; }
  std::uint64_t negatives() const noexcept { return negatives_; }
  std::uint64_t real_count() const noexcept { return real_count_; }

 private:
  explicit LabelMapping(LabelKind k) : kind_(k) {}
  LabelKind kind_;
  std::map<double, double> map_;
  std::optional<double> other_;
  std::uint64_t positives_ = 0;
  std::uint64_t negatives_ = 0;
  std::uint64_t real_count_ = 0;
};

/// Relabels samples in place and returns the mapping with its class counts.
inline LabelMapping normalize_labels(std::span<Sample> samples, LabelMapping mapping) {
  for (auto& s : samples) s.label = mapping.apply(s.label);
  return mapping;
}

// ---------------------------------------------------------------------------
// M estimation

/// max ‖x‖² over the first min(prefix, n) samples.
inline double estimate_M(std::span<const Sample> samples, std::size_t prefix = 1000) {
  if (samples.empty()) throw data_error("estimate_M: empty stream");
  double m = 0.0;
  const std::size_t n = std::min(prefix, samples.size());
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, samples[i].features.squared_norm());
  return m;
}

// ---------------------------------------------------------------------------
// Streaming reader

struct IngestOptions {
  std::string path;
  /// Declared feature dimension; when absent it is grown over the M prefix.
  std::optional<std::size_t> dim;
  bool bias = false;
  std::size_t m_prefix = 1000;
};

struct DatasetMeta {
  /// Feature dimension before the bias column.
  std::size_t dim = 0;
  /// Trainer dimension: dim plus one when the bias column is enabled.
  std::size_t model_dim = 0;
  std::optional<std::uint64_t> n_samples;
  double M_hat = 0.0;
  LabelKind label_kind = LabelKind::binary;
};

/// Reads a libsvm file once, front to back. The first m_prefix samples are
/// buffered to fix dim and estimate M, then replayed, so next() still yields
/// every sample exactly once and in file order.
class SampleStream {
 public:
  SampleStream(IngestOptions options, LabelMapping labels)
      : options_(std::move(options)), labels_(std::move(labels)), reader_(options_.path) {
    std::size_t grown = 0;
    while (buffer_.size() < options_.m_prefix) {
      auto s = read_one();
      if (!s) break;
      grown = std::max(grown, s->features.extent());
      buffer_.push_back(std::move(*s));
    }
    if (buffer_.empty()) throw data_error("no samples in " + options_.path);
    if (options_.dim) {
      if (grown > *options_.dim)
        throw data_error("feature index " + std::to_string(grown) + " exceeds declared dim " +
                         std::to_string(*options_.dim));
      meta_.dim = *options_.dim;
    } else {
      meta_.dim = grown;
    }
    meta_.model_dim = meta_.dim + (options_.bias ? 1 : 0);
    meta_.label_kind = labels_.kind();
    for (auto& s : buffer_) finish(s);
    for (const auto& s : buffer_) meta_.M_hat = std::max(meta_.M_hat, s.features.squared_norm());
    if (!(meta_.M_hat > 0.0)) throw data_error("all samples in the M prefix are zero vectors");
  }

  explicit SampleStream(IngestOptions options) : SampleStream(std::move(options), LabelMapping::signs()) {}

  /// Next sample in file order, or nullopt at end of file.
  std::optional<Sample> next() {
    std::optional<Sample> s;
    if (!buffer_.empty()) {
      s = std::move(buffer_.front());
      buffer_.pop_front();
    } else {
      s = read_one();
      if (!s) {
        meta_.n_samples = read_;
        return std::nullopt;
      }
      if (s->features.extent() > meta_.dim)
        throw data_error(reader_.path() + " line " + std::to_string(reader_.line_no()) + ": feature index " +
                         std::to_string(s->features.extent()) + " exceeds dim " + std::to_string(meta_.dim));
      finish(*s);
    }
    ++delivered_;
    return s;
  }

  const DatasetMeta& meta() const noexcept { return meta_; }
  double M_hat() const noexcept { return meta_.M_hat; }
  std::uint64_t samples_read() const noexcept { return read_; }
  std::uint64_t samples_delivered() const noexcept { return delivered_; }
  const LabelMapping& labels() const noexcept { return labels_; }

 private:
  std::optional<Sample> read_one() {
    std::string line;
    while (reader_.next(line)) {
      auto s = parse_libsvm_record(line, reader_.line_no());
      if (!s) continue;
      s->label = labels_.apply(s->label);
      ++read_;
      return s;
    }
    return std::nullopt;
  }

  void finish(Sample& s) const {
    s.features.grow_dim(meta_.dim);
    if (options_.bias) s.features.push_back({static_cast<std::uint32_t>(meta_.dim), 1.0});
    s.features.grow_dim(meta_.model_dim);
  }

  IngestOptions options_;
  LabelMapping labels_;
  LineReader reader_;
  std::deque<Sample> buffer_;
  DatasetMeta meta_;
  std::uint64_t read_ = 0;
  std::uint64_t delivered_ = 0;
};

/// Number of sample lines (non-blank after stripping comments), without
/// parsing the features.
inline std::uint64_t count_samples(const std::string& path) {
  LineReader reader(path);
  std::string line;
  std::uint64_t n = 0;
  while (reader.next(line)) {
    for (char c : line) {
      if (c == '#') break;
      if (!detail::is_space(c)) {
        ++n;
        break;
      }
    }
  }
  return n;
}

/// Reads a whole file into memory (used for test sets).
inline std::vector<Sample> read_libsvm(IngestOptions options, LabelMapping labels, DatasetMeta* meta = nullptr) {
  SampleStream stream(std::move(options), std::move(labels));
  std::vector<Sample> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  if (meta) *meta = stream.meta();
  return out;
}

/// Writes samples in libsvm format; gzip-compressed when path ends in ".gz".
inline void write_libsvm(const std::string& path, std::span<const Sample> samples) {
  const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  gzFile f = gzopen(path.c_str(), gz ? "wb6" : "wbT");
  if (!f) throw data_error("cannot write " + path);
  for (const auto& s : samples) {
    const std::string line = format_libsvm(s) + "\n";
    if (gzwrite(f, line.data(), static_cast<unsigned>(line.size())) != static_cast<int>(line.size())) {
      gzclose(f);
      throw data_error("write error on " + path);
    }
  }
  if (gzclose(f) != Z_OK) throw data_error("close error on " + path);
}

}  // namespace asgd
