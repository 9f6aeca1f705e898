#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fenc::harness {

struct ResultRow {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string metric;  // `name` or `name@axis=value` for sweep points
  double value = 0;
};

/// Append-only collection of metric rows, serialized as
/// `config_hash,seed,metric,value`.
class ResultsTable {
 public:
  void add(std::string config_hash, std::uint64_t seed, std::string metric, double value);
  void append(const ResultsTable& other);

  const std::vector<ResultRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }

  /// Values of `metric` in row order (one per seed usually).
  std::vector<double> values(const std::string& metric) const;
  std::optional<double> value(const std::string& metric, std::uint64_t seed) const;

  void write_csv(const std::string& path) const;
  static ResultsTable read_csv(const std::string& path);

 private:
  std::vector<ResultRow> rows_;
};

double median(std::vector<double> xs);

}  // namespace fenc::harness
