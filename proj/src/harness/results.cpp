#include "fenc/harness/results.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fenc/harness/config.hpp"

namespace fenc::harness {

void ResultsTable::add(std::string config_hash, std::uint64_t seed, std::string metric, double value) {
  if (metric.find(',') != std::string::npos) throw std::invalid_argument("metric names may not contain ','");
  rows_.push_back({std::move(config_hash), seed, std::move(metric), value});
}

void ResultsTable::append(const ResultsTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::vector<double> ResultsTable::values(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows_)
    if (r.metric == metric) out.push_back(r.value);
  return out;
}

std::optional<double> ResultsTable::value(const std::string& metric, std::uint64_t seed) const {
  for (const auto& r : rows_)
    if (r.metric == metric && r.seed == seed) return r.value;
  return std::nullopt;
}

void ResultsTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "config_hash,seed,metric,value\n";
  for (const auto& r : rows_)
    out << r.config_hash << ',' << r.seed << ',' << r.metric << ',' << format_number(r.value) << '\n';
}

ResultsTable ResultsTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "config_hash,seed,metric,value")
    throw std::runtime_error(path + ": bad results header");
  ResultsTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string hash, seed, metric, value;
    if (!std::getline(ss, hash, ',') || !std::getline(ss, seed, ',') || !std::getline(ss, metric, ',') ||
        !std::getline(ss, value))
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    t.rows_.push_back({hash, std::stoull(seed), metric, std::stod(value)});
  }
  return t;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace fenc::harness
