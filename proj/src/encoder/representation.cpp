#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "fenc/encoder/coefficients.hpp"

namespace fenc {

void write_representation_csv(const std::string& path, const Representation<double>& rep) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "basis_id,b,m\n" << rep.basis_id << ',' << rep.num_basis() << ',' << rep.output_dim() << '\n';
  char buf[32];
  for (Index i = 0; i < rep.num_basis(); ++i) {
    for (Index j = 0; j < rep.output_dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", rep.coefficients(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Index positive(const std::string& path, const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < 1) throw std::runtime_error(path + ": bad dimension '" + s + "'");
  return static_cast<Index>(v);
}

}  // namespace

Representation<double> read_representation_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "basis_id,b,m") throw std::runtime_error(path + ": expected header basis_id,b,m");
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing basis_id,b,m values");
  const auto head = split(line);
  if (head.size() != 3 || head[0].empty()) throw std::runtime_error(path + ": malformed basis_id,b,m values");
  Representation<double> rep;
  rep.basis_id = head[0];
  const Index b = positive(path, head[1]), m = positive(path, head[2]);
  rep.coefficients.resize(b, m);
  for (Index i = 0; i < b; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": expected " + std::to_string(b) + " rows");
    const auto cells = split(line);
    if (static_cast<Index>(cells.size()) != m) throw std::runtime_error(path + ": row has wrong width");
    for (Index j = 0; j < m; ++j) {
      char* end = nullptr;
      rep.coefficients(i, j) = std::strtod(cells[j].c_str(), &end);
      if (end == cells[j].c_str()) throw std::runtime_error(path + ": malformed number '" + cells[j] + "'");
    }
  }
  return rep;
}

}  // namespace fenc
