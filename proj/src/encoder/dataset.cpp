#include "fenc/encoder/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace fenc {

void write_dataset_csv(const std::string& path, const FunctionDataset& data) {
  data.validate();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (Eigen::Index k = 0; k < data.input_dim(); ++k) out << (k ? "," : "") << 'x' << k;
  for (Eigen::Index k = 0; k < data.output_dim(); ++k) out << ",y" << k;
  out << '\n';
  char buf[32];
  for (Eigen::Index s = 0; s < data.size(); ++s) {
    for (Eigen::Index k = 0; k < data.input_dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", data.inputs(k, s));
      out << (k ? "," : "") << buf;
    }
    for (Eigen::Index k = 0; k < data.output_dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", data.outputs(k, s));
      out << ',' << buf;
    }
    out << '\n';
  }
}

FunctionDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header");
  Eigen::Index n = 0, m = 0;
  {
    std::stringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (!col.empty() && col[0] == 'x' && m == 0)
        ++n;
      else if (!col.empty() && col[0] == 'y')
        ++m;
      else
        throw std::runtime_error(path + ": unexpected column '" + col + "'");
    }
  }
  if (n == 0 || m == 0) throw std::runtime_error(path + ": header needs x and y columns");
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      values.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str()) throw std::runtime_error(path + ": malformed number '" + cell + "'");
      ++count;
    }
    if (count != n + m) throw std::runtime_error(path + ": row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  const Eigen::Map<const Eigen::MatrixXd> table(values.data(), n + m, rows);
  FunctionDataset data{table.topRows(n), table.bottomRows(m), SamplingNote::uniform};
  data.validate();
  return data;
}

}  // namespace fenc
