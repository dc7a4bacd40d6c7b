#pragma once

// Labeled manifold data, plus CSV/JSON readers and writers.
//
// Dataset CSV layout:
//
//   # geodnn-dataset manifold=<tag> targets=<labels|values> n=<count>
//   target,c0,c1,...
//   <target>,<coordinate 0>,<coordinate 1>,...
//
// Coordinates are the ambient vector for sphere/preshape points and the
// row-major matrix entries for SPD points. Numbers use %.17g.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geodnn/checkpoint.hpp"
#include "geodnn/manifold.hpp"
#include "geodnn/nn.hpp"
#include "geodnn/shape.hpp"

namespace geodnn {

struct Dataset {
  std::vector<ManifoldPoint> inputs;
  Targets targets;
  nlohmann::json provenance;

  std::size_t size() const { return inputs.size(); }

  Dataset subset(const std::vector<int>& idx) const {
    Dataset d{{}, select_targets(targets, idx), provenance};
    d.inputs.reserve(idx.size());
    for (int i : idx) d.inputs.push_back(inputs[static_cast<std::size_t>(i)]);
    return d;
  }

  void validate() const {
    if (inputs.size() != target_count(targets))
      throw Error(ErrorKind::shape, "dataset has " + std::to_string(inputs.size()) + " inputs and " +
                                        std::to_string(target_count(targets)) + " targets");
    if (const auto* labels = std::get_if<Labels>(&targets))
      for (int y : *labels)
        if (y < 0) throw Error(ErrorKind::invalid_spec, "negative class label");
    for (std::size_t i = 1; i < inputs.size(); ++i)
      if (!inputs[i].same_space(inputs[0]))
        throw Error(ErrorKind::geometry, "sample " + std::to_string(i) + " is on " + inputs[i].tag() + ", expected " +
                                             inputs[0].tag());
  }
};

namespace io {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = first + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

/// Parses one CSV row of numbers. Returns false when any cell is not a number
/// (so a header row can be skipped).
inline bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  for (const auto& cell : split(line)) {
    double x;
    if (!parse_double(cell, x)) return false;
    out.push_back(x);
  }
  return true;
}

/// Landmark CSV: one shape per row, 2k columns x1,y1,...,xk,yk, optional
/// header row. Returns the raw interleaved landmark vectors.
inline std::vector<Vector> load_landmark_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::vector<Vector> shapes;
  std::string line;
  std::vector<double> row;
  std::size_t line_no = 0, width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!parse_row(line, row)) {
      if (shapes.empty() && line_no == 1) continue;  // header
      throw Error(ErrorKind::io, path + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (row.size() % 2 != 0 || row.size() < 6)
      throw Error(ErrorKind::io, path + ":" + std::to_string(line_no) + ": need 2k >= 6 columns");
    if (width && row.size() != width) throw Error(ErrorKind::io, path + ":" + std::to_string(line_no) + ": ragged row");
    width = row.size();
    shapes.push_back(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
  }
  return shapes;
}

/// SPD CSV: each matrix is a block of d rows with d numbers; blocks are
/// separated by blank lines. Every matrix is validated as SPD.
inline std::vector<ManifoldPoint> load_spd_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::vector<ManifoldPoint> out;
  std::vector<std::vector<double>> block;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (block.empty()) return;
    const auto d = block.size();
    Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (block[i].size() != d)
        throw Error(ErrorKind::io, path + ": matrix " + std::to_string(out.size()) + " is not square");
      for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = block[i][j];
    }
    try {
      out.push_back(ManifoldPoint::spd(m));
    } catch (const Error& e) {
      rethrow_with_context(e, path + ": matrix " + std::to_string(out.size()));
    }
    block.clear();
  };
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (!parse_row(line, row)) throw Error(ErrorKind::io, path + ":" + std::to_string(line_no) + ": non-numeric cell");
    block.push_back(row);
  }
  flush();
  return out;
}

/// SPD JSON: an array of matrices, each an array of rows.
inline std::vector<ManifoldPoint> load_spd_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, path + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorKind::io, path + ": expected an array of matrices");
  std::vector<ManifoldPoint> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(ManifoldPoint::spd(matrix_from_json(j[i])));
    } catch (const Error& e) {
      rethrow_with_context(e, path + ": matrix " + std::to_string(i));
    }
  }
  return out;
}

inline void write_dataset_csv(const Dataset& d, std::ostream& out) {
  d.validate();
  const bool labels = is_classification(d.targets);
  const std::string tag = d.inputs.empty() ? "empty" : d.inputs.front().tag();
  out << "# geodnn-dataset manifold=" << tag << " targets=" << (labels ? "labels" : "values") << " n=" << d.size()
      << '\n';
  const auto width = d.inputs.empty() ? 0
                     : d.inputs.front().is_vector() ? d.inputs.front().coords().size()
                                                     : d.inputs.front().matrix().size();
  out << "target";
  for (Eigen::Index c = 0; c < width; ++c) out << ",c" << c;
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (labels)
      out << std::get<Labels>(d.targets)[i];
    else
      out << format_double(std::get<Values>(d.targets)[i]);
    const auto& x = d.inputs[i];
    if (x.is_vector()) {
      for (Eigen::Index c = 0; c < x.coords().size(); ++c) out << ',' << format_double(x.coords()(c));
    } else {
      const Matrix& m = x.matrix();
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
    }
    out << '\n';
  }
}

inline void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  write_dataset_csv(d, out);
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::string header;
  std::getline(in, header);
  std::string tag, kind;
  {
    std::istringstream hs(header);
    std::string tok;
    hs >> tok >> tok;
    if (tok != "geodnn-dataset") throw Error(ErrorKind::io, path + ": missing geodnn-dataset header");
    while (hs >> tok) {
      if (tok.rfind("manifold=", 0) == 0) tag = tok.substr(9);
      if (tok.rfind("targets=", 0) == 0) kind = tok.substr(8);
    }
  }
  const auto dash = tag.rfind('-');
  if (dash == std::string::npos) throw Error(ErrorKind::io, path + ": bad manifold tag '" + tag + "'");
  const std::string family = tag.substr(0, dash);
  std::string line;
  std::getline(in, line);  // column names
  Dataset d;
  Labels labels;
  Values values;
  std::vector<double> row;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!parse_row(line, row) || row.size() < 2)
      throw Error(ErrorKind::io, path + ":" + std::to_string(line_no) + ": malformed row");
    if (kind == "labels")
      labels.push_back(static_cast<int>(row[0]));
    else
      values.push_back(row[0]);
    Vector c = Eigen::Map<const Vector>(row.data() + 1, static_cast<Eigen::Index>(row.size() - 1));
    try {
      if (family == "sphere") {
        d.inputs.push_back(ManifoldPoint::sphere(c));
      } else if (family == "preshape") {
        d.inputs.push_back(ManifoldPoint::preshape(c));
      } else if (family == "spd") {
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(c.size()))));
        d.inputs.push_back(ManifoldPoint::spd(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                                              Eigen::RowMajor>>(c.data(), n, n)));
      } else {
        throw Error(ErrorKind::io, "unknown manifold family '" + family + "'");
      }
    } catch (const Error& e) {
      rethrow_with_context(e, path + ":" + std::to_string(line_no));
    }
  }
  if (kind == "labels")
    d.targets = std::move(labels);
  else
    d.targets = std::move(values);
  d.validate();
  return d;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace io
}  // namespace geodnn
