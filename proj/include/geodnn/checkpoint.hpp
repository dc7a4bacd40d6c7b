#pragma once

// Network checkpoints as JSON:
//
//   {
//     "format": "geodnn-network",
//     "version": 1,
//     "widths": [p0, ..., pL+1],
//     "layers": [ {"weights": [[row 0], [row 1], ...], "bias": [...]}, ... ]
//   }
//
// Weight matrices are stored row-major (one JSON array per output unit).
// Doubles are written with round-trip precision so load(save(p)) == p.

#include <fstream>
#include <string>

#include <json.hpp>

#include "geodnn/nn.hpp"

namespace geodnn {

inline constexpr const char* kNetworkFormat = "geodnn-network";
inline constexpr int kNetworkFormatVersion = 1;

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::io, "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorKind::io, "ragged matrix at row " + std::to_string(i));
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline nlohmann::json vector_to_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json to_json(const NetworkParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < p.layer_count(); ++l)
    layers.push_back({{"weights", matrix_to_json(p.weights[l])}, {"bias", vector_to_json(p.biases[l])}});
  return {{"format", kNetworkFormat}, {"version", kNetworkFormatVersion}, {"widths", p.widths}, {"layers", layers}};
}

inline NetworkParams network_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kNetworkFormat)
      throw Error(ErrorKind::io, "not a network checkpoint");
    if (j.at("version").get<int>() != kNetworkFormatVersion)
      throw Error(ErrorKind::io, "unsupported checkpoint version " + j.at("version").dump());
    NetworkParams p;
    p.widths = j.at("widths").get<std::vector<int>>();
    validate_widths(p.widths);
    const auto& layers = j.at("layers");
    if (layers.size() + 1 != p.widths.size()) throw Error(ErrorKind::io, "layer count does not match widths");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Matrix w = matrix_from_json(layers[l].at("weights"));
      Vector b = vector_from_json(layers[l].at("bias"));
      if (w.rows() != p.widths[l + 1] || w.cols() != p.widths[l] || b.size() != p.widths[l + 1])
        throw Error(ErrorKind::io, "layer " + std::to_string(l) + " shape does not match widths");
      p.weights.push_back(std::move(w));
      p.biases.push_back(std::move(b));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_network(const NetworkParams& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << to_json(p).dump(1) << '\n';
}

inline NetworkParams load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  try {
    return network_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::io, path + ": " + e.what());
  }
}

}  // namespace geodnn
