#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "driveby/vbi_solver.hpp"

namespace driveby {

/// Named double columns of equal length.
struct ColumnTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  nlohmann::json manifest = nlohmann::json::object();

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
  void add(std::string name, std::vector<double> values);
};

/// Binary columns plus a pretty-printed JSON manifest next to it
/// (`<path>.json`).
void write_columns(const std::filesystem::path& path, const ColumnTable& table);
ColumnTable read_columns(const std::filesystem::path& path);

enum class ChannelSet {
  axle,  // axle kinematics, contact forces, road and CP ground truth
  full,  // also body states, midspan deflection and nodal bridge displacements
};

ColumnTable crossing_table(const CrossingRecord& record, ChannelSet channels = ChannelSet::axle);
CrossingRecord crossing_from_table(const ColumnTable& table);

/// Dense row-major matrix file with a JSON sidecar (`<path>.json`).
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const nlohmann::json& sidecar);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path, nlohmann::json* sidecar = nullptr);

/// Serialized JSON helpers that map failures to IoError.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace driveby
