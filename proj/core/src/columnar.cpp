#include "driveby/columnar.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "driveby/error.hpp"

namespace driveby {

namespace {

constexpr char kColumnMagic[8] = {'D', 'R', 'V', 'B', 'Y', 'C', 'O', 'L'};
constexpr char kMatrixMagic[8] = {'D', 'R', 'V', 'B', 'Y', 'M', 'A', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated file " + path.string());
  return v;
}

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  return std::filesystem::path(p.string() + ".json");
}

void check_magic(std::istream& in, const char (&magic)[8], const std::filesystem::path& path) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0)
    throw IoError("unrecognized file format: " + path.string());
  if (get<std::uint32_t>(in, path) != kFormatVersion)
    throw IoError("unsupported file version: " + path.string());
}

std::vector<double> to_double(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

std::vector<std::uint8_t> to_flags(const std::vector<double>& v) {
  std::vector<std::uint8_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] != 0.0 ? 1 : 0;
  return out;
}

const char* const kAxlePrefix[2] = {"front_", "rear_"};

}  // namespace

const std::vector<double>& ColumnTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return columns[i];
  throw IoError("missing column '" + name + "'");
}

bool ColumnTable::has(const std::string& name) const {
  for (const auto& n : names)
    if (n == name) return true;
  return false;
}

void ColumnTable::add(std::string name, std::vector<double> values) {
  if (!columns.empty() && values.size() != rows())
    throw InvalidInput("column '" + name + "' has a different length");
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void write_columns(const std::filesystem::path& path, const ColumnTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kColumnMagic, 8);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(table.columns.size()));
  put(out, static_cast<std::uint64_t>(table.rows()));
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string& name = table.names[c];
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.write(reinterpret_cast<const char*>(table.columns[c].data()),
              static_cast<std::streamsize>(table.columns[c].size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing " + path.string());
  nlohmann::json manifest = table.manifest;
  manifest["columns"] = table.names;
  manifest["rows"] = table.rows();
  write_json(sidecar_path(path), manifest);
}

ColumnTable read_columns(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  check_magic(in, kColumnMagic, path);
  const auto ncols = get<std::uint64_t>(in, path);
  const auto nrows = get<std::uint64_t>(in, path);
  if (ncols > 1'000'000 || nrows > (1ull << 34)) throw IoError("implausible header in " + path.string());
  ColumnTable t;
  for (std::uint64_t c = 0; c < ncols; ++c) {
    const auto len = get<std::uint32_t>(in, path);
    if (len > 4096) throw IoError("implausible column name in " + path.string());
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::vector<double> data(nrows);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(nrows * sizeof(double)));
    if (!in) throw IoError("truncated file " + path.string());
    t.names.push_back(std::move(name));
    t.columns.push_back(std::move(data));
  }
  if (std::filesystem::exists(sidecar_path(path))) t.manifest = read_json(sidecar_path(path));
  return t;
}

ColumnTable crossing_table(const CrossingRecord& r, ChannelSet channels) {
  ColumnTable t;
  t.manifest = r.metadata;
  t.manifest["time_step"] = r.time_step;
  t.manifest["speed"] = r.speed;
  t.manifest["span_length"] = r.span_length;
  t.manifest["channel_set"] = channels == ChannelSet::full ? "full" : "axle";
  t.add("time", r.time);
  for (int i = 0; i < 2; ++i) {
    const AxleChannels& a = r.axles[i];
    const std::string p = kAxlePrefix[i];
    t.add(p + "position", a.position);
    t.add(p + "on_span", to_double(a.on_span));
    t.add(p + "z", a.z);
    t.add(p + "z_dot", a.z_dot);
    t.add(p + "z_ddot", a.z_ddot);
    t.add(p + "contact_force", a.contact_force);
    t.add(p + "road", a.road);
    t.add(p + "cp_displacement", a.cp_displacement);
  }
  if (channels == ChannelSet::full) {
    t.add("body_z", r.body_z);
    t.add("body_z_dot", r.body_z_dot);
    t.add("body_z_ddot", r.body_z_ddot);
    t.add("pitch", r.pitch);
    t.add("pitch_dot", r.pitch_dot);
    t.add("pitch_ddot", r.pitch_ddot);
    t.add("midspan_displacement", r.midspan_displacement);
    for (Eigen::Index d = 0; d < r.bridge_displacement.rows(); ++d) {
      const Eigen::VectorXd row = r.bridge_displacement.row(d).transpose();
      t.add("bridge_z_" + std::to_string(d), {row.data(), row.data() + row.size()});
    }
  }
  return t;
}

CrossingRecord crossing_from_table(const ColumnTable& t) {
  CrossingRecord r;
  r.metadata = t.manifest;
  r.time_step = t.manifest.at("time_step").get<double>();
  r.speed = t.manifest.value("speed", 0.0);
  r.span_length = t.manifest.value("span_length", 0.0);
  r.time = t.column("time");
  for (int i = 0; i < 2; ++i) {
    AxleChannels& a = r.axles[i];
    const std::string p = kAxlePrefix[i];
    a.position = t.column(p + "position");
    a.on_span = to_flags(t.column(p + "on_span"));
    a.z = t.column(p + "z");
    a.z_dot = t.column(p + "z_dot");
    a.z_ddot = t.column(p + "z_ddot");
    a.contact_force = t.column(p + "contact_force");
    a.road = t.column(p + "road");
    a.cp_displacement = t.column(p + "cp_displacement");
  }
  auto optional = [&](const char* name, std::vector<double>& dst) {
    if (t.has(name)) dst = t.column(name);
  };
  optional("body_z", r.body_z);
  optional("body_z_dot", r.body_z_dot);
  optional("body_z_ddot", r.body_z_ddot);
  optional("pitch", r.pitch);
  optional("pitch_dot", r.pitch_dot);
  optional("pitch_ddot", r.pitch_ddot);
  optional("midspan_displacement", r.midspan_displacement);
  return r;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const nlohmann::json& sidecar) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMatrixMagic, 8);
  put(out, kFormatVersion);
  put(out, static_cast<std::uint64_t>(m.rows()));
  put(out, static_cast<std::uint64_t>(m.cols()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
  nlohmann::json meta = sidecar;
  meta["rows"] = m.rows();
  meta["cols"] = m.cols();
  write_json(sidecar_path(path), meta);
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path, nlohmann::json* sidecar) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  check_magic(in, kMatrixMagic, path);
  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  if (rows * cols > (1ull << 32)) throw IoError("implausible matrix size in " + path.string());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
      static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!in) throw IoError("truncated file " + path.string());
  if (sidecar) *sidecar = std::filesystem::exists(sidecar_path(path)) ? read_json(sidecar_path(path))
                                                                      : nlohmann::json::object();
  return rm;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write-then-rename so an interrupted run never leaves a half-written file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace driveby
