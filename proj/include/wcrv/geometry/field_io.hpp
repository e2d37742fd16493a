#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "wcrv/geometry/surface.hpp"

namespace wcrv {

inline constexpr char kFieldMagic[16] = {'W', 'C', 'R', 'V', '-', 'F', 'I', 'E',
                                         'L', 'D', '-', 'v', '1', '\0', '\0', '\0'};

/// CSV layout: header "index,value", one node per row.
inline void write_field_csv(std::ostream& out, const Eigen::VectorXd& values) {
  out << "index,value\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
}

inline Eigen::VectorXd read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty field CSV");
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("bad field CSV row: " + line);
    const long idx = std::stol(line.substr(0, comma));
    if (idx != static_cast<long>(vals.size()))
      throw ValidationError("field CSV indices are not consecutive at row " + line);
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

/// Compact binary layout: 16-byte magic, little-endian u64 count, f64 values.
inline void write_field_binary(std::ostream& out, const Eigen::VectorXd& values) {
  out.write(kFieldMagic, 16);
  const std::uint64_t n = static_cast<std::uint64_t>(values.size());
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

inline Eigen::VectorXd read_field_binary(std::istream& in) {
  char magic[16];
  in.read(magic, 16);
  if (!in || std::memcmp(magic, kFieldMagic, 16) != 0)
    throw ValidationError("bad field file magic");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ValidationError("truncated field file");
  return v;
}

inline void save_field(const std::string& path, const Eigen::VectorXd& values) {
  const bool binary = path.size() >= 4 && path.substr(path.size() - 4) == ".bin";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ValidationError("cannot write " + path);
  if (binary)
    write_field_binary(out, values);
  else
    write_field_csv(out, values);
}

inline Eigen::VectorXd load_field(const std::string& path) {
  const bool binary = path.size() >= 4 && path.substr(path.size() - 4) == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ValidationError("cannot read " + path);
  return binary ? read_field_binary(in) : read_field_csv(in);
}

} // namespace wcrv
