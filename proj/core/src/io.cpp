#include "kglab/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <ostream>
#include <istream>
#include <stdexcept>

namespace kglab {
namespace {

constexpr char kMagic[8] = {'K', 'G', 'F', 'I', 'E', 'L', 'D', '1'};

void put_u64_le(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = char((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  char buf[8];
  is.read(buf, 8);
  if (!is) throw std::runtime_error("matrix container truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[i])) << (8 * i);
  return v;
}

void put_g17(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_field_csv(std::ostream& os, const FieldSample& sample) {
  os << "index,t,x,w,z,value,replica,sampler\n";
  for (std::size_t i = 0; i < sample.points.size(); ++i) {
    const SpaceTimePoint& p = sample.points[i];
    const CharCoords c = p.to_char();
    os << i << ',';
    put_g17(os, p.t);
    os << ',';
    put_g17(os, p.x);
    os << ',';
    put_g17(os, c.w);
    os << ',';
    put_g17(os, c.z);
    os << ',';
    put_g17(os, sample.values[Eigen::Index(i)]);
    os << ',' << sample.seed.replica_id << ',' << sample.sampler << '\n';
  }
}

void write_grid_csv(std::ostream& os, const GridField& grid) {
  os << "t,x,value\n";
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i)
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
      put_g17(os, grid.t_at(i));
      os << ',';
      put_g17(os, grid.x_at(j));
      os << ',';
      put_g17(os, grid.values(i, j));
      os << '\n';
    }
}

void write_matrix_binary(std::ostream& os, const Eigen::MatrixXd& m) {
  os.write(kMagic, 8);
  put_u64_le(os, std::uint64_t(m.rows()));
  put_u64_le(os, std::uint64_t(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      char buf[8];
      std::memcpy(buf, &v, 8);
      os.write(buf, 8);
    }
}

Eigen::MatrixXd read_matrix_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("matrix container: bad magic");
  const std::uint64_t rows = get_u64_le(is), cols = get_u64_le(is);
  if (rows > (1u << 20) || cols > (1u << 20) || rows * cols > (std::uint64_t(1) << 28))
    throw std::runtime_error("matrix container: implausible dimensions");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      char buf[8];
      is.read(buf, 8);
      if (!is) throw std::runtime_error("matrix container truncated");
      double v;
      std::memcpy(&v, buf, 8);
      m(Eigen::Index(i), Eigen::Index(j)) = v;
    }
  return m;
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace kglab
