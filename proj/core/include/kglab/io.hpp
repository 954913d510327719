#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "kglab/reduction.hpp"
#include "kglab/sampler.hpp"

namespace kglab {

// CSV writers print %.17g throughout so rerunning a configuration reproduces
// artifacts byte for byte.
void write_field_csv(std::ostream& os, const FieldSample& sample);
void write_grid_csv(std::ostream& os, const GridField& grid);

// Dense matrix container: 8-byte magic "KGFIELD1", u64 rows, u64 cols (both
// little-endian), then rows*cols doubles in row-major order.
void write_matrix_binary(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(std::istream& is);

std::string iso_timestamp_utc();

}  // namespace kglab
