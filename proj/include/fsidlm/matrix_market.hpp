#pragma once

#include "fsidlm/csr.hpp"

#include <string>
#include <vector>

namespace fsidlm {

/// Coordinate-format Matrix Market writer/reader ("matrix coordinate real
/// general", 1-based indices) plus the dense "array" format for vectors.
void write_matrix_market(const CsrMatrix& m, const std::string& path);
[[nodiscard]] CsrMatrix read_matrix_market(const std::string& path);

void write_matrix_market_vector(const std::vector<double>& v, const std::string& path);
[[nodiscard]] std::vector<double> read_matrix_market_vector(const std::string& path);

} // namespace fsidlm
