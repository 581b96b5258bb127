#pragma once

#include <string>
#include <vector>

#include "nldep/samples.hpp"

namespace nldep {

// Header row required; comma separated, '.' decimals. Row numbers in errors
// are 1-based file lines, so the first data row is row 2.
std::vector<std::vector<double>> read_csv_columns(const std::string& path, const std::vector<std::string>& columns);

PairedSample ingest_paired(const std::string& path, const std::string& x_column, const std::string& y_column);
SeriesSample ingest_series(const std::string& path, const std::string& column);

// 100 (ln p_t - ln p_{t-1}); length n - 1. Throws DomainError on a
// nonpositive price.
std::vector<double> log_returns(const SeriesSample& prices);

// Writes a header and one row per index; columns must have equal length.
std::string to_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns);

}  // namespace nldep
