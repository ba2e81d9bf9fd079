#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gda/equilibrium.hpp"
#include "gda/surface.hpp"
#include "gda/verification.hpp"

namespace gda {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // throws IoError if absent
};

/// 12 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double v);
double parse_number(const std::string& s);

/// RFC-4180 quoting, header row, LF line endings.
void write_csv(std::ostream& os, const CsvTable& table);
void emit_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::filesystem::path& path);

/// Columns t, a_1..a_d, pi_1..pi_d, v, y, m, residual.
CsvTable strategy_path_table(const StrategyPath& path);
StrategyPath strategy_path_from_table(const CsvTable& table);
StrategyPath read_strategy_path_csv(const std::filesystem::path& path);

/// Columns v, y_on_curve, mrs.
CsvTable indifference_table(const std::vector<IndifferenceRow>& rows);
/// Columns t, k_index, first_order_coeff, pass.
CsvTable certification_table(const std::vector<CertificationRow>& rows);

}  // namespace gda
