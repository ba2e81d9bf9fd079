#include "gda/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gda/errors.hpp"

namespace gda {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw IoError("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError("CSV column '" + name + "' not found");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw IoError("not a number: '" + s + "'");
  } catch (const std::out_of_range&) {
    throw IoError("number out of range: '" + s + "'");
  }
}

namespace {

void write_field(std::ostream& os, const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) {
    os << f;
    return;
  }
  os << '"';
  for (char c : f) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void write_record(std::ostream& os, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) os << ',';
    write_field(os, rec[i]);
  }
  os << '\n';
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& table) {
  write_record(os, table.header);
  for (const auto& r : table.rows) write_record(os, r);
}

void emit_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os, table);
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

CsvTable read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && is.peek() == '\n') is.get(c);
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw IoError("unterminated quoted CSV field");
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw IoError("empty CSV input");
  CsvTable t;
  t.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) t.add_row(std::move(records[i]));
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_csv(is);
}

CsvTable strategy_path_table(const StrategyPath& path) {
  const int d = path.d();
  CsvTable t;
  t.header.push_back("t");
  for (int j = 1; j <= d; ++j) t.header.push_back("a_" + std::to_string(j));
  for (int j = 1; j <= d; ++j) t.header.push_back("pi_" + std::to_string(j));
  for (const char* c : {"v", "y", "m", "residual"}) t.header.emplace_back(c);
  for (std::size_t i = 0; i < path.size(); ++i) {
    std::vector<std::string> r{format_number(path.grid[i])};
    for (int j = 0; j < d; ++j) r.push_back(format_number(path.a[i](j)));
    for (int j = 0; j < d; ++j) r.push_back(format_number(path.pi[i](j)));
    r.push_back(format_number(path.v[i]));
    r.push_back(format_number(path.y[i]));
    r.push_back(format_number(path.m_val[i]));
    r.push_back(format_number(path.residual[i]));
    t.add_row(std::move(r));
  }
  return t;
}

StrategyPath strategy_path_from_table(const CsvTable& table) {
  int d = 0;
  while (true) {
    const std::string name = "a_" + std::to_string(d + 1);
    bool found = false;
    for (const auto& h : table.header) found = found || h == name;
    if (!found) break;
    ++d;
  }
  if (d == 0) throw IoError("strategy CSV has no a_1 column");
  const std::size_t ct = table.column("t");
  const std::size_t cv = table.column("v");
  const std::size_t cy = table.column("y");
  const std::size_t cm = table.column("m");
  const std::size_t cr = table.column("residual");
  StrategyPath p;
  for (const auto& row : table.rows) {
    p.grid.push_back(parse_number(row[ct]));
    Eigen::VectorXd a(d), pi(d);
    for (int j = 0; j < d; ++j) {
      a(j) = parse_number(row[table.column("a_" + std::to_string(j + 1))]);
      pi(j) = parse_number(row[table.column("pi_" + std::to_string(j + 1))]);
    }
    p.a.push_back(a);
    p.pi.push_back(pi);
    p.v.push_back(parse_number(row[cv]));
    p.y.push_back(parse_number(row[cy]));
    p.m_val.push_back(parse_number(row[cm]));
    p.residual.push_back(parse_number(row[cr]));
  }
  return p;
}

StrategyPath read_strategy_path_csv(const std::filesystem::path& path) {
  return strategy_path_from_table(read_csv(path));
}

CsvTable indifference_table(const std::vector<IndifferenceRow>& rows) {
  CsvTable t;
  t.header = {"v", "y_on_curve", "mrs"};
  for (const auto& r : rows)
    t.add_row({format_number(r.v), format_number(r.y_on_curve), format_number(r.mrs)});
  return t;
}

CsvTable certification_table(const std::vector<CertificationRow>& rows) {
  CsvTable t;
  t.header = {"t", "k_index", "first_order_coeff", "pass"};
  for (const auto& r : rows)
    t.add_row({format_number(r.t), std::to_string(r.k_index), format_number(r.first_order_coeff),
               r.pass ? "true" : "false"});
  return t;
}

}  // namespace gda
