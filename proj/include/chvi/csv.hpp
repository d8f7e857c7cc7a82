#ifndef CHVI_CSV_HPP
#define CHVI_CSV_HPP

// Minimal CSV: comma separated, '.' decimals, 17 significant digits, LF.

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chvi/config.hpp"
#include "chvi/errors.hpp"
#include "chvi/simulation.hpp"

namespace chvi {

inline constexpr std::string_view run_csv_header =
    "step,t,E_total,kinetic,dirichlet,potential,concave,dissipation_integral,ineq_residual,max_abs_u,norm_V_u,"
    "norm_H_v,norm_Vprime_v,newton_iters";

/// One run CSV row, without the trailing newline.
inline std::string run_csv_row(const StepRecord &r) {
  std::string s = std::to_string(r.step);
  for (double x : {r.t, r.energy.total, r.energy.kinetic, r.energy.dirichlet, r.energy.potential, r.energy.concave,
                   r.dissipation_integral, r.energy.inequality_residual, r.max_abs_u, r.u_norms.V, r.v_norms.H,
                   r.v_norms.Vprime}) {
    s += ',';
    s += format_double(x);
  }
  s += ',';
  s += std::to_string(r.newton_iters);
  return s;
}

/// Text output file that always writes '\n' line endings.
class CsvFile {
public:
  CsvFile(const std::filesystem::path &path, std::string_view header, bool append = false)
      : path_(path), out_(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc)) {
    if (!out_)
      throw IoError("cannot open " + path.string() + " for writing");
    if (!append)
      line(header);
  }

  void line(std::string_view text) {
    out_.write(text.data(), static_cast<std::streamsize>(text.size()));
    out_.put('\n');
    if (!out_)
      throw IoError("write failed: " + path_.string());
  }

  void row(const std::vector<double> &values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i)
        s += ',';
      s += format_double(values[i]);
    }
    line(s);
  }

  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
        return i;
    throw IoError("CSV has no column '" + std::string(name) + "'");
  }

  double number(std::size_t row, std::string_view name) const {
    const std::string &cell = rows.at(row).at(column(name));
    if (cell == "nan")
      return std::numeric_limits<double>::quiet_NaN();
    try {
      return std::stod(cell);
    } catch (const std::exception &) {
      throw IoError("CSV cell is not a number: '" + cell + "'");
    }
  }
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const auto c = line.find(',', pos);
    cells.emplace_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos)
      break;
    pos = c + 1;
  }
  return cells;
}

/// Reads a CSV with a header row. Rows are stored as raw text so that
/// values can be compared bit-exactly.
inline CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw IoError(path.string() + " has no header row");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw IoError(path.string() + ": row with " + std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text(const std::filesystem::path &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out)
    throw IoError("write failed: " + path.string());
}

} // namespace chvi

#endif // CHVI_CSV_HPP
