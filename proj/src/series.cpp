#include "stablegarch/series.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace stablegarch {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int resolve(const CsvColumn& col, const std::vector<std::string>& header, int fallback) {
  if (col.index) {
    if (*col.index < 0 || *col.index >= static_cast<int>(header.size()))
      throw CsvError("column index " + std::to_string(*col.index) + " out of range");
    return *col.index;
  }
  if (col.name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == *col.name) return static_cast<int>(i);
    throw CsvError("column '" + *col.name + "' not found in header");
  }
  return fallback;
}

}  // namespace

void ReturnSeries::validate() const {
  if (values.size() < 1) throw std::invalid_argument("return series is empty");
  std::string bad;
  int count = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values(i))) {
      if (count++ < 10) bad += (bad.empty() ? "" : ", ") + std::to_string(i + 1);
    }
  }
  if (count > 0)
    throw std::invalid_argument("non-finite returns at rows " + bad + (count > 10 ? ", ..." : ""));
  if (!dates.empty()) {
    if (static_cast<Eigen::Index>(dates.size()) != values.size())
      throw std::invalid_argument("dates and values differ in length");
    for (std::size_t i = 1; i < dates.size(); ++i)
      if (!(dates[i - 1] < dates[i]))
        throw std::invalid_argument("dates not strictly increasing at row " + std::to_string(i + 1));
  }
}

ReturnSeries ReturnSeries::from_values(Eigen::VectorXd values) {
  ReturnSeries s;
  s.values = std::move(values);
  return s;
}

ReturnSeries parse_returns_csv(const std::string& text, const CsvReadOptions& opts) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_row(line);
    break;
  }
  if (header.empty()) throw CsvError("empty CSV: no header row");
  const int vcol = resolve(opts.value, header, static_cast<int>(header.size()) - 1);
  int dcol = -1;
  if (opts.date.name || opts.date.index) {
    dcol = resolve(opts.date, header, -1);
  } else {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == "date" && static_cast<int>(i) != vcol) dcol = static_cast<int>(i);
  }
  std::vector<double> vals;
  std::vector<std::string> dates;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line);
    if (static_cast<int>(cells.size()) <= std::max(vcol, dcol))
      throw CsvError("row " + std::to_string(row) + ": expected at least " +
                     std::to_string(std::max(vcol, dcol) + 1) + " columns");
    const std::string& s = cells[vcol];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw CsvError("row " + std::to_string(row) + ", column '" + header[vcol] +
                     "': cannot parse '" + s + "' as a number");
    vals.push_back(v);
    if (dcol >= 0) dates.push_back(cells[dcol]);
  }
  if (vals.empty()) throw CsvError("CSV has a header but no data rows");
  ReturnSeries out;
  out.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  out.dates = std::move(dates);
  out.validate();
  return out;
}

ReturnSeries read_returns_csv(const std::string& path, const CsvReadOptions& opts) {
  std::ifstream f(path);
  if (!f) throw CsvError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_returns_csv(buf.str(), opts);
}

void write_returns_csv(const std::string& path, const ReturnSeries& series,
                       const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra) {
  std::ofstream f(path);
  if (!f) throw CsvError("cannot write '" + path + "'");
  f << (series.has_dates() ? "date" : "t") << ",eps";
  for (const auto& [name, col] : extra) {
    if (col.size() != series.size()) throw std::invalid_argument("extra column length mismatch");
    f << ',' << name;
  }
  f << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    if (series.has_dates()) f << series.dates[i];
    else f << i + 1;
    f << ',' << series.values(i);
    for (const auto& [name, col] : extra) f << ',' << col(i);
    f << '\n';
  }
}

}  // namespace stablegarch
