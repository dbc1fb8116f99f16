#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stablegarch {

/// Observed returns eps_1..eps_n, optionally labelled with ISO-8601 dates.
struct ReturnSeries {
  std::vector<std::string> dates;  // empty, or one label per value
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  bool has_dates() const { return !dates.empty(); }

  /// Throws std::invalid_argument naming the offending entries.
  void validate() const;

  static ReturnSeries from_values(Eigen::VectorXd values);
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column selector: a header name or a zero-based index.
struct CsvColumn {
  std::optional<std::string> name;
  std::optional<int> index;
};

struct CsvReadOptions {
  CsvColumn value;  // defaults to the last column
  CsvColumn date;   // defaults to a column named "date", if present
};

/// Reads a headered, comma-separated file of returns.
ReturnSeries read_returns_csv(const std::string& path, const CsvReadOptions& opts = {});
ReturnSeries parse_returns_csv(const std::string& text, const CsvReadOptions& opts = {});

/// Writes "date,eps" (or "t,eps") plus any extra named columns of equal length.
void write_returns_csv(const std::string& path, const ReturnSeries& series,
                       const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra = {});

}  // namespace stablegarch
