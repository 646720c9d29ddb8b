#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invlab::exp {

/// Mean and two-sided Student-t confidence interval over replicate values.
struct Interval {
  std::size_t n = 0;
  double mean = 0.0;
  /// NaN when n < 2.
  double half_width = 0.0;
  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

/// mean +- t_{(1+level)/2, n-1} * s / sqrt(n), s the sample standard deviation.
Interval t_interval(std::span<const double> values, double level = 0.95);

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  /// Missing when the replicate failed.
  std::optional<double> balanced_accuracy;
  std::optional<double> overall_ekld;
  /// Mean eKLD over the 10 smallest training classes.
  std::optional<double> tail_ekld;
  /// Per-class eKLD report of this replicate (JSON), relative to the table.
  std::string ekld_report;
  std::string error;

  bool ok() const { return balanced_accuracy.has_value(); }
  bool operator==(const ResultRow&) const = default;
};

struct MethodSummary {
  std::string method;
  Interval balanced_accuracy;
  Interval tail_ekld;
  std::size_t missing = 0;
};

/// One row per (method, seed).
class ResultsTable {
 public:
  /// Replaces an existing row with the same (method, seed).
  void upsert(ResultRow row);
  void append(const ResultsTable& other);

  const std::vector<ResultRow>& rows() const { return rows_; }
  std::vector<std::string> methods() const;  // first-seen order
  std::vector<ResultRow> rows_for(const std::string& method) const;
  std::size_t failures() const;

  std::vector<MethodSummary> summarize(double level = 0.95) const;

  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
  static ResultsTable read_csv(const std::filesystem::path& path);

  /// Markdown table of mean +- CI half-width per method.
  void write_summary(std::ostream& os, double level = 0.95) const;

  bool operator==(const ResultsTable&) const = default;

 private:
  std::vector<ResultRow> rows_;
};

}  // namespace invlab::exp
