#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "invlab/exp/results.hpp"

namespace fs = std::filesystem;

namespace invlab::exp {

namespace {

std::string fmt(std::optional<double> v) {
  if (!v) return {};
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), *v);
  return std::string(buf.data(), r.ptr);
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

// Quotes a field when it holds a comma or quote. Line breaks become spaces
// so that every row stays on one line.
std::string quote(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"')
        out.back() += c;
      else if (i + 1 < line.size() && line[i + 1] == '"')
        out.back() += line[++i];
      else
        quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

Interval t_interval(std::span<const double> values, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  Interval r;
  r.n = values.size();
  if (r.n == 0) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    r.half_width = r.mean;
    return r;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n < 2) {
    r.half_width = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  const double sd = std::sqrt(ss / static_cast<double>(r.n - 1));
  const boost::math::students_t dist(static_cast<double>(r.n - 1));
  const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
  r.half_width = t * sd / std::sqrt(static_cast<double>(r.n));
  return r;
}

void ResultsTable::upsert(ResultRow row) {
  for (auto& r : rows_) {
    if (r.method == row.method && r.seed == row.seed) {
      r = std::move(row);
      return;
    }
  }
  rows_.push_back(std::move(row));
}

void ResultsTable::append(const ResultsTable& other) {
  for (const auto& r : other.rows_) upsert(r);
}

std::vector<std::string> ResultsTable::methods() const {
  std::vector<std::string> out;
  for (const auto& r : rows_)
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  return out;
}

std::vector<ResultRow> ResultsTable::rows_for(const std::string& method) const {
  std::vector<ResultRow> out;
  std::copy_if(rows_.begin(), rows_.end(), std::back_inserter(out), [&](const auto& r) { return r.method == method; });
  return out;
}

std::size_t ResultsTable::failures() const {
  return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return !r.ok(); }));
}

std::vector<MethodSummary> ResultsTable::summarize(double level) const {
  std::vector<MethodSummary> out;
  for (const auto& m : methods()) {
    std::vector<double> acc, tail;
    MethodSummary s;
    s.method = m;
    for (const auto& r : rows_for(m)) {
      if (!r.ok()) {
        ++s.missing;
        continue;
      }
      acc.push_back(*r.balanced_accuracy);
      if (r.tail_ekld) tail.push_back(*r.tail_ekld);
    }
    s.balanced_accuracy = t_interval(acc, level);
    s.tail_ekld = t_interval(tail, level);
    out.push_back(s);
  }
  return out;
}

void ResultsTable::write_csv(std::ostream& os) const {
  os << "method,seed,balanced_accuracy,overall_ekld,tail_ekld,ekld_report,error\n";
  for (const auto& r : rows_)
    os << quote(r.method) << ',' << r.seed << ',' << fmt(r.balanced_accuracy) << ',' << fmt(r.overall_ekld) << ','
       << fmt(r.tail_ekld) << ',' << quote(r.ekld_report) << ',' << quote(r.error) << '\n';
}

void ResultsTable::write_csv(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out);
}

ResultsTable ResultsTable::read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("method,seed,balanced_accuracy", 0) != 0) throw std::runtime_error(path.string() + ": not a results table");
  ResultsTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    ResultRow r;
    r.method = f[0];
    r.seed = std::stoull(f[1]);
    r.balanced_accuracy = parse_optional(f[2]);
    r.overall_ekld = parse_optional(f[3]);
    r.tail_ekld = parse_optional(f[4]);
    r.ekld_report = f[5];
    r.error = f[6];
    t.rows_.push_back(std::move(r));
  }
  return t;
}

void ResultsTable::write_summary(std::ostream& os, double level) const {
  const int pct = static_cast<int>(std::lround(level * 100));
  os << "| method | n | balanced accuracy (%) | " << pct << "% CI | tail eKLD | " << pct << "% CI | missing |\n"
     << "|---|---|---|---|---|---|---|\n";
  const auto show = [&](double v, double scale) {
    std::ostringstream s;
    if (std::isnan(v))
      s << "n/a";
    else
      s << std::fixed << std::setprecision(scale > 1 ? 2 : 4) << v * scale;
    return s.str();
  };
  for (const auto& s : summarize(level)) {
    os << "| " << s.method << " | " << s.balanced_accuracy.n << " | " << show(s.balanced_accuracy.mean, 100) << " | ± "
       << show(s.balanced_accuracy.half_width, 100) << " | " << show(s.tail_ekld.mean, 1) << " | ± "
       << show(s.tail_ekld.half_width, 1) << " | " << s.missing << " |\n";
  }
}

}  // namespace invlab::exp
