#ifndef XNESTCV_IO_HPP
#define XNESTCV_IO_HPP

#include <cctype>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "xnestcv/simulation.hpp"

namespace xnestcv {

namespace detail {

inline char sniff_delimiter(const std::string& line) {
  if (line.find('\t') != std::string::npos) return '\t';
  return ',';
}

inline std::vector<std::string> split_line(const std::string& line,
                                           char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.push_back("");
  return cells;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Strict double parse: decimal point only, scientific notation accepted.
inline bool parse_double(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && std::isfinite(out);
}

}  // namespace detail

// Numeric CSV/TSV into a matrix. A first row with any non-numeric cell is
// treated as a header and skipped. Malformed cells report 1-based
// coordinates (header excluded from the row count).
inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long file_row = 0;
  bool checked_header = false;
  char delim = ',';
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++file_row;
    if (detail::trim(line).empty()) continue;
    if (!checked_header) {
      delim = detail::sniff_delimiter(line);
      checked_header = true;
      std::vector<std::string> cells = detail::split_line(line, delim);
      bool all_numeric = true;
      double tmp;
      for (const std::string& c : cells)
        if (!detail::parse_double(c, tmp)) {
          all_numeric = false;
          break;
        }
      if (!all_numeric) continue;  // header row
    }
    std::vector<std::string> cells = detail::split_line(line, delim);
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (!detail::parse_double(cells[c], v))
        throw IngestError("non-numeric cell '" + detail::trim(cells[c]) +
                              "' at row " + std::to_string(file_row) +
                              ", column " + std::to_string(c + 1),
                          file_row, static_cast<long>(c + 1));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IngestError("row " + std::to_string(file_row) + " has " +
                            std::to_string(row.size()) +
                            " cells, expected " +
                            std::to_string(rows.front().size()),
                        file_row);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IngestError("no data rows in " + path);
  Matrix out(static_cast<Index>(rows.size()),
             static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

inline Vector read_vector_csv(const std::string& path) {
  Matrix m = read_matrix_csv(path);
  if (m.cols() != 1)
    throw IngestError("expected a single-column response file, got " +
                      std::to_string(m.cols()) + " columns in " + path);
  return m.col(0);
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write file: " + path);
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// JSON object with the fixed report schema; numbers carry 17 significant
// digits.
inline nlohmann::ordered_json report_to_json(const TestReport& rep) {
  nlohmann::ordered_json j;
  j["test"] = rep.test;
  j["statistic"] = rep.statistic;
  j["df"] = rep.df;
  j["p_value"] = rep.p_value;
  j["lower_bound"] = rep.lower_bound;
  j["delta_hat_percent"] = rep.delta_hat;
  j["avg_lambda"] = rep.avg_lambda;
  j["alpha"] = rep.alpha;
  j["reject"] = rep.reject;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  flags["degenerate_variance"] = rep.degenerate;
  for (const std::string& f : rep.mode_flags) {
    const std::size_t eq = f.find('=');
    if (eq == std::string::npos)
      flags[f] = true;
    else
      flags[f.substr(0, eq)] = f.substr(eq + 1);
  }
  for (const auto& [k, v] : rep.mode_values) flags[k] = v;
  j["mode_flags"] = flags;
  return j;
}

inline std::string report_to_json_string(const TestReport& rep) {
  return report_to_json(rep).dump(2);
}

inline void write_sweep_rows_csv(const std::string& path,
                                 const SweepResult& sweep) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write file: " + path);
  out << "test,xi,replicate,p_value,reject,delta_hat,avg_lambda\n";
  for (const SweepRow& r : sweep.rows)
    out << r.test << "," << format_double(r.xi) << "," << r.replicate << ","
        << format_double(r.p_value) << "," << (r.reject ? 1 : 0) << ","
        << format_double(r.delta_hat) << "," << format_double(r.avg_lambda)
        << "\n";
}

inline void write_sweep_summary_csv(const std::string& path,
                                    const SweepResult& sweep) {
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write file: " + path);
  out << "test,xi,rejection_rate,mean_delta,mean_avg_lambda,replicates\n";
  for (const SweepCell& c : sweep.summary)
    out << c.test << "," << format_double(c.xi) << ","
        << format_double(c.rejection_rate) << ","
        << format_double(c.mean_delta) << ","
        << format_double(c.mean_avg_lambda) << "," << c.replicates << "\n";
}

// key = value config file, one pair per line, '#' comments. Unknown keys are
// an error so typos never silently fall back to defaults.
inline SimConfig parse_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  SimConfig cfg;
  std::string line;
  std::vector<std::string> unknown;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto as_double = [&](const std::string& v) {
      double d;
      if (!detail::parse_double(v, d))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": non-numeric value for " + key);
      return d;
    };
    auto as_index = [&](const std::string& v) {
      return static_cast<Index>(std::llround(as_double(v)));
    };
    if (key == "n") cfg.n = as_index(value);
    else if (key == "gamma") cfg.gamma = as_double(value);
    else if (key == "cov") {
      if (value == "compound_symmetric" || value == "cs")
        cfg.cov = CovStructure::kCompoundSymmetric;
      else if (value == "heteroskedastic" || value == "het")
        cfg.cov = CovStructure::kHeteroskedastic;
      else
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unknown cov '" + value + "'");
    } else if (key == "xi") {
      cfg.xis.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ' '))
        if (!detail::trim(tok).empty()) cfg.xis.push_back(as_double(tok));
    } else if (key == "rho") cfg.rho = as_double(value);
    else if (key == "sigma2_eps") cfg.sigma2_eps = as_double(value);
    else if (key == "b") cfg.b = as_index(value);
    else if (key == "alpha") cfg.alpha = as_double(value);
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "tests") {
      cfg.tests.clear();
      std::istringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ' '))
        if (!detail::trim(tok).empty()) cfg.tests.push_back(detail::trim(tok));
    } else if (key == "kfold_k") cfg.kfold_k = as_index(value);
    else if (key == "grid_size") cfg.grid_size = as_index(value);
    else if (key == "threads")
      cfg.threads = static_cast<unsigned>(as_index(value));
    else unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  try {
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace xnestcv

#endif  // XNESTCV_IO_HPP
