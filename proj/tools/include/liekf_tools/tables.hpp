#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <liekf/monte_carlo.hpp>
#include <liekf_tools/config.hpp>

namespace liekf::tools {

/// A non-finite number reached an output table.
class NonFiniteOutput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::string, long long, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Shortest-round-trip-safe formatting: 17 significant digits, '.' separator,
/// independent of the global locale.
std::string format_double(double v);

/// CSV with a header row and LF line endings. Throws NonFiniteOutput.
std::string render_csv(const Table& t);
/// Array of row objects keyed by column name. Throws NonFiniteOutput.
std::string render_json(const Table& t);
std::string render(const Table& t, OutputFormat f);

/// EM convergence trace: window_length, em_iteration, G_over_n for run 0 and the first Θ⁰.
Table loglik_table(const McSummary& s);
/// Per-run estimates: run, window_length, Frobenius norms of the estimates and the truth
/// (first Θ⁰; failed runs are omitted).
Table qr_table(const McSummary& s);
/// Median RMSE summary: one row per Θ⁰, median RMSE norm per configuration.
Table rmse_table(const McSummary& s);
/// Per-step trace of a single run.
Table single_run_table(const SingleRunTrace& t);

}  // namespace liekf::tools
