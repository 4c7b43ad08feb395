#include <liekf_tools/tables.hpp>

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

namespace liekf::tools {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NonFiniteOutput("non-finite value in output table");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_cell(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return format_double(std::get<double>(c));
}

}  // namespace

std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string render_json(const Table& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (!std::isfinite(v)) throw NonFiniteOutput("non-finite value in output table");
            }
            obj[t.columns[i]] = v;
          },
          row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

std::string render(const Table& t, OutputFormat f) { return f == OutputFormat::csv ? render_csv(t) : render_json(t); }

Table loglik_table(const McSummary& s) {
  Table t{{"window_length", "em_iteration", "G_over_n"}, {}};
  if (s.variants.empty()) return t;
  for (const AdaptiveCell& cell : s.variants.front().adaptive) {
    if (cell.runs.empty() || !cell.runs.front().ok) continue;
    const auto& trace = cell.runs.front().loglik;
    for (std::size_t j = 0; j < trace.size(); ++j) {
      t.rows.push_back({static_cast<long long>(cell.window_length), static_cast<long long>(j + 1), trace[j]});
    }
  }
  return t;
}

Table qr_table(const McSummary& s) {
  Table t{{"run", "window_length", "frob_Q_est", "frob_R_est", "frob_Q_true", "frob_R_true"}, {}};
  if (s.variants.empty()) return t;
  const auto& cells = s.variants.front().adaptive;
  const std::size_t runs = cells.empty() ? 0 : cells.front().runs.size();
  for (std::size_t r = 0; r < runs; ++r) {
    for (const AdaptiveCell& cell : cells) {
      const AdaptiveRun& a = cell.runs[r];
      if (!a.ok) continue;
      t.rows.push_back({static_cast<long long>(r), static_cast<long long>(cell.window_length), a.Q_est.norm(),
                        a.R_est.norm(), s.frob_Q_true, s.frob_R_true});
    }
  }
  return t;
}

Table rmse_table(const McSummary& s) {
  Table t{{"theta0"}, {}};
  if (s.variants.empty()) return t;
  for (const AdaptiveCell& cell : s.variants.front().adaptive) {
    t.columns.push_back("adaptive_WL" + std::to_string(cell.window_length));
  }
  const bool baselines = !s.truth.empty();
  if (baselines) {
    t.columns.push_back("fixed_theta_true");
    t.columns.push_back("fixed_theta0");
  }
  for (const VariantSummary& v : s.variants) {
    std::vector<Cell> row{v.theta0.label()};
    for (const AdaptiveCell& cell : v.adaptive) row.emplace_back(cell.median_rmse);
    if (baselines) {
      row.emplace_back(s.truth_median);
      row.emplace_back(v.fixed_median);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table single_run_table(const SingleRunTrace& tr) {
  Table t{{"step", "time_s", "q_true_w", "q_true_x", "q_true_y", "q_true_z", "q_est_w", "q_est_x", "q_est_y", "q_est_z",
           "err_x_rad", "err_y_rad", "err_z_rad", "trace_P"},
          {}};
  for (std::size_t k = 0; k < tr.time.size(); ++k) {
    const Vec4 qt = tr.truth[k].coeffs();
    const Vec4 qe = tr.estimate[k].coeffs();
    t.rows.push_back({static_cast<long long>(k + 1), tr.time[k], qt[0], qt[1], qt[2], qt[3], qe[0], qe[1], qe[2], qe[3],
                      tr.error[k].x(), tr.error[k].y(), tr.error[k].z(), tr.trace_P[k]});
  }
  return t;
}

}  // namespace liekf::tools
