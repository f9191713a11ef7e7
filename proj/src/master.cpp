#include "evsp/master.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

namespace evsp {

int ColumnPool::add(Column col) {
  auto key = std::make_pair(col.depot, col.arc_ids);
  auto [it, inserted] = index_.try_emplace(std::move(key), static_cast<int>(cols_.size()));
  if (!inserted) return -1;
  cols_.push_back(std::move(col));
  return static_cast<int>(cols_.size()) - 1;
}

// ---------------------------------------------------------------------------
// Revised simplex.
// ---------------------------------------------------------------------------

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kRcTol = 1e-9;
}  // namespace

SimplexLp::SimplexLp(std::vector<Row> rows) : m_(static_cast<int>(rows.size())), rows_(rows) {
  basis_.resize(m_);
  // Slack/surplus and artificial columns; artificials form the first basis.
  for (int i = 0; i < m_; ++i) {
    if (rows_[i].rhs < 0) throw std::invalid_argument("row rhs must be >= 0");
    if (rows_[i].sense == '<') {
      cols_.push_back({0.0, {{i, 1.0}}, false});
      basis_[i] = static_cast<int>(cols_.size()) - 1;
    } else if (rows_[i].sense == '>') {
      cols_.push_back({0.0, {{i, -1.0}}, false});  // surplus
      cols_.push_back({kArtificialCost, {{i, 1.0}}, true});
      basis_[i] = static_cast<int>(cols_.size()) - 1;
    } else if (rows_[i].sense == '=') {
      cols_.push_back({kArtificialCost, {{i, 1.0}}, true});
      basis_[i] = static_cast<int>(cols_.size()) - 1;
    } else {
      throw std::invalid_argument("row sense must be one of = < >");
    }
  }
  n_structural_ = 0;
  refactorize();
}

int SimplexLp::add_column(double cost, std::span<const std::pair<int, double>> coefs) {
  Col c;
  c.cost = cost;
  c.coefs.assign(coefs.begin(), coefs.end());
  for (const auto& [row, v] : c.coefs) {
    if (row < 0 || row >= m_) throw std::invalid_argument("coefficient row out of range");
    (void)v;
  }
  cols_.push_back(std::move(c));
  ++n_structural_;
  return static_cast<int>(cols_.size()) - 1;  // internal id == external id here
}

std::vector<double> SimplexLp::multiply_binv(const Col& c) const {
  std::vector<double> d(m_, 0.0);
  for (const auto& [row, v] : c.coefs) {
    const double* col_of_binv = binv_.data() + row;  // binv[i*m + row]
    for (int i = 0; i < m_; ++i) d[i] += col_of_binv[i * m_] * v;
  }
  return d;
}

void SimplexLp::refactorize() {
  // Gauss-Jordan inverse of the basis matrix, then xb = B^-1 b.
  std::vector<double> a(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int j = 0; j < m_; ++j) {
    for (const auto& [row, v] : cols_[basis_[j]].coefs) a[row * m_ + j] = v;
  }
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
  for (int col = 0; col < m_; ++col) {
    int piv = -1;
    double best = 1e-12;
    for (int i = col; i < m_; ++i) {
      if (std::fabs(a[i * m_ + col]) > best) {
        best = std::fabs(a[i * m_ + col]);
        piv = i;
      }
    }
    if (piv < 0) throw std::runtime_error("singular basis during refactorization");
    if (piv != col) {
      for (int k = 0; k < m_; ++k) {
        std::swap(a[piv * m_ + k], a[col * m_ + k]);
        std::swap(binv_[piv * m_ + k], binv_[col * m_ + k]);
      }
    }
    const double inv = 1.0 / a[col * m_ + col];
    for (int k = 0; k < m_; ++k) {
      a[col * m_ + k] *= inv;
      binv_[col * m_ + k] *= inv;
    }
    for (int i = 0; i < m_; ++i) {
      if (i == col) continue;
      const double f = a[i * m_ + col];
      if (f == 0.0) continue;
      for (int k = 0; k < m_; ++k) {
        a[i * m_ + k] -= f * a[col * m_ + k];
        binv_[i * m_ + k] -= f * binv_[col * m_ + k];
      }
    }
  }
  xb_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (int k = 0; k < m_; ++k) xb_[i] += binv_[i * m_ + k] * rows_[k].rhs;
  }
  pivots_since_refactor_ = 0;
}

SimplexLp::Outcome SimplexLp::solve() {
  Outcome out;
  std::vector<char> in_basis(cols_.size(), 0);
  for (int b : basis_) in_basis[b] = 1;

  bool bland = false;
  int degenerate_streak = 0;
  const int max_pivots = 500000;

  for (int iter = 0; iter < max_pivots; ++iter) {
    // Duals of the current basis.
    duals_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cols_[basis_[i]].cost;
      if (cb == 0.0) continue;
      for (int k = 0; k < m_; ++k) duals_[k] += cb * binv_[i * m_ + k];
    }
    // Entering column: Dantzig, or Bland when cycling.
    int enter = -1;
    double best_rc = -kRcTol;
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (in_basis[j] || cols_[j].artificial) continue;
      double rc = cols_[j].cost;
      for (const auto& [row, v] : cols_[j].coefs) rc -= duals_[row] * v;
      if (rc < best_rc - 0.0) {
        enter = j;
        best_rc = rc;
        if (bland) break;  // first improving index
      }
    }
    if (enter < 0) {
      out.optimal = true;
      out.iterations = iter;
      break;
    }
    const std::vector<double> d = multiply_binv(cols_[enter]);
    int leave = -1;
    double best_ratio = kInf;
    for (int i = 0; i < m_; ++i) {
      if (d[i] > kPivotTol) {
        const double ratio = std::max(xb_[i], 0.0) / d[i];
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw std::runtime_error("lp unbounded");
    if (best_ratio <= 1e-12) {
      if (++degenerate_streak > 400) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
    // Pivot: basis row `leave` now holds `enter`.
    in_basis[basis_[leave]] = 0;
    in_basis[enter] = 1;
    basis_[leave] = enter;
    const double dr = d[leave];
    double* brow = binv_.data() + static_cast<std::size_t>(leave) * m_;
    for (int k = 0; k < m_; ++k) brow[k] /= dr;
    xb_[leave] = best_ratio;
    for (int i = 0; i < m_; ++i) {
      if (i == leave) continue;
      const double f = d[i];
      if (f == 0.0) continue;
      double* row = binv_.data() + static_cast<std::size_t>(i) * m_;
      for (int k = 0; k < m_; ++k) row[k] -= f * brow[k];
      xb_[i] -= f * best_ratio;
      if (std::fabs(xb_[i]) < 1e-12) xb_[i] = 0.0;
    }
    if (++pivots_since_refactor_ >= 128) refactorize();
  }

  if (!out.optimal) return out;  // hit the pivot cap: numerical failure

  primal_.assign(cols_.size(), 0.0);
  for (int i = 0; i < m_; ++i) {
    primal_[basis_[i]] = xb_[i];
    out.objective += cols_[basis_[i]].cost * xb_[i];
    if (cols_[basis_[i]].artificial) out.artificial_mass += std::max(0.0, xb_[i]);
  }
  return out;
}

double SimplexLp::primal(int column) const {
  return column < static_cast<int>(primal_.size()) ? primal_[column] : 0.0;
}

double SimplexLp::reduced_cost(double cost,
                               std::span<const std::pair<int, double>> coefs) const {
  double rc = cost;
  for (const auto& [row, v] : coefs) rc -= duals_[row] * v;
  return rc;
}

double SimplexLp::complementary_slackness_gap() const {
  double gap = 0.0;
  // Basic columns must price to zero.
  for (int i = 0; i < m_; ++i) {
    const Col& c = cols_[basis_[i]];
    double rc = c.cost;
    for (const auto& [row, v] : c.coefs) rc -= duals_[row] * v;
    gap = std::max(gap, std::fabs(rc));
  }
  // Primal residuals per row.
  std::vector<double> ax(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    for (const auto& [row, v] : cols_[basis_[i]].coefs) ax[row] += v * xb_[i];
  }
  for (int r = 0; r < m_; ++r) {
    const double resid = ax[r] - rows_[r].rhs;
    if (rows_[r].sense == '=') {
      gap = std::max(gap, std::fabs(resid));
    } else if (rows_[r].sense == '<') {
      gap = std::max(gap, std::max(0.0, resid));
    } else {
      gap = std::max(gap, std::max(0.0, -resid));
    }
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Stabilization.
// ---------------------------------------------------------------------------

std::vector<double> Stabilizer::smooth(std::span<const double> current) const {
  std::vector<double> out(current.size());
  for (std::size_t i = 0; i < current.size(); ++i) {
    const double prev = i < previous.size() ? previous[i] : 0.0;
    out[i] = alpha * prev + (1.0 - alpha) * current[i];
  }
  return out;
}

void Stabilizer::advance(std::span<const double> current) {
  previous.assign(current.begin(), current.end());
}

bool Stabilizer::step_down() {
  if (alpha <= 1e-12) return false;
  alpha = std::max(0.0, alpha - 0.1);
  return true;
}

// ---------------------------------------------------------------------------
// Column generation.
// ---------------------------------------------------------------------------

std::vector<char> node_arc_mask(const DepotGraph& graph,
                                std::span<const BranchConstraint> constraints,
                                std::span<const char> service_active) {
  std::vector<char> mask(graph.arcs.size(), 1);
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    const ChargeArc& a = graph.arcs[i];
    if (!service_active.empty()) {
      if (a.tail_vertex < graph.n_services && !service_active[a.tail_vertex]) mask[i] = 0;
      if (a.head_vertex < graph.n_services && !service_active[a.head_vertex]) mask[i] = 0;
    }
  }
  for (const BranchConstraint& c : constraints) {
    if (c.kind != BranchConstraint::Kind::Traversal) continue;
    if (c.is_upper && c.rhs <= 0.0) {
      for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
        if (graph.arcs[i].tail_vertex == c.from_service &&
            graph.arcs[i].head_vertex == c.to_service) {
          mask[i] = 0;
        }
      }
    } else if (!c.is_upper && c.rhs >= 1.0) {
      // The covering route must continue straight to the forced head.
      for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
        const ChargeArc& a = graph.arcs[i];
        if (a.tail_vertex == c.from_service && a.head_vertex != c.to_service) mask[i] = 0;
        if (a.head_vertex == c.to_service && a.tail_vertex != c.from_service) mask[i] = 0;
      }
    }
  }
  return mask;
}

bool column_is_valid(const Instance& inst, const DepotGraph& graph, const Column& col) {
  if (col.arc_ids.empty()) return false;
  double level = inst.capacity();
  double cost = inst.vehicle.fixed_cost;
  int at = graph.o();
  std::vector<int> services;
  for (int id : col.arc_ids) {
    if (id < 0 || id >= static_cast<int>(graph.arcs.size())) return false;
    const ChargeArc& a = graph.arcs[id];
    if (a.tail_vertex != at) return false;
    level = exit_level(inst, a, level);
    if (level == -kInf) return false;
    cost += a.cost;
    at = a.head_vertex;
    if (at != graph.d()) services.push_back(at);
  }
  if (at != graph.d()) return false;
  if (services != col.services) return false;
  for (std::size_t i = 0; i + 1 < services.size(); ++i) {
    if (inst.services[services[i]].t_end > inst.services[services[i + 1]].t_begin + kFeasEps) {
      return false;
    }
    if (services[i] == services[i + 1]) return false;
  }
  return std::fabs(cost - col.cost) <= kFeasEps;
}

namespace {

struct RowLayout {
  std::vector<int> service_row;  // -1 for inactive services
  int n_service_rows = 0;
  int n_constraint_rows = 0;
};

std::vector<std::pair<int, double>> column_coefs(const Column& col, const RowLayout& layout,
                                                 std::span<const BranchConstraint> constraints) {
  std::vector<std::pair<int, double>> coefs;
  for (int s : col.services) coefs.emplace_back(layout.service_row[s], 1.0);
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    const BranchConstraint& c = constraints[j];
    double v = 0.0;
    if (c.kind == BranchConstraint::Kind::DepotCount) {
      v = col.depot == c.depot ? 1.0 : 0.0;
    } else {
      for (std::size_t i = 0; i + 1 < col.services.size(); ++i) {
        if (col.services[i] == c.from_service && col.services[i + 1] == c.to_service) {
          v = 1.0;
          break;
        }
      }
    }
    if (v != 0.0) coefs.emplace_back(layout.n_service_rows + static_cast<int>(j), v);
  }
  return coefs;
}

}  // namespace

CgResult column_generation(const Instance& inst, std::span<const DepotGraph> graphs,
                           std::span<const BranchConstraint> constraints, ColumnPool& pool,
                           std::span<const char> service_active, const CgConfig& cfg) {
  const int nT = inst.n_services();
  RowLayout layout;
  layout.service_row.assign(nT, -1);
  for (int s = 0; s < nT; ++s) {
    if (service_active.empty() || service_active[s]) {
      layout.service_row[s] = layout.n_service_rows++;
    }
  }
  layout.n_constraint_rows = static_cast<int>(constraints.size());

  std::vector<SimplexLp::Row> rows(layout.n_service_rows + layout.n_constraint_rows);
  for (int i = 0; i < layout.n_service_rows; ++i) rows[i] = {'=', 1.0};
  for (int j = 0; j < layout.n_constraint_rows; ++j) {
    rows[layout.n_service_rows + j] = {constraints[j].is_upper ? '<' : '>',
                                       constraints[j].rhs};
  }
  SimplexLp lp(std::move(rows));

  const auto column_eligible = [&](const Column& col) {
    for (int s : col.services) {
      if (layout.service_row[s] < 0) return false;
    }
    return true;
  };
  std::vector<int> lp_to_pool;
  const auto push_column = [&](int pool_idx) {
    const Column& col = pool[pool_idx];
    if (!column_eligible(col)) return false;
    const auto coefs = column_coefs(col, layout, constraints);
    lp.add_column(col.cost, coefs);
    lp_to_pool.push_back(pool_idx);
    return true;
  };
  for (std::size_t i = 0; i < pool.size(); ++i) push_column(static_cast<int>(i));

  std::vector<std::vector<char>> masks;
  masks.reserve(graphs.size());
  for (const auto& g : graphs) {
    masks.push_back(node_arc_mask(g, constraints, service_active));
  }
  const auto depot_disabled = [&](int depot) {
    for (const BranchConstraint& c : constraints) {
      if (c.kind == BranchConstraint::Kind::DepotCount && c.depot == depot && c.is_upper &&
          c.rhs <= 0.0) {
        return true;
      }
    }
    return false;
  };

  Stabilizer stab;
  stab.alpha = cfg.stab_alpha0;
  stab.previous.assign(lp.n_rows(), 0.0);

  CgResult result;
  long long added_total = 0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const auto out = lp.solve();
    if (!out.optimal) {
      throw std::runtime_error("restricted master failed numerically at iteration " +
                               std::to_string(iter) + " with " +
                               std::to_string(lp.n_columns()) + " columns");
    }
    const std::vector<double> raw = lp.duals();

    // Price with smoothed duals; step the factor down on a full mis-price.
    std::vector<std::vector<PricedRoute>> per_depot(graphs.size());
    bool found_any = false;
    double price_seconds = 0.0;
    while (true) {
      const std::vector<double> use = stab.smooth(raw);
      std::vector<double> svc_duals(nT, 0.0);
      for (int s = 0; s < nT; ++s) {
        if (layout.service_row[s] >= 0) svc_duals[s] = use[layout.service_row[s]];
      }
      std::vector<double> con_duals(constraints.size());
      for (std::size_t j = 0; j < constraints.size(); ++j) {
        con_duals[j] = use[layout.n_service_rows + j];
      }

      const auto t0 = std::chrono::steady_clock::now();
      const auto price_depot = [&](std::size_t gi) {
        if (depot_disabled(graphs[gi].depot)) {
          per_depot[gi].clear();
          return;
        }
        const auto rc = reduced_costs(inst, graphs[gi], svc_duals, constraints, con_duals);
        per_depot[gi] = price(inst, graphs[gi], rc, masks[gi],
                              {cfg.max_columns_per_depot, -cfg.eps});
      };
      if (cfg.threads > 1 && graphs.size() > 1) {
        std::vector<std::thread> workers;
        std::size_t next = 0;
        for (int t = 0; t < cfg.threads && t < static_cast<int>(graphs.size()); ++t) {
          workers.emplace_back([&, t]() {
            for (std::size_t gi = t; gi < graphs.size();
                 gi += static_cast<std::size_t>(cfg.threads)) {
              price_depot(gi);
            }
          });
        }
        (void)next;
        for (auto& w : workers) w.join();
      } else {
        for (std::size_t gi = 0; gi < graphs.size(); ++gi) price_depot(gi);
      }
      price_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                           .count();

      // Count genuinely new columns before deciding on a mis-price.
      int added = 0;
      for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        for (const PricedRoute& r : per_depot[gi]) {
          Column col{graphs[gi].depot, r.arc_ids, r.services, r.cost};
          if (!column_is_valid(inst, graphs[gi], col)) {
            throw std::logic_error("pricing produced an invalid column");
          }
          const int idx = pool.add(std::move(col));
          if (idx >= 0) {
            push_column(idx);
            ++added;
          }
        }
      }
      if (added > 0) {
        added_total += added;
        found_any = true;
        if (cfg.iteration_log != nullptr) {
          (*cfg.iteration_log) << iter << ',' << out.objective << ',' << added << ','
                               << stab.alpha << ',' << price_seconds << '\n';
        }
        break;
      }
      if (!stab.step_down()) break;  // raw duals priced out: converged
    }
    stab.advance(raw);
    if (found_any) continue;

    result.feasible = out.artificial_mass <= 1e-6;
    result.lp_value = out.objective;
    result.iterations = iter + 1;
    result.columns_added = added_total;
    result.service_duals.assign(nT, 0.0);
    for (int s = 0; s < nT; ++s) {
      if (layout.service_row[s] >= 0) result.service_duals[s] = raw[layout.service_row[s]];
    }
    result.constraint_duals.assign(constraints.size(), 0.0);
    for (std::size_t j = 0; j < constraints.size(); ++j) {
      result.constraint_duals[j] = raw[layout.n_service_rows + j];
    }
    result.x.assign(pool.size(), 0.0);
    for (std::size_t k = 0; k < lp_to_pool.size(); ++k) {
      result.x[lp_to_pool[k]] = lp.primal(static_cast<int>(k));
    }
    if (cfg.iteration_log != nullptr) {
      (*cfg.iteration_log) << result.iterations - 1 << ',' << out.objective << ",0,"
                           << stab.alpha << ',' << price_seconds << '\n';
    }
    return result;
  }
  throw std::runtime_error("column generation exceeded the iteration limit");
}

}  // namespace evsp
