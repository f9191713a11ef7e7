#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "evsp/pricing.hpp"

namespace evsp {

struct Column {
  int depot = 0;
  std::vector<int> arc_ids;   // relative to the depot's graph
  std::vector<int> services;  // traversal order
  double cost = 0.0;          // vehicle fixed cost included
};

// Global route pool, deduplicated by (depot, arc sequence).
class ColumnPool {
 public:
  // Returns the column index, or -1 if the route was already pooled.
  int add(Column col);
  const std::vector<Column>& columns() const { return cols_; }
  std::size_t size() const { return cols_.size(); }
  const Column& operator[](std::size_t i) const { return cols_[i]; }

 private:
  std::vector<Column> cols_;
  std::map<std::pair<int, std::vector<int>>, int> index_;
};

// Minimal bounded revised simplex over rows {=, <=, >=} with x >= 0.
// Feasibility comes from artificial columns with a large finite cost; a
// positive artificial mass at optimum marks the LP infeasible.
class SimplexLp {
 public:
  struct Row {
    char sense = '=';  // '=', '<', '>'
    double rhs = 0.0;
  };

  static constexpr double kArtificialCost = 1e7;

  explicit SimplexLp(std::vector<Row> rows);

  int add_column(double cost, std::span<const std::pair<int, double>> coefs);
  int n_columns() const { return static_cast<int>(cols_.size()); }
  int n_rows() const { return m_; }

  struct Outcome {
    bool optimal = false;   // false only on numerical failure
    double objective = 0.0;
    double artificial_mass = 0.0;
    int iterations = 0;
  };
  // Re-entrant: continues from the current basis after new columns arrive.
  Outcome solve();

  double primal(int column) const;
  const std::vector<double>& duals() const { return duals_; }
  // Reduced cost of an externally described column under the current duals.
  double reduced_cost(double cost, std::span<const std::pair<int, double>> coefs) const;
  // Largest complementary-slackness violation, for post-solve verification.
  double complementary_slackness_gap() const;

 private:
  struct Col {
    double cost = 0.0;
    std::vector<std::pair<int, double>> coefs;
    bool artificial = false;
  };

  void refactorize();
  std::vector<double> multiply_binv(const Col& c) const;

  int m_ = 0;
  std::vector<Row> rows_;
  std::vector<Col> cols_;         // structural, then slacks, then artificials
  int n_structural_ = 0;
  std::vector<int> basis_;        // column index per row
  std::vector<double> binv_;      // row-major m x m
  std::vector<double> xb_;        // basic values
  std::vector<double> duals_;
  std::vector<double> primal_;    // cached per column after solve
  int pivots_since_refactor_ = 0;
};

// Convex smoothing of successive dual vectors. The mis-pricing step lowers
// alpha by 0.1 until the raw duals are used.
struct Stabilizer {
  double alpha = 0.9;
  std::vector<double> previous;

  std::vector<double> smooth(std::span<const double> current) const;
  void advance(std::span<const double> current);  // previous <- current
  bool step_down();                               // returns false at alpha == 0
};

struct CgConfig {
  int max_columns_per_depot = 200;
  double eps = kFeasEps;
  double stab_alpha0 = 0.9;
  int max_iterations = 100000;
  int threads = 1;
  std::ostream* iteration_log = nullptr;  // CSV: iter, lp, cols, alpha, price seconds
};

struct CgResult {
  bool feasible = false;
  double lp_value = kInf;
  std::vector<double> service_duals;
  std::vector<double> constraint_duals;
  std::vector<double> x;  // aligned with the pool, zero for inactive columns
  int iterations = 0;
  long long columns_added = 0;
};

// Column generation at one node. `service_active` masks services fixed by
// diving (empty = all); inactive services have no row and their columns stay
// out of the restricted problem. Convergence requires pricing with raw duals.
CgResult column_generation(const Instance& inst, std::span<const DepotGraph> graphs,
                           std::span<const BranchConstraint> constraints, ColumnPool& pool,
                           std::span<const char> service_active = {},
                           const CgConfig& cfg = {});

// Arc usability for one depot under node constraints and the active-service
// mask: drops arcs touching inactive services, forbidden traversals, and the
// competitors of forced traversals.
std::vector<char> node_arc_mask(const DepotGraph& graph,
                                std::span<const BranchConstraint> constraints,
                                std::span<const char> service_active);

// Fast structural check run on every column before it enters the pool.
bool column_is_valid(const Instance& inst, const DepotGraph& graph, const Column& col);

}  // namespace evsp
