#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace whatif::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

struct Entry {
  int column;
  double value;
};

class LpError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a solve runs past its deadline.
class DeadlineExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A minimisation problem  min c'x  s.t.  rows (<=, =, >=) rhs,  lo <= x <= hi.
/// The constraint matrix is held column-wise; rows are added as sparse lists.
class LinearProgram {
 public:
  int add_variable(double cost, double lower = 0.0, double upper = kInfinity,
                   std::string name = {});
  int add_row(std::span<const Entry> entries, Sense sense, double rhs, std::string name = {});
  int add_row(std::initializer_list<Entry> entries, Sense sense, double rhs,
              std::string name = {}) {
    return add_row(std::span<const Entry>(entries.begin(), entries.size()), sense, rhs,
                   std::move(name));
  }

  void set_cost(int column, double cost) { costs_.at(static_cast<std::size_t>(column)) = cost; }
  void set_bounds(int column, double lower, double upper);
  void set_rhs(int row, double rhs) { rhs_.at(static_cast<std::size_t>(row)) = rhs; }

  int num_variables() const { return static_cast<int>(costs_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }
  std::size_t num_nonzeros() const;

  const std::vector<double>& costs() const { return costs_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Sense>& senses() const { return senses_; }
  const std::vector<double>& rhs() const { return rhs_; }
  /// Column j as (row, value) pairs in insertion order.
  const std::vector<std::pair<int, double>>& column(int j) const {
    return columns_[static_cast<std::size_t>(j)];
  }
  const std::string& variable_name(int j) const { return var_names_[static_cast<std::size_t>(j)]; }
  const std::string& row_name(int i) const { return row_names_[static_cast<std::size_t>(i)]; }

  /// Row activity a_i'x for every row.
  std::vector<double> row_activity(std::span<const double> x) const;
  double objective_value(std::span<const double> x) const;

  /// Builds a program from dense data; convenient for tests.
  static LinearProgram from_dense(const std::vector<double>& costs,
                                  const std::vector<std::vector<double>>& matrix,
                                  const std::vector<Sense>& senses, const std::vector<double>& rhs,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& upper);

 private:
  std::vector<double> costs_, lower_, upper_;
  std::vector<std::string> var_names_;
  std::vector<std::vector<std::pair<int, double>>> columns_;
  std::vector<Sense> senses_;
  std::vector<double> rhs_;
  std::vector<std::string> row_names_;
};

struct LpOptions {
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-7;
  /// Pivot size below which a ratio-test candidate is ignored.
  double pivot_tolerance = 1e-9;
  /// Iterations between fresh basis inversions; 0 picks max(50, rows).
  int refactor_interval = 0;
  /// Dantzig pricing switches to Bland's rule after this many iterations;
  /// 0 picks 3 * (rows + columns).
  std::int64_t bland_after = 0;
  /// Hard stop; 0 picks 50 * (rows + columns) + 1000.
  std::int64_t max_iterations = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  std::int64_t iterations = 0;
  /// Dual price of each row (d objective / d rhs); valid when optimal.
  std::vector<double> row_duals;
  /// c_j - a_j'y for each structural column; valid when optimal.
  std::vector<double> reduced_costs;
};

/// Bounded-variable revised simplex (two phases, dense basis inverse).
/// Deterministic for a fixed program. Throws LpError on dimension problems or
/// non-finite data and DeadlineExceeded when options.deadline passes.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Writes the program in a readable row-wise text format (see docs/lp-format.md).
void write_lp(std::ostream& out, const LinearProgram& lp);

}  // namespace whatif::lp
