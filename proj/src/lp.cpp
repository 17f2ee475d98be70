#include "whatif/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace whatif::lp {

int LinearProgram::add_variable(double cost, double lower, double upper, std::string name) {
  costs_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  var_names_.push_back(std::move(name));
  columns_.emplace_back();
  return static_cast<int>(costs_.size()) - 1;
}

int LinearProgram::add_row(std::span<const Entry> entries, Sense sense, double rhs,
                           std::string name) {
  const int row = static_cast<int>(rhs_.size());
  for (const auto& e : entries) {
    if (e.column < 0 || e.column >= num_variables()) {
      throw LpError("row '" + name + "' refers to column " + std::to_string(e.column) +
                    " which does not exist");
    }
    if (e.value != 0.0) columns_[static_cast<std::size_t>(e.column)].emplace_back(row, e.value);
  }
  senses_.push_back(sense);
  rhs_.push_back(rhs);
  row_names_.push_back(std::move(name));
  return row;
}

void LinearProgram::set_bounds(int column, double lower, double upper) {
  lower_.at(static_cast<std::size_t>(column)) = lower;
  upper_.at(static_cast<std::size_t>(column)) = upper;
}

std::size_t LinearProgram::num_nonzeros() const {
  std::size_t n = 0;
  for (const auto& c : columns_) n += c.size();
  return n;
}

std::vector<double> LinearProgram::row_activity(std::span<const double> x) const {
  std::vector<double> act(rhs_.size(), 0.0);
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    for (const auto& [row, v] : columns_[j]) act[static_cast<std::size_t>(row)] += v * x[j];
  }
  return act;
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double z = 0.0;
  for (std::size_t j = 0; j < costs_.size(); ++j) z += costs_[j] * x[j];
  return z;
}

LinearProgram LinearProgram::from_dense(const std::vector<double>& costs,
                                        const std::vector<std::vector<double>>& matrix,
                                        const std::vector<Sense>& senses,
                                        const std::vector<double>& rhs,
                                        const std::vector<double>& lower,
                                        const std::vector<double>& upper) {
  if (lower.size() != costs.size() || upper.size() != costs.size() ||
      senses.size() != matrix.size() || rhs.size() != matrix.size()) {
    throw LpError("dense program dimensions disagree");
  }
  LinearProgram lp;
  for (std::size_t j = 0; j < costs.size(); ++j) lp.add_variable(costs[j], lower[j], upper[j]);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    if (matrix[i].size() != costs.size()) throw LpError("dense row has the wrong width");
    std::vector<Entry> entries;
    for (std::size_t j = 0; j < costs.size(); ++j) {
      entries.push_back({static_cast<int>(j), matrix[i][j]});
    }
    lp.add_row(entries, senses[i], rhs[i]);
  }
  return lp;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

void check_program(const LinearProgram& lp) {
  const int n = lp.num_variables();
  for (int j = 0; j < n; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (!std::isfinite(lp.costs()[ju])) throw LpError("objective coefficient is not finite");
    const double lo = lp.lower()[ju];
    const double hi = lp.upper()[ju];
    if (std::isnan(lo) || std::isnan(hi) || lo == kInfinity || hi == -kInfinity) {
      throw LpError("variable bound is NaN or infinite on the wrong side");
    }
    if (lo > hi) throw LpError("variable " + std::to_string(j) + " has lower bound above upper");
    for (const auto& [row, v] : lp.column(j)) {
      if (!std::isfinite(v)) throw LpError("constraint coefficient is not finite");
    }
  }
  for (double b : lp.rhs()) {
    if (!std::isfinite(b)) throw LpError("right-hand side is not finite");
  }
}

enum class Where : std::uint8_t { kBasic, kLower, kUpper, kZero };

// Column layout: [0, n) structurals, [n, n+m) slacks, [n+m, n+2m) artificials.
// Row i reads  a_i'x + s_i + sigma_i * r_i = b_i.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt)
      : lp_(lp),
        opt_(opt),
        n_(lp.num_variables()),
        m_(lp.num_rows()),
        total_(n_ + 2 * m_) {
    lo_.resize(static_cast<std::size_t>(total_));
    hi_.resize(static_cast<std::size_t>(total_));
    x_.assign(static_cast<std::size_t>(total_), 0.0);
    where_.assign(static_cast<std::size_t>(total_), Where::kLower);
    pos_.assign(static_cast<std::size_t>(total_), -1);
    sigma_.assign(static_cast<std::size_t>(m_), 1.0);

    for (int j = 0; j < n_; ++j) {
      lo_[u(j)] = lp.lower()[u(j)];
      hi_[u(j)] = lp.upper()[u(j)];
    }
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      switch (lp.senses()[u(i)]) {
        case Sense::kLessEqual: lo_[u(s)] = 0.0; hi_[u(s)] = kInfinity; break;
        case Sense::kGreaterEqual: lo_[u(s)] = -kInfinity; hi_[u(s)] = 0.0; break;
        case Sense::kEqual: lo_[u(s)] = 0.0; hi_[u(s)] = 0.0; break;
      }
      lo_[u(art(i))] = 0.0;
      hi_[u(art(i))] = kInfinity;
    }

    const auto mn = static_cast<std::int64_t>(m_) + n_;
    refactor_every_ = opt.refactor_interval > 0 ? opt.refactor_interval : std::max(50, m_);
    bland_after_ = opt.bland_after > 0 ? opt.bland_after : 3 * mn;
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 50 * mn + 1000;
  }

  LpSolution run() {
    initial_basis();

    // Phase 1: minimise the sum of artificials.
    cost_.assign(static_cast<std::size_t>(total_), 0.0);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      cost_[u(art(i))] = 1.0;
      if (where_[u(art(i))] == Where::kBasic) need_phase1 = true;
    }
    if (need_phase1) {
      auto st = iterate();
      if (st == LpStatus::kIterationLimit) return finish(st);
      refactor();
      double worst = 0.0;
      for (int i = 0; i < m_; ++i) worst = std::max(worst, x_[u(art(i))]);
      if (worst > opt_.feasibility_tolerance) return finish(LpStatus::kInfeasible);
    }

    // Phase 2: artificials are pinned to zero for the rest of the solve.
    for (int i = 0; i < m_; ++i) {
      const int a = art(i);
      hi_[u(a)] = 0.0;
      if (where_[u(a)] != Where::kBasic) {
        where_[u(a)] = Where::kLower;
        x_[u(a)] = 0.0;
      }
    }
    cost_.assign(static_cast<std::size_t>(total_), 0.0);
    for (int j = 0; j < n_; ++j) cost_[u(j)] = lp_.costs()[u(j)];
    refactor();
    auto st = iterate();
    return finish(st);
  }

 private:
  static std::size_t u(int v) { return static_cast<std::size_t>(v); }
  int art(int row) const { return n_ + m_ + row; }

  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (const auto& [row, v] : lp_.column(j)) f(row, v);
    } else if (j < n_ + m_) {
      f(j - n_, 1.0);
    } else {
      const int row = j - n_ - m_;
      f(row, sigma_[u(row)]);
    }
  }

  double& binv(int r, int k) { return binv_[u(r) * u(m_) + u(k)]; }

  void place_nonbasic(int j) {
    const double lo = lo_[u(j)];
    const double hi = hi_[u(j)];
    if (std::isfinite(lo)) {
      where_[u(j)] = Where::kLower;
      x_[u(j)] = lo;
    } else if (std::isfinite(hi)) {
      where_[u(j)] = Where::kUpper;
      x_[u(j)] = hi;
    } else {
      where_[u(j)] = Where::kZero;
      x_[u(j)] = 0.0;
    }
  }

  // Slack basis where the slack can absorb the row residual, artificial
  // otherwise. Either way the basis matrix is diagonal.
  void initial_basis() {
    for (int j = 0; j < n_; ++j) place_nonbasic(j);
    std::vector<double> residual(lp_.rhs());
    for (int j = 0; j < n_; ++j) {
      if (x_[u(j)] == 0.0) continue;
      for (const auto& [row, v] : lp_.column(j)) residual[u(row)] -= v * x_[u(j)];
    }
    head_.assign(u(m_), -1);
    binv_.assign(u(m_) * u(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      const int a = art(i);
      const double r = residual[u(i)];
      const bool slack_fits = r >= lo_[u(s)] - opt_.feasibility_tolerance &&
                              r <= hi_[u(s)] + opt_.feasibility_tolerance;
      if (slack_fits) {
        make_basic(s, i, std::clamp(r, lo_[u(s)], hi_[u(s)]));
        binv(i, i) = 1.0;
        place_nonbasic(a);
      } else {
        // Slack sits at its bound nearest to the residual.
        const double at = r < lo_[u(s)] ? lo_[u(s)] : hi_[u(s)];
        x_[u(s)] = at;
        where_[u(s)] = at == lo_[u(s)] ? Where::kLower : Where::kUpper;
        const double rest = r - at;
        sigma_[u(i)] = rest >= 0.0 ? 1.0 : -1.0;
        make_basic(a, i, std::abs(rest));
        binv(i, i) = sigma_[u(i)];
      }
    }
  }

  void make_basic(int j, int position, double value) {
    head_[u(position)] = j;
    pos_[u(j)] = position;
    where_[u(j)] = Where::kBasic;
    x_[u(j)] = value;
  }

  // Gauss-Jordan inversion of the current basis, then basic values from
  // scratch.
  void refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return;
    const auto mm = u(m_);
    std::vector<double> a(mm * mm, 0.0);
    for (int r = 0; r < m_; ++r) {
      for_column(head_[u(r)], [&](int row, double v) { a[u(row) * mm + u(r)] = v; });
    }
    binv_.assign(mm * mm, 0.0);
    for (std::size_t i = 0; i < mm; ++i) binv_[i * mm + i] = 1.0;
    for (std::size_t c = 0; c < mm; ++c) {
      std::size_t best = c;
      for (std::size_t r = c + 1; r < mm; ++r) {
        if (std::abs(a[r * mm + c]) > std::abs(a[best * mm + c])) best = r;
      }
      if (std::abs(a[best * mm + c]) < 1e-12) {
        throw std::logic_error("simplex basis became singular");
      }
      if (best != c) {
        for (std::size_t k = 0; k < mm; ++k) {
          std::swap(a[best * mm + k], a[c * mm + k]);
          std::swap(binv_[best * mm + k], binv_[c * mm + k]);
        }
      }
      const double inv = 1.0 / a[c * mm + c];
      for (std::size_t k = 0; k < mm; ++k) {
        a[c * mm + k] *= inv;
        binv_[c * mm + k] *= inv;
      }
      for (std::size_t r = 0; r < mm; ++r) {
        if (r == c) continue;
        const double f = a[r * mm + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < mm; ++k) {
          a[r * mm + k] -= f * a[c * mm + k];
          binv_[r * mm + k] -= f * binv_[c * mm + k];
        }
      }
    }
    // Rows of binv_ now correspond to basis positions since column r of the
    // basis matrix holds head_[r].
    std::vector<double> rhs(lp_.rhs());
    for (int j = 0; j < total_; ++j) {
      if (where_[u(j)] == Where::kBasic || x_[u(j)] == 0.0) continue;
      for_column(j, [&](int row, double v) { rhs[u(row)] -= v * x_[u(j)]; });
    }
    for (int r = 0; r < m_; ++r) {
      double v = 0.0;
      for (int k = 0; k < m_; ++k) v += binv(r, k) * rhs[u(k)];
      x_[u(head_[u(r)])] = v;
    }
  }

  void compute_duals(std::vector<double>& y) {
    y.assign(u(m_), 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_[u(head_[u(r)])];
      if (cb == 0.0) continue;
      const double* row = &binv_[u(r) * u(m_)];
      for (int k = 0; k < m_; ++k) y[u(k)] += cb * row[k];
    }
  }

  double reduced_cost(int j, const std::vector<double>& y) const {
    double d = cost_[u(j)];
    for_column(j, [&](int row, double v) { d -= y[u(row)] * v; });
    return d;
  }

  LpStatus iterate() {
    std::vector<double> y;
    std::vector<double> alpha(u(m_));
    while (true) {
      if (iterations_ >= max_iter_) return LpStatus::kIterationLimit;
      if (opt_.deadline && (iterations_ & 63) == 0 &&
          std::chrono::steady_clock::now() > *opt_.deadline) {
        throw DeadlineExceeded("linear program exceeded its deadline");
      }
      if (since_refactor_ >= refactor_every_) refactor();
      const bool bland = iterations_ >= bland_after_;

      // Pricing.
      compute_duals(y);
      int entering = -1;
      double direction = 0.0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        const Where w = where_[u(j)];
        if (w == Where::kBasic || lo_[u(j)] == hi_[u(j)]) continue;
        const double d = reduced_cost(j, y);
        double dir = 0.0;
        if (d < -opt_.optimality_tolerance && w != Where::kUpper) dir = 1.0;
        if (d > opt_.optimality_tolerance && w != Where::kLower) dir = -1.0;
        if (dir == 0.0) continue;
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return LpStatus::kOptimal;

      // alpha = B^-1 a_q
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(entering, [&](int row, double v) {
        for (int r = 0; r < m_; ++r) alpha[u(r)] += binv(r, row) * v;
      });

      // Ratio test. Basic r moves at rate -direction * alpha_r.
      double step = kInfinity;
      int leave = -1;
      double leave_pivot = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double a = alpha[u(r)];
        if (std::abs(a) <= opt_.pivot_tolerance) continue;
        const int j = head_[u(r)];
        const double rate = -direction * a;
        double t;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[u(j)])) continue;
          t = (x_[u(j)] - lo_[u(j)]) / -rate;
        } else {
          if (!std::isfinite(hi_[u(j)])) continue;
          t = (hi_[u(j)] - x_[u(j)]) / rate;
        }
        t = std::max(t, 0.0);
        bool take = false;
        if (leave < 0 || t < step - 1e-12) {
          take = true;
        } else if (t <= step + 1e-12) {
          take = bland ? j < head_[u(leave)] : std::abs(a) > std::abs(leave_pivot);
        }
        if (take) {
          step = t;
          leave = r;
          leave_pivot = a;
        }
      }
      const double span = hi_[u(entering)] - lo_[u(entering)];
      const bool flip = std::isfinite(span) && span <= step;
      if (flip) step = span;
      if (!std::isfinite(step)) return LpStatus::kUnbounded;

      ++iterations_;
      ++since_refactor_;
      const double delta = direction * step;
      if (delta != 0.0) {
        x_[u(entering)] += delta;
        for (int r = 0; r < m_; ++r) {
          if (alpha[u(r)] != 0.0) x_[u(head_[u(r)])] -= delta * alpha[u(r)];
        }
      }

      if (flip) {
        where_[u(entering)] = direction > 0 ? Where::kUpper : Where::kLower;
        x_[u(entering)] = direction > 0 ? hi_[u(entering)] : lo_[u(entering)];
        continue;
      }

      // Pivot: the leaving variable lands exactly on the bound it hit.
      const int out = head_[u(leave)];
      const double out_rate = -direction * alpha[u(leave)];
      if (out_rate < 0.0) {
        x_[u(out)] = lo_[u(out)];
        where_[u(out)] = Where::kLower;
      } else {
        x_[u(out)] = hi_[u(out)];
        where_[u(out)] = Where::kUpper;
      }
      if (lo_[u(out)] == hi_[u(out)]) where_[u(out)] = Where::kLower;
      pos_[u(out)] = -1;
      head_[u(leave)] = entering;
      pos_[u(entering)] = leave;
      where_[u(entering)] = Where::kBasic;

      const auto mm = u(m_);
      double* prow = &binv_[u(leave) * mm];
      const double inv = 1.0 / alpha[u(leave)];
      for (std::size_t k = 0; k < mm; ++k) prow[k] *= inv;
      for (int r = 0; r < m_; ++r) {
        if (r == leave) continue;
        const double f = alpha[u(r)];
        if (f == 0.0) continue;
        double* row = &binv_[u(r) * mm];
        for (std::size_t k = 0; k < mm; ++k) row[k] -= f * prow[k];
      }
    }
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      // Snap values within tolerance of a bound onto it.
      double& v = sol.x[u(j)];
      if (std::abs(v - lo_[u(j)]) <= 1e-11) v = lo_[u(j)];
      if (std::abs(v - hi_[u(j)]) <= 1e-11) v = hi_[u(j)];
    }
    sol.objective_value = lp_.objective_value(sol.x);
    if (status == LpStatus::kOptimal) {
      std::vector<double> y;
      compute_duals(y);
      sol.row_duals = y;
      sol.reduced_costs.resize(u(n_));
      for (int j = 0; j < n_; ++j) sol.reduced_costs[u(j)] = reduced_cost(j, y);
    }
    return sol;
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  const int n_, m_, total_;
  std::vector<double> lo_, hi_, x_, cost_, sigma_;
  std::vector<Where> where_;
  std::vector<int> pos_, head_;
  std::vector<double> binv_;
  std::int64_t iterations_ = 0;
  int since_refactor_ = 0;
  int refactor_every_ = 50;
  std::int64_t bland_after_ = 0;
  std::int64_t max_iter_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  check_program(lp);
  Simplex simplex(lp, options);
  return simplex.run();
}

void write_lp(std::ostream& out, const LinearProgram& lp) {
  auto var = [&](int j) {
    const auto& name = lp.variable_name(j);
    return name.empty() ? "x" + std::to_string(j) : name;
  };
  out << "minimize\n ";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const double c = lp.costs()[static_cast<std::size_t>(j)];
    if (c != 0.0) out << ' ' << (c < 0 ? "- " : "+ ") << std::abs(c) << ' ' << var(j);
  }
  out << "\nsubject to\n";
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(lp.num_rows()));
  for (int j = 0; j < lp.num_variables(); ++j) {
    for (const auto& [row, v] : lp.column(j)) rows[static_cast<std::size_t>(row)].emplace_back(j, v);
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    out << ' ' << (lp.row_name(i).empty() ? "r" + std::to_string(i) : lp.row_name(i)) << ':';
    for (const auto& [j, v] : rows[iu]) out << ' ' << (v < 0 ? "- " : "+ ") << std::abs(v) << ' ' << var(j);
    const char* sense = lp.senses()[iu] == Sense::kLessEqual  ? "<="
                        : lp.senses()[iu] == Sense::kEqual ? "="
                                                           : ">=";
    out << ' ' << sense << ' ' << lp.rhs()[iu] << '\n';
  }
  out << "bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    out << ' ' << lp.lower()[ju] << " <= " << var(j) << " <= ";
    if (std::isfinite(lp.upper()[ju])) {
      out << lp.upper()[ju];
    } else {
      out << "inf";
    }
    out << '\n';
  }
  out << "end\n";
}

}  // namespace whatif::lp
