#include "hullbound/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hullbound {

namespace {

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol)
      : m_(A.rows()), n_(A.cols()), tol_(tol), t_(A.rows() + 1, A.cols() + A.rows() + 1), sign_(A.rows()) {
    t_.setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      sign_[i] = b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign_[i] * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign_[i] * b[i];
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    active_.assign(static_cast<std::size_t>(m_), true);
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_costs(const Eigen::VectorXd& full_costs) {
    // full_costs has n_ + m_ entries; reduced costs r_j = c_j - c_B^T B^{-1} A_j.
    t_.row(m_).head(n_ + m_) = full_costs.transpose();
    t_(m_, rhs()) = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = full_costs[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  // Returns false when unbounded.
  bool optimize(Eigen::Index allowed_columns, int& pivots, int max_pivots) {
    int degenerate_run = 0;
    while (pivots < max_pivots) {
      const bool bland = degenerate_run > 50;
      Eigen::Index enter = -1;
      double best = -tol_;
      for (Eigen::Index j = 0; j < allowed_columns; ++j) {
        const double r = t_(m_, j);
        if (r < best) {
          enter = j;
          if (bland) break;
          best = r;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_[static_cast<std::size_t>(i)]) continue;
        const double a = t_(i, enter);
        if (a <= tol_) continue;
        const double q = t_(i, rhs()) / a;
        if (q < ratio - tol_ ||
            (std::abs(q - ratio) <= tol_ && leave >= 0 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          ratio = q;
          leave = i;
        }
      }
      if (leave < 0) return false;
      degenerate_run = ratio <= tol_ ? degenerate_run + 1 : 0;
      pivot(leave, enter);
      ++pivots;
    }
    throw std::runtime_error("simplex: pivot limit reached");
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // After phase one: pivot remaining artificial variables out of the basis or
  // retire their (redundant) rows.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index col = -1;
      double best = tol_;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > best) {
          best = std::abs(t_(i, j));
          col = j;
        }
      }
      if (col >= 0)
        pivot(i, col);
      else
        active_[static_cast<std::size_t>(i)] = false;
    }
  }

  double objective() const { return -t_(m_, rhs()); }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(i)];
      if (b < n_) z[b] = t_(i, rhs());
    }
    return z;
  }

  Eigen::VectorXd dual() const {
    Eigen::VectorXd y(m_);
    for (Eigen::Index i = 0; i < m_; ++i) y[i] = -sign_[i] * t_(m_, n_ + i);
    return y;
  }

 private:
  Eigen::Index m_, n_;
  double tol_;
  Eigen::MatrixXd t_;
  Eigen::VectorXd sign_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

}  // namespace

LpResult solve_standard_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                           double tol) {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw std::invalid_argument("solve_standard_lp: dimension mismatch");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  LpResult out;
  Tableau tab(A, b, tol);
  const int max_pivots = static_cast<int>(50 * (m + n) + 1000);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.set_costs(phase1);
  tab.optimize(n, out.pivots, max_pivots);
  const double scale = 1.0 + b.cwiseAbs().sum();
  if (tab.objective() > tol * scale * 10.0) {
    out.status = LpResult::Status::Infeasible;
    return out;
  }
  tab.expel_artificials();

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  tab.set_costs(phase2);
  if (!tab.optimize(n, out.pivots, max_pivots)) {
    out.status = LpResult::Status::Unbounded;
    return out;
  }
  out.status = LpResult::Status::Optimal;
  out.solution = tab.solution();
  out.objective = c.dot(out.solution);
  out.dual = tab.dual();
  return out;
}

}  // namespace hullbound
