#include "active_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tlmp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Side { kLower, kUpper, kEqual };

struct RowEntry {
  int row;
  Side side;
};

enum class VarState { kFree, kLower, kUpper, kFixed };

class ActiveSet {
 public:
  ActiveSet(const QpModel& m, double feas_tol) : m_(m), feas_tol_(feas_tol) {
    const double hnorm = m.H.size() ? m.H.cwiseAbs().maxCoeff() : 0.0;
    const double cnorm = m.c.size() ? m.c.cwiseAbs().maxCoeff() : 0.0;
    mult_tol_ = 1e-9 * (1.0 + cnorm + hnorm);
    eig_tol_ = 1e-11 * (1.0 + hnorm);
  }

  QpResult run(Eigen::VectorXd x) {
    x_ = std::move(x);
    init_working_set();
    const int n = m_.num_vars();
    const int limit = 60 * (n + m_.num_rows()) + 200;
    int zero_steps = 0;
    QpResult result;
    for (int iter = 0; iter < limit; ++iter) {
      result.iterations = iter + 1;
      const bool bland = zero_steps > 2 * (n + m_.num_rows()) + 10;
      build_free_list();
      const Eigen::VectorXd grad = m_.H * x_ + m_.c;
      const Eigen::VectorXd grad_free = gather(grad);
      factor();

      bool ray = false;
      Eigen::VectorXd p_free = step(grad_free, ray);
      const double xscale = 1.0 + (x_.size() ? x_.cwiseAbs().maxCoeff() : 0.0);
      const double pnorm = p_free.size() ? p_free.cwiseAbs().maxCoeff() : 0.0;

      if (pnorm <= 1e-12 * xscale) {
        Eigen::VectorXd y_w, z;
        multipliers(grad, grad_free, y_w, z);
        if (!release_one(y_w, z, bland)) {
          result.status = QpStatus::kOptimal;
          result.x = x_;
          result.y = Eigen::VectorXd::Zero(m_.num_rows());
          for (size_t k = 0; k < rows_.size(); ++k) result.y(rows_[k].row) = y_w(k);
          result.z = z;
          return result;
        }
        continue;
      }

      // Ratio test over free variables and rows outside the working set.
      const double peps = 1e-13 * pnorm;
      double alpha = ray ? kInf : 1.0;
      int block_var = -1, block_row = -1;
      Side block_side = Side::kLower;
      for (size_t k = 0; k < free_.size(); ++k) {
        const int v = free_[k];
        const double pv = p_free(k);
        double ratio = kInf;
        Side side = Side::kLower;
        if (pv > peps && std::isfinite(m_.ub(v))) {
          ratio = (m_.ub(v) - x_(v)) / pv;
          side = Side::kUpper;
        } else if (pv < -peps && std::isfinite(m_.lb(v))) {
          ratio = (m_.lb(v) - x_(v)) / pv;
          side = Side::kLower;
        }
        ratio = std::max(ratio, 0.0);
        if (ratio < alpha) {
          alpha = ratio;
          block_var = v;
          block_row = -1;
          block_side = side;
        }
      }
      for (int j = 0; j < m_.num_rows(); ++j) {
        if (in_rows_[j]) continue;
        double ap = 0.0;
        for (size_t k = 0; k < free_.size(); ++k) ap += m_.A(j, free_[k]) * p_free(k);
        if (std::abs(ap) <= peps * (1.0 + m_.A.row(j).cwiseAbs().maxCoeff())) continue;
        const double ax = m_.A.row(j).dot(x_);
        double ratio = kInf;
        Side side = Side::kLower;
        if (ap > 0 && std::isfinite(m_.hi(j))) {
          ratio = (m_.hi(j) - ax) / ap;
          side = Side::kUpper;
        } else if (ap < 0 && std::isfinite(m_.lo(j))) {
          ratio = (m_.lo(j) - ax) / ap;
          side = Side::kLower;
        }
        ratio = std::max(ratio, 0.0);
        if (ratio < alpha) {
          alpha = ratio;
          block_var = -1;
          block_row = j;
          block_side = side;
        }
      }
      if (!std::isfinite(alpha)) {
        result.status = QpStatus::kUnbounded;
        result.x = x_;
        return result;
      }
      for (size_t k = 0; k < free_.size(); ++k) x_(free_[k]) += alpha * p_free(k);
      zero_steps = alpha <= 0.0 ? zero_steps + 1 : 0;
      if (block_var >= 0) {
        state_[block_var] = block_side == Side::kUpper ? VarState::kUpper : VarState::kLower;
        x_(block_var) = block_side == Side::kUpper ? m_.ub(block_var) : m_.lb(block_var);
      } else if (block_row >= 0) {
        rows_.push_back({block_row, m_.lo(block_row) == m_.hi(block_row) ? Side::kEqual
                                                                         : block_side});
        in_rows_[block_row] = true;
      }
    }
    result.status = QpStatus::kIterationLimit;
    result.x = x_;
    return result;
  }

 private:
  void init_working_set() {
    const int n = m_.num_vars();
    state_.assign(n, VarState::kFree);
    in_rows_.assign(m_.num_rows(), false);
    rows_.clear();
    for (int v = 0; v < n; ++v) {
      if (m_.lb(v) == m_.ub(v)) {
        state_[v] = VarState::kFixed;
        x_(v) = m_.lb(v);
      }
    }
    auto try_row = [&](int j, Side side) {
      rows_.push_back({j, side});
      if (!independent()) {
        rows_.pop_back();
        return;
      }
      in_rows_[j] = true;
    };
    for (int j = 0; j < m_.num_rows(); ++j) {
      if (m_.lo(j) == m_.hi(j)) try_row(j, Side::kEqual);
    }
    for (int v = 0; v < n; ++v) {
      if (state_[v] != VarState::kFree) continue;
      VarState s = VarState::kFree;
      if (std::abs(x_(v) - m_.lb(v)) <= feas_tol_) s = VarState::kLower;
      else if (std::abs(x_(v) - m_.ub(v)) <= feas_tol_) s = VarState::kUpper;
      if (s == VarState::kFree) continue;
      state_[v] = s;
      if (!independent()) state_[v] = VarState::kFree;
    }
    for (int j = 0; j < m_.num_rows(); ++j) {
      if (in_rows_[j]) continue;
      const double ax = m_.A.row(j).dot(x_);
      if (std::abs(ax - m_.lo(j)) <= feas_tol_) try_row(j, Side::kLower);
      else if (std::abs(ax - m_.hi(j)) <= feas_tol_) try_row(j, Side::kUpper);
    }
  }

  bool independent() {
    build_free_list();
    if (rows_.empty()) return true;
    if (rows_.size() > free_.size()) return false;
    Eigen::MatrixXd B(free_.size(), rows_.size());
    fill_b(B);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    qr.setThreshold(1e-10);
    return qr.rank() == static_cast<Eigen::Index>(rows_.size());
  }

  void build_free_list() {
    free_.clear();
    for (int v = 0; v < m_.num_vars(); ++v) {
      if (state_[v] == VarState::kFree) free_.push_back(v);
    }
  }

  Eigen::VectorXd gather(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(free_.size());
    for (size_t k = 0; k < free_.size(); ++k) out(k) = full(free_[k]);
    return out;
  }

  void fill_b(Eigen::MatrixXd& B) const {
    for (size_t r = 0; r < rows_.size(); ++r) {
      for (size_t k = 0; k < free_.size(); ++k) B(k, r) = m_.A(rows_[r].row, free_[k]);
    }
  }

  // Null-space basis Z of the working rows restricted to free columns, and
  // the QR factors used to recover multipliers.
  void factor() {
    const auto nf = static_cast<Eigen::Index>(free_.size());
    const auto mw = static_cast<Eigen::Index>(rows_.size());
    if (mw == 0) {
      Z_ = Eigen::MatrixXd::Identity(nf, nf);
      return;
    }
    Eigen::MatrixXd B(nf, mw);
    fill_b(B);
    qr_.compute(B);
    const Eigen::MatrixXd Q = qr_.householderQ();
    Z_ = Q.rightCols(nf - mw);
    Q1_ = Q.leftCols(mw);
  }

  Eigen::VectorXd step(const Eigen::VectorXd& grad_free, bool& ray) {
    const auto nf = static_cast<Eigen::Index>(free_.size());
    ray = false;
    if (Z_.cols() == 0) return Eigen::VectorXd::Zero(nf);
    Eigen::MatrixXd Hff(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      for (Eigen::Index b = 0; b < nf; ++b) Hff(a, b) = m_.H(free_[a], free_[b]);
    }
    const Eigen::VectorXd gz = Z_.transpose() * grad_free;
    const double gscale = 1.0 + grad_free.cwiseAbs().maxCoeff();
    if (Hff.cwiseAbs().maxCoeff() == 0.0) {
      if (gz.cwiseAbs().maxCoeff() <= 1e-12 * gscale) return Eigen::VectorXd::Zero(nf);
      ray = true;
      return -(Z_ * gz);
    }
    const Eigen::MatrixXd M = Z_.transpose() * Hff * Z_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    const Eigen::VectorXd comp = eig.eigenvectors().transpose() * gz;
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(comp.size());
    Eigen::VectorXd newton = Eigen::VectorXd::Zero(comp.size());
    for (Eigen::Index k = 0; k < comp.size(); ++k) {
      const double ev = eig.eigenvalues()(k);
      if (ev <= eig_tol_) {
        flat(k) = comp(k);
      } else {
        newton(k) = comp(k) / ev;
      }
    }
    if (flat.cwiseAbs().maxCoeff() > 1e-12 * gscale) {
      ray = true;
      return -(Z_ * (eig.eigenvectors() * flat));
    }
    return -(Z_ * (eig.eigenvectors() * newton));
  }

  void multipliers(const Eigen::VectorXd& grad, const Eigen::VectorXd& grad_free,
                   Eigen::VectorXd& y_w, Eigen::VectorXd& z) const {
    const auto mw = static_cast<Eigen::Index>(rows_.size());
    y_w = Eigen::VectorXd::Zero(mw);
    if (mw > 0) {
      const Eigen::VectorXd rhs = Q1_.transpose() * grad_free;
      y_w = qr_.matrixQR()
                .topLeftCorner(mw, mw)
                .triangularView<Eigen::Upper>()
                .solve(rhs);
    }
    z = Eigen::VectorXd::Zero(m_.num_vars());
    for (int v = 0; v < m_.num_vars(); ++v) {
      if (state_[v] == VarState::kFree) continue;
      double value = grad(v);
      for (Eigen::Index r = 0; r < mw; ++r) value -= y_w(r) * m_.A(rows_[r].row, v);
      z(v) = value;
    }
  }

  // Drops the working constraint whose multiplier has the wrong sign.
  // Returns false when every multiplier is dual feasible.
  bool release_one(const Eigen::VectorXd& y_w, const Eigen::VectorXd& z, bool bland) {
    double worst = mult_tol_;
    int drop_var = -1, drop_row = -1;
    for (int v = 0; v < m_.num_vars(); ++v) {
      double viol = 0.0;
      if (state_[v] == VarState::kLower) viol = -z(v);
      else if (state_[v] == VarState::kUpper) viol = z(v);
      if (viol > worst) {
        worst = viol;
        drop_var = v;
        if (bland) break;
      }
    }
    if (!(bland && drop_var >= 0)) {
      for (size_t r = 0; r < rows_.size(); ++r) {
        double viol = 0.0;
        if (rows_[r].side == Side::kLower) viol = -y_w(r);
        else if (rows_[r].side == Side::kUpper) viol = y_w(r);
        if (viol > worst) {
          worst = viol;
          drop_row = static_cast<int>(r);
          drop_var = -1;
          if (bland) break;
        }
      }
    }
    if (drop_row >= 0) {
      in_rows_[rows_[drop_row].row] = false;
      rows_.erase(rows_.begin() + drop_row);
      return true;
    }
    if (drop_var >= 0) {
      state_[drop_var] = VarState::kFree;
      return true;
    }
    return false;
  }

  const QpModel& m_;
  double feas_tol_;
  double mult_tol_ = 0.0;
  double eig_tol_ = 0.0;
  Eigen::VectorXd x_;
  std::vector<VarState> state_;
  std::vector<RowEntry> rows_;
  std::vector<bool> in_rows_;
  std::vector<int> free_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd Z_, Q1_;
};

}  // namespace

QpResult solve_active_set(const QpModel& m, const Eigen::VectorXd& x0, double feas_tol) {
  ActiveSet solver(m, feas_tol);
  return solver.run(x0);
}

Phase1Result find_feasible_point(const QpModel& m, const Eigen::VectorXd& x0,
                                 double feas_tol) {
  const int n = m.num_vars();
  const int rows = m.num_rows();
  const Eigen::VectorXd ax = m.A * x0;
  std::vector<int> violated;
  std::vector<double> sign;
  for (int j = 0; j < rows; ++j) {
    if (ax(j) > m.hi(j) + feas_tol) {
      violated.push_back(j);
      sign.push_back(-1.0);
    } else if (ax(j) < m.lo(j) - feas_tol) {
      violated.push_back(j);
      sign.push_back(1.0);
    }
  }
  Phase1Result out;
  out.row_violation = Eigen::VectorXd::Zero(rows);
  if (violated.empty()) {
    out.x = x0;
    return out;
  }
  const int na = static_cast<int>(violated.size());
  QpModel ext;
  ext.H = Eigen::MatrixXd::Zero(n + na, n + na);
  ext.c = Eigen::VectorXd::Zero(n + na);
  ext.c.tail(na).setOnes();
  ext.lb.resize(n + na);
  ext.ub.resize(n + na);
  ext.lb.head(n) = m.lb;
  ext.ub.head(n) = m.ub;
  ext.lb.tail(na).setZero();
  ext.ub.tail(na).setConstant(kInf);
  ext.A = Eigen::MatrixXd::Zero(rows, n + na);
  ext.A.leftCols(n) = m.A;
  ext.lo = m.lo;
  ext.hi = m.hi;
  Eigen::VectorXd start(n + na);
  start.head(n) = x0;
  for (int k = 0; k < na; ++k) {
    const int j = violated[k];
    ext.A(j, n + k) = sign[k];
    start(n + k) = sign[k] > 0 ? m.lo(j) - ax(j) : ax(j) - m.hi(j);
  }
  const QpResult res = solve_active_set(ext, start, feas_tol);
  out.ok = res.status == QpStatus::kOptimal;
  out.x = res.x.head(n);
  for (int k = 0; k < na; ++k) {
    const double t = std::max(0.0, res.x(n + k));
    out.total_violation += t;
    out.row_violation(violated[k]) = sign[k] > 0 ? -t : t;
  }
  return out;
}

}  // namespace tlmp::detail
