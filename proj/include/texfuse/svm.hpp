#ifndef TEXFUSE_SVM_HPP
#define TEXFUSE_SVM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "texfuse/error.hpp"

namespace texfuse {

enum class SvmKernel { rbf, linear };

struct SvcConfig {
    SvmKernel kernel = SvmKernel::rbf;
    double C = 1.0;
    double gamma = 0.0; // <= 0: 1 / (dims * mean per-feature variance)
    double tol = 1e-3;
    double step_eps = 1e-12;
    std::int64_t max_pair_updates = 1000000;
    bool standardize = false;
};

struct SvcModel {
    SvcConfig config;
    std::size_t cols = 0;
    double gamma = 0.0; // resolved value actually used
    double b = 0.0;
    bool converged = true;
    std::int64_t pair_updates = 0;
    std::vector<double> coef; // alpha_i * y_i per support vector
    std::vector<double> sv;   // support vectors, row-major
    // z-score transform fitted on the training rows; empty when off.
    std::vector<double> scale_mean;
    std::vector<double> scale_inv;

    std::size_t sv_count() const { return coef.size(); }

    double decision(const double* x) const {
        std::vector<double> scaled;
        if (!scale_mean.empty()) {
            scaled.resize(cols);
            for (std::size_t f = 0; f < cols; ++f)
                scaled[f] = (x[f] - scale_mean[f]) * scale_inv[f];
            x = scaled.data();
        }
        double f = b;
        for (std::size_t s = 0; s < coef.size(); ++s) {
            const double* v = sv.data() + s * cols;
            double k;
            if (config.kernel == SvmKernel::linear) {
                k = 0.0;
                for (std::size_t j = 0; j < cols; ++j) k += x[j] * v[j];
            } else {
                double d2 = 0.0;
                for (std::size_t j = 0; j < cols; ++j) {
                    const double d = x[j] - v[j];
                    d2 += d * d;
                }
                k = std::exp(-gamma * d2);
            }
            f += coef[s] * k;
        }
        return f;
    }
    int predict(const double* x) const { return decision(x) > 0.0 ? 1 : 0; }
};

namespace detail {

// Sequential minimal optimization with Platt's two-loop heuristic, made fully
// deterministic: the second-choice scans run in ascending index order instead
// of from a random start.
class SmoSolver {
public:
    SmoSolver(const std::vector<double>& X, std::size_t rows, std::size_t cols,
              const std::vector<double>& ysigned, const SvcConfig& cfg, double gamma)
        : X_(X), rows_(rows), cols_(cols), y_(ysigned), cfg_(cfg), gamma_(gamma) {
        K_.assign(rows_ * rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < rows_; ++j) {
                const double v = kernel(i, j);
                K_[i * rows_ + j] = v;
                K_[j * rows_ + i] = v;
            }
        alpha_.assign(rows_, 0.0);
        err_.resize(rows_);
        for (std::size_t i = 0; i < rows_; ++i) err_[i] = -y_[i]; // f == 0 initially
    }

    void solve() {
        bool examine_all = true;
        std::size_t changed = 1;
        while (changed > 0 || examine_all) {
            if (capped_) break;
            changed = 0;
            for (std::size_t i = 0; i < rows_ && !capped_; ++i) {
                if (!examine_all && !is_free(i)) continue;
                changed += examine(i) ? 1 : 0;
            }
            if (examine_all)
                examine_all = false;
            else if (changed == 0)
                examine_all = true;
        }
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return b_; }
    bool converged() const { return !capped_; }
    std::int64_t pair_updates() const { return updates_; }

private:
    double kernel(std::size_t i, std::size_t j) const {
        const double* a = X_.data() + i * cols_;
        const double* b = X_.data() + j * cols_;
        if (cfg_.kernel == SvmKernel::linear) {
            double s = 0.0;
            for (std::size_t f = 0; f < cols_; ++f) s += a[f] * b[f];
            return s;
        }
        double d2 = 0.0;
        for (std::size_t f = 0; f < cols_; ++f) {
            const double d = a[f] - b[f];
            d2 += d * d;
        }
        return std::exp(-gamma_ * d2);
    }

    bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < cfg_.C; }

    bool examine(std::size_t i2) {
        const double y2 = y_[i2], a2 = alpha_[i2], e2 = err_[i2];
        const double r2 = e2 * y2;
        const bool violates = (r2 < -cfg_.tol && a2 < cfg_.C) || (r2 > cfg_.tol && a2 > 0.0);
        if (!violates) return false;

        // First choice: the free point with the largest |E1 - E2| gap.
        std::size_t best = rows_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            if (!is_free(i)) continue;
            const double gap = std::fabs(err_[i] - e2);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < rows_ && take_step(best, i2)) return true;
        for (std::size_t i = 0; i < rows_ && !capped_; ++i)
            if (is_free(i) && take_step(i, i2)) return true;
        for (std::size_t i = 0; i < rows_ && !capped_; ++i)
            if (take_step(i, i2)) return true;
        return false;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1], a2 = alpha_[i2];
        const double y1 = y_[i1], y2 = y_[i2];
        const double e1 = err_[i1], e2 = err_[i2];
        const double s = y1 * y2;
        const double C = cfg_.C;

        double L, H;
        if (y1 != y2) {
            L = std::max(0.0, a2 - a1);
            H = std::min(C, C + a2 - a1);
        } else {
            L = std::max(0.0, a1 + a2 - C);
            H = std::min(C, a1 + a2);
        }
        if (L >= H) return false;

        const double k11 = K_[i1 * rows_ + i1];
        const double k12 = K_[i1 * rows_ + i2];
        const double k22 = K_[i2 * rows_ + i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2n;
        if (eta > 0.0) {
            a2n = a2 + y2 * (e1 - e2) / eta;
            a2n = std::clamp(a2n, L, H);
        } else {
            // Flat direction: evaluate the dual objective at both ends.
            const double f1 = y1 * e1 - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * e2 - s * a1 * k12 - a2 * k22;
            const double L1 = a1 + s * (a2 - L);
            const double H1 = a1 + s * (a2 - H);
            const double psiL = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 +
                                0.5 * L * L * k22 + s * L * L1 * k12;
            const double psiH = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 +
                                0.5 * H * H * k22 + s * H * H1 * k12;
            if (psiL < psiH - cfg_.step_eps)
                a2n = L;
            else if (psiL > psiH + cfg_.step_eps)
                a2n = H;
            else
                return false;
        }
        if (std::fabs(a2n - a2) < cfg_.step_eps * (a2n + a2 + cfg_.step_eps)) return false;

        double a1n = a1 + s * (a2 - a2n);
        a1n = std::clamp(a1n, 0.0, C); // absorb rounding spill at the box edge

        const double d1 = y1 * (a1n - a1);
        const double d2 = y2 * (a2n - a2);
        double bn;
        const double b1 = b_ - e1 - d1 * k11 - d2 * k12;
        const double b2 = b_ - e2 - d1 * k12 - d2 * k22;
        if (a1n > 0.0 && a1n < C)
            bn = b1;
        else if (a2n > 0.0 && a2n < C)
            bn = b2;
        else
            bn = 0.5 * (b1 + b2);

        const double db = bn - b_;
        for (std::size_t i = 0; i < rows_; ++i)
            err_[i] += d1 * K_[i1 * rows_ + i] + d2 * K_[i2 * rows_ + i] + db;
        alpha_[i1] = a1n;
        alpha_[i2] = a2n;
        b_ = bn;

        if (++updates_ >= cfg_.max_pair_updates) capped_ = true;
        return true;
    }

    const std::vector<double>& X_;
    std::size_t rows_, cols_;
    const std::vector<double>& y_;
    SvcConfig cfg_;
    double gamma_;
    std::vector<double> K_, alpha_, err_;
    double b_ = 0.0;
    std::int64_t updates_ = 0;
    bool capped_ = false;
};

} // namespace detail

inline SvcModel train_svc(const double* X, std::size_t rows, std::size_t cols,
                          const std::vector<int>& y, const SvcConfig& cfg,
                          std::vector<double>* alpha_out = nullptr) {
    if (rows == 0 || cols == 0) throw Error(Errc::degenerate_data, "svc: empty training set");
    SvcModel model;
    model.config = cfg;
    model.cols = cols;

    std::vector<double> Xw(X, X + rows * cols);
    if (cfg.standardize) {
        model.scale_mean.assign(cols, 0.0);
        model.scale_inv.assign(cols, 1.0);
        for (std::size_t f = 0; f < cols; ++f) {
            double m = 0.0;
            for (std::size_t i = 0; i < rows; ++i) m += Xw[i * cols + f];
            m /= static_cast<double>(rows);
            double v = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                const double d = Xw[i * cols + f] - m;
                v += d * d;
            }
            v /= static_cast<double>(rows);
            const double sd = std::sqrt(v);
            model.scale_mean[f] = m;
            model.scale_inv[f] = sd > 0.0 ? 1.0 / sd : 1.0;
            for (std::size_t i = 0; i < rows; ++i)
                Xw[i * cols + f] = (Xw[i * cols + f] - m) * model.scale_inv[f];
        }
    }

    double gamma = cfg.gamma;
    if (gamma <= 0.0) {
        // 1 / (dims * mean per-feature variance), on the data the kernel sees.
        double var_sum = 0.0;
        for (std::size_t f = 0; f < cols; ++f) {
            double m = 0.0;
            for (std::size_t i = 0; i < rows; ++i) m += Xw[i * cols + f];
            m /= static_cast<double>(rows);
            double v = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                const double d = Xw[i * cols + f] - m;
                v += d * d;
            }
            var_sum += v / static_cast<double>(rows);
        }
        const double mean_var = var_sum / static_cast<double>(cols);
        gamma = mean_var > 0.0 ? 1.0 / (static_cast<double>(cols) * mean_var)
                               : 1.0 / static_cast<double>(cols);
    }
    model.gamma = gamma;

    long ones = 0;
    for (int v : y) ones += v;
    if (ones == 0 || ones == static_cast<long>(rows)) {
        // Constant-label set: no usable pair satisfies the equality
        // constraint, so emit a constant decision for that label.
        model.b = ones == 0 ? -1.0 : 1.0;
        if (alpha_out) alpha_out->assign(rows, 0.0);
        return model;
    }

    std::vector<double> ys(rows);
    for (std::size_t i = 0; i < rows; ++i) ys[i] = y[i] == 1 ? 1.0 : -1.0;

    detail::SmoSolver solver(Xw, rows, cols, ys, cfg, gamma);
    solver.solve();
    model.converged = solver.converged();
    model.pair_updates = solver.pair_updates();
    model.b = solver.bias();
    for (std::size_t i = 0; i < rows; ++i) {
        if (solver.alpha()[i] <= 0.0) continue;
        model.coef.push_back(solver.alpha()[i] * ys[i]);
        model.sv.insert(model.sv.end(), Xw.begin() + static_cast<std::ptrdiff_t>(i * cols),
                        Xw.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols));
    }
    if (alpha_out) *alpha_out = solver.alpha();
    return model;
}

// Worst KKT violation over the training rows, given the dual coefficients:
//   alpha = 0     requires y f >= 1 - viol
//   0 < alpha < C requires |y f - 1| <= viol
//   alpha = C     requires y f <= 1 + viol
// The solver's stopping rule bounds this by tol when it reports convergence.
inline double svc_kkt_violation(const SvcModel& model, const double* X, std::size_t rows,
                                const std::vector<int>& y, const std::vector<double>& alpha) {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double f = model.decision(X + i * model.cols);
        const double m = (y[i] == 1 ? 1.0 : -1.0) * f;
        double viol;
        if (alpha[i] <= 0.0)
            viol = std::max(0.0, 1.0 - m);
        else if (alpha[i] < model.config.C)
            viol = std::fabs(m - 1.0);
        else
            viol = std::max(0.0, m - 1.0);
        worst = std::max(worst, viol);
    }
    return worst;
}

} // namespace texfuse

#endif
