#pragma once

// Soft-margin kernel SVM trained by SMO on the dual
//
//   min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K_ij
//
// with maximal-violating-pair / second-order working set selection. The
// stopping rule is the KKT gap m(a) - M(a) < tol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "svmcodoa/core.hpp"
#include "svmcodoa/kernel.hpp"

namespace svmcodoa {

/// Invalid training input (single class, non-finite features, ...).
class TrainingError : public Error {
public:
    using Error::Error;
};

struct SvmOptions {
    double c = 1.0;
    double tol = 1e-3;
    /// Update budget in passes; one pass is max(100 n, 10000) pair updates.
    int max_passes = 10;
    bool use_cache = true;
    /// Kernel rows kept by the LRU cache (at least 2 are always kept).
    std::size_t cache_rows = 4096;

    void validate() const {
        if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("svm: C must be positive and finite");
        if (!(tol > 0.0)) throw ConfigError("svm: tol must be positive");
        if (max_passes < 1) throw ConfigError("svm: max_passes must be >= 1");
    }

    std::size_t iteration_budget(std::size_t n) const {
        return static_cast<std::size_t>(max_passes) * std::max<std::size_t>(100 * n, 10000);
    }
};

struct TrainedSvm {
    Matrix support_vectors;
    /// alpha_i * y_i for each support vector.
    Vector dual_coefs;
    double bias = 0.0;
    KernelSpec kernel;
    double c = 1.0;
    /// Rows of the training matrix that became support vectors.
    std::vector<std::size_t> support_indices;
    bool converged = true;
    std::size_t iterations = 0;

    /// f(x) = sum_i coef_i K(sv_i, x) + b.
    double decision_value(std::span<const double> x) const {
        if (support_vectors.rows() > 0 && x.size() != support_vectors.cols())
            throw DimensionError("svm: feature dimension mismatch");
        double f = 0.0;
        for (std::size_t i = 0; i < support_vectors.rows(); ++i)
            f += dual_coefs[i] * kernel_eval(kernel, support_vectors.row(i), x);
        const double v = f + bias;
        if (!std::isfinite(v)) throw TrainingError("svm: non-finite decision value");
        return v;
    }

    /// sign(f(x)), with sign(0) = +1.
    int predict(std::span<const double> x) const { return decision_value(x) >= 0.0 ? 1 : -1; }
};

namespace svm_detail {

/// Kernel rows K(i, .) for the training set, optionally from a
/// precomputed squared-distance matrix (RBF only) and optionally cached.
/// Every path produces bit-identical values.
class KernelRows {
public:
    KernelRows(const Matrix& x, const KernelSpec& k, const Matrix* sqdist, const SvmOptions& opt)
        : x_(x), k_(k), sqdist_(k.family == KernelFamily::rbf ? sqdist : nullptr), n_(x.rows()),
          use_cache_(opt.use_cache) {
        diag_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) diag_[i] = value(i, i);
        const std::size_t cap = use_cache_ ? std::clamp<std::size_t>(opt.cache_rows, 2, n_) : 2;
        slots_.assign(cap, Vector(n_));
        owner_.assign(cap, npos);
        stamp_.assign(cap, 0);
        slot_of_.assign(n_, npos);
    }

    double diag(std::size_t i) const { return diag_[i]; }

    /// Rows i and j, both valid until the next call.
    std::pair<std::span<const double>, std::span<const double>> pair(std::size_t i, std::size_t j) {
        if (!use_cache_) {
            fill(slots_[0], i);
            fill(slots_[1], j);
            return {slots_[0], slots_[1]};
        }
        const std::size_t si = acquire(i, npos);
        const std::size_t sj = acquire(j, si);
        return {slots_[si], slots_[sj]};
    }

    std::span<const double> single(std::size_t i) {
        if (!use_cache_) {
            fill(slots_[0], i);
            return slots_[0];
        }
        return slots_[acquire(i, npos)];
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    double value(std::size_t i, std::size_t j) const {
        if (sqdist_) return rbf_from_squared_distance((*sqdist_)(i, j), k_.sigma);
        return kernel_eval(k_, x_.row(i), x_.row(j));
    }

    void fill(Vector& out, std::size_t i) const {
        for (std::size_t j = 0; j < n_; ++j) out[j] = value(i, j);
    }

    std::size_t acquire(std::size_t row, std::size_t pinned) {
        ++clock_;
        if (slot_of_[row] != npos) {
            stamp_[slot_of_[row]] = clock_;
            return slot_of_[row];
        }
        std::size_t victim = npos;
        for (std::size_t s = 0; s < slots_.size(); ++s) {
            if (s == pinned) continue;
            if (victim == npos || stamp_[s] < stamp_[victim]) victim = s;
        }
        if (owner_[victim] != npos) slot_of_[owner_[victim]] = npos;
        owner_[victim] = row;
        slot_of_[row] = victim;
        stamp_[victim] = clock_;
        fill(slots_[victim], row);
        return victim;
    }

    const Matrix& x_;
    KernelSpec k_;
    const Matrix* sqdist_;
    std::size_t n_;
    bool use_cache_;
    Vector diag_;
    std::vector<Vector> slots_;
    std::vector<std::size_t> owner_;
    std::vector<std::uint64_t> stamp_;
    std::vector<std::size_t> slot_of_;
    std::uint64_t clock_ = 0;
};

inline void check_inputs(const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw TrainingError("svm: empty training set");
    if (x.rows() != y.size()) throw DimensionError("svm: feature rows and labels differ in count");
    bool pos = false, neg = false;
    for (int label : y) {
        if (label == 1) pos = true;
        else if (label == -1) neg = true;
        else throw TrainingError("svm: labels must be -1 or +1");
    }
    if (!pos || !neg) throw TrainingError("svm: training data must contain both classes");
    for (double v : x.data())
        if (!std::isfinite(v)) throw TrainingError("svm: non-finite feature value");
}

}  // namespace svm_detail

/// Full dual solution, including zero multipliers.
struct SvmSolution {
    TrainedSvm model;
    Vector alpha;
};

/// Train on rows of `x` with labels in {-1, +1}. `sqdist`, when given,
/// must hold the pairwise squared distances of the rows of `x`; it is used
/// only for the RBF kernel.
inline SvmSolution svm_train_full(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                                  const SvmOptions& opt = {}, const Matrix* sqdist = nullptr) {
    opt.validate();
    kernel.validate();
    svm_detail::check_inputs(x, y);
    if (sqdist && (sqdist->rows() != x.rows() || sqdist->cols() != x.rows()))
        throw DimensionError("svm: distance matrix does not match training set");

    constexpr double tau = 1e-12;
    const std::size_t n = x.rows();
    const double c = opt.c;
    svm_detail::KernelRows rows(x, kernel, sqdist, opt);

    Vector alpha(n, 0.0);
    Vector grad(n, -1.0);  // Q alpha - e
    auto yd = [&](std::size_t t) { return static_cast<double>(y[t]); };
    auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

    const std::size_t budget = opt.iteration_budget(n);
    std::size_t iter = 0;
    bool converged = false;
    for (;;) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -yd(t) * grad[t] >= gmax) {
                gmax = -yd(t) * grad[t];
                i = t;
            }
        }
        if (i == n) {
            converged = true;
            break;
        }
        const auto ki = rows.single(i);
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = yd(t) * grad[t];
            gmax2 = std::max(gmax2, v);
            const double b = gmax + v;
            if (b > 0.0) {
                double a = rows.diag(i) + rows.diag(t) - 2.0 * ki[t];
                if (a <= 0.0) a = tau;
                const double obj = -(b * b) / a;
                if (obj <= best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < opt.tol || j == n) {
            converged = true;
            break;
        }
        if (iter >= budget) break;
        ++iter;

        const auto [row_i, row_j] = rows.pair(i, j);
        const double qij = yd(i) * yd(j) * row_i[j];
        const double old_ai = alpha[i], old_aj = alpha[j];
        double ai = old_ai, aj = old_aj;
        if (y[i] != y[j]) {
            double quad = rows.diag(i) + rows.diag(j) + 2.0 * qij;
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > c) {
                    ai = c;
                    aj = c - diff;
                }
            } else if (aj > c) {
                aj = c;
                ai = c + diff;
            }
        } else {
            double quad = rows.diag(i) + rows.diag(j) - 2.0 * qij;
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > c) {
                if (ai > c) {
                    ai = c;
                    aj = sum - c;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > c) {
                if (aj > c) {
                    aj = c;
                    ai = sum - c;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        const double dai = (ai - old_ai) * yd(i);
        const double daj = (aj - old_aj) * yd(j);
        for (std::size_t t = 0; t < n; ++t) grad[t] += yd(t) * (row_i[t] * dai + row_j[t] * daj);
    }

    // Bias: average over free multipliers, else midpoint of the feasible
    // interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = yd(t) * grad[t];
        if (alpha[t] >= c) {
            if (y[t] == -1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    SvmSolution out;
    TrainedSvm& m = out.model;
    m.kernel = kernel;
    m.c = c;
    m.bias = -rho;
    m.converged = converged;
    m.iterations = iter;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            m.support_indices.push_back(t);
            m.support_vectors.push_row(x.row(t));
            m.dual_coefs.push_back(alpha[t] * yd(t));
        }
    }
    if (m.support_vectors.rows() == 0) m.support_vectors = Matrix(0, x.cols());
    out.alpha = std::move(alpha);
    return out;
}

inline TrainedSvm svm_train(const Matrix& x, std::span<const int> y, const KernelSpec& kernel,
                            const SvmOptions& opt = {}, const Matrix* sqdist = nullptr) {
    return svm_train_full(x, y, kernel, opt, sqdist).model;
}

/// Dual objective e'a - 1/2 a'Qa (the quantity SMO maximizes).
inline double dual_objective(const Matrix& x, std::span<const int> y, const KernelSpec& k, std::span<const double> alpha) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < alpha.size(); ++j)
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel_eval(k, x.row(i), x.row(j));
    }
    return lin - 0.5 * quad;
}

/// Decision values of `model` on rows of `eval`, using a precomputed
/// eval-by-train squared-distance matrix for RBF models.
inline Vector decision_values(const TrainedSvm& model, const Matrix& eval, const Matrix* eval_train_sqdist = nullptr) {
    Vector out(eval.rows());
    const bool fast = eval_train_sqdist && model.kernel.family == KernelFamily::rbf;
    for (std::size_t r = 0; r < eval.rows(); ++r) {
        if (!fast) {
            out[r] = model.decision_value(eval.row(r));
            continue;
        }
        double f = 0.0;
        for (std::size_t s = 0; s < model.support_indices.size(); ++s)
            f += model.dual_coefs[s] *
                 rbf_from_squared_distance((*eval_train_sqdist)(r, model.support_indices[s]), model.kernel.sigma);
        out[r] = f + model.bias;
        if (!std::isfinite(out[r])) throw TrainingError("svm: non-finite decision value");
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-vs-rest

/// One binary machine per class, except that two classes share a single
/// machine (class 1 positive) so predictions match the binary machine
/// exactly.
struct MulticlassSvm {
    std::vector<TrainedSvm> machines;
    std::size_t n_classes = 0;

    bool binary() const noexcept { return n_classes == 2 && machines.size() == 1; }
    bool converged() const {
        return std::all_of(machines.begin(), machines.end(), [](const TrainedSvm& m) { return m.converged; });
    }

    /// Class index from per-class decision values; ties go to the lowest
    /// class index.
    static std::size_t argmax(std::span<const double> scores) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < scores.size(); ++k)
            if (scores[k] > scores[best]) best = k;
        return best;
    }

    Vector decision_values(std::span<const double> x) const {
        if (binary()) {
            const double f = machines.front().decision_value(x);
            return {-f, f};
        }
        Vector v;
        for (const auto& m : machines) v.push_back(m.decision_value(x));
        return v;
    }

    std::size_t predict(std::span<const double> x) const {
        if (binary()) return machines.front().decision_value(x) >= 0.0 ? 1 : 0;
        return argmax(decision_values(x));
    }

    /// Predicted class index for every row of `eval`.
    std::vector<std::size_t> predict_all(const Matrix& eval, const Matrix* eval_train_sqdist = nullptr) const {
        std::vector<std::size_t> out(eval.rows(), 0);
        if (binary()) {
            const Vector f = svmcodoa::decision_values(machines.front(), eval, eval_train_sqdist);
            for (std::size_t r = 0; r < f.size(); ++r) out[r] = f[r] >= 0.0 ? 1 : 0;
            return out;
        }
        std::vector<Vector> scores;
        for (const auto& m : machines) scores.push_back(svmcodoa::decision_values(m, eval, eval_train_sqdist));
        Vector row(machines.size());
        for (std::size_t r = 0; r < eval.rows(); ++r) {
            for (std::size_t k = 0; k < machines.size(); ++k) row[k] = scores[k][r];
            out[r] = argmax(row);
        }
        return out;
    }
};

/// Labels are class indices in [0, n_classes); every class must occur.
inline MulticlassSvm multiclass_train(const Matrix& x, std::span<const std::size_t> labels, std::size_t n_classes,
                                      const KernelSpec& kernel, const SvmOptions& opt = {},
                                      const Matrix* sqdist = nullptr) {
    if (n_classes < 2) throw TrainingError("svm: need at least 2 classes");
    if (labels.size() != x.rows()) throw DimensionError("svm: feature rows and labels differ in count");
    std::vector<std::size_t> count(n_classes, 0);
    for (std::size_t l : labels) {
        if (l >= n_classes) throw TrainingError("svm: label index out of range");
        ++count[l];
    }
    for (std::size_t k = 0; k < n_classes; ++k)
        if (count[k] == 0) throw TrainingError("svm: class " + std::to_string(k) + " absent from training data");

    MulticlassSvm out;
    out.n_classes = n_classes;
    std::vector<int> y(labels.size());
    const std::size_t first = n_classes == 2 ? 1 : 0;
    for (std::size_t k = first; k < n_classes; ++k) {
        for (std::size_t r = 0; r < labels.size(); ++r) y[r] = labels[r] == k ? 1 : -1;
        out.machines.push_back(svm_train(x, y, kernel, opt, sqdist));
    }
    return out;
}

}  // namespace svmcodoa
