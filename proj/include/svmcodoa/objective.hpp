#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "svmcodoa/core.hpp"
#include "svmcodoa/dataset.hpp"
#include "svmcodoa/kernel.hpp"
#include "svmcodoa/svm.hpp"

namespace svmcodoa {

/// TD/FD of `predicted` against `truth`.
inline DiagnosisCounts count_diagnoses(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
    if (predicted.size() != truth.size()) throw DimensionError("diagnosis: prediction and label counts differ");
    DiagnosisCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == truth[i]) ++c.true_diagnosis;
        else ++c.false_diagnosis;
    }
    return c;
}

/// Trains on one dataset and scores on another for a given kernel width.
///
/// Squared distances are computed once; every evaluation reuses them.
/// Evaluations are memoized by exact sigma, which is safe because the
/// result is a pure function of sigma. Thread-safe.
class SvmAccuracyObjective {
public:
    SvmAccuracyObjective(const Dataset& train, const Dataset& eval, KernelFamily family = KernelFamily::rbf,
                         SvmOptions svm = {}, KernelSpec base_kernel = {})
        : train_(train), eval_(eval), svm_(svm), base_(base_kernel) {
        base_.family = family;
        svm_.validate();
        if (train.features.cols() != eval.features.cols())
            throw DimensionError("objective: train and eval feature dimensions differ");
        if (train.class_names != eval.class_names)
            throw DataError("objective: train and eval label alphabets differ");
        if (train.size() == 0 || eval.size() == 0) throw EmptyEvaluationError();
        if (family == KernelFamily::rbf) {
            train_sqdist_ = pairwise_squared_distances(train.features, train.features);
            if (&train != &eval) eval_sqdist_ = pairwise_squared_distances(eval.features, train.features);
        }
    }

    /// Kernel used for a search position: rbf takes sigma = position[0];
    /// the other families ignore the position.
    KernelSpec kernel_for(double sigma) const {
        KernelSpec k = base_;
        if (k.family == KernelFamily::rbf) k.sigma = sigma;
        return k;
    }

    MulticlassSvm train_model(double sigma) const {
        const Matrix* d = base_.family == KernelFamily::rbf ? &train_sqdist_ : nullptr;
        return multiclass_train(train_.features, train_.labels, train_.n_classes(), kernel_for(sigma), svm_, d);
    }

    DiagnosisCounts evaluate(const MulticlassSvm& model) const {
        const Matrix* d = nullptr;
        if (base_.family == KernelFamily::rbf) d = &train_ == &eval_ ? &train_sqdist_ : &eval_sqdist_;
        return count_diagnoses(model.predict_all(eval_.features, d), eval_.labels);
    }

    /// Accuracy in percent; 0 (with a warning) when training fails or
    /// does not converge.
    double operator()(std::span<const double> position) const {
        const double sigma = position[0];
        {
            std::lock_guard lock(mutex_);
            if (const auto it = memo_.find(sigma); it != memo_.end()) return it->second;
        }
        double value = 0.0;
        try {
            const MulticlassSvm model = train_model(sigma);
            if (model.converged()) value = accuracy(evaluate(model));
            else warn("sigma=" + std::to_string(sigma) + ": SVM training did not converge");
        } catch (const TrainingError& e) {
            warn("sigma=" + std::to_string(sigma) + ": " + e.what());
        }
        std::lock_guard lock(mutex_);
        memo_.emplace(sigma, value);
        return value;
    }

    std::size_t warning_count() const noexcept { return warnings_.load(); }

    std::string first_warning() const {
        std::lock_guard lock(mutex_);
        return first_warning_;
    }

    const SvmOptions& svm_options() const noexcept { return svm_; }

private:
    void warn(std::string msg) const {
        ++warnings_;
        std::lock_guard lock(mutex_);
        if (first_warning_.empty()) first_warning_ = std::move(msg);
    }

    const Dataset& train_;
    const Dataset& eval_;
    SvmOptions svm_;
    KernelSpec base_;
    Matrix train_sqdist_;
    Matrix eval_sqdist_;
    mutable std::mutex mutex_;
    mutable std::map<double, double> memo_;
    mutable std::atomic<std::size_t> warnings_{0};
    mutable std::string first_warning_;
};

/// Objective for the optimizers: position -> accuracy of an SVM trained on
/// `train` and scored on `eval`. The datasets must outlive the objective.
inline Objective make_objective(const Dataset& train, const Dataset& eval, KernelFamily family = KernelFamily::rbf,
                                SvmOptions svm = {}) {
    auto impl = std::make_shared<const SvmAccuracyObjective>(train, eval, family, svm);
    return [impl](std::span<const double> x) { return (*impl)(x); };
}

}  // namespace svmcodoa
