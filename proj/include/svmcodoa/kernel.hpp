#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svmcodoa/core.hpp"

namespace svmcodoa {

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Dense row-major matrix of feature vectors.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<Vector>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw DimensionError("matrix: ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    void push_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DimensionError("matrix: row length mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class KernelFamily { linear, polynomial, rbf };

inline std::string_view to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "polynomial";
        case KernelFamily::rbf: return "rbf";
    }
    return "?";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
    if (s == "linear") return KernelFamily::linear;
    if (s == "polynomial" || s == "poly") return KernelFamily::polynomial;
    if (s == "rbf" || s == "gaussian") return KernelFamily::rbf;
    throw ConfigError("unknown kernel family '" + std::string(s) + "'");
}

struct KernelSpec {
    KernelFamily family = KernelFamily::rbf;
    int degree = 2;
    double sigma = 1.0;

    static KernelSpec linear() { return {KernelFamily::linear, 1, 1.0}; }
    static KernelSpec polynomial(int p) { return {KernelFamily::polynomial, p, 1.0}; }
    static KernelSpec rbf(double sigma) { return {KernelFamily::rbf, 1, sigma}; }

    void validate() const {
        if (family == KernelFamily::rbf && !(sigma > 0.0 && std::isfinite(sigma)))
            throw ConfigError("kernel: sigma must be positive and finite");
        if (family == KernelFamily::polynomial && degree < 1) throw ConfigError("kernel: degree must be >= 1");
    }

    bool operator==(const KernelSpec&) const = default;
};

/// Sum of squared differences, accumulated in feature order.
inline double squared_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("kernel: vectors differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("kernel: vectors differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

/// RBF value from a precomputed squared distance. kernel_eval goes through
/// here too, so precomputed-distance paths are bit-identical.
inline double rbf_from_squared_distance(double d2, double sigma) { return std::exp(-d2 / (2.0 * sigma * sigma)); }

/// linear: x.y; polynomial: (1 + x.y)^p; rbf: exp(-|x-y|^2 / (2 sigma^2)).
inline double kernel_eval(const KernelSpec& k, std::span<const double> x, std::span<const double> y) {
    switch (k.family) {
        case KernelFamily::linear: return dot(x, y);
        case KernelFamily::polynomial: {
            const double base = 1.0 + dot(x, y);
            double r = 1.0;
            for (int i = 0; i < k.degree; ++i) r *= base;
            return r;
        }
        case KernelFamily::rbf: return rbf_from_squared_distance(squared_distance(x, y), k.sigma);
    }
    return 0.0;
}

/// Pairwise squared distances between the rows of `a` and the rows of `b`.
inline Matrix pairwise_squared_distances(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("kernel: feature dimensions differ");
    Matrix d(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) d(i, j) = squared_distance(a.row(i), b.row(j));
    return d;
}

inline Matrix gram_matrix(const KernelSpec& k, const Matrix& x) {
    Matrix g(x.rows(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) g(i, j) = kernel_eval(k, x.row(i), x.row(j));
    return g;
}

}  // namespace svmcodoa
