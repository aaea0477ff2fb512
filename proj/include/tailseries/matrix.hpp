#ifndef TAILSERIES_MATRIX_HPP
#define TAILSERIES_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "tailseries/errors.hpp"

namespace tailseries {

using vec = std::vector<double>;

// Dense row-major matrix. Dimensions in this library are tiny (state
// dimensions of the simulated models), so no effort is spent on blocking.
class mat {
  public:
    mat() : rows_(0), cols_(0) {}
    mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {
        require(rows > 0 && cols > 0, errc::invalid_parameter, "matrix dimensions must be positive");
    }

    static mat identity(int n) {
        mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static mat scalar(double v) {
        mat m(1, 1);
        m(0, 0) = v;
        return m;
    }

    static mat diag(const vec& d) {
        mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }

    bool is_zero(double tol = 0.0) const {
        for (double v : data_)
            if (std::fabs(v) > tol) return false;
        return true;
    }

    mat operator*(const mat& rhs) const {
        require(cols_ == rhs.rows_, errc::invalid_parameter, "matrix product shape mismatch");
        mat out(rows_, rhs.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (int j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    mat operator*(double s) const {
        mat out = *this;
        for (double& v : out.data_) v *= s;
        return out;
    }

    vec apply(const vec& x) const {
        require(static_cast<int>(x.size()) == cols_, errc::invalid_parameter, "matvec shape mismatch");
        vec y(static_cast<std::size_t>(rows_), 0.0);
        apply_to(x.data(), y.data());
        return y;
    }

    // y += scale * (A x); raw pointers for the sampler hot loop.
    void apply_accumulate(const double* x, double* y, double scale = 1.0) const {
        for (int i = 0; i < rows_; ++i) {
            double acc = 0.0;
            const double* row = &data_[static_cast<std::size_t>(i * cols_)];
            for (int j = 0; j < cols_; ++j) acc += row[j] * x[j];
            y[i] += scale * acc;
        }
    }

    void apply_to(const double* x, double* y) const {
        for (int i = 0; i < rows_; ++i) {
            double acc = 0.0;
            const double* row = &data_[static_cast<std::size_t>(i * cols_)];
            for (int j = 0; j < cols_; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

  private:
    int rows_, cols_;
    std::vector<double> data_;
};

inline double euclidean_norm(const double* x, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

inline double euclidean_norm(const vec& x) { return euclidean_norm(x.data(), static_cast<int>(x.size())); }

// Operator (spectral) norm. 1x1 and 2x2 in closed form, otherwise power
// iteration on A^T A started from every canonical basis vector, which cannot
// miss the top eigenspace.
inline double operator_norm(const mat& a) {
    const int r = a.rows(), c = a.cols();
    if (r == 1 && c == 1) return std::fabs(a(0, 0));
    if (r == 2 && c == 2) {
        const double t = a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1) + a(1, 0) * a(1, 0) + a(1, 1) * a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const double disc = std::sqrt(std::fmax(0.0, t * t - 4.0 * det * det));
        return std::sqrt(0.5 * (t + disc));
    }
    // gram = A^T A (c x c, symmetric PSD)
    mat gram(c, c);
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < c; ++j) {
            double s = 0.0;
            for (int k = 0; k < r; ++k) s += a(k, i) * a(k, j);
            gram(i, j) = s;
        }
    double best = 0.0;
    vec x(static_cast<std::size_t>(c)), y(static_cast<std::size_t>(c));
    for (int start = 0; start < c; ++start) {
        for (int i = 0; i < c; ++i) x[static_cast<std::size_t>(i)] = (i == start) ? 1.0 : 0.0;
        double lambda = 0.0;
        for (int it = 0; it < 200; ++it) {
            gram.apply_to(x.data(), y.data());
            const double n = euclidean_norm(y);
            if (n == 0.0) {
                lambda = 0.0;
                break;
            }
            for (int i = 0; i < c; ++i) x[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / n;
            if (std::fabs(n - lambda) <= 1e-15 * std::fmax(1.0, n)) {
                lambda = n;
                break;
            }
            lambda = n;
        }
        best = std::fmax(best, lambda);
    }
    return std::sqrt(best);
}

}  // namespace tailseries

#endif  // TAILSERIES_MATRIX_HPP
