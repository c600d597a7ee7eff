#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>

namespace llcomb {

/// Uniform cosine collocation grid on [0, pi] including both endpoints,
/// x_j = j pi / (n - 1). Grid functions are identified with their cosine
/// interpolant  v(x) = sum_{k=0}^{n-1} c_k cos(k x),  so Neumann conditions
/// hold by construction.
///
/// A second, padded grid with m - 1 = ceil(padding (n - 1)) intervals is used to
/// evaluate products without aliasing. Grids are immutable and cheap to copy;
/// copies share transform plans and operator matrices.
class Grid {
public:
    explicit Grid(int n = 256, double padding = 2.0);

    int size() const noexcept;
    int padded_size() const noexcept;
    double padding() const noexcept;
    bool dealiased() const noexcept { return padded_size() != size(); }

    double x(int j) const noexcept;
    std::span<const double> nodes() const noexcept;

    /// Trapezoid weights; sum to pi. Integrates the cosine interpolant exactly.
    std::span<const double> weights() const noexcept;

    /// Grid values -> cosine coefficients c_k (k = 0..n-1).
    void analyze(std::span<const double> values, std::span<double> coeffs) const;
    /// Cosine coefficients -> grid values.
    void synthesize(std::span<const double> coeffs, std::span<double> values) const;

    void analyze_padded(std::span<const double> values, std::span<double> coeffs) const;
    void synthesize_padded(std::span<const double> coeffs, std::span<double> values) const;

    /// In-place transforms of an interleaved complex array (re, im, re, im, ...) of n points.
    void analyze_complex(double* interleaved) const;
    void synthesize_complex(double* interleaved) const;

    /// Dense matrices (built on first use, then shared).
    const Eigen::MatrixXd& second_derivative() const;  ///< n x n
    const Eigen::MatrixXd& prolongation() const;       ///< m x n, coarse values -> padded values
    const Eigen::MatrixXd& restriction() const;        ///< n x m, padded values -> truncated coarse values

    bool same_as(const Grid& other) const noexcept;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

} // namespace llcomb
