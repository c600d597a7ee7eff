#include "llcomb/grid.hpp"

#include "llcomb/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

namespace llcomb {

namespace {

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Plan {
    fftw_plan handle = nullptr;
    Plan() = default;
    explicit Plan(fftw_plan p) : handle(p) {}
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        if (handle) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(handle);
        }
    }
};

fftw_plan make_dct1(int n, int howmany) {
    std::vector<double> scratch(static_cast<std::size_t>(n) * howmany);
    fftw_r2r_kind kind = FFTW_REDFT00;
    std::lock_guard lock(planner_mutex());
    fftw_plan p = fftw_plan_many_r2r(1, &n, howmany, scratch.data(), nullptr, howmany, 1, scratch.data(), nullptr,
                                     howmany, 1, &kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("FFTW failed to create a DCT-I plan of size " + std::to_string(n));
    return p;
}

// values -> cosine coefficients, in place, for `howmany` interleaved arrays
void dct_analyze(fftw_plan plan, double* data, int n, int howmany) {
    fftw_execute_r2r(plan, data, data);
    const double inv = 1.0 / (n - 1);
    for (int k = 0; k < n; ++k) {
        const double s = (k == 0 || k == n - 1) ? 0.5 * inv : inv;
        for (int h = 0; h < howmany; ++h) data[k * howmany + h] *= s;
    }
}

void dct_synthesize(fftw_plan plan, double* data, int n, int howmany) {
    for (int k = 1; k < n - 1; ++k)
        for (int h = 0; h < howmany; ++h) data[k * howmany + h] *= 0.5;
    fftw_execute_r2r(plan, data, data);
}

} // namespace

struct Grid::Impl {
    int n = 0;
    int m = 0;
    double padding = 1.0;
    std::vector<double> x;
    std::vector<double> w;
    Plan coarse;
    Plan coarse_complex;
    Plan fine;

    std::once_flag d2_once, prolong_once, restrict_once;
    Eigen::MatrixXd d2, prolong, restrict;
};

Grid::Grid(int n, double padding) : impl_(std::make_shared<Impl>()) {
    if (n < 16) throw PreconditionError("grid needs at least 16 points, got " + std::to_string(n));
    if (!(padding >= 1.0)) throw PreconditionError("padding factor must be >= 1");
    auto& g = *impl_;
    g.n = n;
    g.padding = padding;
    g.m = static_cast<int>(std::ceil(padding * (n - 1) - 1e-9)) + 1;
    const double h = std::numbers::pi / (n - 1);
    g.x.resize(n);
    g.w.assign(n, h);
    for (int j = 0; j < n; ++j) g.x[j] = j * h;
    g.x[n - 1] = std::numbers::pi;
    g.w[0] = g.w[n - 1] = 0.5 * h;
    g.coarse.handle = make_dct1(n, 1);
    g.coarse_complex.handle = make_dct1(n, 2);
    g.fine.handle = g.m == n ? nullptr : make_dct1(g.m, 1);
}

int Grid::size() const noexcept { return impl_->n; }
int Grid::padded_size() const noexcept { return impl_->m; }
double Grid::padding() const noexcept { return impl_->padding; }
double Grid::x(int j) const noexcept { return impl_->x[j]; }
std::span<const double> Grid::nodes() const noexcept { return impl_->x; }
std::span<const double> Grid::weights() const noexcept { return impl_->w; }
bool Grid::same_as(const Grid& other) const noexcept {
    return impl_ == other.impl_ || (size() == other.size() && padded_size() == other.padded_size());
}

namespace {
void check_sizes(std::size_t in, std::size_t out, int expected) {
    if (in != static_cast<std::size_t>(expected) || out != static_cast<std::size_t>(expected))
        throw PreconditionError("transform length " + std::to_string(in) + " -> " + std::to_string(out) +
                                ", grid expects " + std::to_string(expected));
}
} // namespace

void Grid::analyze(std::span<const double> values, std::span<double> coeffs) const {
    check_sizes(values.size(), coeffs.size(), impl_->n);
    std::copy(values.begin(), values.end(), coeffs.begin());
    dct_analyze(impl_->coarse.handle, coeffs.data(), impl_->n, 1);
}

void Grid::synthesize(std::span<const double> coeffs, std::span<double> values) const {
    check_sizes(coeffs.size(), values.size(), impl_->n);
    std::copy(coeffs.begin(), coeffs.end(), values.begin());
    dct_synthesize(impl_->coarse.handle, values.data(), impl_->n, 1);
}

void Grid::analyze_padded(std::span<const double> values, std::span<double> coeffs) const {
    if (!dealiased()) return analyze(values, coeffs);
    check_sizes(values.size(), coeffs.size(), impl_->m);
    std::copy(values.begin(), values.end(), coeffs.begin());
    dct_analyze(impl_->fine.handle, coeffs.data(), impl_->m, 1);
}

void Grid::synthesize_padded(std::span<const double> coeffs, std::span<double> values) const {
    if (!dealiased()) return synthesize(coeffs, values);
    check_sizes(coeffs.size(), values.size(), impl_->m);
    std::copy(coeffs.begin(), coeffs.end(), values.begin());
    dct_synthesize(impl_->fine.handle, values.data(), impl_->m, 1);
}

void Grid::analyze_complex(double* interleaved) const {
    dct_analyze(impl_->coarse_complex.handle, interleaved, impl_->n, 2);
}

void Grid::synthesize_complex(double* interleaved) const {
    dct_synthesize(impl_->coarse_complex.handle, interleaved, impl_->n, 2);
}

const Eigen::MatrixXd& Grid::second_derivative() const {
    auto& g = *impl_;
    std::call_once(g.d2_once, [&] {
        const int n = g.n;
        g.d2.resize(n, n);
        std::vector<double> c(n), v(n);
        for (int col = 0; col < n; ++col) {
            std::fill(v.begin(), v.end(), 0.0);
            v[col] = 1.0;
            analyze(v, c);
            for (int k = 0; k < n; ++k) c[k] *= -static_cast<double>(k) * k;
            synthesize(c, v);
            for (int r = 0; r < n; ++r) g.d2(r, col) = v[r];
        }
    });
    return g.d2;
}

const Eigen::MatrixXd& Grid::prolongation() const {
    auto& g = *impl_;
    std::call_once(g.prolong_once, [&] {
        const int n = g.n, m = g.m;
        g.prolong.setZero(m, n);
        std::vector<double> c(n), cf(m), v(n), vf(m);
        for (int col = 0; col < n; ++col) {
            std::fill(v.begin(), v.end(), 0.0);
            v[col] = 1.0;
            analyze(v, c);
            std::fill(cf.begin(), cf.end(), 0.0);
            std::copy(c.begin(), c.end(), cf.begin());
            synthesize_padded(cf, vf);
            for (int r = 0; r < m; ++r) g.prolong(r, col) = vf[r];
        }
    });
    return g.prolong;
}

const Eigen::MatrixXd& Grid::restriction() const {
    auto& g = *impl_;
    std::call_once(g.restrict_once, [&] {
        const int n = g.n, m = g.m;
        g.restrict.setZero(n, m);
        std::vector<double> c(n), cf(m), v(n), vf(m);
        for (int col = 0; col < m; ++col) {
            std::fill(vf.begin(), vf.end(), 0.0);
            vf[col] = 1.0;
            analyze_padded(vf, cf);
            std::copy(cf.begin(), cf.begin() + n, c.begin());
            synthesize(c, v);
            for (int r = 0; r < n; ++r) g.restrict(r, col) = v[r];
        }
    });
    return g.restrict;
}

} // namespace llcomb
