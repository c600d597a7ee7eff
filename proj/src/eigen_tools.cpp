#include "llcomb/eigen_tools.hpp"

#include "llcomb/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace llcomb {

int determinant_sign(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu) {
    const auto& lum = lu.matrixLU();
    int sign = 1;
    for (Eigen::Index i = 0; i < lum.rows(); ++i) {
        const double u = lum(i, i);
        if (u == 0.0) return 0;
        if (u < 0.0) sign = -sign;
    }
    // parity of the row permutation by cycle counting
    const auto& idx = lu.permutationP().indices();
    std::vector<char> seen(idx.size(), 0);
    for (Eigen::Index i = 0; i < idx.size(); ++i) {
        if (seen[i]) continue;
        Eigen::Index len = 0;
        for (Eigen::Index j = i; !seen[j]; j = idx[j]) {
            seen[j] = 1;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

namespace {

SmallEigenpairs dense_fallback(const Eigen::MatrixXd& A, int m, bool want_vectors) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, want_vectors);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigen solver failed", 0, 0.0);
    const Eigen::VectorXcd ev = es.eigenvalues();
    std::vector<int> order(ev.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(ev[i]) < std::abs(ev[j]); });
    SmallEigenpairs out;
    for (int i = 0; i < m; ++i) out.values.push_back(ev[order[i]]);
    if (want_vectors) {
        out.vectors.resize(A.rows(), m);
        for (int i = 0; i < m; ++i) out.vectors.col(i) = es.eigenvectors().col(order[i]).normalized();
    }
    return out;
}

void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const std::complex<double> z = v[imax];
    if (std::abs(z) > 0.0) v *= std::conj(z) / std::abs(z);
    v.normalize();
}

} // namespace

SmallEigenpairs smallest_eigenpairs(const Eigen::MatrixXd& A, int m, bool want_vectors, const ArnoldiOptions& opt,
                                    const Eigen::PartialPivLU<Eigen::MatrixXd>* factor) {
    const Eigen::Index N = A.rows();
    if (A.cols() != N || m < 1 || m > N) throw PreconditionError("smallest_eigenpairs: bad dimensions");
    int p = opt.krylov_dim > 0 ? opt.krylov_dim : std::max(3 * m + 10, 40);
    if (p >= N || N <= 64) return dense_fallback(A, m, want_vectors);

    const double anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
    double shift = 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    if (factor)
        lu = *factor;
    else
        lu.compute(A);
    if (!(lu.rcond() > 1e-15)) {
        // exactly singular: move off the zero eigenvalue
        shift = 1e-10 * std::max(anorm, 1.0);
        lu.compute(A - shift * Eigen::MatrixXd::Identity(N, N));
    }

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd start(N);
    for (Eigen::Index i = 0; i < N; ++i) start[i] = uni(rng);

    Eigen::MatrixXd V(N, p + 1);
    Eigen::MatrixXd H(p + 1, p);
    SmallEigenpairs out;
    out.shift = shift;
    double worst = 0.0;

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        V.setZero();
        H.setZero();
        V.col(0) = start.normalized();
        int dim = p;
        for (int j = 0; j < p; ++j) {
            Eigen::VectorXd w = lu.solve(V.col(j));
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
                w -= V.leftCols(j + 1) * h;
                H.col(j).head(j + 1) += h;
            }
            const double beta = w.norm();
            H(j + 1, j) = beta;
            if (beta <= 1e-14 * H.col(j).head(j + 1).norm()) {
                dim = j + 1;  // invariant subspace found
                break;
            }
            V.col(j + 1) = w / beta;
        }
        if (dim < m) {
            for (Eigen::Index i = 0; i < N; ++i) start[i] = uni(rng);
            continue;
        }

        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(dim, dim), true);
        const Eigen::VectorXcd theta = es.eigenvalues();
        std::vector<int> order(dim);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int i, int j) { return std::abs(theta[i]) > std::abs(theta[j]); });

        const double hnext = dim < p ? 0.0 : std::abs(H(p, p - 1));
        worst = 0.0;
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXcd y = es.eigenvectors().col(order[i]);
            y.normalize();
            const double res = hnext * std::abs(y[dim - 1]);
            worst = std::max(worst, res / std::abs(theta[order[i]]));
        }
        // a conjugate pair straddling the cut-off is harmless; its partner is converged with it

        if (worst <= opt.tol || restart == opt.max_restarts) {
            if (worst > opt.tol)
                throw ConvergenceError("shift-invert Arnoldi did not converge; worst relative Ritz residual " +
                                           std::to_string(worst),
                                       restart, worst);
            out.restarts = restart;
            for (int i = 0; i < m; ++i) out.values.push_back(shift + 1.0 / theta[order[i]]);
            if (want_vectors) {
                out.vectors.resize(N, m);
                for (int i = 0; i < m; ++i) {
                    Eigen::VectorXcd y = es.eigenvectors().col(order[i]);
                    Eigen::VectorXcd v = V.leftCols(dim).cast<std::complex<double>>() * y;
                    normalize_phase(v);
                    out.vectors.col(i) = v;
                }
            }
            std::vector<int> perm(m);
            std::iota(perm.begin(), perm.end(), 0);
            std::stable_sort(perm.begin(), perm.end(),
                             [&](int i, int j) { return std::abs(out.values[i]) < std::abs(out.values[j]); });
            std::vector<std::complex<double>> vals(m);
            Eigen::MatrixXcd vecs(want_vectors ? N : 0, want_vectors ? m : 0);
            for (int i = 0; i < m; ++i) {
                vals[i] = out.values[perm[i]];
                if (want_vectors) vecs.col(i) = out.vectors.col(perm[i]);
            }
            out.values = std::move(vals);
            out.vectors = std::move(vecs);
            return out;
        }

        // restart from the wanted Ritz directions
        Eigen::VectorXd next = Eigen::VectorXd::Zero(N);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXcd y = es.eigenvectors().col(order[i]);
            next += (V.leftCols(dim) * y.real()) + 0.5 * (V.leftCols(dim) * y.imag());
        }
        start = next;
    }
    throw ConvergenceError("shift-invert Arnoldi failed", opt.max_restarts, worst);
}

} // namespace llcomb
