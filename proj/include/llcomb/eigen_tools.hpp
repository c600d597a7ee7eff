#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace llcomb {

struct ArnoldiOptions {
    int krylov_dim = 0;      ///< 0 selects max(3m + 10, 40)
    int max_restarts = 30;
    double tol = 1e-11;      ///< relative residual of Ritz pairs of the inverse
    unsigned seed = 12345;
};

struct SmallEigenpairs {
    std::vector<std::complex<double>> values;  ///< sorted by magnitude
    Eigen::MatrixXcd vectors;
    int restarts = 0;
    double shift = 0.0;
};

/// The m eigenvalues of the dense matrix A closest to zero, by shift-invert
/// Arnoldi with explicit restarts and full reorthogonalization.
/// Throws ConvergenceError when the Ritz pairs do not settle. A precomputed LU
/// factorization of A may be passed to skip the factorization.
SmallEigenpairs smallest_eigenpairs(const Eigen::MatrixXd& A, int m, bool want_vectors,
                                    const ArnoldiOptions& opt = {},
                                    const Eigen::PartialPivLU<Eigen::MatrixXd>* factor = nullptr);

/// sign(det A) from an LU factorization.
int determinant_sign(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu);

} // namespace llcomb
