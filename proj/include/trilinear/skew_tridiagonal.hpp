// skew_tridiagonal.hpp — exact exponential of real antisymmetric tridiagonal generators
//
// A generator G with G(j+1,j) = g_j, G(j,j+1) = -g_j and zero diagonal is similar
// to i*T, T the real symmetric tridiagonal matrix with off-diagonal g:
//     G = i D^{-1} T D,   D = diag(i^j),
// so exp(tau G) = D^{-1} V exp(i tau Lambda) V^T D with T = V Lambda V^T.
// The eigendecomposition is done once; every tau afterwards is O(d^2).
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace trilinear {

class SkewTridiagonalExp {
public:
    SkewTridiagonalExp() = default;

    explicit SkewTridiagonalExp(const std::vector<double>& lower) : dim_(static_cast<Eigen::Index>(lower.size()) + 1) {
        if (dim_ == 1) {
            eigenvalues_ = Eigen::VectorXd::Zero(1);
            eigenvectors_ = Eigen::MatrixXd::Identity(1, 1);
            return;
        }
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim_);
        Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(lower.data(), dim_ - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("SkewTridiagonalExp: tridiagonal eigensolver failed");
        }
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    }

    Eigen::Index dim() const { return dim_; }

    // exp(tau G) c
    Eigen::VectorXcd apply(const Eigen::VectorXcd& c, double tau) const {
        if (c.size() != dim_) throw std::invalid_argument("SkewTridiagonalExp::apply: dimension mismatch");
        Eigen::VectorXcd x(dim_);
        for (Eigen::Index j = 0; j < dim_; ++j) x(j) = phase(j) * c(j);
        Eigen::VectorXcd y = eigenvectors_.transpose() * x;
        for (Eigen::Index k = 0; k < dim_; ++k) y(k) *= std::polar(1.0, tau * eigenvalues_(k));
        Eigen::VectorXcd out = eigenvectors_ * y;
        for (Eigen::Index j = 0; j < dim_; ++j) out(j) *= std::conj(phase(j));
        return out;
    }

    // exp(tau G) as a dense matrix; real up to rounding, imaginary parts dropped.
    Eigen::MatrixXd matrix(double tau) const {
        Eigen::MatrixXcd e = eigenvectors_.cast<std::complex<double>>() *
                             Eigen::VectorXcd(
                                 (std::complex<double>(0.0, tau) * eigenvalues_.cast<std::complex<double>>()).array().exp())
                                 .asDiagonal() *
                             eigenvectors_.transpose().cast<std::complex<double>>();
        Eigen::MatrixXd out(dim_, dim_);
        for (Eigen::Index a = 0; a < dim_; ++a)
            for (Eigen::Index b = 0; b < dim_; ++b) out(a, b) = (std::conj(phase(a)) * e(a, b) * phase(b)).real();
        return out;
    }

private:
    static std::complex<double> phase(Eigen::Index j) {
        switch (j % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }

    Eigen::Index dim_ = 0;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

}  // namespace trilinear
