#pragma once

#include <Eigen/Dense>

namespace dcldmd {

enum class KernelKind {
    Gaussian,                // k(x,y) = exp(-||x-y||^2 / sigma)
    ExponentialDotProduct,   // k(x,y) = exp(x'y / sigma)
    Linear,                  // k(x,y) = x'y
};

/// Symmetric positive-definite scalar kernel with a width parameter.
/// The same kernel, replicated on the diagonal of an operator-valued
/// kernel, also defines the vector-valued RKHS inner products used by
/// the DCLDMD matrix constructions (see vv_inner).
struct Kernel {
    KernelKind kind = KernelKind::Gaussian;
    double sigma = 1.0;  // ignored for Linear

    static Kernel gaussian(double sigma) { return {KernelKind::Gaussian, sigma}; }
    static Kernel exp_dot(double sigma) { return {KernelKind::ExponentialDotProduct, sigma}; }
    static Kernel linear() { return {KernelKind::Linear, 1.0}; }
};

const char* kernel_kind_name(KernelKind kind);

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Evaluate k(x, y). Throws std::invalid_argument on dimension mismatch,
/// non-finite coordinates, or sigma <= 0 for the exponential kinds.
double eval(const Kernel& kernel, const VectorRef& x, const VectorRef& y);

/// Pairwise kernel matrix: entry (i, j) = k(A.col(i), B.col(j)).
/// Points are columns. Symmetric when A and B are the same matrix.
Eigen::MatrixXd gram(const Kernel& kernel, const MatrixRef& A, const MatrixRef& B);

/// Inner product of two sections K_{x_i,a}, K_{x_j,b} of the diagonal
/// operator-valued kernel built from `kernel`:
///   <K_{x_i,a}, K_{x_j,b}> = k(x_j, x_i) * (a'b).
/// a and b are control vectors augmented with a leading 1.
double vv_inner(const Kernel& kernel, const VectorRef& x_i, const VectorRef& a,
                const VectorRef& x_j, const VectorRef& b);

}  // namespace dcldmd
