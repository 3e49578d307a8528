#include "dcldmd/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcldmd {

const char* kernel_kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::ExponentialDotProduct: return "expdot";
        case KernelKind::Linear: return "linear";
    }
    return "unknown";
}

namespace {

void check_pair(const Kernel& kernel, const VectorRef& x, const VectorRef& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel eval: dimension mismatch (" + std::to_string(x.size()) +
                                    " vs " + std::to_string(y.size()) + ")");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw std::invalid_argument("kernel eval: non-finite input coordinates");
    }
    if (kernel.kind != KernelKind::Linear && !(kernel.sigma > 0.0)) {
        throw std::invalid_argument("kernel eval: sigma must be positive");
    }
}

double eval_unchecked(const Kernel& kernel, const VectorRef& x, const VectorRef& y) {
    switch (kernel.kind) {
        case KernelKind::Gaussian:
            return std::exp(-(x - y).squaredNorm() / kernel.sigma);
        case KernelKind::ExponentialDotProduct:
            return std::exp(x.dot(y) / kernel.sigma);
        case KernelKind::Linear:
            return x.dot(y);
    }
    throw std::logic_error("kernel eval: unknown kind");
}

}  // namespace

double eval(const Kernel& kernel, const VectorRef& x, const VectorRef& y) {
    check_pair(kernel, x, y);
    return eval_unchecked(kernel, x, y);
}

Eigen::MatrixXd gram(const Kernel& kernel, const MatrixRef& A, const MatrixRef& B) {
    if (A.cols() == 0 || B.cols() == 0) {
        throw std::invalid_argument("gram: point lists must be non-empty");
    }
    if (A.rows() != B.rows()) {
        throw std::invalid_argument("gram: point dimension mismatch");
    }
    check_pair(kernel, A.col(0), B.col(0));
    if (!A.allFinite() || !B.allFinite()) {
        throw std::invalid_argument("gram: non-finite input coordinates");
    }

    Eigen::MatrixXd G(A.cols(), B.cols());
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
        for (Eigen::Index i = 0; i < A.cols(); ++i) {
            G(i, j) = eval_unchecked(kernel, A.col(i), B.col(j));
        }
    }
    return G;
}

double vv_inner(const Kernel& kernel, const VectorRef& x_i, const VectorRef& a,
                const VectorRef& x_j, const VectorRef& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("vv_inner: augmented control vectors differ in length");
    }
    check_pair(kernel, x_i, x_j);
    return eval_unchecked(kernel, x_j, x_i) * a.dot(b);
}

}  // namespace dcldmd
