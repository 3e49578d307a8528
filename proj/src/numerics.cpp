#include "dcldmd/numerics.hpp"

#include <cmath>

namespace dcldmd {

namespace {

struct Accumulator {
    double sum = 0.0;
    double err = 0.0;

    // Neumaier two-sum.
    void add(double value) {
        const double t = sum + value;
        if (std::abs(sum) >= std::abs(value)) {
            err += (sum - t) + value;
        } else {
            err += (value - t) + sum;
        }
        sum = t;
    }

    double total() const { return sum + err; }
};

// a*b = hi + lo exactly (fma split).
inline void two_prod(double a, double b, double& hi, double& lo) {
    hi = a * b;
    lo = std::fma(a, b, -hi);
}

}  // namespace

double compensated_bilinear(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& G,
                            const Eigen::Ref<const Eigen::VectorXd>& y) {
    Accumulator acc;
    const Eigen::Index rows = G.rows(), cols = G.cols();
    for (Eigen::Index j = 0; j < cols; ++j) {
        const double yj = y(j);
        if (yj == 0.0) continue;
        for (Eigen::Index i = 0; i < rows; ++i) {
            double hi1, lo1, hi2, lo2;
            two_prod(x(i), G(i, j), hi1, lo1);
            two_prod(hi1, yj, hi2, lo2);
            acc.add(hi2);
            acc.add(lo2);
            acc.add(lo1 * yj);
        }
    }
    return acc.total();
}

std::complex<double> compensated_bilinear(const Eigen::VectorXcd& v, const Eigen::MatrixXd& G,
                                          const Eigen::VectorXcd& w) {
    using Ref = Eigen::Ref<const Eigen::VectorXd>;
    const Eigen::VectorXd vr = v.real(), vi = v.imag();
    const Eigen::VectorXd wr = w.real(), wi = w.imag();
    const double rr = compensated_bilinear(Ref(vr), G, Ref(wr));
    const double ii = compensated_bilinear(Ref(vi), G, Ref(wi));
    const double ri = compensated_bilinear(Ref(vr), G, Ref(wi));
    const double ir = compensated_bilinear(Ref(vi), G, Ref(wr));
    return {rr - ii, ri + ir};
}

}  // namespace dcldmd
