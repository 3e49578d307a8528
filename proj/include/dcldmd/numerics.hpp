#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dcldmd {

/// Bilinear form x' G y evaluated with compensated products and sums
/// (Ogita-Rump-Oishi style): the result keeps near-full relative accuracy
/// even when the form cancels heavily, where a plain evaluation only
/// achieves eps * sum|x_i G_ij y_j| absolute accuracy.
double compensated_bilinear(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& G,
                            const Eigen::Ref<const Eigen::VectorXd>& y);

/// Complex bilinear (non-conjugating) form v' G w for real symmetric G.
std::complex<double> compensated_bilinear(const Eigen::VectorXcd& v, const Eigen::MatrixXd& G,
                                          const Eigen::VectorXcd& w);

}  // namespace dcldmd
