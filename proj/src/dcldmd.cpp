#include "dcldmd/dcldmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dcldmd/numerics.hpp"

namespace dcldmd {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Complex = std::complex<double>;

void require_valid(const SnapshotSet& s, const char* where) {
    const ValidationReport report = validate(s);
    if (!report.ok()) {
        throw std::invalid_argument(std::string(where) + ": invalid snapshot set: " +
                                    report.to_string());
    }
}

// Augmented input columns (1, u_k')'.
MatrixXd augmented_inputs(const SnapshotSet& s) {
    MatrixXd A(s.input_dim() + 1, s.count());
    A.row(0).setOnes();
    A.bottomRows(s.input_dim()) = s.U;
    return A;
}

// Min-norm least-squares solve; optionally rejects rank-deficient systems.
MatrixXd gram_solve(const MatrixXd& A, const MatrixXd& B, GramSolvePolicy policy,
                    const char* label) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
    if (policy == GramSolvePolicy::RequireFullRank && cod.rank() < A.rows()) {
        throw std::runtime_error(std::string("assemble_proxy: regularized Gram matrix ") + label +
                                 " is numerically singular (rank " + std::to_string(cod.rank()) +
                                 " of " + std::to_string(A.rows()) +
                                 "); increase epsilon or remove duplicate centers");
    }
    return cod.solve(B);
}

// Bilinear product v' G w for complex v, w and real symmetric G, without
// forming a complex copy of G.
Complex bilinear(const VectorXcd& v, const MatrixXd& G, const VectorXcd& w) {
    const VectorXd Gwr = G * w.real();
    const VectorXd Gwi = G * w.imag();
    const double re = v.real().dot(Gwr) - v.imag().dot(Gwi);
    const double im = v.real().dot(Gwi) + v.imag().dot(Gwr);
    return {re, im};
}

}  // namespace

Eigen::MatrixXd build_gram_tilde(const Kernel& kernel, const SnapshotSet& s) {
    require_valid(s, "build_gram_tilde");
    const Index M = s.count();
    MatrixXd G(M, M);
    for (Index j = 0; j < M; ++j) {
        for (Index i = 0; i <= j; ++i) {
            const double v = eval(kernel, s.X.col(i), s.X.col(j));
            G(i, j) = v;
            G(j, i) = v;
        }
    }
    return G;
}

Eigen::MatrixXd build_interaction_tilde(const Kernel& kernel, const SnapshotSet& s) {
    require_valid(s, "build_interaction_tilde");
    const Index M = s.count();
    MatrixXd I(M, M);
    for (Index k = 0; k < M; ++k) {
        for (Index i = 0; i < M; ++i) {
            I(i, k) = eval(kernel, s.Y.col(k), s.X.col(i));
        }
    }
    return I;
}

Eigen::MatrixXd build_gram_vv(const Kernel& kernel, const SnapshotSet& s) {
    require_valid(s, "build_gram_vv");
    const Index M = s.count();
    const MatrixXd A = augmented_inputs(s);
    MatrixXd G(M, M);
    for (Index j = 0; j < M; ++j) {
        for (Index i = 0; i <= j; ++i) {
            const double v = vv_inner(kernel, s.X.col(i), A.col(i), s.X.col(j), A.col(j));
            G(i, j) = v;
            G(j, i) = v;
        }
    }
    return G;
}

Eigen::MatrixXd build_interaction_vv(const Kernel& kernel, const SnapshotSet& s,
                                     const FeedbackLaw& mu) {
    require_valid(s, "build_interaction_vv");
    if (mu.input_dim() != s.input_dim()) {
        throw std::invalid_argument("build_interaction_vv: feedback output dimension " +
                                    std::to_string(mu.input_dim()) + " does not match input dimension " +
                                    std::to_string(s.input_dim()));
    }
    const Index M = s.count();
    const MatrixXd A = augmented_inputs(s);

    // Feedback-augmented columns (1, mu(x_j)')'.
    MatrixXd B(s.input_dim() + 1, M);
    B.row(0).setOnes();
    for (Index j = 0; j < M; ++j) {
        const VectorXd u = mu(s.X.col(j));
        if (u.size() != s.input_dim()) {
            throw std::invalid_argument("build_interaction_vv: feedback returned dimension " +
                                        std::to_string(u.size()));
        }
        B.col(j).tail(s.input_dim()) = u;
    }

    MatrixXd I(M, M);
    for (Index j = 0; j < M; ++j) {
        for (Index i = 0; i < M; ++i) {
            I(j, i) = vv_inner(kernel, s.X.col(j), B.col(j), s.X.col(i), A.col(i));
        }
    }
    return I;
}

Eigen::MatrixXd assemble_proxy(const Eigen::MatrixXd& Gt, const Eigen::MatrixXd& It,
                               const Eigen::MatrixXd& Gv, const Eigen::MatrixXd& Iv,
                               double epsilon, GramSolvePolicy policy) {
    const Index M = Gt.rows();
    if (Gt.cols() != M || It.rows() != M || It.cols() != M || Gv.rows() != M || Gv.cols() != M ||
        Iv.rows() != M || Iv.cols() != M) {
        throw std::invalid_argument("assemble_proxy: all matrices must be M x M");
    }
    if (epsilon < 0.0) throw std::invalid_argument("assemble_proxy: epsilon must be >= 0");

    const MatrixXd reg = epsilon * MatrixXd::Identity(M, M);
    const MatrixXd inner = gram_solve(Gv + reg, It.transpose(), policy, "G");
    return gram_solve(Gt + reg, Iv * inner, policy, "G~");
}

Eigensystem eigendecompose(const Eigen::MatrixXd& proxy, const Eigen::MatrixXd& Gt) {
    if (proxy.rows() != proxy.cols()) {
        throw std::invalid_argument("eigendecompose: proxy must be square");
    }
    if (Gt.rows() != proxy.rows() || Gt.cols() != proxy.cols()) {
        throw std::invalid_argument("eigendecompose: Gt must match the proxy dimensions");
    }

    Eigen::EigenSolver<MatrixXd> solver(proxy, true);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigendecompose: eigensolver did not converge");
    }
    const VectorXcd raw_lambdas = solver.eigenvalues();
    const MatrixXcd raw_V = solver.eigenvectors();
    const Index M = raw_lambdas.size();

    std::vector<Index> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&raw_lambdas](Index a, Index b) {
        const Complex la = raw_lambdas(a), lb = raw_lambdas(b);
        const double ma = std::abs(la), mb = std::abs(lb);
        if (ma != mb) return ma > mb;
        if (la.real() != lb.real()) return la.real() > lb.real();
        return la.imag() > lb.imag();
    });

    const MatrixXd Gt_abs = Gt.cwiseAbs();
    constexpr double eps = std::numeric_limits<double>::epsilon();

    Eigensystem out;
    out.lambdas.resize(M);
    out.V.resize(M, M);
    out.degenerate_normalizer.assign(static_cast<std::size_t>(M), false);
    for (Index j = 0; j < M; ++j) {
        out.lambdas(j) = raw_lambdas(order[static_cast<std::size_t>(j)]);
        VectorXcd v = raw_V.col(order[static_cast<std::size_t>(j)]);
        Complex normalizer = bilinear(v, Gt, v);
        // The form cancels heavily for near-null eigenvectors; fall back to
        // a compensated evaluation when the plain one cannot resolve the
        // normalizer to the accuracy the rescaling needs.
        const VectorXd mag = v.real().cwiseAbs() + v.imag().cwiseAbs();
        const double cancellation_scale = mag.dot(Gt_abs * mag);
        if (std::abs(normalizer) < 1e11 * eps * cancellation_scale) {
            normalizer = compensated_bilinear(v, Gt, v);
        }
        if (std::abs(normalizer) < 1e-12) {
            out.degenerate_normalizer[static_cast<std::size_t>(j)] = true;
        } else {
            v /= std::sqrt(normalizer);
        }
        // Sign convention: the first significant component points into the
        // right (or upper, when purely imaginary) half-plane. A +-1 flip
        // leaves the bilinear normalization intact.
        const double peak = v.cwiseAbs().maxCoeff();
        for (Index i = 0; i < M; ++i) {
            if (std::abs(v(i)) > 1e-12 * peak) {
                if (v(i).real() < 0.0 || (v(i).real() == 0.0 && v(i).imag() < 0.0)) v = -v;
                break;
            }
        }
        out.V.col(j) = v;
    }

    // Conjugate pairs must be exact down to the last bit so the modes and
    // the real-part reconstructions cancel their imaginary parts cleanly.
    std::vector<bool> matched(static_cast<std::size_t>(M), false);
    for (Index j = 0; j < M; ++j) {
        if (matched[static_cast<std::size_t>(j)] || !(out.lambdas(j).imag() > 0.0)) continue;
        for (Index k = 0; k < M; ++k) {
            if (k == j || matched[static_cast<std::size_t>(k)]) continue;
            if (out.lambdas(k) == std::conj(out.lambdas(j))) {
                out.V.col(k) = out.V.col(j).conjugate();
                out.degenerate_normalizer[static_cast<std::size_t>(k)] =
                    out.degenerate_normalizer[static_cast<std::size_t>(j)];
                matched[static_cast<std::size_t>(j)] = true;
                matched[static_cast<std::size_t>(k)] = true;
                break;
            }
        }
    }
    return out;
}

namespace {

// Pairing layout of the eigenvector columns: each column is either real,
// the positive-imaginary member of an exact conjugate pair, or that pair's
// mirror. Empty when V has no such structure.
struct ConjugateLayout {
    std::vector<Index> partner;  // partner[j] = j (real), k (paired), or -1
    bool valid = false;
};

ConjugateLayout scan_conjugate_layout(const MatrixXcd& V) {
    const Index M = V.cols();
    ConjugateLayout layout;
    layout.partner.assign(static_cast<std::size_t>(M), -1);
    for (Index j = 0; j < M; ++j) {
        if (layout.partner[static_cast<std::size_t>(j)] != -1) continue;
        if ((V.col(j).imag().array() == 0.0).all()) {
            layout.partner[static_cast<std::size_t>(j)] = j;
            continue;
        }
        for (Index k = j + 1; k < M; ++k) {
            if (layout.partner[static_cast<std::size_t>(k)] == -1 &&
                V.col(k) == V.col(j).conjugate()) {
                layout.partner[static_cast<std::size_t>(j)] = k;
                layout.partner[static_cast<std::size_t>(k)] = j;
                break;
            }
        }
        if (layout.partner[static_cast<std::size_t>(j)] == -1) return layout;  // unmatched
    }
    layout.valid = true;
    return layout;
}

}  // namespace

Eigen::MatrixXcd liouville_modes(const Eigen::MatrixXd& X, const Eigen::MatrixXcd& V,
                                 const Eigen::MatrixXd& Gt) {
    const Index M = V.rows();
    if (V.cols() != M || Gt.rows() != M || Gt.cols() != M || X.cols() != M) {
        throw std::invalid_argument("liouville_modes: dimension mismatch");
    }
    const Index n = X.rows();

    MatrixXcd Xi(n, M);
    double residual = 0.0;

    const ConjugateLayout layout = scan_conjugate_layout(V);
    if (layout.valid) {
        // Conjugate-symmetric V: substitute the real basis
        // (Re v, Im v) per pair so the solved modes pair exactly and the
        // real-part reconstructions stay real to rounding.
        MatrixXd W(M, M);
        for (Index j = 0; j < M; ++j) {
            const Index k = layout.partner[static_cast<std::size_t>(j)];
            if (k == j) {
                W.col(j) = V.col(j).real();
            } else if (j < k) {
                W.col(j) = V.col(j).real();
                W.col(k) = V.col(j).imag();
            }
        }
        const MatrixXd T = (Gt * W).transpose();  // W' Gt, Gt symmetric

        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(T.transpose());
        const MatrixXd Theta = cod.solve(X.transpose()).transpose();
        residual = (Theta * T - X).norm();

        for (Index j = 0; j < M; ++j) {
            const Index k = layout.partner[static_cast<std::size_t>(j)];
            if (k == j) {
                Xi.col(j) = Theta.col(j).cast<Complex>();
            } else if (j < k) {
                Xi.col(j).real() = 0.5 * Theta.col(j);
                Xi.col(j).imag() = -0.5 * Theta.col(k);
                Xi.col(k) = Xi.col(j).conjugate();
            }
        }
    } else {
        // General complex V.
        MatrixXcd T(M, M);
        T.real() = (Gt * V.real()).transpose();
        T.imag() = (Gt * V.imag()).transpose();
        Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(T.transpose());
        Xi = cod.solve(X.transpose().cast<Complex>()).transpose();
        residual = (Xi * T - X.cast<Complex>()).norm();
    }

    if (residual > 1e-8 * X.norm()) {
        throw std::runtime_error(
            "liouville_modes: V' G~ is rank-deficient (reconstruction residual " +
            std::to_string(residual) + "); inspect the eigenvector rank or increase epsilon");
    }
    return Xi;
}

Eigen::VectorXcd eval_eigenfunctions(const DcldmdModel& model, const VectorRef& x) {
    const Index M = model.centers.cols();
    VectorXd kvec(M);
    for (Index i = 0; i < M; ++i) {
        kvec(i) = eval(model.kernel, x, model.centers.col(i));
    }
    VectorXcd phi(M);
    phi.real() = model.V.real().transpose() * kvec;
    phi.imag() = model.V.imag().transpose() * kvec;
    return phi;
}

Eigen::MatrixXd Prediction::matrix() const {
    if (states.empty()) return {};
    Eigen::MatrixXd out(states.front().size(), static_cast<Index>(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) {
        out.col(static_cast<Index>(k)) = states[k];
    }
    return out;
}

namespace {

bool guard(const VectorXd& x, double bound) { return x.allFinite() && x.norm() <= bound; }

}  // namespace

Prediction predict_indirect(const DcldmdModel& model, const Eigen::VectorXd& x0, int steps,
                            double divergence_bound) {
    if (steps < 0) throw std::invalid_argument("predict_indirect: steps must be >= 0");
    Prediction out;
    out.states.push_back(x0);
    VectorXd x = x0;
    for (int k = 1; k <= steps; ++k) {
        const VectorXcd phi = eval_eigenfunctions(model, x);
        const VectorXd next = (model.Xi * model.lambdas.cwiseProduct(phi)).real();
        if (!guard(next, divergence_bound)) {
            out.diverged = true;
            break;
        }
        out.states.push_back(next);
        x = next;
    }
    return out;
}

Prediction predict_direct(const DcldmdModel& model, const Eigen::VectorXd& x0, int steps,
                          double divergence_bound) {
    if (steps < 0) throw std::invalid_argument("predict_direct: steps must be >= 0");
    Prediction out;
    out.states.push_back(x0);
    if (steps == 0) return out;

    const VectorXcd phi0 = eval_eigenfunctions(model, x0);
    VectorXcd lambda_pow = model.lambdas;  // lambda^k, starting at k = 1
    for (int k = 1; k <= steps; ++k) {
        const VectorXd xk = (model.Xi * lambda_pow.cwiseProduct(phi0)).real();
        if (!guard(xk, divergence_bound)) {
            out.diverged = true;
            break;
        }
        out.states.push_back(xk);
        lambda_pow = lambda_pow.cwiseProduct(model.lambdas);
    }
    return out;
}

OperatorMatrices build_operator_matrices(const SnapshotSet& s, const DcldmdConfig& config) {
    require_valid(s, "fit");
    if (config.feedback.input_dim() != s.input_dim()) {
        throw std::invalid_argument("fit: feedback output dimension " +
                                    std::to_string(config.feedback.input_dim()) +
                                    " does not match input dimension " +
                                    std::to_string(s.input_dim()));
    }

    OperatorMatrices mats;
    mats.Gt = build_gram_tilde(config.kernel, s);
    mats.It = build_interaction_tilde(config.kernel, s);
    mats.Gv = build_gram_vv(config.kernel, s);
    mats.Iv = build_interaction_vv(config.kernel, s, config.feedback);
    const GramSolvePolicy policy = config.kernel.kind == KernelKind::Linear
                                       ? GramSolvePolicy::MinimumNorm
                                       : GramSolvePolicy::RequireFullRank;
    mats.A_hat = assemble_proxy(mats.Gt, mats.It, mats.Gv, mats.Iv, config.epsilon, policy);
    return mats;
}

DcldmdModel fit(const SnapshotSet& s, const DcldmdConfig& config) {
    const OperatorMatrices mats = build_operator_matrices(s, config);
    Eigensystem eig = eigendecompose(mats.A_hat, mats.Gt);

    DcldmdModel model;
    model.lambdas = std::move(eig.lambdas);
    model.V = std::move(eig.V);
    model.Xi = liouville_modes(s.X, model.V, mats.Gt);
    model.centers = s.X;
    model.kernel = config.kernel;
    model.epsilon = config.epsilon;
    if (config.feedback.kind == FeedbackLaw::Kind::Linear) {
        model.feedback_K = config.feedback.K;
    }
    model.degenerate_normalizer = std::move(eig.degenerate_normalizer);
    return model;
}

Eigen::VectorXd linearization_residual(const Kernel& kernel, const SnapshotSet& s,
                                       const Eigen::MatrixXd& drift_images) {
    require_valid(s, "linearization_residual");
    if (drift_images.rows() != s.state_dim() || drift_images.cols() != s.count()) {
        throw std::invalid_argument("linearization_residual: drift_images must be n x M");
    }
    const Index M = s.count();
    VectorXd residual(M);
    for (Index k = 0; k < M; ++k) {
        double worst = 0.0;
        for (Index i = 0; i < M; ++i) {
            const double from_data = eval(kernel, s.Y.col(k), s.X.col(i));
            const double drift_only = eval(kernel, drift_images.col(k), s.X.col(i));
            worst = std::max(worst, std::abs(from_data - drift_only));
        }
        residual(k) = worst;
    }
    return residual;
}

}  // namespace dcldmd
