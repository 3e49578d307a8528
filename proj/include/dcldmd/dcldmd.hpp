#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dcldmd/kernels.hpp"
#include "dcldmd/simulate.hpp"
#include "dcldmd/snapshots.hpp"

namespace dcldmd {

struct DcldmdConfig {
    Kernel kernel;
    double epsilon = 0.0;  // Gram regularization, added to both Gram diagonals
    FeedbackLaw feedback;  // the law whose closed-loop response is predicted
};

/// The four kernel matrices of the finite-rank construction plus the
/// assembled operator proxy. Gt and Gv are symmetric.
struct OperatorMatrices {
    Eigen::MatrixXd Gt;     // scalar Gram, (i,j) = k(x_i, x_j)
    Eigen::MatrixXd It;     // scalar interaction, (i,k) = k(y_k, x_i)
    Eigen::MatrixXd Gv;     // vvRKHS Gram, (i,j) = k(x_j, x_i) (1 + u_i'u_j)
    Eigen::MatrixXd Iv;     // feedback interaction, (j,i) = k(x_i, x_j) (1 + u_i'mu(x_j))
    Eigen::MatrixXd A_hat;  // (Gt + eps I)^-1 Iv (Gv + eps I)^-1 It'
};

Eigen::MatrixXd build_gram_tilde(const Kernel& kernel, const SnapshotSet& s);
Eigen::MatrixXd build_interaction_tilde(const Kernel& kernel, const SnapshotSet& s);
Eigen::MatrixXd build_gram_vv(const Kernel& kernel, const SnapshotSet& s);
Eigen::MatrixXd build_interaction_vv(const Kernel& kernel, const SnapshotSet& s,
                                     const FeedbackLaw& mu);

/// How the two regularized Gram solves treat rank deficiency.
/// MinimumNorm solves in the least-squares sense, which is the correct
/// semantics for kernels with a finite-dimensional RKHS (Linear), whose
/// Grams are rank-deficient by nature once M exceeds the state dimension.
/// RequireFullRank rejects a numerically singular regularized Gram, the
/// right behavior for strictly positive-definite kernels where singularity
/// signals duplicate centers or insufficient regularization.
enum class GramSolvePolicy { MinimumNorm, RequireFullRank };

/// (Gt + eps I)^-1 Iv (Gv + eps I)^-1 It', realized as factorization-based
/// solves; matrices are never inverted explicitly.
Eigen::MatrixXd assemble_proxy(const Eigen::MatrixXd& Gt, const Eigen::MatrixXd& It,
                               const Eigen::MatrixXd& Gv, const Eigen::MatrixXd& Iv,
                               double epsilon,
                               GramSolvePolicy policy = GramSolvePolicy::MinimumNorm);

struct Eigensystem {
    Eigen::VectorXcd lambdas;  // descending |lambda|, ties by Re then Im, both descending
    Eigen::MatrixXcd V;        // columns are eigenvectors, rescaled so v' Gt v = 1
    std::vector<bool> degenerate_normalizer;  // true where v' Gt v was too small to rescale
};

/// Full complex eigendecomposition of the proxy with deterministic ordering.
/// Each eigenvector is rescaled by the principal square root of the bilinear
/// normalizer v' Gt v (no conjugation); vectors whose normalizer magnitude
/// falls below 1e-12 are left at unit Euclidean norm and flagged.
Eigensystem eigendecompose(const Eigen::MatrixXd& proxy, const Eigen::MatrixXd& Gt);

/// Liouville modes Xi = X (V' Gt)^-1 via a linear solve. Throws if the
/// system is inconsistent (reconstruction residual above 1e-8 ||X||),
/// which indicates a rank-deficient V' Gt.
Eigen::MatrixXcd liouville_modes(const Eigen::MatrixXd& X, const Eigen::MatrixXcd& V,
                                 const Eigen::MatrixXd& Gt);

/// Everything needed to evaluate eigenfunctions and roll out predictions.
struct DcldmdModel {
    Eigen::VectorXcd lambdas;
    Eigen::MatrixXcd V;        // normalized eigenvectors
    Eigen::MatrixXcd Xi;       // n x M Liouville modes
    Eigen::MatrixXd centers;   // n x M data states x_k
    Kernel kernel;
    double epsilon = 0.0;
    Eigen::MatrixXd feedback_K;  // m x n when the fitted law was linear, else empty
    std::vector<bool> degenerate_normalizer;

    Eigen::Index state_dim() const { return centers.rows(); }
    Eigen::Index rank() const { return lambdas.size(); }
};

/// Component j = sum_i (v_j)_i k(x, x_i).
Eigen::VectorXcd eval_eigenfunctions(const DcldmdModel& model, const VectorRef& x);

struct Prediction {
    std::vector<Eigen::VectorXd> states;  // x_0 .. x_steps (fewer when diverged)
    bool diverged = false;

    Eigen::MatrixXd matrix() const;  // n x states
};

/// Indirect reconstruction: iterate x <- Re(Xi diag(lambda) phi(x)).
Prediction predict_indirect(const DcldmdModel& model, const Eigen::VectorXd& x0, int steps,
                            double divergence_bound = 1e6);

/// Direct reconstruction: x_k = Re(Xi diag(lambda)^k phi(x0)); x_0 is
/// reported as given. The two reconstructions coincide for k <= 1.
Prediction predict_direct(const DcldmdModel& model, const Eigen::VectorXd& x0, int steps,
                          double divergence_bound = 1e6);

/// Kernel matrices, proxy assembly, eigendecomposition, and Liouville
/// modes, in order. The solve policy follows the kernel: MinimumNorm for
/// Linear, RequireFullRank for the strictly positive-definite kinds.
OperatorMatrices build_operator_matrices(const SnapshotSet& s, const DcldmdConfig& config);
DcldmdModel fit(const SnapshotSet& s, const DcldmdConfig& config);

/// Control-induced deviation of the interaction matrix: for each snapshot k,
/// max_i |k(y_k, x_i) - k(f_k, x_i)| where f_k = drift_images.col(k) is the
/// zero-input one-step image of x_k. Zero when all inputs are zero.
Eigen::VectorXd linearization_residual(const Kernel& kernel, const SnapshotSet& s,
                                       const Eigen::MatrixXd& drift_images);

}  // namespace dcldmd
