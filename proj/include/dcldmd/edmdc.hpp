#pragma once

#include <Eigen/Dense>

#include "dcldmd/dcldmd.hpp"
#include "dcldmd/simulate.hpp"
#include "dcldmd/snapshots.hpp"

namespace dcldmd {

enum class RbfKind { ThinPlateSpline, Gaussian };

/// Feature map for the lifted linear predictor. StatePlusRbf stacks the
/// state itself above one radial basis value per center; Monomials
/// enumerates all monomials up to a maximum total degree (constant first).
struct LiftingDictionary {
    enum class Kind { StatePlusRbf, Monomials };

    Kind kind = Kind::StatePlusRbf;

    // StatePlusRbf
    Eigen::MatrixXd centers;  // n x N, may have zero columns
    RbfKind rbf = RbfKind::ThinPlateSpline;
    double scale = 1.0;  // Gaussian RBF width (denominator in the exponent)

    // Monomials
    int state_dim = 0;
    int max_degree = 0;

    static LiftingDictionary state_plus_rbf(const Eigen::MatrixXd& centers,
                                            RbfKind rbf = RbfKind::ThinPlateSpline,
                                            double scale = 1.0);
    static LiftingDictionary monomials(int state_dim, int max_degree);

    Eigen::Index input_dim() const;
    Eigen::Index lifted_dim() const;
    bool embeds_state() const { return kind == Kind::StatePlusRbf; }
    Eigen::VectorXd lift(const VectorRef& x) const;
};

/// Lifted linear predictor z+ = A z + B u, x = C z.
struct EdmdcModel {
    Eigen::MatrixXd A;  // N_z x N_z
    Eigen::MatrixXd B;  // N_z x m
    Eigen::MatrixXd C;  // n x N_z
    LiftingDictionary dictionary;
};

/// Least-squares identification of (A, B), ridge-regularized:
/// minimize sum_k ||psi(y_k) - A psi(x_k) - B u_k||^2 + ridge ||[A B]||^2.
/// C is [I 0] for state-embedding dictionaries and regressed otherwise.
/// A rank-deficient regression with ridge = 0 is rejected.
EdmdcModel fit_edmdc(const SnapshotSet& s, const LiftingDictionary& dictionary,
                     double ridge = 1e-10);

/// Closed-loop rollout z0 = psi(x0), z_{k+1} = A z_k + B mu(C z_k),
/// reporting x_k = C z_k. Divergence truncates with a flag.
Prediction rollout_edmdc(const EdmdcModel& model, const FeedbackLaw& mu, const Eigen::VectorXd& x0,
                         int steps, double divergence_bound = 1e6);

}  // namespace dcldmd
