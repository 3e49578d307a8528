#include "dcldmd/edmdc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcldmd {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Number of monomials in n variables with total degree <= d.
Index monomial_count(int n, int d) {
    Index count = 1;
    for (int i = 1; i <= d; ++i) {
        count = count * (n + i) / i;  // running binomial C(n+i, i)
    }
    return count;
}

// Appends all monomial values of exact total degree `deg` in graded
// lexicographic order (x1 exponent outermost).
void append_monomials(const VectorRef& x, int axis, int deg, double prefix, VectorXd& out,
                      Index& pos) {
    if (axis == x.size() - 1) {
        out(pos++) = prefix * std::pow(x(axis), deg);
        return;
    }
    for (int e = deg; e >= 0; --e) {
        append_monomials(x, axis + 1, deg - e, prefix * std::pow(x(axis), e), out, pos);
    }
}

}  // namespace

LiftingDictionary LiftingDictionary::state_plus_rbf(const Eigen::MatrixXd& centers, RbfKind rbf,
                                                    double scale) {
    LiftingDictionary d;
    d.kind = Kind::StatePlusRbf;
    d.centers = centers;
    d.rbf = rbf;
    d.scale = scale;
    d.state_dim = static_cast<int>(centers.rows());
    return d;
}

LiftingDictionary LiftingDictionary::monomials(int state_dim, int max_degree) {
    if (state_dim < 1) throw std::invalid_argument("monomials: state_dim must be >= 1");
    if (max_degree < 0) throw std::invalid_argument("monomials: max_degree must be >= 0");
    LiftingDictionary d;
    d.kind = Kind::Monomials;
    d.state_dim = state_dim;
    d.max_degree = max_degree;
    return d;
}

Eigen::Index LiftingDictionary::input_dim() const {
    return kind == Kind::StatePlusRbf ? centers.rows() : state_dim;
}

Eigen::Index LiftingDictionary::lifted_dim() const {
    if (kind == Kind::StatePlusRbf) return centers.rows() + centers.cols();
    return monomial_count(state_dim, max_degree);
}

Eigen::VectorXd LiftingDictionary::lift(const VectorRef& x) const {
    if (kind == Kind::StatePlusRbf) {
        if (centers.cols() > 0 && x.size() != centers.rows()) {
            throw std::invalid_argument("lift: state dimension mismatch");
        }
        VectorXd z(x.size() + centers.cols());
        z.head(x.size()) = x;
        for (Index c = 0; c < centers.cols(); ++c) {
            const double r2 = (x - centers.col(c)).squaredNorm();
            if (rbf == RbfKind::ThinPlateSpline) {
                // r^2 log r, continued by 0 at r = 0.
                z(x.size() + c) = r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0;
            } else {
                z(x.size() + c) = std::exp(-r2 / scale);
            }
        }
        return z;
    }

    if (x.size() != state_dim) throw std::invalid_argument("lift: state dimension mismatch");
    VectorXd z(lifted_dim());
    Index pos = 0;
    for (int deg = 0; deg <= max_degree; ++deg) {
        append_monomials(x, 0, deg, 1.0, z, pos);
    }
    return z;
}

EdmdcModel fit_edmdc(const SnapshotSet& s, const LiftingDictionary& dictionary, double ridge) {
    const ValidationReport report = validate(s);
    if (!report.ok()) {
        throw std::invalid_argument("fit_edmdc: invalid snapshot set: " + report.to_string());
    }
    if (ridge < 0.0) throw std::invalid_argument("fit_edmdc: ridge must be >= 0");
    if (dictionary.input_dim() != s.state_dim()) {
        throw std::invalid_argument("fit_edmdc: dictionary state dimension mismatch");
    }

    const Index n = s.state_dim();
    const Index m = s.input_dim();
    const Index M = s.count();
    const Index Nz = dictionary.lifted_dim();

    MatrixXd Z(Nz, M), Zp(Nz, M);
    for (Index k = 0; k < M; ++k) {
        Z.col(k) = dictionary.lift(s.X.col(k));
        Zp.col(k) = dictionary.lift(s.Y.col(k));
    }

    MatrixXd W(Nz + m, M);
    W.topRows(Nz) = Z;
    W.bottomRows(m) = s.U;

    // [A B] = Zp W' (W W' + ridge I)^-1, via a symmetric solve.
    const MatrixXd normal = W * W.transpose() + ridge * MatrixXd::Identity(Nz + m, Nz + m);
    MatrixXd AB;
    if (ridge > 0.0) {
        AB = normal.ldlt().solve(W * Zp.transpose()).transpose();
    } else {
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(normal);
        if (cod.rank() < Nz + m) {
            throw std::runtime_error(
                "fit_edmdc: regression is rank-deficient (rank " + std::to_string(cod.rank()) +
                " of " + std::to_string(Nz + m) + "); use ridge > 0");
        }
        AB = cod.solve(W * Zp.transpose()).transpose();
    }

    EdmdcModel model;
    model.A = AB.leftCols(Nz);
    model.B = AB.rightCols(m);
    model.dictionary = dictionary;

    if (dictionary.embeds_state()) {
        model.C = MatrixXd::Zero(n, Nz);
        model.C.leftCols(n).setIdentity();
    } else {
        const MatrixXd state_normal =
            Z * Z.transpose() + ridge * MatrixXd::Identity(Nz, Nz);
        if (ridge > 0.0) {
            model.C = state_normal.ldlt().solve(Z * s.X.transpose()).transpose();
        } else {
            Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(state_normal);
            if (cod.rank() < Nz) {
                throw std::runtime_error("fit_edmdc: state regression is rank-deficient; use ridge > 0");
            }
            model.C = cod.solve(Z * s.X.transpose()).transpose();
        }
    }

    if (!model.A.allFinite() || !model.B.allFinite() || !model.C.allFinite()) {
        throw std::runtime_error("fit_edmdc: regression produced non-finite coefficients");
    }
    return model;
}

Prediction rollout_edmdc(const EdmdcModel& model, const FeedbackLaw& mu, const Eigen::VectorXd& x0,
                         int steps, double divergence_bound) {
    if (steps < 0) throw std::invalid_argument("rollout_edmdc: steps must be >= 0");
    if (mu.input_dim() != model.B.cols()) {
        throw std::invalid_argument("rollout_edmdc: feedback output dimension mismatch");
    }

    Prediction out;
    VectorXd z = model.dictionary.lift(x0);
    for (int k = 0; k <= steps; ++k) {
        const VectorXd x = model.C * z;
        if (!x.allFinite() || x.norm() > divergence_bound) {
            out.diverged = true;
            break;
        }
        out.states.push_back(x);
        if (k < steps) z = model.A * z + model.B * mu(x);
    }
    return out;
}

}  // namespace dcldmd
