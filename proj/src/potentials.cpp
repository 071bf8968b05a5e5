#include "mfoe/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfoe/errors.hpp"
#include "mfoe/projections.hpp"

namespace mfoe {

namespace {

constexpr double kMuFloor = 1e-9;
constexpr double kTauSlack = 1e-6;
// tolerance for re-checking constraints that were enforced in floating point
constexpr double kCheckTol = 1e-9;

double max_abs_row_sum(const Eigen::MatrixXd& Q) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) m = std::max(m, Q.row(i).cwiseAbs().sum());
    return m;
}

} // namespace

std::string to_string(NormKind k) { return k == NormKind::linf ? "linf" : "l2"; }

NormKind norm_kind_from_string(const std::string& s) {
    if (s == "linf") return NormKind::linf;
    if (s == "l2") return NormKind::l2;
    throw ConfigError("unknown norm_kind: \"" + s + "\" (expected \"linf\" or \"l2\")");
}

double spectral_norm(const Eigen::MatrixXd& Q) {
    if (Q.size() == 0) return 0.0;
    // Exact symmetric eigendecomposition of Q^T Q. The groups stay small
    // (d <= 60) and this runs at construction only; an iterative estimate here
    // can stall on a non-top eigenvector and silently understate the norm,
    // which would break the strict tau > ||Q||_2^2 requirement.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.transpose() * Q);
    const double lambda = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(lambda, 0.0));
}

double moreau_linf(std::span<const double> x, double mu, std::span<double> grad) {
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::domain_error("moreau_linf: mu must be positive and finite");
    const std::size_t d = x.size();
    std::vector<double> scaled(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("moreau_linf: non-finite input");
        scaled[i] = x[i] / mu;
    }
    project_l1_ball(scaled, 1.0, grad);
    double linf = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        linf = std::max(linf, std::abs(x[i] - mu * grad[i]));
        sq += grad[i] * grad[i];
    }
    return linf + 0.5 * mu * sq;
}

double moreau_l2(std::span<const double> x, double mu, std::span<double> grad) {
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::domain_error("moreau_l2: mu must be positive and finite");
    const std::size_t d = x.size();
    std::vector<double> scaled(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("moreau_l2: non-finite input");
        scaled[i] = x[i] / mu;
    }
    project_l2_ball(scaled, 1.0, grad);
    double sq = 0.0, res = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double r = x[i] - mu * grad[i];
        res += r * r;
        sq += grad[i] * grad[i];
    }
    return std::sqrt(res) + 0.5 * mu * sq;
}

MoreauResult moreau_linf(std::span<const double> x, double mu) {
    MoreauResult r;
    r.grad.resize(x.size());
    r.value = moreau_linf(x, mu, r.grad);
    return r;
}

MoreauResult moreau_l2(std::span<const double> x, double mu) {
    MoreauResult r;
    r.grad.resize(x.size());
    r.value = moreau_l2(x, mu, r.grad);
    return r;
}

namespace {

// scalar Moreau envelope of |t| (Huber) and its gradient clamp(t/mu)
inline double huber(double t, double mu) {
    const double a = std::abs(t);
    return a <= mu ? t * t / (2.0 * mu) : a - 0.5 * mu;
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

} // namespace

WcrrResult wcrr_univariate(double t, double mu, double nu, double lambda) {
    if (!(mu > 0.0) || !(nu > 0.0) || !(lambda > 0.0))
        throw std::domain_error("wcrr_univariate: mu, nu, lambda must be positive");
    if (!(nu > mu)) throw std::domain_error("wcrr_univariate: requires nu > mu");
    if (!std::isfinite(t)) throw std::domain_error("wcrr_univariate: non-finite input");
    WcrrResult r;
    r.value = lambda * (huber(t, mu) - huber(t, nu));
    r.derivative = lambda * (clamp_unit(t / mu) - clamp_unit(t / nu));
    return r;
}

void PsiScratch::resize(int d) {
    scaled.resize(d);
    proj1.resize(d);
    qx.resize(d);
    proj2.resize(d);
}

PotentialGroup::PotentialGroup(Eigen::MatrixXd Q, double tau, double mu, NormKind kind)
    : Q_(std::move(Q)), tau_(tau), mu_(mu), kind_(kind) {
    if (Q_.rows() != Q_.cols() || Q_.rows() < 1)
        throw ConfigError("PotentialGroup: Q must be square with d >= 1");
    if (!Q_.allFinite() || !std::isfinite(tau_) || !std::isfinite(mu_))
        throw ConfigError("PotentialGroup: non-finite parameters");
    if (mu_ < kMuFloor) throw ConfigError("PotentialGroup: mu below the 1e-9 floor");

    q_norm_ = spectral_norm(Q_);
    if (kind_ == NormKind::linf) {
        if (max_abs_row_sum(Q_) > 1.0 + kCheckTol)
            throw ConfigError("PotentialGroup: induced inf-norm of Q exceeds 1");
        if (!(tau_ > q_norm_ * q_norm_))
            throw ConfigError("PotentialGroup: requires tau > ||Q||_2^2");
    } else {
        if (q_norm_ > 1.0 + kCheckTol)
            throw ConfigError("PotentialGroup: spectral norm of Q exceeds 1");
        if (!(tau_ > 1.0)) throw ConfigError("PotentialGroup: requires tau > 1 (l2 kind)");
    }
}

namespace {

// Moreau envelope of the chosen norm at parameter mu; the ball projection of
// v/mu lands in proj.
double envelope(std::span<const double> v, double mu, NormKind kind,
                std::span<double> scaled, std::span<double> proj) {
    const std::size_t d = v.size();
    for (std::size_t i = 0; i < d; ++i) scaled[i] = v[i] / mu;
    if (kind == NormKind::linf) {
        project_l1_ball(scaled, 1.0, proj);
        double linf = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            linf = std::max(linf, std::abs(v[i] - mu * proj[i]));
            sq += proj[i] * proj[i];
        }
        return linf + 0.5 * mu * sq;
    }
    project_l2_ball(scaled, 1.0, proj);
    double res = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double r = v[i] - mu * proj[i];
        res += r * r;
        sq += proj[i] * proj[i];
    }
    return std::sqrt(res) + 0.5 * mu * sq;
}

} // namespace

double PotentialGroup::eval(std::span<const double> x, std::span<double> grad,
                            PsiScratch& ws, double mu) const {
    const int d = dim();
    ws.resize(d);

    const double rho1 = envelope(x, mu, kind_, ws.scaled, ws.proj1);

    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    Eigen::Map<Eigen::VectorXd> qx(ws.qx.data(), d);
    qx = Q_ * xv;
    const double rho2 = envelope(ws.qx, tau_ * mu, kind_, ws.scaled, ws.proj2);

    Eigen::Map<Eigen::VectorXd> g(grad.data(), d);
    Eigen::Map<const Eigen::VectorXd> p2(ws.proj2.data(), d);
    g = Q_.transpose() * p2;
    for (int i = 0; i < d; ++i) grad[i] = mu * (ws.proj1[i] - grad[i]);

    return mu * (rho1 - rho2);
}

PotentialGroup enforce_group_constraints(const Eigen::MatrixXd& Q_raw, double tau_raw,
                                         double mu_raw, NormKind kind) {
    if (!Q_raw.allFinite() || !std::isfinite(tau_raw) || !std::isfinite(mu_raw))
        throw std::domain_error("enforce_group_constraints: non-finite inputs");
    Eigen::MatrixXd Q = Q_raw;
    double tau = tau_raw;
    if (kind == NormKind::linf) {
        for (Eigen::Index i = 0; i < Q.rows(); ++i) {
            const double s = Q.row(i).cwiseAbs().sum();
            if (s > 1.0) Q.row(i) /= s;
        }
        const double sn = spectral_norm(Q);
        tau = std::max(tau_raw, sn * sn + kTauSlack);
    } else {
        const double sn = spectral_norm(Q);
        if (sn > 1.0) Q /= sn;
        tau = std::max(tau_raw, 1.0 + kTauSlack);
    }
    return PotentialGroup(std::move(Q), tau, std::max(mu_raw, kMuFloor), kind);
}

MoreauResult psi_eval(const PotentialGroup& g, std::span<const double> x) {
    MoreauResult r;
    r.grad.resize(x.size());
    PsiScratch ws;
    r.value = g.eval(x, r.grad, ws);
    return r;
}

} // namespace mfoe
