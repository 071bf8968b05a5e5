#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace mfoe {

enum class NormKind { linf, l2 };

std::string to_string(NormKind k);
NormKind norm_kind_from_string(const std::string& s);

// Largest singular value of Q, exact (symmetric eigendecomposition of Q^T Q).
double spectral_norm(const Eigen::MatrixXd& Q);

// Moreau envelope of the l-inf norm with parameter mu: writes the gradient
// (the l1-ball projection of x/mu) into grad and returns the envelope value.
double moreau_linf(std::span<const double> x, double mu, std::span<double> grad);

// Moreau envelope of the l2 norm (l2-ball projection instead).
double moreau_l2(std::span<const double> x, double mu, std::span<double> grad);

struct MoreauResult {
    double value;
    std::vector<double> grad;
};

MoreauResult moreau_linf(std::span<const double> x, double mu);
MoreauResult moreau_l2(std::span<const double> x, double mu);

// Univariate bump potential t -> lambda*(rho_mu(t) - rho_nu(t)) with nu > mu,
// together with its derivative. Saturates at lambda*(nu - mu)/2.
struct WcrrResult {
    double value;
    double derivative;
};

WcrrResult wcrr_univariate(double t, double mu, double nu, double lambda);

// Scratch buffers for psi evaluation; reuse across calls on one thread.
struct PsiScratch {
    std::vector<double> scaled, proj1, qx, proj2;
    void resize(int d);
};

// One expert's parameters (Q, tau, mu). Immutable after construction; the
// constructor validates the gradient-nonexpansiveness constraints:
//   linf kind: max absolute row sum of Q <= 1 and tau > ||Q||_2^2
//   l2 kind:   ||Q||_2 <= 1 and tau > 1
// and mu >= 1e-9. Violations raise ConfigError.
class PotentialGroup {
  public:
    PotentialGroup(Eigen::MatrixXd Q, double tau, double mu, NormKind kind);

    int dim() const { return static_cast<int>(Q_.rows()); }
    const Eigen::MatrixXd& Q() const { return Q_; }
    double tau() const { return tau_; }
    double mu() const { return mu_; }
    NormKind kind() const { return kind_; }
    double q_spectral_norm() const { return q_norm_; }

    // psi(x) = mu*rho_mu(x) - mu*rho_{tau mu}(Qx) with the matching norm kind;
    // gradient written into grad. mu_override replaces the stored mu (used for
    // noise-level-dependent evaluation); constraints do not involve mu.
    double eval(std::span<const double> x, std::span<double> grad, PsiScratch& scratch,
                double mu_override) const;
    double eval(std::span<const double> x, std::span<double> grad, PsiScratch& scratch) const {
        return eval(x, grad, scratch, mu_);
    }

  private:
    Eigen::MatrixXd Q_;
    double tau_;
    double mu_;
    NormKind kind_;
    double q_norm_;
};

// Projection-style repair onto the feasible set: rows of Q with absolute sum
// above one are rescaled (linf kind) or Q is rescaled by max(1,||Q||_2)^-1
// (l2 kind); tau and mu are floored so the strict inequalities hold.
PotentialGroup enforce_group_constraints(const Eigen::MatrixXd& Q_raw, double tau_raw,
                                         double mu_raw, NormKind kind);

// Convenience wrapper returning value and gradient as a MoreauResult.
MoreauResult psi_eval(const PotentialGroup& g, std::span<const double> x);

} // namespace mfoe
