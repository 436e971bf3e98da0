#pragma once

#include "stx/errors.hpp"
#include "stx/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace stx {

/// Smooth cutoff chi(r): 1 for r <= 1/2, 0 for r >= 1, with first and second derivatives.
struct CutoffValue {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};
CutoffValue cutoff(double r);

/// A forcing written as a sum of kernel derivatives applied to vector densities:
///
///   u_k = sum_r sum_j int D^{beta_r} K_jk(x - y, t - s) F_{r,j}(y, s) dy ds.
///
/// The standard form has one term with beta = 0 and F = f. The divergence form f_k = d_j g_jk
/// has beta_i = e_i and F_{i,j} = g_ij. `effective` returns f in either case.
class Forcing {
public:
    using Density = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)>;
    using Field = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

    Forcing(int n, std::vector<MultiIndex> betas, Density density, Field effective, std::string label,
            double decay_exponent);

    static Forcing zero(int n);

    int dim() const { return n_; }
    const std::vector<MultiIndex>& betas() const { return betas_; }
    int max_beta_order() const;
    /// rows = terms, cols = n
    Eigen::MatrixXd density(const Eigen::VectorXd& y, double s) const { return density_(y, s); }
    Eigen::VectorXd effective(const Eigen::VectorXd& y, double s) const { return effective_(y, s); }
    const std::string& label() const { return label_; }
    /// a with |F| <= C |(y,s)|^a near the origin
    double decay_exponent() const { return decay_exponent_; }
    bool is_zero() const { return zero_; }

    Forcing scaled(double c) const;
    /// Sum of two forcings with identical beta lists.
    Forcing plus(const Forcing& other) const;
    /// Same effective f, rewritten as a single standard-form term.
    Forcing as_standard() const;

private:
    int n_;
    std::vector<MultiIndex> betas_;
    Density density_;
    Field effective_;
    std::string label_;
    double decay_exponent_;
    bool zero_ = false;
};

enum class ForcingForm { Standard, Divergence };

struct ForcingSpec {
    int n = 2;
    int d = 2;
    double alpha = 0.5;
    double gamma = 1.0;
    double q = 3.0;
    ForcingForm form = ForcingForm::Standard;
    /// standard: radial_power | oscillatory; divergence: isotropic | antisymmetric | matrix
    std::string profile = "radial_power";
    Eigen::VectorXd direction;  // standard form; defaults to e_1
    Eigen::MatrixXd matrix;     // divergence "matrix" profile

    /// Throws DomainError naming the offending field.
    void validate() const;
};

struct ForcingBundle {
    std::shared_ptr<const Forcing> forcing;
    double calibrated_amplitude = 0.0;  // gamma'
    double measured_constant = 0.0;     // max over probed radii of the normalized Lq norm
};

/// Built-in forcing families with calibrated amplitude.
ForcingBundle make_forcing(const ForcingSpec& spec);

/// max_j ||f_j||_{Lq(Q_r)} / r^{d-2+alpha+(n+2)/q} for r = 2^{-k}, k = 0..kmax.
std::vector<double> forcing_decay_ratios(const Forcing& f, const ForcingSpec& spec, int kmax = 5);

/// f_k = sum_j d_j g_jk from a divergence-form forcing (analytic for built-ins).
Forcing divergence_form_forcing_to_standard(const Forcing& g);

/// f_k = sum_j d_j g_jk for g sampled on a uniform periodic box [-L, L)^n, computed spectrally.
/// Rejects grids with fewer than 16 points per support diameter (2). `g` holds n*n components
/// ordered (j, k) row-major.
struct GriddedTensor {
    int n = 2;
    double extent = 1.0;
    int points = 0;
    std::vector<Eigen::VectorXd> components;
};
std::vector<Eigen::VectorXd> divergence_of_gridded_tensor(const GriddedTensor& g);

/// Divergence-free field u = (d_2 Psi, -d_1 Psi[, 0]), Psi = h(y) chi(|(y,s)|), h a homogeneous
/// polynomial of degree order + 1 with seeded coefficients; u vanishes to order `order`.
class ManufacturedField {
public:
    ManufacturedField(int n, int order, std::uint64_t seed, double amplitude = 1.0);

    int dim() const { return n_; }
    int order() const { return order_; }
    Eigen::VectorXd value(const Eigen::VectorXd& y, double s) const;
    /// J(k, i) = d_i u_k
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& y, double s) const;

private:
    struct Derivs {
        double v;
        Eigen::VectorXd g;
        Eigen::MatrixXd h;
    };
    Derivs stream(const Eigen::VectorXd& y, double s) const;

    int n_;
    int order_;
    double amplitude_;
    std::vector<std::pair<MultiIndex, double>> terms_;
};

/// g = -u (x) u in divergence form.
Forcing navier_stokes_forcing(std::shared_ptr<const ManufacturedField> u, double decay_exponent);
/// f = -(a . grad) u in standard form.
Forcing oseen_forcing(std::shared_ptr<const ManufacturedField> u, Eigen::VectorXd a, double decay_exponent);

}  // namespace stx
