#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stx {

inline constexpr int kMaxDim = 3;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A point (x, t) of R^n x R.
template <typename Scalar>
struct SpaceTimePoint {
    VectorX<Scalar> x;
    Scalar t{0};

    SpaceTimePoint() = default;
    SpaceTimePoint(VectorX<Scalar> x_, Scalar t_) : x(std::move(x_)), t(t_) {}

    int dim() const { return static_cast<int>(x.size()); }
};

using Point = SpaceTimePoint<double>;

/// (|x|^2 + |t|)^{1/2}
template <typename Scalar>
Scalar parabolic_norm(const VectorX<Scalar>& x, Scalar t) {
    using std::abs;
    using std::sqrt;
    return sqrt(x.squaredNorm() + abs(t));
}

template <typename Scalar>
Scalar parabolic_norm(const SpaceTimePoint<Scalar>& p) {
    return parabolic_norm(p.x, p.t);
}

/// (x, t) -> (lambda x, lambda^2 t)
template <typename Scalar>
SpaceTimePoint<Scalar> parabolic_dilate(const SpaceTimePoint<Scalar>& p, Scalar lambda) {
    return {lambda * p.x, lambda * lambda * p.t};
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

/// Spatial multi-index mu in N_0^n, n <= 3.
struct MultiIndex {
    std::array<int, kMaxDim> idx{};
    int dim = 0;

    MultiIndex() = default;
    explicit MultiIndex(int n) : dim(n) {
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("MultiIndex: dimension must be 1..3");
    }
    MultiIndex(int n, std::initializer_list<int> values) : MultiIndex(n) {
        if (static_cast<int>(values.size()) != n) throw std::invalid_argument("MultiIndex: wrong length");
        int i = 0;
        for (int v : values) {
            if (v < 0) throw std::invalid_argument("MultiIndex: negative entry");
            idx[i++] = v;
        }
    }

    static MultiIndex unit(int n, int axis) {
        MultiIndex m(n);
        m.idx.at(axis) = 1;
        return m;
    }

    int operator[](int i) const { return idx[i]; }
    int& operator[](int i) { return idx[i]; }

    int order() const {
        int s = 0;
        for (int i = 0; i < dim; ++i) s += idx[i];
        return s;
    }

    /// mu! = prod mu_i!
    double factorial() const {
        double f = 1.0;
        for (int i = 0; i < dim; ++i) f *= stx::factorial(idx[i]);
        return f;
    }

    MultiIndex operator+(const MultiIndex& o) const {
        MultiIndex r(*this);
        for (int i = 0; i < dim; ++i) r.idx[i] += o.idx[i];
        return r;
    }

    bool operator==(const MultiIndex& o) const = default;
    auto operator<=>(const MultiIndex& o) const = default;

    /// x^mu
    template <typename Derived>
    double monomial(const Eigen::MatrixBase<Derived>& x) const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < idx[i]; ++k) v *= x[i];
        return v;
    }

    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < dim; ++i) {
            if (i) s += ",";
            s += std::to_string(idx[i]);
        }
        return s + ")";
    }
};

/// All multi-indices of dimension n with |alpha| == k, in graded reverse-lexicographic order
/// (first axis highest power first).
std::vector<MultiIndex> multi_indices_of_order(int n, int k);

/// All multi-indices with |alpha| <= max_order, grouped by increasing order.
std::vector<MultiIndex> multi_indices_up_to(int n, int max_order);

/// Space-time derivative D_x^mu D_t^l; parabolic order |mu| + 2l.
struct DerivativeSpec {
    MultiIndex mu;
    int l = 0;

    int order() const { return mu.order() + 2 * l; }
    double factorial_weight() const { return mu.factorial() * factorial(l); }
    bool operator==(const DerivativeSpec&) const = default;
};

/// All (mu, l) with |mu| + 2l == m.
std::vector<DerivativeSpec> parabolic_specs_of_order(int n, int m);

/// All (mu, l) with |mu| + 2l <= m, grouped by order.
std::vector<DerivativeSpec> parabolic_specs_up_to(int n, int m);

}  // namespace stx
