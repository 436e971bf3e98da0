#pragma once

// One-dimensional rules shared by every integration routine in the library.

#include "stx/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

namespace stx {

/// Nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with `order` points (Newton iteration on the three-term recurrence).
GaussRule gauss_legendre(int order);

/// Maps a rule on [-1,1] to [a,b]; returns (node, weight) pairs.
struct MappedNode {
    double x;
    double w;
};
std::vector<MappedNode> map_rule(const GaussRule& rule, double a, double b);

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename F>
Panel kronrod15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kKronrodWeights[7];
    double g = fc * kGaussWeights[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kKronrodNodes[i];
        const double s = f(c - dx) + f(c + dx);
        k += kKronrodWeights[i] * s;
        if (i % 2 == 1) g += kGaussWeights[i / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}
}  // namespace detail

/// Globally adaptive 7/15-point Gauss-Kronrod. Throws QuadratureError when
/// max(abs_tol, rel_tol*|I|) is not reached within `max_intervals` panels.
template <typename F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                                  int max_intervals = 2000) {
    std::priority_queue<detail::Panel> heap;
    auto first = detail::kronrod15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int count = 1;
    while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (count >= max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] stalled at error " << err
                << " after " << count << " panels; increase nodes or loosen tolerance";
            throw QuadratureError(msg.str());
        }
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::kronrod15(f, worst.a, mid);
        auto right = detail::kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Final value is summed from the panels, not the running total.
    double sum = 0.0, esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().error;
        heap.pop();
    }
    return {sum, esum, count};
}

}  // namespace stx
