#include "stx/quadrature_rules.hpp"

namespace stx {

GaussRule gauss_legendre(int order) {
    if (order < 1) throw DomainError("gauss_legendre: order must be positive");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = rule.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

std::vector<MappedNode> map_rule(const GaussRule& rule, double a, double b) {
    std::vector<MappedNode> out(rule.size());
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < rule.size(); ++i) out[i] = {c + h * rule.nodes[i], h * rule.weights[i]};
    return out;
}

}  // namespace stx
