#include "stx/geometry.hpp"

namespace stx {

namespace {

void fill(int n, int axis, int remaining, MultiIndex& current, std::vector<MultiIndex>& out) {
    if (axis == n - 1) {
        current[axis] = remaining;
        out.push_back(current);
        return;
    }
    for (int v = remaining; v >= 0; --v) {
        current[axis] = v;
        fill(n, axis + 1, remaining - v, current, out);
    }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(int n, int k) {
    std::vector<MultiIndex> out;
    if (k < 0) return out;
    MultiIndex current(n);
    fill(n, 0, k, current, out);
    return out;
}

std::vector<MultiIndex> multi_indices_up_to(int n, int max_order) {
    std::vector<MultiIndex> out;
    for (int k = 0; k <= max_order; ++k) {
        auto level = multi_indices_of_order(n, k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

std::vector<DerivativeSpec> parabolic_specs_of_order(int n, int m) {
    std::vector<DerivativeSpec> out;
    for (int l = 0; 2 * l <= m; ++l)
        for (const auto& mu : multi_indices_of_order(n, m - 2 * l)) out.push_back({mu, l});
    return out;
}

std::vector<DerivativeSpec> parabolic_specs_up_to(int n, int m) {
    std::vector<DerivativeSpec> out;
    for (int k = 0; k <= m; ++k) {
        auto level = parabolic_specs_of_order(n, k);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

}  // namespace stx
