#include "stx/grid_field.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <ostream>

namespace stx {

static_assert(std::endian::native == std::endian::little, "GridField files are written in host byte order");

namespace {

Eigen::Index ipow(int base, int e) {
    Eigen::Index r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

GridField::GridField(int dim, int component_count, double L, int per_axis, double T, int slice_count)
    : n(dim), components(component_count), extent(L), points(per_axis), duration(T), slices(slice_count) {
    validate();
    values.assign(components, Eigen::VectorXd::Zero(slices * spatial_size()));
}

double GridField::time(int slice) const {
    if (slices == 1) return 0.0;
    return -duration + duration * slice / (slices - 1);
}

Eigen::Index GridField::spatial_size() const { return ipow(points, n); }

Eigen::VectorXd GridField::node(Eigen::Index i) const {
    Eigen::VectorXd x(n);
    for (int a = n - 1; a >= 0; --a) {
        x[a] = -extent + spacing() * static_cast<double>(i % points);
        i /= points;
    }
    return x;
}

Eigen::Index GridField::index(const std::vector<int>& ijk) const {
    Eigen::Index i = 0;
    for (int a = 0; a < n; ++a) i = i * points + ijk[a];
    return i;
}

Eigen::VectorXd GridField::value(int slice, Eigen::Index i) const {
    Eigen::VectorXd v(components);
    for (int c = 0; c < components; ++c) v[c] = (*this)(c, slice, i);
    return v;
}

void GridField::validate() const {
    if (n < 1 || n > 3) throw DomainError("GridField: dimension must be 1..3");
    if (components < 1) throw DomainError("GridField: component count must be positive");
    if (!(extent > 0.0)) throw DomainError("GridField: spatial extent must be positive");
    if (points < 3 || points % 2 == 0) throw DomainError("GridField: points per axis must be odd and >= 3");
    if (slices < 1) throw DomainError("GridField: need at least one time slice");
    if (slices > 1 && !(duration > 0.0)) throw DomainError("GridField: time spacing must be positive");
    if (!values.empty()) {
        if (static_cast<int>(values.size()) != components)
            throw DomainError("GridField: value array does not match the component count");
        for (const auto& v : values)
            if (v.size() != slices * spatial_size()) throw DomainError("GridField: value array does not match the grid");
    }
    if (divergence_free && !values.empty()) {
        double peak = 0.0;
        for (const auto& v : values) peak = std::max(peak, v.cwiseAbs().maxCoeff());
        if (grid_divergence_defect(*this) > 1e-6 * peak)
            throw DomainError("GridField: field tagged divergence-free has a discrete divergence above 1e-6 of its maximum");
    }
}

GridField GridField::sample(int dim, int component_count, double L, int per_axis, double T, int slice_count,
                            const Sampler& f) {
    GridField g(dim, component_count, L, per_axis, T, slice_count);
    for (int s = 0; s < g.slices; ++s)
        for (Eigen::Index i = 0; i < g.spatial_size(); ++i) {
            const Eigen::VectorXd v = f(g.node(i), g.time(s));
            if (v.size() != component_count) throw DomainError("GridField::sample: sampler returned the wrong size");
            for (int c = 0; c < component_count; ++c) g(c, s, i) = v[c];
        }
    return g;
}

Eigen::VectorXd grid_derivative(const GridField& g, int component, int slice, int axis) {
    if (g.points < 5) throw DomainError("grid_derivative: need at least 5 points per axis");
    if (axis < 0 || axis >= g.n) throw DomainError("grid_derivative: axis out of range");
    const Eigen::Index size = g.spatial_size();
    const Eigen::Index stride = ipow(g.points, g.n - 1 - axis);
    const double h = g.spacing();
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const int k = static_cast<int>((i / stride) % g.points);
        auto at = [&](int off) { return g(component, slice, i + off * stride); };
        if (k >= 2 && k <= g.points - 3)
            out[i] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        else if (k < 2)
            out[i] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
        else
            out[i] = (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
    }
    return out;
}

double grid_divergence_defect(const GridField& g) {
    if (g.components != g.n) throw DomainError("grid_divergence_defect: need n components");
    double worst = 0.0;
    for (int s = 0; s < g.slices; ++s) {
        Eigen::VectorXd div = Eigen::VectorXd::Zero(g.spatial_size());
        for (int k = 0; k < g.n; ++k) div += grid_derivative(g, k, s, k);
        worst = std::max(worst, div.cwiseAbs().maxCoeff());
    }
    return worst;
}

void write_grid_field(const GridField& g, const std::filesystem::path& file) {
    g.validate();
    nlohmann::json header = {{"dimension", g.n},
                             {"components", g.components},
                             {"extent", g.extent},
                             {"points_per_axis", g.points},
                             {"spacing", g.spacing()},
                             {"duration", g.duration},
                             {"slices", g.slices},
                             {"time_spacing", g.slices > 1 ? g.duration / (g.slices - 1) : 0.0},
                             {"divergence_free", g.divergence_free},
                             {"layout", "component, time, row-major space"},
                             {"provenance", g.provenance}};
    const std::string text = header.dump();
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DomainError("write_grid_field: cannot open " + file.string());
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& v : g.values)
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw DomainError("write_grid_field: write failed for " + file.string());
}

GridField read_grid_field(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DomainError("read_grid_field: cannot open " + file.string());
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in || len > (1u << 26)) throw DomainError("read_grid_field: bad header length in " + file.string());
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const auto header = nlohmann::json::parse(text);
    GridField g(header.at("dimension").get<int>(), header.at("components").get<int>(),
                header.at("extent").get<double>(), header.at("points_per_axis").get<int>(),
                header.at("duration").get<double>(), header.at("slices").get<int>());
    g.divergence_free = header.value("divergence_free", false);
    g.provenance = header.value("provenance", nlohmann::json::object());
    for (auto& v : g.values)
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DomainError("read_grid_field: truncated payload in " + file.string());
    return g;
}

void write_slice_csv(std::ostream& out, const GridField& g, int component, int slice) {
    const int shown = std::min(g.n, 2);
    for (int a = 0; a < shown; ++a) out << "x" << a + 1 << ",";
    out << "value\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < g.spatial_size(); ++i) {
        const Eigen::VectorXd x = g.node(i);
        if (g.n == 3 && std::abs(x[2]) > 0.25 * g.spacing()) continue;
        for (int a = 0; a < shown; ++a) out << x[a] << ",";
        out << g(component, slice, i) << "\n";
    }
}

}  // namespace stx
