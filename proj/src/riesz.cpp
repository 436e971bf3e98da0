#include "stx/riesz.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <sstream>

namespace stx {

namespace {

Eigen::Index ipow(int base, int e) {
    Eigen::Index r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

void transform_axes(Eigen::VectorXcd& data, int n, int points, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> line(points), out(points);
    const Eigen::Index total = data.size();
    for (int axis = 0; axis < n; ++axis) {
        const Eigen::Index stride = ipow(points, n - 1 - axis);
        const Eigen::Index block = stride * points;
        for (Eigen::Index base = 0; base < total; base += block)
            for (Eigen::Index off = 0; off < stride; ++off) {
                for (int i = 0; i < points; ++i) line[i] = data[base + off + i * stride];
                if (inverse)
                    fft.inv(out, line);
                else
                    fft.fwd(out, line);
                for (int i = 0; i < points; ++i) data[base + off + i * stride] = out[i];
            }
    }
}

// Per-axis wavenumber index of linear index idx.
inline int axis_index(Eigen::Index idx, int axis, int n, int points) {
    return static_cast<int>((idx / ipow(points, n - 1 - axis)) % points);
}

Eigen::VectorXcd to_spectrum(const Eigen::VectorXd& v, int n, int points) {
    return fft_forward(v.cast<std::complex<double>>(), n, points);
}

Eigen::VectorXd to_real(const Eigen::VectorXcd& spec, int n, int points) {
    return fft_inverse(spec, n, points).real();
}

// Applies a per-mode multiplier m(xi) (xi from Nyquist-zeroed wavenumbers) to a scalar spectrum.
template <typename Symbol>
Eigen::VectorXcd apply_symbol(const Eigen::VectorXcd& spec, const SpectralGrid& g, Symbol symbol) {
    const Eigen::VectorXd k = wavenumbers(g, true);
    Eigen::VectorXcd out(spec.size());
    Eigen::VectorXd xi(g.n);
    for (Eigen::Index idx = 0; idx < spec.size(); ++idx) {
        for (int a = 0; a < g.n; ++a) xi[a] = k[axis_index(idx, a, g.n, g.points)];
        out[idx] = symbol(xi) * spec[idx];
    }
    return out;
}

void require_vector(const SpectralGrid& f, const char* what) {
    if (f.component_count() != f.n)
        throw DomainError(std::string(what) + ": expected an n-component vector field");
}

}  // namespace

SpectralGrid::SpectralGrid(int dim, double L, int per_axis, int component_count)
    : n(dim), extent(L), points(per_axis) {
    if (dim < 1 || dim > 3) throw DomainError("SpectralGrid: dimension must be 1..3");
    if (per_axis <= 0 || per_axis % 2 != 0) throw DomainError("SpectralGrid: points per axis must be even");
    if (!(L > 0.0)) throw DomainError("SpectralGrid: extent must be positive");
    components.assign(component_count, Eigen::VectorXd::Zero(ipow(per_axis, dim)));
}

Eigen::Index SpectralGrid::size() const { return ipow(points, n); }

Eigen::VectorXd SpectralGrid::node(Eigen::Index idx) const {
    Eigen::VectorXd x(n);
    const double h = spacing();
    for (int a = 0; a < n; ++a) x[a] = -extent + h * axis_index(idx, a, n, points);
    return x;
}

SpectralGrid SpectralGrid::like(int count) const { return SpectralGrid(n, extent, points, count); }

SpectralGrid sample_scalar(int n, double L, int points, const ScalarFunction& f) {
    SpectralGrid g(n, L, points, 1);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.components[0][i] = f(g.node(i));
    return g;
}

SpectralGrid sample_vector(int n, double L, int points, const VectorFunction& f) {
    SpectralGrid g(n, L, points, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const Eigen::VectorXd v = f(g.node(i));
        for (int c = 0; c < n; ++c) g.components[c][i] = v[c];
    }
    return g;
}

Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& data, int n, int points) {
    if (data.size() != ipow(points, n)) throw DomainError("fft_forward: size mismatch");
    Eigen::VectorXcd out = data;
    transform_axes(out, n, points, false);
    return out;
}

Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& data, int n, int points) {
    if (data.size() != ipow(points, n)) throw DomainError("fft_inverse: size mismatch");
    Eigen::VectorXcd out = data;
    transform_axes(out, n, points, true);  // Eigen's inverse already divides by the line length
    return out;
}

Eigen::VectorXd wavenumbers(const SpectralGrid& g, bool zero_nyquist) {
    Eigen::VectorXd k(g.points);
    const double dk = std::numbers::pi / g.extent;
    for (int i = 0; i < g.points; ++i) {
        const int m = (i < g.points / 2) ? i : i - g.points;
        k[i] = dk * m;
    }
    if (zero_nyquist) k[g.points / 2] = 0.0;
    return k;
}

SpectralGrid riesz_transform(int j, const SpectralGrid& field) {
    if (field.component_count() != 1) throw DomainError("riesz_transform: expected a scalar field");
    if (j < 0 || j >= field.n) throw DomainError("riesz_transform: axis out of range");
    const auto spec = to_spectrum(field.components[0], field.n, field.points);
    const std::complex<double> I(0.0, 1.0);
    auto out_spec = apply_symbol(spec, field, [&](const Eigen::VectorXd& xi) -> std::complex<double> {
        const double r = xi.norm();
        return r == 0.0 ? 0.0 : -I * xi[j] / r;
    });
    SpectralGrid out = field.like(1);
    out.components[0] = to_real(out_spec, field.n, field.points);
    return out;
}

SpectralGrid leray_project(const SpectralGrid& field) {
    require_vector(field, "leray_project");
    const int n = field.n;
    std::vector<Eigen::VectorXcd> spec(n);
    for (int c = 0; c < n; ++c) spec[c] = to_spectrum(field.components[c], n, field.points);
    const Eigen::VectorXd k = wavenumbers(field, true);
    Eigen::VectorXd xi(n);
    for (Eigen::Index idx = 0; idx < field.size(); ++idx) {
        for (int a = 0; a < n; ++a) xi[a] = k[axis_index(idx, a, n, field.points)];
        const double r2 = xi.squaredNorm();
        if (r2 == 0.0) {
            for (int c = 0; c < n; ++c) spec[c][idx] = 0.0;
            continue;
        }
        std::complex<double> dot = 0.0;
        for (int c = 0; c < n; ++c) dot += xi[c] * spec[c][idx];
        for (int c = 0; c < n; ++c) spec[c][idx] -= xi[c] * dot / r2;
    }
    SpectralGrid out = field.like(n);
    for (int c = 0; c < n; ++c) out.components[c] = to_real(spec[c], n, field.points);
    return out;
}

SpectralGrid pressure_from_forcing(const SpectralGrid& f) {
    require_vector(f, "pressure_from_forcing");
    const int n = f.n;
    std::vector<Eigen::VectorXcd> spec(n);
    for (int c = 0; c < n; ++c) spec[c] = to_spectrum(f.components[c], n, f.points);
    const Eigen::VectorXd k = wavenumbers(f, true);
    const std::complex<double> I(0.0, 1.0);
    Eigen::VectorXcd p(f.size());
    Eigen::VectorXd xi(n);
    for (Eigen::Index idx = 0; idx < f.size(); ++idx) {
        for (int a = 0; a < n; ++a) xi[a] = k[axis_index(idx, a, n, f.points)];
        const double r2 = xi.squaredNorm();
        if (r2 == 0.0) {
            p[idx] = 0.0;
            continue;
        }
        std::complex<double> dot = 0.0;
        for (int c = 0; c < n; ++c) dot += xi[c] * spec[c][idx];
        p[idx] = -I * dot / r2;
    }
    SpectralGrid out = f.like(1);
    out.components[0] = to_real(p, n, f.points);
    return out;
}

SpectralGrid spectral_derivative(const SpectralGrid& field, int axis) {
    if (axis < 0 || axis >= field.n) throw DomainError("spectral_derivative: axis out of range");
    const std::complex<double> I(0.0, 1.0);
    SpectralGrid out = field.like(field.component_count());
    for (int c = 0; c < field.component_count(); ++c) {
        const auto spec = to_spectrum(field.components[c], field.n, field.points);
        auto d = apply_symbol(spec, field, [&](const Eigen::VectorXd& xi) { return I * xi[axis]; });
        out.components[c] = to_real(d, field.n, field.points);
    }
    return out;
}

SpectralGrid spectral_divergence(const SpectralGrid& field) {
    require_vector(field, "spectral_divergence");
    SpectralGrid out = field.like(1);
    for (int a = 0; a < field.n; ++a) {
        SpectralGrid comp = field.like(1);
        comp.components[0] = field.components[a];
        out.components[0] += spectral_derivative(comp, a).components[0];
    }
    return out;
}

SpectralGrid spectral_gradient(const SpectralGrid& scalar) {
    if (scalar.component_count() != 1) throw DomainError("spectral_gradient: expected a scalar field");
    SpectralGrid out = scalar.like(scalar.n);
    for (int a = 0; a < scalar.n; ++a) out.components[a] = spectral_derivative(scalar, a).components[0];
    return out;
}

SpectralGrid spectral_laplacian(const SpectralGrid& scalar) {
    if (scalar.component_count() != 1) throw DomainError("spectral_laplacian: expected a scalar field");
    const auto spec = to_spectrum(scalar.components[0], scalar.n, scalar.points);
    const Eigen::VectorXd k = wavenumbers(scalar, false);
    Eigen::VectorXcd out_spec(spec.size());
    for (Eigen::Index idx = 0; idx < spec.size(); ++idx) {
        double r2 = 0.0;
        for (int a = 0; a < scalar.n; ++a) r2 += std::pow(k[axis_index(idx, a, scalar.n, scalar.points)], 2);
        out_spec[idx] = -r2 * spec[idx];
    }
    SpectralGrid out = scalar.like(1);
    out.components[0] = to_real(out_spec, scalar.n, scalar.points);
    return out;
}

KernelOracle spectral_stokes_kernel_oracle(int j, int k, double t, const SpectralGrid& grid, double query_radius) {
    if (!(t > 0.0)) throw DomainError("spectral_stokes_kernel_oracle requires t > 0");
    if (grid.n != 2 && grid.n != 3) throw DomainError("spectral_stokes_kernel_oracle supports n = 2 or 3");
    if (j < 0 || k < 0 || j >= grid.n || k >= grid.n) throw DomainError("Stokes tensor index out of range");
    KernelOracle result;
    if (grid.extent < 8.0 * (std::sqrt(t) + query_radius)) {
        std::ostringstream msg;
        msg << "box half-width " << grid.extent << " is below 8 (sqrt(t) + query radius) = "
            << 8.0 * (std::sqrt(t) + query_radius) << "; periodic images may be visible";
        result.warnings.push_back(msg.str());
    }
    const double nyquist = std::numbers::pi / grid.spacing();
    if (std::exp(-nyquist * nyquist * t) > 1e-12) {
        std::ostringstream msg;
        msg << "grid spacing " << grid.spacing() << " does not resolve exp(-|xi|^2 t) at t = " << t;
        result.warnings.push_back(msg.str());
    }

    const int n = grid.n;
    const Eigen::VectorXd kw = wavenumbers(grid, false);
    const double volume = std::pow(2.0 * grid.extent, n);
    Eigen::VectorXcd spec(grid.size());
    Eigen::VectorXd xi(n);
    for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
        for (int a = 0; a < n; ++a) xi[a] = kw[axis_index(idx, a, n, grid.points)];
        const double r2 = xi.squaredNorm();
        double sym;
        if (r2 == 0.0)
            sym = (j == k) ? 1.0 - 1.0 / n : 0.0;
        else
            sym = ((j == k ? 1.0 : 0.0) - xi[j] * xi[k] / r2) * std::exp(-r2 * t);
        spec[idx] = sym;
    }
    // Continuous inverse transform: K(x) = (2L)^{-n} sum_xi K^(xi) e^{i xi.x}. Nodes start at -L,
    // so the phase e^{-i xi L} per axis is folded in.
    Eigen::VectorXd shift_sign(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const int m = (i < grid.points / 2) ? i : i - grid.points;
        shift_sign[i] = (m % 2 == 0) ? 1.0 : -1.0;  // e^{-i pi m}
    }
    for (Eigen::Index idx = 0; idx < grid.size(); ++idx) {
        double s = 1.0;
        for (int a = 0; a < n; ++a) s *= shift_sign[axis_index(idx, a, n, grid.points)];
        spec[idx] *= s;
    }
    const double total = static_cast<double>(grid.size());
    result.values = grid.like(1);
    result.values.components[0] = fft_inverse(spec, n, grid.points).real() * (total / volume);
    return result;
}

double grid_l2_norm(const SpectralGrid& field) {
    double s = 0.0;
    for (const auto& c : field.components) s += c.squaredNorm();
    return std::sqrt(s * std::pow(field.spacing(), field.n));
}

double grid_max_abs(const SpectralGrid& field) {
    double m = 0.0;
    for (const auto& c : field.components) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

}  // namespace stx
