#pragma once

// Uniform space-time sampling of a vector or tensor field on [-L, L]^n x [-T, 0].

#include "stx/errors.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

namespace stx {

struct GridField {
    int n = 2;
    int components = 1;
    double extent = 1.0;    // half-width L; nodes include both ends
    int points = 0;         // per axis, odd so that x = 0 is a node
    double duration = 0.0;  // T; slices are uniform on [-T, 0]
    int slices = 1;
    bool divergence_free = false;
    std::vector<Eigen::VectorXd> values;  // values[c]: slice-major, then row-major space (axis 0 slowest)
    nlohmann::json provenance = nlohmann::json::object();

    GridField() = default;
    GridField(int dim, int component_count, double L, int per_axis, double T, int slice_count);

    double spacing() const { return 2.0 * extent / (points - 1); }
    double time(int slice) const;
    Eigen::Index spatial_size() const;
    Eigen::VectorXd node(Eigen::Index i) const;
    /// Linear spatial index of the node with per-axis indices `ijk`.
    Eigen::Index index(const std::vector<int>& ijk) const;

    double operator()(int c, int slice, Eigen::Index i) const { return values[c][slice * spatial_size() + i]; }
    double& operator()(int c, int slice, Eigen::Index i) { return values[c][slice * spatial_size() + i]; }
    Eigen::VectorXd value(int slice, Eigen::Index i) const;

    /// Throws DomainError on inconsistent shape, and on tagged fields whose divergence exceeds
    /// 1e-6 of the field maximum.
    void validate() const;

    using Sampler = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
    static GridField sample(int dim, int component_count, double L, int per_axis, double T, int slice_count,
                            const Sampler& f);
};

/// d_axis of one component on one slice: fourth-order central differences inside, second-order
/// one-sided at the two nodes next to each face. Needs at least 5 points per axis.
Eigen::VectorXd grid_derivative(const GridField& g, int component, int slice, int axis);

/// max over nodes and slices of |div U|, for fields with n components.
double grid_divergence_defect(const GridField& g);

void write_grid_field(const GridField& g, const std::filesystem::path& file);
GridField read_grid_field(const std::filesystem::path& file);

/// CSV of one component on one slice: 1D and 2D fields in full, 3D on the plane x_3 = 0.
void write_slice_csv(std::ostream& out, const GridField& g, int component, int slice);

}  // namespace stx
