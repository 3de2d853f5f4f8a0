#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace plab {

/// A point of R^n stored in a fixed 3-slot array; unused trailing slots are 0
/// so that Euclidean norms are dimension-agnostic.
using Point = std::array<double, 3>;

double norm(const Point& x);

/**
 * Uniform tensor grid on the box [-L, L]^n, 1 <= n <= 3, with m points per
 * axis. Node i along an axis sits at -L + i*h with h = 2L/(m-1). Nodes are
 * enumerated in row-major order (axis 0 slowest).
 */
class GridSpec {
public:
    GridSpec(int dim, double half_width, std::size_t points_per_axis);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    std::size_t points() const { return points_; }
    double spacing() const { return spacing_; }
    std::size_t size() const { return size_; }

    double coord(std::size_t axis_index) const;
    std::size_t stride(int axis) const;
    std::array<std::size_t, 3> unravel(std::size_t node) const;
    std::size_t ravel(const std::array<std::size_t, 3>& idx) const;
    Point node(std::size_t node) const;
    bool on_boundary(std::size_t node) const;

    /// Tensor trapezoid weight of a node.
    double weight(std::size_t node) const;
    /// h^n
    double cell_volume() const;
    double box_volume() const;

    /// Short identifier, e.g. "n1-L8-m513".
    std::string id() const;

    bool operator==(const GridSpec& other) const;

private:
    int dim_;
    double half_width_;
    std::size_t points_;
    double spacing_;
    std::size_t size_;
};

class GridFunction {
public:
    /// Throws std::invalid_argument on length mismatch or non-finite samples.
    GridFunction(GridSpec spec, std::vector<double> values);
    static GridFunction zeros(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double max_abs() const;

    GridFunction map(const std::function<double(double)>& fn) const;
    friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b);
    friend GridFunction operator*(double s, const GridFunction& a);

    bool operator==(const GridFunction& other) const = default;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

class VectorField {
public:
    VectorField(GridSpec spec, std::vector<std::vector<double>> components);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return static_cast<int>(components_.size()); }
    std::span<const double> component(int axis) const { return components_.at(axis); }
    double at(int axis, std::size_t node) const { return components_[axis][node]; }

    /// Pointwise Euclidean length.
    GridFunction magnitude() const;
    /// Zero every component at nodes where mask[i] is false.
    VectorField masked(const std::vector<bool>& mask) const;

private:
    GridSpec spec_;
    std::vector<std::vector<double>> components_;
};

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what);

/// Samples a pointwise field at every node; a non-finite value is an error
/// naming the offending node.
GridFunction sample(const GridSpec& spec, const std::function<double(const Point&)>& field);

/// Central differences in the interior, one-sided first-order differences on
/// the boundary. Exact for affine functions.
VectorField gradient(const GridFunction& u);

/// Tensor-product trapezoidal quadrature over the box.
double integrate(const GridFunction& u);

/// Trapezoidal quadrature restricted to nodes with |x| > radius (a node's
/// full weight counts iff the node itself lies outside the closed ball).
double annulus_integrate(const GridFunction& u, double radius);

/// Writes `<stem>.json` (header) and `<stem>.bin` (raw little-endian f64).
void write_grid_function(const GridFunction& u, const std::filesystem::path& stem);
GridFunction read_grid_function(const std::filesystem::path& stem);

}  // namespace plab
