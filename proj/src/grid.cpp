#include "plab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace plab {

double norm(const Point& x)
{
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

GridSpec::GridSpec(int dim, double half_width, std::size_t points_per_axis)
    : dim_(dim), half_width_(half_width), points_(points_per_axis)
{
    if (dim < 1 || dim > 3) {
        throw std::invalid_argument("GridSpec: dimension must be 1, 2 or 3");
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw std::invalid_argument("GridSpec: half-width L must be positive and finite");
    }
    if (points_per_axis < 3) {
        throw std::invalid_argument("GridSpec: need at least 3 points per axis");
    }
    size_ = 1;
    for (int d = 0; d < dim; ++d) {
        if (size_ > std::numeric_limits<std::size_t>::max() / points_per_axis) {
            throw std::invalid_argument("GridSpec: node count overflows the index type");
        }
        size_ *= points_per_axis;
    }
    spacing_ = 2.0 * half_width / static_cast<double>(points_per_axis - 1);
}

double GridSpec::coord(std::size_t axis_index) const
{
    return -half_width_ + static_cast<double>(axis_index) * spacing_;
}

std::size_t GridSpec::stride(int axis) const
{
    std::size_t s = 1;
    for (int d = dim_ - 1; d > axis; --d) {
        s *= points_;
    }
    return s;
}

std::array<std::size_t, 3> GridSpec::unravel(std::size_t node) const
{
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int d = dim_ - 1; d >= 0; --d) {
        idx[d] = node % points_;
        node /= points_;
    }
    return idx;
}

std::size_t GridSpec::ravel(const std::array<std::size_t, 3>& idx) const
{
    std::size_t node = 0;
    for (int d = 0; d < dim_; ++d) {
        node = node * points_ + idx[d];
    }
    return node;
}

Point GridSpec::node(std::size_t node) const
{
    const auto idx = unravel(node);
    Point x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) {
        x[d] = coord(idx[d]);
    }
    return x;
}

bool GridSpec::on_boundary(std::size_t node) const
{
    const auto idx = unravel(node);
    for (int d = 0; d < dim_; ++d) {
        if (idx[d] == 0 || idx[d] == points_ - 1) {
            return true;
        }
    }
    return false;
}

double GridSpec::weight(std::size_t node) const
{
    const auto idx = unravel(node);
    double w = 1.0;
    for (int d = 0; d < dim_; ++d) {
        w *= spacing_;
        if (idx[d] == 0 || idx[d] == points_ - 1) {
            w *= 0.5;
        }
    }
    return w;
}

double GridSpec::cell_volume() const
{
    return std::pow(spacing_, dim_);
}

double GridSpec::box_volume() const
{
    return std::pow(2.0 * half_width_, dim_);
}

std::string GridSpec::id() const
{
    std::ostringstream os;
    os << "n" << dim_ << "-L" << half_width_ << "-m" << points_;
    return os.str();
}

bool GridSpec::operator==(const GridSpec& other) const
{
    return dim_ == other.dim_ && half_width_ == other.half_width_ && points_ == other.points_;
}

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what)
{
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": grid specs differ (" + a.id() + " vs " +
                                    b.id() + ")");
    }
}

GridFunction::GridFunction(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values))
{
    if (values_.size() != spec_.size()) {
        throw std::invalid_argument("GridFunction: expected " + std::to_string(spec_.size()) +
                                    " samples, got " + std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument("GridFunction: non-finite sample at node " +
                                        std::to_string(i));
        }
    }
}

GridFunction GridFunction::zeros(const GridSpec& spec)
{
    return GridFunction(spec, std::vector<double>(spec.size(), 0.0));
}

double GridFunction::max_abs() const
{
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const
{
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), fn);
    return GridFunction(spec_, std::move(out));
}

GridFunction operator+(const GridFunction& a, const GridFunction& b)
{
    require_same_spec(a.spec_, b.spec_, "operator+");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.values_[i] + b.values_[i];
    }
    return GridFunction(a.spec_, std::move(out));
}

GridFunction operator-(const GridFunction& a, const GridFunction& b)
{
    require_same_spec(a.spec_, b.spec_, "operator-");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a.values_[i] - b.values_[i];
    }
    return GridFunction(a.spec_, std::move(out));
}

GridFunction operator*(double s, const GridFunction& a)
{
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = s * a.values_[i];
    }
    return GridFunction(a.spec_, std::move(out));
}

VectorField::VectorField(GridSpec spec, std::vector<std::vector<double>> components)
    : spec_(spec), components_(std::move(components))
{
    if (static_cast<int>(components_.size()) != spec_.dim()) {
        throw std::invalid_argument("VectorField: component count must equal the dimension");
    }
    for (const auto& c : components_) {
        if (c.size() != spec_.size()) {
            throw std::invalid_argument("VectorField: component length mismatch");
        }
    }
}

GridFunction VectorField::magnitude() const
{
    std::vector<double> out(spec_.size(), 0.0);
    for (const auto& c : components_) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += c[i] * c[i];
        }
    }
    for (double& v : out) {
        v = std::sqrt(v);
    }
    return GridFunction(spec_, std::move(out));
}

VectorField VectorField::masked(const std::vector<bool>& mask) const
{
    if (mask.size() != spec_.size()) {
        throw std::invalid_argument("VectorField::masked: mask length mismatch");
    }
    auto comps = components_;
    for (auto& c : comps) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!mask[i]) {
                c[i] = 0.0;
            }
        }
    }
    return VectorField(spec_, std::move(comps));
}

GridFunction sample(const GridSpec& spec, const std::function<double(const Point&)>& field)
{
    std::vector<double> values(spec.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const Point x = spec.node(i);
        const double v = field(x);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "sample: non-finite field value at node " << i << " (x = " << x[0];
            for (int d = 1; d < spec.dim(); ++d) {
                os << ", " << x[d];
            }
            os << ")";
            throw std::invalid_argument(os.str());
        }
        values[i] = v;
    }
    return GridFunction(spec, std::move(values));
}

VectorField gradient(const GridFunction& u)
{
    const GridSpec& spec = u.spec();
    const std::size_t m = spec.points();
    const double h = spec.spacing();
    const auto vals = u.values();
    std::vector<std::vector<double>> comps(spec.dim(), std::vector<double>(spec.size()));
    for (int d = 0; d < spec.dim(); ++d) {
        const std::size_t s = spec.stride(d);
        auto& c = comps[d];
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const std::size_t k = spec.unravel(i)[d];
            if (k == 0) {
                c[i] = (vals[i + s] - vals[i]) / h;
            } else if (k == m - 1) {
                c[i] = (vals[i] - vals[i - s]) / h;
            } else {
                c[i] = (vals[i + s] - vals[i - s]) / (2.0 * h);
            }
        }
    }
    return VectorField(spec, std::move(comps));
}

double integrate(const GridFunction& u)
{
    const GridSpec& spec = u.spec();
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        sum += spec.weight(i) * u[i];
    }
    return sum;
}

double annulus_integrate(const GridFunction& u, double radius)
{
    if (radius < 0.0) {
        throw std::invalid_argument("annulus_integrate: radius must be nonnegative");
    }
    const GridSpec& spec = u.spec();
    double sum = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (norm(spec.node(i)) > radius) {
            sum += spec.weight(i) * u[i];
        }
    }
    return sum;
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix)
{
    return std::filesystem::path(stem.string() + suffix);
}

std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int b = 0; b < 8; ++b) {
            r = (r << 8) | ((v >> (8 * b)) & 0xffu);
        }
        return r;
    } else {
        return v;
    }
}

}  // namespace

void write_grid_function(const GridFunction& u, const std::filesystem::path& stem)
{
    const GridSpec& spec = u.spec();
    nlohmann::json header = {
        {"n", spec.dim()},
        {"L", spec.half_width()},
        {"m", spec.points()},
        {"order", "row-major"},
        {"dtype", "f64-little-endian"},
    };
    {
        std::ofstream js(with_suffix(stem, ".json"));
        if (!js) {
            throw std::runtime_error("write_grid_function: cannot open " +
                                     with_suffix(stem, ".json").string());
        }
        js << header.dump(2) << "\n";
    }
    std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) {
        throw std::runtime_error("write_grid_function: cannot open " +
                                 with_suffix(stem, ".bin").string());
    }
    for (double v : u.values()) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        bin.write(bytes, 8);
    }
}

GridFunction read_grid_function(const std::filesystem::path& stem)
{
    std::ifstream js(with_suffix(stem, ".json"));
    if (!js) {
        throw std::runtime_error("read_grid_function: cannot open " +
                                 with_suffix(stem, ".json").string());
    }
    const auto header = nlohmann::json::parse(js);
    if (header.at("order") != "row-major" || header.at("dtype") != "f64-little-endian") {
        throw std::runtime_error("read_grid_function: unsupported order/dtype");
    }
    const GridSpec spec(header.at("n").get<int>(), header.at("L").get<double>(),
                        header.at("m").get<std::size_t>());
    std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
    if (!bin) {
        throw std::runtime_error("read_grid_function: cannot open " +
                                 with_suffix(stem, ".bin").string());
    }
    std::vector<double> values(spec.size());
    for (auto& v : values) {
        char bytes[8];
        if (!bin.read(bytes, 8)) {
            throw std::runtime_error("read_grid_function: truncated binary payload");
        }
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes, 8);
        v = std::bit_cast<double>(to_little_endian(bits));
    }
    if (bin.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error("read_grid_function: trailing bytes in binary payload");
    }
    return GridFunction(spec, std::move(values));
}

}  // namespace plab
