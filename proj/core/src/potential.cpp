#include "msfem/potential.hpp"

#include "msfem/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace msfem {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double layered(const potentials::Layered& p, double x)
{
    const double u = (x - 0.5) * (x - 0.5);
    if (x <= 1.0 / 3.0)
        return u + std::cos(two_pi * x / p.eps1) + 1.0;
    if (x <= 2.0 / 3.0)
        return u + std::cos(two_pi * x / p.eps2) + 1.0;
    return u + std::cos(two_pi * x / p.eps1) + 1.0;
}

double checkerboard(const potentials::Checkerboard2D& p, double x, double y)
{
    const double u = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
    const bool lower_left = x >= 0.0 && x <= 0.5 && y >= 0.0 && y <= 0.5;
    const bool upper_right = x >= 0.5 && x <= 1.0 && y >= 0.5 && y <= 1.0;
    const double eps = (lower_left || upper_right) ? p.eps2 : p.eps1;
    return u + (std::cos(two_pi * x / eps) + 1.0) * (std::cos(two_pi * y / eps) + 1.0);
}

// index i with xs[i] <= x <= xs[i+1] and the linear weight of xs[i+1]
std::pair<std::size_t, double> bracket(const std::vector<double>& xs, double x)
{
    if (xs.size() == 1)
        return {0, 0.0};
    if (x <= xs.front())
        return {0, 0.0};
    if (x >= xs.back())
        return {xs.size() - 2, 1.0};
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    return {i, (x - xs[i]) / (xs[i + 1] - xs[i])};
}

double sampled(const potentials::Sampled& p, double x, double y)
{
    const auto [i, a] = bracket(p.xs, x);
    const std::size_t nx = p.xs.size();
    const std::size_t i1 = std::min(i + 1, nx - 1);
    if (p.dim == 1)
        return (1.0 - a) * p.values[i] + a * p.values[i1];
    const auto [j, b] = bracket(p.ys, y);
    const std::size_t j1 = std::min(j + 1, p.ys.size() - 1);
    const auto at = [&](std::size_t ii, std::size_t jj) { return p.values[jj * nx + ii]; };
    return (1.0 - a) * (1.0 - b) * at(i, j) + a * (1.0 - b) * at(i1, j) + (1.0 - a) * b * at(i, j1) +
           a * b * at(i1, j1);
}

} // namespace

PotentialSpec::PotentialSpec(Kind kind)
    : kind_(std::move(kind))
{
    if (const auto* s = std::get_if<potentials::Sampled>(&kind_)) {
        const std::size_t ny = s->dim == 2 ? s->ys.size() : 1;
        if ((s->dim != 1 && s->dim != 2) || s->xs.empty() || ny == 0 || s->values.size() != s->xs.size() * ny)
            throw InvalidInput("sampled potential: values do not match the node grid");
        if (!std::is_sorted(s->xs.begin(), s->xs.end()) || !std::is_sorted(s->ys.begin(), s->ys.end()))
            throw InvalidInput("sampled potential: node coordinates must be ascending");
    }
}

int PotentialSpec::dim() const
{
    return std::visit(overloaded{
                          [](const potentials::Constant&) { return 0; },
                          [](const potentials::Mathieu&) { return 1; },
                          [](const potentials::MultiplicativeTwoScale&) { return 1; },
                          [](const potentials::Layered&) { return 1; },
                          [](const potentials::AdditiveTwoScale2D&) { return 2; },
                          [](const potentials::Checkerboard2D&) { return 2; },
                          [](const potentials::Sampled& s) { return s.dim; },
                      },
                      kind_);
}

double PotentialSpec::smallest_scale() const
{
    return std::visit(overloaded{
                          [](const potentials::Constant&) { return 1.0; },
                          [](const potentials::Mathieu& p) { return p.eps; },
                          [](const potentials::MultiplicativeTwoScale& p) { return p.eps; },
                          [](const potentials::Layered& p) { return std::min(p.eps1, p.eps2); },
                          [](const potentials::AdditiveTwoScale2D& p) { return p.eps; },
                          [](const potentials::Checkerboard2D& p) { return std::min(p.eps1, p.eps2); },
                          [](const potentials::Sampled& s) {
                              double d = 1.0;
                              for (std::size_t i = 1; i < s.xs.size(); ++i)
                                  d = std::min(d, s.xs[i] - s.xs[i - 1]);
                              for (std::size_t i = 1; i < s.ys.size(); ++i)
                                  d = std::min(d, s.ys[i] - s.ys[i - 1]);
                              return d;
                          },
                      },
                      kind_);
}

std::string PotentialSpec::describe() const
{
    std::ostringstream out;
    out.precision(10);
    std::visit(overloaded{
                   [&](const potentials::Constant& p) { out << "constant(" << p.value << ")"; },
                   [&](const potentials::Mathieu& p) { out << "mathieu(eps=" << p.eps << ")"; },
                   [&](const potentials::MultiplicativeTwoScale& p) { out << "multiplicative(eps=" << p.eps << ")"; },
                   [&](const potentials::Layered& p) { out << "layered(eps1=" << p.eps1 << ", eps2=" << p.eps2 << ")"; },
                   [&](const potentials::AdditiveTwoScale2D& p) { out << "additive2d(eps=" << p.eps << ")"; },
                   [&](const potentials::Checkerboard2D& p) {
                       out << "checkerboard(eps1=" << p.eps1 << ", eps2=" << p.eps2 << ")";
                   },
                   [&](const potentials::Sampled& s) {
                       out << "sampled(dim=" << s.dim << ", nodes=" << s.values.size() << ")";
                   },
               },
               kind_);
    return out.str();
}

double PotentialSpec::operator()(double x, double y) const
{
    return std::visit(overloaded{
                          [](const potentials::Constant& p) { return p.value; },
                          [&](const potentials::Mathieu& p) { return std::cos(two_pi * x / p.eps); },
                          [&](const potentials::MultiplicativeTwoScale& p) {
                              return std::sin(4.0 * x * x) * std::sin(two_pi * x / p.eps);
                          },
                          [&](const potentials::Layered& p) { return layered(p, x); },
                          [&](const potentials::AdditiveTwoScale2D& p) {
                              return 1.0 + std::sin(4.0 * x * x * y * y) +
                                     (1.5 + std::sin(two_pi * x / p.eps)) / (1.5 + std::cos(two_pi * y / p.eps));
                          },
                          [&](const potentials::Checkerboard2D& p) { return checkerboard(p, x, y); },
                          [&](const potentials::Sampled& s) { return sampled(s, x, y); },
                      },
                      kind_);
}

double evaluate(const PotentialSpec& spec, std::span<const double> x)
{
    const int d = spec.dim();
    if (x.size() != 1 && x.size() != 2)
        throw InvalidInput("evaluate: points must have 1 or 2 coordinates");
    if (d != 0 && static_cast<std::size_t>(d) != x.size()) {
        std::ostringstream msg;
        msg << "evaluate: " << spec.describe() << " is " << d << "-dimensional, got a " << x.size()
            << "-dimensional point";
        throw InvalidInput(msg.str());
    }
    return spec(x[0], x.size() == 2 ? x[1] : 0.0);
}

double sup_norm(const PotentialSpec& spec, int sample_density, int dim)
{
    if (const auto* c = std::get_if<potentials::Constant>(&spec.kind()))
        return std::abs(c->value);
    if (sample_density < 2)
        throw InvalidInput("sup_norm: sample density must be at least 2");
    const int d = spec.dim() != 0 ? spec.dim() : std::max(dim, 1);
    const int n = sample_density;
    const double step = 1.0 / (n - 1);
    double best = 0.0;
    if (d == 1) {
        for (int i = 0; i < n; ++i)
            best = std::max(best, std::abs(spec(i * step)));
        return best;
    }
    for (int j = 0; j < n; ++j) {
        const double y = j * step;
        for (int i = 0; i < n; ++i)
            best = std::max(best, std::abs(spec(i * step, y)));
    }
    return best;
}

MeshCondition check_mesh_condition(const PotentialSpec& spec, double H, double eps, double threshold, int dim)
{
    if (!(H > 0.0) || !(eps > 0.0))
        throw InvalidInput("check_mesh_condition: H and eps must be positive");
    const int d = spec.dim() != 0 ? spec.dim() : std::max(dim, 1);
    const double per_scale = 16.0 / spec.smallest_scale();
    const int cap = d == 1 ? 200001 : 2049;
    const int density = std::clamp(static_cast<int>(std::ceil(per_scale)) + 1, 1025, cap);

    MeshCondition result;
    result.sup_norm = sup_norm(spec, density, d);
    result.ratio = std::sqrt(result.sup_norm) * H / eps;
    result.pass = result.ratio <= threshold;
    return result;
}

PotentialSpec load_sampled_potential(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open potential file '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<double> row;
        double v = 0.0;
        while (fields >> v)
            row.push_back(v);
        if (!fields.eof() || row.empty()) {
            if (rows.empty())
                continue; // header
            throw InvalidInput("malformed potential row: '" + line + "'");
        }
        if (columns == 0)
            columns = row.size();
        if (row.size() != columns || (columns != 2 && columns != 3))
            throw InvalidInput("potential rows must be 'x,value' or 'x,y,value'");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw InvalidInput("potential file '" + path + "' has no data rows");

    potentials::Sampled s;
    s.dim = static_cast<int>(columns) - 1;
    for (const auto& r : rows) {
        s.xs.push_back(r[0]);
        if (s.dim == 2)
            s.ys.push_back(r[1]);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(s.xs);
    uniq(s.ys);
    const std::size_t ny = s.dim == 2 ? s.ys.size() : 1;
    s.values.assign(s.xs.size() * ny, std::nan(""));
    for (const auto& r : rows) {
        const auto i = static_cast<std::size_t>(std::lower_bound(s.xs.begin(), s.xs.end(), r[0]) - s.xs.begin());
        std::size_t j = 0;
        if (s.dim == 2)
            j = static_cast<std::size_t>(std::lower_bound(s.ys.begin(), s.ys.end(), r[1]) - s.ys.begin());
        s.values[j * s.xs.size() + i] = r.back();
    }
    if (std::any_of(s.values.begin(), s.values.end(), [](double v) { return std::isnan(v); }))
        throw InvalidInput("potential file '" + path + "' does not cover a full tensor grid");
    return PotentialSpec(std::move(s));
}

PotentialSpec make_potential(const std::string& name, double eps, double eps1, double eps2, double value)
{
    if (name == "constant")
        return PotentialSpec(potentials::Constant{value});
    if (name == "mathieu")
        return PotentialSpec(potentials::Mathieu{eps});
    if (name == "multiplicative")
        return PotentialSpec(potentials::MultiplicativeTwoScale{eps});
    if (name == "layered")
        return PotentialSpec(potentials::Layered{eps1, eps2});
    if (name == "additive2d")
        return PotentialSpec(potentials::AdditiveTwoScale2D{eps});
    if (name == "checkerboard")
        return PotentialSpec(potentials::Checkerboard2D{eps1, eps2});
    throw InvalidInput("unknown potential '" + name + "'");
}

} // namespace msfem
