#include "cmorph/lifting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cmorph/error.hpp"

namespace cmorph {

double WeightedCloud::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

std::string channel_name(Channel c, Sign s) {
    std::string name = c == Channel::Even ? "even" : "odd";
    name += s == Sign::Positive ? "+" : "-";
    return name;
}

WeightedCloud split_part(std::span<const double> channel, const PyramidGrid& grid, Sign sign) {
    if (channel.size() != grid.size())
        throw ShapeError("lifting", "split_lift", "channel size does not match the pyramid grid");
    WeightedCloud cloud;
    double mass = 0.0;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        const double v = channel[i];
        if (!std::isfinite(v)) throw DomainError("lifting", "split_lift", "non-finite lift entry");
        const double part = sign == Sign::Positive ? std::max(v, 0.0) : -std::min(v, 0.0);
        if (part > 0.0) {
            cloud.points.push_back(grid.point(i));
            cloud.weights.push_back(part);
            cloud.grid_index.push_back(i);
            mass += part;
        }
    }
    if (cloud.empty())
        throw EmptyMeasureError("lifting", "split_lift",
                                std::string(sign == Sign::Positive ? "positive" : "negative") +
                                    " part of the channel is identically zero");
    for (double& w : cloud.weights) w /= mass;
    cloud.mass_scale = mass;
    return cloud;
}

std::pair<ChannelSplit, ChannelSplit> split_lift(const SignedLift& lift, const PyramidGrid& grid) {
    auto part = [&](const std::vector<double>& ch, Channel c, Sign s) {
        try {
            return split_part(ch, grid, s);
        } catch (const EmptyMeasureError&) {
            throw EmptyMeasureError("lifting", "split_lift", channel_name(c, s) + " part is empty");
        }
    };
    ChannelSplit even{part(lift.even, Channel::Even, Sign::Positive),
                      part(lift.even, Channel::Even, Sign::Negative)};
    ChannelSplit odd{part(lift.odd, Channel::Odd, Sign::Positive),
                     part(lift.odd, Channel::Odd, Sign::Negative)};
    return {std::move(even), std::move(odd)};
}

WeightedCloud truncate_support(const WeightedCloud& cloud, double tau) {
    if (!(tau >= 0.0 && tau < 1.0))
        throw DomainError("lifting", "truncate_support", "tau must lie in [0, 1)");
    if (cloud.empty()) throw EmptyMeasureError("lifting", "truncate_support", "empty cloud");
    const double wmax = *std::max_element(cloud.weights.begin(), cloud.weights.end());
    const double floor = tau * wmax;
    const bool indexed = cloud.grid_index.size() == cloud.size();
    WeightedCloud out;
    out.mass_scale = cloud.mass_scale;
    double kept = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.weights[i] < floor) continue;
        out.points.push_back(cloud.points[i]);
        out.weights.push_back(cloud.weights[i]);
        if (indexed) out.grid_index.push_back(cloud.grid_index[i]);
        kept += cloud.weights[i];
    }
    if (out.empty() || !(kept > 0.0))
        throw EmptyMeasureError("lifting", "truncate_support", "every point fell below the floor");
    for (double& w : out.weights) w /= kept;
    return out;
}

std::string to_string(SplatMode mode) {
    return mode == SplatMode::Multilinear ? "multilinear" : "nearest";
}

SplatMode splat_mode_from_string(const std::string& name) {
    if (name == "multilinear") return SplatMode::Multilinear;
    if (name == "nearest") return SplatMode::Nearest;
    throw ConfigError("lifting", "splat_mode", "unknown splat mode '" + name + "'");
}

namespace {

struct Tap {
    int index;
    double weight;
};

// Two-node linear stencil along one axis with nodes 0..count-1 at spacing h.
std::array<Tap, 2> axis_stencil(double coord, double h, int count) {
    if (count <= 1) return {{{0, 1.0}, {0, 0.0}}};
    const double u = std::clamp(coord / h, 0.0, static_cast<double>(count - 1));
    int i0 = static_cast<int>(std::floor(u));
    if (i0 >= count - 1) i0 = count - 2;
    const double f = u - i0;
    return {{{i0, 1.0 - f}, {i0 + 1, f}}};
}

int nearest_node(double coord, double h, int count) {
    const double u = std::clamp(coord / h, 0.0, static_cast<double>(count - 1));
    return std::min(static_cast<int>(std::lround(u)), count - 1);
}

}  // namespace

std::vector<double> deposit_to_grid(const WeightedCloud& cloud, const PyramidGrid& grid,
                                    SplatMode mode) {
    std::vector<double> field(grid.size(), 0.0);
    const auto& levels = grid.levels();
    const int nlev = static_cast<int>(levels.size());
    const int d = grid.orientations();
    const double dtheta = std::numbers::pi / d;
    // Orientation slot j in 0..d-1 sits at j*pi/d; slot 0 is l = d.
    auto l_of_slot = [d](int j) { return j == 0 ? d : j; };

    for (std::size_t p = 0; p < cloud.size(); ++p) {
        const CortexPoint q = canonical(cloud.points[p]);
        const double w = cloud.weights[p];
        const double sig = std::clamp(q.sigma, levels.front().sigma, levels.back().sigma);

        if (mode == SplatMode::Nearest) {
            int best = 0;
            for (int m = 1; m < nlev; ++m)
                if (std::abs(levels[m].sigma - sig) < std::abs(levels[best].sigma - sig)) best = m;
            const PyramidLevel& lv = levels[best];
            const int n = nearest_node(q.x, lv.stride, lv.count);
            const int k = nearest_node(q.y, lv.stride, lv.count);
            const int j = static_cast<int>(std::lround(q.theta / dtheta)) % d;
            field[grid.index_of(best, n, k, l_of_slot(j))] += w;
            continue;
        }

        std::array<Tap, 2> lev{{{0, 1.0}, {0, 0.0}}};
        if (nlev > 1) {
            int m0 = 0;
            while (m0 + 2 < nlev && sig > levels[m0 + 1].sigma) ++m0;
            const double f = (sig - levels[m0].sigma) / (levels[m0 + 1].sigma - levels[m0].sigma);
            lev = {{{m0, 1.0 - f}, {m0 + 1, f}}};
        }
        const double u = q.theta / dtheta;
        int j0 = static_cast<int>(std::floor(u));
        const double ft = u - j0;
        j0 %= d;
        const std::array<Tap, 2> ori{{{j0, 1.0 - ft}, {(j0 + 1) % d, ft}}};

        for (const Tap& lt : lev) {
            if (lt.weight == 0.0) continue;
            const PyramidLevel& lv = levels[lt.index];
            const auto xs = axis_stencil(q.x, lv.stride, lv.count);
            const auto ys = axis_stencil(q.y, lv.stride, lv.count);
            for (const Tap& ot : ori) {
                if (ot.weight == 0.0) continue;
                for (const Tap& yt : ys) {
                    if (yt.weight == 0.0) continue;
                    for (const Tap& xt : xs) {
                        if (xt.weight == 0.0) continue;
                        field[grid.index_of(lt.index, xt.index, yt.index, l_of_slot(ot.index))] +=
                            w * lt.weight * ot.weight * yt.weight * xt.weight;
                    }
                }
            }
        }
    }
    return field;
}

std::vector<double> recombine(std::span<const double> pos_field, std::span<const double> neg_field,
                              double m_pos, double m_neg) {
    if (pos_field.size() != neg_field.size())
        throw ShapeError("lifting", "recombine", "field sizes differ");
    std::vector<double> out(pos_field.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m_pos * pos_field[i] - m_neg * neg_field[i];
    return out;
}

}  // namespace cmorph
