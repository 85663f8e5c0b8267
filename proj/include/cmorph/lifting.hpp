#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cmorph/cortex_geometry.hpp"
#include "cmorph/gabor_frame.hpp"

namespace cmorph {

// Probability measure on the cortical domain: unit total weight, positive
// weights, plus the raw mass it was normalized from. grid_index maps each
// point back to its pyramid node while the cloud still sits on the grid; it
// is empty once points have been moved off-grid.
struct WeightedCloud {
    std::vector<CortexPoint> points;
    std::vector<double> weights;
    double mass_scale = 0.0;
    std::vector<std::size_t> grid_index;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    double total_weight() const;
};

struct ChannelSplit {
    WeightedCloud pos;
    WeightedCloud neg;
};

enum class Channel { Even, Odd };
enum class Sign { Positive, Negative };

std::string channel_name(Channel c, Sign s);

// Positive part (Sign::Positive) or negated negative part of one signed
// channel, normalized to unit mass. Throws EmptyMeasureError when that part
// is identically zero.
WeightedCloud split_part(std::span<const double> channel, const PyramidGrid& grid, Sign sign);

// All four parts; any empty part raises EmptyMeasureError naming it.
std::pair<ChannelSplit, ChannelSplit> split_lift(const SignedLift& lift, const PyramidGrid& grid);

// Drops points below tau * max weight and renormalizes; mass_scale is kept.
WeightedCloud truncate_support(const WeightedCloud& cloud, double tau);

enum class SplatMode { Multilinear, Nearest };

std::string to_string(SplatMode mode);
SplatMode splat_mode_from_string(const std::string& name);

// Bins a cloud onto the pyramid nodes. Multilinear mode spreads each weight
// over up to 16 neighbours in (x, y, theta, sigma); theta wraps with period
// pi, x and y clamp to each level's node range, sigma clamps to the level range.
std::vector<double> deposit_to_grid(const WeightedCloud& cloud, const PyramidGrid& grid,
                                    SplatMode mode = SplatMode::Multilinear);

// m_pos * pos_field - m_neg * neg_field.
std::vector<double> recombine(std::span<const double> pos_field, std::span<const double> neg_field,
                              double m_pos, double m_neg);

}  // namespace cmorph
