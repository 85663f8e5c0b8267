#include "cmorph/morph.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "cmorph/error.hpp"
#include "cmorph/transport.hpp"

namespace cmorph {

void MorphConfig::validate() const {
    gabor.validate();
    metric.validate();
    auto bad = [](const std::string& what) { throw ConfigError("morph_pipeline", "validate", what); };
    if (!(epsilon > 0.0)) bad("epsilon must be positive");
    if (!(baseline_epsilon > 0.0)) bad("baseline_epsilon must be positive");
    if (n_iter <= 0 || baseline_n_iter <= 0) bad("iteration caps must be positive");
    if (!(tol >= 0.0)) bad("tol must be non-negative");
    if (!(tau >= 0.0 && tau < 1.0)) bad("tau must lie in [0, 1)");
    if (!(sigmoid_k > 0.0)) bad("sigmoid_k must be positive");
    if (!std::isfinite(sigmoid_z0)) bad("sigmoid_z0 must be finite");
    if (times.size() < 2 || times.front() != 0.0 || times.back() != 1.0)
        bad("times must start at 0 and end at 1");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) bad("times must be strictly increasing");
}

std::string to_string(PathKind kind) {
    switch (kind) {
        case PathKind::Transport: return "transport";
        case PathKind::Constant: return "constant";
        case PathKind::LinearBlend: return "linear_blend";
    }
    return "unknown";
}

Image sigmoid_threshold(const Image& img, double k, double z0) {
    Image out = img;
    for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-k * (v - z0)));
    return out;
}

int configured_threads() {
    if (const char* env = std::getenv("CMORPH_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 64L));
        throw ConfigError("morph_pipeline", "configured_threads",
                          std::string("CMORPH_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs jobs[0..n) on up to `threads` workers. Each job writes only its own
// slot, so the outcome does not depend on scheduling. The first failure (by
// job index) is rethrown.
void run_jobs(std::vector<std::function<void()>>& jobs, int threads) {
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < jobs.size();) {
            try {
                jobs[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::min<int>(threads, static_cast<int>(jobs.size()));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<double> signed_part(const std::vector<double>& channel, Sign sign) {
    std::vector<double> out(channel.size());
    for (std::size_t i = 0; i < channel.size(); ++i)
        out[i] = sign == Sign::Positive ? std::max(channel[i], 0.0) : -std::min(channel[i], 0.0);
    return out;
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

struct PartResult {
    ChannelDiagnostics diag;
    std::vector<std::vector<double>> fields;  // one per time, non-negative
};

PartResult carry_part(const std::vector<double>& part0, const std::vector<double>& part1,
                      const PyramidGrid& grid, const MorphConfig& cfg, const std::string& name) {
    PartResult res;
    ChannelDiagnostics& dg = res.diag;
    dg.name = name;
    dg.mass0 = sum(part0);
    dg.mass1 = sum(part1);
    const auto& times = cfg.times;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double t : times) dg.mass_at.push_back((1.0 - t) * dg.mass0 + t * dg.mass1);
    dg.cloud_weight_at.assign(times.size(), nan);

    if (part0 == part1) {
        dg.path = PathKind::Constant;
        res.fields.assign(times.size(), part0);
        return res;
    }
    if (!(dg.mass0 > 0.0) || !(dg.mass1 > 0.0)) {
        dg.path = PathKind::LinearBlend;
        for (double t : times) {
            std::vector<double> f(part0.size());
            for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - t) * part0[i] + t * part1[i];
            res.fields.push_back(std::move(f));
        }
        return res;
    }

    dg.path = PathKind::Transport;
    const WeightedCloud src = truncate_support(split_part(part0, grid, Sign::Positive), cfg.tau);
    const WeightedCloud dst = truncate_support(split_part(part1, grid, Sign::Positive), cfg.tau);
    dg.support0 = src.size();
    dg.support1 = dst.size();
    const CostMatrix C = build_cost_matrix(src, dst, cfg.metric);
    const TransportPlan plan = sinkhorn(src.weights, dst.weights, C, cfg.epsilon, cfg.n_iter, cfg.tol);
    dg.iterations = plan.iterations_run;
    dg.marginal_residual = plan.marginal_residual;
    dg.transport_cost = plan.cost(C);

    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t == 0.0) {
            res.fields.push_back(part0);
            continue;
        }
        if (t == 1.0) {
            res.fields.push_back(part1);
            continue;
        }
        const WeightedCloud cloud = interpolate_plan(plan, src, dst, t, cfg.metric);
        dg.cloud_weight_at[k] = cloud.total_weight();
        std::vector<double> f = deposit_to_grid(cloud, grid, cfg.splat_mode);
        for (double& x : f) x *= dg.mass_at[k];
        res.fields.push_back(std::move(f));
    }
    return res;
}

void check_inputs(const Image& I0, const Image& I1, int D, const char* op) {
    for (const Image* im : {&I0, &I1}) {
        if (im->width != D || im->height != D)
            throw ShapeError("morph_pipeline", op,
                             "images must be " + std::to_string(D) + "x" + std::to_string(D) +
                                 ", got " + std::to_string(im->width) + "x" +
                                 std::to_string(im->height));
        bool nonzero = false;
        for (double v : im->values) {
            if (!(v >= 0.0 && v <= 1.0))
                throw DomainError("morph_pipeline", op, "pixel values must lie in [0,1]");
            nonzero = nonzero || v > 0.0;
        }
        if (!nonzero) throw EmptyMeasureError("morph_pipeline", op, "input image is identically zero");
    }
}

Frame make_frame(double t, Image raw, const MorphConfig& cfg) {
    Frame f;
    f.t = t;
    f.sharpened = sigmoid_threshold(clamp01(raw), cfg.sigmoid_k, cfg.sigmoid_z0);
    f.raw = std::move(raw);
    return f;
}

}  // namespace

FrameSequence morph(const Image& I0, const Image& I1, const MorphConfig& cfg) {
    cfg.validate();
    const GaborParams& p = cfg.gabor;
    check_inputs(I0, I1, p.D, "morph");

    const PyramidGrid grid = build_pyramid_grid(p);
    const std::array<Image, 2> pair{I0, I1};
    FrameSequence seq;
    seq.frame_constant = calibrate_frame_constant(grid, p, pair);

    const SignedLift lift0 = analyze(I0, grid, p);
    const SignedLift lift1 = analyze(I1, grid, p);

    struct Slot {
        Channel channel;
        Sign sign;
    };
    const std::array<Slot, 4> slots{{{Channel::Even, Sign::Positive},
                                     {Channel::Even, Sign::Negative},
                                     {Channel::Odd, Sign::Positive},
                                     {Channel::Odd, Sign::Negative}}};
    std::array<PartResult, 4> results;
    std::vector<std::function<void()>> jobs;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        jobs.emplace_back([&, s] {
            const Slot& sl = slots[s];
            const std::string name = channel_name(sl.channel, sl.sign);
            const auto& c0 = sl.channel == Channel::Even ? lift0.even : lift0.odd;
            const auto& c1 = sl.channel == Channel::Even ? lift1.even : lift1.odd;
            try {
                results[s] = carry_part(signed_part(c0, sl.sign), signed_part(c1, sl.sign), grid, cfg,
                                        name);
            } catch (const NumericalError& e) {
                throw NumericalError("morph_pipeline", "morph", name + ": " + e.what());
            } catch (const Error& e) {
                throw Error("morph_pipeline", "morph", name + ": " + e.what());
            }
        });
    }
    run_jobs(jobs, configured_threads());

    for (std::size_t k = 0; k < cfg.times.size(); ++k) {
        const double t = cfg.times[k];
        Image raw;
        if (t == 0.0) {
            raw = synthesize(lift0, grid, p, seq.frame_constant);
        } else if (t == 1.0) {
            raw = synthesize(lift1, grid, p, seq.frame_constant);
        } else {
            SignedLift lt;
            lt.even = recombine(results[0].fields[k], results[1].fields[k], 1.0, 1.0);
            lt.odd = recombine(results[2].fields[k], results[3].fields[k], 1.0, 1.0);
            raw = synthesize(lt, grid, p, seq.frame_constant);
        }
        seq.frames.push_back(make_frame(t, std::move(raw), cfg));
    }
    for (auto& r : results) seq.channels.push_back(std::move(r.diag));
    return seq;
}

FrameSequence planar_baseline(const Image& I0, const Image& I1, const MorphConfig& cfg) {
    cfg.validate();
    const int D = cfg.gabor.D;
    check_inputs(I0, I1, D, "planar_baseline");

    struct Density {
        std::vector<double> x, y, w;
        double mass = 0.0;
    };
    auto density = [](const Image& im) {
        Density d;
        for (int r = 0; r < im.height; ++r)
            for (int c = 0; c < im.width; ++c)
                if (const double v = im.at(c, r); v > 0.0) {
                    d.x.push_back(c);
                    d.y.push_back(r);
                    d.w.push_back(v);
                    d.mass += v;
                }
        for (double& w : d.w) w /= d.mass;
        return d;
    };
    const Density a = density(I0), b = density(I1);

    CostMatrix C;
    C.rows = a.w.size();
    C.cols = b.w.size();
    C.data.resize(C.rows * C.cols);
    for (std::size_t i = 0; i < C.rows; ++i)
        for (std::size_t j = 0; j < C.cols; ++j) {
            const double dx = a.x[i] - b.x[j], dy = a.y[i] - b.y[j];
            C(i, j) = dx * dx + dy * dy;
        }
    TransportPlan plan;
    try {
        plan = sinkhorn(a.w, b.w, C, cfg.baseline_epsilon, cfg.baseline_n_iter, cfg.tol);
    } catch (const NumericalError& e) {
        throw NumericalError("morph_pipeline", "planar_baseline", std::string("planar: ") + e.what());
    }

    FrameSequence seq;
    seq.frame_constant = 1.0;
    ChannelDiagnostics dg;
    dg.name = "planar";
    dg.mass0 = a.mass;
    dg.mass1 = b.mass;
    dg.support0 = C.rows;
    dg.support1 = C.cols;
    dg.iterations = plan.iterations_run;
    dg.marginal_residual = plan.marginal_residual;
    dg.transport_cost = plan.cost(C);

    for (double t : cfg.times) {
        const double mt = (1.0 - t) * a.mass + t * b.mass;
        double total = 0.0;
        for (double w : plan.matrix)
            if (w > kPlanWeightFloor) total += w;
        Image raw(D, D);
        double kept = 0.0;
        for (std::size_t i = 0; i < C.rows; ++i) {
            for (std::size_t j = 0; j < C.cols; ++j) {
                const double w = plan(i, j);
                if (!(w > kPlanWeightFloor)) continue;
                const double wn = w / total;
                kept += wn;
                const double x = std::clamp((1.0 - t) * a.x[i] + t * b.x[j], 0.0, D - 1.0);
                const double y = std::clamp((1.0 - t) * a.y[i] + t * b.y[j], 0.0, D - 1.0);
                const int x0 = std::min(static_cast<int>(std::floor(x)), D - 2 < 0 ? 0 : D - 2);
                const int y0 = std::min(static_cast<int>(std::floor(y)), D - 2 < 0 ? 0 : D - 2);
                const double fx = x - x0, fy = y - y0;
                const double m = mt * wn;
                raw.at(x0, y0) += m * (1 - fx) * (1 - fy);
                if (D > 1) {
                    raw.at(x0 + 1, y0) += m * fx * (1 - fy);
                    raw.at(x0, y0 + 1) += m * (1 - fx) * fy;
                    raw.at(x0 + 1, y0 + 1) += m * fx * fy;
                }
            }
        }
        dg.mass_at.push_back(mt);
        dg.cloud_weight_at.push_back(kept);
        seq.frames.push_back(make_frame(t, std::move(raw), cfg));
    }
    seq.channels.push_back(std::move(dg));
    return seq;
}

int count_components(const Image& img, double threshold) {
    const int W = img.width, H = img.height;
    std::vector<char> seen(img.size(), 0);
    std::vector<int> stack;
    int count = 0;
    for (int start = 0; start < W * H; ++start) {
        if (seen[start] || !(img.values[start] >= threshold)) continue;
        ++count;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            const int c = cur % W, r = cur / W;
            const int nb[4][2] = {{c - 1, r}, {c + 1, r}, {c, r - 1}, {c, r + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[0] >= W || q[1] < 0 || q[1] >= H) continue;
                const int idx = q[1] * W + q[0];
                if (!seen[idx] && img.values[idx] >= threshold) {
                    seen[idx] = 1;
                    stack.push_back(idx);
                }
            }
        }
    }
    return count;
}

ShapeMetrics shape_metrics(const Image& frame, const Image& reference, double threshold) {
    if (frame.width != reference.width || frame.height != reference.height)
        throw ShapeError("morph_pipeline", "shape_metrics", "images differ in size");
    ShapeMetrics m;
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const bool a = frame.values[i] >= threshold;
        const bool b = reference.values[i] >= threshold;
        m.area_frame += a;
        m.area_reference += b;
        inter += a && b;
        uni += a || b;
    }
    m.components_frame = count_components(frame, threshold);
    m.components_reference = count_components(reference, threshold);
    m.empty_foreground = m.area_frame == 0 || m.area_reference == 0;
    m.iou = m.empty_foreground ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    return m;
}

}  // namespace cmorph
