#include "cmorph/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"

#include "cmorph/config.hpp"
#include "cmorph/error.hpp"
#include "cmorph/frame_identities.hpp"
#include "cmorph/image_io.hpp"

namespace cmorph {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(); }

ordered_json config_json(const MorphConfig& c) {
    ordered_json j;
    const GaborParams& g = c.gabor;
    j["D"] = g.D;
    j["gamma"] = g.gamma;
    j["omega"] = g.omega;
    j["a0"] = g.a0;
    j["b0"] = g.b0;
    j["d"] = g.d;
    j["sigma_min"] = g.sigma_min;
    j["sigma_max"] = g.sigma_max;
    j["r_cut"] = g.r_cut;
    j["h1"] = c.metric.h1;
    j["h2"] = c.metric.h2;
    j["epsilon"] = c.epsilon;
    j["n_iter"] = c.n_iter;
    j["tol"] = c.tol;
    j["tau"] = c.tau;
    j["times"] = c.times;
    j["sigmoid_k"] = c.sigmoid_k;
    j["sigmoid_z0"] = c.sigmoid_z0;
    j["splat_mode"] = to_string(c.splat_mode);
    j["baseline_epsilon"] = c.baseline_epsilon;
    j["baseline_n_iter"] = c.baseline_n_iter;
    j["metric_threshold"] = c.metric_threshold;
    return j;
}

std::string frame_name(double t, const char* variant) {
    return "frame_t" + time_label(t) + "_" + variant + ".pgm";
}

}  // namespace

std::string time_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", t);
    return buf;
}

std::string manifest_json(const FrameSequence& seq, const MorphConfig& cfg,
                          const std::string& pipeline) {
    ordered_json m;
    m["pipeline"] = pipeline;
    m["config"] = config_json(cfg);
    m["frame_constant"] = seq.frame_constant;

    const Image* first = seq.frames.empty() ? nullptr : &seq.frames.front().sharpened;
    const Image* last = seq.frames.empty() ? nullptr : &seq.frames.back().sharpened;
    ordered_json frames = ordered_json::array();
    for (const Frame& f : seq.frames) {
        ordered_json j;
        j["t"] = f.t;
        j["raw"] = frame_name(f.t, "raw");
        j["sharpened"] = frame_name(f.t, "sharp");
        j["raw_total"] = total_mass(f.raw);
        const ShapeMetrics m0 = shape_metrics(f.sharpened, *first, cfg.metric_threshold);
        const ShapeMetrics m1 = shape_metrics(f.sharpened, *last, cfg.metric_threshold);
        j["metrics"] = {{"threshold", cfg.metric_threshold},
                        {"foreground_area", m0.area_frame},
                        {"components", m0.components_frame},
                        {"iou_vs_start", m0.iou},
                        {"iou_vs_end", m1.iou},
                        {"empty_foreground", m0.area_frame == 0}};
        frames.push_back(j);
    }
    m["frames"] = frames;

    ordered_json channels = ordered_json::array();
    for (const ChannelDiagnostics& c : seq.channels) {
        ordered_json j;
        j["name"] = c.name;
        j["path"] = to_string(c.path);
        j["mass0"] = c.mass0;
        j["mass1"] = c.mass1;
        j["support0"] = c.support0;
        j["support1"] = c.support1;
        j["sinkhorn_iterations"] = c.iterations;
        j["marginal_residual"] = c.marginal_residual;
        j["transport_cost"] = c.transport_cost;
        j["mass_at"] = c.mass_at;
        ordered_json w = ordered_json::array();
        for (double x : c.cloud_weight_at) w.push_back(number_or_null(x));
        j["cloud_weight_at"] = w;
        channels.push_back(j);
    }
    m["channels"] = channels;
    return m.dump(2) + "\n";
}

std::string save_sequence(const FrameSequence& seq, const MorphConfig& cfg,
                          const std::string& pipeline, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cli_io", "save_sequence", "cannot create '" + dir + "': " + ec.message());
    for (const Frame& f : seq.frames) {
        save_pgm(f.raw, (fs::path(dir) / frame_name(f.t, "raw")).string());
        save_pgm(f.sharpened, (fs::path(dir) / frame_name(f.t, "sharp")).string());
    }
    const std::string path = (fs::path(dir) / "manifest.json").string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cli_io", "save_sequence", "cannot write '" + path + "'");
    out << manifest_json(seq, cfg, pipeline);
    if (!out) throw IoError("cli_io", "save_sequence", "write failed for '" + path + "'");
    return path;
}

bool VerifyReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

VerifyReport run_verify(const VerifyOptions& opts) {
    VerifyReport rep;
    auto add = [&](std::string name, double measured, double tol, bool ok, std::string detail = {}) {
        rep.checks.push_back({std::move(name), measured, tol, ok, std::move(detail)});
    };

    const ZeroMassBox box;
    const double z0 = verify_zero_mass(box);
    const double z1 = verify_zero_mass(box, 3.0, -2.0);
    add("zero_mass", std::abs(z0), 1e-6, std::abs(z0) <= 1e-6);
    add("zero_mass_translation", std::abs(z1 - z0), 1e-8, std::abs(z1 - z0) <= 1e-8);

    const double cq = compute_C_psi();
    const MonteCarloEstimate mc = monte_carlo_C_psi(opts.monte_carlo_samples, opts.seed);
    const double rel = std::abs(cq - mc.value) / cq;
    add("c_psi_monte_carlo", rel, 0.01, rel <= 0.01,
        "quadrature " + std::to_string(cq) + ", monte carlo " + std::to_string(mc.value) + " +- " +
            std::to_string(mc.std_error));

    std::mt19937_64 rng(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    double worst = 0.0;
    for (int i = 0; i < 20;) {
        const double x1 = u(rng), x2 = u(rng);
        if (std::abs(x2) < 0.05) continue;  // psi0_hat vanishes on xi2 = 0
        const auto a = psi0_hat(x1, x2);
        const auto b = psi0_hat_quadrature(x1, x2);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
        ++i;
    }
    add("psi0_hat_quadrature", worst, 1e-6, worst <= 1e-6);

    const AlphaCheck ac = check_alpha_field(100, opts.seed, opts.gamma);
    add("alpha_finite_difference", ac.max_relative_error, 1e-4, ac.max_relative_error <= 1e-4);

    const ReconstructionBox boxes[3] = {{0.25, 4.0, 3.0}, {0.125, 8.0, 6.0}, {0.0625, 16.0, 12.0}};
    double errs[3];
    for (int i = 0; i < 3; ++i) errs[i] = truncated_reconstruction_error(boxes[i], cq);
    const bool monotone = errs[1] < errs[0] && errs[2] < errs[1];
    add("truncated_reconstruction", errs[2], errs[1], monotone,
        "errors " + std::to_string(errs[0]) + " > " + std::to_string(errs[1]) + " > " +
            std::to_string(errs[2]));

    const double lhs = plancherel_lhs(0.3, -0.2, 1.0, -0.5, 0.4, 1.5);
    const double rhs = cq * gaussian_inner_product(0.3, -0.2, 1.0, -0.5, 0.4, 1.5);
    const double prel = std::abs(lhs - rhs) / std::abs(rhs);
    add("plancherel", prel, 0.02, prel <= 0.02);
    return rep;
}

}  // namespace cmorph
