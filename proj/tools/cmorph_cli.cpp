#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cmorph/config.hpp"
#include "cmorph/error.hpp"
#include "cmorph/gabor_frame.hpp"
#include "cmorph/image_io.hpp"
#include "cmorph/morph.hpp"
#include "cmorph/report.hpp"

using namespace cmorph;

namespace {

struct PipelineArgs {
    std::string in0, in1, out_dir, config_path;
    std::map<std::string, std::string> overrides;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
    cmd->add_option("I0", a.in0, "start image (PGM or PNG)")->required()->check(CLI::ExistingFile);
    cmd->add_option("I1", a.in1, "end image (PGM or PNG)")->required()->check(CLI::ExistingFile);
    cmd->add_option("-o,--output", a.out_dir, "output directory")->required();
    cmd->add_option("--config", a.config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    for (const std::string& key : config_keys())
        cmd->add_option_function<std::string>(
            "--" + key, [&a, key](const std::string& v) { a.overrides[key] = v; },
            "override config key " + key);
}

MorphConfig resolve_config(const PipelineArgs& a) {
    MorphConfig cfg = a.config_path.empty() ? MorphConfig{} : load_config(a.config_path);
    // D first so that an explicit sigma_max still wins over the derived one.
    if (auto it = a.overrides.find("D"); it != a.overrides.end()) apply_setting(cfg, "D", it->second);
    for (const auto& [k, v] : a.overrides)
        if (k != "D") apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
}

int run_pipeline(const PipelineArgs& a, bool cortical) {
    const MorphConfig cfg = resolve_config(a);
    const Image I0 = load_image(a.in0, cfg.gabor.D);
    const Image I1 = load_image(a.in1, cfg.gabor.D);
    const FrameSequence seq = cortical ? morph(I0, I1, cfg) : planar_baseline(I0, I1, cfg);
    const std::string manifest =
        save_sequence(seq, cfg, cortical ? "cortical" : "planar", a.out_dir);
    for (const auto& c : seq.channels)
        std::printf("%-7s %-12s iterations=%d residual=%.3e cost=%.6g\n", c.name.c_str(),
                    to_string(c.path).c_str(), c.iterations, c.marginal_residual, c.transport_cost);
    std::printf("wrote %zu frames and %s\n", 2 * seq.frames.size(), manifest.c_str());
    return 0;
}

int run_verify_cmd(const VerifyOptions& opts) {
    const VerifyReport rep = run_verify(opts);
    for (const auto& c : rep.checks) {
        std::printf("%-4s %-26s measured=%.3e tolerance=%.3e", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.measured, c.tolerance);
        if (!c.detail.empty()) std::printf("  (%s)", c.detail.c_str());
        std::printf("\n");
    }
    if (rep.all_passed()) return 0;
    std::fprintf(stderr, "verify failed:");
    for (const auto& c : rep.checks)
        if (!c.passed) std::fprintf(stderr, " %s", c.name.c_str());
    std::fprintf(stderr, "\n");
    return 1;
}

int run_calibrate(const std::vector<std::string>& paths, const PipelineArgs& a) {
    const MorphConfig cfg = resolve_config(a);
    std::vector<Image> imgs;
    for (const auto& p : paths) imgs.push_back(load_image(p, cfg.gabor.D));
    const PyramidGrid grid = build_pyramid_grid(cfg.gabor);
    const double C = calibrate_frame_constant(grid, cfg.gabor, imgs);
    std::printf("frame_constant %.17g\n", C);
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        const Image rec = synthesize(analyze(imgs[i], grid, cfg.gabor), grid, cfg.gabor, C);
        std::printf("%s relative_l2_error %.6f\n", paths[i].c_str(), relative_l2_error(rec, imgs[i]));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cortical image morphing by optimal transport on a Gabor lift"};
    app.require_subcommand(1);

    PipelineArgs morph_args, base_args, cal_args;
    auto* morph_cmd = app.add_subcommand("morph", "cortical morph between two images");
    add_pipeline_options(morph_cmd, morph_args);
    auto* base_cmd = app.add_subcommand("baseline", "planar optimal transport baseline");
    add_pipeline_options(base_cmd, base_args);

    VerifyOptions vopts;
    auto* verify_cmd = app.add_subcommand("verify", "numerical checks of the analytic identities");
    verify_cmd->add_option("--seed", vopts.seed, "random seed for sampled checks");
    verify_cmd->add_option("--samples", vopts.monte_carlo_samples, "Monte-Carlo sample count");
    verify_cmd->add_option("--gamma", vopts.gamma,
                           "envelope anisotropy of the differentiated mother (1 is correct)");

    std::vector<std::string> cal_paths;
    auto* cal_cmd = app.add_subcommand("calibrate", "least-squares frame constant for images");
    cal_cmd->add_option("images", cal_paths, "calibration images")->required()->check(CLI::ExistingFile);
    cal_cmd->add_option("--config", cal_args.config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);
    for (const std::string& key : config_keys())
        cal_cmd->add_option_function<std::string>(
            "--" + key, [&cal_args, key](const std::string& v) { cal_args.overrides[key] = v; },
            "override config key " + key);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; usage errors share the error status.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*morph_cmd) return run_pipeline(morph_args, true);
        if (*base_cmd) return run_pipeline(base_args, false);
        if (*verify_cmd) return run_verify_cmd(vopts);
        if (*cal_cmd) return run_calibrate(cal_paths, cal_args);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s::%s]: %s\n", e.module().c_str(), e.operation().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
