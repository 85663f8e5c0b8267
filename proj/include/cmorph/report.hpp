#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmorph/morph.hpp"

namespace cmorph {

// "0.25" style label used in frame file names.
std::string time_label(double t);

// Writes frame_t{t}_raw.pgm and frame_t{t}_sharp.pgm for every frame plus
// manifest.json (schema in README). `pipeline` is "cortical" or "planar".
// Output is a pure function of the arguments. Returns the manifest path.
std::string save_sequence(const FrameSequence& seq, const MorphConfig& cfg,
                          const std::string& pipeline, const std::string& dir);

// Manifest text exactly as save_sequence writes it.
std::string manifest_json(const FrameSequence& seq, const MorphConfig& cfg,
                          const std::string& pipeline);

struct VerifyOptions {
    std::uint64_t seed = 20240601;
    std::uint64_t monte_carlo_samples = 10'000'000;
    // Envelope anisotropy of the continuous mother fed to the finite
    // differences; anything but 1 is a wrong model and must fail.
    double gamma = 1.0;
};

struct VerifyCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;
};

VerifyReport run_verify(const VerifyOptions& opts = {});

}  // namespace cmorph
