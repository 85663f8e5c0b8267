#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cmorph/config.hpp"
#include "cmorph/error.hpp"
#include "cmorph/image_io.hpp"
#include "cmorph/report.hpp"
#include "cmorph/shapes.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cmorph;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cmorph_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream f(p, std::ios::binary);
    f << bytes;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

const unsigned char kGrayPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02, 0x08, 0x00, 0x00, 0x00, 0x00, 0x57, 0xdd, 0x52,
    0xf8, 0x00, 0x00, 0x00, 0x0e, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0xf8, 0xcf, 0xd0,
    0xe0, 0x00, 0x00, 0x05, 0x42, 0x01, 0xc0, 0x70, 0x36, 0x36, 0xd6, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
const unsigned char kRgbPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
    0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x02, 0x00, 0x00, 0x00, 0x90, 0x77, 0x53,
    0xde, 0x00, 0x00, 0x00, 0x0c, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x64, 0x62, 0x06,
    0x00, 0x00, 0x0e, 0x00, 0x07, 0xd7, 0x6f, 0xe4, 0x78, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e,
    0x44, 0xae, 0x42, 0x60, 0x82};

}  // namespace

TEST_CASE("config text round-trips") {
    MorphConfig cfg;
    cfg.epsilon = 0.0371;
    cfg.times = {0.0, 0.1, 1.0 / 3.0, 1.0};
    cfg.metric.h1 = 0.65;
    cfg.splat_mode = SplatMode::Nearest;
    cfg.gabor.gamma = 1.0 / 7.0;
    CHECK(parse_config(serialize_config(cfg)) == cfg);
    CHECK(parse_config(serialize_config(MorphConfig{})) == MorphConfig{});
    CHECK(parse_config("") == MorphConfig{});
    CHECK(config_keys().size() == 22u);
}

TEST_CASE("config parsing rules") {
    const MorphConfig c = parse_config("# comment\n\nD = 32\n epsilon=0.02 \ntimes = 0, 0.5, 1\n");
    CHECK(c.gabor.D == 32);
    CHECK(c.gabor.sigma_max == doctest::Approx(1.1244 * 5));
    CHECK(c.epsilon == 0.02);
    CHECK(c.times == std::vector<double>{0.0, 0.5, 1.0});
    const MorphConfig keep = parse_config("D = 32\nsigma_max = 3\n");
    CHECK(keep.gabor.sigma_max == 3.0);

    MorphConfig d = MorphConfig{};
    apply_setting(d, "D", "16");
    CHECK(d.gabor.sigma_max == doctest::Approx(1.1244 * 4));
    apply_setting(d, "n_iter", "77");
    CHECK(d.n_iter == 77);

    CHECK_THROWS_AS(parse_config("nope = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilon = 0.1\nepsilon = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilon 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilon = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("epsilon = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("splat_mode = cubic\n"), ConfigError);
    try {
        parse_config("epsilon = 0.1\n\nbogus = 2\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("PGM decoding and encoding") {
    const Image zero = decode_pgm(std::string("P5\n2 2\n255\n") + std::string(4, '\0'));
    CHECK(zero == Image(2, 2));
    const Image ones = decode_pgm(std::string("P5 2 1 255 ") + "\xff\xff");
    CHECK(ones.values == std::vector<double>{1.0, 1.0});
    const Image ascii = decode_pgm("P2\n# note\n3 1\n10\n0 5 10\n");
    CHECK(ascii.values == std::vector<double>{0.0, 0.5, 1.0});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(7, 5);
    for (double& v : img.values) v = u(rng);
    const Image back = decode_pgm(encode_pgm(img));
    REQUIRE(back.width == 7);
    REQUIRE(back.height == 5);
    double worst = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) worst = std::max(worst, std::abs(back.values[i] - img.values[i]));
    CHECK(worst <= 1.0 / 510 + 1e-12);
    CHECK(decode_pgm(encode_pgm(back)) == back);

    CHECK_THROWS_AS(decode_pgm("P6\n1 1\n255\n\x01\x02\x03"), IoError);
    CHECK_THROWS_AS(decode_pgm("P5\n1 1\n65535\n\x01\x02"), IoError);
    try {
        decode_pgm("P5\n4 4\n255\n\x01\x02");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
}

TEST_CASE("image files") {
    const fs::path dir = scratch_dir("io");
    const Image T = letter_image('T', 16);
    save_pgm(T, (dir / "t.pgm").string());
    CHECK(load_image((dir / "t.pgm").string(), 16) == T);
    CHECK_THROWS_AS(load_image((dir / "t.pgm").string(), 32), ConfigError);
    CHECK_THROWS_AS(load_image((dir / "missing.pgm").string()), IoError);

    write_bytes(dir / "g.png", std::string(reinterpret_cast<const char*>(kGrayPng), sizeof kGrayPng));
    const Image g = load_image((dir / "g.png").string());
    CHECK(g.values == std::vector<double>{0.0, 1.0, 128.0 / 255, 64.0 / 255});
    write_bytes(dir / "c.png", std::string(reinterpret_cast<const char*>(kRgbPng), sizeof kRgbPng));
    CHECK_THROWS_AS(load_image((dir / "c.png").string()), IoError);
    write_bytes(dir / "bad.png", std::string(reinterpret_cast<const char*>(kGrayPng), 40));
    CHECK_THROWS_AS(load_image((dir / "bad.png").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("sequence output") {
    MorphConfig cfg;
    cfg.gabor = GaborParams::for_image_side(16);
    cfg.epsilon = 0.0437;
    cfg.n_iter = 1234;
    cfg.metric = {0.61, 4.5};
    const Image a = letter_image('T', 16), b = letter_image('E', 16);
    const FrameSequence seq = planar_baseline(a, b, cfg);

    const fs::path dir = scratch_dir("seq");
    const std::string manifest = save_sequence(seq, cfg, "planar", dir.string());
    std::size_t pgm = 0, json = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        pgm += e.path().extension() == ".pgm";
        json += e.path().extension() == ".json";
    }
    CHECK(pgm == 10u);
    CHECK(json == 1u);
    CHECK(fs::exists(dir / "frame_t0.25_sharp.pgm"));
    CHECK(fs::exists(dir / "frame_t1.00_raw.pgm"));

    const auto j = nlohmann::json::parse(read_bytes(manifest));
    CHECK(j["pipeline"] == "planar");
    CHECK(j["config"]["epsilon"].get<double>() == 0.0437);
    CHECK(j["config"]["n_iter"].get<int>() == 1234);
    CHECK(j["config"]["h1"].get<double>() == 0.61);
    CHECK(j["config"]["h2"].get<double>() == 4.5);
    CHECK(j["frames"].size() == 5u);
    CHECK(read_bytes(manifest) == manifest_json(seq, cfg, "planar"));

    // Overwriting yields the same bytes.
    std::vector<std::string> before;
    for (const char* f : {"manifest.json", "frame_t0.50_raw.pgm", "frame_t0.75_sharp.pgm"})
        before.push_back(read_bytes(dir / f));
    save_sequence(planar_baseline(a, b, cfg), cfg, "planar", dir.string());
    int k = 0;
    for (const char* f : {"manifest.json", "frame_t0.50_raw.pgm", "frame_t0.75_sharp.pgm"})
        CHECK(read_bytes(dir / f) == before[k++]);
    fs::remove_all(dir);
    CHECK(time_label(0.25) == "0.25");
}

TEST_CASE("verify suite") {
    VerifyOptions opts;
    opts.monte_carlo_samples = 1'000'000;
    const VerifyReport ok = run_verify(opts);
    CHECK(ok.all_passed());
    CHECK(ok.checks.size() >= 5u);
    for (const VerifyCheck& c : ok.checks) CHECK_MESSAGE(c.passed, c.name);

    const VerifyReport again = run_verify(opts);
    for (std::size_t i = 0; i < ok.checks.size(); ++i) CHECK(again.checks[i].measured == ok.checks[i].measured);

    opts.gamma = 0.0;
    const VerifyReport bad = run_verify(opts);
    CHECK_FALSE(bad.all_passed());
    for (const VerifyCheck& c : bad.checks)
        if (c.name == "alpha_finite_difference") CHECK_FALSE(c.passed);
}
