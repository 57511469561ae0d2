#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "nematic/cli.hpp"

using namespace nematic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nematic_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    args.insert(args.begin(), "nematic-ldp");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream o, e;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

const char* kSmall = R"(seed = 3
[grid]
modes = 8
[solver]
dt = 0.05
T = 0.5
)";

}  // namespace

TEST_CASE("seed-only config yields the defaults") {
    const ExperimentConfig c = parse_config_text("seed = 11\n");
    ExperimentConfig d;
    d.seed = 11;
    CHECK(c == d);
    CHECK(c.modes == 16);
    CHECK(c.mark_weights.size() == 4);
    CHECK(c.b == std::vector<double>{1.0, 1.0});
}

TEST_CASE("validation errors name the line and key") {
    auto message = [](const std::string& text) {
        try {
            parse_config_text(text, "t.ini");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("seed = 1\n[nonlinearity]\nb = 1, -1\n").find("t.ini:3") != std::string::npos);
    CHECK(message("seed = 1\n[grid]\nmodes = 15\n").find("modes") != std::string::npos);
    CHECK(message("seed = 1\n[solver]\ndt = 0\n").find("dt") != std::string::npos);
    CHECK(message("seed = 1\n[marks]\nweights = 1, -2, 1, 1\n").find("weights") != std::string::npos);
    CHECK(message("[grid]\nmodes = 8\n").find("seed") != std::string::npos);
    CHECK(message("seed = 1\n[grid]\ncolour = red\n").find("t.ini:3") != std::string::npos);
    CHECK(message("seed = 1\n[grid]\nmodes = 8\nmodes = 16\n").find("t.ini:4") != std::string::npos);
    CHECK(message("seed = 1\n[nowhere]\n").find("t.ini:2") != std::string::npos);
    CHECK_NOTHROW(parse_config_text("[grid]\nmodes = 8\n", "t.ini", 5));
}

TEST_CASE("config serialization round trips") {
    ExperimentConfig c = parse_config_text(kSmall);
    c.cutoff = 12.5;
    c.control_cells = 2;
    c.control_values = {1.0, 0.1, 2.0, 1.0 / 3.0, 1.0, 1.0, 1.0, 1.0};
    c.penalty = 37.5;
    c.epsilons = {0.3, 0.03};
    c.init_theta = parse_shape_sum("analytic(0.3, 0.5) + constant(0.1, 0)");
    const ExperimentConfig back = parse_config_text(serialize_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(provenance_header(c).rfind("# config_hash=", 0) == 0);
}

TEST_CASE("shape expressions") {
    const ShapeSum s = parse_shape_sum("cellular(1, 2, 0.5) + shear_x(3, -0.1)");
    REQUIRE(s.size() == 2);
    CHECK(s[1].kind == "shear_x");
    CHECK(s[1].args == std::vector<double>{3, -0.1});
    CHECK(parse_shape_sum(format_shape_sum(s)) == s);
    CHECK(parse_shape_sum("zero").empty());
    const TorusGrid g(16);
    CHECK(divergence_residual(velocity_shape(g, parse_shape_sum("analytic(0.4, 1)")).field()) <= 1e-14);
    const VectorField c = director_shape(g, parse_shape_sum("constant(1, 0)"));
    CHECK(c[0].coefficient(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS(velocity_shape(g, parse_shape_sum("spiral(1)")));
    CHECK_THROWS(director_shape(g, parse_shape_sum("wave(1)")));
    CHECK_THROWS_AS(parse_config_text("seed = 1\n[initial]\nu = spiral(1)\n"), ConfigError);
}

TEST_CASE("skeleton from zero initial data writes all-zero diagnostics") {
    const fs::path dir = scratch("zero");
    std::ofstream(dir / "z.ini") << kSmall << "[initial]\nu = zero\ntheta = zero\n";
    std::string out;
    REQUIRE(cli({"skeleton", "--config", (dir / "z.ini").string(), "--out", dir.string()}, &out) == kExitOk);
    std::ifstream is(dir / "skeleton.csv");
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("# config_hash=", 0) == 0);
    std::getline(is, line);
    CHECK(line == "t,u_l2,u_h1,theta_l2,theta_h1,psi,dissipation,energy_residual");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 0.0);
    }
    CHECK(rows == 11);
    CHECK(fs::exists(dir / "config_echo.ini"));
    CHECK(fs::exists(dir / "skeleton_final.txt"));
}

TEST_CASE("simulate is byte-for-byte reproducible") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    std::ofstream(a / "c.ini") << kSmall;
    REQUIRE(cli({"simulate", "--config", (a / "c.ini").string(), "--out", a.string()}) == kExitOk);
    REQUIRE(cli({"simulate", "--config", (a / "c.ini").string(), "--out", b.string()}) == kExitOk);
    CHECK(slurp(a / "simulate.csv") == slurp(b / "simulate.csv"));
    REQUIRE(cli({"simulate", "--config", (a / "c.ini").string(), "--seed", "4", "--out", b.string()}) == kExitOk);
    CHECK(slurp(a / "simulate.csv") != slurp(b / "simulate.csv"));
}

TEST_CASE("validation failures exit 1 with a JSON record") {
    const fs::path dir = scratch("bad");
    std::ofstream(dir / "bad.ini") << "seed = 1\n[nonlinearity]\nb = 1, -1\n";
    std::string err;
    CHECK(cli({"skeleton", "--config", (dir / "bad.ini").string(), "--out", dir.string()}, nullptr, &err) ==
          kExitValidation);
    const auto j = nlohmann::json::parse(err);
    CHECK(j["kind"] == "validation");
    CHECK(j["exit_code"] == 1);
    CHECK(std::string(j["message"]).find("bad.ini:3") != std::string::npos);
    CHECK(fs::exists(dir / "error.json"));
    CHECK(cli({"skeleton"}) == kExitValidation);  // no seed anywhere
    CHECK(cli({"frobnicate"}) == kExitValidation);
}

TEST_CASE("numerical failures exit 2") {
    const fs::path dir = scratch("blowup");
    std::ofstream(dir / "b.ini") << kSmall << "[initial]\nu = cellular(1, 1, 1e7)\n";
    std::string err;
    CHECK(cli({"skeleton", "--config", (dir / "b.ini").string(), "--out", dir.string()}, nullptr, &err) ==
          kExitNumerical);
    CHECK(nlohmann::json::parse(err)["kind"] == "numerical");
}

TEST_CASE("rate subcommand writes its tables") {
    const fs::path dir = scratch("rate");
    std::ofstream(dir / "r.ini") << kSmall
                                << "[marks]\nweights = 1\nshapes = cellular(1, 1, 0.5)\ngains = 0.1\n"
                                   "[rate]\nmax_iterations = 5\nbrute_grid = 1, 1.5\n";
    REQUIRE(cli({"rate", "--config", (dir / "r.ini").string(), "--out", dir.string()}) == kExitOk);
    const std::string sum = slurp(dir / "rate_summary.csv");
    CHECK(sum.find("optimize,") != std::string::npos);
    CHECK(sum.find("brute_force,") != std::string::npos);
    CHECK(fs::exists(dir / "rate_history.csv"));
    CHECK(fs::exists(dir / "rate_control.csv"));
}

TEST_CASE("installed binary reports exit codes") {
    const char* bin = std::getenv("NEMATIC_LDP_BIN");
    if (!bin || !*bin) return;
    const fs::path dir = scratch("bin");
    const std::string base = std::string(bin) + " --out " + dir.string();
    auto code = [](const std::string& cmd) { return WEXITSTATUS(std::system((cmd + " >/dev/null 2>&1").c_str())); };
    CHECK(code(base + " --help") == 0);
    CHECK(code(base + " skeleton") == 1);
    std::ofstream(dir / "c.ini") << kSmall;
    CHECK(code(base + " --config " + (dir / "c.ini").string() + " skeleton") == 0);
}
