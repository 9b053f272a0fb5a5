#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "viscomem/cli/app.hpp"

using namespace viscomem;
namespace fs = std::filesystem;

namespace {

const std::string kSource = VISCOMEM_SOURCE_DIR;

std::string config_path(const std::string& name) { return kSource + "/configs/" + name + ".json"; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("viscomem_test_io_" + name);
    fs::remove_all(p);
    return p;
}

struct Run {
    int code = -1;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "viscomem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string write_temp(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("viscomem_test_io_" + name + ".json");
    std::ofstream(p) << text;
    return p.string();
}

}  // namespace

TEST_CASE("csv: numbers round-trip exactly") {
    io::Table t;
    t.header = {"x", "y"};
    const double tricky[] = {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, std::numeric_limits<double>::max()};
    for (double v : tricky) t.add_numbers({v, -v});
    const io::Table back = io::from_string(io::to_string(t));
    REQUIRE(back.header == t.header);
    const auto x = back.numbers("x");
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == tricky[i]);
    CHECK_THROWS_AS(t.add({"1"}), ArgumentError);
    CHECK_THROWS_AS(back.column("z"), ArgumentError);
    CHECK(std::isnan(io::parse_double("nan")));
    CHECK_THROWS_AS(io::parse_double("1.0x"), ArgumentError);
}

TEST_CASE("config: defaults resolve to a runnable problem") {
    const auto c = io::build_config(io::json::object());
    CHECK(c.problem.spectrum.size() == 8);
    CHECK(c.problem.kernel->name() == "rescaled-exponential/constant");
    CHECK(c.options.dt == 1e-3);
    CHECK(c.options.J == 256);
    CHECK(c.t_grid.size() == 21);
    CHECK(c.s_grid.size() == 200);
    CHECK(c.scenario["type"] == "none");
    CHECK(c.doc["kernel"]["scale"]["eps"] == 1.0);
}

TEST_CASE("config: family blocks take the defaults of the chosen family") {
    const auto c = io::build_config(io::json::parse(R"({
        "kernel": {"type": "rheological", "stiffness": {"type": "tanh", "alpha": 3}},
        "nonlinearity": "linear",
        "initial": {"u": {"type": "sine", "mode": 2, "amplitude": 0.5}}
    })"));
    CHECK(c.doc["kernel"]["stiffness"]["beta"] == 1.0);
    CHECK(c.doc["kernel"]["stiffness"]["alpha"] == 3);
    CHECK(c.doc["kernel"]["gamma"] == 1.0);
    CHECK(c.doc["nonlinearity"]["c"] == 0.0);
    CHECK(c.a0[1] == 0.5);
    CHECK(c.a0[0] == 0.0);
}

TEST_CASE("config: errors name the offending key") {
    auto msg = [](const std::string& text) -> std::string {
        try {
            io::build_config(io::json::parse(text));
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK_THAT(msg(R"({"kernal": {}})"), Catch::Matchers::ContainsSubstring("'kernal'"));
    CHECK_THAT(msg(R"({"kernel": "fractional"})"), Catch::Matchers::ContainsSubstring("'kernel.type'"));
    CHECK_THAT(msg(R"({"kernel": {"type": "rescaled", "scale": {"type": "constant", "eps": -1}}})"),
               Catch::Matchers::ContainsSubstring("'kernel.scale.eps'"));
    CHECK_THAT(msg(R"({"grids": {"dt": "small"}})"), Catch::Matchers::ContainsSubstring("'grids.dt'"));
    CHECK_THAT(msg(R"({"spectrum": {"n": 2.5}})"), Catch::Matchers::ContainsSubstring("'spectrum.n'"));
    CHECK_THAT(msg(R"({"time": {"T": -1}})"), Catch::Matchers::ContainsSubstring("'time.T'"));
    CHECK_THAT(msg(R"({"scales": {}})"), Catch::Matchers::ContainsSubstring("'scales'"));
    CHECK_THAT(msg(R"({"nonlinearity": {"type": "linear", "c": -100}})"),
               Catch::Matchers::ContainsSubstring("dissipation"));
    CHECK_THAT(msg(R"({"initial": {"u": {"type": "modal", "coeffs": [1,2,3,4,5,6,7,8,9]}}})"),
               Catch::Matchers::ContainsSubstring("'initial.u.coeffs'"));
    CHECK_THAT(msg(R"({"grids": {"dt": 0.3}})"), Catch::Matchers::ContainsSubstring("whole number"));
    CHECK_THROWS_AS(io::parse_config_text("{\"kernel\": ", "x.json"), ConfigError);
    CHECK_THROWS_AS(io::load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("cli: validate-kernel exit codes") {
    const auto dir = scratch("validate");
    CHECK(invoke({"validate-kernel", "--config", config_path("validate_exponential"), "--out", dir.string()}).code == 0);
    const auto bad = invoke({"validate-kernel", "--config", config_path("validate_increasing"), "--out", dir.string()});
    CHECK(bad.code == 1);
    CHECK_THAT(bad.out, Catch::Matchers::ContainsSubstring("M2: FAIL"));
    const auto report = io::read((dir / "increasing_kernel_report.csv").string());
    CHECK(report.header == std::vector<std::string>{"assumption", "verdict", "margin", "t", "s"});
    bool m2_failed = false;
    for (const auto& row : report.rows) m2_failed |= row[0] == "M2" && row[1] == "fail";
    CHECK(m2_failed);

    const auto broken = write_temp("broken", "{\"kernel\": ");
    const auto r = invoke({"validate-kernel", "--config", broken});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("parse error"));
    const auto unknown = write_temp("unknown", R"({"kernel": "fractional"})");
    const auto u = invoke({"validate-kernel", "--config", unknown});
    CHECK(u.code == 2);
    CHECK_THAT(u.err, Catch::Matchers::ContainsSubstring("kernel.type"));
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"solve"}).code == 2);
    CHECK(invoke({"solve", "--config", config_path("solve_zero"), "--jobs", "0"}).code == 2);
}

TEST_CASE("cli: solve writes an all-zero trajectory for zero data") {
    const auto dir = scratch("solve_zero");
    REQUIRE(invoke({"solve", "--config", config_path("solve_zero"), "--out", dir.string()}).code == 0);
    const auto t = io::read((dir / "zero_trajectory.csv").string());
    REQUIRE(t.header.size() == 9);
    for (std::size_t c = 1; c < t.header.size(); ++c)
        for (double v : t.numbers(t.header[c])) CHECK(v == 0.0);
    const auto led = io::read((dir / "zero_ledger.csv").string());
    for (double v : led.numbers("R_key")) CHECK(v == 0.0);
}

TEST_CASE("cli: solve divergence exits 1 with the time") {
    const auto dir = scratch("solve_unstable");
    const auto r = invoke({"solve", "--config", config_path("solve_unstable"), "--out", dir.string()});
    CHECK(r.code == 1);
    CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("t = "));
}

TEST_CASE("cli: experiments and their config errors") {
    const auto dir = scratch("experiments");
    const auto stress = invoke({"experiment", "--config", config_path("stress_step"), "--out", dir.string()});
    REQUIRE(stress.code == 0);
    const auto t = io::read((dir / "stress_stress.csv").string());
    const auto s1 = t.numbers("sigma1"), s2 = t.numbers("sigma2");
    double scale = 0.0;
    for (double v : s1) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(std::abs(s1[i] - s2[i]) <= 1e-6 * scale);

    CHECK(invoke({"experiment", "--config", config_path("continuous_dependence_zero_delta"), "--out", dir.string()})
              .code == 2);
    CHECK(invoke({"experiment", "--config", config_path("oracle_time_dependent"), "--out", dir.string()}).code == 2);
    const auto none = write_temp("none", "{}");
    CHECK(invoke({"experiment", "--config", none, "--out", dir.string()}).code == 2);
    const auto wrong = write_temp("wrong_family", R"({"scenario": "stress"})");
    CHECK(invoke({"experiment", "--config", wrong, "--out", dir.string()}).code == 2);
}

TEST_CASE("cli: outputs are byte-identical across reruns and job counts") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const char* name : {"kv_limit_linear", "delta_limit"}) {
        REQUIRE(invoke({"experiment", "--config", config_path(name), "--out", a.string(), "--jobs", "1"}).code == 0);
        REQUIRE(invoke({"experiment", "--config", config_path(name), "--out", b.string(), "--jobs", "3"}).code == 0);
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(files == 4);
}

TEST_CASE("cli: report re-parses output directories") {
    const auto dir = scratch("report");
    REQUIRE(invoke({"experiment", "--config", config_path("stress_step"), "--out", dir.string()}).code == 0);
    auto r = invoke({"report", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("stress_stress.csv: 51 rows"));
    REQUIRE(invoke({"validate-kernel", "--config", config_path("validate_increasing"), "--out", dir.string()}).code ==
            1);
    CHECK(invoke({"report", "--out", dir.string()}).code == 1);
    std::ofstream(dir / "junk.csv") << "a,b\n1,oops\n";
    CHECK(invoke({"report", "--out", dir.string()}).code == 2);
    CHECK(invoke({"report"}).code == 2);
    CHECK(invoke({"report", "--out", (dir / "missing").string()}).code == 2);
}
