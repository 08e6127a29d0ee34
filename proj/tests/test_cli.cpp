#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args)
{
    const std::string cmd = std::string(TWOMODE_CLI_PATH) + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "twomode_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

// Structural equality with a relative tolerance on floating-point leaves.
bool close(const nlohmann::json& a, const nlohmann::json& b, double tol = 1e-9)
{
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        return std::abs(x - y) <= tol * std::max(1.0, std::abs(y));
    }
    if (a.type() != b.type() || a.size() != b.size()) return false;
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it)
            if (!b.contains(it.key()) || !close(it.value(), b.at(it.key()), tol)) return false;
        return true;
    }
    if (a.is_array()) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!close(a[i], b[i], tol)) return false;
        return true;
    }
    return a == b;
}

std::string golden(const std::string& name) { return slurp(fs::path(TWOMODE_GOLDEN_DIR) / name); }

}  // namespace

TEST_CASE("usage errors")
{
    CHECK(run("--help").code == 0);
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("typicality --modes planewave:q=1").code == 1);
    CHECK(run("typicality --modes planewave:q=1 --kernel c2:x=abc").code == 1);
    CHECK(run("typicality --modes planewave:q=1 --kernel c2:y=0.1").code == 1);
    CHECK(run("typicality --modes nosuch --kernel c2:x=0.1").code == 1);
    CHECK(run("typicality --modes tabulated:file=/nonexistent --kernel c2:x=0.1").code == 1);
    CHECK(run("scan --alpha 0.5 --N 100 --n 11").code == 1);
    CHECK(run("scan --alpha 0.5").code == 1);
    CHECK(run("moments -k 9 -m 0").code == 1);
}

TEST_CASE("moments output matches the golden file")
{
    const Result r = run("moments -k 2 -m 1");
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out) == nlohmann::json::parse(golden("moments_k2_m1.json")));
}

TEST_CASE("typicality reports")
{
    const Result pw = run("typicality --modes planewave:q=1 --kernel c2:x=0.13");
    CHECK(pw.code == 0);
    CHECK(close(nlohmann::json::parse(pw.out), nlohmann::json::parse(golden("typicality_planewave_c2.json"))));

    const fs::path out = scratch("gauss.json");
    CHECK(run("typicality --modes gaussian:d=10,sigma=1,t=50 --kernel c2:x=0.13 -o " + out.string()).code == 0);
    const auto doc = nlohmann::json::parse(slurp(out));
    CHECK(doc["schema"] == "twomode.typicality/1");
    CHECK(doc["verdict"] == "typical");
    CHECK(doc["suppression_exponent"].get<double>() == doctest::Approx(6.25).epsilon(2e-3));

    const fs::path modes = scratch("asym.txt");
    {
        std::ofstream f(modes);
        f.precision(17);
        const double pi = std::numbers::pi;
        for (int j = 0; j < 16; ++j) {
            const double r = j / 16.0;
            const double ar = (std::cos(2 * pi * r) + std::cos(4 * pi * r)) / std::sqrt(3.0);
            const double ai = (std::sin(2 * pi * r) + std::sin(4 * pi * r) + 1.0) / std::sqrt(3.0);
            f << r << " " << ar << " " << ai << " " << std::cos(2 * pi * r) << " " << -std::sin(2 * pi * r) << "\n";
        }
    }
    const Result asym = run("typicality --modes tabulated:file=" + modes.string() + " --kernel c2:x=0.125");
    CHECK(asym.code == 2);
    CHECK(nlohmann::json::parse(asym.out)["verdict"] == "not typical");
}

TEST_CASE("scan output files")
{
    const fs::path csv = scratch("scan.csv");
    fs::remove(fs::path(csv.string() + ".summary.json"));
    CHECK(run("scan --alpha 0.5 --Ns 4096,8192,16384 -o " + csv.string()).code == 0);
    const std::string text = slurp(csv);
    CHECK(text.rfind("# schema: twomode.scan/1\nN,n,alpha,mean,var,relfluct,stderr\n", 0) == 0);
    const auto summary = nlohmann::json::parse(slurp(csv.string() + ".summary.json"));
    CHECK(summary["schema"] == "twomode.scan-summary/1");
    CHECK(summary["slope"].get<double>() < 0.0);
    CHECK(summary["ci95"].size() == 2);

    const Result single = run("scan --N 1000 --n 31");
    CHECK(single.code == 0);
    std::istringstream lines(single.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("pattern runs are deterministic under a fixed seed")
{
    const std::string args = "pattern --N 400 --n 11 --bins 20";
    const Result a = run("--seed 7 " + args + " -o - --fit " + scratch("fit_a.json").string());
    const Result b = run("--seed 7 " + args + " -o - --fit " + scratch("fit_b.json").string());
    const Result c = run("--seed 8 " + args + " -o - --fit " + scratch("fit_c.json").string());
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(slurp(scratch("fit_a.json")) == slurp(scratch("fit_b.json")));
    CHECK(a.out.rfind("# schema: twomode.pattern/1\nbin_center,counts\n", 0) == 0);
    std::istringstream lines(a.out);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 22);
    const auto fit = nlohmann::json::parse(slurp(scratch("fit_a.json")));
    CHECK(fit["schema"] == "twomode.pattern-fit/1");
    CHECK(fit.contains("V"));
    CHECK(run("pattern --modes gaussian:d=10,t=50 --N 10 --n 3").code == 1);
}
