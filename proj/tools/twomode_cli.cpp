// twomode: typicality reports, fluctuation scans, moment polynomials and
// single-run interference patterns for two-mode Bose systems.

#include "twomode/montecarlo.hpp"
#include "twomode/poly.hpp"
#include "twomode/typicality.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace twomode;

namespace {

constexpr const char* kDescriptorHelp = R"(Descriptors use the grammar name:key=value,key=value.
  modes:   planewave:q=1
           gaussian:d=10,sigma=1,t=50        (optional za=, zb= instead of d)
           tabulated:file=path               (rows "x re_a im_a re_b im_b", x = j/G)
  kernels: c2:x=0.13                         (also c2:x1=0.13)
           c3:x1=0.11,x2=0.29
           optional smear=eps on any kernel)";

struct Descriptor {
    std::string name;
    std::map<std::string, std::string> fields;

    double number(const std::string& key) const
    {
        const auto it = fields.find(key);
        if (it == fields.end()) throw std::invalid_argument("descriptor '" + name + "' lacks '" + key + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != it->second.size() || !std::isfinite(v))
            throw std::invalid_argument("field '" + key + "' of '" + name + "' is not a number: " + it->second);
        return v;
    }
    double number(const std::string& key, double fallback) const
    {
        return fields.count(key) ? number(key) : fallback;
    }
    void allow(std::initializer_list<const char*> keys) const
    {
        for (const auto& [k, v] : fields) {
            bool known = false;
            for (const char* a : keys) known = known || k == a;
            if (!known) throw std::invalid_argument("unknown field '" + k + "' in descriptor '" + name + "'");
        }
    }
};

Descriptor parse_descriptor(const std::string& text)
{
    Descriptor d;
    const auto colon = text.find(':');
    d.name = text.substr(0, colon);
    if (d.name.empty()) throw std::invalid_argument("empty descriptor name in '" + text + "'");
    if (colon == std::string::npos) return d;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("malformed field '" + item + "' in '" + text + "'");
        d.fields[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return d;
}

ModePair parse_modes(const std::string& text)
{
    const Descriptor d = parse_descriptor(text);
    if (d.name == "planewave") {
        d.allow({"q"});
        const double q = d.number("q", 1.0);
        if (q != std::floor(q)) throw std::invalid_argument("planewave harmonic q must be an integer");
        return ModePair::plane_wave(static_cast<int>(q));
    }
    if (d.name == "gaussian") {
        d.allow({"d", "sigma", "t", "za", "zb"});
        FarFieldGaussian g;
        g.center_a = d.number("za", 0.0);
        g.center_b = d.fields.count("zb") ? d.number("zb") : g.center_a + d.number("d");
        g.width = d.number("sigma", 1.0);
        g.time = d.number("t");
        return ModePair::far_field_gaussian(g);
    }
    if (d.name == "tabulated") {
        d.allow({"file"});
        const auto it = d.fields.find("file");
        if (it == d.fields.end()) throw std::invalid_argument("tabulated modes need file=path");
        return ModePair::load_tabulated(it->second);
    }
    throw std::invalid_argument("unknown mode descriptor '" + d.name + "'");
}

KernelSpec parse_kernel(const std::string& text)
{
    const Descriptor d = parse_descriptor(text);
    const double smear = d.number("smear", 0.0);
    if (d.name == "c2") {
        d.allow({"x", "x1", "smear"});
        return KernelSpec::delta_comb({d.fields.count("x") ? d.number("x") : d.number("x1")}, smear);
    }
    if (d.name == "c3") {
        d.allow({"x1", "x2", "smear"});
        return KernelSpec::delta_comb({d.number("x1"), d.number("x2")}, smear);
    }
    throw std::invalid_argument("unknown kernel descriptor '" + d.name + "'");
}

std::vector<double> kernel_offsets(const KernelSpec& kernel)
{
    return std::get<DeltaComb>(kernel.variant()).offsets;
}

// Writes to `path`, or stdout for "-" / empty.
void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
}

std::vector<long> parse_grid(const std::string& text)
{
    std::vector<long> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const long v = std::stol(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad N-grid entry '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Typicality of two-mode Bose observables.\n" + std::string(kDescriptorHelp)};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "master seed of the counter-based generator")->capture_default_str();

    std::string modes_text = "planewave:q=1";
    std::string kernel_text = "c2:x=0.13";
    std::string out_path;

    auto* typ = app.add_subcommand("typicality", "write a typicality report (exit 0 typical, 2 not typical)");
    typ->add_option("--modes", modes_text, "mode descriptor")->required();
    typ->add_option("--kernel", kernel_text, "kernel descriptor")->required();
    typ->add_option("-o,--out", out_path, "JSON output path (default stdout)");

    auto* scan = app.add_subcommand("scan", "relative fluctuations along n = N^alpha or at one (N, n)");
    double alpha = 0.5;
    std::string grid_text;
    long scan_N = 0, scan_n = 0;
    std::size_t samples = 2000;
    std::string summary_path;
    scan->add_option("--modes", modes_text, "mode descriptor")->capture_default_str();
    scan->add_option("--kernel", kernel_text, "kernel descriptor")->capture_default_str();
    auto* alpha_opt = scan->add_option("--alpha", alpha, "exponent in n = round_to_odd(N^alpha)");
    auto* grid_opt = scan->add_option("--Ns", grid_text, "comma-separated N grid, e.g. 1024,2048,4096");
    auto* N_opt = scan->add_option("--N", scan_N, "single particle number");
    auto* n_opt = scan->add_option("--n", scan_n, "single subspace dimension");
    alpha_opt->excludes(N_opt)->excludes(n_opt);
    grid_opt->excludes(N_opt)->excludes(n_opt);
    N_opt->needs(n_opt);
    n_opt->needs(N_opt);
    scan->add_option("--samples", samples, "Monte Carlo samples where exact traces do not fit")->capture_default_str();
    scan->add_option("-o,--out", out_path, "CSV output path (default stdout)");
    scan->add_option("--summary", summary_path, "JSON slope summary path (default <out>.summary.json)");

    auto* mom = app.add_subcommand("moments", "dump the moment polynomial for (k, m) as JSON");
    int k = 2, m = 0;
    mom->add_option("-k", k, "order")->required();
    mom->add_option("-m", m, "number of a-mode factors")->required();
    mom->add_option("-o,--out", out_path, "JSON output path (default stdout)");

    auto* pat = app.add_subcommand("pattern", "simulate one detection run and fit the fringe pattern");
    long pat_N = 10000, pat_n = 101;
    std::size_t bins = 100;
    std::string fit_path;
    pat->add_option("--modes", modes_text, "mode descriptor")->capture_default_str();
    pat->add_option("--N", pat_N, "particle number")->capture_default_str();
    pat->add_option("--n", pat_n, "subspace dimension")->capture_default_str();
    pat->add_option("--bins", bins, "histogram bins")->capture_default_str();
    pat->add_option("-o,--out", out_path, "histogram CSV path (default stdout)");
    pat->add_option("--fit", fit_path, "fit JSON path (default <out>.fit.json, or stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*typ) {
            const ModePair modes = parse_modes(modes_text);
            const KernelSpec kernel = parse_kernel(kernel_text);
            const TypicalityReport report = analyze(kernel, modes);
            emit(out_path, report.to_json().dump(2) + "\n");
            return report.verdict == Verdict::Typical ? 0 : 2;
        }
        if (*scan) {
            const ModePair modes = parse_modes(modes_text);
            const auto family = correlation_family(modes, kernel_offsets(parse_kernel(kernel_text)));
            std::ostringstream csv;
            if (*N_opt) {
                const long ns[] = {scan_n};
                ScalingScan single;
                single.points = n_sweep(scan_N, ns, family);
                single.alpha = single.points.front().alpha;
                write_scan_csv(csv, single);
                emit(out_path, csv.str());
                return 0;
            }
            ScanConfig config;
            config.alpha = alpha;
            config.Ns = parse_grid(grid_text);
            config.samples = samples;
            config.seed = seed;
            if (config.Ns.empty()) throw std::invalid_argument("scan needs a non-empty --Ns grid or --N/--n");
            const ScalingScan result = scaling_scan(config, family);
            write_scan_csv(csv, result);
            emit(out_path, csv.str());
            const std::string summary = scan_summary_json(result).dump(2) + "\n";
            if (!summary_path.empty())
                emit(summary_path, summary);
            else if (!out_path.empty() && out_path != "-")
                emit(out_path + ".summary.json", summary);
            else
                std::cout << summary;
            return 0;
        }
        if (*mom) {
            const BivariatePoly p = moment_sum(k, m);
            const nlohmann::json doc{{"schema", "twomode.moments/1"},
                                     {"k", k},
                                     {"m", m},
                                     {"polynomial", p.to_json()},
                                     {"text", p.to_string()}};
            emit(out_path, doc.dump(2) + "\n");
            return 0;
        }
        if (*pat) {
            const ModePair modes = parse_modes(modes_text);
            const SystemParams params(pat_N, pat_n);
            Philox rng(seed, stream_id(0, 1));
            const PatternRun run = simulate_pattern(params, modes, bins, rng);
            std::ostringstream csv;
            write_pattern_csv(csv, run);
            emit(out_path, csv.str());
            const std::string fit = pattern_fit_json(run).dump(2) + "\n";
            if (!fit_path.empty())
                emit(fit_path, fit);
            else if (!out_path.empty() && out_path != "-")
                emit(out_path + ".fit.json", fit);
            else
                std::cout << fit;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "twomode: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
