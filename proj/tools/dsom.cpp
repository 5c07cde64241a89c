// Command-line front end for the DSOM toolkit: data generation, dissimilarity
// matrix construction, training, cross-variant verification and benchmarking.
// Every subcommand writes a manifest with its resolved parameters; `rerun`
// re-executes a manifest and reproduces the result files byte for byte.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dsom/dsom.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dsom::io_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw dsom::io_error("write failure on '" + path + "'");
}

void write_manifest(const std::string& path, const std::string& subcommand,
                    const ordered_json& parameters) {
    ordered_json manifest;
    manifest["tool_version"] = dsom::version_string;
    manifest["subcommand"] = subcommand;
    manifest["parameters"] = parameters;
    write_file(path, manifest.dump(2) + "\n");
}

dsom::PriorGraph make_grid(const std::string& layout, std::int32_t side) {
    if (layout == "hex") return dsom::hex_grid(side);
    if (layout == "rect") return dsom::rect_grid(side);
    throw std::invalid_argument("unknown grid layout '" + layout + "' (expected hex or rect)");
}

// sigma_initial <= 0 means "derive from the graph": half the graph diameter.
dsom::KernelSchedule resolve_schedule(const dsom::PriorGraph& graph, std::int32_t epochs,
                                      double sigma_initial, double sigma_final) {
    dsom::KernelSchedule ks;
    ks.epochs = epochs;
    ks.sigma_initial =
        sigma_initial > 0.0 ? sigma_initial : std::max(0.5, graph.diameter() / 2.0);
    ks.sigma_final = sigma_final;
    ks.validate();
    return ks;
}

struct GenParams {
    std::int64_t n = 0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_gen(const GenParams& p) {
    const auto points = dsom::generate_uniform_square(static_cast<std::int32_t>(p.n), p.seed);
    dsom::save_points(points, p.out);
    write_manifest(p.out + ".manifest.json", "gen",
                   {{"n", p.n}, {"seed", p.seed}, {"out", p.out}});
    return 0;
}

struct DistParams {
    std::string input;
    std::string kind = "vectors"; // vectors | words
    bool normalized = false;
    double integerize = 0.0; // 0: off
    std::string out;
};

int run_dist(const DistParams& p) {
    dsom::DissimilarityMatrix matrix = [&p]() {
        if (p.kind == "vectors") return dsom::build_from_vectors(dsom::load_points(p.input));
        if (p.kind == "words") return dsom::build_from_words(dsom::load_words(p.input), p.normalized);
        throw std::invalid_argument("unknown input kind '" + p.kind + "' (expected vectors or words)");
    }();
    if (p.integerize > 0.0) matrix = dsom::integerize(matrix, p.integerize);
    dsom::save_matrix(matrix, p.out);
    write_manifest(p.out + ".manifest.json", "dist",
                   {{"input", p.input},
                    {"kind", p.kind},
                    {"normalized", p.normalized},
                    {"integerize", p.integerize},
                    {"out", p.out}});
    return 0;
}

struct TrainParams {
    std::string matrix;
    std::string grid = "hex";
    std::int32_t m = 7;
    std::int32_t epochs = 100;
    double sigma_initial = 0.0; // 0: derive from the grid
    double sigma_final = 0.5;
    std::string variant = "fast";
    double ratio = 7.0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_train(const TrainParams& p) {
    const auto matrix = dsom::load_matrix(p.matrix);
    const auto graph = make_grid(p.grid, p.m);
    const auto schedule = resolve_schedule(graph, p.epochs, p.sigma_initial, p.sigma_final);

    dsom::DsomConfig config;
    config.variant = dsom::variant_from_name(p.variant);
    config.schedule = schedule;
    config.ratio = p.ratio;
    config.seed = p.seed;

    const auto result = dsom::train(config, matrix, graph);

    fs::create_directories(p.out);
    const auto in_dir = [&p](const char* name) { return (fs::path(p.out) / name).string(); };

    std::string prototypes;
    for (std::size_t j = 0; j < result.prototypes.size(); ++j)
        prototypes += std::to_string(j) + " " + std::to_string(result.prototypes[j]) + "\n";
    write_file(in_dir("prototypes.txt"), prototypes);

    std::string assignments;
    for (std::size_t i = 0; i < result.assignments.size(); ++i)
        assignments += std::to_string(i) + " " + std::to_string(result.assignments[i]) + "\n";
    write_file(in_dir("assignments.txt"), assignments);

    std::string stats = "epoch,nb_switch,strategy,candidates_evaluated,terms_accumulated\n";
    for (const auto& s : result.epoch_stats)
        stats += std::to_string(s.epoch) + "," + std::to_string(s.nb_switch) + "," +
                 dsom::strategy_name(s.strategy) + "," + std::to_string(s.candidates_evaluated) +
                 "," + std::to_string(s.terms_accumulated) + "\n";
    write_file(in_dir("stats.csv"), stats);

    write_file(in_dir("quantization_error.txt"),
               dsom::detail::format_double(result.quantization_error) + "\n");

    write_manifest(in_dir("manifest.json"), "train",
                   {{"matrix", p.matrix},
                    {"grid", p.grid},
                    {"m", p.m},
                    {"epochs", p.epochs},
                    {"sigma_initial", schedule.sigma_initial},
                    {"sigma_final", schedule.sigma_final},
                    {"variant", p.variant},
                    {"ratio", p.ratio},
                    {"seed", p.seed},
                    {"out", p.out}});
    return 0;
}

struct VerifyParams {
    std::string matrix;
    std::string grid = "hex";
    std::int32_t m = 7;
    std::int32_t epochs = 100;
    double sigma_initial = 0.0;
    double sigma_final = 0.5;
    double ratio = 7.0;
    std::int32_t seeds = 10;
    bool inject_tie_fault = false;
    std::string out; // empty: stdout only
};

int run_verify(const VerifyParams& p) {
    const auto matrix = dsom::load_matrix(p.matrix);
    const auto graph = make_grid(p.grid, p.m);

    dsom::DsomConfig base;
    base.schedule = resolve_schedule(graph, p.epochs, p.sigma_initial, p.sigma_final);
    base.ratio = p.ratio;
    base.inject_tie_fault = p.inject_tie_fault;

    std::vector<std::uint64_t> seeds;
    for (std::int32_t s = 1; s <= p.seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    const std::vector<dsom::Variant> variants{dsom::Variant::brute, dsom::Variant::partial,
                                              dsom::Variant::earlystop, dsom::Variant::memory,
                                              dsom::Variant::fast};

    const auto report = dsom::equivalence_check(matrix, graph, seeds, variants, base);
    const std::string text = report.to_text();
    std::cout << text;
    if (!p.out.empty()) {
        write_file(p.out, text);
        write_manifest(p.out + ".manifest.json", "verify",
                       {{"matrix", p.matrix},
                        {"grid", p.grid},
                        {"m", p.m},
                        {"epochs", p.epochs},
                        {"sigma_initial", base.schedule.sigma_initial},
                        {"sigma_final", base.schedule.sigma_final},
                        {"ratio", p.ratio},
                        {"seeds", p.seeds},
                        {"inject_tie_fault", p.inject_tie_fault},
                        {"out", p.out}});
    }
    return report.identical() ? 0 : 1;
}

struct BenchParams {
    std::string sizes = "500x49,1000x49,1500x49";
    std::string variants = "brute,partial,earlystop,memory,fast";
    std::int32_t repeats = 10;
    std::int32_t epochs = 100;
    std::uint64_t seed = 1;
    std::string out;
};

std::vector<std::pair<std::int32_t, std::int32_t>> parse_sizes(const std::string& sizes) {
    std::vector<std::pair<std::int32_t, std::int32_t>> out;
    std::stringstream ss(sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto x = item.find('x');
        if (x == std::string::npos)
            throw std::invalid_argument("bad size '" + item + "' (expected NxM, e.g. 500x49)");
        const std::int32_t n = std::stoi(item.substr(0, x));
        const std::int32_t m = std::stoi(item.substr(x + 1));
        const auto side = static_cast<std::int32_t>(std::lround(std::sqrt(m)));
        if (side * side != m)
            throw std::invalid_argument("model count " + std::to_string(m) +
                                        " is not a square grid size");
        if (m > n)
            throw std::invalid_argument("size " + item + ": M exceeds N");
        out.emplace_back(n, m);
    }
    if (out.empty()) throw std::invalid_argument("no sizes given");
    return out;
}

std::vector<dsom::Variant> parse_variants(const std::string& variants) {
    std::vector<dsom::Variant> out;
    std::stringstream ss(variants);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(dsom::variant_from_name(item));
    if (out.empty()) throw std::invalid_argument("no variants given");
    return out;
}

int run_bench(const BenchParams& p) {
    const auto sizes = parse_sizes(p.sizes);
    const auto variants = parse_variants(p.variants);

    // One integerized uniform-square data set per N, seeded deterministically.
    std::map<std::int32_t, dsom::DissimilarityMatrix> data;
    for (const auto& [n, m] : sizes) {
        (void)m;
        if (!data.count(n))
            data.emplace(n, dsom::integerize(dsom::build_from_vectors(dsom::generate_uniform_square(
                                                 n, p.seed + static_cast<std::uint64_t>(n))),
                                             1e8));
    }

    // Result-identity spot check on the smallest configuration before any
    // timing is spent.
    {
        const auto [n0, m0] = *std::min_element(sizes.begin(), sizes.end());
        const auto graph = dsom::hex_grid(static_cast<std::int32_t>(std::lround(std::sqrt(m0))));
        dsom::DsomConfig base;
        base.schedule = dsom::default_schedule(graph, std::min(p.epochs, 20));
        const auto spot =
            dsom::equivalence_check(data.at(n0), graph, {p.seed, p.seed + 1}, variants, base);
        if (!spot.identical()) {
            std::cerr << "bench: equivalence spot-check failed, refusing to time\n"
                      << spot.to_text();
            return 1;
        }
    }

    std::vector<dsom::TimingRecord> records;
    std::string csv = std::string(dsom::timing_csv_header) + "\n";
    for (const auto& [n, m] : sizes) {
        const auto graph = dsom::hex_grid(static_cast<std::int32_t>(std::lround(std::sqrt(m))));
        for (const auto v : variants) {
            dsom::DsomConfig config;
            config.variant = v;
            config.schedule = dsom::default_schedule(graph, p.epochs);
            config.seed = p.seed;
            const auto record = dsom::time_variant(config, data.at(n), graph, p.repeats);
            records.push_back(record);
            csv += dsom::timing_csv_line(record) + "\n";
            std::cout << dsom::timing_csv_line(record) << "\n" << std::flush;
        }
    }
    write_file(p.out, csv);

    // Cost-model fits per variant, when the records span enough sizes.
    std::string report, kv;
    const auto fmt = [](double v) { return dsom::detail::format_double(v); };
    for (const auto v : variants) {
        std::vector<dsom::TimingRecord> subset;
        for (const auto& r : records)
            if (r.variant == v) subset.push_back(r);
        const std::string name = dsom::variant_name(v);
        try {
            const auto loglog = dsom::fit_loglog(subset);
            report += name + " loglog: alpha=" + fmt(loglog.alpha) + " beta=" + fmt(loglog.beta) +
                      " gamma=" + fmt(loglog.gamma) + " nmse=" + fmt(loglog.nmse) + "\n";
            kv += name + ".loglog.alpha=" + fmt(loglog.alpha) + "\n";
            kv += name + ".loglog.beta=" + fmt(loglog.beta) + "\n";
            kv += name + ".loglog.gamma=" + fmt(loglog.gamma) + "\n";
            kv += name + ".loglog.nmse=" + fmt(loglog.nmse) + "\n";
        } catch (const std::exception& e) {
            report += name + " loglog: not fitted (" + e.what() + ")\n";
        }
        try {
            const auto quad = dsom::fit_quadratic(subset);
            report += name + " quadratic: delta=" + fmt(quad.delta) + " tau=" + fmt(quad.tau) +
                      " nmse=" + fmt(quad.nmse);
            if (quad.tau > 0.0) report += " delta/tau=" + fmt(quad.delta / quad.tau);
            report += "\n";
            kv += name + ".quadratic.delta=" + fmt(quad.delta) + "\n";
            kv += name + ".quadratic.tau=" + fmt(quad.tau) + "\n";
            kv += name + ".quadratic.nmse=" + fmt(quad.nmse) + "\n";
        } catch (const std::exception& e) {
            report += name + " quadratic: not fitted (" + e.what() + ")\n";
        }
    }
    write_file(p.out + ".fits.txt", report);
    write_file(p.out + ".fits.kv", kv);
    std::cout << report;

    write_manifest(p.out + ".manifest.json", "bench",
                   {{"sizes", p.sizes},
                    {"variants", p.variants},
                    {"repeats", p.repeats},
                    {"epochs", p.epochs},
                    {"seed", p.seed},
                    {"out", p.out}});
    return 0;
}

int run_rerun(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw dsom::io_error("rerun: cannot open manifest '" + manifest_path + "'");
    ordered_json manifest;
    in >> manifest;
    const std::string subcommand = manifest.at("subcommand").get<std::string>();
    const auto& q = manifest.at("parameters");
    if (subcommand == "gen") {
        GenParams p;
        p.n = q.at("n").get<std::int64_t>();
        p.seed = q.at("seed").get<std::uint64_t>();
        p.out = q.at("out").get<std::string>();
        return run_gen(p);
    }
    if (subcommand == "dist") {
        DistParams p;
        p.input = q.at("input").get<std::string>();
        p.kind = q.at("kind").get<std::string>();
        p.normalized = q.at("normalized").get<bool>();
        p.integerize = q.at("integerize").get<double>();
        p.out = q.at("out").get<std::string>();
        return run_dist(p);
    }
    if (subcommand == "train") {
        TrainParams p;
        p.matrix = q.at("matrix").get<std::string>();
        p.grid = q.at("grid").get<std::string>();
        p.m = q.at("m").get<std::int32_t>();
        p.epochs = q.at("epochs").get<std::int32_t>();
        p.sigma_initial = q.at("sigma_initial").get<double>();
        p.sigma_final = q.at("sigma_final").get<double>();
        p.variant = q.at("variant").get<std::string>();
        p.ratio = q.at("ratio").get<double>();
        p.seed = q.at("seed").get<std::uint64_t>();
        p.out = q.at("out").get<std::string>();
        return run_train(p);
    }
    if (subcommand == "verify") {
        VerifyParams p;
        p.matrix = q.at("matrix").get<std::string>();
        p.grid = q.at("grid").get<std::string>();
        p.m = q.at("m").get<std::int32_t>();
        p.epochs = q.at("epochs").get<std::int32_t>();
        p.sigma_initial = q.at("sigma_initial").get<double>();
        p.sigma_final = q.at("sigma_final").get<double>();
        p.ratio = q.at("ratio").get<double>();
        p.seeds = q.at("seeds").get<std::int32_t>();
        p.inject_tie_fault = q.at("inject_tie_fault").get<bool>();
        p.out = q.at("out").get<std::string>();
        return run_verify(p);
    }
    if (subcommand == "bench") {
        BenchParams p;
        p.sizes = q.at("sizes").get<std::string>();
        p.variants = q.at("variants").get<std::string>();
        p.repeats = q.at("repeats").get<std::int32_t>();
        p.epochs = q.at("epochs").get<std::int32_t>();
        p.seed = q.at("seed").get<std::uint64_t>();
        p.out = q.at("out").get<std::string>();
        return run_bench(p);
    }
    throw std::invalid_argument("rerun: unknown subcommand '" + subcommand + "' in manifest");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dissimilarity self-organizing map toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dsom::version_string);

    int exit_code = 0;

    GenParams gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate points uniformly in the unit square (CSV)");
    gen_cmd->add_option("--n", gen.n, "Number of points")->required()->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
    gen_cmd->callback([&] { exit_code = run_gen(gen); });

    DistParams dist;
    auto* dist_cmd = app.add_subcommand("dist", "Build a dissimilarity matrix file");
    dist_cmd->add_option("--input", dist.input, "Input file (points CSV or word list)")->required();
    dist_cmd->add_option("--kind", dist.kind, "Input kind: vectors | words")
        ->check(CLI::IsMember({"vectors", "words"}))
        ->capture_default_str();
    dist_cmd->add_flag("--normalized", dist.normalized,
                       "Normalize edit distances by the longer word length");
    dist_cmd->add_option("--integerize", dist.integerize,
                         "Round scale*d to integers (0 disables)")
        ->capture_default_str();
    dist_cmd->add_option("--out", dist.out, "Output matrix path")->required();
    dist_cmd->callback([&] { exit_code = run_dist(dist); });

    TrainParams trainp;
    auto* train_cmd = app.add_subcommand("train", "Train a dissimilarity SOM");
    train_cmd->add_option("--matrix", trainp.matrix, "Dissimilarity matrix file")->required();
    train_cmd->add_option("--grid", trainp.grid, "Grid layout: hex | rect")
        ->check(CLI::IsMember({"hex", "rect"}))
        ->capture_default_str();
    train_cmd->add_option("--m", trainp.m, "Grid side length (M = m*m models)")
        ->required()
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--epochs", trainp.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--sigma-initial", trainp.sigma_initial,
                          "Initial kernel width (0: half the grid diameter)")
        ->capture_default_str();
    train_cmd->add_option("--sigma-final", trainp.sigma_final, "Final kernel width")
        ->capture_default_str();
    train_cmd
        ->add_option("--variant", trainp.variant,
                     "Algorithm variant: brute | partial | earlystop | memory | fast")
        ->check(CLI::IsMember({"brute", "partial", "earlystop", "memory", "fast"}))
        ->capture_default_str();
    train_cmd->add_option("--ratio", trainp.ratio, "Block-update threshold divisor")
        ->check(CLI::Range(1.0, 16.0))
        ->capture_default_str();
    train_cmd->add_option("--seed", trainp.seed, "Random seed")->capture_default_str();
    train_cmd->add_option("--out", trainp.out, "Output directory")->required();
    train_cmd->callback([&] { exit_code = run_train(trainp); });

    VerifyParams verify;
    auto* verify_cmd =
        app.add_subcommand("verify", "Check that all variants produce identical results");
    verify_cmd->add_option("--matrix", verify.matrix, "Dissimilarity matrix file")->required();
    verify_cmd->add_option("--grid", verify.grid, "Grid layout: hex | rect")
        ->check(CLI::IsMember({"hex", "rect"}))
        ->capture_default_str();
    verify_cmd->add_option("--m", verify.m, "Grid side length")->required()->check(CLI::PositiveNumber);
    verify_cmd->add_option("--epochs", verify.epochs, "Training epochs")->capture_default_str();
    verify_cmd->add_option("--sigma-initial", verify.sigma_initial,
                           "Initial kernel width (0: half the grid diameter)")
        ->capture_default_str();
    verify_cmd->add_option("--sigma-final", verify.sigma_final, "Final kernel width")
        ->capture_default_str();
    verify_cmd->add_option("--ratio", verify.ratio, "Block-update threshold divisor")
        ->check(CLI::Range(1.0, 16.0))
        ->capture_default_str();
    verify_cmd->add_option("--seeds", verify.seeds, "Number of seeds (1..K)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verify_cmd->add_flag("--inject-tie-fault", verify.inject_tie_fault)->group("");
    verify_cmd->add_option("--out", verify.out, "Write the report to this path");
    verify_cmd->callback([&] { exit_code = run_verify(verify); });

    BenchParams bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time variants and fit the cost models");
    bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated NxM list, M a square")
        ->capture_default_str();
    bench_cmd->add_option("--variants", bench.variants, "Comma-separated variant list")
        ->capture_default_str();
    bench_cmd->add_option("--repeats", bench.repeats, "Timed repetitions per configuration")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--epochs", bench.epochs, "Training epochs")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Base seed")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "Output CSV path")->required();
    bench_cmd->callback([&] { exit_code = run_bench(bench); });

    std::string manifest_path;
    auto* rerun_cmd = app.add_subcommand("rerun", "Re-execute a run from its manifest");
    rerun_cmd->add_option("manifest", manifest_path, "Manifest JSON path")->required();
    rerun_cmd->callback([&] { exit_code = run_rerun(manifest_path); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // help/version exit 0, any parse problem is an input error
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
