// tetlb: partition a mesh file, dump curve keys, or replay an adaptive scenario.
//
// Exit codes: 0 ok, 1 runtime error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "tetlb/tetlb.hpp"

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

struct Options {
    std::string method = "rtk";
    std::string curve = "hilbert";
    std::string mode = "preserve";
    int order = tetlb::default_curve_order;
    int p = 1;
    int k = 4;
    std::optional<std::uint64_t> seed;
    std::optional<int> p_override;
    std::optional<std::string> method_override;
    std::optional<std::string> mode_override;
    std::string out;
    std::string report;
    std::string input;
    unsigned threads = 1;
    bool timing = false;
};

// Writes to `path`, or stdout when empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw tetlb::error(tetlb::errc::invalid_argument, "cannot open " + path + " for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
    void finish(const std::string& path) {
        stream().flush();
        if (!stream()) throw tetlb::error(tetlb::errc::invalid_argument, "failed writing " + (path.empty() ? std::string("stdout") : path));
    }

private:
    std::ofstream file_;
};

tetlb::TetMesh load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tetlb::error(tetlb::errc::not_found, "cannot open mesh file " + path);
    try {
        return tetlb::read_mesh(in);
    } catch (const tetlb::parse_error& e) {
        throw tetlb::error(tetlb::errc::parse, path + ": " + e.what());
    }
}

int cmd_partition(const Options& o) {
    const tetlb::TetMesh mesh = load_input(o.input);
    const tetlb::RefinementForest forest(mesh);
    const auto weights = mesh.weights();
    tetlb::PartitionConfig cfg;
    cfg.method = tetlb::parse_method(o.method);
    cfg.mode = tetlb::parse_mode(o.mode);
    cfg.order = o.order;
    cfg.k = o.k;
    cfg.p = o.p;
    cfg.exec.threads = o.threads;
    const auto parts = tetlb::partition_mesh(mesh, forest, weights, cfg);

    Output csv(o.out);
    csv.stream() << "element_id,part\n";
    for (tetlb::ElementId id : mesh.live_elements()) csv.stream() << id << ',' << parts.part(id) << '\n';
    csv.finish(o.out);

    const std::string report_path = !o.report.empty() ? o.report : (o.out.empty() ? "" : o.out + ".report.json");
    if (!report_path.empty()) {
        const auto report = tetlb::quality_report(mesh, parts, weights, o.p, std::nullopt, &forest);
        Output json(report_path);
        json.stream() << nlohmann::json(report).dump(2) << '\n';
        json.finish(report_path);
    }
    return 0;
}

int cmd_sfc_dump(const Options& o) {
    const tetlb::TetMesh mesh = load_input(o.input);
    const auto kind = o.curve == "morton" ? tetlb::CurveKind::Morton : tetlb::CurveKind::Hilbert;
    const auto keys = tetlb::element_keys(mesh, tetlb::parse_mode(o.mode), kind, o.order,
                                          tetlb::ExecPolicy{o.threads});
    Output csv(o.out);
    csv.stream() << "element_id,key\n";
    for (const auto& k : keys) csv.stream() << k.element_id << ',' << k.key << '\n';
    csv.finish(o.out);
    return 0;
}

int cmd_bench(const Options& o) {
    std::ifstream in(o.input);
    if (!in) throw tetlb::error(tetlb::errc::not_found, "cannot open scenario file " + o.input);
    tetlb::Scenario s;
    try {
        s = tetlb::parse_scenario(in);
    } catch (const tetlb::parse_error& e) {
        throw tetlb::error(tetlb::errc::parse, o.input + ": " + e.what());
    }
    if (o.method_override) s.method = tetlb::parse_method(*o.method_override);
    if (o.mode_override) s.mode = tetlb::parse_mode(*o.mode_override);
    if (o.p_override) s.p = *o.p_override;
    if (o.seed) s.seed = *o.seed;
    s.exec.threads = o.threads;
    s.measure_time = o.timing;

    const auto records = tetlb::run_scenario(s);

    Output lines(o.out);
    for (const auto& r : records) lines.stream() << nlohmann::json(r).dump() << '\n';
    lines.finish(o.out);

    double imbalance = 0.0, cut = 0.0, migration = 0.0;
    for (const auto& r : records) {
        imbalance += r.report.imbalance;
        cut += static_cast<double>(r.report.interface_faces);
        migration += r.report.migration_fraction;
    }
    const double n = static_cast<double>(records.size());
    std::FILE* summary = o.out.empty() ? stderr : stdout;
    std::fprintf(summary, "%-8s %-8s %5s %6s %10s %14s %12s %14s\n", "method", "mode", "p", "steps",
                 "elements", "mean_imbalance", "mean_cut", "mean_migration");
    std::fprintf(summary, "%-8s %-8s %5d %6zu %10zu %14.6f %12.2f %14.6f\n", tetlb::to_string(s.method),
                 tetlb::to_string(s.mode), s.p, records.size(), records.back().element_count, imbalance / n,
                 cut / n, migration / n);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Partitioning and dynamic load balancing for adaptive tetrahedral meshes", "tetlb"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--mode", o.mode, "Bounding-box normalization")->check(CLI::IsMember({"preserve", "stretch"}));
        cmd->add_option("--order", o.order, "Curve order (bits per axis)")->check(CLI::Range(1, tetlb::max_curve_order));
        cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
        cmd->add_option("--out", o.out, "Output path (default: stdout)");
    };

    auto* partition = app.add_subcommand("partition", "Partition a tetmesh file");
    partition->add_option("--method", o.method, "Partitioning method")->check(CLI::IsMember({"rtk", "morton", "hilbert"}));
    partition->add_option("--p", o.p, "Number of parts")->required()->check(CLI::Range(1, 1 << 20));
    partition->add_option("--k", o.k, "Subintervals per cut box and iteration")->check(CLI::Range(2, 1 << 16));
    partition->add_option("--report", o.report, "QualityReport JSON path (default: <out>.report.json)");
    partition->add_option("input", o.input, "Mesh file")->required();
    add_common(partition);

    auto* dump = app.add_subcommand("sfc-dump", "Write element_id,key CSV for a mesh");
    dump->add_option("--method", o.curve, "Curve")->check(CLI::IsMember({"morton", "hilbert"}));
    dump->add_option("input", o.input, "Mesh file")->required();
    add_common(dump);

    auto* bench = app.add_subcommand("bench", "Replay an adaptive scenario and emit JSON-lines records");
    bench->add_option("--method", o.method_override, "Override the scenario method")
        ->check(CLI::IsMember({"rtk", "morton", "hilbert"}));
    bench->add_option("--p", o.p_override, "Override the scenario part count")->check(CLI::Range(1, 1 << 20));
    bench->add_option("--seed", o.seed, "Override the scenario seed");
    bench->add_flag("--timing", o.timing, "Record wall-clock timings (makes output run-dependent)");
    bench->add_option("input", o.input, "Scenario file")->required();
    bench->add_option("--mode", o.mode_override, "Override the scenario normalization")
        ->check(CLI::IsMember({"preserve", "stretch"}));
    bench->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
    bench->add_option("--out", o.out, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }
    try {
        if (partition->parsed()) return cmd_partition(o);
        if (dump->parsed()) return cmd_sfc_dump(o);
        return cmd_bench(o);
    } catch (const tetlb::error& e) {
        std::cerr << "tetlb: " << e.what() << '\n';
        return e.code() == tetlb::errc::scenario ? exit_usage : exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "tetlb: " << e.what() << '\n';
        return exit_runtime;
    }
}
