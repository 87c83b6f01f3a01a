// tarpbench command-line interface.
//
// Exit codes: 0 success, 1 usage, 2 data/schema, 3 runtime.

#include <cinttypes>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "tarpbench/bench.hpp"
#include "tarpbench/data.hpp"
#include "tarpbench/errors.hpp"
#include "tarpbench/random.hpp"

namespace tb = tarpbench;

namespace {

constexpr std::uint64_t kSynthStreamTag = 0xDA7A;

struct EstimateOptions {
    std::string data_path;
    std::string synth_path;
    std::size_t synth_count = 6000;
    std::string label_column;
    bool has_header = false;
    std::vector<std::size_t> n_list;
    std::size_t k_max = 0;
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    std::string split = "sequential";
    std::vector<double> fractions{0.25, 0.25, 0.5};
    std::string out_path;
    std::string format = "json";
    std::string cost_axis = "training_time";
    unsigned jobs = 1;
    bool kmax_guard = true;
};

nlohmann::json echo_config(const EstimateOptions& opt) {
    nlohmann::json j;
    j["command"] = "estimate";
    if (!opt.data_path.empty()) j["data"] = opt.data_path;
    if (!opt.synth_path.empty()) {
        j["synth"] = opt.synth_path;
        j["count"] = opt.synth_count;
    }
    j["label_column"] = opt.label_column;
    j["header"] = opt.has_header;
    j["n"] = opt.n_list;
    j["kmax"] = opt.k_max;
    j["runs"] = opt.runs;
    j["seed"] = opt.seed;
    j["split"] = opt.split;
    j["fractions"] = opt.fractions;
    j["out"] = opt.out_path;
    j["format"] = opt.format;
    j["cost_axis"] = opt.cost_axis;
    j["jobs"] = opt.jobs;
    j["kmax_guard"] = opt.kmax_guard;
    return j;
}

std::string percent(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << value * 100.0 << '%';
    return out.str();
}

tb::SplitFractions to_fractions(const std::vector<double>& values) {
    if (values.size() != 3)
        throw tb::ParameterError("--fractions needs exactly three values: train,val,test");
    return {values[0], values[1], values[2]};
}

int run_estimate(const EstimateOptions& opt) {
    if (opt.data_path.empty() == opt.synth_path.empty())
        throw tb::ParameterError("exactly one of --data and --synth is required");

    tb::LabeledDataset dataset;
    std::string dataset_name;
    if (!opt.data_path.empty()) {
        tb::CsvOptions csv;
        csv.has_header = opt.has_header;
        csv.label_column = opt.label_column;
        dataset = tb::load_csv(opt.data_path, csv);
        dataset_name = std::filesystem::path(opt.data_path).stem().string();
    } else {
        const auto spec = tb::load_mixture_spec(opt.synth_path);
        dataset = tb::sample_gaussian_mixture(spec, opt.synth_count,
                                              tb::mix_seed(opt.seed, kSynthStreamTag));
        dataset_name =
            "synth:" + std::filesystem::path(opt.synth_path).stem().string();
    }

    tb::PartitionConfig config;
    config.strategy = tb::split_strategy_from_string(opt.split);
    config.fractions = to_fractions(opt.fractions);

    const auto probe =
        tb::partition(dataset, tb::SplitStrategy::sequential, config.fractions, 0);
    const std::size_t train_size = probe.train_idx.size();
    const std::size_t guard_depth = tb::max_reliable_depth(train_size);
    if (opt.k_max > guard_depth) {
        if (opt.kmax_guard)
            throw tb::ParameterError(
                "kmax " + std::to_string(opt.k_max) + " leaves fewer than 10 training samples " +
                "per leaf (train size " + std::to_string(train_size) + ", reliable depth " +
                std::to_string(guard_depth) + "); pass --no-kmax-guard to override");
        std::cerr << "warning: kmax " << opt.k_max << " exceeds the reliable depth "
                  << guard_depth << " for train size " << train_size << "\n";
    }

    const auto counts = dataset.class_counts();
    std::cout << "dataset " << dataset_name << ": N=" << dataset.rows() << " p="
              << dataset.cols() << " (N0=" << counts[0] << ", N1=" << counts[1]
              << "), B0 = " << percent(tb::estimate_B0(dataset)) << "\n";

    std::vector<tb::BenchmarkCurve> curves;
    for (const std::size_t n : opt.n_list) {
        auto curve = tb::estimate_curve(dataset, config, n, opt.k_max, opt.runs, opt.seed,
                                        opt.jobs);
        curve.dataset_name = dataset_name;
        std::cout << "\nn=" << n << "\n";
        std::cout << std::setw(4) << "k" << std::setw(12) << "B_k^n" << std::setw(12)
                  << "s.e." << std::setw(14) << "train(s)" << std::setw(14) << "test(s)"
                  << "\n";
        for (const auto& point : curve.points) {
            std::cout << std::setw(4) << point.k << std::setw(12) << percent(point.mean_error)
                      << std::setw(12) << percent(point.std_error) << std::setw(14)
                      << std::scientific << std::setprecision(3)
                      << point.mean_training_time_s << std::setw(14)
                      << point.mean_testing_time_s << std::defaultfloat << "\n";
        }
        std::cout << "asymptote: " << percent(curve.asymptote->value)
                  << (curve.asymptote->converged ? " (converged)" : " (provisional)") << "\n";
        curves.push_back(std::move(curve));
    }

    const auto echo = echo_config(opt);
    const auto format =
        opt.format == "csv" ? tb::ExportFormat::csv : tb::ExportFormat::json;
    tb::export_results(curves, {}, opt.out_path, format, &echo);
    std::cout << "\nwrote " << opt.out_path << "\n";
    return 0;
}

int run_synth(const std::string& spec_path, std::size_t count, std::uint64_t seed,
              const std::string& out_path) {
    const auto spec = tb::load_mixture_spec(spec_path);
    if (count < 2) throw tb::ParameterError("--count must be at least 2");
    const auto dataset = tb::sample_gaussian_mixture(spec, count, seed);
    tb::write_csv(dataset, out_path);
    const auto bayes = tb::bayes_error_gaussian(spec);
    std::cout << "wrote " << out_path << " (" << dataset.rows() << " rows, " << dataset.cols()
              << " features)\n";
    std::cout << "analytic Bayes error: " << std::setprecision(10) << bayes.value;
    if (bayes.monte_carlo)
        std::cout << " (Monte-Carlo, s.e. " << bayes.std_error << ")";
    else
        std::cout << " (closed form)";
    std::cout << "\n";
    return 0;
}

int run_region(const std::string& curves_path, const std::string& methods_path,
               const std::string& axis_name) {
    const auto curves = tb::import_results_json(curves_path);
    const auto methods = tb::load_method_points(methods_path);
    const auto axis = tb::cost_axis_from_string(axis_name);
    if (curves.empty()) throw tb::ValueError("results file contains no curves");

    for (const auto& curve : curves) {
        if (curve.points.empty())
            throw tb::ValueError("curve n=" + std::to_string(curve.n) + " has no points");
        std::cout << "curve n=" << curve.n;
        if (!curve.dataset_name.empty()) std::cout << " (" << curve.dataset_name << ")";
        std::cout << ": b0 = " << percent(curve.b0) << ", asymptote = "
                  << percent(curve.asymptote ? curve.asymptote->value : 0.0)
                  << (curve.asymptote && curve.asymptote->converged ? "" : " [provisional]")
                  << "\n";
        if (curve.asymptote && !curve.asymptote->converged)
            std::cout << "  warning: asymptote has not converged; labels are provisional\n";
        for (const auto& m : methods) {
            const auto report = tb::explain_region(curve, m, axis);
            const double cost =
                axis == tb::CostAxis::training_time ? m.training_time_s : m.testing_time_s;
            std::cout << "  " << m.name << ": error " << percent(m.error) << ", cost " << cost
                      << "s -> " << tb::to_string(report.label);
            if (report.label == tb::RegionLabel::negative_gain) {
                if (report.dominating_k)
                    std::cout << " (dominated by k=" << *report.dominating_k << ": error "
                              << percent(report.dominating_error) << " at "
                              << report.dominating_cost << "s)";
                else
                    std::cout << " (dominated by the zero-cost B0 anchor at "
                              << percent(report.dominating_error) << ")";
            } else if (report.label == tb::RegionLabel::structural_gain) {
                std::cout << " (margin " << percent(report.margin) << " below the asymptote)";
            }
            std::cout << "\n";
        }
    }
    return 0;
}

int run_export(const std::string& in_path, const std::string& out_path,
               const std::string& format_name) {
    std::ifstream in(in_path);
    if (!in) throw tb::IoError("cannot open '" + in_path + "'");
    nlohmann::json doc;
    std::vector<tb::BenchmarkCurve> curves;
    std::vector<tb::MethodPoint> methods;
    nlohmann::json echo;
    try {
        in >> doc;
        for (const auto& cj : doc.at("curves")) curves.push_back(cj.get<tb::BenchmarkCurve>());
        if (doc.contains("methods"))
            for (const auto& mj : doc["methods"]) methods.push_back(mj.get<tb::MethodPoint>());
        if (doc.contains("config")) echo = doc["config"];
    } catch (const nlohmann::json::exception& e) {
        throw tb::SchemaError("results file '" + in_path + "': " + e.what());
    }
    const auto format =
        format_name == "json" ? tb::ExportFormat::json : tb::ExportFormat::csv;
    tb::export_results(curves, methods, out_path, format, echo.is_null() ? nullptr : &echo);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TARP benchmark curves for binary classification problems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tarpbench 0.1.0");

    EstimateOptions est;
    auto* estimate = app.add_subcommand(
        "estimate", "Estimate benchmark curves B_k^n and export them");
    estimate->add_option("--data", est.data_path, "CSV dataset path");
    estimate->add_option("--synth", est.synth_path, "Gaussian-mixture spec JSON path");
    estimate->add_option("--count", est.synth_count, "Sample count for --synth")
        ->capture_default_str();
    estimate->add_option("--label-col", est.label_column,
                         "Label column name or 0-based index (default: last column)");
    estimate->add_flag("--header", est.has_header, "First CSV row is a header");
    estimate->add_option("--n", est.n_list, "Candidates per node, e.g. 1,10,50")
        ->required()
        ->delimiter(',');
    estimate->add_option("--kmax", est.k_max, "Deepest tree level to estimate")->required();
    estimate->add_option("--runs", est.runs, "Monte-Carlo runs per (k,n)")
        ->capture_default_str();
    estimate->add_option("--seed", est.seed, "Master seed (mandatory: runs must be replayable)")
        ->required();
    estimate->add_option("--split", est.split, "sequential | stratified_random")
        ->capture_default_str();
    estimate->add_option("--fractions", est.fractions, "train,val,test fractions")
        ->delimiter(',')
        ->capture_default_str();
    estimate->add_option("--out", est.out_path, "Output file")->required();
    estimate->add_option("--format", est.format, "json | csv")->capture_default_str();
    estimate->add_option("--cost-axis", est.cost_axis, "training_time | testing_time")
        ->capture_default_str();
    estimate->add_option("--jobs", est.jobs, "Worker threads (results identical for any value)")
        ->capture_default_str();
    estimate->add_flag("--kmax-guard,!--no-kmax-guard", est.kmax_guard,
                       "Refuse kmax with fewer than 10 training samples per leaf")
        ->capture_default_str();

    std::string synth_spec, synth_out;
    std::size_t synth_count = 0;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand(
        "synth", "Sample a Gaussian-mixture CSV and print its Bayes error");
    synth->add_option("spec", synth_spec, "Mixture spec JSON path")->required();
    synth->add_option("--count", synth_count, "Number of samples")->required();
    synth->add_option("--seed", synth_seed, "Sampling seed")->required();
    synth->add_option("--out", synth_out, "Output CSV path")->required();

    std::string region_curves, region_methods, region_axis = "training_time";
    auto* region = app.add_subcommand(
        "region", "Place method points on the benchmark plane of exported curves");
    region->add_option("--curves", region_curves, "Results JSON from estimate")->required();
    region->add_option("--methods", region_methods, "JSON array of method points")->required();
    region->add_option("--cost-axis", region_axis, "training_time | testing_time")
        ->capture_default_str();

    std::string export_in, export_out, export_format = "csv";
    auto* exporter = app.add_subcommand(
        "export", "Re-emit a results JSON file as plot-ready CSV (or JSON)");
    exporter->add_option("--in", export_in, "Results JSON from estimate")->required();
    exporter->add_option("--out", export_out, "Output file")->required();
    exporter->add_option("--format", export_format, "csv | json")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (estimate->parsed()) return run_estimate(est);
        if (synth->parsed()) return run_synth(synth_spec, synth_count, synth_seed, synth_out);
        if (region->parsed()) return run_region(region_curves, region_methods, region_axis);
        if (exporter->parsed()) return run_export(export_in, export_out, export_format);
    } catch (const tb::ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const tb::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const tb::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const tb::ValueError& e) {
        std::cerr << "value error: " << e.what() << "\n";
        return 2;
    } catch (const tb::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const tb::PartitionError& e) {
        std::cerr << "partition error: " << e.what() << "\n";
        return 2;
    } catch (const tb::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 2;
    } catch (const tb::FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return 2;
    } catch (const tb::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
