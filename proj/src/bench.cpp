#include "tarpbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "tarpbench/errors.hpp"

namespace tarpbench {

std::string to_string(RegionLabel label) {
    switch (label) {
        case RegionLabel::negative_gain: return "negative_gain";
        case RegionLabel::computational_gain: return "computational_gain";
        case RegionLabel::structural_gain: return "structural_gain";
    }
    return "computational_gain";
}

std::string to_string(CostAxis axis) {
    return axis == CostAxis::training_time ? "training_time" : "testing_time";
}

CostAxis cost_axis_from_string(const std::string& name) {
    if (name == "training_time" || name == "training") return CostAxis::training_time;
    if (name == "testing_time" || name == "testing") return CostAxis::testing_time;
    throw ValueError("unknown cost axis '" + name + "'");
}

double estimate_B0(const LabeledDataset& dataset) {
    const auto counts = dataset.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw ValueError("B0 needs both classes present");
    return static_cast<double>(std::min(counts[0], counts[1])) /
           static_cast<double>(counts[0] + counts[1]);
}

std::size_t max_reliable_depth(std::size_t train_size) {
    std::size_t k = 0;
    while ((train_size >> (k + 1)) >= 10) ++k;
    return k;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t k, std::size_t run) {
    return mix_seed(mix_seed(master_seed, k), run);
}

namespace {

/// Deterministic parallel map over run indices: every run writes its own
/// slot, so the aggregation below is independent of scheduling.
template <typename Fn>
void for_each_run(std::size_t runs, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || runs <= 1) {
        for (std::size_t r = 0; r < runs; ++r) fn(r);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    const unsigned worker_count = static_cast<unsigned>(
        std::min<std::size_t>(jobs, runs));
    workers.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            try {
                for (std::size_t r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) fn(r);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(runs);  // stop handing out work
            }
        });
    }
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
}

struct RunResult {
    double error = 0.0;
    double training_time_s = 0.0;
    double testing_time_s = 0.0;
};

}  // namespace

BenchmarkPoint estimate_Bkn(const LabeledDataset& dataset, const PartitionConfig& config,
                            std::size_t n, std::size_t k, std::size_t runs,
                            std::uint64_t master_seed, unsigned jobs) {
    if (n < 1) throw ParameterError("n must be at least 1");
    if (k < 1) throw ParameterError("k must be at least 1");
    if (runs < 1) throw ParameterError("runs must be at least 1");

    std::optional<DataPartition> shared;
    if (config.fixed)
        shared = *config.fixed;
    else if (config.strategy == SplitStrategy::sequential)
        shared = partition(dataset, SplitStrategy::sequential, config.fractions, 0);

    std::vector<RunResult> results(runs);
    for_each_run(runs, jobs, [&](std::size_t run) {
        const std::uint64_t seed = run_seed(master_seed, k, run);
        DataPartition local;
        const DataPartition* split = shared ? &*shared : nullptr;
        if (!split) {
            local = partition(dataset, SplitStrategy::stratified_random, config.fractions,
                              mix_seed(seed, 2));
            split = &local;
        }
        RandomStream stream(mix_seed(seed, 1));
        TarpTree tree = grow_tree(dataset, *split, n, k, stream);
        results[run].error = evaluate_tree(tree, dataset, split->test_idx);
        results[run].training_time_s = tree.training_time_s;
        results[run].testing_time_s = tree.testing_time_s;
    });

    BenchmarkPoint point;
    point.k = k;
    point.n = n;
    point.runs = runs;
    double sum = 0.0, train_sum = 0.0, test_sum = 0.0;
    for (const auto& r : results) {
        sum += r.error;
        train_sum += r.training_time_s;
        test_sum += r.testing_time_s;
    }
    const double count = static_cast<double>(runs);
    point.mean_error = sum / count;
    point.mean_training_time_s = train_sum / count;
    point.mean_testing_time_s = test_sum / count;
    if (runs > 1) {
        double sq = 0.0;
        for (const auto& r : results) {
            const double d = r.error - point.mean_error;
            sq += d * d;
        }
        point.std_error = std::sqrt(sq / (count - 1.0)) / std::sqrt(count);
    }
    return point;
}

BenchmarkCurve estimate_curve(const LabeledDataset& dataset, const PartitionConfig& config,
                              std::size_t n, std::size_t k_max, std::size_t runs,
                              std::uint64_t master_seed, unsigned jobs) {
    if (k_max < 1) throw ParameterError("k_max must be at least 1");
    BenchmarkCurve curve;
    curve.n = n;
    curve.b0 = estimate_B0(dataset);
    curve.points.reserve(k_max);
    for (std::size_t k = 1; k <= k_max; ++k)
        curve.points.push_back(estimate_Bkn(dataset, config, n, k, runs, master_seed, jobs));
    if (curve.points.size() >= 3) {
        curve.asymptote = estimate_asymptote(curve);
    } else {
        // Too short for the plateau window: provisional, last point.
        curve.asymptote = AsymptoteEstimate{curve.points.back().mean_error, false};
    }
    return curve;
}

AsymptoteEstimate estimate_asymptote(const BenchmarkCurve& curve, std::size_t window,
                                     double rel_tol, double abs_tol) {
    if (window < 1) throw ParameterError("window must be at least 1");
    if (curve.points.size() < window)
        throw ValueError("curve has " + std::to_string(curve.points.size()) +
                         " points, need at least " + std::to_string(window));
    double lo = 1.0, hi = 0.0, sum = 0.0;
    for (std::size_t i = curve.points.size() - window; i < curve.points.size(); ++i) {
        const double e = curve.points[i].mean_error;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    const double mean = sum / static_cast<double>(window);
    const double spread = hi - lo;
    AsymptoteEstimate estimate;
    estimate.converged = spread <= std::max(rel_tol * mean, abs_tol);
    estimate.value = estimate.converged ? mean : curve.points.back().mean_error;
    return estimate;
}

RegionLabel classify_region(const BenchmarkCurve& curve, const MethodPoint& method,
                            CostAxis axis) {
    return explain_region(curve, method, axis).label;
}

RegionReport explain_region(const BenchmarkCurve& curve, const MethodPoint& method,
                            CostAxis axis) {
    if (!std::isfinite(method.error) || !std::isfinite(method.training_time_s) ||
        !std::isfinite(method.testing_time_s))
        throw ValueError("method point fields must be finite");
    if (!curve.asymptote) throw ValueError("curve has no asymptote estimate");

    const bool training_axis = axis == CostAxis::training_time;
    const double method_cost =
        training_axis ? method.training_time_s : method.testing_time_s;

    RegionReport report;
    report.provisional_asymptote = !curve.asymptote->converged;

    if (method.error < curve.asymptote->value) {
        report.label = RegionLabel::structural_gain;
        report.margin = curve.asymptote->value - method.error;
        return report;
    }

    // Dominated by a finite-cost heuristic: the anchor or any point whose
    // error is still above the asymptote (points at or below it stand in for
    // the limit, not for a competing heuristic).
    const auto dominates = [&](double error, double cost) {
        return error > curve.asymptote->value && error <= method.error && cost <= method_cost;
    };
    if (dominates(curve.b0, 0.0)) {
        report.label = RegionLabel::negative_gain;
        report.dominating_error = curve.b0;
        report.dominating_cost = 0.0;
        return report;
    }
    for (const auto& point : curve.points) {
        if (dominates(point.mean_error, point.cost(training_axis))) {
            report.label = RegionLabel::negative_gain;
            report.dominating_k = point.k;
            report.dominating_error = point.mean_error;
            report.dominating_cost = point.cost(training_axis);
            return report;
        }
    }
    report.label = RegionLabel::computational_gain;
    return report;
}

void to_json(nlohmann::json& j, const BenchmarkCurve& curve) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : curve.points) {
        points.push_back({{"k", p.k},
                          {"mean_error", p.mean_error},
                          {"std_error", p.std_error},
                          {"mean_training_time_s", p.mean_training_time_s},
                          {"mean_testing_time_s", p.mean_testing_time_s},
                          {"runs", p.runs}});
    }
    j = nlohmann::json{{"dataset", curve.dataset_name},
                       {"n", curve.n},
                       {"b0", curve.b0},
                       {"points", std::move(points)}};
    if (curve.asymptote)
        j["asymptote"] = {{"value", curve.asymptote->value},
                          {"converged", curve.asymptote->converged}};
}

void from_json(const nlohmann::json& j, BenchmarkCurve& curve) {
    curve.dataset_name = j.value("dataset", "");
    curve.n = j.at("n").get<std::size_t>();
    curve.b0 = j.at("b0").get<double>();
    curve.points.clear();
    for (const auto& pj : j.at("points")) {
        BenchmarkPoint p;
        p.k = pj.at("k").get<std::size_t>();
        p.n = curve.n;
        p.mean_error = pj.at("mean_error").get<double>();
        p.std_error = pj.at("std_error").get<double>();
        p.mean_training_time_s = pj.at("mean_training_time_s").get<double>();
        p.mean_testing_time_s = pj.at("mean_testing_time_s").get<double>();
        p.runs = pj.at("runs").get<std::size_t>();
        curve.points.push_back(std::move(p));
    }
    if (j.contains("asymptote")) {
        AsymptoteEstimate a;
        a.value = j.at("asymptote").at("value").get<double>();
        a.converged = j.at("asymptote").at("converged").get<bool>();
        curve.asymptote = a;
    } else {
        curve.asymptote.reset();
    }
}

void to_json(nlohmann::json& j, const MethodPoint& m) {
    j = nlohmann::json{{"name", m.name},
                       {"error", m.error},
                       {"training_time_s", m.training_time_s},
                       {"testing_time_s", m.testing_time_s}};
}

void from_json(const nlohmann::json& j, MethodPoint& m) {
    m.name = j.at("name").get<std::string>();
    m.error = j.at("error").get<double>();
    m.training_time_s = j.at("training_time_s").get<double>();
    m.testing_time_s = j.at("testing_time_s").get<double>();
}

void export_results(std::span<const BenchmarkCurve> curves, std::span<const MethodPoint> methods,
                    const std::filesystem::path& path, ExportFormat format,
                    const nlohmann::json* config_echo) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");

    if (format == ExportFormat::json) {
        nlohmann::json j;
        if (config_echo) j["config"] = *config_echo;
        j["curves"] = nlohmann::json::array();
        for (const auto& curve : curves) j["curves"].push_back(curve);
        j["methods"] = nlohmann::json::array();
        for (const auto& m : methods) j["methods"].push_back(m);
        out << j.dump(2) << '\n';
    } else {
        if (config_echo) out << "# config: " << config_echo->dump() << '\n';
        out << "n,k,mean_error,std_error,mean_training_time_s,mean_testing_time_s\n";
        char buf[64];
        const auto num = [&buf](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        for (const auto& curve : curves) {
            for (const auto& p : curve.points) {
                out << curve.n << ',' << p.k << ',' << num(p.mean_error) << ','
                    << num(p.std_error) << ',' << num(p.mean_training_time_s) << ','
                    << num(p.mean_testing_time_s) << '\n';
            }
        }
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<BenchmarkCurve> import_results_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        std::vector<BenchmarkCurve> curves;
        for (const auto& cj : j.at("curves")) curves.push_back(cj.get<BenchmarkCurve>());
        return curves;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("results file '" + path.string() + "': " + e.what());
    }
}

std::vector<MethodPoint> load_method_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        std::vector<MethodPoint> methods;
        for (const auto& mj : j) methods.push_back(mj.get<MethodPoint>());
        return methods;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("methods file '" + path.string() + "': " + e.what());
    }
}

}  // namespace tarpbench
