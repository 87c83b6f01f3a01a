#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tarpbench/data.hpp"
#include "tarpbench/tree.hpp"

namespace tarpbench {

/// Monte-Carlo estimate of one bound B_k^n.
struct BenchmarkPoint {
    std::size_t k = 0;
    std::size_t n = 0;
    double mean_error = 0.0;
    double std_error = 0.0;  // standard error of the mean over runs
    std::size_t runs = 0;
    double mean_training_time_s = 0.0;
    double mean_testing_time_s = 0.0;

    double cost(bool training_axis) const {
        return training_axis ? mean_training_time_s : mean_testing_time_s;
    }
};

struct AsymptoteEstimate {
    double value = 0.0;
    bool converged = false;
};

/// The bound sequence for one n: the majority-rule anchor b0 at zero cost,
/// the estimated points for k = 1..k_max, and the trailing-window asymptote.
struct BenchmarkCurve {
    std::string dataset_name;
    std::size_t n = 0;
    double b0 = 0.0;
    std::vector<BenchmarkPoint> points;  // sorted by k
    std::optional<AsymptoteEstimate> asymptote;
};

/// An external method placed on the benchmark plane.
struct MethodPoint {
    std::string name;
    double error = 0.0;
    double training_time_s = 0.0;
    double testing_time_s = 0.0;
};

enum class RegionLabel { negative_gain, computational_gain, structural_gain };
enum class CostAxis { training_time, testing_time };

std::string to_string(RegionLabel label);
std::string to_string(CostAxis axis);
CostAxis cost_axis_from_string(const std::string& name);

/// How train/validation/test rows are produced for each Monte-Carlo run.
/// `fixed` overrides the strategy; sequential is computed once; the
/// stratified_random partition is re-drawn per run from the master seed.
struct PartitionConfig {
    SplitStrategy strategy = SplitStrategy::sequential;
    SplitFractions fractions;
    std::optional<DataPartition> fixed;
};

/// Minimum class fraction: the error of always predicting the majority class.
double estimate_B0(const LabeledDataset& dataset);

/// Largest k such that train_size / 2^k >= 10; deeper trees give unreliable
/// per-node estimates.
std::size_t max_reliable_depth(std::size_t train_size);

/// Seed schedule shared by the estimators (and by external re-implementations
/// that must replay a run): for target depth k and run index r,
///   run_seed        = mix_seed(mix_seed(master_seed, k), r)
///   tree stream     = RandomStream(mix_seed(run_seed, 1))
///   partition seed  = mix_seed(run_seed, 2)   (stratified_random only)
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t k, std::size_t run);

/// Grows and evaluates `runs` fresh depth-k trees. Runs are independent and
/// may execute on up to `jobs` threads; results are identical for any job
/// count because every run derives its own stream from the master seed.
BenchmarkPoint estimate_Bkn(const LabeledDataset& dataset, const PartitionConfig& config,
                            std::size_t n, std::size_t k, std::size_t runs,
                            std::uint64_t master_seed, unsigned jobs = 1);

/// Points for k = 1..k_max (fresh trees per k), the b0 anchor, and the
/// asymptote estimate.
BenchmarkCurve estimate_curve(const LabeledDataset& dataset, const PartitionConfig& config,
                              std::size_t n, std::size_t k_max, std::size_t runs,
                              std::uint64_t master_seed, unsigned jobs = 1);

/// Trailing-window plateau detector. Converged when the spread of the last
/// `window` mean errors is within rel_tol of their level; abs_tol keeps
/// near-zero plateaus (spread below half a percentage point) convergent where
/// a purely relative rule would never fire. Returns the window mean when
/// converged, the last point otherwise.
AsymptoteEstimate estimate_asymptote(const BenchmarkCurve& curve, std::size_t window = 3,
                                     double rel_tol = 0.05, double abs_tol = 0.005);

/// Places a method on the benchmark plane:
///  - structural_gain: error strictly below the asymptote estimate;
///  - negative_gain: dominated (error and cost both no better) by the b0
///    anchor at zero cost or by a benchmark point still above the asymptote;
///  - computational_gain: everything else.
RegionLabel classify_region(const BenchmarkCurve& curve, const MethodPoint& method,
                            CostAxis axis = CostAxis::training_time);

/// classify_region plus the evidence: the dominating benchmark point for
/// negative_gain, the margin below the asymptote for structural_gain, and a
/// provisional flag when the asymptote has not converged.
struct RegionReport {
    RegionLabel label = RegionLabel::computational_gain;
    std::optional<std::size_t> dominating_k;  // nullopt means the b0 anchor
    double dominating_error = 0.0;
    double dominating_cost = 0.0;
    double margin = 0.0;  // asymptote - method error (structural_gain only)
    bool provisional_asymptote = false;
};

RegionReport explain_region(const BenchmarkCurve& curve, const MethodPoint& method,
                            CostAxis axis = CostAxis::training_time);

enum class ExportFormat { json, csv };

void to_json(nlohmann::json& j, const BenchmarkCurve& curve);
void from_json(const nlohmann::json& j, BenchmarkCurve& curve);
void to_json(nlohmann::json& j, const MethodPoint& m);
void from_json(const nlohmann::json& j, MethodPoint& m);

/// JSON: {"config": ..., "curves": [...], "methods": [...]}.
/// CSV: one row per (n, k) with columns
/// n,k,mean_error,std_error,mean_training_time_s,mean_testing_time_s; the
/// config echo rides in a leading '#' comment line.
void export_results(std::span<const BenchmarkCurve> curves, std::span<const MethodPoint> methods,
                    const std::filesystem::path& path, ExportFormat format,
                    const nlohmann::json* config_echo = nullptr);

std::vector<BenchmarkCurve> import_results_json(const std::filesystem::path& path);
std::vector<MethodPoint> load_method_points(const std::filesystem::path& path);

}  // namespace tarpbench
