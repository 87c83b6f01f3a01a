#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tarpbench {

/// Feature matrix with binary labels. Rows keep their input order; several
/// protocols (notably sequential splits) depend on it.
class LabeledDataset {
  public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<double> features, std::vector<int> labels, std::size_t n_cols);

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return n_cols_; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * n_cols_, n_cols_};
    }
    int label(std::size_t i) const { return labels_[i]; }
    std::span<const int> labels() const { return labels_; }
    std::span<const double> features() const { return features_; }

    /// Counts of labels 0 and 1.
    std::array<std::size_t, 2> class_counts() const;

    std::vector<std::string> feature_names;           // empty when the source had no header
    std::array<std::string, 2> label_values{"0", "1"};  // original label text, sorted order

  private:
    void validate() const;

    std::vector<double> features_;  // row-major rows() x cols()
    std::vector<int> labels_;
    std::size_t n_cols_ = 0;
};

struct CsvOptions {
    bool has_header = false;
    /// Column holding the class label: a header name, a 0-based index in
    /// decimal, or empty for the last column.
    std::string label_column;
};

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

enum class SplitStrategy { sequential, stratified_random };

SplitStrategy split_strategy_from_string(const std::string& name);
std::string to_string(SplitStrategy strategy);

struct SplitFractions {
    double train = 0.25;
    double validation = 0.25;
    double test = 0.5;
};

/// Disjoint train/validation/test index sets into one dataset.
struct DataPartition {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
};

/// Splits per class: floor(train), floor(validation), remainder to test.
/// sequential keeps row order within each class; stratified_random permutes
/// each class with the given seed first. Throws PartitionError if any split
/// misses a class.
DataPartition partition(const LabeledDataset& dataset, SplitStrategy strategy,
                        SplitFractions fractions, std::uint64_t seed);

/// Two-class Gaussian mixture: synthetic data source and analytic floor.
struct GaussianMixtureSpec {
    std::vector<double> mu1;
    std::vector<double> mu2;
    std::vector<double> cov1;  // p x p row-major
    std::vector<double> cov2;
    double prior1 = 0.5;

    std::size_t dim() const { return mu1.size(); }

    /// Throws unless both covariances are symmetric positive definite
    /// (eigenvalues > 1e-12) and 0 < prior1 < 1.
    void validate() const;
};

void to_json(nlohmann::json& j, const GaussianMixtureSpec& spec);
void from_json(const nlohmann::json& j, GaussianMixtureSpec& spec);
GaussianMixtureSpec load_mixture_spec(const std::filesystem::path& path);

/// Class-0 membership ~ Bernoulli(prior1); features from the class normal via
/// Cholesky factor of its covariance. Deterministic in the seed.
LabeledDataset sample_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t count,
                                       std::uint64_t seed);

struct BayesErrorEstimate {
    double value = 0.0;
    double std_error = 0.0;   // 0 for the closed form
    bool monte_carlo = false;
};

/// Equal covariances (elementwise within 1e-9): closed form from the
/// Mahalanobis distance. Otherwise Monte-Carlo over the mixture density.
BayesErrorEstimate bayes_error_gaussian(const GaussianMixtureSpec& spec,
                                        std::size_t mc_samples = 1000000,
                                        std::uint64_t mc_seed = 0x7a9e5);

}  // namespace tarpbench
