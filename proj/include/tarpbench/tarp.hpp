#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tarpbench/data.hpp"
#include "tarpbench/random.hpp"

namespace tarpbench {

/// Random direction with i.i.d. Uniform[-1,1] components.
struct ProjectionVector {
    std::vector<double> components;

    std::size_t dim() const { return components.size(); }
};

/// Never returns the zero vector (resampled on that draw).
ProjectionVector sample_projection(std::size_t dim, RandomStream& stream);

/// Dot product with dimension check.
double project_point(const ProjectionVector& r, std::span<const double> x);

/// Projections of all rows, in row order.
std::vector<double> project(const LabeledDataset& dataset, const ProjectionVector& r);

/// Projections of the selected rows, in the order given.
std::vector<double> project(const LabeledDataset& dataset, std::span<const std::size_t> rows,
                            const ProjectionVector& r);

/// Per-class moments of projected values. Standard deviations are the
/// population kind (divide by the class count).
struct GaussianFit1D {
    double mu_a = 0.0;     // class 0
    double mu_b = 0.0;     // class 1
    double sigma_a = 0.0;
    double sigma_b = 0.0;
    double prior_a = 0.0;
    double prior_b = 0.0;
};

GaussianFit1D fit_gaussians_1d(std::span<const double> values, std::span<const int> labels);

/// Crossing of the two weighted class densities that lies strictly between
/// the means. Equal means give nullopt (no split); a missing crossing falls
/// back to the unweighted midpoint. One exactly-zero sigma is floored to
/// 1e-12 so the near-degenerate crossing survives.
std::optional<double> bayes_threshold_1d(const GaussianFit1D& fit);

/// 1 - sum of squared class fractions; in [0, 0.5] for two classes.
double gini_impurity(std::size_t n0, std::size_t n1);

/// One-dimensional thresholding classifier. A non-finite threshold makes it
/// constant: +inf always answers class_below, -inf always the other class.
struct TarpClassifier {
    ProjectionVector projection;
    double threshold = std::numeric_limits<double>::infinity();
    int class_below = 0;

    bool is_constant() const { return !std::isfinite(threshold); }

    int classify_projected(double value) const {
        if (is_constant()) return threshold > 0 ? class_below : 1 - class_below;
        return value < threshold ? class_below : 1 - class_below;
    }

    int classify(std::span<const double> x) const {
        if (is_constant()) return threshold > 0 ? class_below : 1 - class_below;
        return classify_projected(project_point(projection, x));
    }

    /// True when x routes to the "below" side (constant classifiers route
    /// everything to one fixed side).
    bool routes_below(std::span<const double> x) const {
        if (is_constant()) return threshold > 0;
        return project_point(projection, x) < threshold;
    }
};

void to_json(nlohmann::json& j, const TarpClassifier& c);
void from_json(const nlohmann::json& j, TarpClassifier& c);

/// Threshold and orientation trained on projected values; the projection
/// itself is supplied by the caller when assembling a TarpClassifier.
struct TarpParams {
    double threshold = std::numeric_limits<double>::infinity();
    int class_below = 0;
    /// Size-weighted mean Gini impurity of the two children on the training
    /// data (equals the parent impurity when split is false).
    double weighted_gini = 0.0;
    bool split = false;
};

/// Fits the projected class Gaussians, places the Bayes threshold, and
/// orients class_below toward the smaller projected mean (ties to class 0).
/// Single-class input or a degenerate fit yields constant parameters that
/// predict the training majority.
TarpParams train_tarp(std::span<const double> values, std::span<const int> labels);

/// Index of the candidate with the smallest weighted-children Gini.
/// Candidates without a split are eligible only if none splits; ties go to
/// the lowest index.
std::size_t select_best_tarp(std::span<const TarpParams> candidates);

/// Fraction of misclassified rows. Throws ValueError on an empty selection.
double error_rate(const TarpClassifier& classifier, const LabeledDataset& dataset,
                  std::span<const std::size_t> rows);
double error_rate(const TarpClassifier& classifier, const LabeledDataset& dataset);

}  // namespace tarpbench
