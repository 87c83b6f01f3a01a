#include "tarpbench/tarp.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "tarpbench/errors.hpp"

namespace tarpbench {

namespace {

constexpr double kSigmaFloor = 1e-12;
constexpr double kEqualSigmaTol = 1e-12;

bool strictly_between(double t, double lo, double hi) { return t > lo && t < hi; }

}  // namespace

ProjectionVector sample_projection(std::size_t dim, RandomStream& stream) {
    if (dim == 0) throw DimensionError("projection dimension must be at least 1");
    ProjectionVector r;
    r.components.resize(dim);
    do {
        for (auto& c : r.components) c = stream.uniform(-1.0, 1.0);
    } while (std::all_of(r.components.begin(), r.components.end(),
                         [](double c) { return c == 0.0; }));
    return r;
}

double project_point(const ProjectionVector& r, std::span<const double> x) {
    if (r.dim() != x.size())
        throw DimensionError("projection dimension " + std::to_string(r.dim()) +
                             " does not match point dimension " + std::to_string(x.size()));
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += r.components[i] * x[i];
    return dot;
}

std::vector<double> project(const LabeledDataset& dataset, const ProjectionVector& r) {
    std::vector<double> out(dataset.rows());
    for (std::size_t i = 0; i < dataset.rows(); ++i) out[i] = project_point(r, dataset.row(i));
    return out;
}

std::vector<double> project(const LabeledDataset& dataset, std::span<const std::size_t> rows,
                            const ProjectionVector& r) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = project_point(r, dataset.row(rows[i]));
    return out;
}

GaussianFit1D fit_gaussians_1d(std::span<const double> values, std::span<const int> labels) {
    if (values.size() != labels.size())
        throw DimensionError("values and labels have different lengths");
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum[labels[i]] += values[i];
        ++count[labels[i]];
    }
    if (count[0] == 0 || count[1] == 0)
        throw FitError("both classes must be present to fit projected Gaussians");

    GaussianFit1D fit;
    fit.mu_a = sum[0] / static_cast<double>(count[0]);
    fit.mu_b = sum[1] / static_cast<double>(count[1]);
    double sq[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - (labels[i] == 0 ? fit.mu_a : fit.mu_b);
        sq[labels[i]] += d * d;
    }
    fit.sigma_a = std::sqrt(sq[0] / static_cast<double>(count[0]));
    fit.sigma_b = std::sqrt(sq[1] / static_cast<double>(count[1]));
    const double n = static_cast<double>(values.size());
    fit.prior_a = static_cast<double>(count[0]) / n;
    fit.prior_b = static_cast<double>(count[1]) / n;
    return fit;
}

std::optional<double> bayes_threshold_1d(const GaussianFit1D& fit) {
    if (fit.mu_a == fit.mu_b) return std::nullopt;

    const double lo = std::min(fit.mu_a, fit.mu_b);
    const double hi = std::max(fit.mu_a, fit.mu_b);
    const double midpoint = 0.5 * (fit.mu_a + fit.mu_b);
    if (fit.sigma_a == 0.0 && fit.sigma_b == 0.0) return midpoint;

    const double sa = std::max(fit.sigma_a, kSigmaFloor);
    const double sb = std::max(fit.sigma_b, kSigmaFloor);

    if (std::abs(sa - sb) <= kEqualSigmaTol) {
        const double s = 0.5 * (sa + sb);
        const double t = midpoint + s * s * std::log(fit.prior_a / fit.prior_b) /
                                        (fit.mu_b - fit.mu_a);
        return strictly_between(t, lo, hi) ? t : midpoint;
    }

    // Crossing of the weighted densities: quadratic in t obtained from the
    // log-density difference multiplied by 2*sa^2*sb^2. At most one root lies
    // strictly between the means (the difference is monotone there).
    const double sa2 = sa * sa;
    const double sb2 = sb * sb;
    const double log_ratio = std::log(fit.prior_b * sa / (fit.prior_a * sb));
    const double a = sa2 - sb2;
    const double b = -2.0 * (sa2 * fit.mu_b - sb2 * fit.mu_a);
    const double c = sa2 * fit.mu_b * fit.mu_b - sb2 * fit.mu_a * fit.mu_a -
                     2.0 * sa2 * sb2 * log_ratio;
    // b^2 - 4ac collapses to this product; the factored form survives the
    // cancellation that the textbook expression hits when one sigma is tiny.
    const double delta = fit.mu_a - fit.mu_b;
    const double bracket = delta * delta + 2.0 * log_ratio * a;
    if (bracket < 0.0) return midpoint;
    const double sqrt_disc = 2.0 * sa * sb * std::sqrt(bracket);
    const double q = -0.5 * (b + std::copysign(sqrt_disc, b));
    const double root1 = q / a;
    if (strictly_between(root1, lo, hi)) return root1;
    if (q != 0.0) {
        const double root2 = c / q;
        if (strictly_between(root2, lo, hi)) return root2;
    }
    return midpoint;
}

double gini_impurity(std::size_t n0, std::size_t n1) {
    if (n0 + n1 == 0) throw ValueError("Gini impurity of empty counts is undefined");
    const double n = static_cast<double>(n0 + n1);
    const double f0 = static_cast<double>(n0) / n;
    const double f1 = static_cast<double>(n1) / n;
    return 1.0 - f0 * f0 - f1 * f1;
}

void to_json(nlohmann::json& j, const TarpClassifier& c) {
    nlohmann::json threshold;
    if (c.threshold == std::numeric_limits<double>::infinity())
        threshold = "+inf";
    else if (c.threshold == -std::numeric_limits<double>::infinity())
        threshold = "-inf";
    else
        threshold = c.threshold;
    j = nlohmann::json{{"projection", c.projection.components},
                       {"threshold", threshold},
                       {"class_below", c.class_below}};
}

void from_json(const nlohmann::json& j, TarpClassifier& c) {
    c.projection.components = j.at("projection").get<std::vector<double>>();
    const auto& t = j.at("threshold");
    if (t.is_string()) {
        const auto s = t.get<std::string>();
        if (s == "+inf")
            c.threshold = std::numeric_limits<double>::infinity();
        else if (s == "-inf")
            c.threshold = -std::numeric_limits<double>::infinity();
        else
            throw SchemaError("threshold string must be '+inf' or '-inf', got '" + s + "'");
    } else {
        c.threshold = t.get<double>();
    }
    c.class_below = j.at("class_below").get<int>();
}

namespace {

int majority_of(std::span<const int> labels) {
    std::size_t ones = 0;
    for (int l : labels) ones += static_cast<std::size_t>(l);
    const std::size_t zeros = labels.size() - ones;
    return ones > zeros ? 1 : 0;  // tie goes to class 0
}

TarpParams constant_params(std::span<const int> labels) {
    TarpParams params;
    params.threshold = std::numeric_limits<double>::infinity();
    params.class_below = majority_of(labels);
    std::size_t ones = 0;
    for (int l : labels) ones += static_cast<std::size_t>(l);
    params.weighted_gini = gini_impurity(labels.size() - ones, ones);
    params.split = false;
    return params;
}

}  // namespace

TarpParams train_tarp(std::span<const double> values, std::span<const int> labels) {
    if (values.empty()) throw ValueError("cannot train a TARP on empty data");
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1) return constant_params(labels);

    const GaussianFit1D fit = fit_gaussians_1d(values, labels);
    const auto threshold = bayes_threshold_1d(fit);
    if (!threshold) return constant_params(labels);

    TarpParams params;
    params.threshold = *threshold;
    params.class_below = fit.mu_a <= fit.mu_b ? 0 : 1;
    params.split = true;

    std::size_t below[2] = {0, 0};
    std::size_t above[2] = {0, 0};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < *threshold)
            ++below[labels[i]];
        else
            ++above[labels[i]];
    }
    const std::size_t n_below = below[0] + below[1];
    const std::size_t n_above = above[0] + above[1];
    const double n = static_cast<double>(n_below + n_above);
    double weighted = 0.0;
    if (n_below > 0)
        weighted += static_cast<double>(n_below) / n * gini_impurity(below[0], below[1]);
    if (n_above > 0)
        weighted += static_cast<double>(n_above) / n * gini_impurity(above[0], above[1]);
    params.weighted_gini = weighted;
    return params;
}

std::size_t select_best_tarp(std::span<const TarpParams> candidates) {
    if (candidates.empty()) throw ValueError("candidate list is empty");
    const bool any_split =
        std::any_of(candidates.begin(), candidates.end(), [](const auto& c) { return c.split; });
    std::size_t best = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (any_split && !candidates[i].split) continue;
        if (best == candidates.size() ||
            candidates[i].weighted_gini < candidates[best].weighted_gini)
            best = i;
    }
    return best;
}

double error_rate(const TarpClassifier& classifier, const LabeledDataset& dataset,
                  std::span<const std::size_t> rows) {
    if (rows.empty()) throw ValueError("error rate of an empty subset is undefined");
    std::size_t wrong = 0;
    for (std::size_t i : rows)
        if (classifier.classify(dataset.row(i)) != dataset.label(i)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(rows.size());
}

double error_rate(const TarpClassifier& classifier, const LabeledDataset& dataset) {
    std::vector<std::size_t> all(dataset.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return error_rate(classifier, dataset, all);
}

}  // namespace tarpbench
