#include "tarpbench/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tarpbench/errors.hpp"
#include "tarpbench/random.hpp"

namespace tarpbench {

namespace {

Eigen::MatrixXd as_matrix(const std::vector<double>& flat, std::size_t p) {
    Eigen::MatrixXd m(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * p + j];
    return m;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Standard normal CDF.
double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void check_spd(const Eigen::MatrixXd& cov, const char* which) {
    constexpr double kEigTol = 1e-12;
    if (!cov.isApprox(cov.transpose(), 1e-9))
        throw NumericError(std::string(which) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= kEigTol)
        throw NumericError(std::string(which) + " is not positive definite (eigenvalue <= 1e-12)");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

LabeledDataset::LabeledDataset(std::vector<double> features, std::vector<int> labels,
                               std::size_t n_cols)
    : features_(std::move(features)), labels_(std::move(labels)), n_cols_(n_cols) {
    validate();
}

void LabeledDataset::validate() const {
    if (n_cols_ == 0) throw DimensionError("dataset must have at least one feature column");
    if (features_.size() != labels_.size() * n_cols_)
        throw DimensionError("feature matrix size does not match rows x cols");
    if (labels_.empty()) throw DataError("dataset has no rows");
    std::array<std::size_t, 2> counts{0, 0};
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != 0 && labels_[i] != 1)
            throw ValueError("label at row " + std::to_string(i) + " is not 0 or 1");
        ++counts[static_cast<std::size_t>(labels_[i])];
    }
    if (counts[0] == 0 || counts[1] == 0)
        throw DataError("dataset must contain both classes");
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (!std::isfinite(features_[i]))
            throw ValueError("non-finite feature at row " + std::to_string(i / n_cols_) +
                             ", column " + std::to_string(i % n_cols_));
    }
}

std::array<std::size_t, 2> LabeledDataset::class_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (int label : labels_) ++counts[static_cast<std::size_t>(label)];
    return counts;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_feature(const std::string& cell, std::size_t row, std::size_t col) {
    const std::string text = trim(cell);
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last)
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": cannot parse '" + text + "' as a number");
    return value;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::vector<std::vector<std::string>> raw;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        raw.push_back(split_csv_line(line));
    }
    if (raw.empty()) throw ParseError("'" + path.string() + "' contains no data rows");

    const std::size_t n_cols_total = raw.front().size();
    if (n_cols_total < 2)
        throw SchemaError("need at least one feature column plus the label column");
    for (std::size_t r = 0; r < raw.size(); ++r) {
        if (raw[r].size() != n_cols_total)
            throw ParseError("row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(n_cols_total) + " columns, found " +
                             std::to_string(raw[r].size()));
    }

    std::vector<std::string> header;
    if (options.has_header) {
        for (const auto& cell : raw.front()) header.push_back(trim(cell));
        raw.erase(raw.begin());
        if (raw.empty()) throw ParseError("'" + path.string() + "' has a header but no data rows");
    }

    // Resolve the label column: header name, decimal index, or last column.
    std::size_t label_col = n_cols_total - 1;
    if (!options.label_column.empty()) {
        const std::string wanted = trim(options.label_column);
        auto named = std::find(header.begin(), header.end(), wanted);
        if (named != header.end()) {
            label_col = static_cast<std::size_t>(named - header.begin());
        } else {
            std::size_t idx = 0;
            const auto result = std::from_chars(wanted.data(), wanted.data() + wanted.size(), idx);
            if (result.ec != std::errc{} || result.ptr != wanted.data() + wanted.size())
                throw SchemaError("label column '" + wanted + "' not found");
            if (idx >= n_cols_total)
                throw SchemaError("label column index " + std::to_string(idx) +
                                  " out of range for " + std::to_string(n_cols_total) + " columns");
            label_col = idx;
        }
    }

    std::set<std::string> distinct;
    for (const auto& row : raw) distinct.insert(trim(row[label_col]));
    if (distinct.size() != 2)
        throw SchemaError("label column must contain exactly two distinct values, found " +
                          std::to_string(distinct.size()));
    const std::string lo = *distinct.begin();
    const std::string hi = *std::next(distinct.begin());

    const std::size_t p = n_cols_total - 1;
    std::vector<double> features;
    features.reserve(raw.size() * p);
    std::vector<int> labels;
    labels.reserve(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        for (std::size_t c = 0; c < n_cols_total; ++c) {
            if (c == label_col) continue;
            const double v = parse_feature(raw[r][c], r + 1, c);
            if (!std::isfinite(v))
                throw ValueError("non-finite feature at row " + std::to_string(r + 1) +
                                 ", column " + std::to_string(c));
            features.push_back(v);
        }
        labels.push_back(trim(raw[r][label_col]) == lo ? 0 : 1);
    }

    LabeledDataset dataset(std::move(features), std::move(labels), p);
    dataset.label_values = {lo, hi};
    if (!header.empty()) {
        for (std::size_t c = 0; c < n_cols_total; ++c)
            if (c != label_col) dataset.feature_names.push_back(header[c]);
    }
    return dataset;
}

void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < dataset.cols(); ++c) {
        if (c < dataset.feature_names.size())
            out << dataset.feature_names[c];
        else
            out << "feature_" << (c + 1);
        out << ',';
    }
    out << "label\n";
    for (std::size_t i = 0; i < dataset.rows(); ++i) {
        for (double v : dataset.row(i)) out << format_double(v) << ',';
        out << dataset.label_values[static_cast<std::size_t>(dataset.label(i))] << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

SplitStrategy split_strategy_from_string(const std::string& name) {
    if (name == "sequential") return SplitStrategy::sequential;
    if (name == "stratified_random") return SplitStrategy::stratified_random;
    throw ValueError("unknown split strategy '" + name + "'");
}

std::string to_string(SplitStrategy strategy) {
    return strategy == SplitStrategy::sequential ? "sequential" : "stratified_random";
}

DataPartition partition(const LabeledDataset& dataset, SplitStrategy strategy,
                        SplitFractions fractions, std::uint64_t seed) {
    if (fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0)
        throw ParameterError("split fractions must be positive");
    if (std::abs(fractions.train + fractions.validation + fractions.test - 1.0) > 1e-9)
        throw ParameterError("split fractions must sum to 1");

    DataPartition result;
    RandomStream stream(seed);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.rows(); ++i)
            if (dataset.label(i) == cls) idx.push_back(i);
        if (strategy == SplitStrategy::stratified_random) {
            auto class_stream = stream.derive(static_cast<std::uint64_t>(cls));
            class_stream.shuffle(idx);
        }
        const auto nc = static_cast<double>(idx.size());
        const auto n_train = static_cast<std::size_t>(std::floor(fractions.train * nc + 1e-9));
        const auto n_val = static_cast<std::size_t>(std::floor(fractions.validation * nc + 1e-9));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i < n_train)
                result.train_idx.push_back(idx[i]);
            else if (i < n_train + n_val)
                result.val_idx.push_back(idx[i]);
            else
                result.test_idx.push_back(idx[i]);
        }
    }
    std::sort(result.train_idx.begin(), result.train_idx.end());
    std::sort(result.val_idx.begin(), result.val_idx.end());
    std::sort(result.test_idx.begin(), result.test_idx.end());

    const auto check = [&](const std::vector<std::size_t>& split, const char* name) {
        std::array<bool, 2> seen{false, false};
        for (std::size_t i : split) seen[static_cast<std::size_t>(dataset.label(i))] = true;
        for (int cls = 0; cls < 2; ++cls)
            if (!seen[static_cast<std::size_t>(cls)])
                throw PartitionError(std::string(name) + " split lacks class " +
                                     std::to_string(cls));
    };
    check(result.train_idx, "train");
    check(result.val_idx, "validation");
    check(result.test_idx, "test");
    return result;
}

void GaussianMixtureSpec::validate() const {
    const std::size_t p = mu1.size();
    if (p == 0) throw SchemaError("mixture spec has empty mean vectors");
    if (mu2.size() != p) throw SchemaError("mu1 and mu2 have different dimensions");
    if (cov1.size() != p * p || cov2.size() != p * p)
        throw SchemaError("covariance matrices must be p x p");
    if (!(prior1 > 0.0 && prior1 < 1.0))
        throw SchemaError("prior1 must lie strictly inside (0, 1)");
    for (double v : mu1)
        if (!std::isfinite(v)) throw ValueError("non-finite entry in mu1");
    for (double v : mu2)
        if (!std::isfinite(v)) throw ValueError("non-finite entry in mu2");
    check_spd(as_matrix(cov1, p), "cov1");
    check_spd(as_matrix(cov2, p), "cov2");
}

void to_json(nlohmann::json& j, const GaussianMixtureSpec& spec) {
    const std::size_t p = spec.dim();
    auto nested = [p](const std::vector<double>& flat) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < p; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t k = 0; k < p; ++k) row.push_back(flat[i * p + k]);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j = nlohmann::json{{"mu1", spec.mu1},
                       {"mu2", spec.mu2},
                       {"cov1", nested(spec.cov1)},
                       {"cov2", nested(spec.cov2)},
                       {"prior1", spec.prior1}};
}

void from_json(const nlohmann::json& j, GaussianMixtureSpec& spec) {
    spec.mu1 = j.at("mu1").get<std::vector<double>>();
    spec.mu2 = j.at("mu2").get<std::vector<double>>();
    auto flat = [](const nlohmann::json& rows) {
        std::vector<double> out;
        for (const auto& row : rows)
            for (const auto& v : row) out.push_back(v.get<double>());
        return out;
    };
    spec.cov1 = flat(j.at("cov1"));
    spec.cov2 = flat(j.at("cov2"));
    spec.prior1 = j.at("prior1").get<double>();
}

GaussianMixtureSpec load_mixture_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
        GaussianMixtureSpec spec = j.get<GaussianMixtureSpec>();
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("mixture spec '" + path.string() + "': " + e.what());
    }
}

LabeledDataset sample_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t count,
                                       std::uint64_t seed) {
    spec.validate();
    if (count < 2) throw ParameterError("sample count must be at least 2");

    const std::size_t p = spec.dim();
    const Eigen::LLT<Eigen::MatrixXd> llt1(as_matrix(spec.cov1, p));
    const Eigen::LLT<Eigen::MatrixXd> llt2(as_matrix(spec.cov2, p));
    const Eigen::MatrixXd l1 = llt1.matrixL();
    const Eigen::MatrixXd l2 = llt2.matrixL();
    const Eigen::VectorXd m1 = as_vector(spec.mu1);
    const Eigen::VectorXd m2 = as_vector(spec.mu2);

    RandomStream stream(seed);
    std::vector<double> features(count * p);
    std::vector<int> labels(count);
    Eigen::VectorXd z(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < count; ++i) {
        const int label = stream.unit() < spec.prior1 ? 0 : 1;
        labels[i] = label;
        for (std::size_t d = 0; d < p; ++d) z(static_cast<Eigen::Index>(d)) = stream.normal();
        const Eigen::VectorXd x = (label == 0 ? m1 + l1 * z : m2 + l2 * z);
        for (std::size_t d = 0; d < p; ++d) features[i * p + d] = x(static_cast<Eigen::Index>(d));
    }
    if (std::count(labels.begin(), labels.end(), 0) == 0 ||
        std::count(labels.begin(), labels.end(), 1) == 0)
        throw DataError("sampled dataset came out single-class; increase count or change seed");
    return LabeledDataset(std::move(features), std::move(labels), p);
}

BayesErrorEstimate bayes_error_gaussian(const GaussianMixtureSpec& spec, std::size_t mc_samples,
                                        std::uint64_t mc_seed) {
    spec.validate();
    const std::size_t p = spec.dim();
    const double prior2 = 1.0 - spec.prior1;

    bool equal_cov = true;
    for (std::size_t i = 0; i < p * p && equal_cov; ++i)
        equal_cov = std::abs(spec.cov1[i] - spec.cov2[i]) <= 1e-9;

    if (equal_cov) {
        const Eigen::MatrixXd sigma = as_matrix(spec.cov1, p);
        const Eigen::VectorXd diff = as_vector(spec.mu2) - as_vector(spec.mu1);
        const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success) throw NumericError("covariance factorization failed");
        const double d2 = diff.dot(llt.solve(diff));
        const double delta = std::sqrt(std::max(d2, 0.0));
        if (delta < 1e-12) return {std::min(spec.prior1, prior2), 0.0, false};
        const double shift = std::log(spec.prior1 / prior2) / delta;
        const double value =
            spec.prior1 * phi(-delta / 2.0 - shift) + prior2 * phi(-delta / 2.0 + shift);
        return {value, 0.0, false};
    }

    // No closed form with distinct covariances; integrate min(pi_i rho_i) by
    // importance sampling from the mixture itself.
    const Eigen::MatrixXd s1 = as_matrix(spec.cov1, p);
    const Eigen::MatrixXd s2 = as_matrix(spec.cov2, p);
    const Eigen::LLT<Eigen::MatrixXd> llt1(s1);
    const Eigen::LLT<Eigen::MatrixXd> llt2(s2);
    const Eigen::MatrixXd l1 = llt1.matrixL();
    const Eigen::MatrixXd l2 = llt2.matrixL();
    const double logdet1 = 2.0 * Eigen::MatrixXd(llt1.matrixL()).diagonal().array().log().sum();
    const double logdet2 = 2.0 * Eigen::MatrixXd(llt2.matrixL()).diagonal().array().log().sum();
    const Eigen::VectorXd m1 = as_vector(spec.mu1);
    const Eigen::VectorXd m2 = as_vector(spec.mu2);
    const double log2pi = std::log(2.0 * std::numbers::pi);

    const auto log_density = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                 const Eigen::LLT<Eigen::MatrixXd>& llt, double logdet) {
        const Eigen::VectorXd centered = x - mu;
        const double quad = centered.dot(llt.solve(centered));
        return -0.5 * (static_cast<double>(p) * log2pi + logdet + quad);
    };

    RandomStream stream(mc_seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    Eigen::VectorXd z(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < mc_samples; ++i) {
        const bool from1 = stream.unit() < spec.prior1;
        for (std::size_t d = 0; d < p; ++d) z(static_cast<Eigen::Index>(d)) = stream.normal();
        const Eigen::VectorXd x = from1 ? Eigen::VectorXd(m1 + l1 * z) : Eigen::VectorXd(m2 + l2 * z);
        const double la = std::log(spec.prior1) + log_density(x, m1, llt1, logdet1);
        const double lb = std::log(prior2) + log_density(x, m2, llt2, logdet2);
        const double m = std::max(la, lb);
        const double w = std::exp(std::min(la, lb) - m) / (std::exp(la - m) + std::exp(lb - m));
        sum += w;
        sum_sq += w * w;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double variance = std::max(sum_sq / n - mean * mean, 0.0);
    return {mean, std::sqrt(variance / n), true};
}

}  // namespace tarpbench
