#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "tarpbench/bench.hpp"
#include "tarpbench/data.hpp"
#include "tarpbench/errors.hpp"
#include "tarpbench/random.hpp"
#include "tarpbench/tarp.hpp"
#include "tarpbench/tree.hpp"

namespace py = pybind11;
using namespace tarpbench;

namespace {

LabeledDataset dataset_from_numpy(
    py::array_t<double, py::array::c_style | py::array::forcecast> features,
    const std::vector<int>& labels) {
    const auto buffer = features.request();
    if (buffer.ndim != 2) throw DimensionError("features must be a 2D array");
    const auto rows = static_cast<std::size_t>(buffer.shape[0]);
    const auto cols = static_cast<std::size_t>(buffer.shape[1]);
    if (labels.size() != rows)
        throw DimensionError("labels length does not match the feature row count");
    const auto* data = static_cast<const double*>(buffer.ptr);
    return LabeledDataset(std::vector<double>(data, data + rows * cols), labels, cols);
}

py::array_t<double> dataset_features(const LabeledDataset& ds) {
    py::array_t<double> out({ds.rows(), ds.cols()});
    std::copy(ds.features().begin(), ds.features().end(), out.mutable_data());
    return out;
}

GaussianMixtureSpec make_spec(const std::vector<double>& mu1, const std::vector<double>& mu2,
                              const std::vector<std::vector<double>>& cov1,
                              const std::vector<std::vector<double>>& cov2, double prior1) {
    GaussianMixtureSpec spec;
    spec.mu1 = mu1;
    spec.mu2 = mu2;
    const auto flatten = [](const std::vector<std::vector<double>>& rows) {
        std::vector<double> flat;
        for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
        return flat;
    };
    spec.cov1 = flatten(cov1);
    spec.cov2 = flatten(cov2);
    spec.prior1 = prior1;
    spec.validate();
    return spec;
}

PartitionConfig make_partition_config(const std::string& strategy,
                                      std::tuple<double, double, double> fractions,
                                      std::optional<DataPartition> fixed) {
    PartitionConfig config;
    config.strategy = split_strategy_from_string(strategy);
    config.fractions = {std::get<0>(fractions), std::get<1>(fractions),
                        std::get<2>(fractions)};
    config.fixed = std::move(fixed);
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Random-projection classification benchmarks (TARP / n-TARP bound curves)";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<PartitionError>(m, "PartitionError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<LabeledDataset>(m, "LabeledDataset")
        .def(py::init(&dataset_from_numpy), py::arg("features"), py::arg("labels"))
        .def_property_readonly("rows", &LabeledDataset::rows)
        .def_property_readonly("cols", &LabeledDataset::cols)
        .def_property_readonly("features", &dataset_features)
        .def_property_readonly("labels",
                               [](const LabeledDataset& ds) {
                                   return std::vector<int>(ds.labels().begin(),
                                                           ds.labels().end());
                               })
        .def("class_counts", &LabeledDataset::class_counts)
        .def("__len__", &LabeledDataset::rows)
        .def("__repr__", [](const LabeledDataset& ds) {
            return "<LabeledDataset rows=" + std::to_string(ds.rows()) +
                   " cols=" + std::to_string(ds.cols()) + ">";
        });

    py::class_<DataPartition>(m, "DataPartition")
        .def(py::init([](std::vector<std::size_t> train, std::vector<std::size_t> val,
                         std::vector<std::size_t> test) {
                 DataPartition part;
                 part.train_idx = std::move(train);
                 part.val_idx = std::move(val);
                 part.test_idx = std::move(test);
                 return part;
             }),
             py::arg("train_idx"), py::arg("val_idx"), py::arg("test_idx"))
        .def_readonly("train_idx", &DataPartition::train_idx)
        .def_readonly("val_idx", &DataPartition::val_idx)
        .def_readonly("test_idx", &DataPartition::test_idx);

    py::class_<GaussianMixtureSpec>(m, "GaussianMixtureSpec")
        .def(py::init(&make_spec), py::arg("mu1"), py::arg("mu2"), py::arg("cov1"),
             py::arg("cov2"), py::arg("prior1") = 0.5)
        .def_readonly("mu1", &GaussianMixtureSpec::mu1)
        .def_readonly("mu2", &GaussianMixtureSpec::mu2)
        .def_readonly("prior1", &GaussianMixtureSpec::prior1)
        .def_property_readonly("dim", &GaussianMixtureSpec::dim);

    py::class_<BayesErrorEstimate>(m, "BayesErrorEstimate")
        .def_readonly("value", &BayesErrorEstimate::value)
        .def_readonly("std_error", &BayesErrorEstimate::std_error)
        .def_readonly("monte_carlo", &BayesErrorEstimate::monte_carlo)
        .def("__repr__", [](const BayesErrorEstimate& e) {
            return "<BayesErrorEstimate value=" + std::to_string(e.value) +
                   (e.monte_carlo ? " (monte-carlo)>" : " (closed-form)>");
        });

    py::class_<BenchmarkPoint>(m, "BenchmarkPoint")
        .def_readonly("k", &BenchmarkPoint::k)
        .def_readonly("n", &BenchmarkPoint::n)
        .def_readonly("mean_error", &BenchmarkPoint::mean_error)
        .def_readonly("std_error", &BenchmarkPoint::std_error)
        .def_readonly("runs", &BenchmarkPoint::runs)
        .def_readonly("mean_training_time_s", &BenchmarkPoint::mean_training_time_s)
        .def_readonly("mean_testing_time_s", &BenchmarkPoint::mean_testing_time_s);

    py::class_<AsymptoteEstimate>(m, "AsymptoteEstimate")
        .def_readonly("value", &AsymptoteEstimate::value)
        .def_readonly("converged", &AsymptoteEstimate::converged);

    py::class_<BenchmarkCurve>(m, "BenchmarkCurve")
        .def_readonly("dataset_name", &BenchmarkCurve::dataset_name)
        .def_readonly("n", &BenchmarkCurve::n)
        .def_readonly("b0", &BenchmarkCurve::b0)
        .def_readonly("points", &BenchmarkCurve::points)
        .def_readonly("asymptote", &BenchmarkCurve::asymptote)
        .def("to_json",
             [](const BenchmarkCurve& curve) {
                 nlohmann::json j = curve;
                 return j.dump();
             })
        .def("__repr__", [](const BenchmarkCurve& c) {
            return "<BenchmarkCurve n=" + std::to_string(c.n) +
                   " points=" + std::to_string(c.points.size()) + ">";
        });

    py::class_<MethodPoint>(m, "MethodPoint")
        .def(py::init([](std::string name, double error, double training_time_s,
                         double testing_time_s) {
                 MethodPoint p;
                 p.name = std::move(name);
                 p.error = error;
                 p.training_time_s = training_time_s;
                 p.testing_time_s = testing_time_s;
                 return p;
             }),
             py::arg("name"), py::arg("error"), py::arg("training_time_s") = 0.0,
             py::arg("testing_time_s") = 0.0)
        .def_readonly("name", &MethodPoint::name)
        .def_readonly("error", &MethodPoint::error);

    py::class_<TarpTree>(m, "TarpTree")
        .def_readonly("depth", &TarpTree::depth)
        .def_readonly("candidates", &TarpTree::candidates)
        .def_readonly("training_time_s", &TarpTree::training_time_s)
        .def_readonly("testing_time_s", &TarpTree::testing_time_s)
        .def("predict",
             [](const TarpTree& tree, const std::vector<double>& x) {
                 return tree.predict(x);
             })
        .def("to_json", [](const TarpTree& tree, bool diagnostics) {
            return tree_to_json(tree, diagnostics).dump();
        }, py::arg("diagnostics") = false);

    m.def("load_csv",
          [](const std::filesystem::path& path, const std::string& label_column,
             bool header) {
              CsvOptions options;
              options.label_column = label_column;
              options.has_header = header;
              return load_csv(path, options);
          },
          py::arg("path"), py::arg("label_column") = "", py::arg("header") = false);
    m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));

    m.def("partition",
          [](const LabeledDataset& ds, const std::string& strategy,
             std::tuple<double, double, double> fractions, std::uint64_t seed) {
              return partition(ds, split_strategy_from_string(strategy),
                               {std::get<0>(fractions), std::get<1>(fractions),
                                std::get<2>(fractions)},
                               seed);
          },
          py::arg("dataset"), py::arg("strategy") = "sequential",
          py::arg("fractions") = std::make_tuple(0.25, 0.25, 0.5), py::arg("seed") = 0);

    m.def("sample_gaussian_mixture", &sample_gaussian_mixture, py::arg("spec"),
          py::arg("count"), py::arg("seed"));
    m.def("bayes_error_gaussian", &bayes_error_gaussian, py::arg("spec"),
          py::arg("mc_samples") = 1000000, py::arg("mc_seed") = 0x7a9e5);

    m.def("estimate_b0", &estimate_B0, py::arg("dataset"));
    m.def("max_reliable_depth", &max_reliable_depth, py::arg("train_size"));

    m.def("grow_tree",
          [](const LabeledDataset& ds, const DataPartition& part, std::size_t n, std::size_t k,
             std::uint64_t seed) {
              RandomStream stream(seed);
              return grow_tree(ds, part, n, k, stream);
          },
          py::arg("dataset"), py::arg("partition"), py::arg("n"), py::arg("k"),
          py::arg("seed"));
    m.def("evaluate_tree",
          [](TarpTree& tree, const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
              return evaluate_tree(tree, ds, rows);
          },
          py::arg("tree"), py::arg("dataset"), py::arg("test_rows"));

    m.def("estimate_bkn",
          [](const LabeledDataset& ds, std::size_t n, std::size_t k, std::size_t runs,
             std::uint64_t seed, const std::string& strategy,
             std::tuple<double, double, double> fractions, std::optional<DataPartition> fixed,
             unsigned jobs) {
              return estimate_Bkn(
                  ds, make_partition_config(strategy, fractions, std::move(fixed)), n, k, runs,
                  seed, jobs);
          },
          py::arg("dataset"), py::arg("n"), py::arg("k"), py::arg("runs"), py::arg("seed"),
          py::arg("strategy") = "sequential",
          py::arg("fractions") = std::make_tuple(0.25, 0.25, 0.5),
          py::arg("fixed_partition") = std::nullopt, py::arg("jobs") = 1);

    m.def("estimate_curve",
          [](const LabeledDataset& ds, std::size_t n, std::size_t k_max, std::size_t runs,
             std::uint64_t seed, const std::string& strategy,
             std::tuple<double, double, double> fractions, std::optional<DataPartition> fixed,
             unsigned jobs, const std::string& dataset_name) {
              auto curve = estimate_curve(
                  ds, make_partition_config(strategy, fractions, std::move(fixed)), n, k_max,
                  runs, seed, jobs);
              curve.dataset_name = dataset_name;
              return curve;
          },
          py::arg("dataset"), py::arg("n"), py::arg("k_max"), py::arg("runs"), py::arg("seed"),
          py::arg("strategy") = "sequential",
          py::arg("fractions") = std::make_tuple(0.25, 0.25, 0.5),
          py::arg("fixed_partition") = std::nullopt, py::arg("jobs") = 1,
          py::arg("dataset_name") = "");

    m.def("estimate_asymptote",
          [](const BenchmarkCurve& curve, std::size_t window, double rel_tol, double abs_tol) {
              return estimate_asymptote(curve, window, rel_tol, abs_tol);
          },
          py::arg("curve"), py::arg("window") = 3, py::arg("rel_tol") = 0.05,
          py::arg("abs_tol") = 0.005);

    m.def("classify_region",
          [](const BenchmarkCurve& curve, const MethodPoint& method, const std::string& axis) {
              return to_string(classify_region(curve, method, cost_axis_from_string(axis)));
          },
          py::arg("curve"), py::arg("method"), py::arg("cost_axis") = "training_time");

    m.def("export_results",
          [](const std::vector<BenchmarkCurve>& curves, const std::vector<MethodPoint>& methods,
             const std::filesystem::path& path, const std::string& format) {
              export_results(curves, methods, path,
                             format == "csv" ? ExportFormat::csv : ExportFormat::json);
          },
          py::arg("curves"), py::arg("methods"), py::arg("path"), py::arg("format") = "json");
    m.def("import_results_json", &import_results_json, py::arg("path"));
}
