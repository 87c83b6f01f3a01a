"""Random-projection classification benchmarks (TARP / n-TARP bound curves)."""

from tarpbench._core import (
    AsymptoteEstimate,
    BayesErrorEstimate,
    BenchmarkCurve,
    BenchmarkPoint,
    DataPartition,
    GaussianMixtureSpec,
    LabeledDataset,
    MethodPoint,
    NumericError,
    ParseError,
    PartitionError,
    SchemaError,
    TarpTree,
    bayes_error_gaussian,
    classify_region,
    estimate_asymptote,
    estimate_b0,
    estimate_bkn,
    estimate_curve,
    evaluate_tree,
    export_results,
    grow_tree,
    import_results_json,
    load_csv,
    max_reliable_depth,
    partition,
    sample_gaussian_mixture,
    write_csv,
)

__all__ = [
    "AsymptoteEstimate",
    "BayesErrorEstimate",
    "BenchmarkCurve",
    "BenchmarkPoint",
    "DataPartition",
    "GaussianMixtureSpec",
    "LabeledDataset",
    "MethodPoint",
    "NumericError",
    "ParseError",
    "PartitionError",
    "SchemaError",
    "TarpTree",
    "bayes_error_gaussian",
    "classify_region",
    "estimate_asymptote",
    "estimate_b0",
    "estimate_bkn",
    "estimate_curve",
    "evaluate_tree",
    "export_results",
    "grow_tree",
    "import_results_json",
    "load_csv",
    "max_reliable_depth",
    "partition",
    "sample_gaussian_mixture",
    "write_csv",
]

__version__ = "0.1.0"
