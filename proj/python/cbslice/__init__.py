"""Error-slice discovery for concept-bottleneck prediction dumps.

The pipeline mirrors the command line tool: build or load a dump, collect the
mispredicted samples, keep the concepts whose intervention scores implicate
them in errors, fit a Gaussian-mixture slicer over their logits, then explain,
rank and score the resulting slices.

    import cbslice

    dump = cbslice.mnist_sum_dump(seed=1, scale=0.5)
    errs = cbslice.error_set(dump)
    filt = cbslice.select_error_prone(cbslice.classwise_ectp(dump, errs), t_e=10)

    cfg = cbslice.TrainConfig()
    cfg.t_g = 10
    cfg.seed = 1
    model = cbslice.fit_slices(dump, errs, filt, cfg)

    assign = cbslice.build_assignment(model, dump, errs)
    explanations = cbslice.explain_slices(model, dump, errs, assign)
    ranking = cbslice.rank_slices(model, dump, errs)
"""

from cbslice._core import (
    ConceptFilter,
    EcsaPosterior,
    EctpTable,
    EpochStats,
    ErrorSet,
    EvalDump,
    KeywordConcept,
    LinearPredictor,
    MetricReport,
    SliceAssignment,
    SliceExplanation,
    SliceModel,
    SliceScore,
    TrainConfig,
    all_concepts_filter,
    build_assignment,
    classwise_ectp,
    error_set,
    evaluate_discovery,
    explain_slices,
    fit_slices,
    fit_slices_linear,
    mnist_sum_dump,
    rank_slices,
    read_dump,
    select_error_prone,
    two_pattern_dump,
    write_dump,
)

__all__ = [
    "ConceptFilter",
    "EcsaPosterior",
    "EctpTable",
    "EpochStats",
    "ErrorSet",
    "EvalDump",
    "KeywordConcept",
    "LinearPredictor",
    "MetricReport",
    "SliceAssignment",
    "SliceExplanation",
    "SliceModel",
    "SliceScore",
    "TrainConfig",
    "all_concepts_filter",
    "build_assignment",
    "classwise_ectp",
    "error_set",
    "evaluate_discovery",
    "explain_slices",
    "fit_slices",
    "fit_slices_linear",
    "mnist_sum_dump",
    "rank_slices",
    "read_dump",
    "select_error_prone",
    "two_pattern_dump",
    "write_dump",
]
