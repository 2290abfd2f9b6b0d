"""Completeness estimation for open-world set enumeration from crowd answer streams."""

from .estimators import (
    CardinalityEstimate,
    EstimateSeries,
    completeness,
    estimate_chao84,
    estimate_chao92,
    estimate_series,
    estimate_uniform_mle,
    iter_estimates,
    sample_coverage,
)
from .heuristics import HeuristicConfig, apply_heuristic, cluster_truncate, f1_truncate
from .listwalk import ListWalkConfig, ListWalkReport, binomial_tail, detect_lists, scan, target_probability
from .paygo import PaygoPrediction, mean_sac, paygo_table, shen_predict, spline_fit, spline_predict
from .simulator import ItemDistribution, ListWalkerSpec, WorkerModel, simulate, streaker_impact_study
from .stream import (
    AnswerRecord,
    AnswerStream,
    FrequencyStatistics,
    SACurve,
    compute_fstat,
    f1_ratio,
    parse_stream,
    read_stream,
    sac,
    serialize_stream,
    write_stream,
)

__version__ = "0.1.0"
