"""Exact single-arm phase II designs that stop on a fixed responder count."""

from ._curtail import (
    DomainError,
    NotInSupportError,
    SearchExhaustedError,
    SizeError,
    SamplingDistribution,
    bias_function,
    boundary_table,
    efficacy_probability,
    estimate,
    evaluate_estimation,
    evaluate_oc,
    fixed_design,
    futility_boundaries,
    intervals,
    nb_pmf,
    operating_characteristics,
    score_sample_size,
    search_design,
    simon_design,
    wald_sample_size,
)

__all__ = [
    "DomainError",
    "NotInSupportError",
    "SearchExhaustedError",
    "SizeError",
    "SamplingDistribution",
    "bias_function",
    "boundary_table",
    "efficacy_probability",
    "estimate",
    "evaluate_estimation",
    "evaluate_oc",
    "fixed_design",
    "futility_boundaries",
    "intervals",
    "nb_pmf",
    "operating_characteristics",
    "score_sample_size",
    "search_design",
    "simon_design",
    "wald_sample_size",
]
