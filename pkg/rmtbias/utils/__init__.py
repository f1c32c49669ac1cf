"""Utilities package"""
from rmtbias.utils.linalg import general_inverse, hermitian_inverse, hpd_logdet, relative_gap, trace_product
from rmtbias.utils.rng import StreamTag, trial_stream
from rmtbias.utils.stats import StreamingMoments

__all__ = [
    "general_inverse",
    "hermitian_inverse",
    "hpd_logdet",
    "relative_gap",
    "trace_product",
    "StreamTag",
    "trial_stream",
    "StreamingMoments",
]
