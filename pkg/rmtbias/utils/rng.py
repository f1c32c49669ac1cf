"""
Counter-based random streams

Every trial draws from its own Philox stream keyed by the run seed and
positioned by (tag, trial) in the high counter words, so the numbers a trial
sees never depend on which worker runs it or in which order.
"""
from enum import IntEnum

import numpy as np

from rmtbias.errors import ParameterDomainError

SEED_LIMIT = 2**64


class StreamTag(IntEnum):
    CHANNEL = 0
    RESERVOIR = 1
    ORACLE = 2
    ENTRY = 3


def trial_stream(seed: int, trial: int, tag: StreamTag = StreamTag.CHANNEL) -> np.random.Generator:
    """
    Generator for one trial.

    Args:
        seed: 64-bit run seed (Philox key)
        trial: trial index (third counter word)
        tag: stream purpose (fourth counter word)

    Returns:
        numpy Generator on a Philox bit generator
    """
    if not 0 <= seed < SEED_LIMIT:
        raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if trial < 0:
        raise ParameterDomainError(f"trial index must be >= 0, got {trial}")
    counter = (int(tag) << 192) | (int(trial) << 128)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))
