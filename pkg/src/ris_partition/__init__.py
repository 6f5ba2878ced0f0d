"""RIS element partitioning toolkit.

Splits a reconfigurable intelligent surface between passive beamforming
(for a connected user) and identification (for a discovering user), and
evaluates SNR, miss-detection, and outage probability both by Monte-Carlo
simulation and by characteristic-function inversion.
"""

__version__ = "0.1.0"

from ris_partition.channel import (
    ChannelRealization,
    CorrelationMatrix,
    LinkBudget,
    RisGeometry,
    dbm_to_watts,
    path_gain,
    watts_to_dbm,
)
from ris_partition.partition import Partition, element_gains, partition_random, partition_sorted
from ris_partition.theory import InversionSettings, Moments, gil_pelaez_cdf, outage_theoretical

__all__ = [
    "ChannelRealization",
    "CorrelationMatrix",
    "InversionSettings",
    "LinkBudget",
    "Moments",
    "Partition",
    "RisGeometry",
    "dbm_to_watts",
    "element_gains",
    "gil_pelaez_cdf",
    "outage_theoretical",
    "partition_random",
    "partition_sorted",
    "path_gain",
    "watts_to_dbm",
]
