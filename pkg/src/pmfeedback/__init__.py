"""Randomized posterior matching feedback coding with backward interval decoding."""

from .channel import ChannelSpec, awgn, bsc, dmc, load_channel, mutual_information
from .kernel import build_kernel

__version__ = "0.1.0"

__all__ = ["ChannelSpec", "awgn", "bsc", "build_kernel", "dmc", "load_channel",
           "mutual_information"]
