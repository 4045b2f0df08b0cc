from .grid import AwgnGrid, DmcGrid, PrecisionError, grid_for, precision_budget
from .interval import BitPrefix, CircleInterval, extract_bits, membership, to_grid
from .scheme import (
    ConfigError,
    DecodeResult,
    EncoderState,
    InvariantError,
    Seeds,
    Transcript,
    TrialOutcome,
    Truth,
    as_probability,
    check_invertibility,
    draw_message,
    encode_step,
    encode_trial,
    encoder_input,
    initial_interval,
    interval_map_inverse,
    rifs_decode,
    run_trial,
)
from .transcript_io import read_transcript, transcript_lines, write_transcript

__all__ = [
    "AwgnGrid", "BitPrefix", "CircleInterval", "ConfigError", "DecodeResult", "DmcGrid",
    "EncoderState", "InvariantError", "PrecisionError", "Seeds", "Transcript",
    "TrialOutcome", "Truth", "as_probability", "check_invertibility", "draw_message",
    "encode_step", "encode_trial", "encoder_input", "extract_bits", "grid_for",
    "initial_interval", "interval_map_inverse", "membership", "precision_budget",
    "read_transcript", "rifs_decode", "run_trial", "to_grid", "transcript_lines",
    "write_transcript",
]
