"""JSON-lines transcript files.

Line 1 is a header ``{"schema": 1, "type": "header", ...}`` carrying seeds,
trial index, precision and channel hash; each following line is one channel
use ``{"n", "y", "v_hex", "x"}`` where ``v_hex`` is the big-endian fixed-point
shift with ``ceil(precision / 4)`` hex digits.  Serialization is canonical
(sorted keys, fixed separators) so equal transcripts give equal bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from .scheme import Seeds, Transcript

SCHEMA = 1


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def transcript_lines(t: Transcript, extra: dict | None = None) -> list[str]:
    width = -(-t.precision // 4)
    header = {
        "schema": SCHEMA,
        "type": "header",
        "trial": t.trial,
        "precision": t.precision,
        "channel_hash": t.channel_hash,
        "n": t.n,
        "seeds": t.seeds.to_json(),
    }
    if extra:
        header["config"] = extra
    lines = [_dumps(header)]
    for i, (y, v) in enumerate(zip(t.y_seq, t.v_seq)):
        rec = {"n": i + 1, "y": y, "v_hex": format(v, f"0{width}x")}
        if i < len(t.x_seq):
            rec["x"] = t.x_seq[i]
        lines.append(_dumps(rec))
    return lines


def write_transcript(t: Transcript, path: str | Path, extra: dict | None = None) -> None:
    Path(path).write_text("\n".join(transcript_lines(t, extra)) + "\n")


def read_transcript(path: str | Path) -> Transcript:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty transcript")
    header = json.loads(lines[0])
    if header.get("type") != "header" or header.get("schema") != SCHEMA:
        raise ValueError(f"{path}: missing or unsupported header")
    s = header["seeds"]
    seeds = Seeds(s["message_seed"], s["channel_seed"], s["common_seed"])
    ys, vs, xs = [], [], []
    for line in lines[1:]:
        rec = json.loads(line)
        ys.append(rec["y"])
        vs.append(int(rec["v_hex"], 16))
        if "x" in rec:
            xs.append(rec["x"])
    return Transcript(ys, vs, seeds, header["precision"], xs, header["trial"],
                      header["channel_hash"])
