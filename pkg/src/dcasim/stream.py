"""Synthetic signal/antigen stream format.

One record per engine cycle:

    t, pamp, danger, safe[, id*count;id*count;...]

The optional fifth field lists antigen copies entering the tissue that
cycle; a bare id means one copy. Blank lines and '#' comments are
skipped. Parse errors carry the 1-based line number.
"""

from typing import NamedTuple

from dcasim.engine import SignalVector


class StreamRecord(NamedTuple):
    t: float
    signals: SignalVector
    antigen: list[tuple[int, int]]  # (type id, copies)


def _parse_antigen_field(text: str, lineno: int) -> list[tuple[int, int]]:
    groups = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        head, star, tail = chunk.partition("*")
        try:
            antigen_id = int(head)
            count = int(tail) if star else 1
        except ValueError:
            raise ValueError(f"line {lineno}: bad antigen group {chunk!r}") from None
        if antigen_id < 0 or count < 1:
            raise ValueError(f"line {lineno}: bad antigen group {chunk!r}")
        groups.append((antigen_id, count))
    return groups


def parse_stream_line(line: str, lineno: int) -> StreamRecord | None:
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    fields = [f.strip() for f in body.split(",")]
    if len(fields) not in (4, 5):
        raise ValueError(f"line {lineno}: expected 4 or 5 comma-separated "
                         f"fields, got {len(fields)}")
    try:
        t = float(fields[0])
        pamp, danger, safe = (float(f) for f in fields[1:4])
    except ValueError:
        raise ValueError(f"line {lineno}: non-numeric field") from None
    try:
        signals = SignalVector(pamp, danger, safe)
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from None
    antigen = _parse_antigen_field(fields[4], lineno) if len(fields) == 5 else []
    return StreamRecord(t, signals, antigen)


def read_stream(path) -> list[StreamRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            rec = parse_stream_line(line, lineno)
            if rec is not None:
                records.append(rec)
    return records
