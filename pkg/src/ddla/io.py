"""Text-first persistence: snapshots, trace files, tables, summaries.

Every artifact starts with '#'-prefixed header lines ("# key: value") so
outputs are diffable and self-describing; writers emit keys in a fixed
order, making files byte-deterministic for a given configuration.
"""

from __future__ import annotations

import csv
import io as _io
import json

from .dynamics import GrowthTrace
from .exceptions import SnapshotFormatError
from .lattice import Site

ARTIFACT_VERSION = "0.1.0"

TRACE_COLUMNS = ("event_index", "time", "site_a", "site_b", "edge_lower_a", "edge_lower_b")
COLORED_COLUMNS = ("event_index", "time", "site_a", "site_b", "color")


def _header_lines(meta: dict) -> list[str]:
    lines = [f"# version: {ARTIFACT_VERSION}"]
    for k, v in meta.items():
        lines.append(f"# {k}: {v}")
    return lines


def _read_header(lines, path) -> tuple[dict, int]:
    meta = {}
    consumed = 0
    for line in lines:
        if not line.startswith("#"):
            break
        consumed += 1
        body = line[1:].strip()
        if ":" in body:
            k, v = body.split(":", 1)
            meta[k.strip()] = v.strip()
    return meta, consumed


def pack_sites(sites) -> str:
    return ";".join(f"{a} {b}" for a, b in sorted(sites))


def unpack_sites(text: str) -> list[Site]:
    if not text:
        return []
    out = []
    for part in text.split(";"):
        a, b = part.split()
        out.append((int(a), int(b)))
    return out


def write_snapshot(sites, path, meta: dict | None = None) -> None:
    """One "a b" pair per line, sorted, after the '#' header."""
    meta = dict(meta or {})
    lines = _header_lines(meta)
    for a, b in sorted(set(map(tuple, sites))):
        lines.append(f"{a} {b}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[list[Site], dict]:
    with open(path) as fh:
        raw = fh.read().splitlines()
    meta, consumed = _read_header(raw, path)
    sites = []
    for lineno, line in enumerate(raw[consumed:], start=consumed + 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SnapshotFormatError(path, lineno, f"expected 'a b', got {line!r}")
        try:
            sites.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise SnapshotFormatError(path, lineno, f"non-integer coordinates {line!r}")
    return sites, meta


def write_table(path, rows, columns, meta: dict | None = None) -> None:
    buf = _io.StringIO()
    for line in _header_lines(dict(meta or {})):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            writer.writerow([row[c] for c in columns])
        else:
            writer.writerow(list(row))
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_table(path) -> tuple[list[dict], dict]:
    with open(path) as fh:
        raw = fh.read().splitlines()
    meta, consumed = _read_header(raw, path)
    body = raw[consumed:]
    if not body:
        return [], meta
    reader = csv.reader(body)
    header = next(reader)
    rows = [dict(zip(header, rec)) for rec in reader if rec]
    return rows, meta


def write_trace(trace: GrowthTrace, path, extra_meta: dict | None = None) -> None:
    meta = {
        "kind": "trace",
        "mode": trace.mode,
        "attempts": trace.attempts,
        "initial": pack_sites(trace.initial),
    }
    for k, v in trace.meta.items():
        meta.setdefault(k, v)
    for k, v in (extra_meta or {}).items():
        meta.setdefault(k, v)
    rows = []
    for i, (t, site, lower) in enumerate(trace.additions, start=1):
        rows.append(
            (
                i,
                repr(float(t)),
                site[0],
                site[1],
                "" if lower is None else lower[0],
                "" if lower is None else lower[1],
            )
        )
    write_table(path, rows, TRACE_COLUMNS, meta)


def read_trace(path) -> GrowthTrace:
    rows, meta = read_table(path)
    additions = []
    for row in rows:
        lower = None
        if row["edge_lower_a"] != "":
            lower = (int(row["edge_lower_a"]), int(row["edge_lower_b"]))
        additions.append((float(row["time"]), (int(row["site_a"]), int(row["site_b"])), lower))
    mode = meta.get("mode", "discrete")
    if mode == "discrete":
        additions = [(int(t), s, e) for t, s, e in additions]
    return GrowthTrace(
        mode=mode,
        initial=tuple(unpack_sites(meta.get("initial", "0 0"))),
        additions=additions,
        attempts=int(meta.get("attempts", 0)),
        meta={k: v for k, v in meta.items() if k not in ("kind", "mode", "attempts", "initial", "version")},
    )


def write_colored_trace(ctrace, path, extra_meta: dict | None = None) -> None:
    meta = {
        "kind": "colored-trace",
        "window": ctrace.window,
        "attempts": ctrace.attempts,
        "initial_black": pack_sites(ctrace.initial_black),
        "initial_red": pack_sites(ctrace.initial_red),
    }
    for k, v in ctrace.meta.items():
        meta.setdefault(k, v)
    for k, v in (extra_meta or {}).items():
        meta.setdefault(k, v)
    rows = [
        (i, repr(float(t)), site[0], site[1], color)
        for i, (t, site, color) in enumerate(ctrace.events, start=1)
    ]
    write_table(path, rows, COLORED_COLUMNS, meta)


def read_colored_trace(path):
    from .influence import ColoredTrace

    rows, meta = read_table(path)
    events = []
    for row in rows:
        events.append(
            (float(row["time"]), (int(row["site_a"]), int(row["site_b"])), row["color"])
        )
    red_stats = []
    red_h = red_d = None
    initial_red = unpack_sites(meta.get("initial_red", ""))
    if initial_red:
        from .lattice import deviation, height

        red_h = max(height(p) for p in initial_red)
        red_d = max(abs(deviation(p)) for p in initial_red)
    for t, site, color in events:
        if color == "red":
            from .lattice import deviation, height

            h, d = height(site), abs(deviation(site))
            red_h = h if red_h is None else max(red_h, h)
            red_d = d if red_d is None else max(red_d, d)
            red_stats.append((t, red_h, red_d))
    return ColoredTrace(
        window=int(meta.get("window", 0)),
        initial_black=tuple(unpack_sites(meta.get("initial_black", ""))),
        initial_red=tuple(initial_red),
        events=events,
        red_stats=red_stats,
        attempts=int(meta.get("attempts", 0)),
        meta={k: v for k, v in meta.items() if k.startswith(("T", "seed"))},
    )


def write_json_summary(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
