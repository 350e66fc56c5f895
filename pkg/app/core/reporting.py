"""
CSV and text output for finished runs.

CSV column schema (one file per receiver):

    time_s, kind, rx_power_w, snr_db, ber, bit_errors, accepted, throughput_bps

``kind`` is ``packet`` for a reception record (timed at the end of its
reception window) or ``sample`` for a periodic power sample (which leaves
ber/bit_errors/accepted empty and carries its window's throughput).
Numbers are written with 12 significant digits, booleans as true/false.
"""

import csv
import logging
import math
import os
from contextlib import contextmanager
from typing import IO, Iterator, List, Optional, Sequence, Union

from app.core.engine import throughput_windows
from app.core.propagation import watts_to_dbm
from app.models.records import AntennaComparison, StatsSeries, TraceRow

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["time_s", "kind", "rx_power_w", "snr_db", "ber", "bit_errors", "accepted", "throughput_bps"]
TRACE_COLUMNS = ["packet_id", "rx_node", "stage", "value", "unit"]

Destination = Union[str, os.PathLike, IO[str]]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(getattr(value, "value", value))


@contextmanager
def _open_destination(destination: Destination) -> Iterator[IO[str]]:
    if hasattr(destination, "write"):
        yield destination
        return
    with open(destination, "w", newline="", encoding="utf-8") as f:
        yield f


def csv_rows(series: StatsSeries, node_id: Optional[str] = None) -> List[list]:
    """Data rows (unformatted) for one receiver, or every receiver when node_id is None."""
    node_ids = [node_id] if node_id is not None else series.receivers()
    rows = []
    for rx_id in node_ids:
        view = series.for_receiver(rx_id)
        windows = throughput_windows(view.records, series.window_s, series.duration_s)
        for record in view.records:
            rows.append(
                (record.end_time, 0, rx_id, [
                    record.end_time, "packet", record.rx_power_w, record.snr_db,
                    record.ber, record.bit_errors, record.accepted, _window_bps(windows, series.window_s, record.start_time),
                ])
            )
        for sample in view.samples:
            rows.append(
                (sample.time, 1, rx_id, [
                    sample.time, "sample", sample.rx_power_w, sample.snr_db,
                    None, None, None, _window_bps(windows, series.window_s, sample.time),
                ])
            )
    rows.sort(key=lambda row: row[:3])
    return [row[3] for row in rows]


def _window_bps(windows, window_s: float, t: float) -> float:
    if not windows:
        return 0.0
    index = min(max(int(t // window_s), 0), len(windows) - 1)
    return windows[index].bps


def emit_csv(series: StatsSeries, destination: Destination, node_id: Optional[str] = None) -> int:
    """
    Write the run as CSV.

    Returns:
        the number of data rows written (the header is not counted)

    Raises:
        OSError: if the destination cannot be written
    """
    rows = csv_rows(series, node_id)
    with _open_destination(destination) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    logger.debug(f"Wrote {len(rows)} CSV rows for '{series.scenario_name}'")
    return len(rows)


def emit_trace_csv(rows: Sequence[TraceRow], destination: Destination) -> int:
    """Write pipeline trace rows; returns the number of data rows."""
    with _open_destination(destination) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([
                format_value(row.packet_id),
                row.rx_node_id,
                row.stage.value,
                format_value(row.value),
                row.unit,
            ])
    return len(rows)


def _format_windows(windows) -> str:
    spans = [f"[{w.start:g}, {w.start + w.length:g}) s" for w in windows]
    return ", ".join(spans) if spans else "none"


def _series_summary(series: StatsSeries) -> List[str]:
    lines = [
        f"Scenario '{series.scenario_name}' (seed {series.seed}): "
        f"{series.duration_s:g} s simulated, {series.window_s:g} s throughput windows"
    ]
    for rx_id in series.receivers():
        view = series.for_receiver(rx_id)
        counters = view.counters
        lines.append(f"Receiver '{rx_id}':")
        lines.append(
            f"  sent {counters.sent}, received {counters.received}, "
            f"rejected {counters.rejected}, bit errors {counters.bit_errors}"
        )
        lines.append(f"  accepted bits {view.accepted_bits}")
        if view.records:
            worst = max(view.records, key=lambda r: r.ber)
            lines.append(f"  max BER {worst.ber:.6g} at t = {worst.end_time:.6f} s")
            finite = [r.snr_db for r in view.records if math.isfinite(r.snr_db)]
            if finite:
                lines.append(f"  SNR range {min(finite):.2f} .. {max(finite):.2f} dB")
            powers = [watts_to_dbm(r.rx_power_w) for r in view.records]
            lines.append(f"  received power {min(powers):.2f} .. {max(powers):.2f} dBm")
        else:
            lines.append("  max BER n/a (no receptions)")
        windows = throughput_windows(view.records, series.window_s, series.duration_s)
        idle = [w for w in windows if w.bits == 0]
        lines.append(f"  zero-throughput windows: {_format_windows(idle)}")
    return lines


def _comparison_summary(comparison: AntennaComparison) -> List[str]:
    lines = [
        f"Antenna comparison on '{comparison.scenario_name}' "
        f"(node '{comparison.node_id}', seed {comparison.seed})",
        f"  {'variant':<10} {'bit errors':>12} {'accepted bits':>14} {'received':>9} {'rejected':>9}",
    ]
    for variant in comparison.variants:
        counters = variant.series.counters
        lines.append(
            f"  {variant.name:<10} {counters.bit_errors:>12} {variant.accepted_bits:>14} "
            f"{counters.received:>9} {counters.rejected:>9}"
        )
    lines.append(f"Ranking by cumulative bit errors (fewest first): {', '.join(comparison.ranking())}")
    return lines


def emit_summary(result: Union[StatsSeries, AntennaComparison]) -> str:
    """Human-readable totals for a run or an antenna comparison."""
    if isinstance(result, AntennaComparison):
        return "\n".join(_comparison_summary(result)) + "\n"
    return "\n".join(_series_summary(result)) + "\n"
