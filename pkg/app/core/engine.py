"""
Discrete-event engine.

One broadcaster, any number of receivers and optional jammers move along
their trajectories while the engine pops events off a (time, sequence)
heap: packet emissions, reception completions, periodic power samples and
the end of the run. Each completed reception goes through the radio
pipeline; jammer emissions (and any packet arriving on a merely
overlapping band) are logged per receiver and folded in as interference.

A run is single-threaded and fully determined by (scenario, seed).
"""

import heapq
import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.antenna import AntennaSystem, mean_spherical_gain, resolve_boresight
from app.core.errors import InvalidScenarioError
from app.core.geometry import Orientation, distance
from app.core.pipeline import (
    LinkSnapshot,
    PipelineTrace,
    ReceiverRadio,
    background_noise,
    channel_match,
    link_power,
    process_reception,
    transmission_delay,
)
from app.core.propagation import propagation_delay, to_db
from app.models.records import (
    ChannelMatch,
    Delivery,
    NodeRole,
    NoiseContribution,
    PowerSample,
    ReceptionRecord,
    StatsSeries,
    ThroughputWindow,
    Transmission,
)
from app.models.scenario import ConstantInterval, NodeConfig, ScenarioConfig
from app.utils.rng import spawn_streams

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 0.05


class EventKind(str, Enum):
    PACKET_EMIT = "packet_emit"
    RECEPTION_COMPLETE = "reception_complete"
    STATS_SAMPLE = "stats_sample"
    SIM_END = "sim_end"


@dataclass(order=True)
class Event:
    time: float
    sequence: int
    kind: EventKind = field(compare=False)
    payload: object = field(default=None, compare=False)


class EventQueue:
    """Min-heap of events keyed on (time, sequence); ties pop in insertion order."""

    def __init__(self):
        self._heap: List[Event] = []
        self._counter = itertools.count()

    def schedule(self, time: float, kind: EventKind, payload=None) -> Event:
        event = Event(time, next(self._counter), kind, payload)
        heapq.heappush(self._heap, event)
        return event

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def __len__(self) -> int:
        return len(self._heap)


@dataclass(frozen=True)
class _PendingReception:
    transmission: Transmission
    rx_node_id: str
    window_start: float
    window_end: float


@dataclass(frozen=True)
class _NoiseArrival:
    transmission: Transmission
    window_start: float
    window_end: float


def validate(scenario: ScenarioConfig) -> List[str]:
    """Every structural problem with ``scenario``, as human-readable strings."""
    violations: List[str] = []

    node_ids = [n.id for n in scenario.nodes]
    for node_id in sorted({i for i in node_ids if node_ids.count(i) > 1}):
        violations.append(f"duplicate node id '{node_id}'")
    channel_ids = [c.id for c in scenario.channels]
    for channel_id in sorted({i for i in channel_ids if channel_ids.count(i) > 1}):
        violations.append(f"duplicate channel id '{channel_id}'")

    transmitters = scenario.nodes_with_role(NodeRole.TRANSMITTER)
    if len(transmitters) != 1:
        violations.append(f"exactly one transmitter is required, found {len(transmitters)}")
    if not scenario.nodes_with_role(NodeRole.RECEIVER):
        violations.append("at least one receiver is required")

    known_nodes = set(node_ids)
    known_channels = set(channel_ids)
    for node in scenario.nodes:
        label = f"node '{node.id}'"
        if node.role in (NodeRole.TRANSMITTER, NodeRole.JAMMER):
            if node.generator is None:
                violations.append(f"{label} ({node.role.value}) needs a generator")
            if node.tx_channel is None:
                violations.append(f"{label} ({node.role.value}) needs a tx_channel")
        else:
            if node.generator is not None:
                violations.append(f"{label} is a receiver and must not define a generator")
            if node.rx_channel is None:
                violations.append(f"{label} needs an rx_channel")
        for key in ("tx_channel", "rx_channel"):
            channel_id = getattr(node, key)
            if channel_id is not None and channel_id not in known_channels:
                violations.append(f"{label} {key} '{channel_id}' is not a declared channel")

        pointing = node.antenna.pointing
        if pointing.kind == "locked_to_target":
            if pointing.target not in known_nodes:
                violations.append(f"{label} is locked to unknown target '{pointing.target}'")
            elif pointing.target == node.id:
                violations.append(f"{label} is locked to itself")

        if node.antenna.check_normalization:
            mean_gain = mean_spherical_gain(node.antenna.pattern)
            if abs(mean_gain - 1.0) > NORMALIZATION_TOLERANCE:
                violations.append(
                    f"{label} antenna is not power-normalized (mean spherical gain {mean_gain:.4f})"
                )

    return violations


class Simulation:
    """
    A single run of a scenario.

    Args:
        scenario: a validated scenario configuration
        seed: overrides ``scenario.seed`` when given
        trace: record a per-stage trace row for every reception
        progress_callback: optional callable (stage: str, percentage: int)
    """

    def __init__(
        self,
        scenario: ScenarioConfig,
        seed: Optional[int] = None,
        trace: bool = False,
        progress_callback: Optional[Callable[[str, int], None]] = None,
    ):
        violations = validate(scenario)
        if violations:
            raise InvalidScenarioError(violations)

        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.progress_callback = progress_callback
        self.trace = PipelineTrace() if trace or scenario.stats.trace else None

        self._nodes: Dict[str, NodeConfig] = {n.id: n for n in scenario.nodes}
        self._sources = [n for n in scenario.nodes if n.generator is not None]
        self._receivers = scenario.nodes_with_role(NodeRole.RECEIVER)
        self._transmitter = scenario.nodes_with_role(NodeRole.TRANSMITTER)[0]

        # Stream 0 draws bit errors; one traffic stream per generating node.
        streams = spawn_streams(self.seed, 1 + len(self._sources))
        self._error_stream: np.random.Generator = streams[0]
        self._traffic_streams = {node.id: stream for node, stream in zip(self._sources, streams[1:])}

        self._queue = EventQueue()
        self._packet_ids = itertools.count()
        self._emitted: Dict[str, int] = defaultdict(int)
        self._pending: Dict[str, List[_PendingReception]] = defaultdict(list)
        self._noise_log: Dict[str, List[_NoiseArrival]] = defaultdict(list)
        self._last_progress = -1

        self.series = StatsSeries(
            scenario_name=scenario.name,
            seed=self.seed,
            duration_s=scenario.duration_s,
            window_s=scenario.stats.window_s,
        )

    def _update_progress(self, stage: str, progress: int):
        if self.progress_callback:
            self.progress_callback(stage, progress)
        logger.debug(f"{self.scenario.name}: {stage} - {progress}%")

    def _channel(self, channel_id: str):
        return self.scenario.channel(channel_id)

    def _boresight(self, node: NodeConfig, t: float) -> Orientation:
        position = node.trajectory.position_at(t)
        heading = node.trajectory.heading_at(t)
        target_pos = None
        if node.antenna.pointing.kind == "locked_to_target":
            target_pos = self._nodes[node.antenna.pointing.target].trajectory.position_at(t)
            if tuple(target_pos) == tuple(position):
                # On top of its target: point along the heading until the two separate.
                logger.debug(f"{node.id} coincides with its target at t={t:.6f}, using its heading")
                return Orientation(yaw=heading.yaw, pitch=heading.pitch, roll=node.antenna.pointing.rotation_rad)
        return resolve_boresight(node.antenna, (position, heading), target_pos)

    def _snapshot(self, source: NodeConfig, receiver: NodeConfig, t: float) -> LinkSnapshot:
        return LinkSnapshot(
            tx_position=source.trajectory.position_at(t),
            tx_boresight=self._boresight(source, t),
            tx_pattern=source.antenna.pattern,
            rx_position=receiver.trajectory.position_at(t),
            rx_boresight=self._boresight(receiver, t),
            rx_pattern=receiver.antenna.pattern,
        )

    def _radio(self, receiver: NodeConfig) -> ReceiverRadio:
        return ReceiverRadio(
            node_id=receiver.id,
            channel=self._channel(receiver.rx_channel),
            noise_figure_db=receiver.radio.noise_figure_db,
            error_threshold_bits=receiver.radio.error_threshold_bits,
            system_loss=receiver.radio.system_loss_linear,
        )

    def _schedule_emit(self, node: NodeConfig, t: float) -> None:
        if t < self.scenario.duration_s:
            self._queue.schedule(t, EventKind.PACKET_EMIT, node.id)

    def _next_emission_time(self, node: NodeConfig, t: float) -> float:
        generator = node.generator
        if isinstance(generator.interval, ConstantInterval):
            # Counted from the start time so long runs do not drift.
            return generator.start_s + self._emitted[node.id] * generator.interval.interval_s
        return t + float(self._traffic_streams[node.id].exponential(generator.interval.mean_s))

    def _on_emit(self, node_id: str, t: float) -> str:
        node = self._nodes[node_id]
        generator = node.generator
        channel = self._channel(node.tx_channel)
        tx = Transmission(
            packet_id=next(self._packet_ids),
            source_node_id=node.id,
            channel=channel,
            size_bits=generator.packet_size_bits,
            tx_power_w=generator.tx_power_w,
            start_time=t,
        )
        tx_delay = transmission_delay(tx.size_bits, channel.data_rate_bps)
        source_position = node.trajectory.position_at(t)

        for receiver in self._receivers:
            match = channel_match(channel, self._channel(receiver.rx_channel))
            if match is ChannelMatch.IGNORED:
                continue
            d = distance(source_position, receiver.trajectory.position_at(t))
            window_start = t + propagation_delay(d)
            window_end = window_start + tx_delay
            if node.role == NodeRole.TRANSMITTER and match is ChannelMatch.VALID:
                pending = _PendingReception(tx, receiver.id, window_start, window_end)
                self._pending[receiver.id].append(pending)
                self.series.deliveries.append(Delivery(tx.packet_id, receiver.id, t, tx.size_bits))
                self._queue.schedule(window_end, EventKind.RECEPTION_COMPLETE, pending)
            else:
                self._noise_log[receiver.id].append(_NoiseArrival(tx, window_start, window_end))

        self._emitted[node.id] += 1
        self._schedule_emit(node, self._next_emission_time(node, t))
        return f"{node.id}#{tx.packet_id}"

    def _interference(self, receiver: NodeConfig, pending: _PendingReception, t_mid: float) -> List[NoiseContribution]:
        contributions = []
        for arrival in self._noise_log[receiver.id]:
            overlap_start = max(arrival.window_start, pending.window_start)
            overlap_end = min(arrival.window_end, pending.window_end)
            if overlap_end <= overlap_start:
                continue
            source = self._nodes[arrival.transmission.source_node_id]
            power = link_power(
                arrival.transmission.tx_power_w,
                arrival.transmission.channel,
                self._snapshot(source, receiver, t_mid),
                receiver.radio.system_loss_linear,
            )
            contributions.append(NoiseContribution(arrival.transmission, power, overlap_start, overlap_end))
        return contributions

    def _prune_noise(self, receiver_id: str, now: float) -> None:
        # Nothing ending before the earliest open reception window can overlap it.
        horizon = min([now, *(p.window_start for p in self._pending[receiver_id])])
        self._noise_log[receiver_id] = [a for a in self._noise_log[receiver_id] if a.window_end > horizon]

    def _on_reception(self, pending: _PendingReception, t: float) -> str:
        receiver = self._nodes[pending.rx_node_id]
        source = self._nodes[pending.transmission.source_node_id]
        t_mid = 0.5 * (pending.window_start + pending.window_end)

        record = process_reception(
            pending.transmission,
            self._snapshot(source, receiver, t_mid),
            self._radio(receiver),
            self._interference(receiver, pending, t_mid),
            self._error_stream,
            self.trace,
        )
        self.series.records.append(record)
        logger.debug(
            f"packet {record.packet_id} at {receiver.id}: snr {record.snr_db:.2f} dB, ber {record.ber:.3g}, "
            f"{record.bit_errors} bit errors, {'accepted' if record.accepted else 'rejected'}"
        )

        self._pending[receiver.id].remove(pending)
        self._prune_noise(receiver.id, t)
        return f"{record.packet_id}->{receiver.id}"

    def _on_sample(self, index: int, t: float) -> str:
        generator = self._transmitter.generator
        channel = self._channel(self._transmitter.tx_channel)
        for receiver in self._receivers:
            if channel_match(channel, self._channel(receiver.rx_channel)) is not ChannelMatch.VALID:
                continue
            power = link_power(
                generator.tx_power_w,
                channel,
                self._snapshot(self._transmitter, receiver, t),
                receiver.radio.system_loss_linear,
            )
            noise = background_noise(channel.bandwidth_hz, receiver.radio.noise_figure_db)
            self.series.samples.append(
                PowerSample(t, receiver.id, self._transmitter.id, power, to_db(power / noise))
            )
        next_index = index + 1
        next_time = next_index * self.scenario.stats.sample_period_s
        if next_time < self.scenario.duration_s:
            self._queue.schedule(next_time, EventKind.STATS_SAMPLE, next_index)
        return str(index)

    def _report_progress(self, t: float) -> None:
        progress = int(10 * min(t / self.scenario.duration_s, 1.0)) * 10
        if progress > self._last_progress:
            self._last_progress = progress
            self._update_progress("Simulating", progress)

    def run(self) -> StatsSeries:
        duration = self.scenario.duration_s
        logger.info(
            f"Running scenario '{self.scenario.name}' for {duration:g} s "
            f"(seed {self.seed}, {len(self._receivers)} receiver(s), {len(self._sources) - 1} jammer(s))"
        )

        # Scheduled first, so anything still in flight at the end is dropped.
        self._queue.schedule(duration, EventKind.SIM_END)
        for node in self._sources:
            self._schedule_emit(node, node.generator.start_s)
        self._queue.schedule(0.0, EventKind.STATS_SAMPLE, 0)

        while self._queue:
            event = self._queue.pop()
            if event.kind is EventKind.SIM_END:
                self.series.event_log.append((event.time, event.sequence, event.kind.value, ""))
                break
            if event.kind is EventKind.PACKET_EMIT:
                detail = self._on_emit(event.payload, event.time)
            elif event.kind is EventKind.RECEPTION_COMPLETE:
                detail = self._on_reception(event.payload, event.time)
            else:
                detail = self._on_sample(event.payload, event.time)
            self.series.event_log.append((event.time, event.sequence, event.kind.value, detail))
            self._report_progress(event.time)

        if self.trace is not None:
            self.series.trace = list(self.trace.rows)
        dropped = sum(len(p) for p in self._pending.values())
        counters = self.series.counters
        logger.info(
            f"Scenario '{self.scenario.name}' finished: sent {counters.sent}, received {counters.received}, "
            f"rejected {counters.rejected}, bit errors {counters.bit_errors}, in flight at end {dropped}"
        )
        self._update_progress("Simulation complete", 100)
        return self.series


def run(
    scenario: ScenarioConfig,
    seed: Optional[int] = None,
    trace: bool = False,
    progress_callback: Optional[Callable[[str, int], None]] = None,
) -> StatsSeries:
    """Run ``scenario`` once; raises InvalidScenarioError if it does not validate."""
    return Simulation(scenario, seed=seed, trace=trace, progress_callback=progress_callback).run()


def _window_count(window_s: float, duration_s: float) -> int:
    return max(1, math.ceil(duration_s / window_s))


def _windows_from_bits(bits: List[int], window_s: float, duration_s: float) -> List[ThroughputWindow]:
    windows = []
    for index, count in enumerate(bits):
        start = index * window_s
        windows.append(ThroughputWindow(start=start, length=min(window_s, duration_s - start), bits=count))
    return windows


def throughput_windows(
    records: Sequence[ReceptionRecord],
    window_s: float,
    duration_s: Optional[float] = None,
) -> List[ThroughputWindow]:
    """
    Accepted bits per window, each packet counted in the window holding its
    emission time. Without ``duration_s`` the series ends with the last record.
    """
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    if duration_s is None:
        duration_s = max((r.end_time for r in records), default=window_s)
    bits = [0] * _window_count(window_s, duration_s)
    for record in records:
        if not record.accepted:
            continue
        index = int(record.start_time // window_s)
        if 0 <= index < len(bits):
            bits[index] += record.size_bits
    return _windows_from_bits(bits, window_s, duration_s)


def offered_load_windows(
    deliveries: Sequence[Delivery],
    window_s: float,
    duration_s: float,
) -> List[ThroughputWindow]:
    """Bits scheduled toward receivers per window, on the same grid as throughput_windows."""
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    bits = [0] * _window_count(window_s, duration_s)
    for delivery in deliveries:
        index = int(delivery.start_time // window_s)
        if 0 <= index < len(bits):
            bits[index] += delivery.size_bits
    return _windows_from_bits(bits, window_s, duration_s)


def without_jammers(scenario: ScenarioConfig) -> ScenarioConfig:
    return scenario.without_jammers()


def with_antenna(scenario: ScenarioConfig, node_id: str, antenna: AntennaSystem, name: Optional[str] = None) -> ScenarioConfig:
    return scenario.with_antenna(node_id, antenna, name=name)
