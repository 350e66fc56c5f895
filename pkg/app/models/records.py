"""Records produced while a scenario runs."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List

from app.core.propagation import Channel


class ChannelMatch(str, Enum):
    """Outcome of comparing a transmission's channel with a receiver's."""

    VALID = "valid"
    NOISE = "noise"
    IGNORED = "ignored"


class PipelineStage(str, Enum):
    """Radio pipeline stages, in the order they run."""

    RECEIVER_GROUP = "receiver_group"
    CHANNEL_MATCH = "channel_match"
    TRANSMISSION_DELAY = "transmission_delay"
    LINK_CLOSURE = "link_closure"
    TX_GAIN = "tx_gain"
    PROPAGATION_DELAY = "propagation_delay"
    RX_GAIN = "rx_gain"
    RECEIVED_POWER = "received_power"
    INTERFERENCE_NOISE = "interference_noise"
    BACKGROUND_NOISE = "background_noise"
    SNR = "snr"
    BER = "ber"
    ERROR_ALLOCATION = "error_allocation"
    ERROR_CORRECTION = "error_correction"


class NodeRole(str, Enum):
    TRANSMITTER = "transmitter"
    RECEIVER = "receiver"
    JAMMER = "jammer"


@dataclass(frozen=True)
class Transmission:
    """One packet in flight."""

    packet_id: int
    source_node_id: str
    channel: Channel
    size_bits: int
    tx_power_w: float
    start_time: float

    def __post_init__(self):
        if self.size_bits <= 0:
            raise ValueError(f"packet size must be positive, got {self.size_bits}")
        if self.tx_power_w <= 0:
            raise ValueError(f"transmit power must be positive, got {self.tx_power_w}")


@dataclass(frozen=True)
class NoiseContribution:
    """A noise transmission overlapping a reception, as seen by the receiver."""

    transmission: Transmission
    rx_power_w: float
    overlap_start: float
    overlap_end: float

    @property
    def overlap_duration(self) -> float:
        return max(0.0, self.overlap_end - self.overlap_start)


@dataclass(frozen=True)
class ReceptionRecord:
    packet_id: int
    source_node_id: str
    rx_node_id: str
    match: ChannelMatch
    size_bits: int
    start_time: float
    distance_m: float
    g_t: float
    g_r: float
    rx_power_w: float
    background_noise_w: float
    interference_w: float
    snr_db: float
    ber: float
    bit_errors: int
    accepted: bool
    end_time: float


@dataclass(frozen=True)
class PowerSample:
    """Periodic, jammer-independent reading of the broadcaster's signal at a receiver."""

    time: float
    rx_node_id: str
    source_node_id: str
    rx_power_w: float
    snr_db: float


@dataclass(frozen=True)
class TraceRow:
    packet_id: int
    rx_node_id: str
    stage: PipelineStage
    value: object
    unit: str


@dataclass(frozen=True)
class ThroughputWindow:
    start: float
    length: float
    bits: int

    @property
    def bps(self) -> float:
        return self.bits / self.length


@dataclass(frozen=True)
class Delivery:
    """A data packet scheduled toward a receiver on a valid channel."""

    packet_id: int
    rx_node_id: str
    start_time: float
    size_bits: int


@dataclass
class StatsCounters:
    sent: int = 0
    received: int = 0
    rejected: int = 0
    bit_errors: int = 0


@dataclass
class StatsSeries:
    """Everything a run measured."""

    scenario_name: str
    seed: int
    duration_s: float
    window_s: float
    deliveries: List[Delivery] = field(default_factory=list)
    records: List[ReceptionRecord] = field(default_factory=list)
    samples: List[PowerSample] = field(default_factory=list)
    trace: List[TraceRow] = field(default_factory=list)
    event_log: List[tuple] = field(default_factory=list)

    @property
    def counters(self) -> StatsCounters:
        return StatsCounters(
            sent=len(self.deliveries),
            received=sum(1 for r in self.records if r.accepted),
            rejected=sum(1 for r in self.records if not r.accepted),
            bit_errors=sum(r.bit_errors for r in self.records),
        )

    @property
    def accepted_bits(self) -> int:
        return sum(r.size_bits for r in self.records if r.accepted)

    def receivers(self) -> List[str]:
        seen: Dict[str, None] = {}
        for item in [*self.deliveries, *self.records, *self.samples]:
            seen.setdefault(item.rx_node_id, None)
        return list(seen)

    def for_receiver(self, node_id: str) -> "StatsSeries":
        """The same run seen from one receiver only."""
        return StatsSeries(
            scenario_name=self.scenario_name,
            seed=self.seed,
            duration_s=self.duration_s,
            window_s=self.window_s,
            deliveries=[d for d in self.deliveries if d.rx_node_id == node_id],
            records=[r for r in self.records if r.rx_node_id == node_id],
            samples=[s for s in self.samples if s.rx_node_id == node_id],
            trace=[t for t in self.trace if t.rx_node_id == node_id],
            event_log=self.event_log,
        )


@dataclass
class VariantResult:
    """One antenna variant of a comparison."""

    name: str
    series: StatsSeries

    @property
    def bit_errors(self) -> int:
        return self.series.counters.bit_errors

    @property
    def accepted_bits(self) -> int:
        return self.series.accepted_bits


@dataclass
class AntennaComparison:
    scenario_name: str
    node_id: str
    seed: int
    variants: List[VariantResult] = field(default_factory=list)

    def ranking(self) -> List[str]:
        """Variant names by cumulative bit errors, fewest first; ties keep input order."""
        order = sorted(enumerate(self.variants), key=lambda item: (item[1].bit_errors, item[0]))
        return [variant.name for _, variant in order]

    def variant(self, name: str) -> VariantResult:
        for variant in self.variants:
            if variant.name == name:
                return variant
        raise KeyError(f"no variant '{name}'")
