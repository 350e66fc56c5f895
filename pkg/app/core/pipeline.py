"""
Per-packet radio pipeline.

A valid packet reaching a receiver runs through a fixed chain of stages:
receiver group, channel match, transmission delay, link closure, tx gain,
propagation delay, rx gain, received power, interference noise,
background noise, SNR, BER, error allocation and error correction.
Each stage is a plain function; ``process_reception`` strings them together
and, when asked, leaves a trace row per stage.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from app.core.antenna import gain_toward
from app.core.errors import ChannelError
from app.core.geometry import Orientation, Vec3, distance
from app.core.propagation import (
    BOLTZMANN,
    REFERENCE_TEMPERATURE,
    Channel,
    free_space_path_loss_db,
    friis_received_power,
    from_db,
    propagation_delay,
    to_db,
)
from app.models.records import (
    ChannelMatch,
    NoiseContribution,
    PipelineStage,
    ReceptionRecord,
    TraceRow,
    Transmission,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkSnapshot:
    """Both ends of a link sampled at the middle of the reception window."""

    tx_position: Vec3
    tx_boresight: Orientation
    tx_pattern: object
    rx_position: Vec3
    rx_boresight: Orientation
    rx_pattern: object


@dataclass(frozen=True)
class ReceiverRadio:
    node_id: str
    channel: Channel
    noise_figure_db: float = 0.0
    error_threshold_bits: int = 0
    system_loss: float = 1.0


@dataclass
class PipelineTrace:
    rows: List[TraceRow] = field(default_factory=list)

    def add(self, packet_id: int, rx_node_id: str, stage: PipelineStage, value, unit: str = "") -> None:
        self.rows.append(TraceRow(packet_id, rx_node_id, stage, value, unit))
        logger.debug(f"packet {packet_id} @ {rx_node_id}: {stage.value} = {value} {unit}".rstrip())


def channel_match(tx_channel: Channel, rx_channel: Channel) -> ChannelMatch:
    """valid on the same channel, noise on an overlapping band, ignored otherwise."""
    if tx_channel.id == rx_channel.id and tx_channel.frequency_hz == rx_channel.frequency_hz:
        return ChannelMatch.VALID
    tx_low, tx_high = tx_channel.band
    rx_low, rx_high = rx_channel.band
    if tx_low < rx_high and rx_low < tx_high:
        return ChannelMatch.NOISE
    return ChannelMatch.IGNORED


def transmission_delay(size_bits: float, data_rate_bps: float) -> float:
    if size_bits <= 0 or data_rate_bps <= 0:
        raise ValueError(f"size and data rate must be positive, got {size_bits}, {data_rate_bps}")
    return size_bits / data_rate_bps


def snr_db(rx_power_w: float, background_noise_w: float, interference_w: float) -> float:
    """Signal to interference-plus-noise ratio in dB."""
    if rx_power_w < 0 or background_noise_w < 0 or interference_w < 0:
        raise ValueError("powers must be nonnegative")
    total_noise = background_noise_w + interference_w
    if total_noise <= 0:
        raise ChannelError("noiseless channel")
    return to_db(rx_power_w / total_noise)


def ber_bpsk(eb_n0_linear: float) -> float:
    """Coherent BPSK in AWGN: Q(sqrt(2 Eb/N0)) = erfc(sqrt(Eb/N0)) / 2."""
    if eb_n0_linear < 0:
        raise ValueError(f"Eb/N0 must be nonnegative, got {eb_n0_linear}")
    return float(0.5 * erfc(math.sqrt(eb_n0_linear)))


def eb_n0_from_snr(snr_linear: float, bandwidth_hz: float, data_rate_bps: float) -> float:
    if snr_linear < 0:
        raise ValueError(f"SNR must be nonnegative, got {snr_linear}")
    if bandwidth_hz <= 0 or data_rate_bps <= 0:
        raise ValueError("bandwidth and data rate must be positive")
    return snr_linear * bandwidth_hz / data_rate_bps


def background_noise(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise k T0 B, raised by the receiver noise figure."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    return BOLTZMANN * REFERENCE_TEMPERATURE * bandwidth_hz * from_db(noise_figure_db)


def interference_power(
    reception_window: Tuple[float, float],
    contributions: Sequence[NoiseContribution],
) -> float:
    """Noise power averaged over the reception window (duty-cycle weighting)."""
    start, end = reception_window
    duration = end - start
    if duration <= 0:
        raise ValueError(f"reception window must have positive length, got {reception_window}")
    energy = sum(c.rx_power_w * c.overlap_duration for c in contributions)
    return energy / duration


def allocate_errors(ber: float, size_bits: int, rng: np.random.Generator) -> int:
    """Number of corrupted bits, drawn from Binomial(size, ber)."""
    if not 0.0 <= ber <= 1.0:
        raise ValueError(f"ber must lie in [0, 1], got {ber}")
    if size_bits <= 0:
        raise ValueError(f"packet size must be positive, got {size_bits}")
    return int(rng.binomial(size_bits, ber))


def error_correction(bit_errors: int, threshold: int) -> bool:
    return bit_errors <= threshold


def link_gain(pattern, boresight: Orientation, origin: Vec3, target: Vec3) -> float:
    # Coincident nodes: fall back to the boresight gain.
    if tuple(origin) == tuple(target):
        return pattern.gain(0.0, 0.0)
    return gain_toward(pattern, boresight, origin, target)


def link_power(tx_power_w: float, channel: Channel, link: LinkSnapshot, system_loss: float = 1.0) -> float:
    """Received power over a sampled link, gains included."""
    g_t = link_gain(link.tx_pattern, link.tx_boresight, link.tx_position, link.rx_position)
    g_r = link_gain(link.rx_pattern, link.rx_boresight, link.rx_position, link.tx_position)
    d = distance(link.tx_position, link.rx_position)
    return friis_received_power(tx_power_w, g_t, g_r, channel.wavelength_m, d, system_loss)


def process_reception(
    tx: Transmission,
    link: LinkSnapshot,
    radio: ReceiverRadio,
    noise: Sequence[NoiseContribution],
    rng: np.random.Generator,
    trace: Optional[PipelineTrace] = None,
) -> ReceptionRecord:
    """Run one valid packet through every stage and collect the results."""

    def note(stage: PipelineStage, value, unit: str = "") -> None:
        if trace is not None:
            trace.add(tx.packet_id, radio.node_id, stage, value, unit)

    note(PipelineStage.RECEIVER_GROUP, radio.node_id, "node")

    match = channel_match(tx.channel, radio.channel)
    note(PipelineStage.CHANNEL_MATCH, match.value)
    if match is not ChannelMatch.VALID:
        raise ChannelError(
            f"packet {tx.packet_id} on '{tx.channel.id}' is not valid at '{radio.node_id}' ({match.value})"
        )

    tx_delay = transmission_delay(tx.size_bits, tx.channel.data_rate_bps)
    note(PipelineStage.TRANSMISSION_DELAY, tx_delay, "s")

    # Free space: nothing obstructs the path.
    note(PipelineStage.LINK_CLOSURE, True)

    g_t = link_gain(link.tx_pattern, link.tx_boresight, link.tx_position, link.rx_position)
    note(PipelineStage.TX_GAIN, g_t)

    d = distance(link.tx_position, link.rx_position)
    prop_delay = propagation_delay(d)
    note(PipelineStage.PROPAGATION_DELAY, prop_delay, "s")

    g_r = link_gain(link.rx_pattern, link.rx_boresight, link.rx_position, link.tx_position)
    note(PipelineStage.RX_GAIN, g_r)

    rx_power = friis_received_power(
        tx.tx_power_w, g_t, g_r, tx.channel.wavelength_m, d, radio.system_loss
    )
    note(PipelineStage.RECEIVED_POWER, rx_power, "W")
    if trace is not None:
        logger.debug(
            f"packet {tx.packet_id}: path loss {free_space_path_loss_db(d, tx.channel.frequency_hz):.2f} dB over {d:.1f} m"
        )

    window_start = tx.start_time + prop_delay
    window_end = window_start + tx_delay
    interference = interference_power((window_start, window_end), noise)
    note(PipelineStage.INTERFERENCE_NOISE, interference, "W")

    noise_w = background_noise(tx.channel.bandwidth_hz, radio.noise_figure_db)
    note(PipelineStage.BACKGROUND_NOISE, noise_w, "W")

    snr = snr_db(rx_power, noise_w, interference)
    note(PipelineStage.SNR, snr, "dB")

    eb_n0 = eb_n0_from_snr(rx_power / (noise_w + interference), tx.channel.bandwidth_hz, tx.channel.data_rate_bps)
    ber = ber_bpsk(eb_n0)
    note(PipelineStage.BER, ber)

    bit_errors = allocate_errors(ber, tx.size_bits, rng)
    note(PipelineStage.ERROR_ALLOCATION, bit_errors, "bits")

    accepted = error_correction(bit_errors, radio.error_threshold_bits)
    note(PipelineStage.ERROR_CORRECTION, accepted)

    return ReceptionRecord(
        packet_id=tx.packet_id,
        source_node_id=tx.source_node_id,
        rx_node_id=radio.node_id,
        match=match,
        size_bits=tx.size_bits,
        start_time=tx.start_time,
        distance_m=d,
        g_t=g_t,
        g_r=g_r,
        rx_power_w=rx_power,
        background_noise_w=noise_w,
        interference_w=interference,
        snr_db=snr,
        ber=ber,
        bit_errors=bit_errors,
        accepted=accepted,
        end_time=window_end,
    )
