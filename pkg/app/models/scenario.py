"""Scenario configuration models.

A scenario file is validated into these models. Every numeric key carries
its unit in the suffix; unknown keys are rejected.
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from app.core.antenna import AntennaSystem
from app.core.geometry import Trajectory
from app.core.propagation import Channel
from app.models.records import NodeRole


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConstantInterval(_StrictModel):
    kind: Literal["constant"]
    interval_s: float = Field(gt=0.0)


class ExponentialInterval(_StrictModel):
    """Packets produced independently and asynchronously, mean spacing mean_s."""

    kind: Literal["exponential"]
    mean_s: float = Field(gt=0.0)


IntervalModel = Annotated[Union[ConstantInterval, ExponentialInterval], Field(discriminator="kind")]


class GeneratorConfig(_StrictModel):
    packet_size_bits: int = Field(gt=0)
    interval: IntervalModel
    tx_power_w: float = Field(gt=0.0)
    start_s: float = Field(default=0.0, ge=0.0)


class RadioConfig(_StrictModel):
    """Receiver-side constants."""

    noise_figure_db: float = Field(default=0.0, ge=0.0)
    system_loss_linear: float = Field(default=1.0, ge=1.0)
    error_threshold_bits: int = Field(default=0, ge=0)


class NodeConfig(_StrictModel):
    id: str = Field(min_length=1)
    role: NodeRole
    trajectory: Trajectory
    antenna: AntennaSystem
    tx_channel: Optional[str] = None
    rx_channel: Optional[str] = None
    generator: Optional[GeneratorConfig] = None
    radio: RadioConfig = Field(default_factory=RadioConfig)


class StatsConfig(_StrictModel):
    window_s: float = Field(default=30.0, gt=0.0)
    sample_period_s: float = Field(default=1.0, gt=0.0)
    trace: bool = False


class ScenarioConfig(_StrictModel):
    """A complete experiment: channels, nodes, timing and seed."""

    name: str = Field(min_length=1)
    description: Optional[str] = None
    duration_s: float = Field(gt=0.0)
    seed: int = Field(default=0, ge=0)
    channels: List[Channel] = Field(min_length=1)
    nodes: List[NodeConfig] = Field(min_length=1)
    stats: StatsConfig = Field(default_factory=StatsConfig)

    def node(self, node_id: str) -> NodeConfig:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(f"no node '{node_id}' in scenario '{self.name}'")

    def channel(self, channel_id: str) -> Channel:
        for channel in self.channels:
            if channel.id == channel_id:
                return channel
        raise KeyError(f"no channel '{channel_id}' in scenario '{self.name}'")

    def nodes_with_role(self, role: NodeRole) -> List[NodeConfig]:
        return [n for n in self.nodes if n.role == role]

    def without_jammers(self) -> "ScenarioConfig":
        """The same scenario with every jammer removed."""
        return self.model_copy(
            update={
                "name": f"{self.name}-no-jammer",
                "nodes": [n for n in self.nodes if n.role != NodeRole.JAMMER],
            }
        )

    def with_antenna(self, node_id: str, antenna: AntennaSystem, name: Optional[str] = None) -> "ScenarioConfig":
        """The same scenario with one node's antenna replaced."""
        self.node(node_id)
        nodes = [n.model_copy(update={"antenna": antenna}) if n.id == node_id else n for n in self.nodes]
        return self.model_copy(update={"name": name or self.name, "nodes": nodes})
