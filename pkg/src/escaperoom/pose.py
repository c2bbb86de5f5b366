"""Agent pose and embodiment constants."""

from __future__ import annotations

from dataclasses import dataclass

AGENT_RADIUS = 0.3  # collision disc, meters
EYE_HEIGHT = 1.5
GRAB_RANGE = 2.5  # eye to hit point, meters


@dataclass(frozen=True)
class AgentPose:
    """Position on the floor plane plus view angles.

    yaw is degrees in [0, 360), clockwise from north (+z); pitch is degrees in
    [-90, 90], positive looking downward.
    """

    x: float
    z: float
    yaw: float
    pitch: float

    def normalized(self) -> "AgentPose":
        pitch = max(-90.0, min(90.0, self.pitch))
        return AgentPose(self.x, self.z, self.yaw % 360.0, pitch)
