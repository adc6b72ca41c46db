"""
Room and microphone-array geometry

Direction of arrival convention: the array axis points from the last
microphone towards microphone 1. 0 deg is the endfire beyond microphone 1,
180 deg the opposite endfire, 90 deg broadside.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import GeometryError

SPEED_OF_SOUND = 343.0


@dataclass(frozen=True)
class RoomSpec:
    """Shoebox room: dimensions (x, y, z) in meters, rt60 in seconds"""

    dimensions: Tuple[float, float, float]
    rt60: float
    speed_of_sound: float = SPEED_OF_SOUND

    @property
    def volume(self) -> float:
        x, y, z = self.dimensions
        return x * y * z

    @property
    def surface(self) -> float:
        x, y, z = self.dimensions
        return 2.0 * (x * y + y * z + x * z)

    def contains(self, point: Sequence[float], margin: float = 0.0) -> bool:
        """True if the point lies strictly inside the room shrunk by `margin`"""
        p = np.asarray(point, dtype=float)
        dims = np.asarray(self.dimensions, dtype=float)
        return bool(np.all(p > margin) and np.all(p < dims - margin))

    def wall_distance(self, point: Sequence[float]) -> float:
        p = np.asarray(point, dtype=float)
        dims = np.asarray(self.dimensions, dtype=float)
        return float(min(p.min(), (dims - p).min()))

    def to_dict(self):
        return {"dimensions": list(self.dimensions), "rt60": self.rt60,
                "speed_of_sound": self.speed_of_sound}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["dimensions"]), data["rt60"], data.get("speed_of_sound", SPEED_OF_SOUND))


@dataclass(frozen=True)
class ArraySpec:
    """Uniform linear array"""

    num_mics: int
    spacing: float
    center: Tuple[float, float, float]
    orientation: Tuple[float, float, float]

    def __post_init__(self):
        u = np.asarray(self.orientation, dtype=float)
        if u.shape != (3,) or abs(u[2]) > 1e-9 or not np.isclose(np.linalg.norm(u), 1.0):
            raise GeometryError(f"array orientation must be a horizontal unit vector, got {self.orientation}")

    @property
    def axis(self) -> np.ndarray:
        return np.asarray(self.orientation, dtype=float)

    @property
    def mic_positions(self) -> np.ndarray:
        """Shape (M, 3); microphone 1 sits at the +axis end"""
        offsets = ((self.num_mics - 1) / 2.0 - np.arange(self.num_mics)) * self.spacing
        return np.asarray(self.center, dtype=float) + offsets[:, None] * self.axis

    def doa_of(self, point: Sequence[float]) -> float:
        """Direction of arrival in degrees of a point as seen from the array center"""
        v = np.asarray(point, dtype=float) - np.asarray(self.center, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise GeometryError("point coincides with the array center")
        cos_theta = np.clip(v @ self.axis / norm, -1.0, 1.0)
        return float(np.degrees(np.arccos(cos_theta)))

    def distance_to(self, point: Sequence[float]) -> float:
        """Distance from the point to the closest microphone"""
        p = np.asarray(point, dtype=float)
        return float(np.min(np.linalg.norm(self.mic_positions - p, axis=1)))

    def to_dict(self):
        return {"num_mics": self.num_mics, "spacing": self.spacing,
                "center": list(self.center), "orientation": list(self.orientation)}

    @classmethod
    def from_dict(cls, data):
        return cls(data["num_mics"], data["spacing"], tuple(data["center"]), tuple(data["orientation"]))
