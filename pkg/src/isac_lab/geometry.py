"""Network/target geometry: delays, Doppler, path geometry vectors, Jacobians.

All geometry lives in the 2-D plane. Unit vectors point from a node towards
the target, so the bistatic geometry vector g = u_t + u_r satisfies
grad_x tau = g / c and the per-pulse Doppler shift is (f_c / c) * g^T v.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import DegenerateGeometry

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Below this node-to-target distance the geometry is treated as degenerate.
NODE_DISTANCE_FLOOR = 1e-9  # m


class PairingMode(str, Enum):
    MULTISTATIC = "multistatic"
    MONOSTATIC = "monostatic"


def _as_points(points) -> np.ndarray:
    arr = np.atleast_2d(np.asarray(points, dtype=float))
    if arr.shape[1] != 2:
        raise ValueError(f"expected 2-D points, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class NetworkLayout:
    """Transmitter/receiver positions plus the path pairing convention.

    Multistatic mode enumerates all M*N transmitter-receiver pairs in
    transmitter-major order; monostatic mode requires colocated arrays and
    enumerates the L self-echo pairs.
    """

    tx_positions: np.ndarray
    rx_positions: np.ndarray
    mode: PairingMode = PairingMode.MULTISTATIC
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        object.__setattr__(self, "tx_positions", _as_points(self.tx_positions))
        object.__setattr__(self, "rx_positions", _as_points(self.rx_positions))
        object.__setattr__(self, "mode", PairingMode(self.mode))
        if not self.c > 0:
            raise ValueError("propagation speed must be positive")
        if self.mode is PairingMode.MONOSTATIC:
            if self.tx_positions.shape != self.rx_positions.shape or not np.array_equal(
                self.tx_positions, self.rx_positions
            ):
                raise ValueError("monostatic mode requires tx_positions == rx_positions")

    @property
    def n_tx(self) -> int:
        return self.tx_positions.shape[0]

    @property
    def n_rx(self) -> int:
        return self.rx_positions.shape[0]

    @property
    def n_paths(self) -> int:
        if self.mode is PairingMode.MONOSTATIC:
            return self.n_tx
        return self.n_tx * self.n_rx

    def path_pairs(self) -> list[Tuple[int, int]]:
        """(tx index, rx index) per path, tx-major for multistatic."""
        if self.mode is PairingMode.MONOSTATIC:
            return [(i, i) for i in range(self.n_tx)]
        return [(k, l) for k in range(self.n_tx) for l in range(self.n_rx)]


@dataclass(frozen=True)
class TargetState:
    """Target position [m] and constant velocity [m/s]."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(2)
        vel = np.asarray(self.velocity, dtype=float).reshape(2)
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("target state must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)


@dataclass(frozen=True)
class PathGeometry:
    """Purely geometric quantities of one transmit-receive path."""

    u_t: np.ndarray           # unit vector, tx node -> target
    u_r: np.ndarray           # unit vector, rx node -> target
    g: np.ndarray             # u_t + u_r
    tau: float                # bistatic delay [s]
    range_t: float            # one-way tx range [m]
    range_r: float            # one-way rx range [m]
    monostatic: bool = False
    tx_index: int = 0
    rx_index: int = 0
    c: float = field(default=SPEED_OF_LIGHT, repr=False)


def _unit_towards(target: np.ndarray, node: np.ndarray) -> Tuple[np.ndarray, float]:
    diff = target - node
    dist = float(np.hypot(diff[0], diff[1]))
    if dist < NODE_DISTANCE_FLOOR:
        raise DegenerateGeometry(
            f"target within {NODE_DISTANCE_FLOOR} m of node at {node.tolist()}"
        )
    return diff / dist, dist


def path_geometries(layout: NetworkLayout, target: TargetState) -> list[PathGeometry]:
    """One PathGeometry per enumerated path, in the layout's path order."""
    x = target.position
    out = []
    mono = layout.mode is PairingMode.MONOSTATIC
    for k, l in layout.path_pairs():
        u_t, r_t = _unit_towards(x, layout.tx_positions[k])
        if mono:
            u_r, r_r = u_t, r_t
        else:
            u_r, r_r = _unit_towards(x, layout.rx_positions[l])
        out.append(
            PathGeometry(
                u_t=u_t,
                u_r=u_r,
                g=u_t + u_r,
                tau=(r_t + r_r) / layout.c,
                range_t=r_t,
                range_r=r_r,
                monostatic=mono,
                tx_index=k,
                rx_index=l,
                c=layout.c,
            )
        )
    return out


def radial_speed(pg: PathGeometry, v: np.ndarray) -> float:
    """Bistatic radial speed g^T v [m/s] for the path."""
    return float(pg.g @ np.asarray(v, dtype=float).reshape(2))


def doppler_shift(pg: PathGeometry, v, f_c: float, c: float = SPEED_OF_LIGHT) -> float:
    """Doppler shift (f_c / c) * g^T v [Hz] at carrier f_c."""
    return (f_c / c) * radial_speed(pg, v)


def delay_jacobian(layout: NetworkLayout, target: TargetState) -> np.ndarray:
    """L x 2 matrix of d tau / d x; row per path equals g^T / c."""
    pgs = path_geometries(layout, target)
    return np.array([pg.g / layout.c for pg in pgs])


def geometry_gradient_jacobian(pg: PathGeometry) -> np.ndarray:
    """2 x 2 Jacobian of the geometry vector, d g / d x.

    Monostatic: (2 / range) * (I - u u^T). Bistatic: the sum of the two
    one-way projectors scaled by their ranges. Symmetric PSD by construction.
    """
    if pg.range_t < NODE_DISTANCE_FLOOR or pg.range_r < NODE_DISTANCE_FLOOR:
        raise DegenerateGeometry("zero range in geometry gradient")
    eye = np.eye(2)
    if pg.monostatic:
        return (2.0 / pg.range_t) * (eye - np.outer(pg.u_t, pg.u_t))
    return (eye - np.outer(pg.u_t, pg.u_t)) / pg.range_t + (
        eye - np.outer(pg.u_r, pg.u_r)
    ) / pg.range_r
