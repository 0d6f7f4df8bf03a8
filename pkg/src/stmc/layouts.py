"""Body parts and pose-vector feature layouts.

A :class:`PoseLayout` names which feature indices of a pose vector belong to
which body part, which indices carry global root motion, and how feature units
convert to centimeters. Every motion buffer in this package is interpreted
through a layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "BodyPart",
    "PoseLayout",
    "SYNTHETIC_V1",
    "get_layout",
    "register_layout",
    "smpl_mdm_layout",
]


class BodyPart(str, Enum):
    """The five body parts used for spatial stitching."""

    LEFT_ARM = "left_arm"
    RIGHT_ARM = "right_arm"
    LEGS = "legs"
    SPINE = "spine"
    HEAD = "head"

    @classmethod
    def from_token(cls, token: str) -> "BodyPart":
        """Parse a body-part token; "torso" is accepted as an alias of spine."""
        t = token.strip().lower()
        if t == "torso":
            return cls.SPINE
        try:
            return cls(t)
        except ValueError:
            raise ValueError(f"unknown body part {token!r}") from None


# Canonical ordering used for serialization and deterministic iteration.
PART_ORDER: tuple[BodyPart, ...] = (
    BodyPart.LEFT_ARM,
    BodyPart.RIGHT_ARM,
    BodyPart.LEGS,
    BodyPart.SPINE,
    BodyPart.HEAD,
)


@dataclass(frozen=True)
class PoseLayout:
    """Feature-index map of a pose vector.

    ``part_ranges`` maps each body part to half-open ``[start, end)`` index
    ranges. Together with ``global_indices`` the ranges must cover every
    feature index in ``[0, dim)`` exactly once.
    """

    name: str
    dim: int
    part_ranges: dict[BodyPart, tuple[tuple[int, int], ...]]
    global_indices: tuple[int, ...] = ()
    unit_cm: float = 1.0

    def __post_init__(self) -> None:
        owner = np.zeros(self.dim, dtype=int)
        for part, ranges in self.part_ranges.items():
            for lo, hi in ranges:
                if not (0 <= lo < hi <= self.dim):
                    raise ValueError(f"{self.name}: bad range [{lo}, {hi}) for {part.value}")
                owner[lo:hi] += 1
        for idx in self.global_indices:
            if not 0 <= idx < self.dim:
                raise ValueError(f"{self.name}: global index {idx} out of range")
            owner[idx] += 1
        if not np.all(owner == 1):
            bad = np.flatnonzero(owner != 1)
            raise ValueError(f"{self.name}: features {bad.tolist()} not covered exactly once")

    def part_indices(self, part: BodyPart) -> np.ndarray:
        """Sorted feature indices belonging to ``part`` (globals excluded)."""
        idx: list[int] = []
        for lo, hi in self.part_ranges.get(part, ()):
            idx.extend(range(lo, hi))
        return np.asarray(sorted(idx), dtype=int)

    def local_indices(self) -> np.ndarray:
        """All feature indices except the global root-motion ones."""
        mask = np.ones(self.dim, dtype=bool)
        mask[list(self.global_indices)] = False
        return np.flatnonzero(mask)

    def stitch_indices(self, part: BodyPart) -> np.ndarray:
        """Feature indices the stitcher writes for ``part``.

        Global root features follow the legs assignment: locomotion dominates
        root motion, and a root feature must be owned by exactly one part.
        """
        idx = self.part_indices(part)
        if part is BodyPart.LEGS and self.global_indices:
            idx = np.concatenate([idx, np.asarray(self.global_indices, dtype=int)])
            idx.sort()
        return idx


SYNTHETIC_V1 = PoseLayout(
    name="synthetic-v1",
    dim=10,
    part_ranges={
        BodyPart.LEGS: ((0, 3),),
        BodyPart.SPINE: ((3, 5),),
        BodyPart.LEFT_ARM: ((5, 7),),
        BodyPart.RIGHT_ARM: ((7, 9),),
        BodyPart.HEAD: ((9, 10),),
    },
    global_indices=(),
    unit_cm=1.0,
)


# SMPL joint index -> body part, for the 22-joint body used by pose vectors of
# the form [r_z, rdot_x, rdot_y, alphadot, theta (6d per joint), j (3d per joint)].
_SMPL_JOINT_PARTS: dict[int, BodyPart] = {
    0: BodyPart.SPINE,  # pelvis orientation (z-rotation removed)
    1: BodyPart.LEGS, 2: BodyPart.LEGS, 4: BodyPart.LEGS, 5: BodyPart.LEGS,
    7: BodyPart.LEGS, 8: BodyPart.LEGS, 10: BodyPart.LEGS, 11: BodyPart.LEGS,
    3: BodyPart.SPINE, 6: BodyPart.SPINE, 9: BodyPart.SPINE,
    12: BodyPart.HEAD, 15: BodyPart.HEAD,
    13: BodyPart.LEFT_ARM, 16: BodyPart.LEFT_ARM, 18: BodyPart.LEFT_ARM, 20: BodyPart.LEFT_ARM,
    14: BodyPart.RIGHT_ARM, 17: BodyPart.RIGHT_ARM, 19: BodyPart.RIGHT_ARM, 21: BodyPart.RIGHT_ARM,
}


def smpl_mdm_layout(n_joints: int = 22, unit_cm: float = 100.0) -> PoseLayout:
    """SMPL-based layout: pelvis height, root velocities, angular velocity,
    6d joint rotations, then local joint positions.

    The exact feature dimensions depend on the joint count of the hosted
    model, so the ranges are computed here rather than hard-coded. Root
    features (indices 0..3) are global; the pelvis position follows legs.
    """
    ranges: dict[BodyPart, list[tuple[int, int]]] = {p: [] for p in PART_ORDER}
    off = 4
    for j in range(n_joints):
        ranges[_SMPL_JOINT_PARTS.get(j, BodyPart.SPINE)].append((off + 6 * j, off + 6 * j + 6))
    off += 6 * n_joints
    for j in range(n_joints):
        part = _SMPL_JOINT_PARTS.get(j, BodyPart.SPINE) if j != 0 else BodyPart.LEGS
        ranges[part].append((off + 3 * j, off + 3 * j + 3))
    dim = off + 3 * n_joints
    merged = {p: tuple(sorted(r)) for p, r in ranges.items() if r}
    return PoseLayout(
        name="smpl-mdm", dim=dim, part_ranges=merged,
        global_indices=(0, 1, 2, 3), unit_cm=unit_cm,
    )


_REGISTRY: dict[str, PoseLayout] = {SYNTHETIC_V1.name: SYNTHETIC_V1}


def register_layout(layout: PoseLayout) -> None:
    _REGISTRY[layout.name] = layout


def get_layout(name: str) -> PoseLayout:
    if name == "smpl-mdm" and name not in _REGISTRY:
        register_layout(smpl_mdm_layout())
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown pose layout {name!r}") from None
