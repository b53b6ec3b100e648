"""Synthetic shelf world: slab obstacles, collision checks, task sampling.

The default scene is an open-front cabinet: a base board, a back wall, two
side panels, and a low lip across the middle of the base board.  Levels
give the resting surface heights the task sampler draws from; the box
rests hovering a small clearance above a level so contact never counts as
collision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .data import Pose, Trajectory, resample
from .metrics import FailureReason, boundary_error
from .reparam import TaskSpec

REST_CLEARANCE = 0.003
HANDLE_SIDE_SIGNS = (-1.0, 1.0)


@dataclass(frozen=True)
class Slab:
    """An axis-aligned box obstacle given by two opposite corners."""

    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=float).reshape(3)
        hi = np.asarray(self.max_corner, dtype=float).reshape(3)
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("slab corners must be finite")
        if np.any(hi <= lo):
            raise ValueError("slab max corner must exceed min corner on every axis")

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min_corner + self.max_corner)

    @property
    def half_extents(self) -> np.ndarray:
        return 0.5 * (self.max_corner - self.min_corner)


@dataclass(frozen=True)
class Scene:
    """Obstacles plus the sampling ranges used by the task generator."""

    slabs: tuple
    box_dims: np.ndarray
    levels: tuple
    length_range: tuple

    def __post_init__(self):
        object.__setattr__(self, "slabs", tuple(self.slabs))
        dims = np.asarray(self.box_dims, dtype=float).reshape(3)
        dims.flags.writeable = False
        object.__setattr__(self, "box_dims", dims)
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "length_range",
                           tuple(float(v) for v in self.length_range))
        if np.any(dims <= 0.0):
            raise ValueError("box dimensions must be positive")
        if not self.levels:
            raise ValueError("scene needs at least one level height")
        if len(self.length_range) != 2 or self.length_range[0] >= self.length_range[1]:
            raise ValueError("length_range must be an increasing (min, max) pair")


@dataclass(frozen=True)
class SuccessThresholds:
    max_boundary_pos_mm: float = 10.0
    max_boundary_rot_deg: float = 5.0
    collision_samples: int = 200

    def __post_init__(self):
        if self.max_boundary_pos_mm <= 0.0 or self.max_boundary_rot_deg <= 0.0:
            raise ValueError("boundary thresholds must be positive")
        if self.collision_samples < 2:
            raise ValueError("collision_samples must be at least 2")


def box_collides(pose: Pose, box_dims, slab: Slab) -> bool:
    """Oriented box vs axis-aligned slab via the separating-axis test.

    Checks the 3 slab face normals, the 3 box axes, and their 9 cross
    products; touching contact counts as collision.
    """
    half_box = 0.5 * np.asarray(box_dims, dtype=float).reshape(3)
    # copy: scipy rejects the read-only view Pose hands out
    rot = Rotation.from_rotvec(np.array(pose.orientation)).as_matrix()
    delta = pose.position - slab.center
    half_slab = slab.half_extents

    axes = [np.eye(3)[i] for i in range(3)]
    axes += [rot[:, j] for j in range(3)]
    for i in range(3):
        for j in range(3):
            axes.append(np.cross(np.eye(3)[i], rot[:, j]))
    for axis in axes:
        norm = np.linalg.norm(axis)
        if norm < 1e-9:
            continue  # near-parallel edge pair, projection covered by face axes
        axis = axis / norm
        r_slab = float(np.abs(axis) @ half_slab)
        r_box = float(np.abs(axis @ rot) @ half_box)
        if abs(float(axis @ delta)) > r_slab + r_box:
            return False
    return True


def scene_collides(pose: Pose, scene: Scene) -> bool:
    return any(box_collides(pose, scene.box_dims, slab) for slab in scene.slabs)


def trajectory_success(traj: Trajectory, scene: Scene, task: TaskSpec,
                       thresholds: SuccessThresholds = SuccessThresholds()):
    """(flag, reason): collision-free at sampled poses and boundary within bounds."""
    if traj.dim != 6:
        return False, FailureReason.INVALID
    sampled = resample(traj, thresholds.collision_samples)
    for i in range(sampled.n_samples):
        if scene_collides(sampled.pose(i), scene):
            return False, FailureReason.COLLISION
    (start_mm, start_deg), (goal_mm, goal_deg) = boundary_error(traj, task)
    if (start_mm > thresholds.max_boundary_pos_mm
            or goal_mm > thresholds.max_boundary_pos_mm
            or start_deg > thresholds.max_boundary_rot_deg
            or goal_deg > thresholds.max_boundary_rot_deg):
        return False, FailureReason.BOUNDARY
    return True, FailureReason.NONE


def rest_height(scene: Scene, level: float) -> float:
    """Box-center height when resting on a level, including hover clearance."""
    return level + 0.5 * float(scene.box_dims[2]) + REST_CLEARANCE


def _yawed_orientation(base: Pose, yaw: float) -> np.ndarray:
    turned = Rotation.from_rotvec([0.0, 0.0, yaw]) * Rotation.from_rotvec(np.array(base.orientation))
    return turned.as_rotvec()


def _sample_endpoint(scene: Scene, variation: str, rng, base: Pose,
                     max_attempts: int) -> Pose:
    for _ in range(max_attempts):
        length = float(rng.uniform(*scene.length_range))
        level = scene.levels[int(rng.integers(len(scene.levels)))]
        position = np.array([length, base.position[1], rest_height(scene, level)])
        if variation == "combined":
            yaw = float(rng.uniform(-np.pi / 4.0, np.pi / 4.0))
            orientation = _yawed_orientation(base, yaw)
        else:
            orientation = base.orientation
        pose = Pose(position, orientation)
        if not scene_collides(pose, scene):
            return pose
    raise RuntimeError(f"no collision-free rest pose found in {max_attempts} draws")


def sample_task(scene: Scene, variation: str, rng, base_start: Pose,
                base_goal: Pose, max_attempts: int = 100) -> TaskSpec:
    """Draw start and goal poses over the scene's (length, level) ranges.

    Translational tasks keep the base orientations exactly; combined tasks
    additionally yaw each endpoint independently by U(-pi/4, pi/4) about
    vertical.  Draws that would rest inside an obstacle are rejected.
    """
    if variation not in ("translational", "combined"):
        raise ValueError(f"unknown variation '{variation}'")
    start = _sample_endpoint(scene, variation, rng, base_start, max_attempts)
    goal = _sample_endpoint(scene, variation, rng, base_goal, max_attempts)
    return TaskSpec(start, goal)


def handle_poses(box_pose: Pose, box_width: float):
    """Left/right handle poses on the box's width faces, sharing its orientation."""
    if box_width <= 0.0:
        raise ValueError("box width must be positive")
    axis = Rotation.from_rotvec(np.array(box_pose.orientation)).as_matrix()[:, 0]
    return tuple(
        Pose(box_pose.position + sign * 0.5 * box_width * axis, box_pose.orientation)
        for sign in HANDLE_SIDE_SIGNS
    )


def default_scene() -> Scene:
    """Open-front cabinet: base board, back wall, side panels, roof, middle lip.

    The roof sits 12 mm above a box resting on the upper level, so sagging
    or bulging transports scrape it while clean level transfers clear it.
    """
    slabs = (
        Slab((-0.07, -0.02, -0.02), (0.87, 0.45, 0.0)),    # base board
        Slab((-0.07, -0.02, 0.0), (0.87, 0.0, 0.555)),     # back wall
        Slab((-0.07, 0.0, 0.0), (-0.05, 0.45, 0.555)),     # left side panel
        Slab((0.85, 0.0, 0.0), (0.87, 0.45, 0.555)),       # right side panel
        Slab((-0.07, -0.02, 0.535), (0.87, 0.45, 0.555)),  # roof
        Slab((0.395, 0.0, 0.0), (0.405, 0.45, 0.02)),      # lip between the bays
    )
    return Scene(slabs, (0.20, 0.15, 0.12), (0.0, 0.40), (0.10, 0.70))


def scene_to_dict(scene: Scene) -> dict:
    return {
        "slabs": [
            {"min": [float(v) for v in s.min_corner],
             "max": [float(v) for v in s.max_corner]}
            for s in scene.slabs
        ],
        "box_dims": [float(v) for v in scene.box_dims],
        "levels": [float(v) for v in scene.levels],
        "length_range": [float(v) for v in scene.length_range],
    }


def scene_from_dict(obj: dict) -> Scene:
    try:
        slabs = tuple(Slab(s["min"], s["max"]) for s in obj["slabs"])
        return Scene(slabs, obj["box_dims"], obj["levels"], obj["length_range"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"scene JSON missing field: {exc}") from exc


def save_scene(scene: Scene, path) -> None:
    Path(path).write_text(json.dumps(scene_to_dict(scene), indent=2) + "\n",
                          encoding="utf-8")


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return scene_from_dict(obj)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
