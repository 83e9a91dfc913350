"""Analytic primitives for the parametric scene world.

Each primitive lives in its own local frame (cylinder/torus axis = local z,
torus arc centered on local +x) and offers three queries, all used by the
renderer and the trial classifier:

    intersect(origins, dirs) -> t   vectorized ray hits (inf = miss)
    sdf(points)              -> d   signed distance to the surface
    closest_point(p)         -> q   nearest point on the surface
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..geometry import Pose6DOF

_EPS = 1e-9


@dataclass(frozen=True)
class Primitive:
    local_pose: Pose6DOF = field(default_factory=lambda: Pose6DOF.identity("object"))

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def bounding_radius(self) -> float:
        raise NotImplementedError

    def intersect(self, origins: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sdf(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def closest_point(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Box(Primitive):
    half_extents: tuple[float, float, float] = (0.01, 0.01, 0.01)

    def __post_init__(self):
        if min(self.half_extents) <= 0:
            raise InvalidInputError("box half extents must be positive")

    @property
    def kind(self) -> str:
        return "box"

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.half_extents))

    def intersect(self, origins, dirs):
        he = np.asarray(self.half_extents)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dirs
            t1 = (-he - origins) * inv
            t2 = (he - origins) * inv
        tmin = np.nanmax(np.minimum(t1, t2), axis=1)
        tmax = np.nanmin(np.maximum(t1, t2), axis=1)
        t = np.where(tmin > _EPS, tmin, tmax)
        hit = (tmax >= np.maximum(tmin, 0.0)) & (t > _EPS)
        return np.where(hit, t, np.inf)

    def sdf(self, points):
        q = np.abs(np.atleast_2d(points)) - np.asarray(self.half_extents)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(np.max(q, axis=1), 0.0)
        return outside + inside

    def closest_point(self, p):
        he = np.asarray(self.half_extents)
        q = np.clip(p, -he, he)
        if np.any(np.abs(p) > he):
            return q
        # inside: push to the nearest face
        gaps = he - np.abs(q)
        i = int(np.argmin(gaps))
        q = q.copy()
        q[i] = he[i] if q[i] >= 0 else -he[i]
        return q

    def params(self):
        return {"half_extents": list(self.half_extents)}


@dataclass(frozen=True)
class Sphere(Primitive):
    radius: float = 0.01

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidInputError("sphere radius must be positive")

    @property
    def kind(self) -> str:
        return "sphere"

    def bounding_radius(self) -> float:
        return self.radius

    def intersect(self, origins, dirs):
        b = np.einsum("ij,ij->i", origins, dirs)
        c = np.einsum("ij,ij->i", origins, origins) - self.radius ** 2
        disc = b * b - c
        sq = np.sqrt(np.maximum(disc, 0.0))
        t0, t1 = -b - sq, -b + sq
        t = np.where(t0 > _EPS, t0, t1)
        hit = (disc >= 0) & (t > _EPS)
        return np.where(hit, t, np.inf)

    def sdf(self, points):
        return np.linalg.norm(np.atleast_2d(points), axis=1) - self.radius

    def closest_point(self, p):
        n = np.linalg.norm(p)
        if n < _EPS:
            return np.array([0.0, 0.0, self.radius])
        return p * (self.radius / n)

    def params(self):
        return {"radius": self.radius}


@dataclass(frozen=True)
class Cylinder(Primitive):
    radius: float = 0.01
    half_height: float = 0.01

    def __post_init__(self):
        if self.radius <= 0 or self.half_height <= 0:
            raise InvalidInputError("cylinder dimensions must be positive")

    @property
    def kind(self) -> str:
        return "cylinder"

    def bounding_radius(self) -> float:
        return float(np.hypot(self.radius, self.half_height))

    def intersect(self, origins, dirs):
        ox, oy, oz = origins[:, 0], origins[:, 1], origins[:, 2]
        dx, dy, dz = dirs[:, 0], dirs[:, 1], dirs[:, 2]
        best = np.full(len(origins), np.inf)
        # lateral surface
        a = dx * dx + dy * dy
        b = ox * dx + oy * dy
        c = ox * ox + oy * oy - self.radius ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = b * b - a * c
            sq = np.sqrt(np.maximum(disc, 0.0))
            for t in ((-b - sq) / a, (-b + sq) / a):
                z = oz + t * dz
                ok = (a > _EPS) & (disc >= 0) & (t > _EPS) & (np.abs(z) <= self.half_height)
                best = np.where(ok & (t < best), t, best)
            # caps
            for zcap in (-self.half_height, self.half_height):
                t = (zcap - oz) / dz
                px, py = ox + t * dx, oy + t * dy
                ok = (np.abs(dz) > _EPS) & (t > _EPS) & (px * px + py * py <= self.radius ** 2)
                best = np.where(ok & (t < best), t, best)
        return best

    def sdf(self, points):
        pts = np.atleast_2d(points)
        rho = np.hypot(pts[:, 0], pts[:, 1])
        d = np.stack([rho - self.radius, np.abs(pts[:, 2]) - self.half_height], axis=1)
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=1)
        inside = np.minimum(np.max(d, axis=1), 0.0)
        return outside + inside

    def closest_point(self, p):
        rho = float(np.hypot(p[0], p[1]))
        radial = np.array([p[0], p[1], 0.0]) / rho if rho > _EPS else np.array([1.0, 0.0, 0.0])
        z = float(p[2])
        if rho >= self.radius and abs(z) <= self.half_height:
            return radial * self.radius + np.array([0, 0, z])
        if rho <= self.radius and abs(z) >= self.half_height:
            return np.array([p[0], p[1], np.sign(z) * self.half_height])
        if rho > self.radius:  # outside both: rim edge
            return radial * self.radius + np.array([0, 0, np.sign(z) * self.half_height])
        # inside: nearest of side wall and caps
        if self.radius - rho < self.half_height - abs(z):
            return radial * self.radius + np.array([0, 0, z])
        zs = self.half_height if z >= 0 else -self.half_height
        return np.array([p[0], p[1], zs])

    def params(self):
        return {"radius": self.radius, "half_height": self.half_height}


@dataclass(frozen=True)
class TorusArc(Primitive):
    """Tube of radius ``minor`` around an arc of the circle of radius
    ``major`` in the local x-y plane, centered on +x, spanning arc_deg."""

    major: float = 0.03
    minor: float = 0.008
    arc_deg: float = 360.0

    def __post_init__(self):
        if self.major <= 0 or self.minor <= 0 or not (0 < self.arc_deg <= 360):
            raise InvalidInputError("bad torus arc parameters")

    @property
    def kind(self) -> str:
        return "torus_arc"

    def bounding_radius(self) -> float:
        return self.major + self.minor

    def _arc_center(self, pts: np.ndarray) -> np.ndarray:
        """Nearest point on the arc's center curve for each query point."""
        half = np.deg2rad(self.arc_deg) / 2.0
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        ang = np.clip(ang, -half, half)
        return np.stack([self.major * np.cos(ang), self.major * np.sin(ang),
                         np.zeros(len(pts))], axis=1)

    def sdf(self, points):
        pts = np.atleast_2d(points)
        return np.linalg.norm(pts - self._arc_center(pts), axis=1) - self.minor

    def closest_point(self, p):
        c = self._arc_center(np.atleast_2d(p))[0]
        v = p - c
        n = np.linalg.norm(v)
        if n < _EPS:
            return c + np.array([0.0, 0.0, self.minor])
        return c + v * (self.minor / n)

    def intersect(self, origins, dirs, max_steps: int = 128, tol: float = 1e-6):
        # sphere-traced against the exact arc SDF
        rb = self.bounding_radius() + 1e-4
        b = np.einsum("ij,ij->i", origins, dirs)
        c = np.einsum("ij,ij->i", origins, origins) - rb * rb
        disc = b * b - c
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_enter = np.maximum(-b - sq, _EPS)
        t_exit = -b + sq
        active = disc > 0
        t = t_enter.copy()
        hit = np.zeros(len(origins), dtype=bool)
        for _ in range(max_steps):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            p = origins[idx] + t[idx, None] * dirs[idx]
            d = self.sdf(p)
            converged = d < tol
            hit[idx[converged]] = True
            active[idx[converged]] = False
            t[idx] += np.maximum(d, 0.0)
            escaped = t[idx] > t_exit[idx]
            active[idx[escaped & ~converged]] = False
        return np.where(hit, t, np.inf)

    def params(self):
        return {"major": self.major, "minor": self.minor, "arc_deg": self.arc_deg}


_KINDS = {"box": Box, "sphere": Sphere, "cylinder": Cylinder, "torus_arc": TorusArc}


def primitive_to_dict(prim: Primitive) -> dict:
    return {"kind": prim.kind,
            "pose": {"q": prim.local_pose.quaternion.tolist(),
                     "t": prim.local_pose.translation.tolist()},
            **prim.params()}


def primitive_from_dict(doc: dict) -> Primitive:
    doc = dict(doc)
    kind = doc.pop("kind")
    pose_doc = doc.pop("pose")
    pose = Pose6DOF(np.array(pose_doc["q"]), np.array(pose_doc["t"]), "object")
    cls = _KINDS[kind]
    if kind == "box":
        return Box(pose, tuple(doc["half_extents"]))
    return cls(pose, **doc)
