"""Depth-buffer visibility with a ray-cast oracle.

A view pose renders the mesh into a software depth buffer; surface points
are visible when their view-axis depth does not exceed the sampled buffer
value plus a small bias.  The exact segment/triangle ray-cast route exists
for verification and is used by the tests as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .transforms import quat_normalize, quat_to_matrix

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


DEFAULT_DEPTH_BIAS = 1.0  # mm


@dataclass(frozen=True)
class ViewPose:
    """Position + orientation of the measurement device.

    The camera looks along its local -Z axis with +Y up.
    """

    position: np.ndarray
    quaternion: np.ndarray  # (w, x, y, z), unit

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=np.float64).reshape(3))
        object.__setattr__(self, "quaternion", quat_normalize(self.quaternion))

    @property
    def rotation(self):
        return quat_to_matrix(self.quaternion)

    @property
    def view_direction(self):
        return -self.rotation[:, 2]

    def to_dict(self):
        return {"p": self.position.tolist(), "q": self.quaternion.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(position=d["p"], quaternion=d["q"])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera model of the measurement volume."""

    fov_h: float = math.radians(60.0)
    fov_v: float = math.radians(60.0)
    width: int = 256
    height: int = 256
    near: float = 10.0
    far: float = 5000.0

    def __post_init__(self):
        if not (0.0 < self.near < self.far):
            raise ValueError("need 0 < near < far")
        if not (0.0 < self.fov_h < math.pi and 0.0 < self.fov_v < math.pi):
            raise ValueError("fov must be in (0, pi)")
        if self.width < 16 or self.height < 16:
            raise ValueError("raster must be at least 16x16")

    @property
    def tan_half_h(self):
        return math.tan(0.5 * self.fov_h)

    @property
    def tan_half_v(self):
        return math.tan(0.5 * self.fov_v)

    def to_dict(self):
        return {"fov_h": self.fov_h, "fov_v": self.fov_v,
                "width": self.width, "height": self.height,
                "near": self.near, "far": self.far}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class DepthMap:
    """Raster of view-axis depths in mm, far where no geometry was hit."""

    data: np.ndarray  # (height, width)
    near: float
    far: float

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[0]

    def write_pgm(self, path):
        """Dump as 16-bit binary PGM, [near, far] mapped to [0, 65535]."""
        scaled = (self.data - self.near) / (self.far - self.near)
        pix = np.clip(scaled * 65535.0, 0, 65535).astype(">u2")
        with open(path, "wb") as fh:
            fh.write(f"P5\n{self.width} {self.height}\n65535\n".encode())
            fh.write(pix.tobytes())


def _world_to_camera(points, pose):
    """Camera-space coordinates; view-axis depth is -z_cam."""
    R = pose.rotation
    return (np.asarray(points, dtype=np.float64) - pose.position) @ R


def _clip_near(tris_cam, near):
    """Clip camera-space triangles against the z_view = near plane.

    tris_cam: (t, 3, 3).  Returns a (t', 3, 3) array where every vertex has
    view depth >= near.  Triangles crossing the plane are re-triangulated.
    """
    depth = -tris_cam[:, :, 2]
    inside = depth >= near
    n_in = inside.sum(axis=1)
    keep = tris_cam[n_in == 3]
    out = [keep]
    for tri, ins in zip(tris_cam[(n_in > 0) & (n_in < 3)], inside[(n_in > 0) & (n_in < 3)]):
        poly = []
        for i in range(3):
            j = (i + 1) % 3
            a, b = tri[i], tri[j]
            da, db = -a[2], -b[2]
            if ins[i]:
                poly.append(a)
            if ins[i] != ins[j]:
                t = (near - da) / (db - da)
                poly.append(a + t * (b - a))
        for k in range(1, len(poly) - 1):
            out.append(np.array([[poly[0], poly[k], poly[k + 1]]]))
    if len(out) == 1:
        return keep
    return np.concatenate(out, axis=0)


@njit(cache=True)
def _rasterize(uv, invz, buf, near, far):  # pragma: no cover - jit kernel
    height, width = buf.shape
    for t in range(uv.shape[0]):
        x0, y0 = uv[t, 0, 0], uv[t, 0, 1]
        x1, y1 = uv[t, 1, 0], uv[t, 1, 1]
        x2, y2 = uv[t, 2, 0], uv[t, 2, 1]
        area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(area) < 1e-12:
            continue
        xmin = int(max(math.floor(min(x0, x1, x2)), 0))
        xmax = int(min(math.ceil(max(x0, x1, x2)), width - 1))
        ymin = int(max(math.floor(min(y0, y1, y2)), 0))
        ymax = int(min(math.ceil(max(y0, y1, y2)), height - 1))
        if xmin > xmax or ymin > ymax:
            continue
        inv_area = 1.0 / area
        for py in range(ymin, ymax + 1):
            cy = py + 0.5
            for px in range(xmin, xmax + 1):
                cx = px + 0.5
                w0 = ((x1 - cx) * (y2 - cy) - (x2 - cx) * (y1 - cy)) * inv_area
                w1 = ((x2 - cx) * (y0 - cy) - (x0 - cx) * (y2 - cy)) * inv_area
                w2 = 1.0 - w0 - w1
                if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                    continue
                iz = w0 * invz[t, 0] + w1 * invz[t, 1] + w2 * invz[t, 2]
                if iz <= 0.0:
                    continue
                z = 1.0 / iz
                if z < near:
                    z = near
                if z > far:
                    continue
                if z < buf[py, px]:
                    buf[py, px] = z


def render_depth(mesh, pose, cam):
    """Rasterize the mesh into a depth map from `pose`.

    Deterministic: identical inputs give bit-identical maps.  Back-face
    culling is off so visibility does not depend on face winding.
    """
    buf = np.full((cam.height, cam.width), cam.far, dtype=np.float64)
    tris_cam = _world_to_camera(mesh.vertices, pose)[mesh.triangles]
    tris_cam = _clip_near(tris_cam, cam.near)
    if len(tris_cam):
        depth = -tris_cam[:, :, 2]
        # pixel coordinates of the three projected vertices
        u = (tris_cam[:, :, 0] / (depth * cam.tan_half_h) + 1.0) * 0.5 * cam.width
        v = (1.0 - tris_cam[:, :, 1] / (depth * cam.tan_half_v)) * 0.5 * cam.height
        uv = np.stack([u, v], axis=-1)
        _rasterize(np.ascontiguousarray(uv), np.ascontiguousarray(1.0 / depth),
                   buf, cam.near, cam.far)
    return DepthMap(data=buf, near=cam.near, far=cam.far)


def project_points(points, pose, cam):
    """Project world points into the raster.

    Returns (u, v, depth, in_frustum); the frustum test is strict, so points
    exactly on the boundary count as outside.
    """
    p_cam = _world_to_camera(points, pose)
    depth = -p_cam[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        x = p_cam[:, 0] / (depth * cam.tan_half_h)
        y = p_cam[:, 1] / (depth * cam.tan_half_v)
    inside = ((depth > cam.near) & (depth < cam.far)
              & (np.abs(x) < 1.0) & (np.abs(y) < 1.0))
    u = (x + 1.0) * 0.5 * cam.width
    v = (1.0 - y) * 0.5 * cam.height
    return u, v, depth, inside


def sample_depth(depth_map, u, v):
    """Nearest-pixel depth lookup; out-of-raster coordinates are clamped."""
    iu = np.clip(np.floor(u).astype(np.int64), 0, depth_map.width - 1)
    iv = np.clip(np.floor(v).astype(np.int64), 0, depth_map.height - 1)
    return depth_map.data[iv, iu]


def visible_points(points, pose, cam, depth_map, bias=DEFAULT_DEPTH_BIAS):
    """Depth-buffer visibility mask over a SurfacePointSet.

    A point is visible iff it projects strictly inside the frustum and its
    view-axis depth is within `bias` of the stored depth.
    """
    u, v, depth, inside = project_points(points.positions, pose, cam)
    stored = sample_depth(depth_map, u, v)
    return inside & (depth <= stored + bias)


def depth_margin(points, pose, cam, depth_map, bias=DEFAULT_DEPTH_BIAS):
    """Distance of each point's depth from the visibility threshold.

    Small margins flag silhouette pixels where the raster and the exact
    oracle legitimately disagree.  A point whose 3x3 pixel neighborhood
    spans a depth discontinuity that brackets its own depth is a silhouette
    point and gets margin 0.  Points outside the frustum get +inf.
    """
    from scipy.ndimage import maximum_filter, minimum_filter

    u, v, depth, inside = project_points(points.positions, pose, cam)
    stored = sample_depth(depth_map, u, v)
    margin = np.abs(stored + bias - depth)
    lo = sample_depth(DepthMap(minimum_filter(depth_map.data, size=3),
                               depth_map.near, depth_map.far), u, v)
    hi = sample_depth(DepthMap(maximum_filter(depth_map.data, size=3),
                               depth_map.near, depth_map.far), u, v)
    silhouette = ((hi - lo > 2.0 * bias)
                  & (depth >= lo - 2.0 * bias)
                  & (depth <= hi + 2.0 * bias))
    margin[silhouette] = 0.0
    margin[~inside] = np.inf
    return margin


def _moller_trumbore(origin, direction, v0, e1, e2, t_min, t_max):
    """Any segment/triangle hit with ray parameter in (t_min, t_max)."""
    eps = 1e-12
    pvec = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > eps
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = origin - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
    ok &= (u >= 0.0) & (u <= 1.0)
    qvec = np.cross(tvec, e1)
    v = qvec @ direction
    v = v * inv_det
    ok &= (v >= 0.0) & (u + v <= 1.0)
    t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    ok &= (t > t_min) & (t < t_max)
    return bool(np.any(ok))


def raycast_visible(points, pose, mesh, cam, end_offset=1e-3):
    """Exact visibility oracle: segment camera->point must hit no triangle.

    `end_offset` shortens the segment at both ends (fraction of its length)
    so triangles incident to the point itself do not occlude it.
    """
    _, _, _, inside = project_points(points.positions, pose, cam)
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    e1 = mesh.vertices[mesh.triangles[:, 1]] - v0
    e2 = mesh.vertices[mesh.triangles[:, 2]] - v0
    origin = pose.position
    mask = np.zeros(len(points), dtype=bool)
    for i in np.nonzero(inside)[0]:
        direction = points.positions[i] - origin
        hit = _moller_trumbore(origin, direction, v0, e1, e2,
                               end_offset, 1.0 - end_offset)
        mask[i] = not hit
    return mask
