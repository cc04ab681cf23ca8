"""Quaternion and rigid-transform helpers shared across modules.

Quaternions are stored (w, x, y, z), unit norm.  Rotation matrices act on
column vectors.
"""

from __future__ import annotations

import numpy as np


def quat_normalize(q):
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero quaternion")
    return q / n


def quat_to_matrix(q):
    w, x, y, z = quat_normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(R):
    R = np.asarray(R, dtype=np.float64)
    tr = np.trace(R)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    else:
        i = int(np.argmax(np.diag(R)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(1.0 + R[i, i] - R[j, j] - R[k, k], 0.0)) * 2
        q = np.empty(4)
        q[0] = (R[k, j] - R[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (R[j, i] + R[i, j]) / s
        q[1 + k] = (R[k, i] + R[i, k]) / s
    return quat_normalize(q)


def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_angle(a, b):
    """Axis-angle rotation angle between two orientations, in [0, pi].

    Insensitive to quaternion sign (double cover).
    """
    d = abs(float(np.dot(quat_normalize(a), quat_normalize(b))))
    return 2.0 * np.arccos(min(d, 1.0))


def rotation_vector(R):
    """Axis-angle vector (axis * angle) of a rotation matrix."""
    q = matrix_to_quat(R)
    w = np.clip(q[0], -1.0, 1.0)
    angle = 2.0 * np.arccos(abs(w))
    v = q[1:] if w >= 0 else -q[1:]
    s = np.linalg.norm(v)
    if s < 1e-12:
        return np.zeros(3)
    return v / s * angle


def axis_angle_quat(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def look_rotation(forward, up_hint=(0.0, 0.0, 1.0)):
    """Rotation whose -Z axis points along `forward`, +Y as close to `up_hint`.

    Falls back to +X as up hint when `up_hint` is parallel to the view axis.
    Returns a 3x3 matrix with columns (right, up, backward).
    """
    f = np.asarray(forward, dtype=np.float64)
    f = f / np.linalg.norm(f)
    z = -f  # camera backward axis
    u = np.asarray(up_hint, dtype=np.float64)
    u = u - np.dot(u, z) * z
    if np.linalg.norm(u) < 1e-8:
        u = np.array([1.0, 0.0, 0.0])
        u = u - np.dot(u, z) * z
    y = u / np.linalg.norm(u)
    x = np.cross(y, z)
    return np.column_stack([x, y, z])


def rigid_matrix(position, quaternion):
    """4x4 homogeneous transform from position + quaternion."""
    T = np.eye(4)
    T[:3, :3] = quat_to_matrix(quaternion)
    T[:3, 3] = np.asarray(position, dtype=np.float64)
    return T
