"""Hot numeric kernels: serial-chain FK and grid coordinate ascent.

Compiled with numba when available.  Set KINESPHERE_NO_NUMBA=1 to force the
pure-Python fallback; both paths run the same code objects with explicit
scalar arithmetic (no BLAS), so results are bit-identical either way.
"""
from __future__ import annotations

import math
import os

import numpy as np

_disable = os.environ.get("KINESPHERE_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _disable in {"1", "true", "yes", "on"}

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by KINESPHERE_NO_NUMBA")
    from numba import njit

    JIT_ENABLED = True
except ImportError:
    JIT_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


FIXED, REVOLUTE, PRISMATIC = 0, 1, 2


@njit(cache=True)
def _mat33_mul(a, b, out):
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += a[i, k] * b[k, j]
            out[i, j] = s


@njit(cache=True)
def _mat33_vec(a, v, out):
    for i in range(3):
        s = 0.0
        for k in range(3):
            s += a[i, k] * v[k]
        out[i] = s


@njit(cache=True)
def _axis_rotation(ax, ay, az, angle, out):
    # Rodrigues for a unit axis.
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    out[0, 0] = c + ax * ax * t
    out[0, 1] = ax * ay * t - az * s
    out[0, 2] = ax * az * t + ay * s
    out[1, 0] = ay * ax * t + az * s
    out[1, 1] = c + ay * ay * t
    out[1, 2] = ay * az * t - ax * s
    out[2, 0] = az * ax * t - ay * s
    out[2, 1] = az * ay * t + ax * s
    out[2, 2] = c + az * az * t


@njit(cache=True)
def chain_transform(pre_r, pre_t, j_r, j_t, j_axis, j_type, q, out_r, out_t):
    """Compose prefix * (origin_i * motion_i) for every joint of a chain."""
    tmp = np.empty((3, 3))
    rot = np.empty((3, 3))
    vec = np.empty(3)
    for i in range(3):
        out_t[i] = pre_t[i]
        for j in range(3):
            out_r[i, j] = pre_r[i, j]
    n = j_type.shape[0]
    for k in range(n):
        _mat33_vec(out_r, j_t[k], vec)
        for i in range(3):
            out_t[i] += vec[i]
        _mat33_mul(out_r, j_r[k], tmp)
        for i in range(3):
            for j in range(3):
                out_r[i, j] = tmp[i, j]
        if j_type[k] == REVOLUTE:
            _axis_rotation(j_axis[k, 0], j_axis[k, 1], j_axis[k, 2], q[k], rot)
            _mat33_mul(out_r, rot, tmp)
            for i in range(3):
                for j in range(3):
                    out_r[i, j] = tmp[i, j]
        elif j_type[k] == PRISMATIC:
            for i in range(3):
                vec[i] = j_axis[k, i] * q[k]
            _mat33_vec(out_r, vec, rot[0])
            for i in range(3):
                out_t[i] += rot[0, i]


@njit(cache=True)
def chain_endpoint(pre_r, pre_t, j_r, j_t, j_axis, j_type, q, out):
    r = np.empty((3, 3))
    chain_transform(pre_r, pre_t, j_r, j_t, j_axis, j_type, q, r, out)


@njit(cache=True)
def fk_tree(order_joint, order_parent, j_r, j_t, j_axis, j_type, j_qidx, q,
            out_r, out_t):
    """FK over every link; rows are links in topological order.

    order_joint[l]: joint array row feeding link l (-1 for the root).
    order_parent[l]: row of the parent link (-1 for the root).
    """
    tmp = np.empty((3, 3))
    rot = np.empty((3, 3))
    vec = np.empty(3)
    n_links = order_joint.shape[0]
    for l in range(n_links):
        k = order_joint[l]
        if k < 0:
            for i in range(3):
                out_t[l, i] = 0.0
                for j in range(3):
                    out_r[l, i, j] = 1.0 if i == j else 0.0
            continue
        p = order_parent[l]
        _mat33_vec(out_r[p], j_t[k], vec)
        for i in range(3):
            out_t[l, i] = out_t[p, i] + vec[i]
        _mat33_mul(out_r[p], j_r[k], tmp)
        qk = q[j_qidx[k]] if j_qidx[k] >= 0 else 0.0
        if j_type[k] == REVOLUTE:
            _axis_rotation(j_axis[k, 0], j_axis[k, 1], j_axis[k, 2], qk, rot)
            _mat33_mul(tmp, rot, out_r[l])
        elif j_type[k] == PRISMATIC:
            for i in range(3):
                for j in range(3):
                    out_r[l, i, j] = tmp[i, j]
            for i in range(3):
                vec[i] = j_axis[k, i] * qk
            _mat33_vec(out_r[l], vec, rot[0])
            for i in range(3):
                out_t[l, i] += rot[0, i]
        else:
            for i in range(3):
                for j in range(3):
                    out_r[l, i, j] = tmp[i, j]


@njit(cache=True)
def _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, idx, lam,
               dvec, neutral_ep, q_scratch, ep_scratch):
    """Score one grid point: projection minus lam * orthogonal error.

    Returns (score, projection, magnitude, cosine).
    """
    n = idx.shape[0]
    for k in range(n):
        q_scratch[k] = qmin[k] + idx[k] * qinc[k]
    chain_endpoint(pre_r, pre_t, j_r, j_t, j_axis, j_type, q_scratch, ep_scratch)
    dx = ep_scratch[0] - neutral_ep[0]
    dy = ep_scratch[1] - neutral_ep[1]
    dz = ep_scratch[2] - neutral_ep[2]
    proj = dx * dvec[0] + dy * dvec[1] + dz * dvec[2]
    ox = dx - proj * dvec[0]
    oy = dy - proj * dvec[1]
    oz = dz - proj * dvec[2]
    orth = math.sqrt(ox * ox + oy * oy + oz * oz)
    mag = math.sqrt(dx * dx + dy * dy + dz * dz)
    cosine = proj / mag if mag > 0.0 else 0.0
    return proj - lam * orth, proj, mag, cosine


@njit(cache=True)
def _scan_coordinate(pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, qn,
                     idx, coord, lam, dvec, neutral_ep, q_scratch, ep_scratch):
    """Best grid index for one coordinate, others held fixed.

    Coarse-to-fine: ~64 samples per level, refined around the incumbent.
    Per-coordinate slices of the objective are single-harmonic (revolute) or
    linear (prismatic), so level spacing well under the half-period cannot
    skip the peak's basin; interval endpoints are always sampled.
    """
    saved = idx[coord]
    lo = 0
    hi = qn[coord] - 1
    best_k = -1
    best_s = -np.inf
    while True:
        span = hi - lo + 1
        if span <= 65:
            for k in range(lo, hi + 1):
                idx[coord] = k
                s, _, _, _ = _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type,
                                        qmin, qinc, idx, lam, dvec, neutral_ep,
                                        q_scratch, ep_scratch)
                if s > best_s:
                    best_s = s
                    best_k = k
            break
        step = (span + 63) // 64
        k = lo
        while k <= hi:
            idx[coord] = k
            s, _, _, _ = _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type,
                                    qmin, qinc, idx, lam, dvec, neutral_ep,
                                    q_scratch, ep_scratch)
            if s > best_s:
                best_s = s
                best_k = k
            k += step
        if (hi - lo) % step != 0:
            idx[coord] = hi
            s, _, _, _ = _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type,
                                    qmin, qinc, idx, lam, dvec, neutral_ep,
                                    q_scratch, ep_scratch)
            if s > best_s:
                best_s = s
                best_k = hi
        new_lo = best_k - step
        new_hi = best_k + step
        if new_lo > lo:
            lo = new_lo
        if new_hi < hi:
            hi = new_hi
    idx[coord] = saved
    return best_k, best_s


@njit(cache=True)
def ascend(pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, qn, starts,
           lam, dvec, neutral_ep, max_sweeps):
    """Random-restart coordinate ascent over the joint grid.

    starts: (restarts, n) int64 grid indices; row 0 is the neutral start.
    Returns (best_idx, best_score, best_projection).
    """
    n = qn.shape[0]
    q_scratch = np.empty(n)
    ep_scratch = np.empty(3)
    idx = np.empty(n, dtype=np.int64)
    best_idx = np.empty(n, dtype=np.int64)
    best_score = -np.inf
    best_proj = 0.0
    for r in range(starts.shape[0]):
        for k in range(n):
            idx[k] = starts[r, k]
        score, proj, _, _ = _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type,
                                       qmin, qinc, idx, lam, dvec, neutral_ep,
                                       q_scratch, ep_scratch)
        for _sweep in range(max_sweeps):
            improved = False
            for coord in range(n):
                if j_type[coord] == FIXED or qn[coord] <= 1:
                    continue
                k_best, s_best = _scan_coordinate(
                    pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, qn,
                    idx, coord, lam, dvec, neutral_ep, q_scratch, ep_scratch)
                if s_best > score:
                    idx[coord] = k_best
                    score = s_best
                    improved = True
            if not improved:
                break
        if score > best_score:
            best_score = score
            for k in range(n):
                best_idx[k] = idx[k]
    _, best_proj, _, _ = _objective(pre_r, pre_t, j_r, j_t, j_axis, j_type,
                                    qmin, qinc, best_idx, lam, dvec, neutral_ep,
                                    q_scratch, ep_scratch)
    return best_idx, best_score, best_proj


@njit(cache=True)
def ladder_walk(pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc,
                start_idx, target_idx, lam, dvec, neutral_ep):
    """March one grid increment at a time from start to target, joint by
    joint in chain order, recording every visited grid point.

    Returns (trail (steps+1, n), projection, magnitude, cosine arrays).
    """
    n = start_idx.shape[0]
    total = 0
    for k in range(n):
        d = target_idx[k] - start_idx[k]
        total += d if d >= 0 else -d
    trail = np.empty((total + 1, n), dtype=np.int64)
    proj = np.empty(total + 1)
    mag = np.empty(total + 1)
    cosine = np.empty(total + 1)
    q_scratch = np.empty(n)
    ep_scratch = np.empty(3)
    idx = np.empty(n, dtype=np.int64)
    for k in range(n):
        idx[k] = start_idx[k]
    row = 0
    for k in range(n):
        trail[row, k] = idx[k]
    _, proj[row], mag[row], cosine[row] = _objective(
        pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, idx, lam, dvec,
        neutral_ep, q_scratch, ep_scratch)
    for coord in range(n):
        step = 1 if target_idx[coord] >= idx[coord] else -1
        while idx[coord] != target_idx[coord]:
            idx[coord] += step
            row += 1
            for k in range(n):
                trail[row, k] = idx[k]
            _, proj[row], mag[row], cosine[row] = _objective(
                pre_r, pre_t, j_r, j_t, j_axis, j_type, qmin, qinc, idx, lam,
                dvec, neutral_ep, q_scratch, ep_scratch)
    return trail, proj, mag, cosine
