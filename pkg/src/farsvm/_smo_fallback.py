"""Pure-NumPy pairwise-update solver for the weighted soft-margin dual.

Mirrors the compiled extension in ``_smo.pyx`` operation-for-operation (same
pair selection, same clipping and bound-snapping rules, same LRU kernel-row
cache layout) so the two engines are interchangeable.  Kept deliberately
vectorized: one O(M) selection sweep and one O(M) gradient update per pair
update.

Conventions shared by both engines:

* ``G_t = sum_j alpha_j y_j K_tj`` (bias-free margin of training point t).
* Violating-pair selection on ``v_t = y_t - G_t``: ``i`` maximizes v over the
  set that can increase its alpha-step (y=+1 below box / y=-1 above zero),
  ``j`` minimizes v over the complementary set.  Optimality gap is
  ``m - M = v_i - v_j``.
* The unconstrained step ``t = (m - M) / (K_ii + K_jj - 2 K_ij)`` is clipped
  to the smaller of the two box rooms; a clipped step snaps the limiting
  alpha exactly onto its bound.
"""

from __future__ import annotations

import numpy as np


def _fetch_row(r, X, delta, paper_form, rows, owner, slot_of, stamp, clock):
    """Return the kernel row of training point ``r``, computing on miss."""
    s = int(slot_of[r])
    if s < 0:
        s = int(np.argmin(stamp))          # least recently used (0 = empty)
        old = int(owner[s])
        if old >= 0:
            slot_of[old] = -1
        acc = np.zeros(X.shape[0], dtype=np.float64)
        xr = X[r]
        for col in range(X.shape[1]):
            diff = X[:, col] - xr[col]
            acc += diff * diff
        if paper_form:
            np.sqrt(acc, out=acc)
        acc *= -1.0 / (2.0 * delta * delta)
        np.exp(acc, out=acc)
        rows[s] = acc
        owner[s] = r
        slot_of[r] = s
    clock[0] += 1
    stamp[s] = clock[0]
    return rows[s]


def _select_pair(y, G, alpha, C, pos):
    v = y - G
    up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
    low = (~pos & (alpha < C)) | (pos & (alpha > 0.0))
    vu = np.where(up, v, -np.inf)
    vl = np.where(low, v, np.inf)
    i = int(np.argmax(vu))
    j = int(np.argmin(vl))
    return i, j, float(vu[i]), float(vl[j])


def solve(X, y, C, delta, paper_form, tol, max_updates,
          rows, owner, slot_of, stamp, clock):
    """Maximize the dual over the box [0, C] with the balance constraint.

    Returns (alpha, G, bias, n_updates, converged, gap).
    """
    M = X.shape[0]
    alpha = np.zeros(M, dtype=np.float64)
    G = np.zeros(M, dtype=np.float64)
    pos = y > 0.0
    n_updates = 0
    converged = False

    while n_updates < max_updates:
        i, j, m, Mv = _select_pair(y, G, alpha, C, pos)
        if m - Mv <= tol:
            converged = True
            break
        ri = _fetch_row(i, X, delta, paper_form, rows, owner, slot_of, stamp, clock)
        rj = _fetch_row(j, X, delta, paper_form, rows, owner, slot_of, stamp, clock)
        a = ri[i] + rj[j] - 2.0 * ri[j]
        if a <= 0.0:
            a = 1e-12                      # kernel is PD; guard fp round-off
        t = (m - Mv) / a
        room_i = (C[i] - alpha[i]) if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else (C[j] - alpha[j])
        t = min(t, room_i, room_j)
        if t == room_i:
            alpha[i] = C[i] if pos[i] else 0.0
        else:
            alpha[i] += t if pos[i] else -t
        if t == room_j:
            alpha[j] = 0.0 if pos[j] else C[j]
        else:
            alpha[j] += -t if pos[j] else t
        G += t * (ri - rj)
        n_updates += 1

    _, _, m, Mv = _select_pair(y, G, alpha, C, pos)
    gap = m - Mv
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        bias = float(np.mean(G[free] - y[free]))
    else:
        bias = -(m + Mv) / 2.0
    return alpha, G, bias, n_updates, converged, gap
