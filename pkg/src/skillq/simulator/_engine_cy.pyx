# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled replication engine.

Statement-for-statement mirror of ``_engine_py``: same Philox uniform
stream, same inverse-CDF exponential draws, same scan and tie-break
order, so both backends produce bit-identical tallies and traces for a
given (seed, replication).  Keep changes in lockstep with the Python
reference; the cross-backend equality tests enforce it.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, log1p
from libc.stdint cimport int64_t

from numpy.random cimport bitgen_t

import numpy as np

_SEED_MASK = (1 << 64) - 1


cdef inline double _exp_draw(bitgen_t *rng, double rate) noexcept nogil:
    if rate <= 0.0:
        return INFINITY
    return -log1p(-rng.next_double(rng.state)) / rate


cdef inline void _tuple7(int64_t *qlen, int64_t *own, int64_t *upc, int64_t *out) noexcept nogil:
    out[1] = upc[1]
    out[3] = upc[2]
    out[5] = upc[3]
    out[0] = qlen[0] + own[0] + out[1]
    out[2] = qlen[1] + own[1] + out[3]
    out[4] = qlen[2] + own[2] + out[5]
    out[6] = qlen[3] + own[3]


cdef inline void _push(int i, double t, double theta_i, int mode, double y,
                       double[:, ::1] qa, double[:, ::1] qd, double[:, ::1] qe,
                       unsigned char[:, ::1] qf, int64_t *qlen, bitgen_t *rng) noexcept nogil:
    cdef int64_t p = qlen[i]
    qa[i, p] = t
    qd[i, p] = t + _exp_draw(rng, theta_i)
    if mode == 1 and i < 3:
        qe[i, p] = t + y
        qf[i, p] = 1 if y == 0.0 else 0
    else:
        qe[i, p] = INFINITY
        qf[i, p] = 1
    qlen[i] += 1


cdef inline void _pop(int i, int64_t p,
                      double[:, ::1] qa, double[:, ::1] qd, double[:, ::1] qe,
                      unsigned char[:, ::1] qf, int64_t *qlen) noexcept nogil:
    cdef int64_t q
    for q in range(p, qlen[i] - 1):
        qa[i, q] = qa[i, q + 1]
        qd[i, q] = qd[i, q + 1]
        qe[i, q] = qe[i, q + 1]
        qf[i, q] = qf[i, q + 1]
    qlen[i] -= 1


cdef inline void _start_service(int j, int v, double t,
                                double *mu, double *mu_up, int64_t *koff,
                                int64_t[::1] serving, double[::1] done,
                                int64_t *own, int64_t *upc, bitgen_t *rng) noexcept nogil:
    cdef int64_t slot = koff[j]
    cdef double rate
    while serving[slot] >= 0:
        slot += 1
    serving[slot] = v
    rate = mu[j] if v == j else mu_up[v]
    done[slot] = t + _exp_draw(rng, rate)
    if v == j:
        own[j] += 1
    else:
        upc[j] += 1


cdef int _run_one(double *lam, double *mu, double *mu_up, double *theta,
                  int64_t *k, int64_t *n_up, int64_t ell, int mode, double y,
                  int64_t *init, double horizon, bitgen_t *rng,
                  int64_t[::1] serving, double[::1] done,
                  double[:, ::1] qa, double[:, ::1] qd, double[:, ::1] qe,
                  unsigned char[:, ::1] qf, int64_t *tallies,
                  int64_t[:, ::1] trace, int64_t trace_cap, int64_t *trace_len) noexcept nogil:
    cdef int64_t koff[5]
    cdef int64_t own[4]
    cdef int64_t upc[4]
    cdef int64_t qlen[4]
    cdef int64_t abandons[4]
    cdef int64_t blocked[4]
    cdef int64_t services[4]
    cdef double next_arr[4]
    cdef int64_t not_up[4]
    cdef int64_t ups[4]
    cdef int64_t own_count[4]
    cdef int64_t queued[4]
    cdef int64_t tup[7]
    cdef double t = 0.0
    cdef double best_t, arr
    cdef int kind, i, j, v, take, cand
    cdef int64_t slot, p, q, total, ei, ep, m

    koff[0] = 0
    for j in range(4):
        koff[j + 1] = koff[j] + k[j]
        own[j] = 0
        upc[j] = 0
        qlen[j] = 0
        abandons[j] = 0
        blocked[j] = 0
        services[j] = 0
    for slot in range(koff[4]):
        serving[slot] = -1
        done[slot] = INFINITY
    for i in range(4):
        next_arr[i] = _exp_draw(rng, lam[i])

    # Initial state: own-level services first, then one-level-up, per
    # agent level; then the waiting callers level by level.
    not_up[0] = init[0] - init[1]
    not_up[1] = init[2] - init[3]
    not_up[2] = init[4] - init[5]
    not_up[3] = init[6]
    ups[0] = 0
    ups[1] = init[1]
    ups[2] = init[3]
    ups[3] = init[5]
    for j in range(4):
        own_count[j] = not_up[j] if not_up[j] < k[j] - ups[j] else k[j] - ups[j]
        queued[j] = not_up[j] - own_count[j]
    for j in range(4):
        for m in range(own_count[j]):
            _start_service(j, j, t, mu, mu_up, koff, serving, done, own, upc, rng)
        for m in range(ups[j]):
            _start_service(j, j - 1, t, mu, mu_up, koff, serving, done, own, upc, rng)
    for i in range(4):
        for m in range(queued[i]):
            _push(i, t, theta[i], mode, y, qa, qd, qe, qf, qlen, rng)

    if trace_cap > 0:
        if trace_len[0] >= trace_cap:
            return 1
        _tuple7(qlen, own, upc, tup)
        for m in range(7):
            trace[trace_len[0], m] = tup[m]
        trace_len[0] += 1

    while True:
        best_t = INFINITY
        kind = -1
        ei = 0
        ep = 0
        for i in range(4):
            if next_arr[i] < best_t:
                best_t = next_arr[i]
                kind = 0
                ei = i
        for slot in range(koff[4]):
            if serving[slot] >= 0 and done[slot] < best_t:
                best_t = done[slot]
                kind = 1
                ei = slot
        for i in range(4):
            for p in range(qlen[i]):
                if qd[i, p] < best_t:
                    best_t = qd[i, p]
                    kind = 2
                    ei = i
                    ep = p
        if mode == 1 and y > 0.0:
            for i in range(3):
                for p in range(qlen[i]):
                    if qf[i, p] == 0 and qe[i, p] < best_t:
                        best_t = qe[i, p]
                        kind = 3
                        ei = i
                        ep = p
        if kind < 0 or best_t > horizon:
            break
        t = best_t

        if kind == 0:
            # arrival at level ei
            i = <int> ei
            total = 0
            for j in range(4):
                total += qlen[j] + own[j] + upc[j]
            if total >= ell:
                blocked[i] += 1
            elif mode == 0:
                _tuple7(qlen, own, upc, tup)
                if i == 0:
                    if tup[0] - tup[1] < k[0]:
                        _start_service(0, 0, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    elif tup[2] - tup[3] < k[1] - n_up[1] - tup[1]:
                        _start_service(1, 0, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    else:
                        _push(0, t, theta[0], mode, y, qa, qd, qe, qf, qlen, rng)
                elif i == 1:
                    if k[1] - tup[1] - own[1] > 0:
                        _start_service(1, 1, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    elif tup[4] - tup[5] < k[2] - n_up[2] - tup[3]:
                        _start_service(2, 1, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    else:
                        _push(1, t, theta[1], mode, y, qa, qd, qe, qf, qlen, rng)
                elif i == 2:
                    if k[2] - tup[3] - own[2] > 0:
                        _start_service(2, 2, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    elif tup[6] < k[3] - n_up[3] - tup[5]:
                        _start_service(3, 2, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    else:
                        _push(2, t, theta[2], mode, y, qa, qd, qe, qf, qlen, rng)
                else:
                    if k[3] - tup[5] - own[3] > 0:
                        _start_service(3, 3, t, mu, mu_up, koff, serving, done, own, upc, rng)
                    else:
                        _push(3, t, theta[3], mode, y, qa, qd, qe, qf, qlen, rng)
            else:
                if k[i] - upc[i] - own[i] > 0:
                    _start_service(i, i, t, mu, mu_up, koff, serving, done, own, upc, rng)
                elif i < 3 and y == 0.0 and k[i + 1] - upc[i + 1] - own[i + 1] > 0:
                    _start_service(i + 1, i, t, mu, mu_up, koff, serving, done, own, upc, rng)
                else:
                    _push(i, t, theta[i], mode, y, qa, qd, qe, qf, qlen, rng)
            next_arr[i] = t + _exp_draw(rng, lam[i])

        elif kind == 1:
            # service completion at agent slot ei
            slot = ei
            j = 0
            while slot >= koff[j + 1]:
                j += 1
            v = <int> serving[slot]
            take = -1
            if mode == 0:
                # Reservation: decide on the pre-completion configuration.
                _tuple7(qlen, own, upc, tup)
                if j == 0:
                    if qlen[0] > 0:
                        take = 0
                elif j == 1:
                    if qlen[1] > 0:
                        take = 1
                    elif qlen[0] > 0 and tup[2] - tup[3] <= k[1] - n_up[1] - tup[1]:
                        take = 0
                elif j == 2:
                    if qlen[2] > 0:
                        take = 2
                    elif qlen[1] > 0 and tup[4] - tup[5] <= k[2] - n_up[2] - tup[3]:
                        take = 1
                else:
                    if qlen[3] > 0:
                        take = 3
                    elif qlen[2] > 0 and tup[6] <= k[3] - n_up[3] - tup[5]:
                        take = 2
            else:
                cand = -1
                arr = INFINITY
                if qlen[j] > 0:
                    cand = j
                    arr = qa[j, 0]
                if j >= 1 and qlen[j - 1] > 0 and qf[j - 1, 0] != 0 and qa[j - 1, 0] < arr:
                    cand = j - 1
                take = cand
            serving[slot] = -1
            if v == j:
                own[j] -= 1
            else:
                upc[j] -= 1
            services[v] += 1
            if take >= 0:
                _pop(take, 0, qa, qd, qe, qf, qlen)
                _start_service(j, take, t, mu, mu_up, koff, serving, done, own, upc, rng)

        elif kind == 2:
            _pop(<int> ei, ep, qa, qd, qe, qf, qlen)
            abandons[ei] += 1

        else:
            i = <int> ei
            qf[i, ep] = 1
            if k[i + 1] - upc[i + 1] - own[i + 1] > 0:
                _pop(i, ep, qa, qd, qe, qf, qlen)
                _start_service(i + 1, i, t, mu, mu_up, koff, serving, done, own, upc, rng)

        if trace_cap > 0:
            if trace_len[0] >= trace_cap:
                return 1
            _tuple7(qlen, own, upc, tup)
            for m in range(7):
                trace[trace_len[0], m] = tup[m]
            trace_len[0] += 1

    for i in range(4):
        tallies[i] = abandons[i]
        tallies[4 + i] = blocked[i]
        tallies[8 + i] = services[i]
    return 0


cdef class _Workspace:
    cdef int64_t[::1] serving
    cdef double[::1] done
    cdef double[:, ::1] qa
    cdef double[:, ::1] qd
    cdef double[:, ::1] qe
    cdef unsigned char[:, ::1] qf

    def __init__(self, int64_t total_agents, int64_t qcap):
        self.serving = np.empty(max(total_agents, 1), dtype=np.int64)
        self.done = np.empty(max(total_agents, 1), dtype=np.float64)
        self.qa = np.empty((4, max(qcap, 1)), dtype=np.float64)
        self.qd = np.empty((4, max(qcap, 1)), dtype=np.float64)
        self.qe = np.empty((4, max(qcap, 1)), dtype=np.float64)
        self.qf = np.empty((4, max(qcap, 1)), dtype=np.uint8)


def run_batch(inp, seed, rep_start, n_reps, out):
    """Run replications rep_start..rep_start+n_reps-1 into ``out`` (int64, (n, 12))."""
    cdef double[::1] lam = np.ascontiguousarray(inp.lam, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(inp.mu, dtype=np.float64)
    cdef double[::1] mu_up = np.ascontiguousarray(inp.mu_up, dtype=np.float64)
    cdef double[::1] theta = np.ascontiguousarray(inp.theta, dtype=np.float64)
    cdef int64_t[::1] k = np.ascontiguousarray(inp.k, dtype=np.int64)
    cdef int64_t[::1] n_up = np.ascontiguousarray(inp.n_up, dtype=np.int64)
    cdef int64_t[::1] init = np.ascontiguousarray(inp.init, dtype=np.int64)
    cdef int64_t ell = inp.ell
    cdef int mode = inp.mode
    cdef double y = inp.y
    cdef double horizon = inp.horizon
    cdef int64_t[:, ::1] out_view = out
    cdef int64_t trace_len = 0
    cdef int64_t[:, ::1] no_trace = np.empty((1, 7), dtype=np.int64)
    cdef _Workspace ws = _Workspace(int(np.sum(inp.k)), ell)
    cdef bitgen_t *rng
    cdef int64_t r
    cdef int rc
    seed_masked = int(seed) & _SEED_MASK
    for r in range(n_reps):
        bg = np.random.Philox(key=np.array([seed_masked, (rep_start + r) & _SEED_MASK], dtype=np.uint64))
        capsule = bg.capsule
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        with nogil:
            rc = _run_one(&lam[0], &mu[0], &mu_up[0], &theta[0], &k[0], &n_up[0],
                          ell, mode, y, &init[0], horizon, rng,
                          ws.serving, ws.done, ws.qa, ws.qd, ws.qe, ws.qf,
                          &out_view[r, 0], no_trace, 0, &trace_len)
        if rc != 0:
            raise RuntimeError("simulation engine failed")


def run_traced(inp, seed, rep_index):
    """One replication, returning (tallies, visited 7-tuples)."""
    cdef double[::1] lam = np.ascontiguousarray(inp.lam, dtype=np.float64)
    cdef double[::1] mu = np.ascontiguousarray(inp.mu, dtype=np.float64)
    cdef double[::1] mu_up = np.ascontiguousarray(inp.mu_up, dtype=np.float64)
    cdef double[::1] theta = np.ascontiguousarray(inp.theta, dtype=np.float64)
    cdef int64_t[::1] k = np.ascontiguousarray(inp.k, dtype=np.int64)
    cdef int64_t[::1] n_up = np.ascontiguousarray(inp.n_up, dtype=np.int64)
    cdef int64_t[::1] init = np.ascontiguousarray(inp.init, dtype=np.int64)
    cdef int64_t ell = inp.ell
    cdef int mode = inp.mode
    cdef double y = inp.y
    cdef double horizon = inp.horizon
    cdef _Workspace ws = _Workspace(int(np.sum(inp.k)), ell)
    cdef bitgen_t *rng
    cdef int64_t trace_len
    cdef int64_t[:, ::1] trace_view
    cdef int64_t[::1] tallies = np.zeros(12, dtype=np.int64)
    cdef int rc
    cap = 4096
    seed_masked = int(seed) & _SEED_MASK
    while True:
        trace = np.empty((cap, 7), dtype=np.int64)
        trace_view = trace
        trace_len = 0
        bg = np.random.Philox(key=np.array([seed_masked, int(rep_index) & _SEED_MASK], dtype=np.uint64))
        capsule = bg.capsule
        rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
        rc = _run_one(&lam[0], &mu[0], &mu_up[0], &theta[0], &k[0], &n_up[0],
                      ell, mode, y, &init[0], horizon, rng,
                      ws.serving, ws.done, ws.qa, ws.qd, ws.qe, ws.qf,
                      &tallies[0], trace_view, cap, &trace_len)
        if rc == 0:
            break
        cap *= 8
    states = [tuple(int(v) for v in row) for row in trace[:trace_len]]
    return tuple(int(v) for v in tallies), states
