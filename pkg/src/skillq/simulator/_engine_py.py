"""Pure-Python replication engine (reference implementation).

The compiled twin in ``_engine_cy.pyx`` mirrors this module statement
for statement: both consume the same Philox uniform stream through the
same inverse-CDF exponential draws in the same order, so for a given
(seed, replication) the two backends produce bit-identical tallies and
visited-state traces.  Keep any behavioural change in the two files in
lockstep; the cross-backend equality tests enforce it.

Event selection scans a bounded candidate set (next arrival per level,
busy agents, waiting callers); with at most ``ell`` callers in the
system there is never a reason for an event heap.
"""

from __future__ import annotations

import math

import numpy as np

_SEED_MASK = (1 << 64) - 1


def _philox_uniform(seed: int, rep_index: int):
    """The per-replication uniform stream: counter-based, reproducible."""
    key = np.array([seed & _SEED_MASK, rep_index & _SEED_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random


def _exp_draw(random, rate: float) -> float:
    if rate <= 0.0:
        return math.inf
    return -math.log1p(-random()) / rate


class _Replication:
    """State of one simulated trajectory over [0, horizon]."""

    __slots__ = (
        "inp", "random", "t", "koff", "serving", "done", "own", "upc",
        "qa", "qd", "qe", "qf", "abandons", "blocked", "services",
        "next_arr", "trace",
    )

    def __init__(self, inp, random, collect_trace: bool):
        self.inp = inp
        self.random = random
        self.t = 0.0
        k = inp.k
        self.koff = [0, 0, 0, 0, 0]
        for j in range(4):
            self.koff[j + 1] = self.koff[j] + int(k[j])
        total_agents = self.koff[4]
        self.serving = [-1] * total_agents
        self.done = [math.inf] * total_agents
        self.own = [0, 0, 0, 0]
        self.upc = [0, 0, 0, 0]
        self.qa = [[], [], [], []]
        self.qd = [[], [], [], []]
        self.qe = [[], [], [], []]
        self.qf = [[], [], [], []]
        self.abandons = [0, 0, 0, 0]
        self.blocked = [0, 0, 0, 0]
        self.services = [0, 0, 0, 0]
        self.trace = [] if collect_trace else None
        self.next_arr = [_exp_draw(random, inp.lam[i]) for i in range(4)]
        self._seed_initial()
        if self.trace is not None:
            self.trace.append(self.tuple7())

    def _seed_initial(self) -> None:
        """Populate agents and queues from the initial 7-tuple.

        Draw order is fixed: per agent level, own-level services first,
        then the one-level-up services; then the waiting callers level
        by level.
        """
        inp = self.inp
        a, a1, b, b1, c, c1, d = (int(v) for v in inp.init)
        not_up = [a - a1, b - b1, c - c1, d]
        ups = [0, a1, b1, c1]
        own_count = [min(not_up[j], int(inp.k[j]) - ups[j]) for j in range(4)]
        queued = [not_up[j] - own_count[j] for j in range(4)]
        for j in range(4):
            for _ in range(own_count[j]):
                self.start_service(j, j)
            for _ in range(ups[j]):
                self.start_service(j, j - 1)
        for i in range(4):
            for _ in range(queued[i]):
                self.push(i)

    def tuple7(self) -> tuple[int, int, int, int, int, int, int]:
        a1, b1, c1 = self.upc[1], self.upc[2], self.upc[3]
        return (
            len(self.qa[0]) + self.own[0] + a1,
            a1,
            len(self.qa[1]) + self.own[1] + b1,
            b1,
            len(self.qa[2]) + self.own[2] + c1,
            c1,
            len(self.qa[3]) + self.own[3],
        )

    def total_in_system(self) -> int:
        total = 0
        for i in range(4):
            total += len(self.qa[i]) + self.own[i] + self.upc[i]
        return total

    def start_service(self, j: int, v: int) -> None:
        """Level-j agent begins serving a level-v caller (v is j or j-1)."""
        slot = self.koff[j]
        while self.serving[slot] >= 0:
            slot += 1
        self.serving[slot] = v
        rate = self.inp.mu[j] if v == j else self.inp.mu_up[v]
        self.done[slot] = self.t + _exp_draw(self.random, rate)
        if v == j:
            self.own[j] += 1
        else:
            self.upc[j] += 1

    def push(self, i: int) -> None:
        inp = self.inp
        self.qa[i].append(self.t)
        self.qd[i].append(self.t + _exp_draw(self.random, inp.theta[i]))
        if inp.mode == 1 and i < 3:
            self.qe[i].append(self.t + inp.y)
            self.qf[i].append(inp.y == 0.0)
        else:
            self.qe[i].append(math.inf)
            self.qf[i].append(True)

    def pop(self, i: int, p: int) -> None:
        del self.qa[i][p]
        del self.qd[i][p]
        del self.qe[i][p]
        del self.qf[i][p]

    def run(self) -> None:
        horizon = self.inp.horizon
        mode, y = self.inp.mode, self.inp.y
        while True:
            best_t = math.inf
            kind = -1
            ei = 0
            ep = 0
            for i in range(4):
                if self.next_arr[i] < best_t:
                    best_t = self.next_arr[i]
                    kind = 0
                    ei = i
            for slot in range(self.koff[4]):
                if self.serving[slot] >= 0 and self.done[slot] < best_t:
                    best_t = self.done[slot]
                    kind = 1
                    ei = slot
            for i in range(4):
                qd = self.qd[i]
                for p in range(len(qd)):
                    if qd[p] < best_t:
                        best_t = qd[p]
                        kind = 2
                        ei = i
                        ep = p
            if mode == 1 and y > 0.0:
                for i in range(3):
                    qe = self.qe[i]
                    qf = self.qf[i]
                    for p in range(len(qe)):
                        if not qf[p] and qe[p] < best_t:
                            best_t = qe[p]
                            kind = 3
                            ei = i
                            ep = p
            if kind < 0 or best_t > horizon:
                break
            self.t = best_t
            if kind == 0:
                self.on_arrival(ei)
            elif kind == 1:
                self.on_completion(ei)
            elif kind == 2:
                self.on_patience(ei, ep)
            else:
                self.on_eligible(ei, ep)
            if self.trace is not None:
                self.trace.append(self.tuple7())

    def on_arrival(self, i: int) -> None:
        inp = self.inp
        if self.total_in_system() >= inp.ell:
            self.blocked[i] += 1
        elif inp.mode == 0:
            self._admit_reservation(i)
        else:
            self._admit_overflow(i)
        self.next_arr[i] = self.t + _exp_draw(self.random, inp.lam[i])

    def _admit_reservation(self, i: int) -> None:
        k, nup = self.inp.k, self.inp.n_up
        a, a1, b, b1, c, c1, d = self.tuple7()
        if i == 0:
            if a - a1 < k[0]:
                self.start_service(0, 0)
            elif b - b1 < k[1] - nup[1] - a1:
                self.start_service(1, 0)
            else:
                self.push(0)
        elif i == 1:
            if k[1] - a1 - self.own[1] > 0:
                self.start_service(1, 1)
            elif c - c1 < k[2] - nup[2] - b1:
                self.start_service(2, 1)
            else:
                self.push(1)
        elif i == 2:
            if k[2] - b1 - self.own[2] > 0:
                self.start_service(2, 2)
            elif d < k[3] - nup[3] - c1:
                self.start_service(3, 2)
            else:
                self.push(2)
        else:
            if k[3] - c1 - self.own[3] > 0:
                self.start_service(3, 3)
            else:
                self.push(3)

    def _admit_overflow(self, i: int) -> None:
        inp = self.inp
        k = inp.k
        if k[i] - self.upc[i] - self.own[i] > 0:
            self.start_service(i, i)
        elif i < 3 and inp.y == 0.0 and k[i + 1] - self.upc[i + 1] - self.own[i + 1] > 0:
            self.start_service(i + 1, i)
        else:
            self.push(i)

    def on_completion(self, slot: int) -> None:
        j = 0
        while slot >= self.koff[j + 1]:
            j += 1
        v = self.serving[slot]
        take = self._take_after_completion(j) if self.inp.mode == 0 else self._take_fcfs(j)
        self.serving[slot] = -1
        if v == j:
            self.own[j] -= 1
        else:
            self.upc[j] -= 1
        self.services[v] += 1
        if take >= 0:
            self.pop(take, 0)
            self.start_service(j, take)

    def _take_after_completion(self, j: int) -> int:
        """Reservation policy: which queue the freed agent serves next.

        Own-level calls come first; a waiter from one level down is
        taken only if at least the reserved number of agents stay free,
        written as the same pool-load inequality on the pre-completion
        counts as the transition catalogue in multi_level (the freed
        agent itself still counts as busy there, so the reservation
        check is free-after-taking >= n).
        """
        k, nup = self.inp.k, self.inp.n_up
        a, a1, b, b1, c, c1, d = self.tuple7()
        if j == 0:
            if self.qa[0]:
                return 0
        elif j == 1:
            if self.qa[1]:
                return 1
            if self.qa[0] and b - b1 <= k[1] - nup[1] - a1:
                return 0
        elif j == 2:
            if self.qa[2]:
                return 2
            if self.qa[1] and c - c1 <= k[2] - nup[2] - b1:
                return 1
        else:
            if self.qa[3]:
                return 3
            if self.qa[2] and d <= k[3] - nup[3] - c1:
                return 2
        return -1

    def _take_fcfs(self, j: int) -> int:
        """Overflow policies: earliest-arrived eligible waiter at j or j-1."""
        cand = -1
        arr = math.inf
        if self.qa[j]:
            cand = j
            arr = self.qa[j][0]
        if j >= 1 and self.qa[j - 1] and self.qf[j - 1][0] and self.qa[j - 1][0] < arr:
            cand = j - 1
        return cand

    def on_patience(self, i: int, p: int) -> None:
        self.pop(i, p)
        self.abandons[i] += 1

    def on_eligible(self, i: int, p: int) -> None:
        self.qf[i][p] = True
        k = self.inp.k
        if k[i + 1] - self.upc[i + 1] - self.own[i + 1] > 0:
            self.pop(i, p)
            self.start_service(i + 1, i)


def run_batch(inp, seed: int, rep_start: int, n_reps: int, out: np.ndarray) -> None:
    """Run replications rep_start..rep_start+n_reps-1 into ``out``.

    ``out`` is int64 of shape (n_reps, 12): abandonments, blocked and
    services, four levels each.
    """
    for r in range(n_reps):
        random = _philox_uniform(seed, rep_start + r)
        sim = _Replication(inp, random, False)
        sim.run()
        out[r, 0:4] = sim.abandons
        out[r, 4:8] = sim.blocked
        out[r, 8:12] = sim.services


def run_traced(inp, seed: int, rep_index: int):
    """One replication, returning (tallies, visited 7-tuples)."""
    random = _philox_uniform(seed, rep_index)
    sim = _Replication(inp, random, True)
    sim.run()
    tallies = tuple(sim.abandons) + tuple(sim.blocked) + tuple(sim.services)
    return tallies, sim.trace
