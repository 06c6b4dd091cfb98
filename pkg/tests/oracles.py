"""Independent reference computations used by the tests.

Everything here deliberately avoids the package's Laplace-transform
pipeline: dense elimination written out longhand, generators rebuilt
from first principles, and transient expectations through the matrix
exponential of an augmented generator (Van Loan block trick), so that
agreement with the library is a genuine two-route check.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def gauss_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Dense Gaussian elimination with partial pivoting, complex-safe."""
    a = np.array(matrix, dtype=complex)
    b = np.array(rhs, dtype=complex)
    n = a.shape[0]
    for col in range(n):
        pivot = col + np.argmax(np.abs(a[col:, col]))
        if a[pivot, col] == 0:
            raise ZeroDivisionError(f"singular at column {col}")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            a[row, col:] -= factor * a[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


def single_level_generator(lam, mu, theta, k, ell):
    """Birth-death generator of the one-level model, from the verbal rules."""
    n = ell + 1
    q = np.zeros((n, n))
    for a in range(n):
        if a < ell:
            q[a, a + 1] = lam
        if a > 0:
            q[a, a - 1] = min(a, k) * mu + max(0, a - k) * theta
        q[a, a] = -q[a].sum()
    return q


def cumulative_reward(q: np.ndarray, reward_rates: np.ndarray, start: int, t: float) -> float:
    """E[ integral_0^t r(X_u) du | X_0 = start ] via an augmented exponential.

    expm([[Q, r], [0, 0]] * t) has the integral in its last column.
    """
    n = q.shape[0]
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = q
    aug[:n, n] = reward_rates
    return float(scipy.linalg.expm(aug * t)[start, n])


def distribution_at(q: np.ndarray, start: int, t: float) -> np.ndarray:
    """Row of exp(tQ): the state distribution at time t."""
    return scipy.linalg.expm(q * t)[start]


def single_level_rewards(lam, mu, theta, k, ell):
    """Accrual-rate vectors for the one-level measures, per state."""
    states = np.arange(ell + 1)
    queue = np.maximum(0, states - k)
    abandon = queue * theta
    blocked = np.where(states == ell, lam, 0.0)
    waiting = queue.astype(float)
    services = np.minimum(states, k) * mu
    return abandon, blocked, waiting, services


def two_level_generator(lam, mu, mu_up, theta, k, n2, ell):
    """Two query levels, hand-built: states (a, a1, b).

    Level-1 callers are served by the k[0] level-1 agents at mu[0] or by
    level-2 agents at mu_up; level-2 callers only by the k[1] level-2
    agents at mu[1]; n2 level-2 agents are reserved.  Returns the state
    list and the dense generator, plus per-state abandonment rates.
    """
    states = []
    for a in range(ell + 1):
        for a1 in range(min(k[1] - n2, a) + 1):
            for b in range(ell - a + 1):
                if a1 < a - k[0] and a1 < k[1] - n2 - b:
                    continue
                states.append((a, a1, b))
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    q = np.zeros((n, n))
    abandon1 = np.zeros(n)
    abandon2 = np.zeros(n)

    def add(i, target, rate):
        q[i, index[target]] += rate

    for i, (a, a1, b) in enumerate(states):
        own1 = min(a - a1, k[0])
        own2 = min(b, k[1] - a1)
        wait1 = a - a1 - own1
        wait2 = b - own2
        free2 = k[1] - a1 - own2
        if a + b < ell:
            if own1 < k[0]:
                add(i, (a + 1, a1, b), lam[0])
            elif free2 > n2:
                add(i, (a + 1, a1 + 1, b), lam[0])
            else:
                add(i, (a + 1, a1, b), lam[0])
            add(i, (a, a1, b + 1), lam[1])
        if own1 > 0:
            add(i, (a - 1, a1, b), own1 * mu[0])
        if a1 > 0:
            # freed level-2 agent: own-level waiter first, else a level-1
            # waiter if at least n2 agents stay free, else idle
            if wait2 > 0:
                add(i, (a - 1, a1 - 1, b), a1 * mu_up)
            elif wait1 > 0 and free2 >= n2:
                add(i, (a - 1, a1, b), a1 * mu_up)
            else:
                add(i, (a - 1, a1 - 1, b), a1 * mu_up)
        if own2 > 0:
            if wait2 > 0:
                add(i, (a, a1, b - 1), own2 * mu[1])
            elif wait1 > 0 and free2 >= n2:
                add(i, (a, a1 + 1, b - 1), own2 * mu[1])
            else:
                add(i, (a, a1, b - 1), own2 * mu[1])
        if wait1 > 0:
            add(i, (a - 1, a1, b), wait1 * theta[0])
            abandon1[i] = wait1 * theta[0]
        if wait2 > 0:
            add(i, (a, a1, b - 1), wait2 * theta[1])
            abandon2[i] = wait2 * theta[1]
    for i in range(n):
        q[i, i] -= q[i].sum()
    return states, q, abandon1, abandon2
