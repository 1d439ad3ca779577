"""Brute-force reference solvers.  Deliberately naive: they share no code
with the package beyond the data containers."""
import itertools

import numpy as np


def all_associations(K, n_cols, caps):
    """Every serving vector (``-1`` = unassociated) respecting the capacities."""
    for choice in itertools.product(range(-1, n_cols), repeat=K):
        counts = [0] * n_cols
        ok = True
        for c in choice:
            if c >= 0:
                counts[c] += 1
                if counts[c] > caps[c]:
                    ok = False
                    break
        if ok:
            yield choice


def to_matrix(choice, n_cols):
    x = np.zeros((len(choice), n_cols), dtype=np.int8)
    for k, c in enumerate(choice):
        if c >= 0:
            x[k, c] = 1
    return x


def brute_lp(weights, caps, mbs_exact_load=None):
    """Best objective of the assignment LP over 0/1 points, or None."""
    K, n_cols = weights.shape
    best = None
    for choice in all_associations(K, n_cols, caps):
        if mbs_exact_load is not None and sum(c == 0 for c in choice) != mbs_exact_load:
            continue
        val = sum(weights[k, c] for k, c in enumerate(choice) if c >= 0)
        if best is None or val > best:
            best = val
    return best


def numerator(rate_mbs, rate_sbs, rho, choice):
    load = sum(c == 0 for c in choice)
    total = 0.0
    for k, c in enumerate(choice):
        if c == 0:
            total += max(0.0, 1.0 - load * rho) * rate_mbs[k]
        elif c > 0:
            total += rate_sbs[k][c - 1]
    return total


def brute_p3(inst, y):
    """Max sum rate for fixed y by enumerating every association."""
    caps = [inst.capacities[0]] + [inst.capacities[j + 1] if y[j] else 0 for j in range(inst.J)]
    return max(numerator(inst.rate_mbs, inst.rate_sbs, inst.pilot_overhead, ch)
               for ch in all_associations(inst.K, inst.J + 1, caps))


def brute_p1(inst):
    """(best ee, y, choice) by enumerating every (x, y) pair."""
    best = (-1.0, None, None)
    for y in itertools.product((0, 1), repeat=inst.J):
        caps = [inst.capacities[0]] + [inst.capacities[j + 1] if y[j] else 0 for j in range(inst.J)]
        power = inst.powers[0] + sum(p for p, on in zip(inst.powers[1:], y) if on)
        for ch in all_associations(inst.K, inst.J + 1, caps):
            ee = numerator(inst.rate_mbs, inst.rate_sbs, inst.pilot_overhead, ch) / power
            if ee > best[0] + 1e-15:
                best = (ee, y, ch)
    return best


def fractional_lp(weights, caps, mbs_exact_load=None):
    """Optimum of the continuous relaxation by a generic LP solver."""
    from scipy.optimize import linprog

    K, n_cols = weights.shape
    rows = np.vstack([np.kron(np.eye(K), np.ones((1, n_cols))),
                      np.kron(np.ones((1, K)), np.eye(n_cols))])
    rhs = np.r_[np.ones(K), caps]
    a_eq = b_eq = None
    if mbs_exact_load is not None:
        a_eq, b_eq = rows[K:K + 1], [mbs_exact_load]
    res = linprog(-weights.reshape(-1), A_ub=rows, b_ub=rhs, A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, 1), method="highs")
    if res.status != 0:
        return None
    return -res.fun


def p4_relaxation(inst, y, q0, return_x=False):
    """(value, lam, mu) of the relaxed association LP with x_kj <= y_j and
    sum_k x_k0 = q0, by a generic LP solver; multipliers from its duals.
    With ``return_x`` the primal optimum is appended."""
    from scipy.optimize import linprog

    K, J = inst.K, inst.J
    n_cols = J + 1
    n = K * n_cols
    w = np.column_stack([(1 - q0 * inst.pilot_overhead) * inst.rate_mbs, inst.rate_sbs])
    rows, rhs = [], []
    for k in range(K):
        r = np.zeros(n)
        r[k * n_cols:(k + 1) * n_cols] = 1
        rows.append(r)
        rhs.append(1)
    for j in range(n_cols):
        r = np.zeros(n)
        r[j::n_cols] = 1
        rows.append(r)
        rhs.append(inst.capacities[j])
    first_link = len(rows)
    for k in range(K):
        for j in range(J):
            r = np.zeros(n)
            r[k * n_cols + j + 1] = 1
            rows.append(r)
            rhs.append(y[j])
    eq = np.zeros((1, n))
    eq[0, 0::n_cols] = 1
    res = linprog(-w.reshape(-1), A_ub=np.array(rows).reshape(-1, n), b_ub=rhs, A_eq=eq,
                  b_eq=[q0], bounds=(0, 1), method="highs")
    if res.status != 0:
        return None
    lam = -np.asarray(res.ineqlin.marginals[first_link:]).reshape(K, J)
    mu = -float(res.eqlin.marginals[0])
    if return_x:
        return -res.fun, np.maximum(lam, 0.0), mu, res.x.reshape(K, n_cols)
    return -res.fun, np.maximum(lam, 0.0), mu


def fractional_lp_batch(problems):
    """Per-problem relaxation optima of many ``(weights, caps, load)`` LPs,
    solved as one block-diagonal LP (the blocks share no variables, so an
    optimum of the stack is optimal in every block)."""
    from scipy.optimize import linprog
    from scipy.sparse import block_diag, csr_matrix

    ub_blocks, eq_blocks, c, b_ub, b_eq, spans = [], [], [], [], [], []
    start = 0
    for w, caps, m in problems:
        K, n_cols = w.shape
        rows = np.vstack([np.kron(np.eye(K), np.ones((1, n_cols))),
                          np.kron(np.ones((1, K)), np.eye(n_cols))])
        ub_blocks.append(csr_matrix(rows))
        b_ub.extend(np.r_[np.ones(K), caps])
        eq = np.zeros((1, K * n_cols))
        if m is not None:
            eq = rows[K:K + 1]
        eq_blocks.append(csr_matrix(eq))
        b_eq.append(0 if m is None else m)
        c.extend(-w.reshape(-1))
        spans.append((start, start + K * n_cols))
        start += K * n_cols
    res = linprog(np.array(c), A_ub=block_diag(ub_blocks, format="csr"), b_ub=b_ub,
                  A_eq=block_diag(eq_blocks, format="csr"), b_eq=b_eq, bounds=(0, 1),
                  method="highs")
    if res.status != 0:
        raise RuntimeError(f"batched LP failed: {res.message}")
    return [float(np.dot(-np.array(c[a:b]), res.x[a:b])) for a, b in spans]
