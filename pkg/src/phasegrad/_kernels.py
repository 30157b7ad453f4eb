"""Compiled numerical kernels (numba).

Everything here works on plain float64 arrays so the hot paths (Newton
solves inside training loops, finite-difference sweeps) run at C speed
on a single core. Node 0 is always the pinned phase reference: kernels
solve the reduced system over nodes 1..n-1 and keep theta[0] = 0.

The linear solver is a hand-rolled LU with partial pivoting rather than
a LAPACK call so that a singular or non-finite system degrades into a
`not ok` flag instead of an exception; training treats that as a
skipped sample.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def residual_full(theta, omega_c, k_mat, beta, out_nodes, targets):
    """Right-hand side of the phase dynamics at state theta.

    r_i = omega_c_i + sum_j K_ij sin(theta_j - theta_i)
          - beta (theta_i - target_i) for output nodes when beta != 0.
    """
    n = theta.shape[0]
    r = np.empty(n)
    for i in range(n):
        acc = omega_c[i]
        ti = theta[i]
        for j in range(n):
            kij = k_mat[i, j]
            if kij != 0.0:
                acc += kij * np.sin(theta[j] - ti)
        r[i] = acc
    if beta != 0.0:
        for a in range(out_nodes.shape[0]):
            i = out_nodes[a]
            r[i] -= beta * (theta[i] - targets[a])
    return r


@njit(cache=True)
def jacobian_full(theta, k_mat, beta, out_nodes):
    """d residual / d theta. Off-diagonal K_ij cos(theta_j - theta_i);
    diagonal balances the row, minus beta on nudged outputs."""
    n = theta.shape[0]
    jac = np.zeros((n, n))
    for i in range(n):
        diag = 0.0
        ti = theta[i]
        for j in range(n):
            if j == i:
                continue
            kij = k_mat[i, j]
            if kij != 0.0:
                c = kij * np.cos(theta[j] - ti)
                jac[i, j] = c
                diag -= c
        jac[i, i] = diag
    if beta != 0.0:
        for a in range(out_nodes.shape[0]):
            i = out_nodes[a]
            jac[i, i] -= beta
    return jac


@njit(cache=True)
def lu_solve_inplace(a, b):
    """Solve a x = b by LU with partial pivoting; a and b are destroyed.

    Returns (x, ok). ok is False on a vanishing pivot or non-finite
    arithmetic, in which case x is garbage and must be ignored.
    """
    n = a.shape[0]
    for k in range(n):
        p = k
        amax = abs(a[k, k])
        for i in range(k + 1, n):
            v = abs(a[i, k])
            if v > amax:
                amax = v
                p = i
        if not np.isfinite(amax) or amax < 1e-300:
            return b, False
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        piv = a[k, k]
        for i in range(k + 1, n):
            m = a[i, k] / piv
            if m != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= m * a[k, j]
                b[i] -= m * b[k]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= a[i, j] * x[j]
        x[i] = s / a[i, i]
        if not np.isfinite(x[i]):
            return x, False
    return x, True


@njit(cache=True)
def _reduced_inf_norm(r):
    m = 0.0
    for i in range(1, r.shape[0]):
        v = abs(r[i])
        if v > m:
            m = v
    return m


@njit(cache=True)
def newton_solve(k_mat, omega_c, beta, out_nodes, targets, theta0,
                 tol, max_iter):
    """Damped Newton for the reduced equilibrium system (node 0 pinned).

    Returns (theta, residual_inf, iterations, ok). residual_inf is the
    max-norm over the reduced equations. Backtracking halves the step up
    to 30 times until the residual norm strictly decreases; failure to
    improve ends the iteration unconverged.
    """
    n = k_mat.shape[0]
    theta = theta0.copy()
    theta[0] = 0.0
    r = residual_full(theta, omega_c, k_mat, beta, out_nodes, targets)
    res_inf = _reduced_inf_norm(r)
    iters = 0
    while res_inf > tol and iters < max_iter:
        jac = jacobian_full(theta, k_mat, beta, out_nodes)
        a = jac[1:, 1:].copy()
        b = np.empty(n - 1)
        for i in range(n - 1):
            b[i] = -r[i + 1]
        step, ok = lu_solve_inplace(a, b)
        if not ok:
            return theta, res_inf, iters, False
        scale = 1.0
        improved = False
        for _ in range(31):
            cand = theta.copy()
            for i in range(n - 1):
                cand[i + 1] = theta[i + 1] + scale * step[i]
            rc = residual_full(cand, omega_c, k_mat, beta, out_nodes, targets)
            rc_inf = _reduced_inf_norm(rc)
            if rc_inf < res_inf:
                theta = cand
                r = rc
                res_inf = rc_inf
                improved = True
                break
            scale *= 0.5
        iters += 1
        if not improved:
            return theta, res_inf, iters, False
    return theta, res_inf, iters, res_inf <= tol


@njit(cache=True)
def cond_sym_reduced(theta, k_mat, beta, out_nodes):
    """2-norm condition number of the reduced Jacobian (symmetric case)."""
    jac = jacobian_full(theta, k_mat, beta, out_nodes)
    red = jac[1:, 1:].copy()
    vals = np.linalg.eigvalsh(red)
    amax = 0.0
    amin = np.inf
    for v in vals:
        a = abs(v)
        if a > amax:
            amax = a
        if a < amin:
            amin = a
    if amin == 0.0:
        return np.inf
    return amax / amin


_EMPTY_I64 = np.empty(0, dtype=np.int64)
_EMPTY_F64 = np.empty(0, dtype=np.float64)


def no_nudge():
    """(out_nodes, targets) pair meaning no nudge term."""
    return _EMPTY_I64, _EMPTY_F64


@njit(cache=True)
def _quadratic_loss(theta, out_nodes, targets):
    total = 0.0
    for a in range(out_nodes.shape[0]):
        d = theta[out_nodes[a]] - targets[a]
        total += 0.5 * d * d
    return total


@njit(cache=True)
def _clip(value, limit):
    if value > limit:
        return limit
    if value < -limit:
        return -limit
    return value


@njit(cache=True)
def ep_step(omega, k_mat, weights, edge_i, edge_j,
            learn_node_mask, learn_edge_mask,
            input_nodes, features, out_nodes, targets, warm,
            train_omega, train_k, grad_rule_fd, fd_h,
            lr, beta, clip, om_lo, om_hi, k_lo, k_hi, recenter,
            tol, max_iter):
    """One online SGD step. Mutates omega, weights, and k_mat in place.

    Returns (applied, residual_inf, cond, theta_free). applied is False
    when any equilibrium solve failed, in which case no parameter moved
    and theta_free echoes the warm start (free solve failed) or the free
    solution (nudged solve failed) so the caller can carry it forward.
    """
    n = omega.shape[0]
    empty_i = np.empty(0, dtype=np.int64)
    empty_f = np.empty(0, dtype=np.float64)

    omega_full = omega.copy()
    for a in range(input_nodes.shape[0]):
        omega_full[input_nodes[a]] = features[a]
    omega_c = omega_full - omega_full.mean()

    theta_free, res_inf, _, ok = newton_solve(
        k_mat, omega_c, 0.0, empty_i, empty_f, warm, tol, max_iter)
    if not ok:
        return False, res_inf, np.nan, warm.copy()
    cond = cond_sym_reduced(theta_free, k_mat, 0.0, empty_i)

    theta_nudged, _, _, ok2 = newton_solve(
        k_mat, omega_c, beta, out_nodes, targets, theta_free, tol, max_iter)
    if not ok2:
        return False, res_inf, cond, theta_free

    if train_omega:
        grad = np.zeros(n)
        if grad_rule_fd:
            for k in range(1, n):
                if not learn_node_mask[k]:
                    continue
                oc = omega_c.copy()
                oc[k] += fd_h
                th_p, _, _, okp = newton_solve(
                    k_mat, oc, 0.0, empty_i, empty_f, theta_free, tol, max_iter)
                oc[k] -= 2.0 * fd_h
                th_m, _, _, okm = newton_solve(
                    k_mat, oc, 0.0, empty_i, empty_f, theta_free, tol, max_iter)
                if not (okp and okm):
                    return False, res_inf, cond, theta_free
                lp = _quadratic_loss(th_p, out_nodes, targets)
                lm = _quadratic_loss(th_m, out_nodes, targets)
                grad[k] = (lp - lm) / (2.0 * fd_h)
        else:
            for k in range(1, n):
                if learn_node_mask[k]:
                    grad[k] = -(theta_nudged[k] - theta_free[k]) / beta
        for k in range(n):
            if learn_node_mask[k]:
                omega[k] -= lr * _clip(grad[k], clip)
                if omega[k] < om_lo:
                    omega[k] = om_lo
                elif omega[k] > om_hi:
                    omega[k] = om_hi

    if train_k:
        for e in range(weights.shape[0]):
            if not learn_edge_mask[e]:
                continue
            i = edge_i[e]
            j = edge_j[e]
            g = (np.cos(theta_free[j] - theta_free[i])
                 - np.cos(theta_nudged[j] - theta_nudged[i])) / beta
            weights[e] -= lr * _clip(g, clip)
            if weights[e] < k_lo:
                weights[e] = k_lo
            elif weights[e] > k_hi:
                weights[e] = k_hi
            k_mat[i, j] = weights[e]
            k_mat[j, i] = weights[e]

    if recenter and train_omega:
        total = 0.0
        count = 0
        for k in range(n):
            if learn_node_mask[k]:
                total += omega[k]
                count += 1
        if count > 0:
            mean = total / count
            for k in range(n):
                if learn_node_mask[k]:
                    omega[k] -= mean
                    if omega[k] < om_lo:
                        omega[k] = om_lo
                    elif omega[k] > om_hi:
                        omega[k] = om_hi

    return True, res_inf, cond, theta_free


@njit(cache=True)
def evaluate(k_mat, omega, input_nodes, features, labels, out_nodes,
             tol, max_iter):
    """Classification accuracy from zero-started free equilibria.

    The predicted class is the output whose phase is closest to zero on
    the circle; ties go to the lowest output index. A sample whose solve
    fails counts as wrong.
    """
    n = omega.shape[0]
    empty_i = np.empty(0, dtype=np.int64)
    empty_f = np.empty(0, dtype=np.float64)
    zero = np.zeros(n)
    correct = 0
    for s in range(features.shape[0]):
        omega_full = omega.copy()
        for a in range(input_nodes.shape[0]):
            omega_full[input_nodes[a]] = features[s, a]
        omega_c = omega_full - omega_full.mean()
        theta, _, _, ok = newton_solve(
            k_mat, omega_c, 0.0, empty_i, empty_f, zero, tol, max_iter)
        if not ok:
            continue
        best = 0
        best_v = np.cos(theta[out_nodes[0]])
        for a in range(1, out_nodes.shape[0]):
            v = np.cos(theta[out_nodes[a]])
            if v > best_v:
                best_v = v
                best = a
        if best == labels[s]:
            correct += 1
    return correct / features.shape[0]


@njit(cache=True)
def train_run(omega0, k_mat0, weights0, edge_i, edge_j,
              learn_node_mask, learn_edge_mask, input_nodes, out_nodes,
              train_feats, train_labels, test_feats, test_labels,
              nudge_nodes_table, targets_table, shuffles,
              train_omega, train_k, grad_rule_fd, fd_h,
              lr, beta, clip, om_lo, om_hi, k_lo, k_hi, recenter,
              tol, max_iter):
    """Full online SGD run: epochs x shuffled per-sample steps.

    shuffles[(ep, t)] gives the train-sample index visited at position t
    of epoch ep. Row c of nudge_nodes_table / targets_table holds the
    nudged nodes and their target phases for class c. The free solution
    of each applied step warm-starts the next step's free solve;
    evaluation always starts from zero phases.

    Returns (omega, weights, train_acc, test_acc, mean_residual,
    mean_cond, skips) with one entry per epoch in the trace arrays.
    Residual and condition-number means run over applied steps only; an
    epoch with no applied step records NaN.
    """
    epochs = shuffles.shape[0]
    n_train = shuffles.shape[1]
    omega = omega0.copy()
    k_mat = k_mat0.copy()
    weights = weights0.copy()
    warm = np.zeros(omega.shape[0])

    train_acc = np.empty(epochs)
    test_acc = np.empty(epochs)
    mean_residual = np.empty(epochs)
    mean_cond = np.empty(epochs)
    skips = np.zeros(epochs, dtype=np.int64)

    for ep in range(epochs):
        res_sum = 0.0
        cond_sum = 0.0
        applied = 0
        for t in range(n_train):
            s = shuffles[ep, t]
            label = train_labels[s]
            ok, res, cond, theta_free = ep_step(
                omega, k_mat, weights, edge_i, edge_j,
                learn_node_mask, learn_edge_mask,
                input_nodes, train_feats[s], nudge_nodes_table[label],
                targets_table[label], warm,
                train_omega, train_k, grad_rule_fd, fd_h,
                lr, beta, clip, om_lo, om_hi, k_lo, k_hi, recenter,
                tol, max_iter)
            warm = theta_free
            if ok:
                res_sum += res
                cond_sum += cond
                applied += 1
            else:
                skips[ep] += 1
        train_acc[ep] = evaluate(k_mat, omega, input_nodes,
                                 train_feats, train_labels, out_nodes,
                                 tol, max_iter)
        test_acc[ep] = evaluate(k_mat, omega, input_nodes,
                                test_feats, test_labels, out_nodes,
                                tol, max_iter)
        if applied > 0:
            mean_residual[ep] = res_sum / applied
            mean_cond[ep] = cond_sum / applied
        else:
            mean_residual[ep] = np.nan
            mean_cond[ep] = np.nan

    return omega, weights, train_acc, test_acc, mean_residual, mean_cond, skips
