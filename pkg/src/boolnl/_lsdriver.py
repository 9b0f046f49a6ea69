"""First-improvement local search driver, shared by both backends.

``build_ls_driver`` closes over one backend's evaluation kernels and returns
the driver either compiled (numba) or as plain Python (numpy backend), so
the search logic exists exactly once.

Operator codes follow ``operators.MutationKind`` order:
0 bit set, 1 bit reset, 2 bit flip, 3 two-bit flip, 4 two-bit flip if
equal, 5 two-bit set, 6 two-bit reset, 7 rotation.
"""

import numpy as np

from ._common import half_bits, jitable, permute_index, solution_key


@jitable
def neighborhood_size(op, L):
    if op <= 2:
        return L
    if op <= 6:
        return L * (L - 1) // 2
    return L - 1


@jitable
def effective(op, bits, i, j):
    if op == 0:
        return bits[i] == 0
    if op == 1:
        return bits[i] == 1
    if op == 4:
        return bits[i] == bits[j]
    if op == 5:
        return bits[i] == 0 and bits[j] == 0
    if op == 6:
        return bits[i] == 1 and bits[j] == 1
    return True


def build_ls_driver(kern, jit):
    eval_flip1 = kern.eval_flip1
    eval_flip2 = kern.eval_flip2
    eval_rot = kern.eval_rot
    apply_flip1 = kern.apply_flip1
    apply_flip2 = kern.apply_flip2
    spectrum_into = kern.spectrum_into

    def undo_move(op, p, bits, W, par, pair_i, pair_j, bbuf):
        L = bits.shape[0]
        if op <= 2:
            apply_flip1(W, par, bits, p)
        elif op <= 6:
            apply_flip2(W, par, bits, pair_i[p], pair_j[p])
        else:
            r = L - (p + 1)
            for k in range(L):
                bbuf[k] = bits[(k + r) % L]
            for k in range(L):
                bits[k] = bbuf[k]
            spectrum_into(bits, W)

    undo_move = jit(undo_move)

    def ls_drive(bits, W, ops, budget, evals0, f2, revert, max_depth, randomized,
                 run_key, pair_i, pair_j, par, best_bits, traj_eval, traj_m, traj_c):
        L = bits.shape[0]
        nops = ops.shape[0]
        sizes = np.empty(nops, np.int64)
        halves = np.empty(nops, np.int64)
        for q in range(nops):
            sizes[q] = neighborhood_size(ops[q], L)
            halves[q] = half_bits(sizes[q])
        wbuf = np.empty(L, W.dtype)
        bbuf = np.empty(L, bits.dtype)

        M = 0
        cnt = 0
        for a in range(L):
            v = abs(W[a])
            if v > M:
                M = v
                cnt = 1
            elif v == M:
                cnt += 1
        best_m = M
        best_c = cnt
        for k in range(L):
            best_bits[k] = bits[k]
        traj_eval[0] = evals0
        traj_m[0] = M
        traj_c[0] = cnt
        ntraj = 1

        cap = 1
        if revert:
            cap = max_depth if max_depth > 0 else budget + 1
        c_op = np.empty(cap, np.int64)
        c_pos = np.empty(cap, np.int64)
        c_key = np.empty(cap, np.int64)
        c_mop = np.empty(cap, np.int64)
        c_mp = np.empty(cap, np.int64)
        c_m = np.empty(cap, np.int64)
        c_c = np.empty(cap, np.int64)
        depth = 0
        max_seen = 0
        accepts = 0
        serial = 0
        key = solution_key(run_key, serial)
        op_idx = 0
        pos = 0
        evals = evals0
        converged = False

        while True:
            found = False
            mop = 0
            mp = 0
            m2 = 0
            c2 = 0
            while op_idx < nops and evals < budget:
                op = ops[op_idx]
                size = sizes[op_idx]
                half = halves[op_idx]
                while pos < size and evals < budget:
                    p = permute_index(pos, size, key, half) if randomized else pos
                    pos += 1
                    if op <= 2:
                        if not effective(op, bits, p, p):
                            continue
                        evals += 1
                        better, m2, c2 = eval_flip1(W, par, bits, p, M, cnt, f2)
                    elif op <= 6:
                        i = pair_i[p]
                        j = pair_j[p]
                        if not effective(op, bits, i, j):
                            continue
                        evals += 1
                        better, m2, c2 = eval_flip2(W, par, bits, i, j, M, cnt, f2)
                    else:
                        evals += 1
                        better, m2, c2 = eval_rot(bits, p + 1, M, cnt, f2, wbuf, bbuf)
                    if better:
                        found = True
                        mop = op
                        mp = p
                        break
                if found or pos < size:
                    break
                op_idx += 1
                pos = 0

            if found:
                if revert:
                    if depth == cap:
                        for q in range(cap - 1):
                            c_op[q] = c_op[q + 1]
                            c_pos[q] = c_pos[q + 1]
                            c_key[q] = c_key[q + 1]
                            c_mop[q] = c_mop[q + 1]
                            c_mp[q] = c_mp[q + 1]
                            c_m[q] = c_m[q + 1]
                            c_c[q] = c_c[q + 1]
                        depth -= 1
                    c_op[depth] = op_idx
                    c_pos[depth] = pos
                    c_key[depth] = key
                    c_mop[depth] = mop
                    c_mp[depth] = mp
                    c_m[depth] = M
                    c_c[depth] = cnt
                    depth += 1
                    if depth > max_seen:
                        max_seen = depth
                if mop <= 2:
                    apply_flip1(W, par, bits, mp)
                elif mop <= 6:
                    apply_flip2(W, par, bits, pair_i[mp], pair_j[mp])
                else:
                    for k in range(L):
                        bits[k] = bbuf[k]
                        W[k] = wbuf[k]
                M = m2
                cnt = c2
                accepts += 1
                if M < best_m or (f2 and M == best_m and cnt < best_c):
                    best_m = M
                    best_c = cnt
                    for k in range(L):
                        best_bits[k] = bits[k]
                    traj_eval[ntraj] = evals
                    traj_m[ntraj] = M
                    traj_c[ntraj] = cnt
                    ntraj += 1
                serial += 1
                key = solution_key(run_key, serial)
                op_idx = 0
                pos = 0
                continue

            if op_idx < nops:
                # budget ran out mid-scan
                break
            if not revert or depth == 0:
                converged = True
                break
            depth -= 1
            undo_move(c_mop[depth], c_mp[depth], bits, W, par, pair_i, pair_j, bbuf)
            op_idx = c_op[depth]
            pos = c_pos[depth]
            key = c_key[depth]
            M = c_m[depth]
            cnt = c_c[depth]

        return evals, ntraj, best_m, best_c, accepts, max_seen, converged

    return jit(ls_drive)
