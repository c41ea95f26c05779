"""Pure-Python log-Euler stepper for Lotka-Volterra drift.

Used when the compiled extension is unavailable. ``advance`` integrates a
chunk of steps in log coordinates, in place:

    logx      (n,)            current log densities, -inf for absent species
    m, A      (n,), (n, n)    growth rates and interaction matrix
    half_var  (n,)            sigma_ii / 2
    dE        (k, n)          noise increments for the chunk (already scaled)
    k0                        global index of the first step in the chunk
    stride                    store the pre-step state when index % stride == 0
    store, pos                output buffer of log states and next free row
    acc_start, acc_len        accumulate steps acc_start <= index < acc_start + acc_len
    acc       (nb, 2, n)      per-batch sums of densities [.,0] and drift [.,1]

Returns ``(steps_done, pos)``; ``steps_done < k`` means the next state would
have been NaN or +inf and the chunk stopped before applying it.
"""
from math import exp, inf, isnan


def advance(logx, m, A, half_var, dE, dt, k0, stride, store, pos, acc_start, acc_len, acc):
    n = logx.shape[0]
    nb = acc.shape[0]
    lx = logx.tolist()
    mm = [m[i] - half_var[i] for i in range(n)]
    AA = A.tolist()
    rows = range(n)
    for s, dEs in enumerate(dE.tolist()):
        k = k0 + s
        if k % stride == 0:
            store[pos, :] = lx
            pos += 1
        x = [exp(v) for v in lx]
        drift = [mm[i] + sum(a * xj for a, xj in zip(AA[i], x)) for i in rows]
        if k >= acc_start:
            b = ((k - acc_start) * nb) // acc_len
            acc[b, 0, :] += x
            acc[b, 1, :] += drift
        new = [lx[i] + drift[i] * dt + dEs[i] for i in rows]
        if any(isnan(v) or v == inf for v in new):
            logx[:] = lx
            return s, pos
        lx = new
    logx[:] = lx
    return dE.shape[0], pos
