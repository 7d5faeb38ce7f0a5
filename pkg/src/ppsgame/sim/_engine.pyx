# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernel.

Line-for-line twin of ``_engine_py``; the arithmetic (counter-based RNG,
inverse-CDF exponentials, pooled-rate races) is kept identical so the two
kernels return bit-identical results for the same inputs and seed.  Built
with -ffp-contract=off so the C compiler cannot fuse multiply-adds.
"""

from libc.math cimport INFINITY, log1p
from libc.stdlib cimport free, malloc

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 MIX2 = 0x94D049BB133111EBULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 _mix64(u64 z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(u64 key, u64 ctr) noexcept nogil:
    return <double>(_mix64(key + ctr * GOLDEN) >> 11) * INV_2_53


cdef void _flush(
    int j,
    int n,
    double t,
    u64* know,
    u64* public_ref,
    double* claims,
    double[::1] rewards,
    double* deadline,
    u64 full,
    bint record_events,
    list events,
):
    cdef u64 caps = know[j] & ~public_ref[0] & full
    cdef u64 rem = caps
    cdef int u = 0
    cdef int i2
    while rem:
        if rem & 1:
            claims[j] += rewards[u]
            if record_events:
                events.append((t, j, 1, u))
                events.append((t, j, 2, u))
        rem >>= 1
        u += 1
    public_ref[0] |= caps
    for i2 in range(n):
        know[i2] |= caps
    deadline[j] = INFINITY


cdef double _run(
    int m,
    int n,
    u64[::1] pred_mask,
    double[::1] rates,
    double[::1] rewards,
    double[::1] herd_key,
    double[::1] split_key,
    int[::1] strat_kind,
    double[::1] strat_param,
    int[::1] has_weights,
    double[::1] split_w,
    u64 seed,
    bint record_events,
    list events,
    u64* know,
    double* deadline,
    double* claims,
    int* entry_agent,
    int* entry_task,
    double* entry_rate,
):
    cdef u64 full = ((<u64>1) << m) - 1 if m < 64 else <u64>0xFFFFFFFFFFFFFFFFULL
    cdef u64 public = 0
    cdef u64 solved_any = 0
    cdef u64 ki, avail, bit
    cdef double t = 0.0
    cdef u64 key = seed
    cdef u64 ctr = 0
    cdef int i, u, j, base, pick, count, idx, n_entries, kind, winner, task, e
    cdef double total, best, thr, wsum, x, r, td, u1, u2, t_next, target, acc
    cdef int holder

    for i in range(n):
        know[i] = 0
        deadline[i] = INFINITY
        claims[i] = 0.0

    while solved_any != full:
        for i in range(n):
            if deadline[i] != INFINITY and (know[i] & ~public & full) == 0:
                deadline[i] = INFINITY

        n_entries = 0
        total = 0.0
        for i in range(n):
            ki = know[i]
            if ki == full:
                continue
            avail = 0
            for u in range(m):
                if not (ki >> u) & 1 and (pred_mask[u] & ~ki) == 0:
                    avail |= (<u64>1) << u
            if avail == 0:
                continue
            base = i * m
            if strat_kind[i] == 1:
                best = -1.0
                for u in range(m):
                    if (avail >> u) & 1 and split_key[u] > best:
                        best = split_key[u]
                thr = best - (1e-12 * best if best > 0.0 else 0.0)
                count = 0
                wsum = 0.0
                for u in range(m):
                    if (avail >> u) & 1 and split_key[u] >= thr:
                        count += 1
                        if has_weights[i]:
                            wsum += split_w[base + u]
                for u in range(m):
                    if (avail >> u) & 1 and split_key[u] >= thr:
                        if has_weights[i] and wsum > 0.0:
                            x = split_w[base + u] / wsum
                        else:
                            x = 1.0 / count
                        r = x * rates[base + u]
                        if r > 0.0:
                            entry_agent[n_entries] = i
                            entry_task[n_entries] = u
                            entry_rate[n_entries] = r
                            n_entries += 1
                            total += r
            else:
                best = -1.0
                pick = 0
                for u in range(m):
                    if (avail >> u) & 1 and herd_key[base + u] > best:
                        best = herd_key[base + u]
                        pick = u
                r = rates[base + pick]
                entry_agent[n_entries] = i
                entry_task[n_entries] = pick
                entry_rate[n_entries] = r
                n_entries += 1
                total += r

        td = INFINITY
        holder = -1
        for i in range(n):
            if deadline[i] < td:
                td = deadline[i]
                holder = i

        ctr += 1
        u1 = _uniform(key, ctr)
        t_next = t + (-log1p(-u1) / total)

        if td <= t_next:
            t = td
            _flush(holder, n, t, know, &public, claims, rewards, deadline, full,
                   record_events, events)
            for j in range(n):
                if j != holder and strat_kind[j] == 2 and (know[j] & ~public & full):
                    _flush(j, n, t, know, &public, claims, rewards, deadline, full,
                           record_events, events)
            continue

        t = t_next
        ctr += 1
        u2 = _uniform(key, ctr)
        target = u2 * total
        acc = 0.0
        idx = n_entries - 1
        for e in range(n_entries):
            acc += entry_rate[e]
            if target < acc:
                idx = e
                break
        winner = entry_agent[idx]
        task = entry_task[idx]
        bit = (<u64>1) << task
        know[winner] |= bit
        solved_any |= bit
        if record_events:
            events.append((t, winner, 0, task))

        if solved_any == full:
            if know[winner] & ~public & full:
                _flush(winner, n, t, know, &public, claims, rewards, deadline, full,
                       record_events, events)
            for j in range(n):
                if j != winner and (know[j] & ~public & full):
                    _flush(j, n, t, know, &public, claims, rewards, deadline, full,
                           record_events, events)
            break

        kind = strat_kind[winner]
        if kind == 0 or kind == 1 or (kind == 2 and strat_param[winner] == 0.0):
            _flush(winner, n, t, know, &public, claims, rewards, deadline, full,
                   record_events, events)
            for j in range(n):
                if j != winner and strat_kind[j] == 2 and (know[j] & ~public & full):
                    _flush(j, n, t, know, &public, claims, rewards, deadline, full,
                           record_events, events)
        elif kind == 2:
            deadline[winner] = t + strat_param[winner]

    return t


def simulate(
    int m,
    int n,
    u64[::1] pred_mask,
    double[::1] rates,
    double[::1] rewards,
    double[::1] herd_key,
    double[::1] split_key,
    int[::1] strat_kind,
    double[::1] strat_param,
    int[::1] has_weights,
    double[::1] split_w,
    u64 seed,
    bint record_events,
):
    """One replication; returns (makespan, claims per agent, events|None)."""
    cdef int cap = n * m
    cdef u64* know = <u64*>malloc(n * sizeof(u64))
    cdef double* deadline = <double*>malloc(n * sizeof(double))
    cdef double* claims = <double*>malloc(n * sizeof(double))
    cdef int* entry_agent = <int*>malloc(cap * sizeof(int))
    cdef int* entry_task = <int*>malloc(cap * sizeof(int))
    cdef double* entry_rate = <double*>malloc(cap * sizeof(double))
    if not (know and deadline and claims and entry_agent and entry_task and entry_rate):
        free(know); free(deadline); free(claims)
        free(entry_agent); free(entry_task); free(entry_rate)
        raise MemoryError()
    cdef list events = [] if record_events else None
    cdef double makespan
    cdef int i
    try:
        makespan = _run(
            m, n, pred_mask, rates, rewards, herd_key, split_key, strat_kind,
            strat_param, has_weights, split_w, seed, record_events, events,
            know, deadline, claims, entry_agent, entry_task, entry_rate,
        )
        claims_list = [claims[i] for i in range(n)]
    finally:
        free(know); free(deadline); free(claims)
        free(entry_agent); free(entry_task); free(entry_rate)
    return makespan, claims_list, events


def simulate_batch(
    int m,
    int n,
    u64[::1] pred_mask,
    double[::1] rates,
    double[::1] rewards,
    double[::1] herd_key,
    double[::1] split_key,
    int[::1] strat_kind,
    double[::1] strat_param,
    int[::1] has_weights,
    double[::1] split_w,
    u64 master_seed,
    int reps,
    double[::1] out_makespan,
    double[:, ::1] out_claims,
):
    """Counter-keyed replications writing into preallocated outputs."""
    cdef int cap = n * m
    cdef u64* know = <u64*>malloc(n * sizeof(u64))
    cdef double* deadline = <double*>malloc(n * sizeof(double))
    cdef double* claims = <double*>malloc(n * sizeof(double))
    cdef int* entry_agent = <int*>malloc(cap * sizeof(int))
    cdef int* entry_task = <int*>malloc(cap * sizeof(int))
    cdef double* entry_rate = <double*>malloc(cap * sizeof(double))
    if not (know and deadline and claims and entry_agent and entry_task and entry_rate):
        free(know); free(deadline); free(claims)
        free(entry_agent); free(entry_task); free(entry_rate)
        raise MemoryError()
    cdef int k, i
    cdef u64 rep_key
    try:
        for k in range(reps):
            rep_key = _mix64(master_seed + (<u64>(k + 1)) * GOLDEN)
            out_makespan[k] = _run(
                m, n, pred_mask, rates, rewards, herd_key, split_key,
                strat_kind, strat_param, has_weights, split_w, rep_key,
                False, None,
                know, deadline, claims, entry_agent, entry_task, entry_rate,
            )
            for i in range(n):
                out_claims[k, i] = claims[i]
    finally:
        free(know); free(deadline); free(claims)
        free(entry_agent); free(entry_task); free(entry_rate)
