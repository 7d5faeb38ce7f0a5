"""Pure-Python simulation kernel.

This is the reference twin of the compiled kernel in ``_engine.pyx``; the
two must stay line-for-line equivalent in arithmetic so their outputs are
bit-identical for the same inputs and seed.  State is kept in task bitmasks
(so networks are capped at 64 tasks) and every race epoch consumes exactly
one or two counter-based uniforms: one for the epoch length, one for the
winner when the epoch is not cut short by a scheduled release.

Event tuples are ``(time, agent index, kind, task index)`` with kinds
0=solve, 1=share, 2=claim.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / (1 << 53)
INF = math.inf


def _mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def simulate(
    m,
    n,
    pred_mask,
    rates,
    rewards,
    herd_key,
    split_key,
    strat_kind,
    strat_param,
    has_weights,
    split_w,
    seed,
    record_events,
):
    """One replication; returns (makespan, claims per agent, events|None)."""
    full = (1 << m) - 1
    know = [0] * n
    public = 0
    solved_any = 0
    deadline = [INF] * n
    claims = [0.0] * n
    events = [] if record_events else None
    t = 0.0
    key = seed & MASK64
    ctr = 0

    def flush(j):
        # publicly release everything agent j holds; each released task is
        # still unclaimed by construction, so j banks its reward, and the
        # solutions enter every agent's knowledge
        nonlocal public
        caps = know[j] & ~public & full
        rem = caps
        u = 0
        while rem:
            if rem & 1:
                claims[j] += rewards[u]
                if record_events:
                    events.append((t, j, 1, u))
                    events.append((t, j, 2, u))
            rem >>= 1
            u += 1
        public |= caps
        for i2 in range(n):
            know[i2] |= caps
        deadline[j] = INF

    entry_agent = []
    entry_task = []
    entry_rate = []

    while solved_any != full:
        for i in range(n):
            if deadline[i] != INF and (know[i] & ~public & full) == 0:
                deadline[i] = INF

        del entry_agent[:]
        del entry_task[:]
        del entry_rate[:]
        total = 0.0
        for i in range(n):
            ki = know[i]
            if ki == full:
                continue
            avail = 0
            for u in range(m):
                if not (ki >> u) & 1 and (pred_mask[u] & ~ki) == 0:
                    avail |= 1 << u
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
                            entry_agent.append(i)
                            entry_task.append(u)
                            entry_rate.append(r)
                            total += r
            else:
                best = -1.0
                pick = 0
                for u in range(m):
                    if (avail >> u) & 1 and herd_key[base + u] > best:
                        best = herd_key[base + u]
                        pick = u
                r = rates[base + pick]
                entry_agent.append(i)
                entry_task.append(pick)
                entry_rate.append(r)
                total += r

        td = INF
        holder = -1
        for i in range(n):
            if deadline[i] < td:
                td = deadline[i]
                holder = i

        ctr += 1
        u1 = (_mix64(key + ctr * GOLDEN) >> 11) * INV_2_53
        t_next = t + (-math.log1p(-u1) / total)

        if td <= t_next:
            # scheduled release wins the epoch; memorylessness lets the
            # race re-sample afresh next epoch
            t = td
            flush(holder)
            for j in range(n):
                if j != holder and strat_kind[j] == 2 and (know[j] & ~public & full):
                    flush(j)
            continue

        t = t_next
        ctr += 1
        u2 = (_mix64(key + ctr * GOLDEN) >> 11) * INV_2_53
        target = u2 * total
        acc = 0.0
        idx = len(entry_rate) - 1
        for e in range(len(entry_rate)):
            acc += entry_rate[e]
            if target < acc:
                idx = e
                break
        winner = entry_agent[idx]
        task = entry_task[idx]
        bit = 1 << task
        know[winner] |= bit
        solved_any |= bit
        if record_events:
            events.append((t, winner, 0, task))

        if solved_any == full:
            # project complete: solver releases first, then the rest
            if know[winner] & ~public & full:
                flush(winner)
            for j in range(n):
                if j != winner and (know[j] & ~public & full):
                    flush(j)
            break

        kind = strat_kind[winner]
        shared_now = False
        if kind == 0 or kind == 1:
            flush(winner)
            shared_now = True
        elif kind == 2:
            if strat_param[winner] == 0.0:
                flush(winner)
                shared_now = True
            else:
                deadline[winner] = t + strat_param[winner]
        if shared_now:
            for j in range(n):
                if j != winner and strat_kind[j] == 2 and (know[j] & ~public & full):
                    flush(j)

    return t, claims, events


def simulate_batch(
    m,
    n,
    pred_mask,
    rates,
    rewards,
    herd_key,
    split_key,
    strat_kind,
    strat_param,
    has_weights,
    split_w,
    master_seed,
    reps,
):
    """Sequential replications with counter-derived keys; returns
    (makespans, claims flattened replication-major)."""
    makespans = [0.0] * reps
    claims_flat = [0.0] * (reps * n)
    master = master_seed & MASK64
    for k in range(reps):
        rep_key = _mix64(master + (k + 1) * GOLDEN)
        makespan, claims, _ = simulate(
            m,
            n,
            pred_mask,
            rates,
            rewards,
            herd_key,
            split_key,
            strat_kind,
            strat_param,
            has_weights,
            split_w,
            rep_key,
            False,
        )
        makespans[k] = makespan
        base = k * n
        for i in range(n):
            claims_flat[base + i] = claims[i]
    return makespans, claims_flat
