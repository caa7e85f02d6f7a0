"""Independent transcriptions of the table functions, as set comprehensions.

These mirror the displayed definitions directly over plain tuples
(dip, dsn, dsk, flag, hops, nhip, pre, ltime) so they share no code with
the implementation they check.
"""

import random

from tawn.values import INFINITY

KNO, UNK, VAL, INV = "kno", "unk", "val", "inv"


def as_tuples(rt):
    return {(e.dip, e.dsn, e.dsk, e.flag, e.hops, e.nhip,
             frozenset(e.pre), e.ltime) for e in rt.entries}


def _lt(a, b):
    if a is INFINITY:
        return False
    if b is INFINITY:
        return True
    return a < b


def _max(a, b):
    if a is INFINITY or b is INFINITY:
        return INFINITY
    return max(a, b)


def _add(a, b):
    if a is INFINITY or b is INFINITY:
        return INFINITY
    return a + b


def o_sqn(rt, dip):
    for r in rt:
        if r[0] == dip:
            return r[1]
    return 0


def o_dhops(rt, dip):
    return next(r[4] for r in rt if r[0] == dip)


def o_status(rt, dip):
    return next(r[3] for r in rt if r[0] == dip)


def o_kd(rt):
    return {r[0] for r in rt}


def o_vd(rt):
    return {r[0] for r in rt if r[3] == VAL}


def o_update(rt, r):
    dip = r[0]
    if dip not in o_kd(rt):
        return rt | {r}
    s = next(x for x in rt if x[0] == dip)
    nrt = rt - {s}
    nr = (r[0], r[1], r[2], r[3], r[4], r[5], r[6] | s[6], _max(r[7], s[7]))
    if o_sqn(rt, dip) < r[1]:
        return nrt | {nr}
    if o_sqn(rt, dip) == r[1] and o_dhops(rt, dip) > r[4]:
        return nrt | {nr}
    if o_sqn(rt, dip) == r[1] and o_status(rt, dip) == INV:
        return nrt | {nr}
    if r[2] == UNK:
        return nrt | {(r[0], s[1], r[2], r[3], r[4], r[5], r[6] | s[6],
                       _max(r[7], s[7]))}
    return nrt | {(s[0], s[1], s[2], s[3], s[4], s[5], s[6] | r[6], s[7])}


def o_invalidate(rt, dests, t):
    return ({r for r in rt if r[0] not in dict(dests)}
            | {(r[0], dict(dests)[r[0]], r[2], INV, r[4], r[5], r[6], t)
               for r in rt if r[0] in dict(dests)})


def o_one_hop_life(rt, nhip, t):
    return all(_lt(t, r[7]) for r in rt
               if r[0] == nhip and r[3] == VAL and r[4] == 1)


def o_exp_rt(rt, t, t2):
    keep = {r for r in rt if _lt(t, r[7]) and o_one_hop_life(rt, r[5], t)}
    invalidated = {(r[0], r[1] + 1, r[2], INV, r[4], r[5], r[6],
                    _add(r[7], t2))
                   for r in rt if r[3] == VAL
                   and (not _lt(t, r[7]) or not o_one_hop_life(rt, r[5], t))
                   and _lt(t, _add(r[7], t2))}
    return keep | invalidated


def o_set_time_rt(rt, dip, t):
    if dip not in o_kd(rt):
        return rt
    r = next(x for x in rt if x[0] == dip)
    return (rt - {r}) | {(r[0], r[1], r[2], r[3], r[4], r[5], r[6],
                          _max(r[7], t))}


def o_nsqn(rt, dip):
    if o_status(rt, dip) == VAL or o_sqn(rt, dip) == 0:
        return o_sqn(rt, dip)
    return o_sqn(rt, dip) - 1


def o_quality_le(rt1, rt2, dip):
    n1, n2 = o_nsqn(rt1, dip), o_nsqn(rt2, dip)
    return n1 < n2 or (n1 == n2 and o_dhops(rt1, dip) >= o_dhops(rt2, dip))


def o_exp_rreqs(rreqs, t):
    return {rq for rq in rreqs if _lt(t, rq[2])}


def o_exp_store(store, t, retries):
    return {row for row in store if row[1] < retries or _lt(t, row[2])}


def o_reset_retries(store, dests):
    d = dict(dests)
    return ({row for row in store if row[0] not in d}
            | {(row[0], 0, 0, row[3]) for row in store if row[0] in d})


# ---------------------------------------------------------------------------
# Random small-input generators

IPS = ["d1", "d2", "d3", "d4"]


def rand_time(rng):
    return rng.choice([0, 1, 2, 5, 9, 14, INFINITY])


def rand_entry(rng, dip=None):
    dsn = rng.randint(0, 4)
    dsk = UNK if dsn == 0 else rng.choice([KNO, UNK])
    hops = 1 if dsk == UNK else rng.randint(1, 4)
    nhip = dip if hops == 1 else rng.choice(IPS)
    # the structural invariants beyond these are not needed by the oracles
    return ((dip or rng.choice(IPS)), dsn, dsk, rng.choice([VAL, INV]),
            hops, nhip or rng.choice(IPS),
            frozenset(rng.sample(IPS, rng.randint(0, 2))), rand_time(rng))


def rand_rt_tuples(rng, max_entries=4):
    dips = rng.sample(IPS, rng.randint(0, max_entries))
    return {rand_entry(rng, dip=dip) for dip in dips}


def rand_valid_update(rng):
    dip = rng.choice(IPS)
    dsn = rng.randint(0, 4)
    dsk = UNK if dsn == 0 else KNO
    hops = 1 if dsk == UNK else rng.randint(1, 4)
    nhip = dip if hops == 1 else rng.choice(IPS)
    return (dip, dsn, dsk, VAL, hops, nhip,
            frozenset(rng.sample(IPS, rng.randint(0, 2))), rand_time(rng))


def rand_dests(rng):
    dips = rng.sample(IPS, rng.randint(0, 3))
    return tuple(sorted((dip, rng.randint(0, 5)) for dip in dips))


def rand_store_tuples(rng):
    dips = rng.sample(IPS, rng.randint(0, 3))
    return {(dip, rng.randint(0, 3), rand_time(rng),
             tuple(f"p{i}" for i in range(rng.randint(1, 2))))
            for dip in dips}


def rand_rreqs_tuples(rng):
    return {(rng.choice(IPS), rng.randint(1, 3), rand_time(rng))
            for _ in range(rng.randint(0, 4))}
