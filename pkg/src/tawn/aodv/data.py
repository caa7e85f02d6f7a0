"""Routing tables, stores, request records, messages and their functions.

Everything here is a pure function over immutable values.  Routing tables
keep at most one entry per destination and are stored sorted by
destination so that state hashing is canonical.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from ..values import (INFINITY, UNDEFINED, is_defined, t_add, t_key, t_leq,
                      t_less, t_max)

KNOWN = "kno"
UNKNOWN = "unk"
VALID = "val"
INVALID = "inv"


class ContractError(Exception):
    """A precondition of a data-structure operation was violated."""


# ---------------------------------------------------------------------------
# Routing table entries

@dataclass(frozen=True)
class RouteEntry:
    dip: str
    dsn: int
    dsk: str
    flag: str
    hops: int
    nhip: str
    pre: frozenset
    ltime: object  # TIME

    def canon(self):
        return (self.dip, self.dsn, self.dsk, self.flag, self.hops, self.nhip,
                tuple(sorted(self.pre)), "INFINITY" if self.ltime is INFINITY
                else self.ltime)

    def dump(self):
        pre = "{" + " ".join(sorted(self.pre)) + "}"
        return ",".join(str(x) for x in
                        (self.dip, self.dsn, self.dsk, self.flag, self.hops,
                         self.nhip, pre, self.ltime))


def entry(dip, dsn, dsk, flag, hops, nhip, pre=frozenset(), ltime=0):
    return RouteEntry(dip, dsn, dsk, flag, hops, nhip, frozenset(pre), ltime)


@dataclass(frozen=True)
class RoutingTable:
    entries: tuple  # RouteEntry sorted by dip, unique dip

    def canon(self):
        return tuple(e.canon() for e in self.entries)

    def get(self, dip) -> Optional[RouteEntry]:
        for e in self.entries:
            if e.dip == dip:
                return e
        return None

    def without(self, dip) -> "RoutingTable":
        return RoutingTable(tuple(e for e in self.entries if e.dip != dip))

    def put(self, e: RouteEntry) -> "RoutingTable":
        rest = [x for x in self.entries if x.dip != e.dip]
        rest.append(e)
        rest.sort(key=lambda x: x.dip)
        return RoutingTable(tuple(rest))

    def dump(self):
        return "\n".join(e.dump() for e in self.entries)


EMPTY_RT = RoutingTable(())


def rtable(*entries) -> RoutingTable:
    dips = [e.dip for e in entries]
    if len(set(dips)) != len(dips):
        raise ContractError("routing table with duplicate destination")
    return RoutingTable(tuple(sorted(entries, key=lambda e: e.dip)))


# Projections.  sqn and sqnf are total (0 / unknown on a missing
# destination); the rest are partial and yield UNDEFINED.

def sqn(rt, dip):
    e = rt.get(dip)
    return 0 if e is None else e.dsn


def sqnf(rt, dip):
    e = rt.get(dip)
    return UNKNOWN if e is None else e.dsk


def status(rt, dip):
    e = rt.get(dip)
    return UNDEFINED if e is None else e.flag


def dhops(rt, dip):
    e = rt.get(dip)
    return UNDEFINED if e is None else e.hops


def nhop(rt, dip):
    e = rt.get(dip)
    return UNDEFINED if e is None else e.nhip


def precs(rt, dip):
    e = rt.get(dip)
    return UNDEFINED if e is None else e.pre


def ltime(rt, dip):
    e = rt.get(dip)
    return UNDEFINED if e is None else e.ltime


def kD(rt):
    return frozenset(e.dip for e in rt.entries)


def vD(rt):
    return frozenset(e.dip for e in rt.entries if e.flag == VALID)


def iD(rt):
    return frozenset(e.dip for e in rt.entries if e.flag == INVALID)


def inc(sn):
    return sn if sn is INFINITY else sn + 1


# ---------------------------------------------------------------------------
# update / invalidate / expiry

def update(rt: RoutingTable, r: RouteEntry) -> RoutingTable:
    """Merge a valid route into the table (six-clause case split)."""
    if r.flag != VALID:
        raise ContractError("update requires a valid route")
    if (r.dsn == 0) != (r.dsk == UNKNOWN):
        raise ContractError("update: zero sequence number iff unknown")
    if r.dsk == UNKNOWN and r.hops != 1:
        raise ContractError("update: unknown sequence number needs hop count 1")

    s = rt.get(r.dip)
    if s is None:
        return rt.put(r)
    nrt = rt.without(r.dip)
    nr = replace(r, pre=r.pre | s.pre, ltime=t_max(r.ltime, s.ltime))
    if sqn(rt, r.dip) < r.dsn:
        return nrt.put(nr)
    if sqn(rt, r.dip) == r.dsn and dhops(rt, r.dip) > r.hops:
        return nrt.put(nr)
    if sqn(rt, r.dip) == r.dsn and status(rt, r.dip) == INVALID:
        return nrt.put(nr)
    if r.dsk == UNKNOWN:
        nr2 = replace(nr, dsn=s.dsn)
        return nrt.put(nr2)
    ns = replace(s, pre=s.pre | r.pre)  # lifetime not updated
    return nrt.put(ns)


def would_change_route(rt: RoutingTable, r: RouteEntry) -> bool:
    """True when update(rt, r) changes more than precursors and lifetime."""
    s = rt.get(r.dip)
    if s is None:
        return True
    return (sqn(rt, r.dip) < r.dsn
            or (sqn(rt, r.dip) == r.dsn and dhops(rt, r.dip) > r.hops)
            or (sqn(rt, r.dip) == r.dsn and status(rt, r.dip) == INVALID))


def invalidate(rt: RoutingTable, dests, t) -> RoutingTable:
    """Mark the routes in dests invalid with the given expiration time."""
    out = []
    for e in rt.entries:
        rsn = dests.get(e.dip)
        if rsn is None:
            out.append(e)
        else:
            out.append(replace(e, dsn=rsn, flag=INVALID, ltime=t))
    return RoutingTable(tuple(out))


def one_hop_alive(rt: RoutingTable, nhip, t) -> bool:
    """If a valid 1-hop entry for nhip exists, it must not be expired."""
    for e in rt.entries:
        if e.dip == nhip and e.flag == VALID and e.hops == 1:
            if not t_less(t, e.ltime):
                return False
    return True


def exp_rt(rt: RoutingTable, t, t2) -> RoutingTable:
    """Invalidate expired valid routes; erase routes expired for longer.

    A route counts as expired when its own expiration time is reached or
    when the valid 1-hop entry to its next hop has expired.  Freshly
    invalidated routes get t2 added to their expiration time; entries
    already past that extension are erased right away.
    """
    out = []
    for e in rt.entries:
        if t_less(t, e.ltime) and one_hop_alive(rt, e.nhip, t):
            out.append(e)
        elif e.flag == VALID and t_less(t, t_add(e.ltime, t2)):
            out.append(replace(e, dsn=inc(e.dsn), flag=INVALID,
                               ltime=t_add(e.ltime, t2)))
    return RoutingTable(tuple(out))


def set_time_rt(rt: RoutingTable, dip, t) -> RoutingTable:
    e = rt.get(dip)
    if e is None:
        return rt
    return rt.put(replace(e, ltime=t_max(e.ltime, t)))


def addpre(e: RouteEntry, npre) -> RouteEntry:
    return replace(e, pre=e.pre | frozenset(npre))


def addpre_rt(rt: RoutingTable, dip, npre) -> RoutingTable:
    e = rt.get(dip)
    if e is None:
        return rt
    return rt.put(addpre(e, npre))


# ---------------------------------------------------------------------------
# Quality order on routing tables (per destination)

def nsqn(rt, dip):
    """Net sequence number: one less for invalid routes with a known sqn."""
    if status(rt, dip) == VALID or sqn(rt, dip) == 0:
        return sqn(rt, dip)
    return sqn(rt, dip) - 1


def rt_le(rt1, rt2, dip) -> bool:
    """The quality preorder: rt1 is at most as good as rt2 for dip."""
    if rt1.get(dip) is None or rt2.get(dip) is None:
        raise ContractError("quality comparison needs entries on both sides")
    n1, n2 = nsqn(rt1, dip), nsqn(rt2, dip)
    return n1 < n2 or (n1 == n2 and dhops(rt1, dip) >= dhops(rt2, dip))


BETTER = "BETTER"
EQUIV = "EQUIV"
WORSE = "WORSE"


def rt_compare(rt1, rt2, dip) -> str:
    """How rt2 relates to rt1 for dip: BETTER, EQUIV or WORSE."""
    le12, le21 = rt_le(rt1, rt2, dip), rt_le(rt2, rt1, dip)
    if le12 and le21:
        return EQUIV
    return BETTER if le12 else WORSE


def rt_strictly_better(rt1, rt2, dip) -> bool:
    """rt1 strictly below rt2 in the quality order for dip."""
    return rt_compare(rt1, rt2, dip) == BETTER


# ---------------------------------------------------------------------------
# Store of queued data packets

@dataclass(frozen=True)
class StoreRow:
    dip: str
    pending: int
    next_req_time: object  # TIME
    queue: tuple

    def canon(self):
        return (self.dip, self.pending,
                "INFINITY" if self.next_req_time is INFINITY
                else self.next_req_time, self.queue)


@dataclass(frozen=True)
class Store:
    rows: tuple  # sorted by dip, unique dip

    def canon(self):
        return tuple(r.canon() for r in self.rows)

    def get(self, dip) -> Optional[StoreRow]:
        for r in self.rows:
            if r.dip == dip:
                return r
        return None

    def put(self, row: StoreRow) -> "Store":
        rest = [r for r in self.rows if r.dip != row.dip]
        rest.append(row)
        rest.sort(key=lambda r: r.dip)
        return Store(tuple(rest))

    def without(self, dip) -> "Store":
        return Store(tuple(r for r in self.rows if r.dip != dip))


EMPTY_STORE = Store(())


def qD(store):
    return frozenset(r.dip for r in store.rows)


def fD(store, dip):
    r = store.get(dip)
    return UNDEFINED if r is None else r.pending


def sel_time(store, dip):
    r = store.get(dip)
    return UNDEFINED if r is None else r.next_req_time


def sel_queue(store, dip):
    r = store.get(dip)
    return UNDEFINED if r is None else r.queue


def add(data, dip, store) -> Store:
    """Queue a packet; a fresh destination starts ready for discovery."""
    r = store.get(dip)
    if r is None:
        return store.put(StoreRow(dip, 0, 0, (data,)))
    return store.put(replace(r, queue=r.queue + (data,)))


def drop(dip, store):
    """Remove the head packet for dip; drop the row when it empties."""
    r = store.get(dip)
    if r is None:
        return UNDEFINED
    rest = r.queue[1:]
    if not rest:
        return store.without(dip)
    return store.put(replace(r, queue=rest))


def inc_retries(store, dip) -> Store:
    r = store.get(dip)
    if r is None:
        return store
    return store.put(replace(r, pending=r.pending + 1))


def reset_retries(store, dests) -> Store:
    out = []
    for r in store.rows:
        if dests.get(r.dip) is None:
            out.append(r)
        else:
            out.append(StoreRow(r.dip, 0, 0, r.queue))
    return Store(tuple(out))


def set_time_store(store, dip, t) -> Store:
    r = store.get(dip)
    if r is None:
        return store
    return store.put(replace(r, next_req_time=t))


def exp_store(store, t, rreq_retries) -> Store:
    """Drop queues whose discovery attempts are exhausted and timed out."""
    return Store(tuple(r for r in store.rows
                       if r.pending < rreq_retries
                       or t_less(t, r.next_req_time)))


# ---------------------------------------------------------------------------
# Route request records

@dataclass(frozen=True)
class RreqRecords:
    records: frozenset  # of (oip, rreqid, expiry)

    def canon(self):
        return tuple(sorted(((o, i, "INFINITY" if t is INFINITY else t)
                             for (o, i, t) in self.records)))

    def seen(self, oip, rreqid) -> bool:
        return any(o == oip and i == rreqid for (o, i, _) in self.records)

    def add(self, oip, rreqid, expiry) -> "RreqRecords":
        return RreqRecords(self.records | {(oip, rreqid, expiry)})


EMPTY_RREQS = RreqRecords(frozenset())


def exp_rreqs(rreqs: RreqRecords, t) -> RreqRecords:
    return RreqRecords(frozenset(rq for rq in rreqs.records
                                 if t_less(t, rq[2])))


def nrreqid(rreqs: RreqRecords, ip) -> int:
    used = [i for (o, i, _) in rreqs.records if o == ip]
    return max(used, default=0) + 1


# ---------------------------------------------------------------------------
# Partial map IP -> SQN (unreachable destinations in error messages)

@dataclass(frozen=True)
class DestSqnMap:
    pairs: tuple  # sorted (ip, sqn), unique ip

    def canon(self):
        return self.pairs

    def get(self, ip):
        for (rip, rsn) in self.pairs:
            if rip == ip:
                return rsn
        return None

    def ips(self):
        return frozenset(rip for (rip, _) in self.pairs)

    def items(self):
        return self.pairs

    def __len__(self):
        return len(self.pairs)


def dest_map(pairs) -> DestSqnMap:
    d = {}
    for (rip, rsn) in pairs:
        if rip in d and d[rip] != rsn:
            raise ContractError("dests map with conflicting sequence numbers")
        d[rip] = rsn
    return DestSqnMap(tuple(sorted(d.items())))


EMPTY_DESTS = DestSqnMap(())


# ---------------------------------------------------------------------------
# Messages

@dataclass(frozen=True)
class Rreq:
    hops: int
    rreqid: int
    dip: str
    dsn: int
    dsk: str
    oip: str
    osn: int
    sip: str

    def canon(self):
        return ("rreq",) + tuple(getattr(self, f) for f in
                                 ("hops", "rreqid", "dip", "dsn", "dsk",
                                  "oip", "osn", "sip"))


@dataclass(frozen=True)
class Rrep:
    hops: int
    dip: str
    dsn: int
    oip: str
    ltime: object  # TIME
    sip: str

    def canon(self):
        lt = "INFINITY" if self.ltime is INFINITY else self.ltime
        return ("rrep", self.hops, self.dip, self.dsn, self.oip, lt, self.sip)


@dataclass(frozen=True)
class Rerr:
    dests: DestSqnMap
    sip: str

    def canon(self):
        return ("rerr", self.dests.canon(), self.sip)


@dataclass(frozen=True)
class Pkt:
    data: str
    dip: str
    sip: str

    def canon(self):
        return ("pkt", self.data, self.dip, self.sip)


@dataclass(frozen=True)
class NewPkt:
    data: str
    dip: str

    def canon(self):
        return ("newpkt", self.data, self.dip)


# ---------------------------------------------------------------------------
# Timing constants

class TimingError(Exception):
    """The timing constants violate the loop-freedom side conditions."""


@dataclass(frozen=True)
class TimingConfig:
    delete_period: object
    active_route_timeout: object
    my_route_timeout: object
    node_traversal_time: object
    net_traversal_time: object
    path_discovery_time: object
    rreq_retries: int
    lb: int = 1
    lg: int = 1
    lu: int = 1
    db: int = 0
    dg: int = 0
    du: int = 0

    def validate(self, unchecked=False):
        """Check the four constraints; skipped on infinite constants."""
        if unchecked:
            return self
        consts = (self.delete_period, self.active_route_timeout,
                  self.my_route_timeout, self.node_traversal_time,
                  self.net_traversal_time)
        if any(c is INFINITY for c in consts):
            return self
        node_tt, net_tt = self.node_traversal_time, self.net_traversal_time
        dp = self.delete_period
        slack = dp - node_tt - net_tt
        if not (0 <= node_tt <= net_tt):
            raise TimingError("NODE_TRAVERSAL_TIME must be within NET_TRAVERSAL_TIME")
        if not (0 <= self.active_route_timeout < slack):
            raise TimingError("ACTIVE_ROUTE_TIMEOUT too large for DELETE_PERIOD")
        if not (0 <= self.my_route_timeout < slack):
            raise TimingError("MY_ROUTE_TIMEOUT too large for DELETE_PERIOD")
        if not (3 * net_tt < dp + node_tt):
            raise TimingError("3*NET_TRAVERSAL_TIME must stay below DELETE_PERIOD+NODE_TRAVERSAL_TIME")
        return self


PRESETS = {
    # Small constants for desk-scale runs; they satisfy all four constraints.
    "desk": TimingConfig(delete_period=7, active_route_timeout=3,
                         my_route_timeout=3, node_traversal_time=1,
                         net_traversal_time=2, path_discovery_time=4,
                         rreq_retries=2),
    # RFC defaults in units of 40 ms (NET_DIAMETER 35).
    "rfc": TimingConfig(delete_period=1250, active_route_timeout=250,
                        my_route_timeout=500, node_traversal_time=1,
                        net_traversal_time=140, path_discovery_time=280,
                        rreq_retries=2),
    # Degeneration to the untimed protocol: nothing ever expires.
    "untimed": TimingConfig(delete_period=INFINITY,
                            active_route_timeout=INFINITY,
                            my_route_timeout=INFINITY,
                            node_traversal_time=INFINITY,
                            net_traversal_time=INFINITY,
                            path_discovery_time=INFINITY,
                            rreq_retries=1),
}


def preset(name: str) -> TimingConfig:
    try:
        return PRESETS[name].validate()
    except KeyError:
        raise TimingError(f"unknown preset {name!r}") from None
