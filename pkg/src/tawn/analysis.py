"""Routing-graph construction, loop detection and the invariant monitors.

Monitors are pure functions of a state or an edge; they can run from any
worker and their findings merge by set union.  The strict-quality check
only makes sense while premature route expiration is absent, so its
findings are dropped whenever a premature-expiration finding exists in
the same result set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .aodv import data as D
from .syntax import CastInProgress
from .values import UNDEFINED, canon, is_defined, t_less

LOOP = "LOOP"
PREMATURE_EXPIRATION = "PREMATURE_EXPIRATION"
INVARIANT_VIOLATION = "INVARIANT_VIOLATION"


@dataclass(frozen=True)
class Finding:
    kind: str
    name: str           # invariant name or the destination concerned
    state: str          # state digest the finding was raised on
    detail: tuple

    def render(self):
        return f"{self.kind}({self.name}) at {self.state}: {self.detail}"


def node_view(net):
    """Per-node AODV valuation: (rt, sn, now, raw valuation)."""
    out = {}
    for n in net.nodes:
        val = n.par.parts[0].val
        out[n.ip] = val
    return out


# ---------------------------------------------------------------------------
# Routing graphs and loops

@dataclass(frozen=True)
class RoutingGraph:
    dip: str
    vertices: tuple
    arcs: frozenset  # of (ip, nhip)


def routing_graph(net, dip) -> RoutingGraph:
    """Next-hop arcs towards dip over valid entries only."""
    arcs = set()
    for ip, val in node_view(net).items():
        if ip == dip:
            continue
        e = val.get("rt").get(dip)
        if e is not None and e.flag == D.VALID:
            arcs.add((ip, e.nhip))
    return RoutingGraph(dip, tuple(n.ip for n in net.nodes), frozenset(arcs))


def graph_cycles(arcs) -> set:
    """Cycles of a functional graph (out-degree at most one).

    Returns each cycle once, as a tuple rotated to start at its least
    vertex.
    """
    succ = dict(arcs)
    state = {}  # vertex -> "visiting" | "done"
    cycles = set()
    for start in succ:
        if state.get(start) == "done":
            continue
        path = []
        seen_at = {}
        v = start
        while v in succ and state.get(v) is None:
            seen_at[v] = len(path)
            path.append(v)
            state[v] = "visiting"
            v = succ[v]
        if v in seen_at and state.get(v) == "visiting":
            cyc = tuple(path[seen_at[v]:])
            k = cyc.index(min(cyc))
            cycles.add(cyc[k:] + cyc[:k])
        for u in path:
            state[u] = "done"
    return cycles


def find_loops(net) -> set:
    out = set()
    dips = set()
    for val in node_view(net).values():
        dips |= D.kD(val.get("rt"))
    for dip in sorted(dips):
        g = routing_graph(net, dip)
        for cyc in graph_cycles(g.arcs):
            out.add(Finding(LOOP, dip, net.digest(), cyc))
    return out


# ---------------------------------------------------------------------------
# Premature route expiration

def _intrinsic(rt, now, delete_period):
    """The table as it stands after pruning at the current instant."""
    return D.exp_rt(rt, now, delete_period)


def detect_premature_expiration(net, cfg) -> set:
    """Valid routes whose next hop no longer knows the destination.

    Both sides are judged intrinsically: the finder's entry must survive
    pruning now, and the next hop's knowledge counts only if its entry
    would survive pruning now.  Also flags in-flight route requests and
    replies whose sender has already lost the route they advertise.
    """
    out = set()
    views = node_view(net)
    now = net.now
    pruned = {ip: _intrinsic(val.get("rt"), now, cfg.delete_period)
              for ip, val in views.items()}
    for ip, val in views.items():
        for dip in sorted(D.vD(pruned[ip])):
            nhip = D.nhop(pruned[ip], dip)
            if nhip == dip or nhip not in pruned:
                continue
            if dip not in D.kD(pruned[nhip]):
                out.add(Finding(PREMATURE_EXPIRATION, dip, net.digest(),
                                (ip, "via", nhip)))
    # In-flight messages: the sender of an underway RREQ (originator oip)
    # or RREP (destination dip) must still know a route to that node.
    def check_inflight(msg, where):
        if isinstance(msg, D.Rreq) and msg.sip != msg.oip:
            sender, about = msg.sip, msg.oip
        elif isinstance(msg, D.Rrep) and msg.sip != msg.dip:
            sender, about = msg.sip, msg.dip
        else:
            return
        if sender in pruned and about not in D.kD(pruned[sender]):
            out.add(Finding(PREMATURE_EXPIRATION, about, net.digest(),
                            ("in-flight", where, "from", sender)))

    for n in net.nodes:
        proc = n.par.parts[0].proc
        if isinstance(proc, CastInProgress):
            check_inflight(proc.msg, f"cast@{n.ip}")
        for m in n.par.parts[1].val.get("msgs") or ():
            check_inflight(m, f"queue@{n.ip}")
    return out


# ---------------------------------------------------------------------------
# The invariant monitor suite

# One monitor per proposition used in the analysis; the registry is
# asserted against this list when a suite is built.
EXPECTED_MONITORS = frozenset({
    "handled-was-sent",        # messages handled were previously sent
    "no-self-receipt",         # the sender variable never equals own ip
    "self-identification",     # nodes know their own address
    "own-sqn",                 # own sequence number >= 1, monotone
    "hop-count",               # hop counts are at least 1
    "sqn-unknown-shape",       # zero/unknown sqn entries are 1-hop direct
    "hop-zero-sender",         # hop-0 RREQ/RREP come from origin/destination
    "sent-sqn-known",          # osn/dsn in control messages >= 1
    "entry-sqn-monotone",      # per-destination sqn never drops while kept
    "entry-quality-monotone",  # table quality never drops while kept
    "valid-dsn-bounded",       # valid known sqn <= destination's own sn
    "rerr-payload",            # RERR payloads match the sender's table
    "rrep-send-consistent",    # initiated RREPs match the sender's table
    "strict-quality",          # quality strictly increases towards dip
})


class Suite:
    """All state and edge monitors plus the two detectors."""

    def __init__(self, cfg, enabled=None):
        self.cfg = cfg
        self.enabled = frozenset(enabled) if enabled else EXPECTED_MONITORS
        unknown = self.enabled - EXPECTED_MONITORS
        if unknown:
            raise ValueError(f"unknown monitors requested: {sorted(unknown)}")

    def _on(self, name):
        return name in self.enabled

    # -- state monitors ----------------------------------------------------

    def on_state(self, net) -> set:
        out = set()
        digest = net.digest()
        views = node_view(net)
        sns = {}
        for ip, val in views.items():
            sn = val.get("sn")
            sns[ip] = sn
            if self._on("own-sqn") and (not is_defined(sn) or sn < 1):
                out.add(Finding(INVARIANT_VIOLATION, "own-sqn", digest, (ip,)))
            if self._on("self-identification") and val.get("ip") != ip:
                out.add(Finding(INVARIANT_VIOLATION, "self-identification",
                                digest, (ip,)))
            if self._on("no-self-receipt") and "sip" in val \
                    and val.get("sip") == ip:
                out.add(Finding(INVARIANT_VIOLATION, "no-self-receipt",
                                digest, (ip,)))
            for e in val.get("rt").entries:
                if self._on("hop-count") and e.hops < 1:
                    out.add(Finding(INVARIANT_VIOLATION, "hop-count", digest,
                                    (ip, e.dip, e.hops)))
                if self._on("sqn-unknown-shape"):
                    bad = ((e.dsn == 0 and e.dsk != D.UNKNOWN)
                           or (e.dsk == D.UNKNOWN and e.hops != 1)
                           or (e.hops == 1 and e.dip != e.nhip))
                    if bad:
                        out.add(Finding(INVARIANT_VIOLATION,
                                        "sqn-unknown-shape", digest,
                                        (ip, e.dip)))
        if self._on("valid-dsn-bounded"):
            for ip, val in views.items():
                for e in val.get("rt").entries:
                    if e.flag == D.VALID and e.dsk == D.KNOWN \
                            and e.dip in sns and e.dsn > sns[e.dip]:
                        out.add(Finding(INVARIANT_VIOLATION,
                                        "valid-dsn-bounded", digest,
                                        (ip, e.dip, e.dsn, sns[e.dip])))
        out |= self.detect(net)
        if self._on("strict-quality") and not any(
                f.kind == PREMATURE_EXPIRATION for f in out):
            out |= self.strict_quality(net)
        return out

    def detect(self, net) -> set:
        return find_loops(net) | detect_premature_expiration(net, self.cfg)

    def strict_quality(self, net) -> set:
        """Quality strictly increases from a node to its next hop."""
        out = set()
        views = node_view(net)
        for ip, val in views.items():
            rt = val.get("rt")
            for dip in sorted(D.vD(rt)):
                nhip = D.nhop(rt, dip)
                if nhip == dip or nhip not in views:
                    continue
                rt2 = views[nhip].get("rt")
                e2 = rt2.get(dip)
                if e2 is None or e2.flag != D.VALID:
                    continue
                if not D.rt_strictly_better(rt, rt2, dip):
                    out.add(Finding(INVARIANT_VIOLATION, "strict-quality",
                                    net.digest(), (ip, nhip, dip)))
        return out

    # -- edge monitors -------------------------------------------------------

    def on_edge(self, pre, action, post) -> set:
        out = set()
        digest = post.digest()
        if action.kind == "cast":
            dsts, msg = action.detail
            caster = action.actor
            if isinstance(msg, D.Rreq):
                if self._on("hop-zero-sender") and msg.hops == 0 \
                        and msg.oip != msg.sip:
                    out.add(Finding(INVARIANT_VIOLATION, "hop-zero-sender",
                                    digest, (caster, "rreq")))
                if self._on("sent-sqn-known") and msg.osn < 1:
                    out.add(Finding(INVARIANT_VIOLATION, "sent-sqn-known",
                                    digest, (caster, "rreq", msg.osn)))
            if isinstance(msg, D.Rrep):
                if self._on("hop-zero-sender") and msg.hops == 0 \
                        and msg.dip != msg.sip:
                    out.add(Finding(INVARIANT_VIOLATION, "hop-zero-sender",
                                    digest, (caster, "rrep")))
                if self._on("sent-sqn-known") and msg.dsn < 1:
                    out.add(Finding(INVARIANT_VIOLATION, "sent-sqn-known",
                                    digest, (caster, "rrep", msg.dsn)))
            if isinstance(msg, D.Rerr) and self._on("rerr-payload"):
                rt = node_view(post)[caster].get("rt")
                for rip, rsn in msg.dests.items():
                    if rip not in D.iD(rt) or rsn != D.sqn(rt, rip):
                        out.add(Finding(INVARIANT_VIOLATION, "rerr-payload",
                                        digest, (caster, rip)))
        if action.kind == "tau" and self._on("rrep-send-consistent") \
                and action.detail in ("rreq:26", "rrep:13"):
            out |= self._check_rrep_start(post, action.actor)
        if self._on("entry-sqn-monotone") or self._on("entry-quality-monotone") \
                or self._on("own-sqn"):
            pre_views, post_views = node_view(pre), node_view(post)
            for ip, val in pre_views.items():
                val2 = post_views[ip]
                if self._on("own-sqn") and val2.get("sn") < val.get("sn"):
                    out.add(Finding(INVARIANT_VIOLATION, "own-sqn", digest,
                                    (ip, "decreased")))
                rt1, rt2 = val.get("rt"), val2.get("rt")
                if rt1 is rt2 or rt1 == rt2:
                    continue
                for dip in sorted(D.kD(rt1) & D.kD(rt2)):
                    if self._on("entry-sqn-monotone") \
                            and D.sqn(rt2, dip) < D.sqn(rt1, dip):
                        out.add(Finding(INVARIANT_VIOLATION,
                                        "entry-sqn-monotone", digest,
                                        (ip, dip)))
                    if self._on("entry-quality-monotone") \
                            and not D.rt_le(rt1, rt2, dip):
                        out.add(Finding(INVARIANT_VIOLATION,
                                        "entry-quality-monotone", digest,
                                        (ip, dip)))
        return out

    def _check_rrep_start(self, post, ip) -> set:
        node = post.node(ip)
        proc = node.par.parts[0].proc
        if not isinstance(proc, CastInProgress) \
                or not isinstance(proc.msg, D.Rrep):
            return set()
        m = proc.msg
        if m.sip == m.dip:
            return set()
        val = node.par.parts[0].val
        rt, now = val.get("rt"), val.now
        ok = (m.dip in D.kD(rt) and D.sqn(rt, m.dip) == m.dsn
              and D.dhops(rt, m.dip) == m.hops
              and D.status(rt, m.dip) == D.VALID
              and D.sqnf(rt, m.dip) == D.KNOWN
              and t_less(now, D.ltime(rt, m.dip)))
        if ok:
            return set()
        return {Finding(INVARIANT_VIOLATION, "rrep-send-consistent",
                        post.digest(), (ip, canon(m)))}


def finalize(findings: Iterable[Finding]) -> set:
    """Drop strict-quality findings once premature expiration explains them."""
    fs = set(findings)
    if any(f.kind == PREMATURE_EXPIRATION for f in fs):
        fs = {f for f in fs if f.name != "strict-quality"}
    return fs


def analyse(model, scenario, max_states=None, workers: int = 1,
            monitors: Optional[Iterable[str]] = None):
    """Explore a scenario with the full monitor suite attached."""
    from .engine import explore
    suite = Suite(model.cfg, enabled=monitors)
    graph, findings = explore(model, scenario, on_state=suite.on_state,
                              on_edge=suite.on_edge, max_states=max_states,
                              workers=workers)
    return graph, finalize(findings)
