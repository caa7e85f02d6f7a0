"""Small-step semantics for sequential, parallel, node and network levels.

Transition sets are plain lists of tagged tuples.  Two kinds of entry are
parametric rather than enumerated:

* receive transitions are returned as a message handler (one entry
  standing for all messages), instantiated when a cast or an injected
  packet synchronises with the node;
* transmission steps are returned as a range builder (one entry standing
  for all ranges), instantiated with the node's current range.

Stepping never mutates; states are value-semantic and hashable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .syntax import (Assign, Broadcast, Call, CastInProgress, Choice, Deliver,
                     Groupcast, Guard, ModelError, ProcessTable, Receive,
                     Send, Unicast, Valuation)
from .values import UNDEFINED, canon, is_defined
from .wait import W, WR, WS, WaitKind, parl_combine, wait_meet


@dataclass(frozen=True)
class AlgebraConfig:
    """Transmission-time bounds and the IP universe used by broadcast."""

    universe: frozenset
    lb: int = 1
    db: int = 0
    lg: int = 1
    dg: int = 0
    lu: int = 1
    du: int = 0

    def __post_init__(self):
        if min(self.lb, self.lg, self.lu) < 1:
            raise ModelError("minimum transmission times must be positive")
        if min(self.db, self.dg, self.du) < 0:
            raise ModelError("optional transmission times must be >= 0")


class SeqState:
    """A sequential process expression paired with a valuation."""

    __slots__ = ("val", "proc", "_canon")

    def __init__(self, val: Valuation, proc):
        self.val = val
        self.proc = proc
        self._canon = None

    def canon(self):
        if self._canon is None:
            p = self.proc
            if isinstance(p, CastInProgress):
                pc = ("*cast", tuple(sorted(p.dests)), canon(p.msg), p.n, p.o,
                      p.then.label, p.otherwise.label)
            else:
                pc = p.label
            self._canon = (pc, self.val.canon())
        return self._canon

    def __eq__(self, other):
        return isinstance(other, SeqState) and self.canon() == other.canon()

    def __hash__(self):
        return hash(self.canon())

    def __repr__(self):
        return f"SeqState({render_proc(self.proc)})"


# Transition tags used at the sequential and parallel level:
#   ("tau", detail, target)
#   ("starcast", dsts, msg, target)
#   ("send", msg, target)
#   ("deliver", data, target)
#   ("recv", handler)              handler(m) -> target
#   ("wait", kind, target)
#   ("caststep", kind, builder)    builder(R) -> list of targets


def step_sequential(table: ProcessTable, cfg: AlgebraConfig, state: SeqState):
    xi, p = state.val, state.proc

    def unvalued():
        return [("wait", W, SeqState(xi.advance(), p))]

    if isinstance(p, Broadcast):
        m = p.msg(xi)
        if not is_defined(m):
            return unvalued()
        cast = CastInProgress(cfg.universe, m, cfg.lb, cfg.db, p.body, p.body)
        return [("tau", p.label, SeqState(xi, cast))]

    if isinstance(p, Groupcast):
        dsts, m = p.dests(xi), p.msg(xi)
        if not is_defined(dsts, m):
            return unvalued()
        cast = CastInProgress(frozenset(dsts), m, cfg.lg, cfg.dg, p.body, p.body)
        return [("tau", p.label, SeqState(xi, cast))]

    if isinstance(p, Unicast):
        dest, m = p.dest(xi), p.msg(xi)
        if not is_defined(dest, m):
            return unvalued()
        cast = CastInProgress(frozenset({dest}), m, cfg.lu, cfg.du,
                              p.then, p.otherwise)
        return [("tau", p.label, SeqState(xi, cast))]

    if isinstance(p, CastInProgress):
        if p.n == 0:
            cont = p.then if p.dests else p.otherwise
            return [("starcast", p.dests, p.msg, SeqState(xi, cont))]

        def builder(r, _p=p, _xi=xi):
            xi2 = _xi.advance()
            shrunk = _p.dests & frozenset(r)
            out = [SeqState(xi2, CastInProgress(shrunk, _p.msg, _p.n - 1, _p.o,
                                                _p.then, _p.otherwise))]
            if _p.o >= 1:
                out.append(SeqState(xi2, CastInProgress(shrunk, _p.msg, _p.n,
                                                        _p.o - 1, _p.then,
                                                        _p.otherwise)))
            return out

        return [("caststep", W, builder)]

    if isinstance(p, Send):
        m = p.msg(xi)
        if not is_defined(m):
            return unvalued()
        return [("send", m, SeqState(xi, p.body)),
                ("wait", WS, SeqState(xi.advance(), p))]

    if isinstance(p, Deliver):
        d = p.data(xi)
        if not is_defined(d):
            return unvalued()
        return [("deliver", d, SeqState(xi, p.body))]

    if isinstance(p, Receive):
        def handler(m, _xi=xi, _p=p):
            return SeqState(_xi.set(_p.var, m), _p.body)

        return [("recv", handler),
                ("wait", WR, SeqState(xi.advance(), p))]

    if isinstance(p, Assign):
        v = p.expr(xi)
        if not is_defined(v):
            return unvalued()
        return [("tau", p.label, SeqState(xi.set(p.var, v), p.body))]

    if isinstance(p, Guard):
        exts = list(p.guard(xi))
        if not exts:
            return [("wait", W, SeqState(xi.advance(), p))]
        return [("tau", p.label, SeqState(xi2, p.body)) for xi2 in exts]

    if isinstance(p, Choice):
        waits = []
        out = []
        all_wait = True
        for alt in p.alternatives:
            ts = step_sequential(table, cfg, SeqState(xi, alt))
            found_wait = False
            for t in ts:
                if t[0] == "wait":
                    found_wait = True
                    waits.append(t[1])
                else:
                    out.append(t)
            all_wait = all_wait and found_wait
        if all_wait and waits:
            kind = waits[0]
            for wk in waits[1:]:
                kind = wait_meet(kind, wk)
            out.append(("wait", kind, SeqState(xi.advance(), p)))
        return out

    if isinstance(p, Call):
        vals = p.args(xi)
        if not is_defined(*vals):
            return unvalued()
        pdef = table.lookup(p.name)
        if len(vals) != len(pdef.params):
            raise ModelError(f"arity mismatch calling {p.name}")
        inner_val = Valuation(dict(zip(pdef.params, vals))).set("now", xi.now)
        inner = step_sequential(table, cfg, SeqState(inner_val, pdef.body))
        out = []
        for t in inner:
            if t[0] == "wait":
                out.append(("wait", t[1], SeqState(xi.advance(), p)))
            else:
                out.append(t)
        return out

    raise ModelError(f"cannot step process node {p!r}")


# ---------------------------------------------------------------------------
# Parallel composition (left-associative list; messages flow right to left)

class ParState:
    __slots__ = ("parts", "_canon")

    def __init__(self, parts):
        self.parts = tuple(parts)
        self._canon = None

    def canon(self):
        if self._canon is None:
            self._canon = tuple(s.canon() for s in self.parts)
        return self._canon

    def __eq__(self, other):
        return isinstance(other, ParState) and self.canon() == other.canon()

    def __hash__(self):
        return hash(self.canon())

    def __repr__(self):
        return " <<| ".join(repr(s) for s in self.parts)


def step_parallel(table: ProcessTable, cfg: AlgebraConfig, state: ParState):
    n = len(state.parts)
    if n == 1:
        seq = state.parts[0]
        out = []
        for t in step_sequential(table, cfg, seq):
            out.append(_lift_seq(t, lambda s: ParState((s,))))
        return out

    left = ParState(state.parts[:-1])
    right = state.parts[-1]
    ts_left = step_parallel(table, cfg, left)
    ts_right = [_lift_seq(t, lambda s: s) for t in step_sequential(table, cfg, right)]

    def mk(lstate, rstate):
        lparts = lstate.parts if isinstance(lstate, ParState) else (lstate,)
        rseq = rstate if isinstance(rstate, SeqState) else rstate.parts[0]
        return ParState(lparts + (rseq,))

    out = []
    # Rule p-al: anything from the left except receive and time steps.
    for t in ts_left:
        if t[0] in ("tau", "starcast", "send", "deliver"):
            out.append((*t[:-1], mk(t[-1], right)))
    # Rule p-ar: anything from the right except send and time steps.
    for t in ts_right:
        if t[0] in ("tau", "starcast", "deliver"):
            out.append((*t[:-1], mk(left, t[-1])))
        elif t[0] == "recv":
            handler = t[1]
            out.append(("recv",
                        lambda m, _h=handler: mk(left, _h(m))))
    # Rule p-a: receive of the left synchronises with send of the right.
    recv_left = [t for t in ts_left if t[0] == "recv"]
    for t in ts_right:
        if t[0] == "send":
            m, rtarget = t[1], t[2]
            for r in recv_left:
                out.append(("tau", "sync", mk(r[1](m), rtarget)))
    # Rules p-w, p-tl, p-tr, p-t: combine time steps with the partial table.
    time_left = [t for t in ts_left if t[0] in ("wait", "caststep")]
    time_right = [t for t in ts_right if t[0] in ("wait", "caststep")]
    for tl in time_left:
        for tr in time_right:
            kind = parl_combine(tl[1], tr[1])
            if kind is UNDEFINED:
                continue
            if tl[0] == "wait" and tr[0] == "wait":
                out.append(("wait", kind, mk(tl[2], tr[2])))
            elif tl[0] == "caststep" and tr[0] == "wait":
                out.append(("caststep", kind,
                            lambda r, _b=tl[2], _q=tr[2]:
                            [mk(s, _q) for s in _b(r)]))
            elif tl[0] == "wait" and tr[0] == "caststep":
                out.append(("caststep", kind,
                            lambda r, _p=tl[2], _b=tr[2]:
                            [mk(_p, s) for s in _b(r)]))
            else:
                out.append(("caststep", kind,
                            lambda r, _bl=tl[2], _br=tr[2]:
                            [mk(sl, sr) for sl in _bl(r) for sr in _br(r)]))
    return out


def _lift_seq(t, wrap):
    if t[0] == "recv":
        handler = t[1]
        return ("recv", lambda m, _h=handler: wrap(_h(m)))
    if t[0] == "caststep":
        builder = t[2]
        return ("caststep", t[1], lambda r, _b=builder: [wrap(s) for s in _b(r)])
    return (*t[:-1], wrap(t[-1]))


# ---------------------------------------------------------------------------
# Node and network expressions

class NodeState:
    __slots__ = ("ip", "rng", "par", "_canon")

    def __init__(self, ip, rng, par: ParState):
        self.ip = ip
        self.rng = frozenset(rng)
        self.par = par
        self._canon = None

    def with_par(self, par):
        return NodeState(self.ip, self.rng, par)

    def with_range(self, rng):
        return NodeState(self.ip, frozenset(rng), self.par)

    def canon(self):
        if self._canon is None:
            self._canon = (self.ip, tuple(sorted(self.rng)), self.par.canon())
        return self._canon

    def __eq__(self, other):
        return isinstance(other, NodeState) and self.canon() == other.canon()

    def __hash__(self):
        return hash(self.canon())


class NetState:
    __slots__ = ("nodes", "_canon", "_hash")

    def __init__(self, nodes):
        self.nodes = tuple(sorted(nodes, key=lambda n: n.ip))
        self._canon = None
        self._hash = None

    def replace(self, **by_ip):
        return NetState(tuple(by_ip.get(n.ip, n) for n in self.nodes))

    def node(self, ip):
        for n in self.nodes:
            if n.ip == ip:
                return n
        raise KeyError(ip)

    @property
    def now(self):
        return self.nodes[0].par.parts[0].val.now

    def canon(self):
        if self._canon is None:
            self._canon = tuple(n.canon() for n in self.nodes)
        return self._canon

    def digest(self):
        import hashlib
        return hashlib.sha256(repr(self.canon()).encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, NetState) and self.canon() == other.canon()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.canon())
        return self._hash


# Node-level transition tags:
#   ("tau", detail, node'), ("deliverat", ip, data, node'),
#   ("cast", dsts, msg, node'), ("recvable", handler),
#   ("tick", [node' ...])

def step_node(table: ProcessTable, cfg: AlgebraConfig, node: NodeState):
    out = []
    ticks = []
    for t in step_parallel(table, cfg, node.par):
        tag = t[0]
        if tag == "tau":
            out.append(("tau", t[1], node.with_par(t[2])))
        elif tag == "starcast":
            out.append(("cast", t[1], t[2], node.with_par(t[3])))
        elif tag == "deliver":
            out.append(("deliverat", node.ip, t[1], node.with_par(t[2])))
        elif tag == "recv":
            handler = t[1]
            out.append(("recvable",
                        lambda m, _h=handler, _n=node: _n.with_par(_h(m))))
        elif tag == "send":
            pass  # dropped: send cannot leave a node
        elif tag == "wait":
            ticks.append(node.with_par(t[2]))
        elif tag == "caststep":
            ticks.extend(node.with_par(p) for p in t[2](node.rng))
    if ticks:
        out.append(("tick", ticks))
    return out


class SemanticsError(Exception):
    """A violation of a meta-theorem detected at run time (engine bug)."""


class NetStepper:
    """Computes network transitions with per-node memoisation."""

    def __init__(self, table: ProcessTable, cfg: AlgebraConfig):
        self.table = table
        self.cfg = cfg
        self._cache: dict = {}

    def node_transitions(self, node: NodeState):
        key = node.canon()
        ts = self._cache.get(key)
        if ts is None:
            ts = step_node(self.table, self.cfg, node)
            self._cache[key] = ts
        return ts

    def network_transitions(self, net: NetState):
        """All protocol transitions: taus, delivers, completed casts, tick.

        Returned as (kind, actor, detail, successors) tuples where
        successors is a list of NetStates (singleton except for tick).
        """
        per_node = {n.ip: self.node_transitions(n) for n in net.nodes}
        out = []
        all_tick = True
        tick_options = []
        for n in net.nodes:
            ticks = None
            for t in per_node[n.ip]:
                tag = t[0]
                if tag == "tau":
                    out.append(("tau", n.ip, t[1], [net.replace(**{n.ip: t[2]})]))
                elif tag == "deliverat":
                    out.append(("deliverat", n.ip, t[2], [net.replace(**{n.ip: t[3]})]))
                elif tag == "cast":
                    succ = self._complete_cast(net, n, t[1], t[2], t[3], per_node)
                    if succ is not None:
                        out.append(("cast", n.ip, (t[1], t[2]), [succ]))
                elif tag == "tick":
                    ticks = t[1]
            if ticks is None:
                all_tick = False
            else:
                tick_options.append((n.ip, ticks))
        if all_tick:
            succs = [net]
            for ip, options in tick_options:
                succs = [s.replace(**{ip: opt}) for s in succs for opt in options]
            out.append(("tick", "net", None, succs))
        return out

    def _complete_cast(self, net, caster, dsts, msg, caster_after, per_node):
        """Synchronise a completed cast with arrivals at every other node.

        Nodes in the destination set must receive; all others miss.  If a
        destination is momentarily unable to receive, the cast is not
        enabled at this instant (it stays available for a later one).
        """
        updates = {caster.ip: caster_after}
        for n in net.nodes:
            if n.ip == caster.ip or n.ip not in dsts:
                continue
            handler = None
            for t in per_node[n.ip]:
                if t[0] == "recvable":
                    handler = t[1]
                    break
            if handler is None:
                return None
            updates[n.ip] = handler(msg)
        return net.replace(**updates)

    def inject_newpkt(self, net: NetState, ip, msg):
        """Deliver a fresh client packet to one node's receive handler."""
        for t in self.node_transitions(net.node(ip)):
            if t[0] == "recvable":
                return net.replace(**{ip: t[1](msg)})
        return None

    def apply_connect(self, net: NetState, a, b):
        na, nb = net.node(a), net.node(b)
        return net.replace(**{a: na.with_range(na.rng | {b}),
                              b: nb.with_range(nb.rng | {a})})

    def apply_disconnect(self, net: NetState, a, b):
        na, nb = net.node(a), net.node(b)
        return net.replace(**{a: na.with_range(na.rng - {b}),
                              b: nb.with_range(nb.rng - {a})})


# ---------------------------------------------------------------------------
# Classification (executable form of the wait-action characterisation)

@dataclass(frozen=True)
class ActionProfile:
    has_receive: bool
    has_send: bool
    has_other: bool
    wait_kind: Optional[WaitKind]
    cast_wait_kind: Optional[WaitKind]
    has_inb: bool

    @property
    def time_kind(self):
        return self.wait_kind or self.cast_wait_kind


def classify(table: ProcessTable, cfg: AlgebraConfig, state) -> ActionProfile:
    if isinstance(state, SeqState):
        ts = step_sequential(table, cfg, state)
    elif isinstance(state, ParState):
        ts = step_parallel(table, cfg, state)
    else:
        raise TypeError("classify expects a SeqState or ParState")
    has_recv = any(t[0] == "recv" for t in ts)
    has_send = any(t[0] == "send" for t in ts)
    has_inb = any(t[0] in ("tau", "starcast", "deliver") for t in ts)
    has_other = has_inb or any(t[0] == "caststep" for t in ts)
    waits = sorted({t[1] for t in ts if t[0] == "wait"}, key=lambda w: w.value)
    casts = sorted({t[1] for t in ts if t[0] == "caststep"}, key=lambda w: w.value)
    if len(waits) > 1 or len(casts) > 1:
        raise SemanticsError(f"state offers several wait kinds: {waits} {casts}")
    return ActionProfile(has_recv, has_send, has_other,
                         waits[0] if waits else None,
                         casts[0] if casts else None,
                         has_inb)


# ---------------------------------------------------------------------------
# Debug pretty-printer

def render_proc(p) -> str:
    if isinstance(p, CastInProgress):
        dsts = "{" + ",".join(sorted(map(str, p.dests))) + "}"
        return (f"*cast({dsts},{p.msg})[{p.n},{p.o}]."
                f"{render_proc(p.then)} |> {render_proc(p.otherwise)}")
    if isinstance(p, Call):
        return f"{p.name}(..)"
    if isinstance(p, Guard):
        return f"[{p.label}] {render_proc(p.body)}"
    if isinstance(p, Assign):
        return f"[[{p.var} := <{p.label}>]] {render_proc(p.body)}"
    if isinstance(p, Choice):
        return " + ".join(render_proc(a) for a in p.alternatives)
    if isinstance(p, Broadcast):
        return f"broadcast(<{p.label}>).{render_proc(p.body)}"
    if isinstance(p, Groupcast):
        return f"groupcast(<{p.label}>).{render_proc(p.body)}"
    if isinstance(p, Unicast):
        return (f"unicast(<{p.label}>).{render_proc(p.then)}"
                f" |> {render_proc(p.otherwise)}")
    if isinstance(p, Send):
        return f"send(<{p.label}>).{render_proc(p.body)}"
    if isinstance(p, Deliver):
        return f"deliver(<{p.label}>).{render_proc(p.body)}"
    if isinstance(p, Receive):
        return f"receive({p.var}).{render_proc(p.body)}"
    return repr(p)
