"""Maximal-progress execution and bounded exhaustive exploration.

Scenario events (topology changes and packet injections) fire as
instantaneous actions in the time slice they are scheduled for, ordered
freely among themselves and the protocol's internal actions.  A time step
is only possible when no instantaneous non-blocking action and no due
event remains: maximal progress is structural, and the tick/instantaneous
dichotomy is asserted on every state rather than assumed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .aodv import data as D
from .aodv.model import AodvModel
from .semantics import NetState, NetStepper, SemanticsError
from .values import INFINITY, canon, t_add, t_leq

CONNECT = "connect"
DISCONNECT = "disconnect"
NEWPKT = "newpkt"


@dataclass(frozen=True)
class Event:
    at: int
    kind: str
    args: tuple

    def describe(self):
        return f"{self.kind}({','.join(map(str, self.args))})"


@dataclass
class Scenario:
    name: str
    nodes: tuple
    initial_links: frozenset  # of frozenset pairs
    preset: str = "desk"
    variant: str = "rfc"
    events: tuple = ()
    max_ticks: int = 50
    max_states: int = 500_000
    notes: str = ""

    def validate(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate node addresses")
        for link in self.initial_links:
            if not set(link) <= known or len(link) != 2:
                raise ValueError(f"bad link {set(link)}")
        last = 0
        for ev in self.events:
            if ev.at is INFINITY or ev.at < last:
                raise ValueError("event times must be finite and non-decreasing")
            last = ev.at
            ips = [a for a in ev.args if isinstance(a, str) and a in known]
            if ev.kind in (CONNECT, DISCONNECT):
                if len(ev.args) != 2 or not set(ev.args) <= known:
                    raise ValueError(f"bad event {ev}")
            elif ev.kind == NEWPKT:
                if len(ev.args) != 3 or ev.args[0] not in known \
                        or ev.args[2] not in known:
                    raise ValueError(f"bad event {ev}")
            else:
                raise ValueError(f"unknown event kind {ev.kind}")
        return self


def scenario_model(scenario: Scenario, variant=None, skip_expiry=False,
                   rrep_reverse_precursor=False) -> AodvModel:
    from .aodv.model import build_model
    cfg = D.preset(scenario.preset)
    return build_model(frozenset(scenario.nodes), cfg,
                       variant or scenario.variant,
                       rrep_reverse_precursor=rrep_reverse_precursor,
                       skip_expiry=skip_expiry)


def initial_state(model: AodvModel, scenario: Scenario) -> NetState:
    nodes = []
    for ip in scenario.nodes:
        rng = {b for link in scenario.initial_links
               for a, b in [sorted(link)] if a == ip} | \
              {a for link in scenario.initial_links
               for a, b in [sorted(link)] if b == ip}
        nodes.append(model.build_node(ip, rng))
    return NetState(nodes)


# ---------------------------------------------------------------------------
# Enabled actions under maximal progress

@dataclass(frozen=True)
class Action:
    kind: str           # tau | deliverat | cast | event | tick
    actor: str          # node ip, "env" or "net"
    detail: object
    successor: NetState

    def sort_key(self):
        order = {"tau": 0, "cast": 1, "deliverat": 2, "event": 3, "tick": 4}
        return (order[self.kind], str(self.actor), repr(canon_detail(self.detail)))

    def label(self):
        return f"{self.kind} {canon_detail(self.detail)}"


def canon_detail(detail):
    if isinstance(detail, tuple):
        return tuple(canon_detail(x) for x in detail)
    if isinstance(detail, frozenset):
        return canon(detail)
    if hasattr(detail, "canon"):
        return detail.canon()
    return detail


class Engine:
    def __init__(self, model: AodvModel, scenario: Scenario):
        self.model = model
        self.scenario = scenario.validate()
        self.stepper = NetStepper(model.table, model.algebra)

    def enabled(self, net: NetState, fired: int):
        """All enabled instantaneous actions, or the tick actions.

        `fired` is a bitmask of already-fired scenario events.  The
        tick/instantaneous dichotomy is asserted against the transition
        set itself; an empty result is a semantics bug and raises.
        """
        now = net.now
        ts = self.stepper.network_transitions(net)
        inb = []
        ticks = []
        for (kind, actor, detail, succs) in ts:
            if kind == "tick":
                ticks = succs
            else:
                inb.append(Action(kind, actor, detail, succs[0]))
        has_tick = bool(ticks)
        # The dichotomy: time can pass iff nothing instantaneous is possible.
        # A cast blocked on a busy receiver is re-derived through the wait
        # side, so the assertion uses the full instantaneous set.
        if has_tick == bool(inb):
            raise SemanticsError(
                f"tick/instantaneous dichotomy violated at t={now}: "
                f"tick={has_tick} instantaneous={[a.label() for a in inb]}")
        due = []
        for i, ev in enumerate(self.scenario.events):
            if fired & (1 << i) or ev.at > now:
                continue
            succ = self._fire(net, ev)
            if succ is not None:
                due.append(Action("event", "env", (i, ev), succ))
        if inb or due:
            return inb + due
        return [Action("tick", "net", i, s) for i, s in enumerate(ticks)]

    def _fire(self, net, ev: Event):
        if ev.kind == CONNECT:
            return self.stepper.apply_connect(net, *ev.args)
        if ev.kind == DISCONNECT:
            return self.stepper.apply_disconnect(net, *ev.args)
        ip, data, dip = ev.args
        return self.stepper.inject_newpkt(net, ip, D.NewPkt(data, dip))


# ---------------------------------------------------------------------------
# Single runs

@dataclass(frozen=True)
class TraceStep:
    t: int
    actor: str
    action: str
    detail: object

    def render(self):
        return (f"t={self.t} actor={self.actor} action={self.action} "
                f"detail={canon_detail(self.detail)}")


@dataclass
class Trace:
    scenario: str
    seed: int
    steps: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    complete: bool = True
    final: Optional[NetState] = None

    def render(self):
        out = [s.render() for s in self.steps]
        for f in self.flags:
            out.append(f"flag {f}")
        if not self.complete:
            out.append("INCOMPLETE")
        return "\n".join(out)

    def visible(self):
        """The externally visible actions: casts and deliveries."""
        return tuple((s.action, canon_detail(s.detail)) for s in self.steps
                     if s.action in ("cast", "deliverat"))


class _PostulateWatch:
    """Checks the two real-time postulates along a single run.

    Transmission plus queue residence of a message is expected to stay
    within NODE_TRAVERSAL_TIME, and the age of a route request within
    NET_TRAVERSAL_TIME; violating traces are flagged, not rejected.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.tx_start: dict = {}
        self.queues: dict = {}
        self.rreq_origin: dict = {}
        self.sent: set = set()
        self.flags: list = []

    def before(self, net, action):
        ip = action.actor
        if action.kind == "tau":
            node_pre = net.node(ip)
            node_post = action.successor.node(ip)
            pre_proc = node_pre.par.parts[0].proc
            post_proc = node_post.par.parts[0].proc
            from .syntax import CastInProgress
            if not isinstance(pre_proc, CastInProgress) \
                    and isinstance(post_proc, CastInProgress):
                self.tx_start[ip] = (net.now, post_proc.msg)
                m = post_proc.msg
                if isinstance(m, D.Rreq) and m.hops == 0 and m.oip == ip:
                    self.rreq_origin[(m.oip, m.rreqid)] = net.now
            if action.detail == "sync":
                q = self.queues.get(ip)
                if q:
                    msg, t0 = q.pop(0)
                    if t0 is not None and not t_leq(
                            net.now, t_add(t0, self.cfg.node_traversal_time)):
                        self.flags.append(
                            f"postulate-1 violated at {ip} t={net.now}")
                    if isinstance(msg, D.Rreq):
                        t1 = self.rreq_origin.get((msg.oip, msg.rreqid))
                        if t1 is not None and not t_leq(
                                net.now,
                                t_add(t1, self.cfg.net_traversal_time)):
                            self.flags.append(
                                f"postulate-2 violated at {ip} t={net.now}")
                    if msg is not None and canon(msg) not in self.sent:
                        self.flags.append(
                            f"handled message was never sent: {canon(msg)}")
        elif action.kind == "cast":
            dsts, msg = action.detail
            self.sent.add(canon(msg))
            started = self.tx_start.get(ip)
            t0 = started[0] if started else None
            for r in dsts:
                if r != ip and any(n.ip == r for n in net.nodes):
                    self.queues.setdefault(r, []).append((msg, t0))
        elif action.kind == "event" and action.detail[1].kind == NEWPKT:
            ip2 = action.detail[1].args[0]
            self.queues.setdefault(ip2, []).append((None, None))


def run(model: AodvModel, scenario: Scenario, seed: int,
        max_ticks=None) -> Trace:
    """One maximal run, choosing uniformly among enabled actions."""
    eng = Engine(model, scenario)
    rng = random.Random(seed)
    net = initial_state(model, scenario)
    watch = _PostulateWatch(model.cfg)
    trace = Trace(scenario.name, seed)
    fired = 0
    ticks = 0
    budget = max_ticks if max_ticks is not None else scenario.max_ticks
    while ticks < budget:
        actions = sorted(eng.enabled(net, fired), key=Action.sort_key)
        act = rng.choice(actions)
        watch.before(net, act)
        if act.kind == "event":
            fired |= 1 << act.detail[0]
            detail = act.detail[1].describe()
        elif act.kind == "tick":
            ticks += 1
            detail = None
        else:
            detail = act.detail
        trace.steps.append(TraceStep(net.now, act.actor, act.kind, detail))
        net = act.successor
    trace.flags = watch.flags
    trace.final = net
    # Truncated if scheduled events never got a chance to fire.
    trace.complete = all(fired & (1 << i) for i in range(len(scenario.events)))
    return trace


# ---------------------------------------------------------------------------
# Exhaustive exploration

@dataclass
class StateGraph:
    initial: str
    states: dict = field(default_factory=dict)   # digest -> NetState
    edges: list = field(default_factory=list)    # (pre, label, post)
    parents: dict = field(default_factory=dict)  # digest -> (pre, label)
    complete: bool = True

    def witness(self, digest):
        """Action labels along a shortest path from the initial state."""
        path = []
        cur = digest
        while cur != self.initial:
            pre, label = self.parents[cur]
            path.append(label)
            cur = pre
        return list(reversed(path))


def explore(model: AodvModel, scenario: Scenario,
            on_state: Optional[Callable] = None,
            on_edge: Optional[Callable] = None,
            max_states=None, workers: int = 1):
    """Breadth-first closure over all interleavings up to the bounds.

    `on_state(net)` and `on_edge(pre, action, post)` may return iterables
    of findings; everything returned is collected (as a set, so results
    do not depend on exploration order or worker count).
    """
    eng = Engine(model, scenario)
    net0 = initial_state(model, scenario)
    limit = max_states if max_states is not None else scenario.max_states

    graph = StateGraph(initial=_key_digest(net0, 0))
    graph.states[graph.initial] = net0
    findings = set()
    if on_state:
        findings.update(on_state(net0))

    visited = {(net0, 0): 0}
    frontier = [(net0, 0, 0)]
    while frontier:
        next_frontier = []
        expansions = [(net, fired, ticks, eng.enabled(net, fired))
                      for (net, fired, ticks) in frontier]
        for net, fired, ticks, actions in expansions:
            pre_key = _key_digest(net, fired)
            for act in sorted(actions, key=Action.sort_key):
                nfired = fired | (1 << act.detail[0]) \
                    if act.kind == "event" else fired
                nticks = ticks + (1 if act.kind == "tick" else 0)
                if nticks > scenario.max_ticks:
                    continue
                post = act.successor
                post_key = _key_digest(post, nfired)
                label = f"{act.actor}:{act.label()}"
                graph.edges.append((pre_key, label, post_key))
                if on_edge:
                    findings.update(on_edge(net, act, post))
                if (post, nfired) in visited:
                    continue
                if len(visited) >= limit:
                    graph.complete = False
                    continue
                visited[(post, nfired)] = nticks
                graph.states[post_key] = post
                graph.parents[post_key] = (pre_key, label)
                if on_state:
                    findings.update(on_state(post))
                next_frontier.append((post, nfired, nticks))
        frontier = next_frontier
    return graph, findings


def _key_digest(net, fired):
    return f"{net.digest()}:{fired:x}"
