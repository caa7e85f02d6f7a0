"""The AODV processes, in the faithful reading and the repaired variant.

Each specification line maps to one labelled micro-step so that traces,
monitors and the repair diff can reference lines directly (labels like
"aodv:26c" or "pkt:6b").  The repaired variant differs from the faithful
one in exactly six places:

  rreq:32   route requests are only forwarded by nodes holding a valid
            route to the originator (a drop alternative is added),
  aodv:26c  executed only when the next hop towards the packet's
            destination is a 1-hop neighbour,
  pkt:6b    same hop-count-1 condition,
  pkt:6c    removed,
  pkt:6d    removed,
  rrep:12d  removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..semantics import AlgebraConfig, NodeState, ParState, SeqState
from ..syntax import (Assign, Broadcast, Call, Choice, Deliver, Groupcast,
                      Guard, ModelError, ProcessTable, Receive, Send, Unicast,
                      Valuation)
from ..values import UNDEFINED, is_defined, t_add, t_leq, t_less, t_mul, t_sub
from . import data as D

RFC = "rfc"
REPAIRED = "repaired"

AODV_PARAMS = ("ip", "sn", "rt", "rreqs", "store")


def _aodv_args(xi):
    return tuple(xi.get(v) for v in AODV_PARAMS)


def _test(label, pred, body):
    """Guard that binds nothing: passes the valuation through when true."""
    return Guard(label, lambda xi, _p=pred: [xi] if _p(xi) else [], body)


def _set(label, var, fn, body):
    return Assign(label, var, fn, body)


@dataclass
class AodvModel:
    table: ProcessTable
    algebra: AlgebraConfig
    cfg: D.TimingConfig
    variant: str
    repair_diff: tuple = ()
    rrep_reverse_precursor: bool = False
    skip_expiry: bool = False

    def build_node(self, ip, initial_range) -> NodeState:
        """A node running AODV beside its message queue, at time zero."""
        main = SeqState(
            Valuation({"ip": ip, "sn": 1, "rt": D.EMPTY_RT,
                       "rreqs": D.EMPTY_RREQS, "store": D.EMPTY_STORE,
                       "now": 0}),
            Call(f"boot:{ip}:aodv", "AODV", _aodv_args))
        queue = SeqState(
            Valuation({"msgs": (), "now": 0}),
            Call(f"boot:{ip}:qmsg", "QMSG", lambda xi: (xi.get("msgs"),)))
        return NodeState(ip, frozenset(initial_range), ParState((main, queue)))


def build_model(universe, cfg: D.TimingConfig, variant: str = RFC,
                rrep_reverse_precursor: bool = False,
                skip_expiry: bool = False) -> AodvModel:
    if variant not in (RFC, REPAIRED):
        raise ModelError(f"unknown variant {variant!r}")
    repaired = variant == REPAIRED
    table = ProcessTable()
    diff = []

    def call_aodv(label):
        return Call(label, "AODV", _aodv_args)

    # -- shared expression helpers -----------------------------------------

    def exp_rt_now(xi):
        if skip_expiry:
            return xi.get("rt")
        return D.exp_rt(xi.get("rt"), xi.now, cfg.delete_period)

    def exp_store_now(xi):
        if skip_expiry:
            return xi.get("store")
        return D.exp_store(xi.get("store"), xi.now, cfg.rreq_retries)

    def exp_rreqs_now(xi):
        if skip_expiry:
            return xi.get("rreqs")
        return D.exp_rreqs(xi.get("rreqs"), xi.now)

    def neighbour_update(xi):
        r = D.entry(xi.get("sip"), 0, D.UNKNOWN, D.VALID, 1, xi.get("sip"),
                    frozenset(), t_add(xi.now, cfg.active_route_timeout))
        return D.update(xi.get("rt"), r)

    def set_time(dip_of, t_of):
        def run(xi):
            dip = dip_of(xi)
            t = t_of(xi)
            if not is_defined(dip, t):
                return xi.get("rt")
            return D.set_time_rt(xi.get("rt"), dip, t)
        return run

    def now_plus(amount):
        return lambda xi: t_add(xi.now, amount)

    def broken_dests(target_of):
        """Destinations routed over a next hop that failed to respond."""
        def run(xi):
            rt = xi.get("rt")
            tgt = target_of(xi)
            if not is_defined(tgt):
                return D.EMPTY_DESTS
            pairs = [(rip, D.inc(D.sqn(rt, rip)))
                     for rip in sorted(D.vD(rt)) if D.nhop(rt, rip) == tgt]
            return D.dest_map(pairs)
        return run

    def invalidate_dests(xi):
        return D.invalidate(xi.get("rt"), xi.get("dests"),
                            t_add(xi.now, cfg.delete_period))

    def reset_dests(xi):
        return D.reset_retries(xi.get("store"), xi.get("dests"))

    def union_precs(xi):
        rt = xi.get("rt")
        out = set()
        for rip, _ in xi.get("dests").items():
            p = D.precs(rt, rip)
            if is_defined(p):
                out |= p
        return frozenset(out)

    def dests_with_precs(xi):
        rt = xi.get("rt")
        pairs = [(rip, rsn) for (rip, rsn) in xi.get("dests").items()
                 if is_defined(D.precs(rt, rip)) and D.precs(rt, rip)]
        return D.dest_map(pairs)

    def rerr_msg(xi):
        return D.Rerr(xi.get("dests"), xi.get("ip"))

    def error_branch(prefix, target_of, cont):
        """RERR generation after an unsuccessful unicast (shared shape)."""
        return _set(
            f"{prefix}:prune", "rt", exp_rt_now,
            _set(f"{prefix}:dests", "dests", broken_dests(target_of),
                 _set(f"{prefix}:invalidate", "rt", invalidate_dests,
                      _set(f"{prefix}:reset", "store", reset_dests,
                           _set(f"{prefix}:pre", "pre", union_precs,
                                _set(f"{prefix}:notify", "dests", dests_with_precs,
                                     Groupcast(f"{prefix}:rerr",
                                               lambda xi: xi.get("pre"),
                                               rerr_msg, cont)))))))

    # -- Process 1: the basic routine ---------------------------------------

    def match_newpkt(xi):
        m = xi.get("msg")
        if isinstance(m, D.NewPkt):
            return [xi.set_many({"data": m.data, "dip": m.dip})]
        return []

    def match_pkt(xi):
        m = xi.get("msg")
        if isinstance(m, D.Pkt):
            return [xi.set_many({"data": m.data, "dip": m.dip, "oip": m.sip})]
        return []

    def match_rreq(xi):
        m = xi.get("msg")
        if isinstance(m, D.Rreq):
            return [xi.set_many({"hops": m.hops, "rreqid": m.rreqid,
                                 "dip": m.dip, "dsn": m.dsn, "dsk": m.dsk,
                                 "oip": m.oip, "osn": m.osn, "sip": m.sip})]
        return []

    def match_rrep(xi):
        m = xi.get("msg")
        if isinstance(m, D.Rrep):
            return [xi.set_many({"hops": m.hops, "dip": m.dip, "dsn": m.dsn,
                                 "oip": m.oip, "ltime": m.ltime,
                                 "sip": m.sip})]
        return []

    def match_rerr(xi):
        m = xi.get("msg")
        if isinstance(m, D.Rerr):
            return [xi.set_many({"dests": m.dests, "sip": m.sip})]
        return []

    def queued_valid(xi):
        """Bind dip to each queued destination with a valid route."""
        store, rt = xi.get("store"), xi.get("rt")
        return [xi.set("dip", dip)
                for dip in sorted(D.qD(store) & D.vD(rt))]

    def queued_for_discovery(xi):
        store, rt = xi.get("store"), xi.get("rt")
        out = []
        for dip in sorted(D.qD(store) - D.vD(rt)):
            pending, when = D.fD(store, dip), D.sel_time(store, dip)
            if is_defined(pending, when) and pending < cfg.rreq_retries \
                    and t_leq(when, xi.now):
                out.append(xi.set("dip", dip))
        return out

    def head_of_queue(xi):
        q = D.sel_queue(xi.get("store"), xi.get("dip"))
        if not is_defined(q) or not q:
            return UNDEFINED
        return q[0]

    def forward_pkt_msg(xi):
        return D.Pkt(xi.get("data"), xi.get("dip"), xi.get("ip"))

    def nhop_dip(xi):
        return D.nhop(xi.get("rt"), xi.get("dip"))

    def nhop_oip(xi):
        return D.nhop(xi.get("rt"), xi.get("oip"))

    def backoff_time(xi):
        k = D.fD(xi.get("store"), xi.get("dip"))
        if not is_defined(k):
            return UNDEFINED
        return t_add(xi.now, t_mul(2 ** k, cfg.net_traversal_time))

    def discovery_rreq(xi):
        rt = xi.get("rt")
        return D.Rreq(0, xi.get("rreqid"), xi.get("dip"),
                      D.sqn(rt, xi.get("dip")), D.sqnf(rt, xi.get("dip")),
                      xi.get("ip"), xi.get("sn"), xi.get("ip"))

    if repaired:
        send_26c = set_time(
            lambda xi: nhop_dip(xi)
            if D.dhops(xi.get("rt"), nhop_dip(xi)) == 1 else UNDEFINED,
            now_plus(cfg.active_route_timeout))
        diff.append(("aodv:26c", "conditional on a 1-hop route to the next hop"))
    else:
        send_26c = set_time(nhop_dip, now_plus(cfg.active_route_timeout))

    send_branch = _set(
        "aodv:23", "data", head_of_queue,
        Unicast("aodv:24", nhop_dip, forward_pkt_msg,
                _set("aodv:25", "rt", exp_rt_now,
                     _set("aodv:26", "store",
                          lambda xi: D.drop(xi.get("dip"), xi.get("store")),
                          _set("aodv:26b", "rt",
                               set_time(lambda xi: xi.get("dip"),
                                        now_plus(cfg.active_route_timeout)),
                               _set("aodv:26c", "rt", send_26c,
                                    call_aodv("aodv:27"))))),
                error_branch("aodv:29b", nhop_dip, call_aodv("aodv:33c"))))

    discovery_branch = _set(
        "aodv:34b", "store",
        lambda xi: D.inc_retries(xi.get("store"), xi.get("dip")),
        _set("aodv:35", "store",
             lambda xi: D.set_time_store(xi.get("store"), xi.get("dip"),
                                         backoff_time(xi)),
             _set("aodv:35b", "rt",
                  set_time(lambda xi: xi.get("dip"),
                           now_plus(t_mul(2, cfg.net_traversal_time))),
                  _set("aodv:36", "sn", lambda xi: D.inc(xi.get("sn")),
                       _set("aodv:37", "rreqid",
                            lambda xi: D.nrreqid(xi.get("rreqs"), xi.get("ip")),
                            _set("aodv:38b", "rreqs",
                                 lambda xi: xi.get("rreqs").add(
                                     xi.get("ip"), xi.get("rreqid"),
                                     t_add(xi.now, cfg.path_discovery_time)),
                                 Broadcast("aodv:39", discovery_rreq,
                                           call_aodv("aodv:40"))))))))

    dispatch = Choice("aodv:4", (
        Guard("aodv:5", match_newpkt,
              Call("aodv:6", "NEWPKT",
                   lambda xi: (xi.get("data"), xi.get("dip")) + _aodv_args(xi))),
        Guard("aodv:7", match_pkt,
              Call("aodv:8", "PKT",
                   lambda xi: (xi.get("data"), xi.get("dip"), xi.get("oip"))
                   + _aodv_args(xi))),
        Guard("aodv:9", match_rreq,
              _set("aodv:10", "rt", neighbour_update,
                   Call("aodv:11", "RREQ",
                        lambda xi: (xi.get("hops"), xi.get("rreqid"),
                                    xi.get("dip"), xi.get("dsn"),
                                    xi.get("dsk"), xi.get("oip"),
                                    xi.get("osn"), xi.get("sip"))
                        + _aodv_args(xi)))),
        Guard("aodv:12", match_rrep,
              _set("aodv:14", "rt", neighbour_update,
                   Call("aodv:15", "RREP",
                        lambda xi: (xi.get("hops"), xi.get("dip"),
                                    xi.get("dsn"), xi.get("oip"),
                                    xi.get("ltime"), xi.get("sip"))
                        + _aodv_args(xi)))),
        Guard("aodv:17", match_rerr,
              _set("aodv:18", "rt", neighbour_update,
                   Call("aodv:19", "RERR",
                        lambda xi: (xi.get("dests"), xi.get("sip"))
                        + _aodv_args(xi)))),
    ))

    aodv_body = _set(
        "aodv:1", "rt", exp_rt_now,
        _set("aodv:1q", "store", exp_store_now,
             Choice("aodv:choice", (
                 Receive("aodv:2", "msg",
                         _set("aodv:3", "rt", exp_rt_now, dispatch)),
                 Guard("aodv:22", queued_valid, send_branch),
                 Guard("aodv:34", queued_for_discovery, discovery_branch),
             ))))
    table.define("AODV", AODV_PARAMS, aodv_body)

    # -- Process 2: newly injected data packets -----------------------------

    newpkt_body = Choice("newpkt:0", (
        _test("newpkt:1", lambda xi: xi.get("dip") == xi.get("ip"),
              Deliver("newpkt:2", lambda xi: xi.get("data"),
                      call_aodv("newpkt:3"))),
        _test("newpkt:4", lambda xi: xi.get("dip") != xi.get("ip"),
              _set("newpkt:5", "store",
                   lambda xi: D.add(xi.get("data"), xi.get("dip"),
                                    xi.get("store")),
                   call_aodv("newpkt:6"))),
    ))
    table.define("NEWPKT", ("data", "dip") + AODV_PARAMS, newpkt_body)

    # -- Process 3: data packets received via the protocol ------------------

    def pkt_6b(xi):
        if repaired and D.dhops(xi.get("rt"), nhop_dip(xi)) != 1:
            return xi.get("rt")
        return set_time(nhop_dip, now_plus(cfg.active_route_timeout))(xi)

    if repaired:
        diff.append(("pkt:6b", "conditional on a 1-hop route to the next hop"))
        diff.append(("pkt:6c", "removed"))
        diff.append(("pkt:6d", "removed"))

    after_forward = call_aodv("pkt:6e")
    if not repaired:
        after_forward = _set(
            "pkt:6c", "rt",
            set_time(lambda xi: xi.get("oip"),
                     now_plus(cfg.active_route_timeout)),
            _set("pkt:6d", "rt",
                 set_time(nhop_oip, now_plus(cfg.active_route_timeout)),
                 after_forward))
    after_forward = _set(
        "pkt:6a", "rt",
        set_time(lambda xi: xi.get("dip"), now_plus(cfg.active_route_timeout)),
        _set("pkt:6b", "rt", pkt_6b, after_forward))

    pkt_body = Choice("pkt:0", (
        _test("pkt:1", lambda xi: xi.get("dip") == xi.get("ip"),
              Deliver("pkt:2", lambda xi: xi.get("data"),
                      call_aodv("pkt:2a"))),
        _test("pkt:3", lambda xi: xi.get("dip") != xi.get("ip"),
              Choice("pkt:4", (
                  _test("pkt:5",
                        lambda xi: xi.get("dip") in D.vD(xi.get("rt")),
                        Unicast("pkt:6", nhop_dip,
                                lambda xi: D.Pkt(xi.get("data"), xi.get("dip"),
                                                 xi.get("oip")),
                                after_forward,
                                error_branch("pkt:7", nhop_dip,
                                             call_aodv("pkt:13a")))),
                  _test("pkt:14",
                        lambda xi: xi.get("dip") in D.iD(xi.get("rt")),
                        _set("pkt:16", "dests",
                             lambda xi: D.dest_map([(xi.get("dip"),
                                                     D.sqn(xi.get("rt"),
                                                           xi.get("dip")))]),
                             _set("pkt:17", "pre",
                                  lambda xi: D.precs(xi.get("rt"),
                                                     xi.get("dip")),
                                  _set("pkt:19", "rt",
                                       set_time(lambda xi: xi.get("dip"),
                                                now_plus(cfg.delete_period)),
                                       Groupcast("pkt:20",
                                                 lambda xi: xi.get("pre"),
                                                 rerr_msg,
                                                 call_aodv("pkt:20a")))))),
                  _test("pkt:21",
                        lambda xi: xi.get("dip") not in D.kD(xi.get("rt")),
                        call_aodv("pkt:21a")),
              ))),
    ))
    table.define("PKT", ("data", "dip", "oip") + AODV_PARAMS, pkt_body)

    # -- Process 4: route request handling ----------------------------------

    def reverse_route(xi):
        r = D.entry(xi.get("oip"), xi.get("osn"), D.KNOWN, D.VALID,
                    xi.get("hops") + 1, xi.get("sip"), frozenset(),
                    t_add(xi.now, cfg.active_route_timeout))
        return D.update(xi.get("rt"), r)

    def reverse_route_min_lifetime(xi):
        # now + 2*NET_TT - 2*(hops+1)*NODE_TT; no extension when the
        # subtraction has no defined value at small clocks.
        base = t_add(xi.now, t_mul(2, cfg.net_traversal_time))
        t = t_sub(base, t_mul(2 * (xi.get("hops") + 1),
                              cfg.node_traversal_time))
        if not is_defined(t):
            return xi.get("rt")
        return D.set_time_rt(xi.get("rt"), xi.get("oip"), t)

    def fresh_enough(xi):
        rt, dip = xi.get("rt"), xi.get("dip")
        return (dip in D.vD(rt) and t_leq(xi.get("dsn"), D.sqn(rt, dip))
                and D.sqnf(rt, dip) == D.KNOWN)

    def dest_rrep(xi):
        return D.Rrep(0, xi.get("dip"), xi.get("sn"), xi.get("oip"),
                      cfg.my_route_timeout, xi.get("ip"))

    def intermediate_rrep(xi):
        rt, dip = xi.get("rt"), xi.get("dip")
        remaining = t_sub(D.ltime(rt, dip), xi.now)
        return D.Rrep(D.dhops(rt, dip), dip, D.sqn(rt, dip), xi.get("oip"),
                      remaining, xi.get("ip"))

    def forwarded_rreq(xi):
        rt = xi.get("rt")
        return D.Rreq(xi.get("hops") + 1, xi.get("rreqid"), xi.get("dip"),
                      max(D.sqn(rt, xi.get("dip")), xi.get("dsn")),
                      xi.get("dsk"), xi.get("oip"), xi.get("osn"),
                      xi.get("ip"))

    forward_leg = Broadcast("rreq:34", forwarded_rreq, call_aodv("rreq:35"))
    if repaired:
        diff.append(("rreq:32", "forwarding requires a valid route to the "
                                "originator; otherwise the request is dropped"))
        not_fresh_alts = (
            _test("rreq:32",
                  lambda xi: not fresh_enough(xi)
                  and xi.get("oip") in D.vD(xi.get("rt")),
                  forward_leg),
            _test("rreq:32x",
                  lambda xi: not fresh_enough(xi)
                  and xi.get("oip") not in D.vD(xi.get("rt")),
                  call_aodv("rreq:32y")),
        )
    else:
        not_fresh_alts = (
            _test("rreq:32", lambda xi: not fresh_enough(xi), forward_leg),
        )

    def addpre_dip_sip(xi):
        return D.addpre_rt(xi.get("rt"), xi.get("dip"), {xi.get("sip")})

    def addpre_oip_nhop(xi):
        nh = nhop_dip(xi)
        if not is_defined(nh):
            return xi.get("rt")
        return D.addpre_rt(xi.get("rt"), xi.get("oip"), {nh})

    def note_request(xi):
        return xi.get("rreqs").add(xi.get("oip"), xi.get("rreqid"),
                                   t_add(xi.now, cfg.path_discovery_time))

    destination_leg = _set(
        "rreq:11", "sn", lambda xi: max(xi.get("sn"), xi.get("dsn")),
        Unicast("rreq:14a", nhop_oip, dest_rrep,
                call_aodv("rreq:14b"),
                error_branch("rreq:15a", nhop_oip, call_aodv("rreq:19a"))))

    intermediate_leg = _set(
        "rreq:24", "rt", addpre_dip_sip,
        _set("rreq:25", "rt", addpre_oip_nhop,
             Unicast("rreq:26", nhop_oip, intermediate_rrep,
                     call_aodv("rreq:26a"),
                     error_branch("rreq:27", nhop_oip,
                                  call_aodv("rreq:31a")))))

    not_dest_leg = _test(
        "rreq:20", lambda xi: xi.get("dip") != xi.get("ip"),
        Choice("rreq:21",
               (_test("rreq:22", fresh_enough, intermediate_leg),)
               + not_fresh_alts))

    rreq_new = _set(
        "rreq:6", "rt", reverse_route,
        _set("rreq:7", "rt", reverse_route_min_lifetime,
             _set("rreq:8", "rreqs", note_request,
                  Choice("rreq:9", (
                      _test("rreq:10",
                            lambda xi: xi.get("dip") == xi.get("ip"),
                            destination_leg),
                      not_dest_leg,
                  )))))

    rreq_body = _set(
        "rreq:1", "rreqs", exp_rreqs_now,
        Choice("rreq:1a", (
            _test("rreq:2",
                  lambda xi: xi.get("rreqs").seen(xi.get("oip"),
                                                  xi.get("rreqid")),
                  call_aodv("rreq:3")),
            _test("rreq:4",
                  lambda xi: not xi.get("rreqs").seen(xi.get("oip"),
                                                      xi.get("rreqid")),
                  rreq_new),
        )))
    table.define("RREQ", ("hops", "rreqid", "dip", "dsn", "dsk", "oip",
                          "osn", "sip") + AODV_PARAMS, rreq_body)

    # -- Process 5: route reply handling -------------------------------------

    def incoming_route(xi):
        return D.entry(xi.get("dip"), xi.get("dsn"), D.KNOWN, D.VALID,
                       xi.get("hops") + 1, xi.get("sip"), frozenset(),
                       t_add(xi.now, xi.get("ltime")))

    def genuine(xi):
        return D.would_change_route(xi.get("rt"), incoming_route(xi))

    def forwarded_rrep(xi):
        return D.Rrep(xi.get("hops") + 1, xi.get("dip"), xi.get("dsn"),
                      xi.get("oip"), xi.get("ltime"), xi.get("ip"))

    forward_rrep = Unicast("rrep:13", nhop_oip, forwarded_rrep,
                           call_aodv("rrep:13a"),
                           error_branch("rrep:14a", nhop_oip,
                                        call_aodv("rrep:19a")))
    if not repaired:
        forward_rrep = _set("rrep:12d", "rt",
                            set_time(lambda xi: xi.get("oip"),
                                     now_plus(cfg.active_route_timeout)),
                            forward_rrep)
    else:
        diff.append(("rrep:12d", "removed"))
    if rrep_reverse_precursor:
        forward_rrep = _set("rrep:7b", "rt",
                            lambda xi: D.addpre_rt(xi.get("rt"), xi.get("oip"),
                                                   {nhop_dip(xi)})
                            if is_defined(nhop_dip(xi)) else xi.get("rt"),
                            forward_rrep)
    forward_rrep = _set("rrep:7", "rt",
                        lambda xi: D.addpre_rt(xi.get("rt"), xi.get("dip"),
                                               {nhop_oip(xi)})
                        if is_defined(nhop_oip(xi)) else xi.get("rt"),
                        forward_rrep)

    rrep_body = Choice("rrep:0", (
        _test("rrep:1", genuine,
              _set("rrep:2", "rt",
                   lambda xi: D.update(xi.get("rt"), incoming_route(xi)),
                   Choice("rrep:3", (
                       _test("rrep:4", lambda xi: xi.get("oip") == xi.get("ip"),
                             call_aodv("rrep:5")),
                       _test("rrep:6", lambda xi: xi.get("oip") != xi.get("ip"),
                             Choice("rrep:6a", (
                                 _test("rrep:6b",
                                       lambda xi: xi.get("oip")
                                       in D.vD(xi.get("rt")),
                                       forward_rrep),
                                 _test("rrep:24",
                                       lambda xi: xi.get("oip")
                                       not in D.vD(xi.get("rt")),
                                       call_aodv("rrep:24a")),
                             ))),
                   )))),
        _test("rrep:25", lambda xi: not genuine(xi), call_aodv("rrep:26")),
    ))
    table.define("RREP", ("hops", "dip", "dsn", "oip", "ltime", "sip")
                 + AODV_PARAMS, rrep_body)

    # -- Process 6: route error handling -------------------------------------

    def affected_dests(xi):
        rt, sip = xi.get("rt"), xi.get("sip")
        pairs = [(rip, rsn) for (rip, rsn) in xi.get("dests").items()
                 if rip in D.vD(rt) and D.nhop(rt, rip) == sip
                 and t_less(D.sqn(rt, rip), rsn)]
        return D.dest_map(pairs)

    rerr_body = _set(
        "rerr:1", "dests", affected_dests,
        _set("rerr:2", "rt", invalidate_dests,
             _set("rerr:3", "store", reset_dests,
                  _set("rerr:4", "pre", union_precs,
                       _set("rerr:5", "dests", dests_with_precs,
                            Groupcast("rerr:6", lambda xi: xi.get("pre"),
                                      rerr_msg, call_aodv("rerr:7")))))))
    table.define("RERR", ("dests", "sip") + AODV_PARAMS, rerr_body)

    # -- Process 7: the message queue ----------------------------------------
    # The queue must stay able to receive even while offering the head
    # message to the main process; otherwise nodes would not be
    # input-enabled and transmissions could block each other.

    def enqueue(xi):
        return (xi.get("msgs") + (xi.get("msg"),),)

    qmsg_body = Choice("qmsg:0", (
        Receive("qmsg:1", "msg", Call("qmsg:2", "QMSG", enqueue)),
        _test("qmsg:3", lambda xi: len(xi.get("msgs")) > 0,
              Choice("qmsg:3a", (
                  Send("qmsg:4", lambda xi: xi.get("msgs")[0],
                       Call("qmsg:5", "QMSG",
                            lambda xi: (xi.get("msgs")[1:],))),
                  Receive("qmsg:6", "msg", Call("qmsg:7", "QMSG", enqueue)),
              ))),
    ))
    table.define("QMSG", ("msgs",), qmsg_body)

    table.validate()
    algebra = AlgebraConfig(frozenset(universe), lb=cfg.lb, db=cfg.db,
                            lg=cfg.lg, dg=cfg.dg, lu=cfg.lu, du=cfg.du)
    return AodvModel(table, algebra, cfg, variant, tuple(diff),
                     rrep_reverse_precursor, skip_expiry)


def apply_repairs(universe, cfg, **kwargs) -> AodvModel:
    """The repaired variant plus the machine-readable diff of its edits."""
    return build_model(universe, cfg, variant=REPAIRED, **kwargs)


# Labels at which an in-flight message stops counting as underway.
UNDERWAY_END_LABELS = frozenset({
    "pkt:2", "pkt:5", "pkt:19", "pkt:21",
    "rreq:2", "rreq:6",
    "rrep:2", "rrep:25",
    "rerr:5",
})
