"""Stepping rules for sequential processes, including the worked examples."""

import pytest

from gen import UNIVERSE, ModelGen, corpus
from tawn.semantics import AlgebraConfig, SeqState, classify, step_sequential
from tawn.syntax import (Assign, Broadcast, Call, CastInProgress, Choice,
                         Guard, ModelError, ProcessTable, Receive, Send,
                         Valuation)
from tawn.values import UNDEFINED
from tawn.wait import W, WR, WS


def simple_table():
    table = ProcessTable()
    table.define("LOOP", ("x",),
                 Guard("g", lambda xi: [xi],
                       Call("c", "LOOP", lambda xi: (xi.get("x"),))))
    table.validate()
    return table


CFG = AlgebraConfig(UNIVERSE, lb=2, db=1, lg=1, dg=0, lu=1, du=0)


def step(proc, val=None, table=None):
    return step_sequential(table or simple_table(), CFG,
                           SeqState(val or Valuation({"now": 0}), proc))


def test_broadcast_commits_to_transmission():
    p = Broadcast("b", lambda xi: xi.get("ms"),
                  Call("k", "LOOP", lambda xi: (0,)))
    ts = step(p, Valuation({"now": 0, "ms": 42}))
    assert len(ts) == 1
    tag, label, target = ts[0]
    assert tag == "tau"
    cast = target.proc
    assert isinstance(cast, CastInProgress)
    # broadcast addresses everyone, with the broadcast time bounds
    assert cast.dests == UNIVERSE
    assert (cast.n, cast.o) == (CFG.lb, CFG.db)
    assert cast.msg == 42
    assert cast.then is p.body and cast.otherwise is p.body


def test_unvalued_broadcast_waits():
    p = Broadcast("b", lambda xi: xi.get("ms"),
                  Call("k", "LOOP", lambda xi: (0,)))
    ts = step(p, Valuation({"now": 3}))
    assert [t[0] for t in ts] == ["wait"]
    assert ts[0][1] is W
    assert ts[0][2].val.now == 4
    assert ts[0][2].proc is p


def test_timeout_guard_waits_twice_then_fires():
    # assign a timeout two units ahead, then wait for the clock
    body = Call("k", "LOOP", lambda xi: (0,))
    guard = Guard("g2", lambda xi: [xi] if xi.now == xi.get("timeout") else [],
                  body)
    p = Assign("a", "timeout", lambda xi: xi.now + 2, guard)
    s = SeqState(Valuation({"now": 0}), p)
    (tag, _, s2), = step_sequential(simple_table(), CFG, s)
    assert tag == "tau"
    for expected_now in (1, 2):
        (tag, kind, s2), = step_sequential(simple_table(), CFG, s2)
        assert tag == "wait" and kind is W
        assert s2.val.now == expected_now
    (tag, _, s3), = step_sequential(simple_table(), CFG, s2)
    assert tag == "tau" and s3.proc is body


def test_cast_completion_and_failure():
    then = Call("k1", "LOOP", lambda xi: (0,))
    other = Call("k2", "LOOP", lambda xi: (1,))
    xi = Valuation({"now": 0})
    good = CastInProgress(frozenset({"i1"}), "m", 0, 0, then, other)
    (tag, dsts, msg, target), = step(good, xi)
    assert tag == "starcast" and dsts == frozenset({"i1"}) and msg == "m"
    assert target.proc is then
    failed = CastInProgress(frozenset(), "m", 0, 3, then, other)
    (tag, dsts, msg, target), = step(failed, xi)
    assert tag == "starcast" and dsts == frozenset()
    assert target.proc is other


def test_cast_step_shrinks_to_range_and_counts_down():
    then = Call("k1", "LOOP", lambda xi: (0,))
    other = Call("k2", "LOOP", lambda xi: (1,))
    cast = CastInProgress(frozenset({"i1", "i2"}), "m", 2, 1, then, other)
    (tag, kind, builder), = step(cast, Valuation({"now": 5}))
    assert tag == "caststep" and kind is W
    succ = builder(frozenset({"i2", "i3"}))
    # either the mandatory or the optional counter goes down
    assert {(s.proc.n, s.proc.o) for s in succ} == {(1, 1), (2, 0)}
    for s in succ:
        assert s.proc.dests == frozenset({"i2"})
        assert s.val.now == 6
    # without optional time left there is a single successor
    cast0 = CastInProgress(frozenset({"i1"}), "m", 1, 0, then, other)
    (_, _, builder0), = step(cast0, Valuation({"now": 5}))
    assert len(builder0(frozenset({"i1"}))) == 1


def test_range_independence_of_cast_steps():
    then = Call("k1", "LOOP", lambda xi: (0,))
    cast = CastInProgress(UNIVERSE, "m", 1, 0, then, then)
    (_, _, builder), = step(cast, Valuation({"now": 0}))
    for r in (frozenset(), frozenset({"i1"}), UNIVERSE):
        (s,) = builder(r)
        assert s.proc.dests == UNIVERSE & r


def test_send_offers_send_and_conditional_wait():
    p = Send("s", lambda xi: "m", Call("k", "LOOP", lambda xi: (0,)))
    ts = step(p)
    tags = sorted(t[0] for t in ts)
    assert tags == ["send", "wait"]
    wait = next(t for t in ts if t[0] == "wait")
    assert wait[1] is WS


def test_receive_binds_the_message():
    p = Receive("r", "m", Call("k", "LOOP", lambda xi: (xi.get("m"),)))
    ts = step(p)
    recv = next(t for t in ts if t[0] == "recv")
    target = recv[1]("hello")
    assert target.val.get("m") == "hello"
    wait = next(t for t in ts if t[0] == "wait")
    assert wait[1] is WR


def test_guard_binding_extensions():
    seen = []
    body = Call("k", "LOOP", lambda xi: (0,))
    p = Guard("g", lambda xi: [xi.set("v", k) for k in (1, 2)], body)
    for tag, _, target in step(p):
        assert tag == "tau"
        seen.append(target.val.get("v"))
    assert sorted(seen) == [1, 2]


def test_recursion_not_unfolded_while_waiting():
    table = ProcessTable()
    table.define("WAITY", ("x",),
                 Guard("g", lambda xi: [],
                       Call("c", "WAITY", lambda xi: (xi.get("x"),))))
    table.validate()
    call = Call("boot", "WAITY", lambda xi: (7,))
    s = SeqState(Valuation({"now": 0}), call)
    (tag, kind, target), = step_sequential(table, CFG, s)
    assert tag == "wait" and kind is W
    assert target.proc is call  # still folded
    assert target.val.now == 1


def test_unguarded_recursion_rejected_at_construction():
    table = ProcessTable()
    table.define("X", (), Call("c", "X", lambda xi: ()))
    with pytest.raises(ModelError):
        table.validate()


def test_choice_meets_wait_kinds():
    recv = Receive("r", "m", Call("k1", "LOOP", lambda xi: (0,)))
    send = Send("s", lambda xi: "m", Call("k2", "LOOP", lambda xi: (0,)))
    p = Choice("ch", (recv, send))
    ts = step(p)
    waits = [t for t in ts if t[0] == "wait"]
    assert len(waits) == 1
    assert waits[0][1].value == "wrs"  # wr meets ws
    assert waits[0][2].proc is p  # the choice is kept, not resolved


def test_classification_examples():
    recv = Receive("r", "m", Call("k1", "LOOP", lambda xi: (0,)))
    prof = classify(simple_table(), CFG, SeqState(Valuation({"now": 0}), recv))
    assert prof.has_receive and not prof.has_send and not prof.has_other
    assert prof.wait_kind is WR

    from tawn.syntax import Deliver
    deliver = Deliver("d", lambda xi: xi.get("data"),
                      Call("k2", "LOOP", lambda xi: (0,)))
    prof = classify(simple_table(), CFG,
                    SeqState(Valuation({"now": 0, "data": "x"}), deliver))
    assert prof.has_other and prof.wait_kind is None


def expected_wait_kind(prof):
    """The four biconditionals: a unique wait kind iff nothing else runs."""
    if prof.has_other:
        return None
    return {(False, False): W, (True, False): WR,
            (False, True): WS, (True, True): "wrs"}[
                (prof.has_receive, prof.has_send)]


def test_time_determinism_on_random_corpus():
    # every wait transition leaves the term alone and bumps only `now`
    checked = 0
    for gen, state in corpus(seed=7, count=400):
        for t in step_sequential(gen.table, gen.cfg, state):
            if t[0] != "wait":
                continue
            checked += 1
            target = t[2]
            assert target.proc is state.proc
            assert target.val == state.val.advance()
    assert checked > 50


def test_wait_kind_characterisation_on_random_corpus():
    # the four biconditionals between offered actions and wait kinds
    for gen, state in corpus(seed=8, count=400):
        prof = classify(gen.table, gen.cfg, state)
        expected = expected_wait_kind(prof)
        if expected is None:
            assert prof.wait_kind is None
        elif isinstance(expected, str):
            assert prof.wait_kind is not None \
                and prof.wait_kind.value == expected
        else:
            assert prof.wait_kind is expected
