"""Parallel composition: synchronisation, interleaving, time combination."""

from gen import UNIVERSE, corpus
from tawn.semantics import (AlgebraConfig, ParState, SeqState, classify,
                            step_parallel, step_sequential)
from tawn.syntax import (Call, CastInProgress, Guard, ProcessTable, Receive,
                         Send, Valuation)
from tawn.wait import W, WR, WRS, WS

CFG = AlgebraConfig(UNIVERSE)


def table():
    t = ProcessTable()
    t.define("L", ("x",), Guard("g", lambda xi: [xi],
                                Call("c", "L", lambda xi: (xi.get("x"),))))
    t.validate()
    return t


def recv_state(var="m"):
    return SeqState(Valuation({"now": 0}),
                    Receive("r", var, Call("k", "L",
                                           lambda xi: (xi.get(var),))))


def send_state(msg):
    return SeqState(Valuation({"now": 0}),
                    Send("s", lambda xi: msg,
                         Call("k2", "L", lambda xi: (0,))))


def test_receive_send_synchronise_to_tau():
    par = ParState((recv_state(), send_state("payload")))
    ts = step_parallel(table(), CFG, par)
    taus = [t for t in ts if t[0] == "tau"]
    assert len(taus) == 1
    target = taus[0][2]
    # the message flowed right to left
    assert target.parts[0].val.get("m") == "payload"
    # and no wait is possible: wr against ws is a gap in the table
    assert not [t for t in ts if t[0] == "wait"]


def test_unmatched_directions_are_dropped():
    # left send and right receive do not synchronise; both survive
    par = ParState((send_state("x"), recv_state()))
    ts = step_parallel(table(), CFG, par)
    tags = sorted(t[0] for t in ts)
    assert "send" in tags          # left send stays visible
    assert "recv" in tags          # right receive stays visible
    assert "tau" not in tags
    wait = [t for t in ts if t[0] == "wait"]
    assert len(wait) == 1 and wait[0][1] is WRS  # ws parl wr


def test_wait_table_row_examples():
    # w against wr yields wr (a transmitting left against receiving right)
    left = SeqState(Valuation({"now": 0}),
                    CastInProgress(frozenset({"i1"}), "m", 1, 0,
                                   Call("k", "L", lambda xi: (0,)),
                                   Call("k2", "L", lambda xi: (0,))))
    par = ParState((left, recv_state()))
    ts = step_parallel(table(), CFG, par)
    steps = [t for t in ts if t[0] == "caststep"]
    assert len(steps) == 1
    assert steps[0][1] is WR
    succ = steps[0][2](frozenset({"i1"}))
    assert len(succ) == 1
    assert all(isinstance(s, ParState) for s in succ)


def test_pp_classification_on_random_corpus():
    # a parallel state offers a time step iff nothing instantaneous runs
    for gen, par in corpus(seed=11, count=300, states="par"):
        prof = classify(gen.table, gen.cfg, par)
        offers_time = prof.time_kind is not None
        assert offers_time == (not prof.has_inb)


def test_parallel_time_determinism_on_random_corpus():
    for gen, par in corpus(seed=12, count=200, states="par"):
        for t in step_parallel(gen.table, gen.cfg, par):
            if t[0] != "wait":
                continue
            target = t[2]
            for before, after in zip(par.parts, target.parts):
                assert after.proc is before.proc
                assert after.val == before.val.advance()
