#!/usr/bin/env python3
"""Development aid: run or explore a built-in scenario and dump details.

Not part of the package; used to tune the reproduction scripts.
"""

import sys

from tawn.aodv import data as D
from tawn.analysis import Suite, finalize, node_view
from tawn.engine import run, explore
from tawn.scenarios import builtin
from tawn.engine import scenario_model


def dump_tables(net, label=""):
    print(f"--- t={net.now} {label}")
    for ip, val in sorted(node_view(net).items()):
        rt = val.get("rt")
        store = val.get("store")
        srows = " ".join(f"{r.dip}:{r.pending}@{r.next_req_time}x{len(r.queue)}"
                         for r in store.rows)
        print(f"  {ip} sn={val.get('sn')} store[{srows}]")
        for e in rt.entries:
            print(f"     {e.dump()}")


def main():
    name = sys.argv[1]
    mode = sys.argv[2] if len(sys.argv) > 2 else "run"
    variant = sys.argv[3] if len(sys.argv) > 3 else "rfc"
    sc = builtin(name)
    model = scenario_model(sc, variant=variant)
    if mode == "run":
        seed = int(sys.argv[4]) if len(sys.argv) > 4 else 0
        tr = run(model, sc, seed=seed)
        suite = Suite(model.cfg)
        last_t = -1
        # replay: print trace and tables at each tick boundary
        print(tr.render())
        findings = set()
        net = tr.final
        dump_tables(net, "final")
        print("flags:", tr.flags)
    else:
        suite = Suite(model.cfg)
        graph, findings = explore(model, sc, on_state=suite.on_state,
                                  on_edge=suite.on_edge)
        findings = finalize(findings)
        print(f"states={len(graph.states)} complete={graph.complete}")
        kinds = {}
        for f in sorted(findings, key=lambda f: (f.kind, f.name, f.detail)):
            kinds.setdefault((f.kind, f.name), []).append(f)
        for (kind, name2), fs in sorted(kinds.items()):
            print(f"{kind}({name2}): {len(fs)} e.g. {fs[0].detail}")
            w = graph.witness(next(k for k in graph.states
                                   if k.startswith(fs[0].state)))
            print("   witness tail:", " | ".join(w[-8:]))
        if not findings:
            print("no findings")


if __name__ == "__main__":
    main()
