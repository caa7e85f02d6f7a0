"""Built-in scenarios: the six loop reproductions and two smoke setups.

Each reproduction script concretises one of the prose sketches for the
protocol's premature-route-expiration flaws at desk-scale constants.
The notes on each scenario record how the sketch was concretised; where
the prose admits several setups the chosen one is spelled out.

Common building blocks:

* sequence-number pumping: a node B repeatedly fails a unicast to its
  neighbour D (the link is cut mid-transmission), which invalidates B's
  entry for D and increments its sequence number; B's entry is then
  revalidated, keeping the inflated number, by a request from a helper
  that D forwards (forwarding does not touch D's own number);
* a stream of data packets keeps selected entries alive through the
  lifetime-extension lines under scrutiny while the entry at the next
  hop quietly expires and is erased.
"""

from __future__ import annotations

import io

from .engine import CONNECT, DISCONNECT, NEWPKT, Event, Scenario

_SMALL = dict(preset="desk", variant="rfc")


def _links(*pairs):
    return frozenset(frozenset(p) for p in pairs)


def _ev(at, kind, *args):
    return Event(at, kind, tuple(args))


def two_node() -> Scenario:
    """Basic route establishment: one injected packet, one hop."""
    return Scenario(
        "two-node", ("a", "b"), _links(("a", "b")),
        events=(_ev(0, NEWPKT, "a", "d0", "b"),),
        max_ticks=20, notes="route discovery and delivery across one link",
        **_SMALL)


def three_chain() -> Scenario:
    """Request/reply across a two-hop chain; used by the degeneration check."""
    return Scenario(
        "three-chain", ("a", "b", "c"), _links(("a", "b"), ("b", "c")),
        events=(_ev(0, NEWPKT, "a", "d0", "c"),),
        max_ticks=24, notes="discovery, intermediate forwarding, delivery",
        **_SMALL)


def repro_a3() -> Scenario:
    """Forwarding a request without a valid route to its originator.

    B's entry for D is pumped three sequence numbers ahead of D's own
    number, then left invalid.  D's route request for A passes C and B;
    B forwards it without updating its stale entry (the carried number
    is lower), A installs a route to D via B, and B's entry is erased
    while A's is still intrinsically valid.
    """
    events = [
        _ev(0, NEWPKT, "b", "p0", "d"),           # B learns D directly
        # pump cycle 1
        _ev(4, NEWPKT, "b", "p1", "d"),
        _ev(4, DISCONNECT, "b", "d"),
        _ev(7, CONNECT, "b", "d"),
        _ev(7, NEWPKT, "w", "q1", "v1"),          # revalidation carrier
        # pump cycle 2 (fresh carrier target, its own retry budget)
        _ev(14, NEWPKT, "b", "p2", "d"),
        _ev(14, DISCONNECT, "b", "d"),
        _ev(17, CONNECT, "b", "d"),
        _ev(17, NEWPKT, "w", "q2", "v2"),
        # final invalidation, no revalidation afterwards
        _ev(24, NEWPKT, "b", "p3", "d"),
        _ev(24, DISCONNECT, "b", "d"),
        # the route request from D towards A, travelling D-C-B-A; the
        # links come up only after B's leftover discovery went nowhere
        _ev(27, CONNECT, "c", "d"),
        _ev(27, CONNECT, "b", "c"),
        _ev(27, CONNECT, "a", "b"),
        _ev(27, DISCONNECT, "d", "w"),
        _ev(28, NEWPKT, "d", "pa", "a"),
        _ev(31, DISCONNECT, "c", "d"),            # suppress the retry flood
    ]
    return Scenario(
        "a3", ("a", "b", "c", "d", "w", "v1", "v2"),
        _links(("b", "d"), ("d", "w")),
        events=tuple(events), max_ticks=36,
        notes="five-node sketch concretised with a helper w whose requests "
              "revalidate B's pumped entry; v1/v2 are the helper's "
              "unreachable targets", **_SMALL)


def repro_l26c() -> Scenario:
    """Lifetime extension of the next hop's entry when originating data.

    A's entry for C is rebuilt as a two-hop route via B by a request C
    floods while the direct link is down.  A stream of packets A sends
    towards D (next hop C) keeps extending A's entry for C, while B's
    entry for C expires and is erased.
    """
    events = [
        _ev(0, NEWPKT, "a", "p0", "d"),           # establish A-C-D
        _ev(6, NEWPKT, "a", "p1", "d"),           # keep the route warm
        # C's request reaches A via B while A-C is down
        _ev(8, DISCONNECT, "a", "c"),
        _ev(8, CONNECT, "b", "c"),
        _ev(8, CONNECT, "a", "b"),
        _ev(8, NEWPKT, "c", "pa", "a"),
        _ev(10, CONNECT, "a", "c"),
        _ev(11, DISCONNECT, "b", "c"),            # isolate B afterwards
        _ev(11, DISCONNECT, "a", "b"),
    ] + [
        _ev(t, NEWPKT, "a", f"s{t}", "d")
        for t in range(12, 34, 2)
    ]
    return Scenario(
        "l26c", ("a", "b", "c", "d"),
        _links(("a", "c"), ("c", "d")),
        events=tuple(events), max_ticks=40,
        notes="the parenthetical link of the sketch is the direct A-C "
              "link; the detour entry is created by a request from C "
              "for A itself", **_SMALL)


def repro_l6b() -> Scenario:
    """Same flaw as l26c but for forwarded packets.

    The stream originates at S and is forwarded by A towards D; the
    extension under scrutiny is applied by the forwarding node.
    """
    events = [
        _ev(0, NEWPKT, "s", "p0", "d"),           # establish S-A-C-D
        _ev(8, NEWPKT, "s", "p1", "d"),
        _ev(10, DISCONNECT, "a", "c"),
        _ev(10, CONNECT, "b", "c"),
        _ev(10, CONNECT, "a", "b"),
        _ev(10, NEWPKT, "c", "pa", "a"),
        _ev(12, CONNECT, "a", "c"),
        _ev(13, DISCONNECT, "b", "c"),
        _ev(13, DISCONNECT, "a", "b"),
    ] + [
        _ev(t, NEWPKT, "s", f"s{t}", "d")
        for t in range(14, 36, 2)
    ]
    return Scenario(
        "l6b", ("s", "a", "b", "c", "d"),
        _links(("s", "a"), ("a", "c"), ("c", "d")),
        events=tuple(events), max_ticks=42,
        notes="stream forwarded rather than originated; otherwise the "
              "l26c concretisation", **_SMALL)


def repro_l6c() -> Scenario:
    """Lifetime extension of the packet source's reverse route.

    A route A-B1-C-D carries a stream; C's entry for the source A was
    rebuilt via B2 by a later request, so every forwarded packet
    extends C's entry for A while B2's entry for A decays and is
    erased.
    """
    events = [
        _ev(0, NEWPKT, "a", "p0", "d"),           # establish A-B1-C-D
        _ev(8, NEWPKT, "a", "p1", "d"),
        # A's request for C travels A-B2-C while A-B1 is down
        _ev(10, DISCONNECT, "a", "b1"),
        _ev(10, CONNECT, "a", "b2"),
        _ev(10, CONNECT, "b2", "c"),
        _ev(10, NEWPKT, "a", "pc", "c"),
        _ev(12, CONNECT, "a", "b1"),
        _ev(13, DISCONNECT, "b2", "c"),
        _ev(13, DISCONNECT, "a", "b2"),
    ] + [
        _ev(t, NEWPKT, "a", f"s{t}", "d")
        for t in range(14, 36, 2)
    ]
    return Scenario(
        "l6c", ("a", "b1", "b2", "c", "d"),
        _links(("a", "b1"), ("b1", "c"), ("c", "d")),
        events=tuple(events), max_ticks=42,
        notes="the fresher route to the source is created by a request "
              "from the source for C itself, flooded over the B2 leg",
        **_SMALL)


def repro_l6d() -> Scenario:
    """Lifetime extension of the next hop towards the packet source.

    Combination of the previous two: the stream S-A-C-D keeps C's entry
    for S alive via its oip line, and the entry for B2 = next hop of
    C's route to S alive via the line under scrutiny, while B1's entry
    for B2 (the request detour) is erased.
    """
    events = [
        _ev(0, NEWPKT, "s", "p0", "d"),           # establish S-A-C-D
        _ev(8, NEWPKT, "s", "p1", "d"),
        # S's request for C travels S-B2-C: C routes S via B2
        _ev(10, DISCONNECT, "s", "a"),
        _ev(10, CONNECT, "s", "b2"),
        _ev(10, CONNECT, "b2", "c"),
        _ev(10, NEWPKT, "s", "pc", "c"),
        _ev(12, CONNECT, "s", "a"),
        _ev(13, DISCONNECT, "b2", "c"),
        # B2's own request reaches C via B1: C's entry for B2 goes stale
        _ev(14, CONNECT, "b2", "b1"),
        _ev(14, CONNECT, "b1", "c"),
        _ev(14, NEWPKT, "b2", "pb", "a"),
        _ev(17, DISCONNECT, "b2", "b1"),
        _ev(17, DISCONNECT, "s", "b2"),
    ] + [
        _ev(t, NEWPKT, "s", f"s{t}", "d")
        for t in range(18, 40, 2)
    ]
    return Scenario(
        "l6d", ("s", "a", "b1", "b2", "c", "d"),
        _links(("s", "a"), ("a", "c"), ("c", "d")),
        events=tuple(events), max_ticks=46,
        notes="two request detours give C a stale two-hop entry for the "
              "next hop towards the stream's source", **_SMALL)


def repro_l12d() -> Scenario:
    """Lifetime extension of the reverse route when forwarding a reply.

    B1's entry for A is pumped one number ahead and left invalid.  The
    flood A starts for C passes B1 (which still forwards under the
    faithful reading) and B2; C's reply travels C-B2-B1, the forwarding
    at B2 extends B2's entry for A, and B1 drops the reply.  B1's entry
    is erased while B2's, kept alive by the extension, is still valid.
    """
    events = [
        _ev(0, NEWPKT, "b1", "p0", "a"),          # B1 learns A directly
        # pump: one failed unicast, revalidated via W's request
        _ev(4, NEWPKT, "b1", "p1", "a"),
        _ev(4, DISCONNECT, "b1", "a"),
        _ev(7, CONNECT, "b1", "a"),
        _ev(7, NEWPKT, "w", "q1", "v"),
        # final invalidation
        _ev(14, NEWPKT, "b1", "p2", "a"),
        _ev(14, DISCONNECT, "b1", "a"),
        # A floods for C over A-B1-B2-C while its number is behind
        _ev(16, CONNECT, "a", "b1"),
        _ev(16, CONNECT, "b1", "b2"),
        _ev(16, CONNECT, "b2", "c"),
        _ev(16, DISCONNECT, "a", "w"),
        _ev(18, NEWPKT, "a", "pc", "c"),
    ]
    return Scenario(
        "l12d", ("a", "b1", "b2", "c", "w", "v"),
        _links(("b1", "a"), ("a", "w")),
        events=tuple(events), max_ticks=30,
        notes="the reply for A's own request is the one whose forwarding "
              "extends the reverse route; the broken B-C link of the "
              "sketch is represented by B1's dead entry", **_SMALL)


BUILTIN = {
    "two-node": two_node,
    "three-chain": three_chain,
    "a3": repro_a3,
    "l26c": repro_l26c,
    "l6b": repro_l6b,
    "l6c": repro_l6c,
    "l6d": repro_l6d,
    "l12d": repro_l12d,
}

REPRO_IDS = ("a3", "l26c", "l6b", "l6c", "l6d", "l12d")


def builtin(name: str) -> Scenario:
    try:
        return BUILTIN[name]().validate()
    except KeyError:
        raise KeyError(f"unknown built-in scenario {name!r}") from None


# ---------------------------------------------------------------------------
# Scenario files: simple key/value lines with repeated link/event entries

def dump_scenario(sc: Scenario) -> str:
    out = io.StringIO()
    print(f"name = {sc.name}", file=out)
    print(f"preset = {sc.preset}", file=out)
    print(f"variant = {sc.variant}", file=out)
    print(f"max_ticks = {sc.max_ticks}", file=out)
    print(f"max_states = {sc.max_states}", file=out)
    print(f"nodes = {' '.join(sc.nodes)}", file=out)
    for link in sorted(tuple(sorted(l)) for l in sc.initial_links):
        print(f"link = {link[0]} {link[1]}", file=out)
    for ev in sc.events:
        print(f"event = {ev.at} {ev.kind} {' '.join(map(str, ev.args))}",
              file=out)
    if sc.notes:
        for line in sc.notes.splitlines():
            print(f"note = {line}", file=out)
    return out.getvalue()


def parse_scenario(text: str) -> Scenario:
    fields = {"name": "scenario", "preset": "desk", "variant": "rfc",
              "max_ticks": 50, "max_states": 500_000}
    nodes: tuple = ()
    links = []
    events = []
    notes = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"expected key = value: {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in ("name", "preset", "variant"):
            fields[key] = value
        elif key in ("max_ticks", "max_states"):
            fields[key] = int(value)
        elif key == "nodes":
            nodes = tuple(value.split())
        elif key == "link":
            a, b = value.split()
            links.append((a, b))
        elif key == "event":
            at, kind, *args = value.split()
            events.append(Event(int(at), kind, tuple(args)))
        elif key == "note":
            notes.append(value)
        else:
            raise ValueError(f"unknown scenario key {key!r}")
    return Scenario(fields["name"], nodes, _links(*links),
                    preset=fields["preset"], variant=fields["variant"],
                    events=tuple(events), max_ticks=fields["max_ticks"],
                    max_states=fields["max_states"],
                    notes="\n".join(notes)).validate()
