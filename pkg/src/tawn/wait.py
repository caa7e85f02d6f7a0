"""Wait actions and the two operators combining them.

A wait action is a one-time-unit idle step, possibly conditional on the
environment not offering a matching receive (WR), send (WS), or either
(WRS).  Choice combines waits with the total meet operator; the parallel
operator combines them with a partial table whose gaps are exactly the
cases resolved by receive/send synchronisation.
"""

from __future__ import annotations

import enum

from .values import UNDEFINED


class WaitKind(enum.Enum):
    W = "w"
    WR = "wr"
    WS = "ws"
    WRS = "wrs"

    def __repr__(self):
        return self.value

    @property
    def conditional_on_receive(self):
        return self in (WaitKind.WR, WaitKind.WRS)

    @property
    def conditional_on_send(self):
        return self in (WaitKind.WS, WaitKind.WRS)


W, WR, WS, WRS = WaitKind.W, WaitKind.WR, WaitKind.WS, WaitKind.WRS

_MEET = {
    (W, W): W, (W, WR): WR, (W, WS): WS, (W, WRS): WRS,
    (WR, W): WR, (WR, WR): WR, (WR, WS): WRS, (WR, WRS): WRS,
    (WS, W): WS, (WS, WR): WRS, (WS, WS): WS, (WS, WRS): WRS,
    (WRS, W): WRS, (WRS, WR): WRS, (WRS, WS): WRS, (WRS, WRS): WRS,
}

# Rows are the left (receive-facing) component, columns the right
# (send-facing) one.  The four gaps are where a receive of the left
# component can synchronise with a send of the right one.
_PARL = {
    (W, W): W, (W, WR): WR, (W, WS): W, (W, WRS): WR,
    (WR, W): W, (WR, WR): WR, (WR, WS): None, (WR, WRS): None,
    (WS, W): WS, (WS, WR): WRS, (WS, WS): WS, (WS, WRS): WRS,
    (WRS, W): WS, (WRS, WR): WRS, (WRS, WS): None, (WRS, WRS): None,
}


def wait_meet(w1: WaitKind, w2: WaitKind) -> WaitKind:
    """Combine two wait actions under choice (total, commutative)."""
    return _MEET[(w1, w2)]


def parl_combine(w_left: WaitKind, w_right: WaitKind):
    """Combine wait actions under parallel composition.

    Returns UNDEFINED on the four gaps of the table; those cases never
    produce a wait because the receive/send pair synchronises instead.
    """
    r = _PARL[(w_left, w_right)]
    return UNDEFINED if r is None else r
