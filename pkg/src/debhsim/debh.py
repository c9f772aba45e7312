"""Trust tables, path-check session state, and queue adjudication."""

from dataclasses import dataclass, field
from enum import Enum


AUDIT_HEADER = ("time,source,path_number,event,subject,"
                "blackhole_queue,rrep_generator_queue")


def format_queue(queue):
    if not queue:
        return "-"
    return ";".join(str(n) for n in queue)


def format_audit_row(now, source, path_number, event, subject,
                     blackhole_queue, generator_queue):
    return "%.4f,%s,%s,%s,%s,%s,%s" % (
        now, source, path_number, event, subject,
        format_queue(blackhole_queue), format_queue(generator_queue))


class TrustState(Enum):
    NULL = "null"
    UNTRUSTED = "untrusted"
    TRUSTED = "trusted"


def is_malicious(a_entry_for_b, b_entry_for_a):
    """A pair condemns node A when A claims trust that B does not return.

    An unset (NULL) entry counts the same as untrusted, so unknown nodes
    never condemn anyone by themselves.
    """
    return (a_entry_for_b is TrustState.TRUSTED
            and b_entry_for_a is not TrustState.TRUSTED)


class BchTable:
    """Per-node trust record; entries outlive neighbor churn."""

    def __init__(self):
        self._entries = {}

    def get(self, node):
        return self._entries.get(node, TrustState.NULL)

    def set_trusted(self, node):
        self._entries[node] = TrustState.TRUSTED

    def set_untrusted(self, node):
        self._entries[node] = TrustState.UNTRUSTED

    def set_null(self, node):
        self._entries[node] = TrustState.NULL

    def entries(self):
        return dict(self._entries)


def bch_update(table_a, table_b, a, b):
    """Record a completed probe handshake in both directions."""
    table_a.set_trusted(b)
    table_b.set_trusted(a)


@dataclass
class CheckSession:
    """Source-side state of one path security check."""

    source: int
    final_destination: int
    session_id: int
    started_at: float = 0.0
    path_number: int = 1
    nonce: int = 0
    current_target: int = None
    current_rrep: object = None
    blackhole_queue: list = field(default_factory=list)
    rrep_generator_queue: list = field(default_factory=list)
    # claimant -> (claimed next hop, claimed trust for it)
    claims: dict = field(default_factory=dict)
    verified: set = field(default_factory=set)
    acked: set = field(default_factory=set)
    resolved_paths: set = field(default_factory=set)
    dcp_count: int = 0
    state: str = "await_route"
    verdict: list = None
    on_done: object = None

    def add_suspect(self, node):
        if node not in self.blackhole_queue:
            self.blackhole_queue.append(node)

    def add_generator(self, node):
        self.rrep_generator_queue.append(node)

    def claim_of(self, node):
        pair = self.claims.get(node)
        return pair[0] if pair else None

    def claimed_trust_of(self, node):
        pair = self.claims.get(node)
        return pair[1] if pair else None


def resolve_next_target(session, suspect, claimed_nhn):
    """Pick the node the next sub-path must reach after a suspect.

    The suspect's own claim names the target, except that a claim naming
    the reply generator is replaced by the generator's advertised next
    hop.  Claims that lead nowhere new (unknown, the suspect itself, the
    source, or an already-suspected node) fall back to re-checking the
    original destination.
    """
    rrep = session.current_rrep
    if rrep is not None and suspect == rrep.generator:
        target = rrep.generator_nhn
    else:
        target = claimed_nhn
    if rrep is not None and target == rrep.generator:
        target = rrep.generator_nhn
    if (target is None or target == suspect or target == session.source
            or target in session.blackhole_queue):
        target = session.final_destination
    return target


def adjudicate(generator_queue, claim_of, blackhole_queue, verified, acked,
               entry_lookup):
    """Walk the reply-generator queue in FIFO order and pass verdicts.

    Every queued suspect is condemned outright.  A generator whose
    claimed next hop is already condemned falls with it.  A generator
    whose claimed next hop is a verified node is judged by that node's
    own trust entry: trust both ways clears the generator and ends the
    walk, anything else condemns it.  A claim that cannot be checked at
    all condemns the claimant.  Generators claiming themselves (replies
    sent as the destination) are cleared only by their own ack.

    Returns (condemned ids in verdict order, safe generator or None).
    """
    condemned = list(blackhole_queue)
    safe = None
    for g in generator_queue:
        if g in condemned:
            continue
        n = claim_of(g)
        if n == g:
            if g in acked:
                safe = g
                break
            continue
        if n in condemned:
            condemned.append(g)
            continue
        if n in verified:
            if entry_lookup(n, g) is TrustState.TRUSTED:
                safe = g
                break
            condemned.append(g)
            continue
        condemned.append(g)
    return condemned, safe
