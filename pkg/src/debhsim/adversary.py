"""Black hole nodes: forged route replies, silent data drops, cover claims."""

from dataclasses import replace

from . import packets as pk
from .aodv import Node
from .debh import TrustState
from .topology import bfs_hops


class AdversaryGroup:
    """Shared coordination state for one set of mutually aware attackers.

    Members know each other's placement, so the group can agree on a
    single reply forger per discovery and on which peer each member
    names when asked for its next hop.
    """

    def __init__(self, members, seq_inflation=100, one_victim=True,
                 victim_quota=10):
        self.members = sorted(members)
        self.seq_inflation = seq_inflation
        self.one_victim = one_victim
        self.victim_quota = victim_quota
        self.engaged = {m: None for m in self.members}
        self.received = {}
        self.cover = {m: None for m in self.members}
        self.topology = None
        self._hops_cache = {}

    def finalize(self, topology):
        self.topology = topology
        for m in self.members:
            peers = [p for p in self.members if p != m]
            if peers:
                hops = bfs_hops(topology, m)
                self.cover[m] = min(peers, key=lambda p: (hops.get(p, 1 << 30), p))

    def _hops_from(self, origin):
        if origin not in self._hops_cache:
            self._hops_cache[origin] = bfs_hops(self.topology, origin)
        return self._hops_cache[origin]

    def designated_forger(self, origin, destination):
        """The member who answers this discovery: the one farthest from
        the requester covers the rest; a member already baiting another
        victim stays quiet."""
        eligible = [m for m in self.members
                    if m != destination
                    and (not self.one_victim or self.engaged[m] in (None, origin))]
        if not eligible:
            return None
        hops = self._hops_from(origin)
        return max(eligible, key=lambda m: (hops.get(m, -1), m))

    def engage(self, member, victim):
        if self.one_victim:
            self.engaged[member] = victim

    def note_data(self, member, victim):
        key = (member, victim)
        self.received[key] = self.received.get(key, 0) + 1
        if (self.engaged.get(member) == victim
                and self.received[key] >= self.victim_quota):
            self.engaged[member] = None


class AdversaryNode(Node):
    """Relays control traffic like anyone else, lies about routes, and
    destroys every data-class packet it attracts."""

    malicious = True

    def __init__(self, node_id, sim, group):
        super().__init__(node_id, sim)
        self.group = group

    def receive(self, pkt, sender):
        if pk.is_data_class(pkt):
            if isinstance(pkt, pk.Data):
                self.sim.metrics.record_malicious_drop(self.node_id)
                self.group.note_data(self.node_id, pkt.source)
            return
        if isinstance(pkt, pk.NhnQuery) and pkt.addressee == self.node_id:
            self._answer_nhn_query(pkt, sender)
            return
        if isinstance(pkt, pk.BchQuery) and pkt.addressee == self.node_id:
            self._answer_bch_query(pkt)
            return
        super().receive(pkt, sender)

    # ---- route discovery behavior ----

    def handle_rreq(self, rreq, sender):
        self._maybe_install(rreq.origin, sender, rreq.hop_count + 1,
                            rreq.origin_seq, rreq.origin)
        if self.node_id == rreq.destination:
            # Answer every copy so a reply survives on whatever branch
            # the requester still accepts.
            self.seq = max(self.seq, rreq.dest_seq_known) + 1
            rrep = pk.Rrep(rreq.origin, self.node_id, rreq.broadcast_id,
                           self.seq, 0, self.node_id, self.node_id,
                           TrustState.TRUSTED)
            self.sim.unicast(self.node_id, sender, rrep)
            return
        key = (rreq.origin, rreq.broadcast_id)
        if key in self.seen_floods:
            return
        self.seen_floods[key] = rreq.excluded
        if self.group.designated_forger(rreq.origin, rreq.destination) == self.node_id:
            self.forge_rrep(rreq, sender)
        self.sim.broadcast(self.node_id, replace(rreq, hop_count=rreq.hop_count + 1))

    def forge_rrep(self, rreq, sender):
        cover = self.group.cover[self.node_id]
        claimed_nhn = cover if cover is not None else rreq.destination
        rrep = pk.Rrep(rreq.origin, rreq.destination, rreq.broadcast_id,
                       rreq.dest_seq_known + self.group.seq_inflation, 1,
                       self.node_id, claimed_nhn, TrustState.TRUSTED)
        self.group.engage(self.node_id, rreq.origin)
        self.sim.metrics.record_forged_rrep(self.node_id)
        self.sim.unicast(self.node_id, sender, rrep)
        return rrep

    def handle_rrep(self, rrep, sender):
        # Relay without the honesty filters.
        effective_hop = rrep.hop_count + 1
        if self.node_id == rrep.origin:
            return
        self._maybe_install(rrep.destination, sender, effective_hop,
                            rrep.dest_seq, rrep.generator, rrep.generator_nhn,
                            rrep.generator_trust)
        back = self.fresh_route(rrep.origin)
        if back is not None:
            self.sim.unicast(self.node_id, back.next_hop,
                             replace(rrep, hop_count=effective_hop))

    # ---- cover stories ----

    def _answer_nhn_query(self, pkt, sender):
        cover = self.group.cover[self.node_id]
        claimed = cover if cover is not None else pkt.target
        reply = pk.NhnReply(self.node_id, claimed, TrustState.TRUSTED,
                            pkt.asker, pkt.random_number)
        self.sim.unicast(self.node_id, sender, reply, force=True)

    def _answer_bch_query(self, pkt):
        entries = {s: TrustState.TRUSTED for s in pkt.subjects}
        reply = pk.BchReply(self.node_id, entries, pkt.asker, pkt.path_number,
                            pkt.random_number)
        self._forward_control(reply, pkt.asker)

    # ---- elimination ----

    def handle_alarm(self, alarm, sender):
        # Relay the flood; the list obviously goes unheeded here.
        key = (alarm.origin, alarm.alarm_id)
        if key in self.seen_alarms:
            return
        self.seen_alarms.add(key)
        self.sim.broadcast(self.node_id,
                           replace(alarm, hop_count=alarm.hop_count + 1))
