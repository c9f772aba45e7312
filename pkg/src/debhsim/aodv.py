"""Honest node behavior: route discovery, data forwarding, path checking."""

from dataclasses import dataclass, replace

from . import packets as pk
from .debh import BchTable, CheckSession, TrustState, adjudicate, is_malicious, \
    resolve_next_target


@dataclass
class RoutingEntry:
    destination: int
    next_hop: int
    hop_count: int
    dest_seq: int
    generator: int
    generator_nhn: int = None
    generator_trust: object = None
    fresh: bool = True


def select_best_rrep(candidates):
    """Freshest reply wins: highest dest_seq, then fewest hops, then
    the smaller generator id."""
    if not candidates:
        raise ValueError("no route reply candidates")
    return max(candidates,
               key=lambda r: (r.dest_seq, -r.hop_count, -r.generator))


class _Pending:
    """One in-flight route discovery at the source."""

    __slots__ = ("destination", "broadcast_id", "excluded", "candidates",
                 "window_handle", "timeout_handle", "retries_left",
                 "on_route", "on_fail", "t0")

    def __init__(self, destination, broadcast_id, excluded, retries_left,
                 on_route, on_fail, t0):
        self.destination = destination
        self.broadcast_id = broadcast_id
        self.excluded = excluded
        self.candidates = []          # (adjusted Rrep, sender)
        self.window_handle = None
        self.timeout_handle = None
        self.retries_left = retries_left
        self.on_route = on_route
        self.on_fail = on_fail
        self.t0 = t0


class Node:
    """A well-behaved network node."""

    malicious = False

    def __init__(self, node_id, sim):
        self.node_id = node_id
        self.sim = sim
        self.seq = 0
        self.next_bid = 0
        self.next_alarm_id = 0
        self.table = {}               # destination -> RoutingEntry
        self.seen_floods = {}         # (origin, bid) -> excluded tuple
        self.seen_alarms = set()
        self.banned = set()
        self.bch = BchTable()
        self.pending = {}             # destination -> _Pending
        self.sessions = {}            # final destination -> CheckSession
        self.probe_timers = {}        # nonce -> (handle, nhn, target, path)
        self.pending_nhn = {}         # nonce -> (suspect, target, path, handle)
        self.verify_timers = {}       # nonce -> handle
        self.watchdogs = {}           # nonce -> handle

    # ---- routing table ----

    def fresh_route(self, destination):
        entry = self.table.get(destination)
        if entry is None or not entry.fresh:
            return None
        if entry.next_hop in self.banned:
            return None
        if not self.sim.has_link(self.node_id, entry.next_hop):
            entry.fresh = False
            return None
        return entry

    def _maybe_install(self, destination, next_hop, hop_count, dest_seq,
                       generator, generator_nhn=None, generator_trust=None):
        if destination == self.node_id:
            return
        cur = self.table.get(destination)
        if cur is not None and cur.fresh and (
                cur.dest_seq > dest_seq
                or (cur.dest_seq == dest_seq and cur.hop_count <= hop_count)):
            return
        self.table[destination] = RoutingEntry(
            destination, next_hop, hop_count, dest_seq, generator,
            generator_nhn, generator_trust)

    def _install_selected(self, rrep, sender):
        self.table[rrep.destination] = RoutingEntry(
            rrep.destination, sender, rrep.hop_count, rrep.dest_seq,
            rrep.generator, rrep.generator_nhn, rrep.generator_trust)

    # ---- route discovery ----

    def ensure_route(self, destination, on_route, on_fail, excluded=()):
        """Reuse a fresh route when one exists, otherwise discover."""
        entry = self.fresh_route(destination)
        if entry is not None:
            rrep = pk.Rrep(self.node_id, destination, 0, entry.dest_seq,
                           entry.hop_count, entry.generator,
                           entry.generator_nhn if entry.generator_nhn is not None
                           else entry.generator,
                           entry.generator_trust)
            on_route(rrep, self.sim.now)
            return
        self.discover(destination, excluded, on_route, on_fail)

    def discover(self, destination, excluded, on_route, on_fail, retries=2):
        if destination == self.node_id:
            raise ValueError("node %s cannot discover itself" % self.node_id)
        if destination in self.pending:
            # A discovery for this destination is already running; the new
            # caller replaces the old consumer.
            old = self.pending[destination]
            old.on_route = on_route
            old.on_fail = on_fail
            return old.broadcast_id
        pend = _Pending(destination, 0, tuple(excluded), retries,
                        on_route, on_fail, self.sim.now)
        self.pending[destination] = pend
        self._flood(pend)
        return pend.broadcast_id

    def _flood(self, pend):
        self.seq += 1
        self.next_bid += 1
        pend.broadcast_id = self.next_bid
        known = self.table.get(pend.destination)
        rreq = pk.Rreq(self.node_id, pend.destination, self.seq,
                       known.dest_seq if known else 0,
                       pend.broadcast_id, 0, pend.excluded)
        self.seen_floods[(self.node_id, pend.broadcast_id)] = pend.excluded
        self.sim.metrics.record_rreq(self.node_id)
        self.sim.broadcast(self.node_id, rreq)
        pend.timeout_handle = self.sim.schedule_in(
            self.sim.cfg.discovery_timeout,
            lambda: self._discovery_timeout(pend.destination))

    def _discovery_timeout(self, destination):
        pend = self.pending.get(destination)
        if pend is None or pend.candidates:
            return
        if pend.retries_left > 0:
            pend.retries_left -= 1
            self._flood(pend)
            return
        del self.pending[destination]
        pend.on_fail(destination)

    def _finish_discovery(self, destination):
        pend = self.pending.pop(destination, None)
        if pend is None:
            return
        best = select_best_rrep([c[0] for c in pend.candidates])
        sender = next(s for r, s in pend.candidates if r is best)
        self._install_selected(best, sender)
        pend.on_route(best, pend.t0)

    # ---- receive dispatch ----

    def receive(self, pkt, sender):
        if isinstance(pkt, pk.Rreq):
            self.handle_rreq(pkt, sender)
        elif isinstance(pkt, pk.Rrep):
            self.handle_rrep(pkt, sender)
        elif isinstance(pkt, pk.Data):
            self.handle_data(pkt, sender)
        elif isinstance(pkt, (pk.DataControl, pk.OrdinalProbe)):
            self.handle_probe(pkt, sender, isinstance(pkt, pk.OrdinalProbe))
        elif isinstance(pkt, pk.DataControlReply):
            self.handle_probe_reply(pkt, sender)
        elif isinstance(pkt, pk.Alarm):
            self.handle_alarm(pkt, sender)
        else:
            self._dispatch_addressed(pkt, sender)

    _ADDRESS_FIELDS = {
        pk.Ack: "source", pk.SuspectReport: "source", pk.NoRouteReport: "source",
        pk.NhnQuery: "addressee", pk.NhnReply: "asker",
        pk.BchQuery: "addressee", pk.BchReply: "asker",
    }

    def _dispatch_addressed(self, pkt, sender):
        addressee = getattr(pkt, self._ADDRESS_FIELDS[type(pkt)])
        if addressee != self.node_id:
            self._forward_control(pkt, addressee)
            return
        if isinstance(pkt, pk.Ack):
            self.handle_ack(pkt)
        elif isinstance(pkt, pk.SuspectReport):
            self.handle_suspect_report(pkt)
        elif isinstance(pkt, pk.NoRouteReport):
            self.handle_no_route_report(pkt)
        elif isinstance(pkt, pk.NhnQuery):
            self.handle_nhn_query(pkt, sender)
        elif isinstance(pkt, pk.NhnReply):
            self.handle_nhn_reply(pkt, sender)
        elif isinstance(pkt, pk.BchQuery):
            self.handle_bch_query(pkt)
        elif isinstance(pkt, pk.BchReply):
            self.handle_bch_reply(pkt)

    def _forward_control(self, pkt, addressee):
        entry = self.fresh_route(addressee)
        if entry is None:
            return False
        return self.sim.unicast(self.node_id, entry.next_hop, pkt)

    # ---- flooding ----

    def handle_rreq(self, rreq, sender):
        if sender in rreq.excluded or sender in self.banned:
            return
        key = (rreq.origin, rreq.broadcast_id)
        if key in self.seen_floods:
            return
        self.seen_floods[key] = rreq.excluded
        self._maybe_install(rreq.origin, sender, rreq.hop_count + 1,
                            rreq.origin_seq, rreq.origin)
        if self.node_id == rreq.destination:
            self.seq = max(self.seq, rreq.dest_seq_known) + 1
            rrep = pk.Rrep(rreq.origin, self.node_id, rreq.broadcast_id,
                           self.seq, 0, self.node_id, self.node_id,
                           TrustState.TRUSTED)
            self.sim.unicast(self.node_id, sender, rrep)
            return
        if self.sim.cfg.cache_reply:
            entry = self.fresh_route(rreq.destination)
            if entry is not None and entry.dest_seq >= rreq.dest_seq_known:
                rrep = pk.Rrep(rreq.origin, rreq.destination, rreq.broadcast_id,
                               entry.dest_seq, entry.hop_count, self.node_id,
                               entry.next_hop, self.bch.get(entry.next_hop))
                self.sim.unicast(self.node_id, sender, rrep)
                return
        self.sim.broadcast(self.node_id, replace(rreq, hop_count=rreq.hop_count + 1))

    def handle_rrep(self, rrep, sender):
        if sender in self.banned or rrep.generator in self.banned:
            return
        excluded = self.seen_floods.get((rrep.origin, rrep.broadcast_id))
        if excluded is None and rrep.origin != self.node_id:
            return
        if excluded and sender in excluded:
            return
        effective_hop = rrep.hop_count + 1
        if self.node_id == rrep.origin:
            pend = self.pending.get(rrep.destination)
            if pend is None or pend.broadcast_id != rrep.broadcast_id:
                return
            if rrep.generator in pend.excluded or sender in pend.excluded:
                return
            pend.candidates.append((replace(rrep, hop_count=effective_hop), sender))
            if len(pend.candidates) == 1:
                if pend.timeout_handle is not None:
                    pend.timeout_handle.cancel()
                pend.window_handle = self.sim.schedule_in(
                    self.sim.cfg.selection_window,
                    lambda: self._finish_discovery(rrep.destination))
            return
        self._maybe_install(rrep.destination, sender, effective_hop,
                            rrep.dest_seq, rrep.generator, rrep.generator_nhn,
                            rrep.generator_trust)
        back = self.fresh_route(rrep.origin)
        if back is None:
            return
        self.sim.unicast(self.node_id, back.next_hop,
                         replace(rrep, hop_count=effective_hop))

    # ---- data plane ----

    def send_data(self, data):
        self.sim.metrics.record_sent(data.source)
        self.handle_data(data, self.node_id)

    def handle_data(self, data, sender):
        if self.node_id == data.destination:
            self.sim.metrics.record_delivery(data.source)
            return
        entry = self.fresh_route(data.destination)
        if entry is not None and self.sim.unicast(self.node_id, entry.next_hop, data):
            return
        if entry is not None:
            entry.fresh = False
        self._report_to_source(pk.NoRouteReport(
            self.node_id, data.destination, data.source, 0))

    def _report_to_source(self, report):
        if report.source == self.node_id:
            if isinstance(report, pk.NoRouteReport):
                self.handle_no_route_report(report)
            else:
                self.handle_suspect_report(report)
            return
        self._forward_control(report, report.source)

    # ---- path checking: source side ----

    def start_check(self, destination, rrep, t0, on_done):
        session = CheckSession(self.node_id, destination,
                               self.sim.new_session_id(), t0)
        session.on_done = on_done
        session.current_target = destination
        self.sessions[destination] = session
        self.sim.sessions_all.append(session)
        session.state = "checking"
        self.sim.audit(session, "session", str(destination))
        self._start_path(session, rrep)
        return session

    def _start_path(self, session, rrep):
        session.current_rrep = rrep
        session.add_generator(rrep.generator)
        session.claims[rrep.generator] = (rrep.generator_nhn, rrep.generator_trust)
        session.nonce = self.sim.rng.getrandbits(64)
        self.sim.register_nonce(session)
        self._arm_watchdog(session)
        self.sim.audit(session, "route", str(rrep.generator))
        self._continue_chain(session.source, session.path_number, session.nonce,
                             session.current_target)

    def _restart_path(self, session):
        """Re-walk the current sub-path after a link break; the path
        number and nonce stay, suspicion state is untouched."""
        self._arm_watchdog(session)
        self._continue_chain(session.source, session.path_number, session.nonce,
                             session.current_target)

    def _arm_watchdog(self, session):
        old = self.watchdogs.pop(session.session_id, None)
        if old is not None:
            old.cancel()
        self.watchdogs[session.session_id] = self.sim.schedule_in(
            self.sim.cfg.session_timeout, lambda: self._session_stalled(session))

    def _session_stalled(self, session):
        if session.state in ("done",):
            return
        self._finish_session(session, aborted=True)

    # ---- path checking: chain walking (any node) ----

    def _continue_chain(self, source, path_number, nonce, target):
        entry = self.fresh_route(target)
        if entry is None:
            self._report_to_source(pk.NoRouteReport(
                self.node_id, target, source, path_number, nonce))
            return
        nhn = entry.next_hop
        trusted = self.bch.get(nhn) is TrustState.TRUSTED
        if trusted:
            probe = pk.OrdinalProbe(self.node_id, nhn, nonce, source, target,
                                    path_number)
        else:
            probe = pk.DataControl(self.node_id, nhn, nonce, source, target,
                                   path_number)
        self.sim.audit_by_nonce(nonce, "probe", "%s>%s" % (self.node_id, nhn))
        if not self.sim.unicast(self.node_id, nhn, probe):
            entry.fresh = False
            self._report_to_source(pk.NoRouteReport(
                self.node_id, target, source, path_number, nonce))
            return
        if not trusted:
            self.sim.note_dcp(nonce)
            handle = self.sim.schedule_in(
                self.sim.cfg.reply_timeout,
                lambda: self._probe_timeout(source, path_number, nonce, target, nhn))
            self.probe_timers[nonce] = (handle, nhn, target, path_number)

    def handle_probe(self, pkt, sender, ordinal):
        if not ordinal:
            reply = pk.DataControlReply(self.node_id, pkt.random_number,
                                        pkt.source, pkt.path_number)
            # The handshake is atomic: a delivered probe always earns its
            # reply, link churn within the exchange is below model
            # resolution.
            self.sim.unicast(self.node_id, sender, reply, force=True)
            self.bch.set_trusted(sender)
        if self.node_id == pkt.target:
            ack = pk.Ack(self.node_id, pkt.source, pkt.random_number,
                         pkt.path_number)
            if pkt.source == self.node_id:
                self.handle_ack(ack)
            else:
                self._forward_control(ack, pkt.source)
            return
        self._continue_chain(pkt.source, pkt.path_number, pkt.random_number,
                             pkt.target)

    def handle_probe_reply(self, pkt, sender):
        rec = self.probe_timers.pop(pkt.random_number, None)
        if rec is not None:
            handle, nhn, target, path = rec
            if sender == nhn:
                handle.cancel()
                self.bch.set_trusted(nhn)
                self.sim.note_verified(pkt.random_number, nhn)
                return
            self.probe_timers[pkt.random_number] = rec
            return
        # Reply that matches no outstanding nonce: if it came from a hop
        # we are currently probing under this source and path, the echo
        # was wrong and the hop is suspect.
        for nonce, (handle, nhn, target, path) in list(self.probe_timers.items()):
            if nhn == sender and path == pkt.path_number:
                del self.probe_timers[nonce]
                handle.cancel()
                self.bch.set_untrusted(nhn)
                self._suspicion(pkt.source, path, nonce, target, nhn)
                return

    def _probe_timeout(self, source, path_number, nonce, target, nhn):
        self.probe_timers.pop(nonce, None)
        self.bch.set_untrusted(nhn)
        self._suspicion(source, path_number, nonce, target, nhn)

    def _suspicion(self, source, path_number, nonce, target, nhn):
        query = pk.NhnQuery(self.node_id, nhn, target, nonce)
        if self.sim.unicast(self.node_id, nhn, query):
            handle = self.sim.schedule_in(
                self.sim.cfg.query_timeout,
                lambda: self._nhn_query_timeout(nonce))
            self.pending_nhn[nonce] = (nhn, target, source, path_number, handle)
        else:
            self._send_suspect_report(source, path_number, nonce, nhn, None, None)

    def _nhn_query_timeout(self, nonce):
        rec = self.pending_nhn.pop(nonce, None)
        if rec is None:
            return
        nhn, target, source, path_number, _ = rec
        self._send_suspect_report(source, path_number, nonce, nhn, None, None)

    def handle_nhn_query(self, pkt, sender):
        entry = self.fresh_route(pkt.target)
        nhn = entry.next_hop if entry is not None else None
        reply = pk.NhnReply(self.node_id, nhn,
                            self.bch.get(nhn) if nhn is not None else TrustState.NULL,
                            pkt.asker, pkt.random_number)
        self.sim.unicast(self.node_id, sender, reply, force=True)

    def handle_nhn_reply(self, pkt, sender):
        rec = self.pending_nhn.pop(pkt.random_number, None)
        if rec is None:
            return
        nhn, target, source, path_number, handle = rec
        if sender != nhn:
            self.pending_nhn[pkt.random_number] = rec
            return
        handle.cancel()
        self._send_suspect_report(source, path_number, pkt.random_number,
                                  nhn, pkt.nhn, pkt.trust_for_nhn)

    def _send_suspect_report(self, source, path_number, nonce, suspect,
                             claimed_nhn, claimed_trust):
        self._report_to_source(pk.SuspectReport(
            self.node_id, suspect, source, path_number, nonce,
            claimed_nhn, claimed_trust))

    # ---- path checking: source reactions ----

    def _session_for(self, pkt):
        session = self.sim.session_by_nonce(pkt.random_number)
        if session is None or session.state != "checking":
            return None
        if session.nonce != pkt.random_number:
            return None
        if pkt.path_number != session.path_number:
            return None
        return session

    def handle_suspect_report(self, pkt):
        session = self._session_for(pkt)
        if session is None or session.path_number in session.resolved_paths:
            return
        session.resolved_paths.add(session.path_number)
        session.verified.add(pkt.reporter)
        session.add_suspect(pkt.suspect)
        session.claims[pkt.suspect] = (pkt.claimed_nhn, pkt.claimed_trust)
        self.sim.audit(session, "suspect", str(pkt.suspect))
        target = resolve_next_target(session, pkt.suspect, pkt.claimed_nhn)
        session.path_number += 1
        session.current_target = target
        self.sim.audit(session, "reroute", str(target))
        self._arm_watchdog(session)
        self.discover(target, tuple(session.blackhole_queue),
                      lambda rrep, t0, s=session: self._on_reroute(s, rrep),
                      lambda dest, s=session: self._finish_session(s, aborted=True))

    def _on_reroute(self, session, rrep):
        if session.state != "checking":
            return
        self._start_path(session, rrep)

    def handle_no_route_report(self, pkt):
        if pkt.path_number == 0:
            # A relay lost its next hop; stop reusing the broken route.
            entry = self.table.get(pkt.unreachable)
            if entry is not None:
                entry.fresh = False
            self.sim.flow_route_lost(self.node_id, pkt.unreachable)
            return
        session = self._session_for(pkt)
        if session is None:
            return
        self.sim.audit(session, "no_route", str(pkt.unreachable))
        self._arm_watchdog(session)
        self.discover(session.current_target, tuple(session.blackhole_queue),
                      lambda rrep, t0, s=session: self._on_subpath_route(s, rrep),
                      lambda dest, s=session: self._finish_session(s, aborted=True))

    def _on_subpath_route(self, session, rrep):
        """A broken link was healed by rediscovery; same path number."""
        if session.state != "checking":
            return
        session.current_rrep = rrep
        session.add_generator(rrep.generator)
        session.claims[rrep.generator] = (rrep.generator_nhn, rrep.generator_trust)
        self._restart_path(session)

    def handle_ack(self, pkt):
        session = self._session_for(pkt)
        if session is None:
            return
        session.acked.add(pkt.node_id)
        session.verified.add(pkt.node_id)
        self.sim.audit(session, "ack", str(pkt.node_id))
        if session.path_number == 1:
            self._finish_session(session)
            return
        self._begin_verify(session, pkt.node_id)

    def _begin_verify(self, session, target):
        session.state = "verifying"
        query = pk.BchQuery(self.node_id, target,
                            tuple(sorted(session.claims)), session.path_number,
                            session.nonce)
        self.sim.audit(session, "verify", str(target))
        sent = self._forward_control(query, target) if target != self.node_id else False
        if not sent:
            session.add_suspect(target)
            self._finish_session(session)
            return
        self.verify_timers[session.nonce] = self.sim.schedule_in(
            self.sim.cfg.query_timeout,
            lambda: self._verify_timeout(session, target))

    def _verify_timeout(self, session, target):
        if self.verify_timers.pop(session.nonce, None) is None:
            return
        session.add_suspect(target)
        self._finish_session(session)

    def handle_bch_query(self, pkt):
        entries = {s: self.bch.get(s) for s in pkt.subjects}
        reply = pk.BchReply(self.node_id, entries, pkt.asker, pkt.path_number,
                            pkt.random_number)
        self._forward_control(reply, pkt.asker)

    def handle_bch_reply(self, pkt):
        session = self.sim.session_by_nonce(pkt.random_number)
        if session is None or session.state != "verifying":
            return
        handle = self.verify_timers.pop(session.nonce, None)
        if handle is not None:
            handle.cancel()
        target = pkt.node_id
        for claimant in sorted(session.claims):
            claimed_nhn, claimed_trust = session.claims[claimant]
            if claimant == target or claimed_nhn != target:
                continue
            if is_malicious(claimed_trust, pkt.entries.get(claimant, TrustState.NULL)):
                session.add_suspect(claimant)
                self.sim.audit(session, "confirm", str(claimant))
        self._finish_session(session)

    def _finish_session(self, session, aborted=False):
        if session.state == "done":
            return
        session.state = "done"
        handle = self.watchdogs.pop(session.session_id, None)
        if handle is not None:
            handle.cancel()
        self.sessions.pop(session.final_destination, None)
        if aborted and not session.blackhole_queue:
            session.verdict = []
            self.sim.audit(session, "abort", "-")
            if session.on_done:
                session.on_done(False, [])
            return
        condemned, safe = adjudicate(
            session.rrep_generator_queue, session.claim_of,
            session.blackhole_queue, session.verified, session.acked,
            self.sim.bch_entry)
        session.verdict = condemned
        if safe is not None:
            self.sim.audit(session, "safe", str(safe))
            self.sim.metrics.mark_secure_path(
                self.node_id, session.final_destination, session.started_at,
                self.sim.now, session.session_id)
        if condemned:
            self.sim.audit(session, "malicious", ";".join(str(c) for c in condemned))
            self.sim.metrics.record_detection(condemned)
            self._broadcast_alarm(condemned)
        if session.on_done:
            session.on_done(safe is not None, condemned)

    def _broadcast_alarm(self, malicious):
        self.next_alarm_id += 1
        alarm = pk.Alarm(self.node_id, self.next_alarm_id,
                         tuple(sorted(malicious)))
        self.seen_alarms.add((self.node_id, alarm.alarm_id))
        self._apply_alarm(alarm)
        self.sim.broadcast(self.node_id, alarm)

    # ---- elimination ----

    def handle_alarm(self, alarm, sender):
        key = (alarm.origin, alarm.alarm_id)
        if key in self.seen_alarms:
            return
        self.seen_alarms.add(key)
        self._apply_alarm(alarm)
        self.sim.broadcast(self.node_id,
                           replace(alarm, hop_count=alarm.hop_count + 1))

    def _apply_alarm(self, alarm):
        for m in alarm.malicious:
            self.bch.set_null(m)
            self.banned.add(m)
        for entry in self.table.values():
            if (entry.next_hop in self.banned or entry.generator in self.banned
                    or entry.destination in self.banned):
                entry.fresh = False
