"""Wires topology, nodes, adversaries, and traffic into one seeded run."""

from . import packets as pk
from .adversary import AdversaryGroup, AdversaryNode
from .aodv import Node
from .debh import format_audit_row
from .engine import Simulator
from .metrics import RunMetrics
from .topology import GeometricTopology, StaticTopology


class Flow:
    """One source-to-destination conversation: find a route, check it
    when the defense is on, then send packets at the configured rate."""

    def __init__(self, sim, flow_id, source, destination, start_t):
        self.sim = sim
        self.flow_id = flow_id
        self.source = source
        self.destination = destination
        self.start_t = start_t
        self.sent = 0
        self.attempts = 0
        self.state = "idle"

    def start(self):
        self.state = "routing"
        self._get_route()

    def _get_route(self):
        self.attempts += 1
        if self.attempts > 8:
            self.state = "failed"
            return
        node = self.sim.nodes[self.source]
        node.ensure_route(self.destination, self._on_route, self._on_fail,
                          tuple(sorted(node.banned)))

    def _on_route(self, rrep, t_request):
        if self.sim.cfg.defense == "debh":
            node = self.sim.nodes[self.source]
            node.start_check(self.destination, rrep, t_request, self._on_check)
        else:
            self._begin_sending()

    def _on_check(self, safe, condemned):
        if safe:
            self._begin_sending()
        else:
            self.state = "routing"
            self._get_route()

    def _on_fail(self, destination):
        self.state = "failed"

    def _begin_sending(self):
        self.state = "sending"
        self._send_next()

    def _send_next(self):
        if self.state != "sending":
            return
        if self.sent >= self.sim.cfg.packets_per_connection:
            self.state = "done"
            return
        data = pk.Data(self.source, self.destination, self.flow_id, self.sent,
                       self.sim.cfg.payload_bytes)
        self.sent += 1
        self.sim.nodes[self.source].send_data(data)
        self.sim.schedule_in(1.0 / self.sim.cfg.rate_pps, self._send_next)

    def route_lost(self):
        if self.state != "sending":
            return
        self.state = "routing"
        self._get_route()


class Simulation:
    """Owns the event loop and everything the nodes reach through it."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.engine = Simulator(cfg.seed, trace=cfg.trace)
        self.metrics = RunMetrics()
        self.audit_lines = []
        self.sessions_all = []
        self._nonce_sessions = {}
        self._next_session = 0

        node_ids = cfg.node_ids()
        if cfg.edges is not None:
            self.topology = StaticTopology(node_ids, cfg.edges)
        else:
            self.topology = GeometricTopology(
                node_ids, cfg.arena, cfg.range_m, cfg.min_speed,
                cfg.max_speed, cfg.pause_s, self.engine.rng,
                mobile=cfg.mobility)

        self.groups = []
        owner = {}
        for members in cfg.attack_groups:
            group = AdversaryGroup(members, cfg.seq_inflation, cfg.one_victim,
                                   cfg.packets_per_connection)
            group.finalize(self.topology)
            self.groups.append(group)
            for m in group.members:
                owner[m] = group

        self.nodes = {}
        for nid in node_ids:
            if nid in owner:
                self.nodes[nid] = AdversaryNode(nid, self, owner[nid])
            else:
                self.nodes[nid] = Node(nid, self)

        if cfg.flows is not None:
            flow_specs = cfg.flows
        else:
            # Traffic endpoints are honest; draw them after the layout so
            # one seed pins both.
            honest = [n for n in node_ids if n not in owner]
            flow_specs = []
            for _ in range(cfg.connections):
                src, dst = self.engine.rng.sample(honest, 2)
                flow_specs.append((src, dst, 0.0))
        self.flows = [Flow(self, i, s, d, t)
                      for i, (s, d, t) in enumerate(flow_specs)]

    # ---- clock and randomness ----

    @property
    def now(self):
        return self.engine.now

    @property
    def rng(self):
        return self.engine.rng

    def schedule_in(self, delay, action):
        return self.engine.schedule_in(delay, action)

    # ---- radio ----

    def has_link(self, u, v):
        return self.topology.has_link(u, v, self.engine.now)

    def unicast(self, sender, to, pkt, force=False):
        if not force and not self.topology.has_link(sender, to, self.engine.now):
            return False
        name = type(pkt).__name__.lower()
        self.engine.log(sender, "send_" + name, "to=%s" % to)
        self.engine.schedule_in(self.cfg.hop_latency,
                                lambda: self.nodes[to].receive(pkt, sender),
                                node=to, kind="recv_" + name,
                                detail="from=%s" % sender)
        return True

    def broadcast(self, sender, pkt):
        name = type(pkt).__name__.lower()
        neighbors = self.topology.neighbors(sender, self.engine.now)
        self.engine.log(sender, "send_" + name, "fanout=%d" % len(neighbors))
        for nb in neighbors:
            self.engine.schedule_in(self.cfg.hop_latency,
                                    lambda n=nb: self.nodes[n].receive(pkt, sender),
                                    node=nb, kind="recv_" + name,
                                    detail="from=%s" % sender)
        return len(neighbors)

    # ---- check session bookkeeping ----

    def new_session_id(self):
        self._next_session += 1
        return self._next_session

    def register_nonce(self, session):
        self._nonce_sessions[session.nonce] = session

    def session_by_nonce(self, nonce):
        return self._nonce_sessions.get(nonce)

    def note_dcp(self, nonce):
        session = self._nonce_sessions.get(nonce)
        if session is not None:
            session.dcp_count += 1
        self.metrics.record_dcp()

    def note_verified(self, nonce, node):
        session = self._nonce_sessions.get(nonce)
        if session is not None:
            session.verified.add(node)

    def bch_entry(self, holder, subject):
        return self.nodes[holder].bch.get(subject)

    def audit(self, session, event, subject):
        self.audit_lines.append(format_audit_row(
            self.engine.now, session.source, session.path_number, event,
            subject, session.blackhole_queue, session.rrep_generator_queue))

    def audit_by_nonce(self, nonce, event, subject):
        session = self._nonce_sessions.get(nonce)
        if session is not None:
            self.audit(session, event, subject)

    # ---- traffic bookkeeping ----

    def flow_route_lost(self, source, destination):
        for flow in self.flows:
            if flow.source == source and flow.destination == destination:
                flow.route_lost()

    # ---- movement ----

    def _mobility_step(self, node_id):
        t = self.topology.step(node_id, self.engine.now, self.engine.rng)
        if t is None or t <= self.engine.now or t > self.cfg.duration_s:
            return
        self.engine.schedule(t, lambda: self._mobility_step(node_id),
                             node=node_id, kind="move")

    # ---- run ----

    def run(self):
        if getattr(self.topology, "mobile", False):
            for nid in self.topology.nodes:
                self._mobility_step(nid)
        for flow in self.flows:
            self.engine.schedule(flow.start_t, flow.start)
        self.engine.run_until(self.cfg.duration_s)
        for s in self.sessions_all:
            self.metrics.session_rows.append(
                (s.source, s.final_destination, s.path_number, s.dcp_count,
                 None if s.verdict is None else tuple(s.verdict), s.state))
        return self.metrics
