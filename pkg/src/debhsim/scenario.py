"""Scenario configuration, the standard scenario set, and run orchestration."""

import configparser
import os
from dataclasses import dataclass
from importlib import resources

from .debh import AUDIT_HEADER
from .metrics import CSV_HEADER
from .simulation import Simulation

DEFENSES = ("debh", "none")
ATTACK_MODES = ("none", "single", "cooperative", "distributed")


class ConfigError(ValueError):
    """A scenario parameter failed validation."""


@dataclass
class ScenarioConfig:
    """Everything one run needs; defaults are the standard parameter set."""

    name: str = "default"
    node_count: int = 30
    nodes: tuple = None           # explicit ids override 1..node_count
    arena: tuple = (1000.0, 1000.0)
    range_m: float = 200.0
    duration_s: float = 600.0
    mobility: bool = True
    min_speed: float = 2.0
    max_speed: float = 20.0
    pause_s: float = 15.0
    edges: tuple = None           # static adjacency when set
    attack_mode: str = "none"
    attack_groups: tuple = ()
    seq_inflation: int = 100
    one_victim: bool = True
    connections: int = 10
    packets_per_connection: int = 10
    rate_pps: float = 2.0
    payload_bytes: int = 512
    flows: tuple = None           # ((source, dest, start_s), ...)
    defense: str = "debh"
    seed: int = 0
    cache_reply: bool = False
    hop_latency: float = 0.01
    reply_timeout: float = 0.04
    selection_window: float = 0.2
    discovery_timeout: float = 1.0
    query_timeout: float = 0.5
    session_timeout: float = 30.0
    trace: bool = False

    def node_ids(self):
        if self.nodes is not None:
            return tuple(sorted(set(self.nodes)))
        ids = set(range(1, self.node_count + 1))
        if self.edges is not None:
            ids.update(n for e in self.edges for n in e)
        return tuple(sorted(ids))

    def planted(self):
        return sorted({m for g in self.attack_groups for m in g})

    def validate(self):
        if self.nodes is not None and not self.nodes:
            raise ConfigError("nodes: explicit node list is empty")
        if self.nodes is None and self.node_count < 1:
            raise ConfigError("node_count: must be at least 1")
        if self.arena[0] <= 0 or self.arena[1] <= 0:
            raise ConfigError("arena: dimensions must be positive")
        if self.range_m <= 0:
            raise ConfigError("range_m: must be positive")
        if self.duration_s <= 0:
            raise ConfigError("duration_s: must be positive")
        if self.min_speed <= 0 or self.max_speed < self.min_speed:
            raise ConfigError("min_speed/max_speed: need 0 < min <= max")
        if self.pause_s < 0:
            raise ConfigError("pause_s: must not be negative")
        if self.defense not in DEFENSES:
            raise ConfigError("defense: must be one of %s" % (DEFENSES,))
        if self.attack_mode not in ATTACK_MODES:
            raise ConfigError("attack.mode: must be one of %s" % (ATTACK_MODES,))
        if self.attack_mode == "none" and self.attack_groups:
            raise ConfigError("attack.groups: given but attack.mode is none")
        if self.attack_mode != "none" and not self.attack_groups:
            raise ConfigError("attack.groups: required for attack.mode %s"
                              % self.attack_mode)
        ids = set(self.node_ids())
        seen = set()
        for group in self.attack_groups:
            if not group:
                raise ConfigError("attack.groups: empty group")
            for m in group:
                if m not in ids:
                    raise ConfigError("attack.groups: node %s is not in the network" % m)
                if m in seen:
                    raise ConfigError("attack.groups: node %s appears twice" % m)
                seen.add(m)
            if self.attack_mode == "single" and len(group) != 1:
                raise ConfigError("attack.groups: single mode takes one node per group")
            if self.attack_mode == "cooperative" and len(group) < 2:
                raise ConfigError("attack.groups: cooperative mode needs at least two nodes")
        if self.edges is not None:
            for u, v in self.edges:
                if u not in ids or v not in ids:
                    raise ConfigError("topology: edge %s %s names an unknown node" % (u, v))
        if self.flows is not None:
            for src, dst, start in self.flows:
                if src not in ids or dst not in ids:
                    raise ConfigError("traffic.flows: endpoint not in the network")
                if src == dst:
                    raise ConfigError("traffic.flows: source equals destination")
                if src in seen or dst in seen:
                    raise ConfigError("traffic.flows: endpoint %s is an attacker"
                                      % (src if src in seen else dst))
                if start < 0:
                    raise ConfigError("traffic.flows: negative start time")
        if self.connections < 0:
            raise ConfigError("traffic.connections: must not be negative")
        if self.packets_per_connection < 1:
            raise ConfigError("traffic.packets_per_connection: must be at least 1")
        if self.rate_pps <= 0:
            raise ConfigError("traffic.rate_pps: must be positive")
        if self.payload_bytes < 1:
            raise ConfigError("traffic.payload_bytes: must be at least 1")
        if self.seq_inflation < 1:
            raise ConfigError("attack.seq_inflation: must be at least 1")
        for attr in ("hop_latency", "reply_timeout", "selection_window",
                     "discovery_timeout", "query_timeout", "session_timeout"):
            if getattr(self, attr) <= 0:
                raise ConfigError("timing.%s: must be positive" % attr)
        return self


# ---- config file parsing ----

def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _parse_groups(text):
    groups = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            groups.append(tuple(int(m) for m in part.replace(",", " ").split()))
    return tuple(groups)


def _parse_flows(text):
    flows = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        start = 0.0
        if "@" in part:
            part, at = part.split("@", 1)
            start = float(at)
        src, dst = part.split(">", 1)
        flows.append((int(src), int(dst), start))
    return tuple(flows)


_SCHEMA = {
    ("scenario", "name"): ("name", str),
    ("scenario", "node_count"): ("node_count", int),
    ("scenario", "arena_width"): ("_arena_w", float),
    ("scenario", "arena_height"): ("_arena_h", float),
    ("scenario", "range_m"): ("range_m", float),
    ("scenario", "duration_s"): ("duration_s", float),
    ("scenario", "defense"): ("defense", str),
    ("scenario", "seed"): ("seed", int),
    ("scenario", "cache_reply"): ("cache_reply", _parse_bool),
    ("mobility", "mobile"): ("mobility", _parse_bool),
    ("mobility", "min_speed"): ("min_speed", float),
    ("mobility", "max_speed"): ("max_speed", float),
    ("mobility", "pause_s"): ("pause_s", float),
    ("attack", "mode"): ("attack_mode", str),
    ("attack", "groups"): ("attack_groups", _parse_groups),
    ("attack", "seq_inflation"): ("seq_inflation", int),
    ("attack", "one_victim"): ("one_victim", _parse_bool),
    ("traffic", "connections"): ("connections", int),
    ("traffic", "packets_per_connection"): ("packets_per_connection", int),
    ("traffic", "rate_pps"): ("rate_pps", float),
    ("traffic", "payload_bytes"): ("payload_bytes", int),
    ("traffic", "flows"): ("flows", _parse_flows),
    ("timing", "hop_latency_s"): ("hop_latency", float),
    ("timing", "reply_timeout_s"): ("reply_timeout", float),
    ("timing", "selection_window_s"): ("selection_window", float),
    ("timing", "discovery_timeout_s"): ("discovery_timeout", float),
    ("timing", "query_timeout_s"): ("query_timeout", float),
    ("timing", "session_timeout_s"): ("session_timeout", float),
}


def parse_edge_lines(lines):
    """One `u v` pair per line; blank lines and # comments are skipped."""
    edges = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError("topology: expected `u v`, got %r" % raw.strip())
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ConfigError("topology: non-integer node id in %r" % raw.strip())
    return tuple(edges)


def load_config(path):
    """Read a flat key-value config file; absent keys keep their defaults."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config file: %s" % exc)
    parser = configparser.ConfigParser(allow_no_value=True, delimiters=("=",))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError("config file: %s" % exc)

    cfg = ScenarioConfig()
    arena_w, arena_h = cfg.arena
    for section in parser.sections():
        if section == "topology":
            cfg.edges = parse_edge_lines(parser.options("topology"))
            continue
        for key, value in parser.items(section):
            spec = _SCHEMA.get((section, key))
            if spec is None:
                raise ConfigError("unknown setting [%s] %s" % (section, key))
            attr, convert = spec
            try:
                parsed = convert(value)
            except (TypeError, ValueError):
                raise ConfigError("[%s] %s: cannot parse %r" % (section, key, value))
            if attr == "_arena_w":
                arena_w = parsed
            elif attr == "_arena_h":
                arena_h = parsed
            else:
                setattr(cfg, attr, parsed)
    cfg.arena = (arena_w, arena_h)
    cfg.validate()
    return cfg


# ---- building and running ----

def build_simulation(cfg):
    cfg.validate()
    sim = Simulation(cfg)
    if cfg.attack_mode == "cooperative":
        # Colluding nodes must all hear each other where they stand.
        for group in sim.groups:
            for i, a in enumerate(group.members):
                for b in group.members[i + 1:]:
                    if not sim.topology.has_link(a, b, 0.0):
                        raise ConfigError(
                            "attack.groups: cooperative nodes %s and %s "
                            "are not in range of each other" % (a, b))
    return sim


def run_scenario(cfg, out_dir=None):
    """Run one scenario; returns the finished Simulation."""
    sim = build_simulation(cfg)
    sim.run()
    if out_dir is not None:
        write_outputs(sim, out_dir)
    return sim


def write_outputs(sim, out_dir, prefix=""):
    os.makedirs(out_dir, exist_ok=True)
    cfg = sim.cfg
    sim.metrics.write_csv(os.path.join(out_dir, prefix + "metrics.csv"),
                          cfg.name, cfg.seed, cfg.planted())
    with open(os.path.join(out_dir, prefix + "audit.log"), "w") as fh:
        fh.write(AUDIT_HEADER + "\n")
        for line in sim.audit_lines:
            fh.write(line + "\n")
    if cfg.trace and sim.engine.trace is not None:
        with open(os.path.join(out_dir, prefix + "events.trace"), "w") as fh:
            for line in sim.engine.trace:
                fh.write(line + "\n")


# ---- the standard scenarios ----

def single_scenario(seed=0, defense="debh", one_victim=True):
    """One attacker wedged beside the only relay between 1 and 4."""
    return ScenarioConfig(
        name="single", edges=((1, 2), (2, 3), (2, 4)),
        attack_mode="single", attack_groups=((3,),),
        flows=((1, 4, 0.0),), connections=1,
        defense=defense, seed=seed, one_victim=one_victim, mobility=False)


def cooperative_scenario(k, seed=0, defense="debh"):
    """k sources share one relay toward the destination; a clique of k
    colluding nodes hangs off the same relay."""
    sources = list(range(1, k + 1))
    hub = k + 1
    dest = k + 2
    attackers = list(range(k + 3, 2 * k + 3))
    edges = [(s, hub) for s in sources]
    edges.append((hub, dest))
    edges.extend((hub, a) for a in attackers)
    for i, a in enumerate(attackers):
        for b in attackers[i + 1:]:
            edges.append((a, b))
    return ScenarioConfig(
        name="coop%d" % k, edges=tuple(edges),
        attack_mode="cooperative", attack_groups=(tuple(attackers),),
        flows=tuple((s, dest, 0.0) for s in sources), connections=k,
        defense=defense, seed=seed, mobility=False)


def _fixture_edges(name):
    text = resources.files("debhsim").joinpath("data", name + ".topo").read_text()
    return parse_edge_lines(text.splitlines())


def cooperative_fixture(seed=0, defense="debh"):
    """The shipped clique-of-three mesh used by the replay command."""
    edges = _fixture_edges("cooperative")
    nodes = tuple(sorted({n for e in edges for n in e}))
    return ScenarioConfig(
        name="cooperative", nodes=nodes, edges=edges,
        attack_mode="cooperative", attack_groups=((10, 14, 15),),
        flows=((1, 3, 0.0),), connections=1,
        defense=defense, seed=seed, mobility=False)


def distributed_fixture(seed=0, defense="debh"):
    """The shipped two-branch mesh with an attacker pair on each branch."""
    edges = _fixture_edges("distributed")
    nodes = tuple(sorted({n for e in edges for n in e}))
    return ScenarioConfig(
        name="distributed", nodes=nodes, edges=edges,
        attack_mode="distributed", attack_groups=((10, 14), (12, 16)),
        flows=((1, 8, 0.0),), connections=1,
        defense=defense, seed=seed, mobility=False)


def sweep_scenario(k, seed=0, defense="debh"):
    """Twelve sources, each with a private relay to one destination; the
    attacker clique (first k of nine fixed slots) hears every relay.
    The wiring never changes with k, only group membership does."""
    sources = list(range(1, 13))
    hubs = {s: 12 + s for s in sources}
    dest = 25
    pool = list(range(26, 35))
    edges = []
    for s in sources:
        edges.append((s, hubs[s]))
        edges.append((hubs[s], dest))
    for a in pool:
        edges.extend((a, hubs[s]) for s in sources)
    for i, a in enumerate(pool):
        for b in pool[i + 1:]:
            edges.append((a, b))
    return ScenarioConfig(
        name="sweep%d" % k, node_count=34, edges=tuple(edges),
        attack_mode="cooperative", attack_groups=(tuple(pool[:k]),),
        flows=tuple((s, dest, 0.0) for s in sources), connections=12,
        defense=defense, seed=seed, mobility=False)


def benign_scenario(seed=0):
    """Default mobile network with no attackers."""
    return ScenarioConfig(name="benign", seed=seed)


def trust_decay_scenario(seed=0):
    """A five-node line with the same conversation requested twice."""
    return ScenarioConfig(
        name="trustdecay", nodes=(1, 2, 3, 4, 5),
        edges=((1, 2), (2, 3), (3, 4), (4, 5)),
        flows=((1, 5, 0.0), (1, 5, 60.0)), connections=2,
        seed=seed, mobility=False)


def build_suite(seed=0, defense="debh"):
    """The seven standard scenarios, in report order."""
    return [
        single_scenario(seed, defense),
        cooperative_scenario(2, seed, defense),
        cooperative_scenario(3, seed, defense),
        cooperative_scenario(5, seed, defense),
        cooperative_scenario(7, seed, defense),
        cooperative_scenario(9, seed, defense),
        distributed_fixture(seed, defense),
    ]


def run_suite(seeds, out_dir=None, defense="debh", trace=False):
    """Run every suite scenario for every seed.

    Returns (csv_rows, summary, sims): rows ordered by (scenario index,
    seed), a per-scenario summary of detection results, and the finished
    simulations keyed by (scenario index, seed).
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("seeds: need at least one")
    sims = {}
    names = [cfg.name for cfg in build_suite(seeds[0], defense)]
    for index in range(len(names)):
        for seed in seeds:
            cfg = build_suite(seed, defense)[index]
            cfg.trace = trace
            sims[(index, seed)] = run_scenario(cfg)

    rows = []
    summary = []
    for index, name in enumerate(names):
        detected_sets = []
        planted = None
        for seed in seeds:
            sim = sims[(index, seed)]
            planted = set(sim.cfg.planted())
            detected_sets.append(set(sim.metrics.detected_malicious))
            rows.extend(sim.metrics.csv_rows(name, seed, sim.cfg.planted()))
        summary.append({
            "scenario": name,
            "planted": sorted(planted),
            "detected_counts": [len(d) for d in detected_sets],
            "exact": all(d == planted for d in detected_sets),
        })

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "suite.csv"), "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        for (index, seed), sim in sorted(sims.items()):
            write_outputs(sim, out_dir,
                          prefix="%s-s%d-" % (names[index], seed))
    return rows, summary, sims
