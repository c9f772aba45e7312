"""Per-run counters and cross-run aggregation."""

CSV_HEADER = "scenario,seed,source,rreq_count,delay_s,detected,planted,sent,delivered"


class MetricsError(RuntimeError):
    pass


def _fmt_ids(ids):
    ids = sorted(set(ids))
    if not ids:
        return "-"
    return ";".join(str(i) for i in ids)


class RunMetrics:
    """Everything one simulation run is judged on."""

    def __init__(self):
        self.rreq_count_by_source = {}
        self.secure_path_delay_s = {}
        self.detected_malicious = set()
        self.sent_by_source = {}
        self.delivered_by_source = {}
        self.data_control_sent = 0
        self.forged_rreps = 0
        self.malicious_drops = 0
        self.session_rows = []
        self._marked_sessions = set()

    def record_rreq(self, source):
        self.rreq_count_by_source[source] = self.rreq_count_by_source.get(source, 0) + 1

    def record_sent(self, source):
        self.sent_by_source[source] = self.sent_by_source.get(source, 0) + 1

    def record_delivery(self, source):
        self.delivered_by_source[source] = self.delivered_by_source.get(source, 0) + 1

    def record_detection(self, node_ids):
        self.detected_malicious.update(node_ids)

    def record_forged_rrep(self, node_id):
        self.forged_rreps += 1

    def record_malicious_drop(self, node_id):
        self.malicious_drops += 1

    def record_dcp(self):
        self.data_control_sent += 1

    def mark_secure_path(self, source, destination, t_request, t_secure, session_id):
        # One verdict per check; a second mark means the bookkeeping broke.
        if session_id in self._marked_sessions:
            raise MetricsError("secure path marked twice for session %r" % (session_id,))
        self._marked_sessions.add(session_id)
        key = (source, destination)
        if key not in self.secure_path_delay_s:
            self.secure_path_delay_s[key] = t_secure - t_request

    def total_sent(self):
        return sum(self.sent_by_source.values())

    def total_delivered(self):
        return sum(self.delivered_by_source.values())

    def delivery_ratio(self):
        sent = self.total_sent()
        if sent == 0:
            return None
        return self.total_delivered() / sent

    def delay_for_source(self, source):
        delays = [d for (s, _), d in self.secure_path_delay_s.items() if s == source]
        if not delays:
            return None
        return min(delays)

    def csv_rows(self, scenario, seed, planted):
        rows = []
        sources = sorted(set(self.rreq_count_by_source)
                         | set(self.sent_by_source)
                         | {s for s, _ in self.secure_path_delay_s})
        detected = _fmt_ids(self.detected_malicious)
        planted_s = _fmt_ids(planted)
        for src in sources:
            delay = self.delay_for_source(src)
            rows.append([
                scenario,
                str(seed),
                str(src),
                str(self.rreq_count_by_source.get(src, 0)),
                "-" if delay is None else "%.4f" % delay,
                detected,
                planted_s,
                str(self.sent_by_source.get(src, 0)),
                str(self.delivered_by_source.get(src, 0)),
            ])
        return rows

    def write_csv(self, path, scenario, seed, planted):
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in self.csv_rows(scenario, seed, planted):
                fh.write(",".join(row) + "\n")


def aggregate(runs):
    """Mean, min, and max per headline metric over several runs."""
    if not runs:
        raise MetricsError("no runs to aggregate")

    def stats(values):
        return {"mean": sum(values) / len(values),
                "min": min(values),
                "max": max(values)}

    out = {
        "runs": len(runs),
        "detected_count": stats([len(m.detected_malicious) for m in runs]),
        "rreq_total": stats([sum(m.rreq_count_by_source.values()) for m in runs]),
        "sent": stats([m.total_sent() for m in runs]),
        "delivered": stats([m.total_delivered() for m in runs]),
        "data_control_sent": stats([m.data_control_sent for m in runs]),
    }
    delays = [d for m in runs for d in m.secure_path_delay_s.values()]
    if delays:
        out["secure_path_delay_s"] = stats(delays)
    ratios = [m.delivery_ratio() for m in runs if m.delivery_ratio() is not None]
    if ratios:
        out["delivery_ratio"] = stats(ratios)
    return out
