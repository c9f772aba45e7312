"""Run counters, CSV shaping, and cross-run aggregation."""

import pytest

from debhsim.metrics import CSV_HEADER, MetricsError, RunMetrics, aggregate


def _filled():
    m = RunMetrics()
    m.record_rreq(1)
    m.record_rreq(1)
    m.record_rreq(2)
    for _ in range(10):
        m.record_sent(1)
    for _ in range(8):
        m.record_delivery(1)
    m.record_detection([3, 5])
    m.mark_secure_path(1, 4, 0.0, 0.64, session_id=1)
    return m


def test_counters_accumulate():
    m = _filled()
    assert m.rreq_count_by_source == {1: 2, 2: 1}
    assert m.total_sent() == 10
    assert m.total_delivered() == 8
    assert m.detected_malicious == {3, 5}
    assert m.delivery_ratio() == pytest.approx(0.8)


def test_delivery_ratio_is_undefined_without_traffic():
    assert RunMetrics().delivery_ratio() is None


def test_secure_path_delay_keeps_the_first_mark_per_pair():
    m = RunMetrics()
    m.mark_secure_path(1, 4, 0.0, 0.5, session_id=1)
    m.mark_secure_path(1, 4, 10.0, 11.0, session_id=2)
    assert m.secure_path_delay_s[(1, 4)] == pytest.approx(0.5)
    assert m.delay_for_source(1) == pytest.approx(0.5)
    assert m.delay_for_source(9) is None


def test_marking_the_same_session_twice_is_an_error():
    m = RunMetrics()
    m.mark_secure_path(1, 4, 0.0, 0.5, session_id=7)
    with pytest.raises(MetricsError):
        m.mark_secure_path(1, 4, 1.0, 2.0, session_id=7)


def test_csv_rows_one_per_source_in_id_order():
    m = _filled()
    rows = m.csv_rows("single", 7, [3, 5])
    assert [r[2] for r in rows] == ["1", "2"]
    assert rows[0] == ["single", "7", "1", "2", "0.6400", "3;5", "3;5", "10", "8"]
    # Source 2 never sent and never secured a path.
    assert rows[1] == ["single", "7", "2", "1", "-", "3;5", "3;5", "0", "0"]
    for row in rows:
        assert len(row) == len(CSV_HEADER.split(","))


def test_csv_placeholders_for_empty_sets():
    m = RunMetrics()
    m.record_rreq(1)
    row = m.csv_rows("benign", 0, [])[0]
    assert row[4] == "-"   # no secure path delay
    assert row[5] == "-"   # nothing detected
    assert row[6] == "-"   # nothing planted


def test_csv_file_round_trip(tmp_path):
    m = _filled()
    path = tmp_path / "metrics.csv"
    m.write_csv(path, "single", 7, [3, 5])
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3


def test_aggregate_reports_mean_min_max():
    runs = []
    for delay, detected in ((1.0, [3]), (3.0, [3, 5])):
        m = RunMetrics()
        m.record_rreq(1)
        m.record_sent(1)
        m.record_delivery(1)
        m.record_detection(detected)
        m.mark_secure_path(1, 4, 0.0, delay, session_id=len(runs) + 1)
        runs.append(m)
    stats = aggregate(runs)
    assert stats["runs"] == 2
    assert stats["detected_count"] == {"mean": 1.5, "min": 1, "max": 2}
    assert stats["secure_path_delay_s"]["mean"] == pytest.approx(2.0)
    assert stats["secure_path_delay_s"]["min"] == pytest.approx(1.0)
    assert stats["secure_path_delay_s"]["max"] == pytest.approx(3.0)
    assert stats["delivery_ratio"]["mean"] == pytest.approx(1.0)


def test_aggregate_rejects_an_empty_run_list():
    with pytest.raises(MetricsError):
        aggregate([])
