import pytest

from tamperlog import bench
from tamperlog.analytics import factorial_from_rows
from tamperlog.encoder import default_schema, encode
from tamperlog.errors import ConfigError
from tamperlog.tracegen import TraceSpec, generate, to_arrivals
from tamperlog.xlog import line_init

SEED = bytes(16)


@pytest.fixture(scope="module")
def records():
    events = generate(TraceSpec(duration=0.3, rate=1000, n_cores=3, seed=2))
    schema = default_schema()
    return [encode(e, schema) for e in events], to_arrivals(events, schema)


def test_per_core_tags_match_standalone_lines(records):
    recs, _ = records
    for threads in (1, 2):
        tags = bench.sign_per_core(SEED, recs, 3, threads, cadence=7)
        for c, tag in enumerate(tags):
            line = line_init(SEED, c, 3)
            for r in recs:
                if r.core_id == c:
                    line.sign(r.mac_input)
            assert tag == line.tag


def test_single_line_tag(records):
    recs, _ = records
    line = line_init(SEED, 0, 1)
    for r in recs:
        line.sign(r.mac_input)
    assert bench.sign_single_line(SEED, recs) == line.tag


def test_zero_threads_rejected(records):
    with pytest.raises(ConfigError):
        bench.sign_per_core(SEED, records[0], 3, 0)


def test_run_bench_rows(records):
    rows = bench.run_bench(SEED, records[0], 3, 1, "both")
    assert [r.mode for r in rows] == ["single-line", "per-core"]
    assert all(r.records == len(records[0]) and r.records_per_sec > 0 for r in rows)


def test_factorial_runs_feed_the_fit(records):
    recs, arrivals = records
    rows = bench.factorial_runs(SEED, recs[:100], arrivals[:100], 3, 1, replicates=2)
    assert len(rows) == 8
    fit = factorial_from_rows(rows)
    assert fit.r == 2 and abs(fit.f_s + fit.f_b + fit.f_i + fit.f_e - 1) < 1e-12


def test_hardware_threads_positive():
    assert bench.hardware_threads() >= 1
