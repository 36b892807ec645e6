import pytest

from bench import BENCH_FIELDS, bench_updates, write_bench_csv
from errors import ParameterError


def test_bench_rows(tmp_path):
    rows = bench_updates(40, 5, 6, seed=1)
    assert [row['solver'] for row in rows] == ['rbk', 'reblock', 'msgd']
    assert all(row['median_s'] > 0.0 and row['iqr_s'] >= 0.0 for row in rows)
    write_bench_csv(rows, tmp_path / 'bench.csv')
    lines = (tmp_path / 'bench.csv').read_text().splitlines()
    assert lines[0] == ','.join(BENCH_FIELDS)
    assert len(lines) == 4


def test_bench_degenerate_block():
    rows = bench_updates(30, 1, 5)
    assert all(row['k'] == 1 for row in rows)
    with pytest.raises(ParameterError):
        bench_updates(30, 0, 5)


@pytest.mark.slow
def test_update_cost_ordering():
    medians = {row['solver']: row['median_s']
               for row in bench_updates(10000, 200, 20)}
    assert medians['reblock'] <= medians['rbk']
    assert medians['msgd'] <= medians['reblock']
