import numpy as np

from engine.reducer import array_sum, block_bounds, map_blocks, pairwise_sum, reduce_sum


def test_block_bounds_cover_range():
    bounds = block_bounds(1, 101, 30)
    assert bounds == [(1, 31), (31, 61), (61, 91), (91, 101)]
    assert block_bounds(5, 5, 10) == []


def test_pairwise_sum_is_a_fixed_tree():
    values = [1e16, 1.0, -1e16, 1.0]
    # ((1e16 + 1) + (-1e16 + 1)) in this order
    assert pairwise_sum(values) == (1e16 + 1.0) + (-1e16 + 1.0)
    assert pairwise_sum([]) == 0


def test_map_blocks_keeps_order():
    bounds = block_bounds(0, 1000, 7)
    assert map_blocks(lambda lo, hi: lo, bounds, threads=8) == [lo for lo, _ in bounds]


def test_thread_count_does_not_change_bits():
    rng = np.random.default_rng(11)
    values = rng.standard_normal(300000) + 1j * rng.standard_normal(300000)
    reference = array_sum(values, threads=1, block_size=4096)
    for threads in (2, 3, 8):
        assert array_sum(values, threads=threads, block_size=4096) == reference
    assert abs(reference - values.sum()) < 1e-9


def test_reduce_sum():
    total = reduce_sum(lambda lo, hi: complex(sum(range(lo, hi))), 0, 10001, threads=4, block_size=100)
    assert total == sum(range(10001))
