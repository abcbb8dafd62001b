import pytest

from transit_sota.grid import TimeGrid, parse_duration_seconds


def test_parse_durations():
    assert parse_duration_seconds("15s") == 15.0
    assert parse_duration_seconds("2.5m") == 150.0
    assert parse_duration_seconds("1h") == 3600.0
    assert parse_duration_seconds("90") == 90.0
    assert parse_duration_seconds(42) == 42.0


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_duration_seconds("15 parsecs")


def test_grid_ticks():
    grid = TimeGrid.from_durations("15s", "45m")
    assert grid.budget_ticks == 180
    assert grid.ticks("2.5m") == 10
    assert grid.ticks_ceil(16) == 2
    assert grid.ticks_ceil(15) == 1
    assert grid.seconds(4) == 60.0


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(delta_seconds=0.0, budget_ticks=10)
    with pytest.raises(ValueError):
        TimeGrid(delta_seconds=15.0, budget_ticks=0)


def test_grid_roundtrip():
    grid = TimeGrid(delta_seconds=15.0, budget_ticks=180)
    assert TimeGrid.from_dict(grid.to_dict()) == grid
    assert grid.compatible(TimeGrid(15.0, 180))
    assert not grid.compatible(TimeGrid(30.0, 180))
