import numpy as np
import pytest

from phsmc.survival import LEAF, Rule, kaplan_meier, leaf_km_table, read_km_table, split, write_km_table
from phsmc.survival.km import km_curve


def test_textbook_example():
    t = [1, 2, 2, 3, 4, 5]
    e = [1, 1, 0, 1, 0, 1]
    got = kaplan_meier(t, e, [0.5, 1, 2.5, 4.5, 6])
    assert got == pytest.approx([1, 5 / 6, 2 / 3, 4 / 9, 0])


def test_no_events_keeps_survival_at_one():
    assert list(kaplan_meier([3.0, 4.0], [0, 0], [1.0, 10.0])) == [1.0, 1.0]


def test_tied_deaths():
    ut, s = km_curve([2, 2, 2, 5], [1, 1, 0, 1])
    assert list(ut) == [2, 5] and s == pytest.approx([0.5, 0.0])


def test_input_checks():
    with pytest.raises(ValueError):
        kaplan_meier([], [], [1.0])
    with pytest.raises(ValueError):
        kaplan_meier([1.0], [1, 0], [1.0])


def test_leaf_table_round_trip(tmp_path, tree_data):
    tree = split(Rule(0, threshold=2.5))
    rows = leaf_km_table(tree, tree_data, at=(3.0, 6.0))
    assert [r["leaf"] for r in rows] == [1, 2] and sum(r["size"] for r in rows) == 12
    write_km_table(tmp_path / "km.csv", rows)
    assert read_km_table(tmp_path / "km.csv") == rows
    assert leaf_km_table(LEAF, tree_data)[0]["size"] == 12
