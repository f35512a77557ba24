import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatdichotomy.spaces import (PointClass, RootDatum, SpaceError, ChamberPoint, aiii_datum,
                                  chamber_region, classify_point, default_ball_radius,
                                  dump_root_table, l1_power_lookup, plancherel_density,
                                  rank1_datum, root_table)


def test_rank1_table():
    ai = rank1_datum("AI")
    assert (ai.m1, ai.m2, ai.nu) == (1, 0, 0.0)
    cii = rank1_datum("CII", 2)
    assert (cii.m1, cii.m2, cii.nu) == (4, 3, 3.0)
    a5 = rank1_datum("AIII", 5)
    assert (a5.m1, a5.m2, a5.nu) == (8, 1, 4.0)
    assert rank1_datum("AII").nu == 1.5
    assert rank1_datum("FII").nu == 7.0
    assert rank1_datum("BDI", 4).nu == 1.0


def test_bdi_q2_is_ai():
    assert rank1_datum("BDI", 2) == rank1_datum("AI")


def test_rank1_errors():
    with pytest.raises(SpaceError):
        rank1_datum("EIII")
    with pytest.raises(SpaceError):
        rank1_datum("AIII")
    with pytest.raises(SpaceError):
        rank1_datum("CII", 1)


def test_aiii_table():
    d = aiii_datum(2, 2)
    assert d.family == "C2" and d.r == 0
    d = aiii_datum(2, 5)
    assert d.family == "BC2" and d.r == 3 and d.m1 == 6 and (d.m0, d.m2) == (2, 1)
    d = aiii_datum(3, 4)
    assert d.family == "BC3" and d.r == 1
    assert aiii_datum(1, 4) == rank1_datum("AIII", 4)
    with pytest.raises(SpaceError):
        aiii_datum(4, 5)
    with pytest.raises(SpaceError):
        aiii_datum(3, 2)


def test_r_only_for_aiii():
    with pytest.raises(SpaceError):
        rank1_datum("CII", 2).r


def test_table_round_trip():
    rows = json.loads(dump_root_table())
    assert len(rows) == len(root_table())
    for row, datum in zip(rows, root_table()):
        nu = row.pop("nu")
        assert RootDatum(**row) == datum
        if datum.p == 1:
            assert nu == (row["m1"] + row["m2"] - 1) / 2
        else:
            assert nu == row["q"] - row["p"]


def test_plancherel_examples():
    assert plancherel_density(aiii_datum(2, 3), [2, 1]) == 72
    assert plancherel_density(rank1_datum("AI"), 3.0) == 3
    assert plancherel_density(aiii_datum(3, 3), [3, 2, 1]) == 86400
    assert plancherel_density(rank1_datum("CII", 2), 2.0) == 2.0 ** 7


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 50), min_size=3, max_size=3))
def test_plancherel_permutation_invariant(lam):
    d = aiii_datum(3, 5)
    base = plancherel_density(d, sorted(lam, reverse=True))
    for perm in ([1, 0, 2], [2, 1, 0], [0, 2, 1]):
        np.testing.assert_allclose(plancherel_density(d, [lam[i] for i in perm]), base, rtol=1e-12)


def test_plancherel_vanishes_on_walls():
    d = aiii_datum(2, 3)
    assert plancherel_density(d, [2, 2]) == 0
    assert plancherel_density(d, [2, 0]) == 0
    assert plancherel_density(d, [2, 1.9]) > 0


def test_classify_examples():
    assert classify_point((2, 1)).cls is PointClass.REGULAR
    assert classify_point((1.5, 1.5)).cls is PointClass.TYPE_D
    assert classify_point((1, 0)).cls is PointClass.TYPE_A
    assert classify_point((0, 0)).cls is PointClass.ZERO
    assert classify_point((1, 2)).coords == (2.0, 1.0)
    assert classify_point((3, 2, 2)).cls is PointClass.SINGULAR
    assert classify_point((0.7,)).cls is PointClass.REGULAR


def test_classify_snaps():
    pt = classify_point((1.5, 1.5 * (1 - 1e-14)))
    assert pt.cls is PointClass.TYPE_D and pt.coords[0] == pt.coords[1]
    assert classify_point((1.0, 1e-15)).cls is PointClass.TYPE_A
    assert classify_point((1.5, 1.5 * (1 - 1e-9))).cls is PointClass.REGULAR


def test_classify_rejects_negative():
    with pytest.raises(SpaceError):
        classify_point((1, -1))


def test_chamber_point():
    assert ChamberPoint((3, 2, 1)).coords == (3.0, 2.0, 1.0)
    with pytest.raises(SpaceError):
        ChamberPoint((1, 1))
    with pytest.raises(SpaceError):
        ChamberPoint((1, 0))


def test_l1_power():
    assert l1_power_lookup(rank1_datum("AI"), classify_point((1,))) == 2
    assert l1_power_lookup(aiii_datum(2, 3), classify_point((2, 1))) == 2
    assert l1_power_lookup(aiii_datum(2, 2), classify_point((1, 1))) == 2
    assert l1_power_lookup(aiii_datum(2, 4), classify_point((1, 0))) == 2
    a2 = RootDatum("A2", 2, None, 1, 0, 0, "AI")
    assert l1_power_lookup(a2, classify_point((1, 1))) == 3
    d3 = RootDatum("D3", 3, None, 1, 0, 0, "AI")
    assert l1_power_lookup(d3, classify_point((2, 2, 1))) == 4
    with pytest.raises(SpaceError):
        l1_power_lookup(aiii_datum(2, 3), classify_point((0, 0)))


def test_regions_examples():
    assert chamber_region((10, 7), 2, ball_radius=5) == "W1"
    assert chamber_region((10, 2), 2, c=3) == "W22"
    assert chamber_region((10, 4), 2, c=3) == "W21"
    assert chamber_region((10, 4), 2) == "W2"
    assert chamber_region((3, 2), 2, ball_radius=5) == "Ball"
    assert chamber_region((10, 6, 1), 3) == "W2"
    assert chamber_region((10, 6, 5), 3) == "W1"
    assert chamber_region((10, 4, 1), 3, c=2) == "W32"
    assert chamber_region((10, 4, 3), 3, c=2) == "W31"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=3, max_size=3, unique=True))
def test_regions_partition_rank3(lam):
    lam = sorted(lam, reverse=True)
    tag = chamber_region(lam, 3, c=4)
    half = lam[0] / 2
    checks = {
        "W1": lam[2] >= half,
        "W2": lam[1] >= half > lam[2],
        "W31": half > lam[1] and lam[2] > 4,
        "W32": half > lam[1] and lam[2] <= 4,
    }
    assert sum(checks.values()) == 1
    assert checks[tag]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 100), min_size=2, max_size=2, unique=True))
def test_regions_partition_rank2(lam):
    lam = sorted(lam, reverse=True)
    tag = chamber_region(lam, 2, c=4)
    checks = {"W1": lam[1] >= lam[0] / 2, "W21": lam[0] / 2 > lam[1] > 4,
              "W22": lam[0] / 2 > lam[1] and lam[1] <= 4}
    assert sum(checks.values()) == 1 and checks[tag]


def test_default_ball_radius():
    assert default_ball_radius(classify_point((2, 1))) == 8
    assert default_ball_radius(classify_point((2, 0.5))) == 16
    assert math.isclose(default_ball_radius(classify_point((1, 0))), 8)
