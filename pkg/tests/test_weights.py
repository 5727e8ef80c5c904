import numpy as np
import pytest
from hypothesis import given, strategies as st

from crowdstop.core import QualityClass
from crowdstop.weights import PRESETS, WeightScheme, preset, scaled, weight_for

G, A, B = QualityClass.GOOD, QualityClass.AVERAGE, QualityClass.BAD


def test_preset_values():
    assert preset("V1").lam == (1, 1, 1) and preset("V1").gamma == (1, 1, 1)
    assert preset("V2").lam == (1.2, 1, 0.8) and preset("V2").gamma == (1, 1, 1)
    assert preset("V3").gamma == (1.05, 1, 0.95)
    assert preset("V4").gamma == (1.1, 1, 0.9)
    assert preset("V5").gamma == (1.1, 1, 1)
    assert preset("V6").gamma == (1, 1, 0.9)
    assert all(p.cadence == 1 for p in PRESETS.values())
    assert preset("v4") is PRESETS["V4"]


def test_unknown_preset():
    with pytest.raises(ValueError, match="unknown weight preset"):
        preset("V7")


@given(st.sampled_from(list(QualityClass)), st.integers(1, 500))
def test_v1_is_all_ones(cls, t):
    assert weight_for(preset("V1"), cls, t) == 1.0


def test_weight_examples():
    assert weight_for(preset("V4"), G, 3) == pytest.approx(1.21)
    v4m4 = WeightScheme((1, 1, 1), (1.1, 1, 0.9), cadence=4)
    assert weight_for(v4m4, B, 5) == pytest.approx(0.6561)
    assert [weight_for(v4m4, B, t) for t in (1, 2, 3, 4)] == [1.0] * 4
    assert weight_for(v4m4, B, 9) == pytest.approx(0.9**8)
    assert weight_for(preset("V2"), B, 40) == 0.8
    with pytest.raises(ValueError):
        weight_for(preset("V1"), G, 0)


@given(
    st.tuples(*[st.floats(0.1, 3)] * 3),
    st.sampled_from(list(QualityClass)),
    st.integers(1, 200),
    st.integers(1, 200),
)
def test_time_invariant_schemes_ignore_t(lam, cls, t1, t2):
    s = WeightScheme(lam, (1, 1, 1))
    assert s.time_invariant
    assert weight_for(s, cls, t1) == weight_for(s, cls, t2)


@pytest.mark.parametrize("name", ["V3", "V4", "V5", "V6"])
def test_good_bad_ratio_grows(name):
    s = preset(name)
    ratios = [weight_for(s, G, t) / weight_for(s, B, t) for t in range(1, 80)]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))
    expected = [(s.gamma_of(G) / s.gamma_of(B)) ** (t - 1) for t in range(1, 80)]
    assert np.allclose(ratios, expected, rtol=1e-12)


@pytest.mark.parametrize("step", [0.05, 0.1, 0.2, 0.3])
def test_magnitude_variants(step):
    s = scaled("V4", step)
    assert s.gamma == pytest.approx((1 + step, 1, 1 - step))
    assert scaled("V5", step).gamma == pytest.approx((1 + step, 1, 1))
    assert scaled("V6", step, cadence=4).cadence == 4
    assert WeightScheme((1, 1, 1), (1.3, 1, 0.7)).gamma == (1.3, 1, 0.7)


@pytest.mark.parametrize(
    "kw",
    [dict(lam=(0, 1, 1)), dict(gamma=(1, -1, 1)), dict(lam=(1, 1)), dict(cadence=0), dict(cadence=1.5)],
)
def test_scheme_validation(kw):
    with pytest.raises(ValueError):
        WeightScheme(**kw)


def test_weight_table_matches_scalar():
    for s in PRESETS.values():
        tab = s.table(60)
        for cls in QualityClass:
            for t in range(1, 61):
                assert tab[cls, t - 1] == weight_for(s, cls, t)
