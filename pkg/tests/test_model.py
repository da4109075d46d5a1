import datetime as dt
import math

from hypothesis import given, strategies as st

from nilm_meta.model import (
    Appliance, ApplianceRef, Categories, DateRange, DistributionData, DistributionSet, ElecMeter,
    GeoLocation, LearntModel, Measurement, MeterDevice, Prior, Sensor, as_date,
    check_local_invariants,
)


def codes(obj, **kw):
    return [d.code for d in check_local_invariants(obj, **kw)]


SENSOR = Sensor("house1/channel_1.dat")


def test_site_meter_with_one_sensor_is_fine():
    assert codes(ElecMeter(1, "EnviR", site_meter=True, sensors=(SENSOR,))) == []


def test_site_meter_and_submeter_conflict():
    meter = ElecMeter(2, "EnviR", site_meter=True, submeter_of=1, sensors=(SENSOR,))
    assert codes(meter) == ["E-METER-ROOT-AND-SUB"]


def test_meter_needs_a_role_and_sensors():
    assert codes(ElecMeter(1, "EnviR")) == ["E-WIRING-NO-PARENT-OR-ROOT", "E-METER-SENSOR-COUNT"]


def test_split_phase_meter_takes_up_to_three_sensors():
    three = ElecMeter(1, "EnviR", site_meter=True, sensors=(SENSOR,) * 3)
    four = ElecMeter(1, "EnviR", site_meter=True, sensors=(SENSOR,) * 4)
    assert codes(three) == []
    assert codes(four) == ["E-METER-SENSOR-COUNT"]


def test_dominant_appliance_must_be_on_the_meter():
    meter = ElecMeter(1, "EnviR", site_meter=True, sensors=(SENSOR,),
                      appliances=(Appliance("fridge"),),
                      dominant_appliance=ApplianceRef("kettle", 1))
    assert codes(meter) == ["E-DOMINANT-NOT-MEMBER"]


def test_unnormalised_distribution():
    d = DistributionData(frequencies=(0.3, 0.5), bin_edges=(0, 1, 2))
    assert codes(d) == ["E-PRIOR-NOT-NORMALIZED"]


def test_bin_edges_must_match_frequencies():
    d = DistributionData(frequencies=(0.5, 0.5), bin_edges=(0, 1))
    assert codes(d) == ["E-PRIOR-SHAPE"]


@given(st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=12))
def test_normalisation_check_agrees_with_fsum(freqs):
    d = DistributionData(frequencies=tuple(freqs),
                         categories=tuple(f"c{i}" for i in range(len(freqs))))
    flagged = "E-PRIOR-NOT-NORMALIZED" in codes(d)
    assert flagged == (abs(math.fsum(freqs) - 1.0) > 1e-6)


def test_prior_needs_content():
    assert codes(Prior()) == ["E-PRIOR-EMPTY"]


def test_count_and_multiple_are_exclusive():
    assert codes(Appliance("LED lamp", count=10, multiple=True)) == ["E-COUNT-AND-MULTIPLE"]


def test_date_range_order():
    assert codes(DateRange(2012, 2013)) == []
    assert codes(DateRange(dt.date(2013, 5, 1), 2013)) == ["E-DATE-RANGE"]
    assert as_date(2012) == dt.date(2012, 1, 1)


def test_geo_location_bounds():
    assert codes(GeoLocation(51.46, -0.12, "London", "GB")) == []
    assert set(codes(GeoLocation(91, 181))) == {"E-GEO-LATITUDE", "E-GEO-LONGITUDE"}


def test_measurement_limits_and_vocabulary():
    assert codes(Measurement("power", "apparent", 0, 30000)) == []
    assert codes(Measurement("power", "apparent", 10, 5)) == ["E-MEASUREMENT-LIMITS"]
    assert codes(Measurement("flux")) == ["E-MEASUREMENT-QUANTITY"]
    assert codes(Measurement("voltage", "apparent")) == ["E-MEASUREMENT-AC-TYPE"]


def test_device_needs_measurements():
    assert "E-DEVICE-NO-MEASUREMENTS" in codes(MeterDevice("EnviR", measurements=()))


def test_category_vocabulary():
    assert codes(Categories("cold", "large")) == []
    assert codes(Categories("spooky")) == ["E-CATEGORY-TRADITIONAL"]


def test_distribution_names():
    bad = DistributionSet({"colour": (Prior(source="subjective", citation="x"),)})
    assert codes(bad) == ["E-BAD-DISTRIBUTION-NAME"]


def test_learnt_model_vocabulary():
    assert codes(LearntModel("HMM", "fridge", parameters={})) == []
    assert codes(LearntModel("SVM-FOO", "fridge", parameters={})) == ["E-BAD-MODEL-TYPE"]


def test_paths_are_prefixed():
    (d,) = check_local_invariants(Appliance("fridge", count=0), "buildings/1/x")
    assert d.path == "buildings/1/x/count"
