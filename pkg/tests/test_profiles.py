import pytest

from probesense.profiles import (
    BUILTIN_PROFILES,
    Randomization,
    ScreenState,
    StateParams,
    builtin_profile,
)

OFF = ScreenState.DISPLAY_OFF
ON = ScreenState.DISPLAY_ON


class TestBuiltins:
    def test_all_four_models_present(self):
        assert set(BUILTIN_PROFILES) == {"iPhone6S", "SamsungS7", "SamsungJ5", "XiaomiMiNote3"}

    def test_j5_display_off(self):
        p = builtin_profile("SamsungJ5")
        assert p.randomization is Randomization.NONE
        off = p.params(OFF)
        assert off.events_per_hour == 4
        assert off.packets_per_event == 10
        assert off.interval_mode_s is None  # no mode measured for this state

    def test_iphone_display_on(self):
        p = builtin_profile("iPhone6S")
        assert p.randomization is Randomization.PER_EVENT
        on = p.params(ON)
        assert on.events_per_hour == 54
        assert on.packets_per_event == 2
        assert on.interval_mode_s == 45

    def test_xiaomi_display_off(self):
        off = builtin_profile("XiaomiMiNote3").params(OFF)
        assert off.events_per_hour == 89
        assert off.packets_per_event == 5
        assert (off.interval_min_s, off.interval_mode_s, off.interval_max_s) == (1, 60, 569)

    def test_s7(self):
        p = builtin_profile("SamsungS7")
        assert p.randomization is Randomization.PER_EVENT
        assert p.params(OFF).events_per_hour == 13
        assert p.params(OFF).packets_per_event == 6
        assert p.params(ON).events_per_hour == 18
        assert p.params(ON).packets_per_event == 9

    def test_unknown_model_lists_available(self):
        with pytest.raises(ValueError) as err:
            builtin_profile("NokiaBrick")
        for name in BUILTIN_PROFILES:
            assert name in str(err.value)


class TestStateParams:
    def test_mode_must_lie_within_bounds(self):
        with pytest.raises(ValueError):
            StateParams(10, 1, 30, 60, mode := 90)  # noqa: F841

    def test_positive_rate_required(self):
        with pytest.raises(ValueError):
            StateParams(0, 1, 30, 60)

    def test_gap_scale_calibrates_mean_to_rate(self):
        p = StateParams(events_per_hour=89, packets_per_event=5,
                        interval_min_s=1, interval_max_s=569, interval_mode_s=60)
        assert p.raw_mean_interval_s() * p.gap_scale() == pytest.approx(3600 / 89)

    def test_gap_scale_uniform_when_no_mode(self):
        p = StateParams(4, 10, 552, 922)
        assert p.raw_mean_interval_s() == pytest.approx(737)
        assert p.raw_mean_interval_s() * p.gap_scale() == pytest.approx(900)
