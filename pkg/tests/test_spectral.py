import math

import numpy as np
import pytest

from ionchaos.spectral import (
    ChaosScanRow,
    ChaosScanScenario,
    Spectrum,
    TimeSeries,
    chaos_scan,
    entropy_crossover,
    peak_power_fraction,
    power_spectrum,
    spectral_entropy,
)


def tone(freq, n=4096, dtau=0.05, amp=1.0):
    t = np.arange(n) * dtau
    return TimeSeries(values=amp * np.cos(freq * t), dtau=dtau)


class TestTimeSeries:
    def test_rejects_short_series(self):
        with pytest.raises(ValueError):
            TimeSeries(values=np.ones(32), dtau=0.1)

    def test_rejects_nonfinite(self):
        vals = np.ones(128)
        vals[7] = np.nan
        with pytest.raises(ValueError):
            TimeSeries(values=vals, dtau=0.1)

    def test_rejects_bad_spacing(self):
        with pytest.raises(ValueError):
            TimeSeries(values=np.ones(128), dtau=0.0)


class TestPowerSpectrum:
    def test_single_tone_peak_within_one_bin(self):
        ts = tone(1.0)
        for window in ("rectangular", "hann"):
            s = power_spectrum(ts, window=window)
            peak = s.frequencies[np.argmax(s.power)]
            bin_width = s.frequencies[1] - s.frequencies[0]
            assert abs(peak - 1.0) <= bin_width

    def test_two_tone_power_ratio(self):
        t = np.arange(8192) * 0.05
        # On-bin frequencies so leakage does not blur the comparison.
        f1 = 2 * math.pi * 20 / (8192 * 0.05)
        f2 = 2 * math.pi * 200 / (8192 * 0.05)
        ts = TimeSeries(3.0 * np.cos(f1 * t) + 1.0 * np.cos(f2 * t), 0.05)
        s = power_spectrum(ts, window="rectangular")
        p1 = s.power[20]
        p2 = s.power[200]
        assert p1 / p2 == pytest.approx(9.0, rel=0.01)

    def test_parseval(self):
        rng = np.random.default_rng(1)
        vals = rng.normal(size=2048)
        ts = TimeSeries(vals, 0.1)
        for window in ("rectangular", "hann"):
            s = power_spectrum(ts, window=window)
            y = vals - vals.mean()
            w = np.hanning(2048) if window == "hann" else np.ones(2048)
            energy = np.sum((y * w) ** 2)
            assert np.sum(s.power) == pytest.approx(energy, rel=1e-10)

    def test_spectrum_nonnegative(self):
        rng = np.random.default_rng(2)
        s = power_spectrum(TimeSeries(rng.normal(size=512), 0.3))
        assert np.all(s.power >= 0)

    def test_rejects_unknown_window(self):
        with pytest.raises(ValueError):
            power_spectrum(tone(1.0), window="kaiser")


class TestSpectralEntropy:
    def test_single_bin_is_zero(self):
        s = Spectrum(frequencies=np.arange(5.0), power=np.array([0, 0, 3.0, 0, 0]))
        assert spectral_entropy(s) == 0.0

    def test_flat_is_one(self):
        s = Spectrum(frequencies=np.arange(64.0), power=np.ones(64))
        assert spectral_entropy(s) == pytest.approx(1.0, abs=1e-12)

    def test_rescaling_invariance(self):
        rng = np.random.default_rng(3)
        p = rng.uniform(0.1, 2.0, size=128)
        a = Spectrum(frequencies=np.arange(128.0), power=p)
        b = Spectrum(frequencies=np.arange(128.0), power=1e7 * p)
        assert spectral_entropy(a) == pytest.approx(spectral_entropy(b), abs=1e-14)

    def test_zero_power_rejected(self):
        s = Spectrum(frequencies=np.arange(4.0), power=np.zeros(4))
        with pytest.raises(ValueError):
            spectral_entropy(s)

    def test_classical_line_to_broadband_transition(self):
        # Regression values pinned from the first run of the tau <= 100
        # records: the drive-strength jump from 5 to 20 raises the
        # entropy by well over 0.2 and erodes the share of the five
        # strongest lines (0.98 down to 0.78).
        from ionchaos.classical import ClassicalState, integrate_cartesian
        from ionchaos.params import DimensionlessParams

        results = {}
        for eps in (2.0, 5.0, 20.0):
            p = DimensionlessParams.from_mu(eps, 0.45, 3.99)
            tr = integrate_cartesian(ClassicalState(0, 0, 0), p, 100.0, 0.05)
            s = power_spectrum(TimeSeries(tr.xi, 0.05))
            results[eps] = (spectral_entropy(s), peak_power_fraction(s))
        assert results[20.0][0] - results[5.0][0] > 0.2
        assert results[2.0][1] > 0.95
        assert results[20.0][1] < 0.85
        assert results[2.0][1] - results[20.0][1] > 0.15


class TestPeakPowerFraction:
    def test_pure_tone_carries_everything(self):
        # On-bin tone: the hann main lobe spans exactly the peak +- 1 bin.
        f = 2 * math.pi * 33 / (4096 * 0.05)
        s = power_spectrum(tone(f), window="hann")
        assert peak_power_fraction(s, n_peaks=1) > 0.99

    def test_flat_spectrum_carries_little(self):
        s = Spectrum(frequencies=np.arange(1000.0), power=np.ones(1000))
        assert peak_power_fraction(s, n_peaks=5) < 0.02


class TestEntropyCrossover:
    def test_basic_crossover(self):
        eps = [1.0, 2.0, 3.0, 4.0, 5.0]
        ent = [0.1, 0.12, 0.35, 0.4, 0.45]
        assert entropy_crossover(eps, ent, threshold=0.28) == 3.0

    def test_single_point_excursion_ignored(self):
        eps = [1.0, 2.0, 3.0, 4.0, 5.0]
        ent = [0.1, 0.35, 0.12, 0.4, 0.45]
        assert entropy_crossover(eps, ent, threshold=0.28) == 4.0

    def test_no_crossover(self):
        assert entropy_crossover([1.0, 2.0], [0.1, 0.2], threshold=0.28) is None

    def test_last_point_counts(self):
        assert entropy_crossover([1.0, 2.0], [0.1, 0.4], threshold=0.28) == 2.0


class TestChaosScan:
    def scenario(self):
        return ChaosScanScenario(tau_spectrum=40.0, dtau_out=0.05, tau_lyapunov=40.0)

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            chaos_scan([], self.scenario())

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            chaos_scan([2.0, 1.0], self.scenario())

    def test_rows_in_order_and_deterministic(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows = chaos_scan([0.0, 1.0, 1.0], self.scenario())
        assert [r.epsilon for r in rows] == [0.0, 1.0, 1.0]
        assert rows[1] == rows[2]
        assert all(r.error is None for r in rows)

    def test_zero_drive_from_origin_is_maximally_ordered(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            (row,) = chaos_scan([0.0], self.scenario())
        assert row.spectral_entropy == 0.0
        assert abs(row.lyapunov) < 1e-3

    def test_parallel_matches_serial(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            serial = chaos_scan([0.5, 1.0, 2.0], self.scenario(), workers=1)
            parallel = chaos_scan([0.5, 1.0, 2.0], self.scenario(), workers=3)
        assert serial == parallel
