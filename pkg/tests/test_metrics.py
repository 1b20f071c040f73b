import csv

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.linalg import solve_toeplitz, toeplitz

from seganforge.audio.clip import AudioClip
from seganforge.config import settings
from seganforge.exceptions import DegenerateFrameError, PesqAdapterError, SeganForgeError
from seganforge.metrics import (
    EvaluationPair,
    PesqAdapter,
    autocorrelation,
    composite_measures,
    evaluate_corpus,
    evaluate_utterance,
    levinson_durbin,
    llr,
    llr_frames,
    lpc_coefficients,
    mean_report,
    parse_pesq_output,
    pesq_external,
    segmental_snr,
    write_breakdown_csv,
    write_metrics_csv,
    wss,
)
from seganforge.metrics.framing import framed_pair, lowest_fraction_mean
from seganforge.models.schemas import FrameSpec, MetricsReport, NoiseCondition


def _ar1(n: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros(n)
    noise = rng.standard_normal(n)
    for index in range(1, n):
        out[index] = rho * out[index - 1] + noise[index]
    return out


def _lag_products(x: np.ndarray, order: int) -> np.ndarray:
    return np.array([np.dot(x[: x.shape[0] - k], x[k:]) for k in range(order + 1)])


def test_frame_spec_sizes():
    spec = FrameSpec()
    assert spec.frame_length(16000) == 480
    assert spec.hop_length(16000) == 120


def test_identity_pairs_score_perfectly(rng):
    for _ in range(50):
        clip = AudioClip(samples=0.2 * rng.standard_normal(int(rng.integers(2000, 6000))))
        assert segmental_snr(clip, clip) == 35.0
        assert llr(clip, clip) == 0.0
        assert wss(clip, clip) == 0.0


def test_segmental_snr_of_constant_ratio_error(speech_clip):
    # error = g * clean gives the same SNR in every frame
    gain = 10.0 ** (-5.0 / 20.0)
    degraded = speech_clip.with_samples(speech_clip.samples * (1.0 - gain))

    assert segmental_snr(speech_clip, degraded) == pytest.approx(5.0, abs=0.01)


def test_segmental_snr_of_inverted_signal(speech_clip):
    inverted = speech_clip.with_samples(-speech_clip.samples)
    assert segmental_snr(speech_clip, inverted) == pytest.approx(-6.02, abs=0.01)


def test_unclipped_segmental_snr_exceeds_ceiling(speech_clip):
    gain = 10.0 ** (-50.0 / 20.0)
    degraded = speech_clip.with_samples(speech_clip.samples * (1.0 - gain))

    assert segmental_snr(speech_clip, degraded) == 35.0
    assert segmental_snr(speech_clip, degraded, clipped=False) == pytest.approx(50.0, abs=0.01)


def test_segmental_snr_rejects_silent_clean(speech_clip):
    with pytest.raises(SeganForgeError):
        segmental_snr(speech_clip.with_samples(np.zeros(len(speech_clip))), speech_clip)


def test_metrics_trim_to_shorter_signal(speech_clip):
    shorter = speech_clip.with_samples(speech_clip.samples[:8000])
    clean_frames, degraded_frames, _ = framed_pair(speech_clip, shorter, FrameSpec())
    assert clean_frames.shape == degraded_frames.shape
    assert segmental_snr(speech_clip, shorter) == 35.0


def test_order_one_lpc_closed_form(rng):
    frame = rng.standard_normal(400)
    r = autocorrelation(frame, 1)
    a = lpc_coefficients(frame, 1)

    assert a[0] == 1.0
    assert a[1] == pytest.approx(-r[1] / r[0], rel=1e-12)


def test_autocorrelation_matches_lag_products(rng):
    frame = rng.standard_normal(64)
    np.testing.assert_allclose(autocorrelation(frame, 5), _lag_products(frame, 5))


def test_levinson_recovers_ar1_coefficient(rng):
    r = _lag_products(_ar1(100_000, 0.9, rng), 10)

    a = levinson_durbin(r, 10)

    assert a[1] == pytest.approx(-0.9, abs=0.02)
    assert np.all(np.abs(a[2:]) < 0.02)


def test_levinson_on_white_noise_is_flat(rng):
    a = levinson_durbin(_lag_products(rng.standard_normal(100_000), 10), 10)
    assert np.all(np.abs(a[1:]) < 0.05)


def test_levinson_matches_direct_toeplitz_solve(rng):
    r = _lag_products(_ar1(4000, 0.7, rng), 10)
    direct = solve_toeplitz(r[:10], -r[1:11])
    np.testing.assert_allclose(levinson_durbin(r, 10)[1:], direct, rtol=1e-8, atol=1e-10)


def test_levinson_rejects_zero_energy():
    with pytest.raises(DegenerateFrameError):
        levinson_durbin(np.zeros(11), 10)


def test_llr_matches_direct_quadratic_forms(rng):
    clean = AudioClip(samples=0.05 * _ar1(3200, 0.9, rng))
    degraded = AudioClip(samples=0.05 * rng.standard_normal(3200))
    clean_frames, degraded_frames, _ = framed_pair(clean, degraded, FrameSpec())

    expected = []
    for c_frame, d_frame in zip(clean_frames, degraded_frames, strict=True):
        r_c = _lag_products(c_frame, 10)
        r_d = _lag_products(d_frame, 10)
        a_c = np.concatenate([[1.0], solve_toeplitz(r_c[:10], -r_c[1:])])
        a_d = np.concatenate([[1.0], solve_toeplitz(r_d[:10], -r_d[1:])])
        big_r = toeplitz(r_c)
        expected.append(np.log((a_d @ big_r @ a_d) / (a_c @ big_r @ a_c)))

    assert llr(clean, degraded) == pytest.approx(lowest_fraction_mean(np.array(expected)), abs=1e-6)


def test_llr_frames_are_non_negative(rng):
    for _ in range(10):
        clean = AudioClip(samples=rng.standard_normal(2400))
        degraded = AudioClip(samples=rng.standard_normal(2400))
        assert np.all(llr_frames(clean, degraded) >= 0.0)


def test_wss_is_gain_invariant(rng):
    noise = AudioClip(samples=0.1 * rng.standard_normal(4800))
    other = AudioClip(samples=0.1 * rng.standard_normal(4800))

    assert wss(noise, noise.with_samples(2.0 * noise.samples)) <= 1e-6
    assert wss(noise, other.with_samples(0.5 * other.samples)) == pytest.approx(
        wss(noise, other), rel=1e-6
    )


def test_lowest_fraction_mean_drops_top_five_percent():
    values = np.arange(1.0, 21.0)  # 20 frames: keep 19
    assert lowest_fraction_mean(values) == pytest.approx(np.mean(np.arange(1.0, 20.0)))
    assert lowest_fraction_mean(np.array([3.0])) == 3.0


def test_composite_measures_reference_cases():
    assert composite_measures(4.5, 0.0, 0.0, 35.0) == (5.0, 5.0, 5.0)
    csig, _, _ = composite_measures(1.0, 2.0, 100.0, 0.0)
    assert csig == 1.0
    assert composite_measures(0.0, 0.0, 0.0, 0.0) == pytest.approx((3.093, 1.634, 1.594))


def _composite_oracle(pesq, llr_value, wss_value, ssnr):
    def clamp(value):
        return min(5.0, max(1.0, value))

    return (
        clamp(3.093 - 1.029 * llr_value + 0.603 * pesq - 0.009 * wss_value),
        clamp(1.634 + 0.478 * pesq - 0.007 * wss_value + 0.063 * ssnr),
        clamp(1.594 + 0.805 * pesq - 0.512 * llr_value - 0.007 * wss_value),
    )


def test_composite_measures_match_oracle():
    rng = np.random.default_rng(2008)
    for pesq, llr_value, wss_value, ssnr in rng.uniform([-0.5, 0, 0, -10], [4.5, 3, 120, 35], (20, 4)):
        got = composite_measures(pesq, llr_value, wss_value, ssnr)
        want = _composite_oracle(pesq, llr_value, wss_value, ssnr)
        assert got == pytest.approx(want, abs=1e-9)


def _wss_oracle(clean, degraded, fs=16000):
    """Frame-by-frame loop rendition of the Klatt-weighted slope distance"""
    centers = [
        50.0, 120.0, 190.0, 260.0, 330.0, 400.0, 470.0, 540.0, 617.372, 703.378, 798.717,
        904.128, 1020.38, 1148.30, 1288.72, 1442.54, 1610.70, 1794.16, 1993.93, 2211.08,
        2446.71, 2701.97, 2978.04, 3276.17, 3597.63,
    ]  # fmt: skip
    widths = [
        70.0, 70.0, 70.0, 70.0, 70.0, 70.0, 70.0, 77.3724, 86.0056, 95.3398, 105.411, 116.256,
        127.914, 140.423, 153.823, 168.154, 183.457, 199.776, 217.153, 235.631, 255.255,
        276.072, 298.126, 321.465, 346.136,
    ]  # fmt: skip
    bands = len(centers)
    win = round(0.030 * fs)
    hop = round(win * 0.25)
    n_fft = 1
    while n_fft < 2 * win:
        n_fft *= 2
    half = n_fft // 2
    j = np.arange(half)
    filters = []
    for center, width in zip(centers, widths, strict=True):
        f0 = np.floor(center / (fs / 2) * half)
        bw = width / (fs / 2) * half
        response = np.exp(-11.0 * ((j - f0) / bw) ** 2 + np.log(widths[0]) - np.log(width))
        filters.append(np.where(response > np.exp(-30.0 / (2.0 * 2.303)), response, 0.0))
    window = np.array([0.5 * (1 - np.cos(2 * np.pi * n / (win + 1))) for n in range(1, win + 1)])

    def energies(frame):
        spectrum = np.abs(np.fft.fft(frame * window, n_fft)) ** 2
        return np.array([10 * np.log10(max(np.sum(spectrum[:half] * f), 1e-10)) for f in filters])

    def weights(energy, slope):
        out = np.zeros(bands - 1)
        for i in range(bands - 1):
            n = i
            if slope[i] > 0:
                while n < bands - 1 and slope[n] > 0:
                    n += 1
                peak = energy[n - 1]
            else:
                while n >= 0 and slope[n] <= 0:
                    n -= 1
                peak = energy[n + 1]
            w_max = 20.0 / (20.0 + energy.max() - energy[i])
            w_loc = 1.0 / (1.0 + peak - energy[i])
            out[i] = w_max * w_loc
        return out

    distances = []
    length = min(len(clean), len(degraded))
    for start in range(0, length - win + 1, hop):
        e_clean = energies(clean[start : start + win])
        e_degraded = energies(degraded[start : start + win])
        s_clean, s_degraded = np.diff(e_clean), np.diff(e_degraded)
        w = (weights(e_clean, s_clean) + weights(e_degraded, s_degraded)) / 2
        distances.append(np.sum(w * (s_clean - s_degraded) ** 2) / np.sum(w))
    distances.sort()
    keep = int(np.floor(len(distances) * 0.95 + 0.5))
    return float(np.mean(distances[:keep]))


def test_wss_matches_direct_implementation():
    rng = np.random.default_rng(31)
    t = np.arange(2400) / 16000
    tones = 0.3 * np.sin(2 * np.pi * 220 * t) + 0.1 * np.sin(2 * np.pi * 1750 * t)
    clean = AudioClip(samples=tones + 0.01 * rng.standard_normal(2400))
    degraded = AudioClip(samples=clean.samples + 0.05 * _ar1(2400, 0.8, rng))

    expected = _wss_oracle(
        np.asarray(clean.samples, dtype=np.float64), np.asarray(degraded.samples, dtype=np.float64)
    )

    assert expected > 0.0
    assert wss(clean, degraded) == pytest.approx(expected, rel=1e-6, abs=1e-6)


def test_composite_measures_always_clamped(rng):
    for _ in range(50):
        values = composite_measures(*rng.uniform([-0.5, 0, 0, -10], [4.5, 5, 200, 35]))
        assert all(1.0 <= value <= 5.0 for value in values)


def test_pesq_output_parsing():
    assert parse_pesq_output("P.862.2 Prediction (MOS-LQO): = 2.71\n") == 2.71
    with pytest.raises(PesqAdapterError):
        parse_pesq_output("garbage")
    with pytest.raises(PesqAdapterError):
        parse_pesq_output("score 7.3")
    assert parse_pesq_output("MOS=3.10 (ref)", r"MOS=(\d+\.\d+)") == 3.1


def test_pesq_external_with_mock_adapter(tmp_path):
    adapter = PesqAdapter(command="echo {clean} {degraded} 2.71")
    assert pesq_external(tmp_path / "c.wav", tmp_path / "d.wav", adapter) == 2.71

    with pytest.raises(PesqAdapterError) as info:
        pesq_external(tmp_path / "c.wav", tmp_path / "d.wav", PesqAdapter(command="echo garbage"))
    assert "garbage" in info.value.output


def test_missing_pesq_adapter_is_unavailable(tmp_path):
    missing = PesqAdapter(command="definitely-not-a-pesq-binary {clean} {degraded}")
    assert pesq_external(tmp_path / "c.wav", tmp_path / "d.wav", missing) is None
    assert pesq_external(tmp_path / "c.wav", tmp_path / "d.wav", None) is None


def test_adapter_from_settings(monkeypatch):
    monkeypatch.setattr(settings, "PESQ_COMMAND", None)
    assert PesqAdapter.from_settings(settings) is None
    monkeypatch.setattr(settings, "PESQ_COMMAND", "pesq +16000 {clean} {degraded}")
    monkeypatch.setattr(settings, "PESQ_PATTERN", r"= (\d\.\d+)")
    adapter = PesqAdapter.from_settings(settings)
    assert adapter.render("a.wav", "b.wav") == ["pesq", "+16000", "a.wav", "b.wav"]
    assert adapter.pattern == r"= (\d\.\d+)"


def test_utterance_report_without_pesq(speech_clip, noise_clip):
    noisy = speech_clip.with_samples(speech_clip.samples + noise_clip.samples[:16000])

    report = evaluate_utterance(speech_clip, noisy)

    assert report.pesq is None and report.csig is None and report.cbak is None
    assert report.llr > 0.0 and report.wss > 0.0
    assert report.ssnr < 35.0


def test_utterance_report_with_mock_pesq(speech_clip, noise_clip):
    noisy = speech_clip.with_samples(speech_clip.samples + noise_clip.samples[:16000])

    report = evaluate_utterance(speech_clip, noisy, adapter=PesqAdapter(command="echo 2.71"))

    assert report.pesq == 2.71
    assert (report.csig, report.cbak, report.covl) == composite_measures(
        2.71, report.llr, report.wss, report.ssnr
    )


def test_metrics_report_requires_pesq_for_composites():
    with pytest.raises(ValidationError):
        MetricsReport(csig=3.0, cbak=3.0, covl=3.0, ssnr=1.0, llr=0.1, wss=10.0)
    with pytest.raises(ValidationError):
        MetricsReport(pesq=2.0, ssnr=1.0, llr=0.1, wss=10.0)


def _tagged(clip: AudioClip, utterance_id: str, noise_type: str, snr_db: float) -> AudioClip:
    return clip.with_samples(
        clip.samples,
        utterance_id=utterance_id,
        condition=NoiseCondition(noise_type=noise_type, snr_db=snr_db),
    )


def test_corpus_mean_and_breakdown(speech_clip, noise_clip):
    pairs = []
    for index, (noise_type, snr_db) in enumerate([("white", 5.0), ("white", 10.0), ("hum", 5.0)]):
        clean = _tagged(speech_clip, f"u{index}", noise_type, snr_db)
        noisy = clean.with_samples(clean.samples + (index + 1) * 0.05 * noise_clip.samples[:16000])
        pairs.append(EvaluationPair(clean=clean, degraded=noisy))

    evaluation = evaluate_corpus(pairs)
    reversed_evaluation = evaluate_corpus(list(reversed(pairs)))
    singles = [evaluate_utterance(pair.clean, pair.degraded) for pair in pairs]

    assert evaluation.report == reversed_evaluation.report
    assert evaluation.report.ssnr == pytest.approx(np.mean([s.ssnr for s in singles]))
    assert evaluation.report.n_utterances == 3
    assert set(evaluation.by_condition) == {("hum", 5.0), ("white", 5.0), ("white", 10.0)}
    assert evaluation.by_noise_type["white"].n_utterances == 2
    assert [row.utterance_id for row in evaluation.rows] == ["u0", "u1", "u2"]


def test_corpus_keeps_failed_utterances_as_rows(speech_clip):
    good = EvaluationPair(clean=speech_clip, degraded=speech_clip)
    too_short = speech_clip.with_samples(speech_clip.samples[:100], utterance_id="short")
    bad = EvaluationPair(clean=too_short, degraded=too_short)

    evaluation = evaluate_corpus([good, bad])

    statuses = {row.utterance_id: row.status for row in evaluation.rows}
    assert statuses == {"spk00_000": "ok", "short": "failed"}
    assert evaluation.report.ssnr == 35.0
    with pytest.raises(SeganForgeError):
        evaluate_corpus([bad])
    with pytest.raises(ValueError):
        evaluate_corpus([])


def test_mean_report_averages_available_values():
    reports = [
        MetricsReport(ssnr=0.0, llr=0.2, wss=10.0),
        MetricsReport(ssnr=10.0, llr=0.4, wss=30.0),
    ]
    mean = mean_report(reports)
    assert (mean.ssnr, mean.llr, mean.wss) == pytest.approx((5.0, 0.3, 20.0))
    assert mean.pesq is None
    assert mean.n_utterances == 2


def test_csv_reports_leave_pesq_columns_empty(tmp_path, speech_clip):
    clean = _tagged(speech_clip, "u0", "white", 5.0)
    evaluation = evaluate_corpus([EvaluationPair(clean=clean, degraded=clean)])

    write_metrics_csv(evaluation.rows, tmp_path / "metrics.csv")
    write_breakdown_csv(evaluation, tmp_path / "breakdown.csv")

    with (tmp_path / "metrics.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0]) == [
        "utterance_id", "noise_type", "snr_db", "pesq", "csig", "cbak", "covl",
        "ssnr", "llr", "wss", "status",
    ]  # fmt: skip
    assert rows[0]["pesq"] == "" and rows[0]["covl"] == ""
    assert float(rows[0]["ssnr"]) == 35.0
    breakdown = (tmp_path / "breakdown.csv").read_text().splitlines()
    assert len(breakdown) == 3  # header, (white, 5.0), white
