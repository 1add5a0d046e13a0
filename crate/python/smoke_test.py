"""Smoke test for the pycyclotactor extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist && pip install dist/pycyclotactor-*.whl
"""

import math
import pathlib

import pycyclotactor as ct

ASSETS = pathlib.Path(__file__).resolve().parent.parent / "assets"


def main():
    assert "sensor_resolution_mm = 0.2" in ct.default_config()
    assert ct.config_value("output_steps") == "2195"

    levels = {ct.sense_proximity(0.2 * i) for i in range(86)}
    assert len(levels) == 86, len(levels)

    code = ct.quantize_drive(0.5, 60.0)
    assert abs(ct.drive_actuation(code, 60.0) - 0.5) <= 1 / 2194

    all_pass, verdicts = ct.latency_report()
    assert not all_pass
    assert [v[5] for v in verdicts] == [True, False, False], verdicts

    table = ct.calibrate(points=6)
    assert len(table.strip().splitlines()) == 7

    gesture = (ASSETS / "ramp_two_pulses.gesture").read_text()
    trace, audio = ct.run_scenario(gesture, table_csv=table, seed=1)
    assert len(audio) == 96000
    assert all(-1.0 <= x <= 1.0 for x in audio)
    rms = math.sqrt(sum(x * x for x in audio) / len(audio))
    assert 0.05 < rms < 0.2, rms

    peaks, corr = ct.analyze(trace)
    assert len(peaks) == 2, peaks
    assert peaks[1][0] - peaks[0][0] >= 1.0
    assert corr is not None and corr < -0.99

    try:
        ct.sense_proximity(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative gap accepted")

    print("smoke test passed: peaks at", ", ".join(f"{t:.3f} s" for t, _ in peaks))


if __name__ == "__main__":
    main()
