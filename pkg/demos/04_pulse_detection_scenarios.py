#!/usr/bin/env python3
"""Quadratic-pulse detection across noise scenarios, preset by preset.

Each trace carries five pulses (quadratic small/medium/large, square,
sawtooth, alternating sign) over a dc offset, a slow background sinusoid,
and scenario noise.  Every preset's bank produces a per-sample statistic:
fitted quadratic power over fitted non-constant, non-quadratic power.
The run aggregates medium-pulse peak SNR medians into a scenario-by-preset
matrix and prints the detection pattern.

The narrow-band preset E is designed against the matched interferers, so it
is the only one that keeps working in the matched-colored scenario.

Run:  python demos/04_pulse_detection_scenarios.py [seeds]
"""

import sys

import sgwhiten as sg

seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 10)

amplitude = sg.calibrate_amplitude(target_db=28.5, seeds=seeds)
print(f"pulse amplitude calibrated to {amplitude:.2f} mV "
      f"(plain preset, low-white medium-pulse peak at 28.5 dB)\n")

result = sg.run_experiment(seeds=seeds, amplitude=amplitude)

labels = result.labels
print(f"median medium-pulse peak SNR (dB), threshold {result.gamma_db:.0f} dB:")
print(f"{'scenario':>20} " + " ".join(f"{lab:>7}" for lab in labels))
for scenario in result.scenarios:
    row = " ".join(f"{result.cells[(scenario, lab)].median_db:7.1f}"
                   for lab in labels)
    print(f"{scenario:>20} {row}")

print("\nmedium-pulse detection fraction across seeds:")
for scenario in result.scenarios:
    row = " ".join(f"{result.cells[(scenario, lab)].detect_medium:7.2f}"
                   for lab in labels)
    print(f"{scenario:>20} {row}")

matched = {lab: result.cells[("matched-colored", lab)].median_db for lab in labels}
best = max(matched, key=matched.get)
runner = max((v for k, v in matched.items() if k != best))
print(f"\nmatched interference: preset {best} leads the field by "
      f"{matched[best] - runner:.1f} dB; whitening the known interferer "
      f"frequencies is what keeps its background power down.")
