"""Range profile and Capon spectrum for the five-target layout.

Designs the radar-only and SDR (K=2, 12 dB) precoders, transmits one QPSK
block of length N through the radar model and writes the range profile toward
0 degrees and the Capon spectrum at delay bin 20 for each precoder.

Usage: python scripts/waveform_figures.py [output_dir]
"""

import sys
from pathlib import Path

import numpy as np

from dfrc import ArrayGeometry, BeamSpec, DesignConfig, Precoder, build_radar_loss, radar_only, sdr_beamform
from dfrc.design import db2lin
from dfrc.linalg import lower_factor
from dfrc.simulate import (REFERENCE_TARGETS, NoiseModel, bin_covariance, capon_spectrum, find_peaks,
                           radar_receive, range_compress, range_profile, rayleigh_channel, series_csv,
                           trial_rng, waveform_block)


def main(out_dir: str = "out/waveform") -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    geom = ArrayGeometry(10)
    spec = BeamSpec.reference_default()
    obj = build_radar_loss(geom, spec)
    R0, _, _ = radar_only(geom, spec, obj=obj)
    ch = rayleigh_channel(2, geom.M, trial_rng(2024, 0))
    sdr = sdr_beamform(geom, spec, DesignConfig(sinr=float(db2lin(12.0))), ch, obj)
    precoders = {"radar_only": Precoder(np.zeros((geom.M, 0)), lower_factor(R0)), "sdr": sdr.precoder}
    rng = trial_rng(2024, 99)
    for name, W in precoders.items():
        blk = waveform_block(W, 1024, rng)
        r = radar_receive(geom, REFERENCE_TARGETS, blk.X, NoiseModel(radar_var=1.0), rng)
        Z = range_compress(r, blk.X, max_delay=63)
        prof = range_profile(Z, geom, 0.0)
        capon = capon_spectrum(bin_covariance(Z[20]), geom, spec.grid)
        (out / f"{name}_range.csv").write_text(series_csv(np.arange(Z.shape[0]), prof, ("delay", "value")))
        (out / f"{name}_capon.csv").write_text(series_csv(spec.grid, capon, ("angle_deg", "value")))
        print(f"{name}: range peaks {find_peaks(prof, 3)}, "
              f"Capon peaks {find_peaks(capon, 3, spec.grid)}")


if __name__ == "__main__":
    main(*sys.argv[1:])
