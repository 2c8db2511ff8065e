"""Radar-only covariance at the default settings: rank, loss and beam pattern.

Usage: python scripts/radar_only.py [output.csv]
"""

import sys
import time
from pathlib import Path

import numpy as np

from dfrc import ArrayGeometry, BeamSpec, beam_pattern, radar_only
from dfrc.metrics import in_out_beam_ratio
from dfrc.simulate import series_csv


def main(path: str = "out/radar_only_pattern.csv") -> None:
    geom = ArrayGeometry(10)
    spec = BeamSpec.reference_default()
    t0 = time.perf_counter()
    R0, alpha, loss = radar_only(geom, spec)
    dt = time.perf_counter() - t0
    ev = np.linalg.eigvalsh(R0)[::-1]
    rank = int(np.sum(ev > 1e-3 * ev[0]))
    print(f"solve time {dt:.2f} s, loss {loss:.6g}, alpha {alpha:.6g}, rank {rank}")
    print("eigenvalues:", np.array2string(ev, precision=4))
    print(f"in/out-beam power ratio {in_out_beam_ratio(geom, R0, spec.grid, spec.target_directions, spec.beam_width):.2f}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(series_csv(spec.grid, beam_pattern(geom, R0, spec.grid), ("theta_deg", "power")))
    print("pattern written to", path)


if __name__ == "__main__":
    main(*sys.argv[1:])
