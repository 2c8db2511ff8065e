"""ZF loss below and above the plateau threshold Gamma_II for a few channels.

Usage: python scripts/zf_plateau.py [draws]
"""

import sys

import numpy as np

from dfrc import ArrayGeometry, BeamSpec, DesignConfig, build_radar_loss, zf_beamform
from dfrc.design import gamma_II, lin2db
from dfrc.simulate import rayleigh_channel, trial_rng


def main(draws: int = 5) -> None:
    geom = ArrayGeometry(10)
    spec = BeamSpec.reference_default()
    obj = build_radar_loss(geom, spec)
    base = DesignConfig()
    for t in range(int(draws)):
        ch = rayleigh_channel(2, geom.M, trial_rng(7, t))
        g2 = gamma_II(geom, spec, base, ch, obj)
        print(f"draw {t}: Gamma_II = {lin2db(g2):.2f} dB")
        for frac in (0.25, 0.5, 1.0, 2.0, 4.0):
            out = zf_beamform(geom, spec, base.with_sinr(frac * g2), ch, obj)
            if not out.feasible:
                print(f"  {frac:4.2f} Gamma_II: {out.status}")
                continue
            print(f"  {frac:4.2f} Gamma_II: loss {out.loss:.8f}  fairness {lin2db(np.min(out.gamma)):.3f} dB")


if __name__ == "__main__":
    main(*sys.argv[1:])
