# DSK against SSK when the oscillator phase wanders. DSK only compares antennas
# with each other, so a rotation shared by every antenna cancels out.
import numpy as np

from dsksim.impairments import WienerPhase, wiener_path
from dsksim.scenarios.cell import CircularCellConfig, build_circular_cell, draw_trials, simulate_trials

cell = build_circular_cell(CircularCellConfig(M=4, snr_db=6.0))
draws = draw_trials(cell, seed=1, point=0, start=0, stop=5000)

for linewidth in (0.0, 1e2, 1e4, 1e5):
    path = wiener_path(WienerPhase(linewidth, 1e-5), 5000, np.random.default_rng(0))
    out = simulate_trials(cell, draws, common_phase=path)
    dsk = np.mean(out.dsk != out.truth)
    ssk = np.mean(out.ssk != out.truth)
    print(f"linewidth {linewidth:8.0f} Hz   SER DSK {dsk:.4f}   SER SSK {ssk:.4f}")
