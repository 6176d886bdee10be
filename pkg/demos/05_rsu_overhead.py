# A car passes road-side units. Fewer pilots means longer gaps between
# reference updates; DSK barely notices, SSK falls apart.
from dsksim.scenarios.engine import Sweep
from dsksim.scenarios.rsu import RsuConfig, overhead_ratio, run_rsu_sweep, update_interval_for

cfg = RsuConfig(p_tx_dbm=12.0)
overheads = (0.44, 0.19, 0.0642, 0.005)
grid = tuple(update_interval_for(r) * cfg.T_s for r in overheads)
curve = run_rsu_sweep(cfg, Sweep("T_upd", grid), drives=8, seed=0)

for r, t in zip(overheads, grid):
    d, s = curve.point("dsk", t), curve.point("ssk", t)
    u = round(t / cfg.T_s)
    print(f"overhead {100 * overhead_ratio(cfg.N_p, u):5.2f}%  T_upd {t:.2e} s  "
          f"SER DSK {d.ser:.4f}  SER SSK {s.ser:.4f}  ({d.trials} symbols)")
