"""How much do the mirrors help as the AP count grows?

A short paired sweep: every AP count reuses the same walkers, so the
difference between the two columns is due to the mirrors alone. The gain is
largest when few APs are installed and LoS blockage leaves the user with
nothing else.

    python3 demos/02_ap_sweep.py
"""

from vlcris.config import ScenarioConfig
from vlcris.simkit import run_sweep

cfg = ScenarioConfig().replace(sim={"duration": 10.0, "dt": 0.1, "trials": 10})
rows = run_sweep(cfg, "N", range(2, 9), mobility=["low"])
table = {(r["axis"], r["ris"]): r for r in rows}

print(" N   rate RIS   rate off   gain    holes RIS  holes off  latency RIS")
for n in range(2, 9):
    on, off = table[(n, True)], table[(n, False)]
    gain = 100 * (on["rate"] / off["rate"] - 1)
    print(f"{n:2d}  {on['rate'] / 1e6:8.1f}  {off['rate'] / 1e6:8.1f}  {gain:5.1f}%  "
          f"{on['hole_frac']:9.4f}  {off['hole_frac']:9.4f}  {1e6 * on['delta']:8.2f} us")
