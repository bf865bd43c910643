"""Full-duplex vs half-duplex sum rate across the slot split delta.

The full-duplex rate does not depend on delta (both links run all the
time); the two half-duplex references trade their downlink and uplink
slots against each other, under the default equal-energy power policy.
The RF-chain-conserved variant (one antenna per slot) stays below the
antenna-conserved one (both antennas per slot, MRT/MRC) for every split.

Semi-analytic curves, no simulation.  Writes sum_rate_vs_split.svg.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from fdcell import analytic
from fdcell.model import HdCondition, ScenarioConfig
from fdcell.svgplot import Series, write_chart

deltas = np.linspace(0.1, 0.9, 17)
s0 = ScenarioConfig()

fd_total = analytic.rate_fd(s0).total.value
rc, ac = [], []
for delta in deltas:
    s = replace(s0, delta=float(delta))
    rc.append(analytic.rate_hd_semianalytic(s, HdCondition.RC).total.value)
    ac.append(analytic.rate_hd_semianalytic(s, HdCondition.AC).total.value)

print("sum rate (bit/s/Hz) at the default scenario, equal-energy policy")
print("%6s  %8s %8s %8s" % ("delta", "FD", "HD rc", "HD ac"))
for i, delta in enumerate(deltas):
    print("%6.2f  %8.4f %8.4f %8.4f" % (delta, fd_total, rc[i], ac[i]))

best = int(np.argmax(ac))
print("best AC split: delta = %.2f (%.4f bit/s/Hz vs FD %.4f)"
      % (deltas[best], ac[best], fd_total))

out = Path(__file__).with_name("sum_rate_vs_split.svg")
write_chart(out, [
    Series("FD (any delta)", list(deltas), [fd_total] * len(deltas), dashed=True),
    Series("HD rc", list(deltas), rc),
    Series("HD ac", list(deltas), ac),
], title="Sum rate vs slot split", x_label="downlink slot fraction delta",
    y_label="sum rate (bit/s/Hz)")
print("wrote", out)
