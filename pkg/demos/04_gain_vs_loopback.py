"""When does full-duplex stop paying off?  Gain vs residual loopback.

The sum-rate gain (R_FD - R_HD) / R_FD is plotted against the residual
loopback interference level sigma_li for both half-duplex references,
under the equal-instantaneous-power policy.  With symmetric 25 dB powers
the antenna-conserved half-duplex reference overtakes full-duplex once
the loopback level crosses into the [-10, 0] dB window; dropping the
uplink power to 12 dB (asymmetric case) keeps full-duplex ahead across
the whole sweep.

Analytic curves only.  Writes gain_vs_loopback.svg next to this script.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np

from fdcell import analytic
from fdcell.model import HdCondition, HdPowerPolicy, ScenarioConfig, validate_scenario
from fdcell.svgplot import Series, write_chart

sym = validate_scenario(replace(
    ScenarioConfig(), hd_power_policy=HdPowerPolicy.POWER))
asym = replace(sym, p_ul_db=12.0)

sig_db = np.arange(-20.0, 10.1, 2.0)
sigmas = 10.0 ** (sig_db / 10.0)

curves = {}
for label, base in (("sym", sym), ("asym", asym)):
    for cond in (HdCondition.RC, HdCondition.AC):
        vals = [analytic.gain(replace(base, sigma_li=float(x)), cond).value
                for x in sigmas]
        curves[label, cond] = vals

print("sum-rate gain of full-duplex over half-duplex (equal-power policy)")
print("%8s  %9s %9s   %9s %9s"
      % ("sig(dB)", "sym rc", "sym ac", "asym rc", "asym ac"))
for i, db in enumerate(sig_db):
    print("%8.0f  %9.4f %9.4f   %9.4f %9.4f" % (
        db, curves["sym", HdCondition.RC][i], curves["sym", HdCondition.AC][i],
        curves["asym", HdCondition.RC][i], curves["asym", HdCondition.AC][i]))

ac_sym = curves["sym", HdCondition.AC]
crossed = [db for db, g in zip(sig_db, ac_sym) if g <= 0.0]
if crossed:
    print("symmetric AC gain first goes negative at sigma_li = %.0f dB"
          % crossed[0])
assert min(curves["asym", HdCondition.AC]) > 0.0  # FD ahead over the whole sweep

out = Path(__file__).with_name("gain_vs_loopback.svg")
write_chart(out, [
    Series("sym rc", list(sig_db), curves["sym", HdCondition.RC]),
    Series("sym ac", list(sig_db), ac_sym),
    Series("asym rc", list(sig_db), curves["asym", HdCondition.RC], dashed=True),
    Series("asym ac", list(sig_db), curves["asym", HdCondition.AC], dashed=True),
    Series("break-even", list(sig_db), [0.0] * len(sig_db), dashed=True),
], title="Full-duplex gain vs loopback level",
    x_label="residual loopback sigma_li (dB)", y_label="(R_FD - R_HD) / R_FD")
print("wrote", out)

assert ac_sym[0] > 0.0 > ac_sym[-1]  # the sweep brackets the crossover
