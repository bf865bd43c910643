"""Full-duplex sum rate against the uplink pair distance d.

As the uplink partner moves away from its downlink user, the cross-link
interference at the downlink receiver fades and the sum rate climbs
toward the sum of the two single-link asymptotic rates (uplink with the
loopback neglected, downlink with the uplink transmitter neglected).
The printed gap column shrinks monotonically.

Writes sum_rate_vs_pair_distance.svg next to this script.
"""

from dataclasses import replace
from pathlib import Path

from fdcell import analytic, montecarlo
from fdcell.model import ScenarioConfig
from fdcell.montecarlo import RateMode
from fdcell.svgplot import Series, write_chart

TRIALS = 200_000
SEED = 1

s0 = ScenarioConfig()
asym_sum = (analytic.asymptotic_rate_ul(s0).value
            + analytic.asymptotic_rate_dl(s0).value)

ds = [10.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0]
exact, simulated = [], []
print("sum rate vs pair distance (asymptotic sum %.4f bit/s/Hz)" % asym_sum)
print("%6s  %9s %9s %9s" % ("d (m)", "analytic", "mc", "gap"))
for d in ds:
    s = replace(s0, d_pair=d)
    a = analytic.rate_fd(s).total.value
    m = montecarlo.estimate_rates(s, RateMode.FD, TRIALS, SEED, threads=4)[2]
    exact.append(a)
    simulated.append(m.mean)
    print("%6.0f  %9.4f %9.4f %9.4f" % (d, a, m.mean, abs(a - asym_sum)))

out = Path(__file__).with_name("sum_rate_vs_pair_distance.svg")
write_chart(out, [
    Series("analytic", ds, exact),
    Series("mc", ds, simulated),
    Series("asymptotic sum", ds, [asym_sum] * len(ds), dashed=True),
], title="Sum rate vs pair distance", x_label="pair distance d (m)",
    y_label="sum rate (bit/s/Hz)")
print("wrote", out)
