"""Outage probability against transmit power for both selection policies.

Sweeps the symmetric AP/uplink transmit power from 0 to 40 dB at a 3 dB
SINR threshold.  Monte Carlo curves are drawn for nearest-user and
random-user selection on both links; the analytic cdf evaluators overlay
the nearest-user case.  The random-user curves sit above the nearest-user
ones everywhere -- picking the closest user is never worse.

Writes outage_vs_power.svg next to this script.
"""

from dataclasses import replace
from pathlib import Path

from fdcell import analytic, montecarlo
from fdcell.model import ScenarioConfig, Selection, validate_scenario
from fdcell.montecarlo import Link
from fdcell.svgplot import Series, write_chart

TRIALS = 100_000
SEED = 1
GAMMA_DB = 3.0

powers = [float(p) for p in range(0, 41, 5)]
gamma = 10.0 ** (GAMMA_DB / 10.0)

rows = {}  # (link, selection or "analytic") -> list of outage values
for p_db in powers:
    nus = validate_scenario(replace(
        ScenarioConfig(), p_ap_db=p_db, p_ul_db=p_db, gamma_th_db=GAMMA_DB))
    rus = replace(nus, selection=Selection.RUS)
    for link in (Link.DL, Link.UL):
        exact = analytic.outage(link, nus).estimate.value
        # one seed for both policies: identical topologies, fair comparison
        mc_n = montecarlo.estimate_outage(nus, gamma, link, TRIALS, SEED)
        mc_r = montecarlo.estimate_outage(rus, gamma, link, TRIALS, SEED)
        rows.setdefault((link, "analytic"), []).append(exact)
        rows.setdefault((link, "nus"), []).append(mc_n.mean)
        rows.setdefault((link, "rus"), []).append(mc_r.mean)

print("outage at gamma_th = %g dB, %d trials per point" % (GAMMA_DB, TRIALS))
print("%6s  %10s %10s %10s   %10s %10s %10s"
      % ("P(dB)", "DL exact", "DL nus", "DL rus", "UL exact", "UL nus", "UL rus"))
for i, p_db in enumerate(powers):
    print("%6.0f  %10.4g %10.4g %10.4g   %10.4g %10.4g %10.4g" % (
        p_db,
        rows[(Link.DL, "analytic")][i], rows[(Link.DL, "nus")][i],
        rows[(Link.DL, "rus")][i],
        rows[(Link.UL, "analytic")][i], rows[(Link.UL, "nus")][i],
        rows[(Link.UL, "rus")][i]))

out = Path(__file__).with_name("outage_vs_power.svg")
write_chart(out, [
    Series("DL analytic (nus)", powers, rows[(Link.DL, "analytic")], dashed=True),
    Series("DL mc nus", powers, rows[(Link.DL, "nus")]),
    Series("DL mc rus", powers, rows[(Link.DL, "rus")]),
    Series("UL analytic (nus)", powers, rows[(Link.UL, "analytic")], dashed=True),
    Series("UL mc nus", powers, rows[(Link.UL, "nus")]),
    Series("UL mc rus", powers, rows[(Link.UL, "rus")]),
], title="Outage vs transmit power", x_label="transmit power (dB)",
    y_label="outage probability", log_y=True)
print("wrote", out)
