#!/usr/bin/env python3
"""Regenerate the bundled Delhi 2021 sample archive.

The upstream covid19india feed is no longer served, so the sample archive is a
deterministic reconstruction calibrated to figures reported for Delhi in 2021:

  * active cases 2021-02-06 .. 2021-04-06 follow the reported quartic trend
    A(t) = 0.006 t^4 - 0.518 t^3 + 16.088 t^2 - 175.330 t + 1344.983 (t = 1 on
    2021-02-06), rounded to whole cases;
  * active cases on 2021-04-20 are 85,575, approached geometrically from 04-06;
  * daily new confirmed cases follow the reported trajectory (Apr 1-20 values
    as published, smooth ramps elsewhere);
  * daily tests are chosen so the 7-day test positive ratio on 2021-04-06 is
    about 4.3 %.

Outputs delhi_2021.csv (Jan 1 - Apr 20), delhi_window.csv (Feb 6 - Apr 6) and
delhi_2021.json (covid19india v4 timeseries shape).
"""
import datetime as dt
import json
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
START = dt.date(2021, 1, 1)
DAY1 = dt.date(2021, 2, 6)
END = dt.date(2021, 4, 20)
COEF = [0.006, -0.518, 16.088, -175.330, 1344.983]

APRIL_NEW = [2790, 3594, 3567, 4033, 3548, 5100, 5506, 7437, 8521, 7897,
             10774, 11491, 13468, 17282, 16699, 19486, 24375, 25462, 23686, 28395]


def quartic(t):
    return sum(c * t ** (4 - i) for i, c in enumerate(COEF))


def dates():
    d = START
    while d <= END:
        yield d
        d += dt.timedelta(days=1)


def active_on(d):
    t = (d - DAY1).days + 1
    if t < 1:
        # decline from ~6000 on Jan 1 to the trend value on Feb 6
        days_before = 1 - t
        ratio = (6000 / quartic(1)) ** (1 / 36)
        return round(quartic(1) * ratio ** days_before)
    if t <= 60:
        return round(quartic(t))
    growth = (85575 / round(quartic(60))) ** (1 / 14)
    return round(round(quartic(60)) * growth ** (t - 60))


def new_cases_on(d):
    if d.month == 1:
        frac = (d.day - 1) / 30
        return round(650 + (150 - 650) * frac)
    if d.month == 2:
        return round(150 + 50 * (d.day - 1) / 27)
    if d.month == 3:
        return round(200 * (1819 / 200) ** ((d.day - 1) / 30))
    return APRIL_NEW[d.day - 1]


def positivity_on(d):
    if d.month == 1:
        return 0.008 + (0.003 - 0.008) * (d.day - 1) / 30
    if d.month == 2:
        return 0.003
    if d.month == 3:
        return 0.003 * (0.026 / 0.003) ** ((d.day - 1) / 30)
    # 3.4 % on Apr 1 rising to 26 % on Apr 20
    return 0.034 * (0.26 / 0.034) ** ((d.day - 1) / 19)


def main():
    all_dates = list(dates())
    active = [active_on(d) for d in all_dates]
    rows = []
    confirmed, deceased, tested = 625_369, 10_557, 9_800_000
    recovered = confirmed - active[0] - deceased
    for i, d in enumerate(all_dates):
        if i > 0:
            delta_active = active[i] - active[i - 1]
            new = new_cases_on(d)
            # every day must retire a non-negative number of cases
            new = max(new, delta_active + max(1, active[i - 1] // 40))
            removed = new - delta_active
            deaths = round(removed * (0.012 if d.month < 4 else 0.02))
            confirmed += new
            deceased += deaths
            recovered += removed - deaths
            tested += round(new / positivity_on(d))
        assert confirmed - recovered - deceased == active[i]
        rows.append((d, confirmed, recovered, deceased, tested))

    header = "date,confirmed,recovered,deceased,tests\n"
    body = "".join(f"{d.isoformat()},{c},{r},{x},{t}\n" for d, c, r, x, t in rows)
    (HERE / "delhi_2021.csv").write_text(header + body)
    window = [row for row in rows if DAY1 <= row[0] <= dt.date(2021, 4, 6)]
    body = "".join(f"{d.isoformat()},{c},{r},{x},{t}\n" for d, c, r, x, t in window)
    (HERE / "delhi_window.csv").write_text(header + body)

    dates_obj = {
        d.isoformat(): {"total": {"confirmed": c, "recovered": r, "deceased": x, "tested": t}}
        for d, c, r, x, t in rows
    }
    (HERE / "delhi_2021.json").write_text(
        json.dumps({"DL": {"dates": dates_obj}}, indent=1) + "\n"
    )


if __name__ == "__main__":
    main()
