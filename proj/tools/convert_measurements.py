#!/usr/bin/env python3
"""Convert a third-party datalogger CSV export to the canonical walltherm schema.

The canonical measurements.csv schema is:

    time_s,t_internal_K,t_external_K,q_internal_Wm2,q_external_Wm2

  - time_s          seconds since the campaign start, strictly ascending
  - t_internal_K    near-internal-surface air temperature, kelvin
  - t_external_K    near-external-surface air temperature, kelvin
  - q_internal_Wm2  internal-surface heat-flux plate reading, W/m^2,
                    positive into the wall
  - q_external_Wm2  external-surface heat-flux plate reading, W/m^2,
                    positive out of the wall; the literal string NA in every
                    row marks an internal-only dataset

This is a stub: monitoring-campaign exports vary by logger vendor, so the
source column names, the timestamp format and the measurement units must be
supplied on the command line. Expected source fields:

  - a timestamp column (ISO 8601, or already-numeric seconds)
  - two temperature columns (celsius or kelvin)
  - one or two heat-flux columns (W/m^2); omit --q-external for
    internal-only campaigns
"""

import argparse
import csv
import sys
from datetime import datetime

HEADER = ["time_s", "t_internal_K", "t_external_K", "q_internal_Wm2", "q_external_Wm2"]


def parse_time(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        return datetime.fromisoformat(value).timestamp()


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("source", help="datalogger CSV export")
    parser.add_argument("output", help="canonical measurements.csv to write")
    parser.add_argument("--time", required=True, help="source timestamp column")
    parser.add_argument("--t-internal", required=True, help="internal temperature column")
    parser.add_argument("--t-external", required=True, help="external temperature column")
    parser.add_argument("--q-internal", required=True, help="internal heat-flux column")
    parser.add_argument("--q-external", help="external heat-flux column (omit if absent)")
    parser.add_argument("--celsius", action="store_true",
                        help="source temperatures are in celsius")
    args = parser.parse_args()

    offset = 273.15 if args.celsius else 0.0
    with open(args.source, newline="") as src, open(args.output, "w", newline="") as dst:
        reader = csv.DictReader(src)
        writer = csv.writer(dst, lineterminator="\n")
        writer.writerow(HEADER)
        t0 = None
        for row in reader:
            t = parse_time(row[args.time])
            if t0 is None:
                t0 = t
            writer.writerow([
                repr(t - t0),
                repr(float(row[args.t_internal]) + offset),
                repr(float(row[args.t_external]) + offset),
                repr(float(row[args.q_internal])),
                repr(float(row[args.q_external])) if args.q_external else "NA",
            ])
    return 0


if __name__ == "__main__":
    sys.exit(main())
