"""Generate the shipped drive-cycle CSVs (deterministic, no RNG).

Each cycle is built from hand-tuned micro-trip tables (idle, ramp to a peak,
cruise, ramp down) at 1 Hz and padded with trailing idle to the exact
published sample count.  Targets matched: sample count exactly; max speed
exactly (a cruise plateau sits at the peak); mean speed and distance
approximately.  Speeds are written in mph with one decimal.
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hevql.units import MPH_TO_MPS  # noqa: E402


JERK_MPHPS2 = 0.6


def rate_limit(v_mph):
    """Speed-change ceiling, tapering with speed (mph/s).

    Sized so a PI pedal driver stays inside a 2 mph error envelope; applied
    to both acceleration and braking legs.
    """
    return max(0.6, 1.7 - 0.032 * v_mph)


def ramp(points, target, rate):
    """Extend points toward target with a jerk-limited rate, 1 sample/s.

    The per-second rate slews by at most JERK_MPHPS2 and eases out as the
    target nears, so a PI speed-tracking driver stays inside a small error
    envelope.  Upward legs additionally respect the acceleration taper.
    """
    cur = points[-1]
    prev = points[-2] if len(points) >= 2 else cur
    r = cur - prev  # signed rate carried in from the previous segment
    while abs(target - cur) > 1e-9:
        remaining = abs(target - cur)
        if remaining <= 0.1:
            cur = target
            points.append(round(cur, 1))
            break
        cap = min(rate, rate_limit(cur), math.sqrt(2.0 * JERK_MPHPS2 * remaining))
        if target > cur:
            r = min(r + JERK_MPHPS2, cap)
        else:
            r = max(r - JERK_MPHPS2, -cap)
        step = r if abs(r) < remaining else math.copysign(remaining, r)
        cur += step
        points.append(round(cur, 1))
    return points


def micro_trip(points, peak, cruise_s, accel=2.4, decel=2.6, idle_before=15, wiggle=0.0):
    points.extend([0.0] * idle_before)
    ramp(points, peak, accel)
    for k in range(cruise_s):
        # Wiggle dips below the plateau so the trip maximum stays exact.
        dip = wiggle * (0.5 - 0.5 * math.cos(2 * math.pi * k / 40.0))
        points.append(round(peak - dip, 1))
    ramp(points, 0.0, decel)
    return points


def pad_to(points, n_samples, name):
    if len(points) > n_samples:
        extra = len(points) - n_samples
        tail = points[-extra:]
        if any(v != 0.0 for v in tail):
            raise SystemExit(f"{name}: profile too long by {extra}s of non-idle")
        del points[n_samples:]
    points.extend([0.0] * (n_samples - len(points)))
    return points


def hill(points, peak, top_s, shoulder, shoulder_s, idle_before=15, wiggle=1.2):
    """Climb to peak, brief crest, descend to a shoulder cruise, then stop."""
    points.extend([0.0] * idle_before)
    ramp(points, peak, 2.4)
    for k in range(top_s):
        dip = 0.8 * (0.5 - 0.5 * math.cos(2 * math.pi * k / 30.0))
        points.append(round(peak - dip, 1))
    ramp(points, shoulder, 1.0)
    for k in range(shoulder_s):
        dip = wiggle * (0.5 - 0.5 * math.cos(2 * math.pi * k / 40.0))
        points.append(round(shoulder - dip, 1))
    ramp(points, 0.0, 2.6)
    return points


def build_udds():
    """Urban cycle: stop-and-go micro-trips around one hill to the peak."""
    pts = [0.0] * 19
    micro_trip(pts, 25.0, 24, idle_before=1)
    micro_trip(pts, 35.2, 28, wiggle=1.5)
    micro_trip(pts, 30.1, 30, idle_before=10)
    hill(pts, 56.7, 26, 29.5, 100, idle_before=10)
    micro_trip(pts, 30.4, 20, idle_before=12)
    micro_trip(pts, 28.3, 26, idle_before=10)
    micro_trip(pts, 27.2, 26, idle_before=10)
    micro_trip(pts, 30.0, 30, idle_before=10, wiggle=1.0)
    micro_trip(pts, 35.6, 35, idle_before=10, wiggle=1.2)
    micro_trip(pts, 29.9, 26, idle_before=10)
    micro_trip(pts, 26.0, 18, idle_before=10)
    micro_trip(pts, 22.1, 12, idle_before=12)
    return pad_to(pts, 1370, "udds")


def build_wltp_class3():
    """Mixed cycle: four phases of rising speed, ending extra-high at 81.6 mph."""
    pts = [0.0] * 11
    # Low phase: city crawl.
    micro_trip(pts, 23.5, 24, idle_before=1)
    micro_trip(pts, 31.4, 40, wiggle=1.2)
    micro_trip(pts, 35.1, 46, idle_before=18, wiggle=1.4)
    micro_trip(pts, 28.0, 26, idle_before=16)
    # Medium phase.
    micro_trip(pts, 43.3, 45, idle_before=18, wiggle=1.5)
    micro_trip(pts, 47.5, 50, idle_before=14, wiggle=1.2)
    # High phase.
    micro_trip(pts, 56.2, 52, idle_before=16, wiggle=1.4)
    micro_trip(pts, 60.6, 55, idle_before=12, wiggle=1.1)
    # Extra-high phase: one long excursion to the cycle peak.
    pts.extend([0.0] * 10)
    ramp(pts, 50.0, 2.2)
    pts.extend([50.0] * 12)
    ramp(pts, 70.3, 1.8)
    pts.extend(round(70.3 + 1.2 * math.sin(2 * math.pi * k / 50.0), 1) for k in range(60))
    ramp(pts, 81.6, 1.4)
    pts.extend([81.6] * 30)
    ramp(pts, 60.0, 1.8)
    pts.extend([60.0] * 8)
    ramp(pts, 0.0, 2.4)
    return pad_to(pts, 1801, "wltp_class3")


def build_hwfet():
    """Highway cycle: one launch, sustained 44-60 mph cruising, one stop."""
    pts = [0.0] * 4
    ramp(pts, 52.0, 2.3)
    pts.extend(round(52.0 + 1.5 * math.sin(2 * math.pi * k / 60.0), 1) for k in range(80))
    ramp(pts, 56.4, 1.6)
    pts.extend([56.4] * 55)
    ramp(pts, 49.8, 1.8)
    pts.extend(round(49.8 + 1.3 * math.sin(2 * math.pi * k / 45.0), 1) for k in range(70))
    ramp(pts, 59.9, 1.5)
    pts.extend([59.9] * 66)
    ramp(pts, 52.5, 1.7)
    pts.extend(round(52.5 + 1.4 * math.sin(2 * math.pi * k / 55.0), 1) for k in range(90))
    ramp(pts, 57.2, 1.5)
    pts.extend([57.2] * 45)
    ramp(pts, 47.5, 1.8)
    pts.extend([47.5] * 40)
    ramp(pts, 54.0, 1.6)
    pts.extend(round(54.0 + 1.2 * math.sin(2 * math.pi * k / 50.0), 1) for k in range(80))
    ramp(pts, 0.0, 2.4)
    return pad_to(pts, 766, "hwfet")


def stats(points):
    mps = [v * MPH_TO_MPS for v in points]
    dist = sum(0.5 * (a + b) for a, b in zip(mps, mps[1:]))
    return {
        "samples": len(points),
        "max_mph": max(points),
        "mean_mph": sum(points) / len(points),
        "distance_mi": dist / 1609.344,
    }


def write_cycle(points, path):
    with open(path, "w", newline="\n") as fh:
        fh.write("time_s,speed_mph\n")
        for t, v in enumerate(points):
            fh.write(f"{t},{v}\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "data", "cycles"))
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for name, builder in [("udds", build_udds), ("wltp_class3", build_wltp_class3), ("hwfet", build_hwfet)]:
        points = builder()
        path = os.path.join(args.out_dir, f"{name}.csv")
        write_cycle(points, path)
        print(name, stats(points))


if __name__ == "__main__":
    main()
