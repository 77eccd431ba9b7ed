#!/usr/bin/env python3
"""Regenerates the golden scenario files under scenarios/.

Boundary point sets are built from corner polygons by distributing interior
points along edges proportionally to edge length (largest remainder), so the
declared totals are exact. Run from the repo root:

    python3 tools/gen_scenarios.py
"""

import math
import os

OUT = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "scenarios")

GROUND = [(-10.0, -1.0), (10.0, -1.0), (10.0, 0.0), (-10.0, 0.0)]


def fnum(v):
    return repr(float(v))


def resample(corners, total):
    """Closed CCW polygon through `corners` with `total` points (corners kept)."""
    n = len(corners)
    if total < n:
        raise ValueError("total below corner count")
    lens = []
    for i in range(n):
        a = corners[i]
        b = corners[(i + 1) % n]
        lens.append(math.hypot(b[0] - a[0], b[1] - a[1]))
    per = total - n
    raw = [per * l / sum(lens) for l in lens]
    base = [int(r) for r in raw]
    rem = per - sum(base)
    order = sorted(range(n), key=lambda i: (raw[i] - base[i], -i), reverse=True)
    for i in order[:rem]:
        base[i] += 1
    pts = []
    for i in range(n):
        a = corners[i]
        b = corners[(i + 1) % n]
        k = base[i]
        pts.append(a)
        for j in range(1, k + 1):
            t = j / (k + 1)
            pts.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    assert len(pts) == total, (len(pts), total)
    return pts


def signed_area(poly):
    s = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def centroid(poly):
    a = signed_area(poly)
    cx = cy = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        w = x0 * y1 - x1 * y0
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    return cx / (6.0 * a), cy / (6.0 * a)


def box_corners(hx, hy):
    # First vertex at the bottom-face center: point index 0 sits under the CoM
    # in the canonical resting orientation, so a flat-rest gap tie resolves to
    # a point that can carry the weight on its own.
    return [(0.0, -hy), (hx, -hy), (hx, hy), (-hx, hy), (-hx, -hy)]


def write_scenario(name, *, obj_pts, com, mass, mu_env, mu_mnp, regions, modes, q_init,
                   q_goal, gravity=9.8, bounds=None):
    lines = []
    lines.append(f"scenario {name}")
    lines.append(f"gravity {fnum(gravity)}")
    lines.append("")
    lines.append("object")
    lines.append(f"  mass {fnum(mass)}")
    lines.append(f"  mu_env {fnum(mu_env)}")
    lines.append(f"  mu_mnp {fnum(mu_mnp)}")
    lines.append(f"  com {fnum(com[0])} {fnum(com[1])}")
    lines.append(f"  points {len(obj_pts)}")
    for p in obj_pts:
        lines.append(f"  {fnum(p[0])} {fnum(p[1])}")
    lines.append("end")
    lines.append("")
    lines.append("environment")
    lines.append("  ground_height 0.0")
    for r in regions:
        lines.append(f"  region {len(r)}")
        for p in r:
            lines.append(f"  {fnum(p[0])} {fnum(p[1])}")
    lines.append("end")
    for m in modes:
        lines.append("")
        if m[0] == "slide":
            _, mname, a, b = m
            lines.append(f"mode {mname} slide")
            lines.append(f"  face {fnum(a[0])} {fnum(a[1])} {fnum(b[0])} {fnum(b[1])}")
            lines.append("end")
        else:
            _, mname, pts, angles = m
            lines.append(f"mode {mname} grasp")
            for p in pts:
                lines.append(f"  point {fnum(p[0])} {fnum(p[1])}")
            if angles:
                lines.append("  angles " + " ".join(fnum(a) for a in angles))
            lines.append("end")
    lines.append("")
    lines.append(f"q_init {fnum(q_init[0])} {fnum(q_init[1])} {fnum(q_init[2])}")
    lines.append(f"q_goal {fnum(q_goal[0])} {fnum(q_goal[1])} {fnum(q_goal[2])}")
    lines.append("")
    lines.append("bounds")
    b = bounds or {}
    ws = b.get("workspace", (-1.0, -1.0, 1.0, 1.0))
    lines.append(f"  workspace {fnum(ws[0])} {fnum(ws[1])} {fnum(ws[2])} {fnum(ws[3])}")
    lines.append(f"  vel_lin {fnum(b.get('vel_lin', 1.0))}")
    lines.append(f"  vel_ang {fnum(b.get('vel_ang', math.pi))}")
    lines.append(f"  force_max {fnum(b.get('force_max', 100.0))}")
    lines.append(f"  slide_rate {fnum(b.get('slide_rate', 2.0))}")
    lines.append("end")
    path = os.path.join(OUT, f"{name}.scn")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(obj_pts)} boundary points)")


def halfpi():
    return math.pi / 2


def gen_box_pivot():
    pts = resample(box_corners(0.1, 0.05), 104)
    write_scenario(
        "box_pivot",
        obj_pts=pts, com=(0.0, 0.0), mass=0.1, mu_env=0.3, mu_mnp=0.7,
        regions=[GROUND],
        modes=[("slide", "push_left", (-0.1, 0.05), (-0.1, -0.05))],
        q_init=(0.0, 0.05, 0.0),
        q_goal=(0.15, 0.1, -halfpi()),
    )


def gen_peg():
    pts = resample(box_corners(0.03, 0.09), 104)
    write_scenario(
        "peg",
        obj_pts=pts, com=(0.0, 0.0), mass=0.05, mu_env=0.3, mu_mnp=0.7,
        regions=[GROUND],
        modes=[("slide", "push_left", (-0.03, 0.09), (-0.03, -0.09))],
        q_init=(0.0, 0.09, 0.0),
        q_goal=(0.12, 0.03, -halfpi()),
    )


def gen_slide_block():
    pts = resample(box_corners(0.05, 0.02), 28)
    write_scenario(
        "slide_block",
        obj_pts=pts, com=(0.0, 0.0), mass=0.01, mu_env=0.3, mu_mnp=0.0,
        regions=[GROUND],
        modes=[("slide", "push_left", (-0.05, 0.02), (-0.05, -0.02))],
        q_init=(-0.05, 0.02, 0.0),
        q_goal=(0.05, 0.02, 0.0),
        bounds={"vel_lin": 0.06},
    )


def mustard_outline():
    # Right-half control outline, bottom-center origin; mirrored for the left.
    right = [
        (0.024, 0.0),     # base right corner
        (0.030, 0.008),
        (0.033, 0.030),
        (0.033, 0.120),   # straight body side
        (0.026, 0.148),
        (0.014, 0.162),
        (0.013, 0.168),
        (0.013, 0.186),   # cap side
        (0.006, 0.190),   # cap top right
    ]
    top_left = [(-x, y) for (x, y) in reversed(right)]
    corners = [(0.0, 0.0)] + right + top_left[1:-1] + [(-0.024, 0.0)]
    # closed CCW from the base-center vertex: base right -> up right side ->
    # cap -> down left side -> base left corner
    assert signed_area(corners) > 0
    return corners


def gen_mustard():
    corners = mustard_outline()
    pts = resample(corners, 247)
    com = centroid(pts)
    write_scenario(
        "mustard",
        obj_pts=pts, com=com, mass=0.6, mu_env=0.3, mu_mnp=0.7,
        regions=[GROUND],
        modes=[("slide", "push_body", (-0.033, 0.1), (-0.033, 0.04))],
        q_init=(-0.05, 0.0, 0.0),
        q_goal=(0.05, 0.0, 0.0),
    )


def gen_task1():
    pts = resample(box_corners(0.1, 0.05), 104)
    lying = (-0.1, 0.05, 0.0)
    standing = (0.15, 0.1, -halfpi())
    modes = [
        ("slide", "push_left", (-0.1, 0.05), (-0.1, -0.05)),
        ("slide", "push_top", (0.1, 0.05), (-0.1, 0.05)),
    ]
    common = dict(obj_pts=pts, com=(0.0, 0.0), mass=0.1, mu_env=0.3, mu_mnp=0.7,
                  regions=[GROUND], modes=modes)
    write_scenario("task1_forward", q_init=lying, q_goal=standing, **common)
    write_scenario("task1_reverse", q_init=standing, q_goal=lying, **common)


def gen_task2():
    pts = resample(box_corners(0.03, 0.09), 104)
    left_table = [(-10.0, -1.0), (-0.04, -1.0), (-0.04, 0.0), (-10.0, 0.0)]
    right_table = [(0.04, -1.0), (10.0, -1.0), (10.0, 0.0), (0.04, 0.0)]
    slot_floor = [(-0.04, -1.0), (0.04, -1.0), (0.04, -0.12), (-0.04, -0.12)]
    modes = [
        ("slide", "push_left", (-0.03, 0.09), (-0.03, -0.09)),
        ("slide", "push_top", (0.03, 0.09), (-0.03, 0.09)),
    ]
    on_table = (-0.3, 0.09, 0.0)
    in_slot = (0.0, -0.03, 0.0)
    common = dict(obj_pts=pts, com=(0.0, 0.0), mass=0.05, mu_env=0.3, mu_mnp=0.7,
                  regions=[left_table, right_table, slot_floor], modes=modes)
    write_scenario("task2_forward", q_init=on_table, q_goal=in_slot, **common)
    write_scenario("task2_reverse", q_init=in_slot, q_goal=on_table, **common)


def gen_task3():
    pts = resample(box_corners(0.1, 0.05), 104)
    step = [(0.2, 0.0), (10.0, 0.0), (10.0, 0.05), (0.2, 0.05)]
    modes = [
        ("slide", "push_left", (-0.1, 0.05), (-0.1, -0.05)),
        ("slide", "push_top", (0.1, 0.05), (-0.1, 0.05)),
    ]
    on_ground = (-0.2, 0.05, 0.0)
    on_step = (0.45, 0.1, 0.0)
    common = dict(obj_pts=pts, com=(0.0, 0.0), mass=0.1, mu_env=0.3, mu_mnp=0.7,
                  regions=[GROUND, step], modes=modes)
    write_scenario("task3_forward", q_init=on_ground, q_goal=on_step, **common)
    write_scenario("task3_reverse", q_init=on_step, q_goal=on_ground, **common)


def main():
    os.makedirs(OUT, exist_ok=True)
    gen_box_pivot()
    gen_peg()
    gen_slide_block()
    gen_mustard()
    gen_task1()
    gen_task2()
    gen_task3()


if __name__ == "__main__":
    main()
