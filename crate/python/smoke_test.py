"""Smoke test for the stereoskew_py extension.

Build and install first:

    pip install maturin
    pip install --no-build-isolation ./crates/python
    python python/smoke_test.py
"""

import math

import stereoskew_py as ss


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    rig = ss.CameraRig(25.0)
    assert rig.camera_a == (-25.0, 0.0, 0.0)

    a1, b1, a2, b2 = ss.angles_2d(rig, (0.0, 25.0))
    assert close(a1, math.pi / 4, 1e-12) and close(a2, 3 * math.pi / 4, 1e-12)
    x, y = ss.point_2d(rig, a1, a2)
    assert close(x, 0.0, 1e-9) and close(y, 25.0, 1e-9)

    angles = ss.angles_3d(rig, (70.0, 240.0, -65.0))
    p = ss.point_3d(rig, angles)
    assert all(close(u, v, 1e-9) for u, v in zip(p, (70.0, 240.0, -65.0)))

    r = ss.localization_error(rig, [70.0, 240.0], [0.01, 0.0])
    assert close(r.error_magnitude, 0.050, 0.002), r
    assert r.convention == "midpoint"
    assert close(r.error_magnitude, math.hypot(*r.error_vector), 1e-15)

    ex, ey, ez, mag = ss.approx_error(rig, [70.0, 240.0], [0.01, 0.0])
    assert close(ey, 0.048, 1e-12) and ez == 0.0

    same = ss.skew_line_gap(rig, angles, angles)
    assert same[1] < 1e-9

    try:
        ss.point_2d(rig, 1.0, 1.0)
    except ss.GeometryError:
        pass
    else:
        raise AssertionError("parallel rays should raise GeometryError")

    try:
        ss.CameraRig(0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("zero baseline should raise")

    sweep = ss.run_sweep(rig, [0.01, 0.0])
    assert sweep.cell_count == 141 * 151
    assert close(sweep.max_error, 0.050, 0.002)
    assert sweep.argmax_points == [(70.0, 240.0, 0.0)]
    csv = sweep.cells_csv()
    assert csv.startswith("x_cm,y_cm,z_cm,")
    assert csv == ss.run_sweep(rig, [0.01, 0.0], threads=1).cells_csv()

    coarse = ss.run_sweep(rig, [0.0, 0.0, 0.01], mode="3d", step=5.0)
    assert close(coarse.max_error, 0.014, 0.002), coarse

    print("smoke test passed:", sweep)


if __name__ == "__main__":
    main()
