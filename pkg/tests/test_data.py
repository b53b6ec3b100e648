import numpy as np
import pytest

from gmmgen.data import (CSV_HEADER, PhaseSchedule, Pose, Trajectory,
                         TrajectoryFormatError, load_trajectory, resample,
                         save_trajectory)


def line_traj():
    return Trajectory([0.0, 1.0], [[0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                                   [1.0, 2.0, 3.0, 0.1, 0.2, 0.3]])


def test_pose_roundtrip_and_validation():
    p = Pose([1.0, 2.0, 3.0], [0.1, 0.2, 0.3])
    assert np.allclose(p.as_vector(), [1, 2, 3, 0.1, 0.2, 0.3])
    q = Pose.from_vector(p.as_vector())
    assert np.array_equal(q.as_vector(), p.as_vector())
    with pytest.raises(ValueError):
        Pose([np.nan, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        Pose([0, 0, 0], [np.pi, 0, 0])  # magnitude exactly pi rejected
    # frozen storage
    with pytest.raises(ValueError):
        p.position[0] = 9.0


def test_phase_schedule_ordering():
    PhaseSchedule(1.0, 6.0, 7.0)
    for bad in ((0.0, 6.0, 7.0), (6.0, 1.0, 7.0), (1.0, 7.0, 7.0)):
        with pytest.raises(ValueError):
            PhaseSchedule(*bad)


def test_trajectory_invariants():
    with pytest.raises(ValueError):
        Trajectory([0.0], [[1.0]])
    with pytest.raises(ValueError):
        Trajectory([0.5, 1.0], [[1.0], [2.0]])  # must start at 0
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], [[1.0], [2.0]])  # strictly increasing
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], [[np.inf], [2.0]])
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], [[0, 0, 0, 3.0, 1.0, 1.0],
                                [0, 0, 0, 0, 0, 0]])  # rotvec magnitude >= pi
    t = line_traj()
    assert t.n_samples == 2 and t.dim == 6 and t.duration == 1.0
    assert np.allclose(t.start_pose().position, [0, 0, 0])
    assert np.allclose(t.end_pose().orientation, [0.1, 0.2, 0.3])


def test_trajectory_1d_values_allowed():
    t = Trajectory([0.0, 1.0, 2.0], [0.0, 2.0, 2.0])
    assert t.dim == 1
    with pytest.raises(ValueError):
        t.positions()  # pose accessors need 6-DoF rows


def test_resample_midpoint_average():
    out = resample(line_traj(), 3)
    assert np.allclose(out.values[1], 0.5 * (line_traj().values[0] + line_traj().values[1]))
    assert np.allclose(out.values[0], line_traj().values[0])
    assert np.allclose(out.values[-1], line_traj().values[-1])


def test_resample_identity_on_uniform_grid():
    times = np.linspace(0.0, 2.0, 9)
    vals = np.sin(times)
    traj = Trajectory(times, vals)
    out = resample(traj, 9)
    assert np.array_equal(out.times, times)
    assert np.allclose(out.values[:, 0], vals, atol=1e-15)


def test_resample_piecewise_example():
    # {(0,0),(1,2),(2,2)} at n=5 -> {0,1,2,2,2}
    traj = Trajectory([0.0, 1.0, 2.0], [0.0, 2.0, 2.0])
    out = resample(traj, 5)
    assert np.allclose(out.values[:, 0], [0.0, 1.0, 2.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        resample(traj, 1)


def test_csv_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(5)
    times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 0.1, 30))])
    vals = rng.normal(scale=0.4, size=(31, 6))
    traj = Trajectory(times, vals)
    path = tmp_path / "traj.csv"
    save_trajectory(traj, path)
    back = load_trajectory(path)
    assert np.array_equal(back.times, traj.times)
    assert np.array_equal(back.values, traj.values)
    assert path.read_text().splitlines()[0] == CSV_HEADER


def test_csv_errors_name_the_row(tmp_path):
    path = tmp_path / "bad.csv"

    def expect(content, fragment):
        path.write_text(content)
        with pytest.raises(TrajectoryFormatError) as err:
            load_trajectory(path)
        assert fragment in str(err.value), str(err.value)

    expect("x,y\n", "row 1")
    expect(CSV_HEADER + "\n1,2,3\n", "row 2: expected 7 columns")
    expect(CSV_HEADER + "\n0,0,0,0,0,0,oops\n", "row 2: non-numeric")
    expect(CSV_HEADER + "\n0,0,0,0,0,0,inf\n", "row 2: non-finite")
    expect(CSV_HEADER + "\n0.5,0,0,0,0,0,0\n", "start at t=0")
    expect(CSV_HEADER + "\n0,0,0,0,0,0,0\n0,1,0,0,0,0,0\n", "row 3")
    expect(CSV_HEADER + "\n0,0,0,0,0,0,0\n1,0,0,0,4,0,0\n", "exceeds pi")
    expect(CSV_HEADER + "\n0,0,0,0,0,0,0\n", "two data rows")
    with pytest.raises(TrajectoryFormatError):
        load_trajectory(tmp_path / "missing.csv")


def test_save_rejects_non_pose(tmp_path):
    with pytest.raises(ValueError):
        save_trajectory(Trajectory([0.0, 1.0], [0.0, 1.0]), tmp_path / "x.csv")
