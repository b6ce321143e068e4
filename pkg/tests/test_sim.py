"""Explicit-Euler stepping, guards, and the binary trajectory container."""

import os
import struct

import numpy as np
import pytest

from reel.errors import DataFormatError, DivergenceError
from reel.field import GridSpec, ScalarField
from reel.models import HeatModel, NanovoidModel
from reel.models.base import ModelState
from reel.sim import (
    FORMAT_VERSION,
    extract_changes,
    load,
    read_header,
    rollout,
    save,
    step,
)


def heat_model(nx=32, dt=0.2, **kw):
    return HeatModel(GridSpec(nx, nx, 1.0, dt), **kw)


class TestStep:
    def test_single_cosine_mode_decays_by_discrete_eigenvalue(self):
        # without the laser, one Euler step multiplies a pure mode by
        # 1 + dt (k/rho_cp) lambda_p with lambda_p = 2(cos(2 pi p/nx) - 1)/dx^2
        model = heat_model(gamma=0.0, k=0.8, rho_cp=1.6)
        grid = model.grid
        p = 3
        ii = np.arange(grid.nx)[:, None]
        mode = 0.1 * np.cos(2.0 * np.pi * p * ii / grid.nx) * np.ones((1, grid.ny))
        state = ModelState(grid, {"T": ScalarField(grid, 1.0 + mode)})
        lam = 2.0 * (np.cos(2.0 * np.pi * p / grid.nx) - 1.0) / grid.dx**2
        factor = 1.0 + grid.dt * (0.8 / 1.6) * lam
        after = step(model, state)
        np.testing.assert_allclose(
            after.field("T").values, 1.0 + factor * mode, atol=1e-14
        )
        assert after.t_index == 1

    def test_dt_beyond_stability_budget_rejected(self):
        model = heat_model()  # budget 0.2 * dx^2 / (k/rho_cp) = 0.4
        state = model.initial_state(0)
        with pytest.raises(ValueError, match="stability budget"):
            step(model, state, dt=0.5)
        step(model, state, dt=0.4)  # at the budget is fine

    def test_nonfinite_field_raises_divergence(self):
        model = heat_model()
        vals = np.ones(model.grid.shape)
        vals[3, 3] = np.nan
        state = ModelState(model.grid, {"T": ScalarField(model.grid, vals)})
        with pytest.raises(DivergenceError, match="non-finite"):
            step(model, state)

    def test_hard_limit_raises_divergence(self):
        model = heat_model(gamma=0.0)
        state = ModelState(
            model.grid, {"T": ScalarField.constant(model.grid, 2e6)}
        )
        with pytest.raises(DivergenceError, match="divergence limit"):
            step(model, state)

    def test_soft_range_excursion_warns_but_continues(self):
        model = NanovoidModel(GridSpec(16, 16, 1.0, 0.01))
        grid = model.grid
        state = ModelState(
            grid,
            {
                "c_v": ScalarField.constant(grid, 1.2),  # above the (-0.1, 1.1) range
                "c_i": ScalarField.constant(grid, 0.0),
                "eta": ScalarField.constant(grid, 0.5),
            },
        )
        with pytest.warns(RuntimeWarning, match="physical range"):
            after = step(model, state)
        assert after.t_index == 1


class TestRollout:
    def test_deterministic(self):
        a = rollout(heat_model(), n_steps=10, ic_seed=3)
        b = rollout(heat_model(), n_steps=10, ic_seed=3)
        np.testing.assert_array_equal(
            a.states[-1].field("T").values, b.states[-1].field("T").values
        )

    def test_state_count_and_metadata(self):
        model = heat_model()
        traj = rollout(model, n_steps=7, ic_seed=2)
        assert traj.n_states == 8
        assert traj.field_names == ("T",)
        assert traj.ic_seed == 2
        assert traj.param_names == ("k", "rho_cp")
        np.testing.assert_array_equal(traj.theta, model.theta_true)

    def test_custom_theta_recorded(self):
        theta = np.array([0.5, 2.0])
        traj = rollout(heat_model(), n_steps=2, theta=theta)
        np.testing.assert_array_equal(traj.theta, theta)

    def test_nonpositive_steps_rejected(self):
        with pytest.raises(ValueError, match="n_steps"):
            rollout(heat_model(), n_steps=0)

    def test_changes_telescope_to_net_change(self):
        traj = rollout(heat_model(), n_steps=20, ic_seed=0)
        changes = extract_changes(traj)["T"]
        assert len(changes) == 20
        total = sum(c.values for c in changes)
        net = traj.states[-1].field("T").values - traj.states[0].field("T").values
        np.testing.assert_allclose(total, net, atol=1e-12)

    def test_extract_changes_needs_two_states(self):
        traj = rollout(heat_model(), n_steps=1)
        traj.states = traj.states[:1]
        with pytest.raises(ValueError, match="2 states"):
            extract_changes(traj)


class TestContainer:
    def write_one(self, path, n_steps=5):
        traj = rollout(heat_model(nx=16), n_steps=n_steps, ic_seed=1)
        save(traj, path)
        return traj

    def test_round_trip_bitwise(self, tmp_path):
        path = str(tmp_path / "t.reel")
        traj = self.write_one(path)
        back = load(path)
        assert back.n_states == traj.n_states
        assert back.field_names == traj.field_names
        assert back.ic_seed == traj.ic_seed
        assert back.param_names == traj.param_names
        np.testing.assert_array_equal(back.theta, traj.theta)
        assert back.model_config == traj.model_config
        for s0, s1 in zip(traj.states, back.states):
            np.testing.assert_array_equal(s0.field("T").values, s1.field("T").values)

    def test_file_size_arithmetic(self, tmp_path):
        path = str(tmp_path / "t.reel")
        traj = self.write_one(path, n_steps=5)
        with open(path, "rb") as fh:
            raw = fh.read(16)
        assert raw[:4] == b"REEL"
        assert struct.unpack("<I", raw[4:8])[0] == FORMAT_VERSION
        (header_len,) = struct.unpack("<Q", raw[8:16])
        expected = 16 + header_len + traj.n_states * 1 * 16 * 16 * 8
        assert os.path.getsize(path) == expected

    def test_header_only_inspection(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path, n_steps=5)
        header = read_header(path)
        assert header["n_states"] == 6
        assert header["field_names"] == ["T"]
        assert header["kind"] == "trajectory"
        assert header["model_config"]["model"] == "heat"

    def test_bad_magic(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path)
        with open(path, "r+b") as fh:
            fh.write(b"JUNK")
        with pytest.raises(DataFormatError, match="bad magic"):
            read_header(path)

    def test_unsupported_version(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path)
        with open(path, "r+b") as fh:
            fh.seek(4)
            fh.write(struct.pack("<I", 99))
        with pytest.raises(DataFormatError, match="version 99"):
            read_header(path)

    def test_truncated_prefix(self, tmp_path):
        path = str(tmp_path / "t.reel")
        with open(path, "wb") as fh:
            fh.write(b"REEL\x01")
        with pytest.raises(DataFormatError, match="truncated"):
            read_header(path)

    def test_truncated_header(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path)
        with open(path, "rb") as fh:
            data = fh.read()
        with open(path, "wb") as fh:
            fh.write(data[:40])
        with pytest.raises(DataFormatError, match="header truncated at offset"):
            read_header(path)

    def test_truncated_payload_names_state_and_field(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path)
        size = os.path.getsize(path)
        with open(path, "rb") as fh:
            data = fh.read(size - 100)
        with open(path, "wb") as fh:
            fh.write(data)
        with pytest.raises(DataFormatError, match=r"payload truncated.*state 5.*'T'"):
            load(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        path = str(tmp_path / "t.reel")
        self.write_one(path)
        with open(path, "ab") as fh:
            fh.write(b"\x00")
        with pytest.raises(DataFormatError, match="trailing bytes"):
            load(path)

    def test_garbage_header_json(self, tmp_path):
        path = str(tmp_path / "t.reel")
        blob = b"{not json"
        with open(path, "wb") as fh:
            fh.write(b"REEL")
            fh.write(struct.pack("<I", FORMAT_VERSION))
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
        with pytest.raises(DataFormatError, match="not valid JSON"):
            read_header(path)

    def test_missing_header_key(self, tmp_path):
        path = str(tmp_path / "t.reel")
        blob = b'{"model_config": {}, "nx": 8, "ny": 8, "dx": 1.0}'
        with open(path, "wb") as fh:
            fh.write(b"REEL")
            fh.write(struct.pack("<I", FORMAT_VERSION))
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)
        with pytest.raises(DataFormatError, match="missing key 'dt'"):
            read_header(path)

    def test_missing_file_is_not_data_error(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_header(str(tmp_path / "absent.reel"))

    def test_wrong_kind_rejected(self, tmp_path):
        from reel.learn import preprocess, save_compressed

        traj = rollout(heat_model(nx=16), n_steps=3)
        data = preprocess(traj, heat_model(nx=16), keep_frac=0.5, r=0.5)
        path = str(tmp_path / "c.reel")
        save_compressed(data, path)
        with pytest.raises(DataFormatError, match="not a trajectory"):
            load(path)
