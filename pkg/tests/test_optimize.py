import json
import math

import numpy as np
import pytest

from chargelab import (ChargeConfiguration, QuadratureSpec,
                       local_min_certificate, minimize_positions,
                       uniform_circle_config)
from chargelab.optimize import _merge_close_angles, _merge_close_points

from _oracles import FROZEN_UNIFORM_ENERGY, grid_min_gap_energy

TWO_PI = 2.0 * math.pi


def _sorted_gaps(config):
    ang = np.sort(np.mod(config.angles(), TWO_PI))
    return np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))


class TestMinimize2d:
    def test_pair_finds_antipodal_gap(self):
        trace = minimize_positions(np.ones(2), 2, seed=0, budget=300)
        gap = _sorted_gaps(trace.best)[0]
        assert abs(gap - math.pi) <= 0.05
        assert trace.best_energy <= FROZEN_UNIFORM_ENERGY[2] + 5e-3

    def test_pair_agrees_with_grid_oracle(self):
        # exhaustive search over a gap grid; the center node pi must win
        gaps = math.pi + np.linspace(-0.3, 0.3, 7)
        best_gap, best_val = grid_min_gap_energy(gaps)
        assert best_gap == math.pi

    def test_single_charge_trivial(self):
        trace = minimize_positions(np.ones(1), 2, seed=0, budget=100)
        assert trace.meta["stop_reason"] == "converged"
        assert abs(trace.best_energy - 4.0) <= 5e-3
        assert trace.iterates[0].event == "start"

    def test_triple_reaches_uniform(self):
        trace = minimize_positions(np.ones(3), 2, seed=1, budget=400)
        gaps = _sorted_gaps(trace.best)
        assert np.all(np.abs(gaps - TWO_PI / 3.0) <= 0.02)

    def test_budget_stop(self):
        trace = minimize_positions(np.ones(4), 2, seed=0, budget=100)
        assert trace.meta["stop_reason"] == "budget"
        assert trace.meta["evaluations"] <= 100

    def test_budget_floor(self):
        with pytest.raises(ValueError):
            minimize_positions(np.ones(2), 2, budget=99)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            minimize_positions([1.0, -1.0], 2)
        with pytest.raises(ValueError):
            minimize_positions([], 2)

    def test_method_dimension_pairing(self):
        with pytest.raises(ValueError):
            minimize_positions(np.ones(2), 3, method="nelder-mead-angles")
        with pytest.raises(ValueError):
            minimize_positions(np.ones(2), 2, method="projected-pattern-search")
        with pytest.raises(ValueError):
            minimize_positions(np.ones(2), 4)

    def test_bitwise_reproducible(self):
        a = minimize_positions(np.ones(3), 2, seed=7, budget=200)
        b = minimize_positions(np.ones(3), 2, seed=7, budget=200)
        assert a.best_energy == b.best_energy
        assert [i.energy for i in a.iterates] == [i.energy for i in b.iterates]
        assert np.array_equal(a.best.positions, b.best.positions)

    def test_accepted_energies_monotone_within_band(self):
        trace = minimize_positions(np.ones(5), 2, seed=3, budget=400)
        its = trace.iterates
        for prev, cur in zip(its, its[1:]):
            assert cur.energy <= prev.energy + 2.0 * (prev.error + cur.error)

    def test_meta_contents(self):
        trace = minimize_positions(np.ones(2), 2, seed=0, budget=150)
        assert trace.meta["method"] == "nelder-mead-angles"
        assert trace.meta["seed"] == 0
        assert trace.meta["stop_reason"] in ("budget", "converged")
        assert isinstance(trace.meta["events"], list)


class TestMinimize3d:
    def test_four_charges_near_tetrahedron(self):
        trace = minimize_positions(np.ones(4), 3, seed=0, budget=300)
        assert trace.meta["method"] == "projected-pattern-search"
        pos = trace.best.positions
        dots = [np.dot(pos[i], pos[j]) for i in range(4) for j in range(i + 1, 4)]
        assert np.all(np.abs(np.array(dots) + 1.0 / 3.0) <= 0.15)

    def test_reproducible(self):
        a = minimize_positions(np.ones(3), 3, seed=2, budget=150)
        b = minimize_positions(np.ones(3), 3, seed=2, budget=150)
        assert a.best_energy == b.best_energy
        assert np.array_equal(a.best.positions, b.best.positions)


class TestTraceFile:
    def test_jsonl_schema(self, tmp_path):
        trace = minimize_positions(np.ones(3), 2, seed=0, budget=200)
        path = tmp_path / "trace.jsonl"
        trace.write_jsonl(path)
        lines = path.read_text().splitlines()
        assert len(lines) == len(trace.iterates)
        for i, line in enumerate(lines):
            row = json.loads(line)
            assert set(row) == {"iter", "angles_or_points", "energy", "err"}
            assert row["iter"] == i
            assert all(isinstance(a, float) for a in row["angles_or_points"])

    def test_jsonl_3d_rows_are_points(self, tmp_path):
        trace = minimize_positions(np.ones(2), 3, seed=0, budget=120)
        path = tmp_path / "trace3.jsonl"
        trace.write_jsonl(path)
        row = json.loads(path.read_text().splitlines()[0])
        pts = row["angles_or_points"]
        assert len(pts) == 2 and len(pts[0]) == 3


class TestPoleMerging:
    def test_close_angles_merge(self):
        merged = _merge_close_angles(np.array([0.0, 1e-8, 1.0]),
                                     np.array([1.0, 1.0, 1.0]))
        assert merged is not None
        ang, w = merged
        assert ang.size == 2
        assert sorted(w) == [1.0, 2.0]

    def test_wraparound_merge(self):
        near_pi = math.pi - 1e-9
        merged = _merge_close_angles(np.array([-near_pi - 2e-9 + TWO_PI, near_pi]),
                                     np.array([1.0, 2.0]))
        # gap passes through +-pi and is far below the collision threshold
        assert merged is not None
        _, w = merged
        assert w.tolist() == [3.0]

    def test_distant_angles_untouched(self):
        assert _merge_close_angles(np.array([0.0, 1.0]), np.ones(2)) is None

    def test_close_points_merge(self):
        pts = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        merged = _merge_close_points(pts, np.array([1.0, 2.0, 4.0]))
        assert merged is not None
        p, w = merged
        assert p.shape == (2, 3)
        assert sorted(w) == [3.0, 4.0]


class TestCertificates:
    def test_uniform_pair_consistent(self):
        rep = local_min_certificate(uniform_circle_config(2),
                                    spec=QuadratureSpec(rel_tolerance=1e-5))
        assert rep.verdict == "consistent"
        assert rep.gradients.shape == (2,)
        assert rep.max_gradient <= rep.gradient_error
        assert rep.min_second_diff > rep.second_diff_error

    def test_uniform_triple_consistent(self):
        rep = local_min_certificate(uniform_circle_config(3),
                                    spec=QuadratureSpec(rel_tolerance=1e-5))
        assert rep.verdict == "consistent"

    def test_single_charge_flat_direction(self):
        # rotations leave the energy invariant, so nothing is significant
        rep = local_min_certificate(uniform_circle_config(1),
                                    spec=QuadratureSpec(rel_tolerance=1e-4))
        assert rep.verdict == "inconclusive"

    def test_perturbed_pair_not_minimal(self):
        ang = np.array([0.0, 2.4])
        pos = np.column_stack([np.cos(ang), np.sin(ang)])
        rep = local_min_certificate(ChargeConfiguration(pos, np.ones(2)),
                                    spec=QuadratureSpec(rel_tolerance=1e-5))
        assert rep.verdict == "not_minimal"

    def test_3d_shapes(self):
        from chargelab import fibonacci_sphere_config
        rep = local_min_certificate(fibonacci_sphere_config(2), h=0.05,
                                    spec=QuadratureSpec(rel_tolerance=1e-3))
        assert rep.gradients.shape == (4,)
        assert rep.h == 0.05

    def test_h_validation(self):
        cfg = uniform_circle_config(2)
        for bad in (1e-4, 0.2):
            with pytest.raises(ValueError):
                local_min_certificate(cfg, h=bad)

    def test_interior_rejected(self):
        cfg = ChargeConfiguration([[0.5, 0.0]], [1.0])
        with pytest.raises(ValueError):
            local_min_certificate(cfg)
