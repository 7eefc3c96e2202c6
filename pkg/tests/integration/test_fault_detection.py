# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

import unittest

import numpy as np

from meshless_claw.models.geometry import NodeKind
from meshless_claw.services.fault import FaultDetector
from meshless_claw.services.geometry import NodeGenerator, SpatialIndex
from tests.integration.settings import SETTINGS, SKIP_REASON
from tests.unit.utils.data import UNIT_SQUARE, TestData

# vertical discontinuity, placed at the same relative position in every grid
LINE_OFFSET = 0.3


def step_field(coords, h):
    line = 0.5 + LINE_OFFSET * h
    return (coords[:, 0] > line).astype(float) + np.sin(coords[:, 0] + coords[:, 1])


def distance_to_line(coords, h):
    return np.abs(coords[:, 0] - (0.5 + LINE_OFFSET * h))


@unittest.skipUnless(SETTINGS.slow_tests, SKIP_REASON)
class TestIndicator(unittest.TestCase):
    def test_bound_on_smooth_field(self):
        # the Hessian of sin(2 x1 + x2) has spectral norm at most 5
        nodes = NodeGenerator().generate_nodes(NodeKind.HALTON, 0.01, UNIT_SQUARE)
        detector = FaultDetector(SpatialIndex(nodes))
        values = np.sin(2 * nodes.coords[:, 0] + nodes.coords[:, 1])
        rng = np.random.default_rng(12)
        for i in rng.choice(nodes.size, size=1000, replace=False):
            self.assertLessEqual(detector.fault_indicator(int(i), values), 2.5 + 1e-9)

    def test_growth_towards_fault(self):
        near, far = [], []
        for n in (101, 201):
            nodes = TestData.grid_nodes(n)
            h = nodes.h
            indicator = FaultDetector(SpatialIndex(nodes)).indicators(
                step_field(nodes.coords, h)
            )
            distance = distance_to_line(nodes.coords, h)
            near.append(indicator[distance < h].max())
            far.append(indicator[distance > 10 * h].max())
        self.assertTrue(3 <= near[1] / near[0] <= 5, near)
        self.assertTrue(0.5 <= far[1] / far[0] <= 2, far)


@unittest.skipUnless(SETTINGS.slow_tests, SKIP_REASON)
class TestLocalization(unittest.TestCase):
    def test_vertical_step(self):
        nodes = TestData.grid_nodes(101)
        h = nodes.h
        detector = FaultDetector(SpatialIndex(nodes))
        for offset in (0.0, 0.3):
            with self.subTest(offset=offset):
                line = 0.5 + offset * h
                values = (nodes.coords[:, 0] > line).astype(float)
                faults = detector.detect_faults(values)
                distance = np.abs(nodes.coords[:, 0] - line)
                close = np.flatnonzero(distance <= 0.5 * h + 1e-12)
                self.assertEqual(len(close), 101)
                self.assertTrue(np.all(faults.mask[close]))
                self.assertTrue(np.all(distance[faults.ids] <= 3 * h))


if __name__ == "__main__":
    unittest.main()
