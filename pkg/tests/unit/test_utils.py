# SPDX-FileCopyrightText: 2024 Contributors to the meshless_claw project
#
# SPDX-License-Identifier: MPL-2.0

import unittest

import numpy as np

from meshless_claw.exceptions import EmptyInput
from meshless_claw.utils import (
    evaluate_monomials,
    grow_influence_size,
    median,
    minimum_image,
    monomial_exponents,
)


class TestMonomials(unittest.TestCase):
    def test_quadratic_exponents_in_two_dimensions(self):
        expected = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
        self.assertEqual(monomial_exponents(2, 3).tolist(), expected)

    def test_space_dimensions(self):
        self.assertEqual(len(monomial_exponents(2, 2)), 3)
        self.assertEqual(len(monomial_exponents(3, 3)), 10)
        self.assertEqual(len(monomial_exponents(1, 4)), 4)

    def test_evaluate(self):
        y = np.array([[2.0, 3.0], [-1.0, 0.5]])
        matrix = evaluate_monomials(y, monomial_exponents(2, 3))
        np.testing.assert_allclose(matrix[:, 0], [1, 2, 3, 4, 6, 9])
        np.testing.assert_allclose(matrix[:, 1], [1, -1, 0.5, 1, -0.5, 0.25])


class TestGrowInfluenceSize(unittest.TestCase):
    def test_sequence_from_ten(self):
        sizes = [10]
        while sizes[-1] < 48:
            sizes.append(grow_influence_size(sizes[-1]))
        self.assertEqual(sizes, [10, 12, 15, 18, 22, 27, 33, 40, 48])

    def test_always_grows(self):
        self.assertEqual(grow_influence_size(1), 2)
        self.assertEqual(grow_influence_size(2), 3)


class TestMinimumImage(unittest.TestCase):
    def test_wraps_periodic_axes_only(self):
        displacement = np.array([[0.9, 0.9], [-0.6, 0.2]])
        wrapped = minimum_image(displacement, [1.0, 1.0], [True, False])
        np.testing.assert_allclose(wrapped, [[-0.1, 0.9], [0.4, 0.2]])

    def test_no_periodic_axes(self):
        displacement = np.array([[0.9, -0.9]])
        wrapped = minimum_image(displacement, [1.0, 1.0], [False, False])
        np.testing.assert_array_equal(wrapped, displacement)


class TestMedian(unittest.TestCase):
    def test_odd_length(self):
        self.assertEqual(median([3, 1, 2]), 2)

    def test_even_length(self):
        self.assertEqual(median([1, 2, 3, 4]), 2.5)

    def test_single_value(self):
        self.assertEqual(median([5]), 5)

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            median([])


if __name__ == "__main__":
    unittest.main()
