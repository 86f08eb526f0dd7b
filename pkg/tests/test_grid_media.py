import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxvie.grid import (
    MATERIALS,
    PermittivityMap,
    Physics,
    VoxelGrid,
    dielectric_ratio,
    homogenize,
    material_permittivity,
    medium_coefficient,
)


def make_map(values):
    values = np.asarray(values, dtype=np.complex128)
    grid = VoxelGrid(values.shape[2], values.shape[1], values.shape[0], 1e-7)
    return PermittivityMap(grid, values)


class TestVoxelGrid:
    def test_index_map_bijective(self):
        grid = VoxelGrid(4, 3, 2, 1e-7)
        seen = set()
        for iz in range(2):
            for iy in range(3):
                for ix in range(4):
                    seen.add(grid.linear_index(ix, iy, iz))
        assert seen == set(range(grid.n_voxels))

    def test_center_formula(self):
        grid = VoxelGrid(2, 2, 2, 0.5, origin=(1.0, 2.0, 3.0))
        assert np.allclose(grid.center(0, 0, 0), [1.25, 2.25, 3.25])
        assert np.allclose(grid.center(1, 0, 1), [1.75, 2.25, 3.75])

    def test_flat_layout_is_x_fastest(self):
        grid = VoxelGrid(3, 2, 2, 1.0)
        arr = np.arange(grid.n_voxels).reshape(grid.shape)
        for iz in range(2):
            for iy in range(2):
                for ix in range(3):
                    assert arr[iz, iy, ix] == grid.linear_index(ix, iy, iz)

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            VoxelGrid(0, 1, 1, 1.0)
        with pytest.raises(ValueError):
            VoxelGrid(1, 1, 1, 0.0)


class TestPhysics:
    def test_wavelength_roundtrip(self):
        phys = Physics.from_wavelength(1550e-9)
        assert phys.lambda0 == pytest.approx(1550e-9, rel=1e-12)
        assert phys.k0 == pytest.approx(2 * np.pi / 1550e-9, rel=1e-12)

    def test_interior_wavelength(self):
        phys = Physics.from_wavelength(1550e-9)
        assert phys.interior_wavelength(4.0) == pytest.approx(775e-9, rel=1e-12)


class TestMaterials:
    def test_table_values(self):
        assert MATERIALS["si"] == 12.1
        assert MATERIALS["sin"] == 3.99
        assert MATERIALS["sio2"] == 2.085
        assert MATERIALS["si_in_sio2"] == 5.80
        assert MATERIALS["sin_in_sio2"] == 1.91

    def test_unknown_material(self):
        with pytest.raises(ValueError, match="unknown material"):
            material_permittivity("unobtainium")


class TestMediumCoefficient:
    def test_air_gives_zero(self):
        m = medium_coefficient(make_map(np.ones((2, 2, 2))))
        assert np.all(m == 0)

    def test_silicon_value(self):
        m = medium_coefficient(make_map(np.full((1, 1, 1), 12.1)))
        assert m[0, 0, 0] == pytest.approx(11.1 / 12.1)

    def test_complex_hand_value(self):
        m = medium_coefficient(make_map(np.full((1, 1, 1), 2.0 - 1.0j)))
        assert m[0, 0, 0] == pytest.approx((3.0 - 1.0j) / 5.0)

    def test_magnitude_bound(self, rng):
        eps = rng.uniform(0.5, 16.0, (3, 3, 3)) - 1j * rng.uniform(0, 2.0, (3, 3, 3))
        m = medium_coefficient(make_map(eps))
        assert np.all(np.abs(m) <= 1.0 + 1.0 / np.abs(eps) + 1e-12)

    def test_passivity_enforced(self):
        with pytest.raises(ValueError):
            make_map(np.full((1, 1, 1), -1.0))
        with pytest.raises(ValueError):
            make_map(np.full((1, 1, 1), 2.0 + 0.5j))  # gain


class TestHomogenize:
    def test_constant_map_all_strategies(self):
        pmap = make_map(np.full((2, 3, 4), 5.8))
        expect = (5.8 - 1) / 5.8
        for strategy in ("mode", "mean_x", "real_mean_x"):
            mt = homogenize(pmap, strategy)
            assert np.allclose(mt, expect)

    def test_mean_x_line(self):
        # m values 0.5, 0.5, 0.5, 0.0 along x -> mean 0.375
        eps = np.ones((1, 1, 4), dtype=np.complex128)
        eps[0, 0, :3] = 2.0  # m = 0.5
        mt = homogenize(make_map(eps), "mean_x")
        assert np.allclose(mt, 0.375)

    def test_real_mean_x_drops_imaginary(self):
        eps = np.ones((1, 1, 4), dtype=np.complex128)
        eps[0, 0, :3] = 2.0
        eps[0, 0, 1] = 1.0 / (1.0 - (0.5 - 0.2j))  # voxel with m = 0.5 - 0.2j
        m = medium_coefficient(make_map(eps))
        assert m[0, 0, 1] == pytest.approx(0.5 - 0.2j)
        mt = homogenize(make_map(eps), "real_mean_x")
        assert np.allclose(mt, 0.375)
        assert np.all(mt.imag == 0)

    def test_mode_tie_breaks_to_larger_magnitude(self):
        eps = np.ones((1, 1, 4), dtype=np.complex128)
        eps[0, 0, :2] = 2.0  # m = 0.5 twice
        eps[0, 0, 2:] = 4.0  # m = 0.75 twice
        mt = homogenize(make_map(eps), "mode")
        assert np.allclose(mt, 0.75)

    def test_output_constant_along_x(self, rng):
        eps = rng.uniform(1.0, 4.0, (2, 3, 5))
        for strategy in ("mode", "mean_x", "real_mean_x"):
            mt = homogenize(make_map(eps), strategy)
            assert np.allclose(mt, mt[:, :, :1])

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 3), min_size=5, max_size=5))
    def test_mean_x_permutation_invariant(self, perm_seed):
        values = np.array([1.0, 2.0, 3.5, 1.0, 4.0])[perm_seed]
        eps = values.reshape(1, 1, -1).astype(np.complex128)
        base = np.sort(values)
        mt = homogenize(make_map(eps), "mean_x")
        mt_sorted = homogenize(make_map(base.reshape(1, 1, -1).astype(complex)), "mean_x")
        assert np.allclose(mt, mt_sorted)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError, match="strategy"):
            homogenize(make_map(np.ones((1, 1, 1))), "median")


class TestDielectricRatio:
    def test_all_air(self):
        assert dielectric_ratio(make_map(np.ones((2, 2, 2)))) == 0.0

    def test_all_dielectric(self):
        assert dielectric_ratio(make_map(np.full((2, 2, 2), 5.8))) == 1.0

    def test_partial(self):
        eps = np.ones((1, 4, 4), dtype=np.complex128)
        eps[0, :2, :2] = 12.1
        assert dielectric_ratio(make_map(eps)) == pytest.approx(0.25)
