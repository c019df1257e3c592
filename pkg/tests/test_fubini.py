import numpy as np
import pytest

from stochconv import (
    DenseOperator,
    FubiniFamily,
    HilbertSpec,
    IntegrandSpec,
    QWienerSpec,
    SpectralOperator,
    StochConvError,
    TimeGrid,
    fubini_report,
    integrate_then_ito,
    ito_integrate,
    ito_then_integrate,
    sample_increments,
)

from conftest import relative_gap


def _noise(dim=1, n_steps=100, n_paths=50, seed=101):
    space = HilbertSpec(dim)
    return sample_increments(
        QWienerSpec(space, [1.0] * dim), TimeGrid(1.0, n_steps), seed, n_paths
    )


def _constant_integrand(dim=1, scale=1.0):
    space = HilbertSpec(dim)
    return IntegrandSpec.from_constant(
        SpectralOperator(space, space, [scale] * dim)
    )


def test_single_atom_weight_one_equals_plain_integral():
    noise = _noise()
    base = _constant_integrand()
    family = FubiniFamily.from_factory([1.0], [1.0], lambda y: base.scaled(y))
    lhs = integrate_then_ito(family, noise)
    plain = ito_integrate(base, noise)
    assert np.array_equal(lhs.values, plain.values)


def test_single_atom_any_weight_commutes_bitwise():
    noise = _noise(seed=7)
    base = _constant_integrand()
    for weight in (0.37, 2.0, 1e-3, 123.456):
        family = FubiniFamily.from_factory([1.0], [weight], lambda y: base.scaled(y))
        report = fubini_report(family, noise)
        assert report.sup_abs == 0.0


def test_all_weights_zero_gives_zero():
    noise = _noise()
    base = _constant_integrand()
    family = FubiniFamily.from_factory([0.5, 1.5], [0.0, 0.0], lambda y: base.scaled(y))
    assert np.all(integrate_then_ito(family, noise).values == 0.0)
    assert np.all(ito_then_integrate(family, noise).values == 0.0)


def test_midpoint_rule_weighted_sum_oracle():
    # g(y) = y * Phi with a midpoint rule: the mix equals (sum w_j y_j) * I(Phi)
    noise = _noise(seed=33)
    base = _constant_integrand()
    n_atoms = 8
    h = 1.0 / n_atoms
    atoms = (np.arange(n_atoms) + 0.5) * h
    weights = np.full(n_atoms, h)
    family = FubiniFamily.from_factory(atoms, weights, lambda y: base.scaled(float(y)))
    mean_value = float(np.sum(weights * atoms))
    assert mean_value == pytest.approx(0.5, abs=1e-15)
    lhs = integrate_then_ito(family, noise)
    oracle = mean_value * ito_integrate(base, noise).values
    assert relative_gap(lhs.values, oracle) <= 1e-12
    rhs = ito_then_integrate(family, noise)
    assert relative_gap(rhs.values, oracle) <= 1e-12


def test_two_atom_family_headline(rng):
    noise = _noise(dim=2, seed=9)
    space = HilbertSpec(2)

    def factory(y):
        return IntegrandSpec.from_constant(
            DenseOperator(space, space, rng.normal(size=(2, 2)) * (1.0 + y))
        )

    family = FubiniFamily.from_factory([0.2, 0.8], [0.6, 1.1], factory)
    report = fubini_report(family, noise)
    lhs = integrate_then_ito(family, noise)
    scale = float(np.max(np.abs(lhs.values)))
    assert report.sup_abs <= 1e-10 * scale


def test_large_quadrature_family_headline(rng):
    # 64-node quadrature family on an 8-dimensional space, 100 paths
    dim, n_atoms = 8, 64
    noise = _noise(dim=dim, n_steps=200, n_paths=100, seed=404)
    space = HilbertSpec(dim)
    mats = rng.normal(size=(n_atoms, dim, dim))
    weights = rng.uniform(0.0, 0.1, n_atoms)
    family = FubiniFamily(
        atoms=tuple(range(n_atoms)),
        weights=weights,
        integrands=tuple(
            IntegrandSpec.from_constant(DenseOperator(space, space, m)) for m in mats
        ),
    )
    report = fubini_report(family, noise)
    lhs = integrate_then_ito(family, noise)
    scale = float(np.max(np.abs(lhs.values)))
    assert report.sup_abs <= 1e-9 * scale


def test_weight_doubling_scales_both_sides_exactly():
    noise = _noise(seed=77)
    base = _constant_integrand()
    atoms = [0.3, 0.9, 1.7]
    weights = np.array([0.25, 0.5, 0.125])
    fam = FubiniFamily.from_factory(atoms, weights, lambda y: base.scaled(y))
    fam2 = FubiniFamily.from_factory(atoms, 2.0 * weights, lambda y: base.scaled(y))
    assert np.array_equal(
        integrate_then_ito(fam2, noise).values, 2.0 * integrate_then_ito(fam, noise).values
    )
    assert np.array_equal(
        ito_then_integrate(fam2, noise).values, 2.0 * ito_then_integrate(fam, noise).values
    )


def test_time_varying_members_commute(rng):
    noise = _noise(n_steps=60, n_paths=30, seed=21)
    space = HilbertSpec(1)

    def factory(y):
        mats = (1.0 + y * np.linspace(0.0, 1.0, 60))[:, None, None]
        return IntegrandSpec.from_matrices(space, space, mats)

    family = FubiniFamily.from_factory([0.1, 0.5, 0.9], [0.3, 0.3, 0.4], factory)
    lhs = integrate_then_ito(family, noise)
    rhs = ito_then_integrate(family, noise)
    assert relative_gap(lhs.values, rhs.values) <= 1e-12


def test_adapted_members_commute_and_single_atom_is_bitwise():
    noise = _noise(n_steps=80, n_paths=25, seed=61)
    space = HilbertSpec(1)

    def factory(y):
        def gain(i, increments):
            level = increments[:, :i, :].sum(axis=(1, 2))
            return (y + np.tanh(level))[:, None, None] * np.ones((1, 1, 1))

        return IntegrandSpec.from_callback(space, space, gain)

    single = FubiniFamily.from_factory([0.4], [1.7], factory)
    assert fubini_report(single, noise).sup_abs == 0.0
    several = FubiniFamily.from_factory([0.1, 0.4, 1.2], [0.2, 0.5, 0.3], factory)
    lhs = integrate_then_ito(several, noise)
    rhs = ito_then_integrate(several, noise)
    assert relative_gap(lhs.values, rhs.values) <= 1e-12


def test_family_validation():
    base = _constant_integrand()
    with pytest.raises(StochConvError):
        FubiniFamily.from_factory([], [], lambda y: base.scaled(y))
    with pytest.raises(StochConvError):
        FubiniFamily.from_factory([1.0], [-0.5], lambda y: base.scaled(y))
    with pytest.raises(StochConvError):
        FubiniFamily.from_factory([1.0], [np.inf], lambda y: base.scaled(y))
    two = _constant_integrand(dim=2)
    with pytest.raises(StochConvError):
        FubiniFamily(
            atoms=(0.0, 1.0),
            weights=np.array([1.0, 1.0]),
            integrands=(base, two),
        )
