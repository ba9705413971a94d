"""Displacement of closed 1-forms under diffeomorphisms, and the energy
balance it induces.

For a conservative time-one map psi and a closed 1-form alpha, the pulled
back difference ``psi^* alpha - alpha`` is exact; its potential normalized
to vanish at a base point p is the displacement function nu.  The energy

    E(psi, H, p) = (1 / |H|) * integral of nu

over a harmonic form H decomposes through any isotopy reaching psi into a
flux pairing minus a scaled orbit integral, is continuous with modulus
``2 Vol d_C0``, and on surfaces its composition defect is bounded by twice
the squared symplectic area, which makes it a quasi-morphism.

nu is computed from the Hodge potential of the pulled-back difference
(O(N^d log N)); the per-point geodesic quadrature definition is kept as the
independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flows import GridMap, Isotopy, flow_tolerance, inverse
from .flux import flux_class, orbit_of
from .torus import (
    FlatTorus,
    OneForm,
    eval_spectral,
    harmonic_norm,
    hodge_decompose,
    integrate,
    integrate_form_along_path,
    minimal_geodesic,
    poincare_pair,
    torus_distance,
)


@dataclass(frozen=True)
class DisplacementField:
    """The displacement function nu of a form under a map, based at p."""

    torus: FlatTorus
    base: np.ndarray
    samples: np.ndarray
    form: OneForm

    def at(self, points) -> np.ndarray:
        return eval_spectral(self.torus, self.samples, np.atleast_2d(points))

    def mean(self) -> float:
        return integrate(self.torus, self.samples)


def pullback_difference(psi: GridMap, form: OneForm) -> np.ndarray:
    """Componentwise samples of ``psi^* alpha - alpha``."""
    comps = form.samples()
    return psi.pullback(comps) - comps


def displacement(
    psi: GridMap, form: OneForm, p, exactness_tol: float | None = None
) -> DisplacementField:
    """Displacement function ``nu(z) = integral over a path p -> z`` of
    ``psi^* alpha - alpha``.

    The difference form must be exact; a harmonic part above tolerance is a
    structural failure and raises.  The coexact residual of the discrete
    decomposition is resolution noise (pullbacks of closed forms are
    closed), tolerated up to a loose ceiling and excluded from nu.
    """
    torus = psi.torus
    tol = flow_tolerance(torus.grid_res, 100.0) if exactness_tol is None else exactness_tol
    p = np.asarray(p, dtype=float)
    split = hodge_decompose(torus, pullback_difference(psi, form))
    drift = float(np.abs(split.harmonic).max())
    if drift > tol:
        raise ValueError(
            f"pulled-back difference is not exact (harmonic drift {drift:.2e})"
        )
    if split.coexact_sup > max(1e-2, tol):
        raise ValueError(
            f"pullback is under-resolved (coexact residual {split.coexact_sup:.2e})"
        )
    at_p = float(eval_spectral(torus, split.potential, p[None, :])[0])
    return DisplacementField(torus, p, split.potential - at_p, form)


def displacement_geodesic_value(
    psi: GridMap, form: OneForm, p, z, samples: int = 2049
) -> float:
    """Oracle for nu(z): quadrature of the difference form along the
    minimal geodesic from p to z (independent of the Hodge route)."""
    torus = psi.torus
    beta = pullback_difference(psi, form)
    path = minimal_geodesic(np.asarray(p, float), np.asarray(z, float), samples)
    return integrate_form_along_path(torus, beta, path, spectral=True)


# ---------------------------------------------------------------------------
# base-point transfer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferReport:
    """Closed-triangle integral balance of the displaced form."""

    residual: float
    loop_winding: np.ndarray
    hypothesis_met: bool


def base_point_transfer_residual(
    psi: GridMap, form: OneForm, xi: np.ndarray, gamma: np.ndarray, connector: np.ndarray
) -> TransferReport:
    """Check ``int_xi - int_gamma - int_C = 0`` for the displaced form.

    ``xi`` and ``gamma`` are lifted paths with a common endpoint,
    ``connector`` runs from xi(0) to gamma(0).  The three paths bound a
    2-chain iff the closed concatenation has zero winding; nonzero winding
    flags a hypothesis failure instead of asserting the balance.
    """
    torus = psi.torus
    xi = np.asarray(xi, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    connector = np.asarray(connector, dtype=float)
    if torus_distance(xi[-1], gamma[-1]) > 1e-9:
        raise ValueError("paths must share their endpoint")
    if (
        torus_distance(connector[0], xi[0]) > 1e-9
        or torus_distance(connector[-1], gamma[0]) > 1e-9
    ):
        raise ValueError("connector must run from xi(0) to gamma(0)")
    loop_delta = (xi[-1] - xi[0]) - (gamma[-1] - gamma[0]) - (connector[-1] - connector[0])
    winding = np.rint(loop_delta).astype(int)
    if np.abs(loop_delta - winding).max() > 1e-6:
        raise ValueError("concatenated loop does not close on the torus")
    beta = pullback_difference(psi, form)
    vals = [
        integrate_form_along_path(torus, beta, path, spectral=True)
        for path in (xi, gamma, connector)
    ]
    residual = abs(vals[0] - vals[1] - vals[2])
    return TransferReport(residual, winding, hypothesis_met=not np.any(winding))


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyValue:
    """Energy of a map against a harmonic form, with optional decomposition."""

    value: float
    coeffs: np.ndarray
    base: np.ndarray
    pairing_term: float | None = None
    orbit_term: float | None = None

    @property
    def decomposition(self) -> float | None:
        if self.pairing_term is None:
            return None
        return self.pairing_term - self.orbit_term


def energy(psi: GridMap, coeffs, p) -> EnergyValue:
    """E(psi, H, p): the normalized volume average of the displacement."""
    coeffs = np.asarray(coeffs, dtype=float)
    norm = harmonic_norm(coeffs)
    if norm == 0.0:
        raise ValueError("energy requires a nonzero harmonic form")
    form = OneForm.harmonic_form(psi.torus, coeffs)
    nu = displacement(psi, form, p)
    return EnergyValue(nu.mean() / norm, coeffs, np.asarray(p, dtype=float))


def energy_via_isotopy(isotopy: Isotopy, coeffs, p) -> EnergyValue:
    """Energy with its flux-pairing / orbit-integral decomposition attached."""
    coeffs = np.asarray(coeffs, dtype=float)
    norm = harmonic_norm(coeffs)
    if norm == 0.0:
        raise ValueError("energy requires a nonzero harmonic form")
    torus = isotopy.torus
    e = energy(isotopy.time_one(), coeffs, p)
    fc = flux_class(isotopy, check=False)
    pairing = poincare_pair(coeffs, fc) / norm
    orbit = orbit_of(isotopy, np.asarray(p, dtype=float))
    orbit_integral = float(coeffs @ orbit.displacement)
    orbit_term = torus.volume_scale * orbit_integral / norm
    return EnergyValue(e.value, coeffs, e.base, pairing, orbit_term)


def gf10_residual(isotopy: Isotopy, coeffs, p) -> float:
    """Residual of the energy decomposition through one isotopy."""
    e = energy_via_isotopy(isotopy, coeffs, p)
    return abs(e.value - e.decomposition)


# ---------------------------------------------------------------------------
# composition and iteration laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefectReport:
    """Composition defect of the energy and its quasi-morphism bound."""

    defect: float
    bound: float
    exact_law_residual: float

    @property
    def within_bound(self) -> bool:
        return self.defect <= self.bound + 1e-9


def composition_defect(psi_iso: Isotopy, phi_iso: Isotopy, coeffs, p) -> DefectReport:
    """Defect ``|E(psi o phi) - E(psi) - E(phi)|`` against ``2 A(M)^2``.

    Also evaluates the exact composition law: the defect equals the scaled
    difference of the orbit integrals of H through p and through phi(p)
    along any isotopy reaching psi.
    """
    torus = psi_iso.torus
    if torus.dim != 2 or not torus.symplectic:
        raise ValueError("the defect bound is stated for symplectic surfaces")
    coeffs = np.asarray(coeffs, dtype=float)
    norm = harmonic_norm(coeffs)
    p = np.asarray(p, dtype=float)
    psi_map = psi_iso.time_one()
    phi_map = phi_iso.time_one()
    comp = psi_map.compose(phi_map)
    e_comp = energy(comp, coeffs, p).value
    e_psi = energy(psi_map, coeffs, p).value
    e_phi = energy(phi_map, coeffs, p).value
    defect = abs(e_comp - e_psi - e_phi)
    bound = 2.0 * torus.area**2

    orbit_p = orbit_of(psi_iso, p).displacement
    phi_p = (phi_map.apply(p[None, :])[0]) % 1.0
    orbit_phi_p = orbit_of(psi_iso, phi_p).displacement
    correction = (
        torus.volume_scale / norm * float(coeffs @ (orbit_p - orbit_phi_p))
    )
    exact_residual = abs(e_comp - e_psi - e_phi - correction)
    return DefectReport(defect, bound, exact_residual)


def iteration_law_residual(phi_iso: Isotopy, power: int, coeffs, x) -> float:
    """Residual of the iteration law for the energy.

    ``E(psi^l) = l E(psi) + (Vol/|H|) (l int_{orbit of x} H -
    sum over iterates of the orbit integrals through psi^{eps i}(x))``
    with eps the sign of l and orbits taken along the eps-branch of the
    path.
    """
    if power == 0:
        raise ValueError("iteration power must be nonzero")
    torus = phi_iso.torus
    coeffs = np.asarray(coeffs, dtype=float)
    norm = harmonic_norm(coeffs)
    x = np.asarray(x, dtype=float)
    eps = 1 if power > 0 else -1
    m = abs(power)
    base = phi_iso if eps > 0 else inverse(phi_iso)
    psi_map = phi_iso.time_one()
    base_map = base.time_one()

    lhs = energy(psi_map.power(power), coeffs, x).value
    e_one = energy(psi_map, coeffs, x).value

    # first orbit term along the forward path for either sign; the sum runs
    # over the eps-branch orbits through the iterates of x
    orbit_x = float(coeffs @ orbit_of(phi_iso, x).displacement)
    total = 0.0
    point = x.copy()
    for _ in range(m):
        total += float(coeffs @ orbit_of(base, point % 1.0).displacement)
        point = base_map.apply(point[None, :])[0]
    rhs = power * e_one + torus.volume_scale / norm * (power * orbit_x - total)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# continuity and separation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityRow:
    distance: float
    energy_gap: float
    bound: float
    checked: bool

    @property
    def ok(self) -> bool:
        return (not self.checked) or self.energy_gap <= self.bound


def continuity_check(
    maps: list[GridMap], psi: GridMap, coeffs, x, tol: float = 1e-9
) -> list[ContinuityRow]:
    """Energy continuity modulus ``|E(psi_i) - E(psi)| <= 2 Vol d_C0``.

    Entries with distance at or beyond the injectivity radius are skipped
    (reported unchecked) since the modulus is only derived inside it.
    """
    torus = psi.torus
    base_val = energy(psi, coeffs, x).value
    rows = []
    for m in maps:
        d = m.c0_distance(psi)
        if d >= torus.injectivity_radius:
            rows.append(ContinuityRow(d, np.nan, np.nan, checked=False))
            continue
        gap = abs(energy(m, coeffs, x).value - base_val)
        bound = 2.0 * torus.volume_scale * d + tol
        rows.append(ContinuityRow(d, gap, bound, checked=True))
    return rows


@dataclass(frozen=True)
class SeparationReport:
    """Orbit-vs-minimal-geodesic audit for a nonzero-flux isotopy.

    ``c0_gap`` is the distance of the time-one map to the identity; the
    threshold delta0 uses the 1/8 coefficient and the maximizing coordinate
    form.  When the hypothesis holds every sampled orbit must be strictly
    longer than the flat distance between its endpoints.
    """

    delta0: float
    c0_gap: float
    hypothesis_met: bool
    min_margin: float | None
    margins: np.ndarray | None


def separation_check(
    phi_iso: Isotopy, flux_tol: float = 1e-9, samples: int = 64
) -> SeparationReport:
    torus = phi_iso.torus
    fc = flux_class(phi_iso, check=False)
    if fc.norm() <= flux_tol:
        raise ValueError("separation check requires a nonzero flux class")
    ratio = float(np.abs(fc.pairings).max())  # coordinate basis, |dx_i| = 1
    delta0 = min(torus.injectivity_radius, ratio / torus.volume_scale) / 8.0
    c0_gap = phi_iso.time_one().c0_distance()
    if c0_gap >= delta0:
        return SeparationReport(delta0, c0_gap, False, None, None)
    stride = max(1, torus.points.shape[0] // samples)
    pts = torus.points[::stride]
    from .flux import _orbit_batch

    orbits = _orbit_batch(phi_iso, pts)
    lengths = np.linalg.norm(np.diff(orbits, axis=1), axis=2).sum(axis=1)
    gaps = torus_distance(orbits[:, -1, :], orbits[:, 0, :])
    margins = lengths - gaps
    return SeparationReport(delta0, c0_gap, True, float(margins.min()), margins)
