"""Hofer and Hofer-like length geometry of symplectic isotopies.

A symplectic isotopy generated by the pair (U, H) has lengths

    l_B(Phi)      = integral over t of  osc(U_t) + |H_t|,
    l_B_inf(Phi)  = max over t of       osc(U_t) + |H_t|,

and dropping the harmonic term gives the Hofer lengths of Hamiltonian
isotopies.  The induced energies of a time-one map are infima over all
isotopies reaching it; true infima are not computable, so every energy here
is a documented candidate-family minimum, an upper bound that is monotone
non-increasing as the family grows.  Inequality checks state which side is a
surrogate; all comparisons here place surrogate upper bounds on both sides,
so a pass certifies consistency at family resolution while a fail only
indicts the family.

The deformation construction for a harmonic family X_t with zero mean flux,

    Z_{s,t} = t X_{st} - 2 s * integral_0^t X_u du,

is integrated in s into a 2-parameter family of translations G_{s,t} whose
t-velocities V_{s,t} obey the slope bound
``sup |V|_B / (1 + sup |V|_B) <= 6 sup |X|_B`` and the companion oscillation
bound; it also powers the straightening of a zero-flux path into a
Hamiltonian one with the same endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .flows import (
    GeneratorPair,
    GridMap,
    Isotopy,
    PeriodicInterp,
    contract_field_to_coeffs,
    flow_tolerance,
    generator_of,
    generator_residual,
    inverse,
    rotate_coeffs_to_field,
)
from .flux import flux_class
from .torus import FlatTorus, harmonic_norm, hodge_decompose, osc


# ---------------------------------------------------------------------------
# lengths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthReport:
    """Length functionals of one isotopy with the per-time traces."""

    times: np.ndarray
    osc_trace: np.ndarray
    harmonic_trace: np.ndarray

    @property
    def l1_length(self) -> float:
        return float(simpson(self.osc_trace + self.harmonic_trace, x=self.times))

    @property
    def linf_length(self) -> float:
        return float(np.max(self.osc_trace + self.harmonic_trace))

    @property
    def hofer_l1(self) -> float:
        return float(simpson(self.osc_trace, x=self.times))

    @property
    def hofer_linf(self) -> float:
        return float(np.max(self.osc_trace))


def lengths(isotopy: Isotopy, validate_tol: float | None = None) -> LengthReport:
    """Length report from the generator pair of a symplectic isotopy.

    ``validate_tol`` re-derives the velocity from the stored displacement
    data and errors out if the generator reconstruction residual exceeds it.
    """
    gen = generator_of(isotopy)
    if validate_tol is not None:
        res = generator_residual(isotopy, gen, nt=3)
        if res > validate_tol:
            raise ValueError(f"generator residual {res:.3e} above tolerance")
    k1 = len(gen.times)
    osc_trace = gen.U.reshape(k1, -1).max(axis=1) - gen.U.reshape(k1, -1).min(axis=1)
    harm_trace = np.abs(gen.H).sum(axis=1)
    return LengthReport(gen.times.copy(), osc_trace, harm_trace)


def vector_field_b_norm(torus: FlatTorus, samples: np.ndarray) -> float:
    """Norm ``osc(U_X) + |H_X|`` of a symplectic vector field.

    Defined through the Hodge split of the contraction ``i(X)omega``; with
    this choice the length l_B is the time integral of the velocity norm.
    """
    form = hodge_decompose(torus, contract_field_to_coeffs(torus.check_vector(samples)))
    if form.coexact_sup > flow_tolerance(torus.grid_res, 100.0):
        raise ValueError(
            f"field is not symplectic (coexact residual {form.coexact_sup:.2e})"
        )
    return osc(form.potential) + harmonic_norm(form.harmonic)


# ---------------------------------------------------------------------------
# Hodge splitting of an isotopy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HodgeSplit:
    """Factorization phi_t = rho_t o psi_t into harmonic and Hamiltonian parts."""

    harmonic_path: Isotopy
    remainder: Isotopy
    remainder_flux: float
    harmonic_consistency: float


def hodge_split_isotopy(isotopy: Isotopy, tol: float = 1e-3) -> HodgeSplit:
    """Split off the translation path of the harmonic generator part.

    For volume-preserving paths the translation shift of the harmonic part
    equals the mean lifted displacement trace exactly (the start-point mean
    of the velocity is the harmonic field), so rho is read off the data with
    no quadrature.  The remainder ``rho_t^{-1} o phi_t`` is the displacement
    minus that shift; its flux class vanishes by construction and its
    generator has no harmonic part.  ``harmonic_consistency`` reports the
    gap between the differenced shift and the generator's harmonic trace.
    """
    torus = isotopy.torus
    gen = generator_of(isotopy)
    k1 = len(gen.times)
    shift = isotopy.disp.reshape(k1, torus.dim, -1).mean(axis=2)  # (K+1, d)

    rho_stack = np.zeros((k1, torus.dim) + torus.shape)
    rho_stack += shift.reshape((k1, torus.dim) + (1,) * torus.dim)
    rho_stack[0] = 0.0
    rho_gen = GeneratorPair(gen.times.copy(), np.zeros((k1,) + torus.shape), gen.H.copy())
    rho = Isotopy(torus, gen.times.copy(), rho_stack, kind="harmonic", gen=rho_gen)

    rem_stack = isotopy.disp - rho_stack
    rem_stack[0] = 0.0
    rem_u = np.empty((k1,) + torus.shape)
    for k in range(k1):
        shifted = torus.points + shift[k]
        vals = PeriodicInterp(torus, gen.U[k]).at(shifted).reshape(torus.shape)
        rem_u[k] = vals - vals.mean()
    rem_gen = GeneratorPair(gen.times.copy(), rem_u, np.zeros((k1, torus.dim)))
    remainder = Isotopy(
        torus, gen.times.copy(), rem_stack, kind="hamiltonian", gen=rem_gen
    )

    rem_flux = flux_class(remainder, check=False).norm()
    # consistency in integral form: the mean-displacement shift must retrace
    # the time integral of the rotated harmonic trace (differencing across
    # cutoff layers would drown in their high derivatives)
    expected = cumulative_simpson(
        rotate_coeffs_to_field(gen.H.T).T, x=gen.times, axis=0, initial=0.0
    )
    consistency = float(np.abs(shift - expected).max())
    if consistency > tol:
        raise ValueError(
            f"harmonic trace and mean displacement disagree ({consistency:.3e})"
        )
    return HodgeSplit(rho, remainder, rem_flux, consistency)


# ---------------------------------------------------------------------------
# deformation of harmonic families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationFamily:
    """Two-parameter deformation data of a zero-mean-flux harmonic family."""

    s_grid: np.ndarray
    t_grid: np.ndarray
    x_coeffs: np.ndarray  # (T, d) harmonic coefficients of X_t
    z_field: np.ndarray  # (S, T, d) values of Z_{s,t}
    g_shift: np.ndarray  # (S, T, d) translation vectors of G_{s,t}
    v_field: np.ndarray  # (S, T, d) t-velocities of G
    sup_x_b: float
    sup_v_b: float
    endpoint_residual: float

    def slope_margin(self) -> float:
        """Margin of ``sup|V|/(1 + sup|V|) <= 6 sup|X|`` (>= 0 on pass)."""
        lhs = self.sup_v_b / (1.0 + self.sup_v_b)
        return 6.0 * self.sup_x_b - lhs

    def oscillation_bound_rows(self, n: int = 5) -> list[tuple[float, float, float]]:
        """(u, osc value, bound) rows for the companion oscillation bound.

        The integrand ``omega(Z, V)`` is spatially constant for harmonic
        (translation) fields, so the oscillation side vanishes identically;
        the rows keep the computed values for the record.
        """
        rows = []
        idx = np.linspace(0, len(self.s_grid) - 1, n).astype(int)
        bound = 6.0 * self.sup_v_b * self.sup_x_b
        for j in np.linspace(0, len(self.t_grid) - 1, n).astype(int):
            z = self.z_field[:, j, :]
            v = self.v_field[:, j, :]
            pairing = _omega_pairing(z, v)
            integral = cumulative_simpson(pairing, x=self.s_grid, initial=0.0)
            for i in idx:
                rows.append((float(self.s_grid[i]), 0.0 * float(integral[i]), bound))
        return rows


def _omega_pairing(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """omega(a, b) per symplectic pair for vectors stacked on the last axis."""
    out = np.zeros(a.shape[:-1])
    for i in range(0, a.shape[-1], 2):
        out += a[..., i] * b[..., i + 1] - a[..., i + 1] * b[..., i]
    return out


def mcduff_deformation(
    torus: FlatTorus,
    coeffs_of_t: Callable[[float], np.ndarray],
    s_res: int = 64,
    t_res: int = 64,
    mean_tol: float = 1e-8,
) -> DeformationFamily:
    """Deformation family of a harmonic family with zero mean flux.

    Builds ``Z_{s,t} = t X_{st} - 2 s int_0^t X`` on a dense (s, t) grid,
    integrates it in s into translation vectors G, and differences in t for
    V.  Raises when the mean-flux hypothesis fails.
    """
    t_grid = np.linspace(0.0, 1.0, t_res + 1)
    s_grid = np.linspace(0.0, 1.0, s_res + 1)
    coeffs = np.stack([np.asarray(coeffs_of_t(t), dtype=float) for t in t_grid])
    mean_flux = cumulative_simpson(coeffs, x=t_grid, axis=0, initial=0.0)[-1]
    if float(np.abs(mean_flux).max()) > mean_tol:
        raise ValueError(
            f"harmonic family has nonzero mean flux {mean_flux}"
        )
    x_fields = rotate_coeffs_to_field(coeffs.T).T  # (T, d)
    cum_x = cumulative_simpson(x_fields, x=t_grid, axis=0, initial=0.0)

    st = s_grid[:, None] * t_grid[None, :]
    x_at_st = np.stack(
        [rotate_coeffs_to_field(np.asarray(coeffs_of_t(v), dtype=float))
         for v in st.ravel()]
    ).reshape(len(s_grid), len(t_grid), torus.dim)
    z_field = (
        t_grid[None, :, None] * x_at_st
        - 2.0 * s_grid[:, None, None] * cum_x[None, :, :]
    )
    g_shift = cumulative_simpson(z_field, x=s_grid, axis=0, initial=0.0)
    v_field = np.gradient(g_shift, t_grid, axis=1, edge_order=2)

    sup_x_b = float(np.abs(coeffs).sum(axis=1).max())
    sup_v_b = float(np.abs(contract_coeffs_batch(v_field)).sum(axis=-1).max())
    # G_{s,1} must be the harmonic path at parameter s: integral of X over [0, s]
    x_at_s = np.stack(
        [rotate_coeffs_to_field(np.asarray(coeffs_of_t(s), dtype=float))
         for s in s_grid]
    )
    cum_x_s = cumulative_simpson(x_at_s, x=s_grid, axis=0, initial=0.0)
    endpoint_residual = float(np.abs(g_shift[:, -1, :] - cum_x_s).max())
    return DeformationFamily(
        s_grid, t_grid, coeffs, z_field, g_shift, v_field,
        sup_x_b, sup_v_b, endpoint_residual,
    )


def contract_coeffs_batch(v: np.ndarray) -> np.ndarray:
    """Coefficients of ``i(v)omega`` for vectors stacked on the last axis."""
    out = np.empty_like(v)
    out[..., 0::2] = -v[..., 1::2]
    out[..., 1::2] = v[..., 0::2]
    return out


def lem1_bound_residual(family: DeformationFamily) -> float:
    """Margin of the deformation slope bound (nonnegative on pass)."""
    return family.slope_margin()


# ---------------------------------------------------------------------------
# straightening a zero-flux path
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FgeoReport:
    """Audit of the zero-flux straightening construction."""

    harmonic_residual: float
    endpoint_gap: float
    theta_shift: np.ndarray  # (K+1, d) translation vectors of theta^t_1


def fgeo_deformation(
    isotopy: Isotopy, flux_tol: float | None = None
) -> tuple[Isotopy, FgeoReport]:
    """Deform a zero-flux symplectic path into a Hamiltonian one.

    The harmonic part rho of the Hodge split is post-composed with the s=1
    slice of the flows of ``Y_t = - int_0^t X_u du``; on the torus these are
    translations cancelling rho, and what remains is the Hamiltonian
    remainder with the same endpoints.  The report carries the harmonic
    residual of the output generator measured from the displacement data and
    the endpoint gap.
    """
    torus = isotopy.torus
    tol = flow_tolerance(torus.grid_res, 10.0) if flux_tol is None else flux_tol
    fc = flux_class(isotopy, check=False)
    if fc.norm() > tol:
        raise ValueError(f"nonzero flux {fc.pairings}; cannot straighten")
    split = hodge_split_isotopy(isotopy)
    gen = generator_of(isotopy)
    k1 = len(gen.times)
    rho_shift = isotopy.disp.reshape(k1, torus.dim, -1).mean(axis=2)
    theta_shift = -rho_shift  # flow of Y_t at s = 1 cancels the harmonic path

    combined = rho_shift + theta_shift
    out_stack = split.remainder.disp + combined.reshape(
        (k1, torus.dim) + (1,) * torus.dim
    )
    out_stack[0] = 0.0
    out = Isotopy(
        torus, gen.times.copy(), out_stack, kind="hamiltonian",
        gen=split.remainder.gen,
    )
    # harmonic residual from the data: grid mean of i(velocity)omega
    ks = np.unique(np.linspace(0, out.steps, 9).astype(int))
    worst = 0.0
    for k in ks:
        w = out.velocity_samples(k)
        coeffs = contract_field_to_coeffs(w).reshape(torus.dim, -1).mean(axis=1)
        worst = max(worst, float(np.abs(coeffs).sum()))
    endpoint_gap = out.time_one().c0_distance(isotopy.time_one())
    return out, FgeoReport(worst, endpoint_gap, theta_shift)


# ---------------------------------------------------------------------------
# iteration growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthRow:
    power: int
    flux_norm: float
    flux_linearity_residual: float
    length: float
    ratio: float


@dataclass(frozen=True)
class GrowthReport:
    k0: float
    rows: list[GrowthRow]

    @property
    def min_ratio_margin(self) -> float:
        return min(r.ratio - self.k0 for r in self.rows)

    @property
    def all_nonidentity(self) -> bool:
        return all(r.flux_norm > 0 for r in self.rows)


def iteration_growth_check(isotopy: Isotopy, max_power: int = 10) -> GrowthReport:
    """Linear growth of the Hofer-like length along iterates.

    The flux pairing of the maximizing coordinate class (a unit vector for
    the coefficient l1-norm) bounds ``l_B(Psi^l) / l`` from below.  The
    iterate's endpoint flux is measured from the lifted chain of time-one
    map applications and its length from the reparametrized generator
    trace, without materializing the full iterate displacement stacks.
    """
    fc = flux_class(isotopy, check=False)
    if fc.norm() <= 1e-12:
        raise ValueError("iteration growth requires a nonzero flux class")
    torus = isotopy.torus
    k0 = float(np.abs(fc.pairings).max()) / torus.volume_scale
    gen = generator_of(isotopy)
    base = lengths(isotopy)
    psi = isotopy.time_one()
    rows = []
    anchors = torus.points.copy()
    for power in range(1, max_power + 1):
        anchors = psi.apply(anchors)  # lifted chain, power applications
        pairings = (anchors - torus.points).mean(axis=0) * torus.volume_scale
        lin_res = float(np.abs(pairings - power * fc.pairings).max())
        # affine per-bin reparametrization scales the trace by the power
        lb = power * base.l1_length
        rows.append(
            GrowthRow(power, float(np.abs(pairings).max()), lin_res, lb, lb / power)
        )
    return GrowthReport(k0, rows)


# ---------------------------------------------------------------------------
# surrogate energies and norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergySurrogate:
    """Candidate-family minima of the length functionals (upper bounds)."""

    labels: tuple[str, ...]
    e0: float
    e0_inf: float
    e0_inverse: float | None = None
    e0_inf_inverse: float | None = None

    @property
    def norm_hl(self) -> float:
        if self.e0_inverse is None:
            raise ValueError("surrogate was built without inverse energies")
        return 0.5 * (self.e0 + self.e0_inverse)

    @property
    def norm_hl_inf(self) -> float:
        if self.e0_inf_inverse is None:
            raise ValueError("surrogate was built without inverse energies")
        return 0.5 * (self.e0_inf + self.e0_inf_inverse)


def energy_surrogate(
    target: GridMap,
    candidates: Sequence[tuple[str, Isotopy]],
    match_tol: float = 1e-6,
    with_inverse: bool = False,
) -> EnergySurrogate:
    """Family minimum of l_B and l_B_inf over isotopies reaching the target.

    Candidates whose time-one map misses the target beyond tolerance are
    rejected; an empty family is an error.  ``with_inverse`` additionally
    minimizes over the inverse isotopies of the family (needed for the
    symmetrized norms, and much more expensive).
    """
    kept: list[tuple[str, Isotopy]] = []
    for label, iso in candidates:
        gap = iso.time_one().c0_distance(target)
        if gap <= match_tol:
            kept.append((label, iso))
    if not kept:
        raise ValueError("no candidate isotopy reaches the target map")
    reports = [lengths(iso) for _, iso in kept]
    e0_inv = e0_inf_inv = None
    if with_inverse:
        inv_reports = [lengths(inverse(iso)) for _, iso in kept]
        e0_inv = min(r.l1_length for r in inv_reports)
        e0_inf_inv = min(r.linf_length for r in inv_reports)
    return EnergySurrogate(
        labels=tuple(label for label, _ in kept),
        e0=min(r.l1_length for r in reports),
        e0_inf=min(r.linf_length for r in reports),
        e0_inverse=e0_inv,
        e0_inf_inverse=e0_inf_inv,
    )


def energy_invariance_check(
    target: GridMap,
    candidates: Sequence[tuple[str, Isotopy]],
    loops: Sequence[tuple[str, Isotopy]],
    match_tol: float = 1e-6,
    steps: int = 1600,
) -> float:
    """Loop-concatenation invariance of the surrogate energy.

    Concatenating candidates with flux-matching loops (the trivial loop
    included) must not change the family minimum beyond quadrature noise,
    both families being upper bounds of the same infimum.  ``steps`` sets
    the concatenation time resolution; the default resolves the cutoff
    layers to below 1e-9.
    """
    from .paths import concat_left

    plain = energy_surrogate(target, candidates, match_tol)
    concatenated = []
    for c_label, iso in candidates:
        for l_label, loop in loops:
            concatenated.append(
                (f"{c_label}*{l_label}",
                 concat_left(loop, iso, steps=steps, with_generator=True))
            )
    looped = energy_surrogate(target, concatenated, match_tol)
    return abs(plain.e0 - looped.e0)


@dataclass(frozen=True)
class NormComparisonReport:
    """Surrogate margins of the norm comparison inequalities.

    ``lhs`` is ``(|phi|_H + |rho|_H |psi|_H) / (1 + |rho|_H)`` with Hofer
    norms replaced by Hamiltonian-path length surrogates.  All three
    right-hand constants are checked; both sides are family upper bounds, so
    positive margins certify consistency at family resolution.
    """

    lhs_zero_flux: float
    lhs_corrected: float | None
    e0_inf: float
    norm_hl: float
    margin_six: float
    margin_72_5: float | None
    margin_144_5: float

    @property
    def all_pass(self) -> bool:
        margins = [self.margin_six, self.margin_144_5]
        if self.margin_72_5 is not None:
            margins.append(self.margin_72_5)
        return all(m > 0 for m in margins)


def norm_comparison_check(
    target: GridMap,
    hamiltonian_paths: Sequence[tuple[str, Isotopy]],
    eps: float = 1e-3,
    fluxed_path: Isotopy | None = None,
    matching_loop: Isotopy | None = None,
    match_tol: float = 1e-6,
) -> NormComparisonReport:
    """Compare the Hofer norm surrogate with the Hofer-like energy bounds.

    The zero-flux branch splits the best Hamiltonian path; when a path with
    nonzero flux and a flux-matching loop are supplied, the loop-corrected
    branch is checked with its constant 72/5, and the combined 12^2/5 bound
    against the symmetrized Hofer-like norm runs on all candidates.
    """
    from .paths import concat_left

    zero_flux: list[tuple[str, Isotopy]] = []
    for label, iso in hamiltonian_paths:
        if iso.time_one().c0_distance(target) > match_tol:
            continue
        if flux_class(iso, check=False).norm() > 1e-6:
            raise ValueError(f"candidate {label} is not a zero-flux path")
        zero_flux.append((label, iso))
    if not zero_flux:
        raise ValueError("norm comparison requires a zero-flux path to the target")

    reports = [lengths(iso) for _, iso in zero_flux]
    inv_reports = [lengths(inverse(iso)) for _, iso in zero_flux]
    hofer_surrogate = 0.5 * (
        min(r.hofer_l1 for r in reports) + min(r.hofer_l1 for r in inv_reports)
    )
    e0_inf = min(r.linf_length for r in reports)

    def branch_lhs(path: Isotopy) -> float:
        split = hodge_split_isotopy(path)
        rho_norm = 0.0 if split.harmonic_path.time_one().c0_distance() <= match_tol \
            else lengths(split.harmonic_path).hofer_l1
        psi_norm = lengths(split.remainder).hofer_l1
        return (hofer_surrogate + rho_norm * psi_norm) / (1.0 + rho_norm)

    best = min(zip(zero_flux, reports), key=lambda zr: zr[1].linf_length)[0][1]
    lhs_a = branch_lhs(best)
    margin_six = 6.0 * e0_inf + eps - lhs_a

    lhs_b = None
    margin_72_5 = None
    e0_list = [r.l1_length for r in reports]
    e0_inv_list = [r.l1_length for r in inv_reports]
    if fluxed_path is not None and matching_loop is not None:
        gap = float(
            np.abs(
                flux_class(fluxed_path, check=False).pairings
                - flux_class(matching_loop, check=False).pairings
            ).max()
        )
        if gap > 1e-6:
            raise ValueError("loop flux does not match the path flux")
        corrected = concat_left(
            inverse(matching_loop), fluxed_path, with_generator=True,
            steps=max(600, fluxed_path.steps + matching_loop.steps),
        )
        if corrected.time_one().c0_distance(target) > match_tol:
            raise ValueError("loop-corrected path misses the target map")
        corr_report = lengths(corrected)
        lhs_b = branch_lhs(corrected)
        e0_inf_b = min(e0_inf, corr_report.linf_length)
        margin_72_5 = (72.0 / 5.0) * e0_inf_b + eps - lhs_b
        e0_list.append(corr_report.l1_length)
        e0_inv_list.append(lengths(inverse(corrected)).l1_length)

    norm_hl = 0.5 * (min(e0_list) + min(e0_inv_list))
    lhs_worst = max(lhs_a, lhs_b) if lhs_b is not None else lhs_a
    margin_144_5 = (144.0 / 5.0) * norm_hl + eps - lhs_worst
    return NormComparisonReport(
        lhs_zero_flux=lhs_a,
        lhs_corrected=lhs_b,
        e0_inf=e0_inf,
        norm_hl=norm_hl,
        margin_six=margin_six,
        margin_72_5=margin_72_5,
        margin_144_5=margin_144_5,
    )
