"""Thermodynamic ensemble realizations of the two-measurement model.

Each generator builds a concrete (initial state, unitary, first family,
second family) quadruple plus the matching reference distribution q on
the second outcomes, and wraps the resulting statistics into a report:

* ``local_canonical_model``  -- product of canonical subsystem states,
  measured subsystem energies at both times; the expectation identity
  becomes the multi-bath work relation
  < exp(-sum_mu beta_mu (w_mu - dF_mu)) > = 1.
* ``microcanonical_model``   -- Gaussian energy-window state; the identity
  links the window weights at both times through dF = -d ln(norm).
* ``grand_canonical_model``  -- fermionic Fock space over M modes with a
  number operator in both families;
  < exp(-beta (dE - mu dN - dOmega)) > = 1.
* ``periodic_thermo_model``  -- system with nondegenerate quasi-energies
  (defined modulo the driving frequency, hence an effective temperature
  parameter theta of unconstrained sign) coupled to a canonical bath;
  < exp(-theta e - beta q) > = 1 for quasi-energy and bath-heat changes.

All weight handling is done in the log domain with explicit shifts, so
partition-function-like constants are reported as logs and never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .model import (
    JointModel,
    ValidationError,
    WorkDistribution,
    entropy_gap,
    group_levels,
    j_equation_lhs,
    marginals,
)
from .quantum import (
    SpectralFamily,
    build_joint_model,
    ensemble_state,
    joint_diagonalize,
    operator_from_json_dict,
    operator_to_json_dict,
    require_hermitian,
    require_unitary,
)

# Residual tolerance when cross-checking physical exponents against table ratios.
EXPONENT_CONSISTENCY_TOL = 1e-10


# ---------------------------------------------------------------------------
# fermionic Fock space over M modes (dimension 2^M, Jordan-Wigner encoding)

def fock_annihilators(n_modes: int) -> list[np.ndarray]:
    """Annihilation operators c_a on the 2^n_modes fermionic Fock space.

    Jordan-Wigner strings enforce the canonical anticommutation relations:
    c_a = Z x ... x Z x s- x 1 x ... x 1  with the lowering matrix in slot a.
    """
    if not 1 <= n_modes <= 12:
        raise ValidationError(f"n_modes = {n_modes} outside the supported range 1..12")
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    zed = np.diag([1.0, -1.0])
    one = np.eye(2)
    ops = []
    for a in range(n_modes):
        factors = [zed] * a + [lower] + [one] * (n_modes - a - 1)
        m = factors[0]
        for f in factors[1:]:
            m = np.kron(m, f)
        ops.append(m.astype(complex))
    return ops


def lift_one_particle(h: np.ndarray) -> np.ndarray:
    """Second-quantized Hamiltonian  H = sum_ab h_ab c_a* c_b  on Fock space."""
    h = require_hermitian(h, "one-particle h")
    cs = fock_annihilators(h.shape[0])
    dim = cs[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for a in range(h.shape[0]):
        for b in range(h.shape[0]):
            if h[a, b] != 0:
                out += h[a, b] * (cs[a].conj().T @ cs[b])
    return out


def number_operator(n_modes: int) -> np.ndarray:
    """Total particle number  N = sum_a c_a* c_a  (diagonal in occupation basis)."""
    cs = fock_annihilators(n_modes)
    return sum(c.conj().T @ c for c in cs)


def tensor_lift(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Embed each local operator into the tensor product of all factors."""
    dims = [np.asarray(o).shape[0] for o in ops]
    lifted = []
    for k, o in enumerate(ops):
        m = np.eye(1, dtype=complex)
        for j, d in enumerate(dims):
            m = np.kron(m, np.asarray(o, dtype=complex)) if j == k else np.kron(m, np.eye(d))
        lifted.append(m)
    return lifted


# ---------------------------------------------------------------------------
# configs

@dataclass(frozen=True)
class LocalCanonicalConfig:
    """Product of canonical subsystem states at inverse temperatures betas.

    ``h_t0[mu]`` and ``h_t1[mu]`` are the subsystem Hamiltonians before and
    after the protocol; the measured families are their tensor lifts.
    """

    h_t0: tuple
    h_t1: tuple
    betas: tuple

    def __post_init__(self):
        if not (len(self.h_t0) == len(self.h_t1) == len(self.betas) >= 1):
            raise ValidationError("h_t0, h_t1 and betas must have equal positive length")
        for mu, b in enumerate(self.betas):
            if not (np.isfinite(b) and b > 0):
                raise ValidationError(f"betas[{mu}] = {b} must be positive and finite")

    def to_json_dict(self) -> dict:
        return {
            "kind": "local_canonical",
            "h_t0": [operator_to_json_dict(np.asarray(h, dtype=complex)) for h in self.h_t0],
            "h_t1": [operator_to_json_dict(np.asarray(h, dtype=complex)) for h in self.h_t1],
            "betas": [float(b) for b in self.betas],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LocalCanonicalConfig":
        return cls(
            h_t0=tuple(operator_from_json_dict(d) for d in data["h_t0"]),
            h_t1=tuple(operator_from_json_dict(d) for d in data["h_t1"]),
            betas=tuple(float(b) for b in data["betas"]),
        )


@dataclass(frozen=True)
class MicrocanonicalConfig:
    """Gaussian energy-window state centered at ``energy`` with scale ``width``."""

    h_t0: np.ndarray
    h_t1: np.ndarray
    energy: float
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.width) and self.width > 0):
            raise ValidationError(f"width = {self.width} must be positive")
        if not np.isfinite(self.energy):
            raise ValidationError("energy must be finite")

    def to_json_dict(self) -> dict:
        return {
            "kind": "microcanonical",
            "h_t0": operator_to_json_dict(np.asarray(self.h_t0, dtype=complex)),
            "h_t1": operator_to_json_dict(np.asarray(self.h_t1, dtype=complex)),
            "energy": float(self.energy),
            "width": float(self.width),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MicrocanonicalConfig":
        return cls(
            h_t0=operator_from_json_dict(data["h_t0"]),
            h_t1=operator_from_json_dict(data["h_t1"]),
            energy=float(data["energy"]),
            width=float(data["width"]),
        )


@dataclass(frozen=True)
class GrandCanonicalConfig:
    """Fermionic grand canonical ensemble from a one-particle Hamiltonian.

    ``h_t0`` and ``h_t1`` are M x M one-particle matrices; the Fock-space
    Hamiltonians are their second-quantized lifts and both measurement
    families include the total particle number.
    """

    h_t0: np.ndarray
    h_t1: np.ndarray
    beta: float
    mu: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValidationError(f"beta = {self.beta} must be positive")
        if not np.isfinite(self.mu):
            raise ValidationError("mu must be finite")

    @property
    def n_modes(self) -> int:
        return np.asarray(self.h_t0).shape[0]

    def to_json_dict(self) -> dict:
        return {
            "kind": "grand_canonical",
            "h_t0": operator_to_json_dict(np.asarray(self.h_t0, dtype=complex)),
            "h_t1": operator_to_json_dict(np.asarray(self.h_t1, dtype=complex)),
            "beta": float(self.beta),
            "mu": float(self.mu),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "GrandCanonicalConfig":
        return cls(
            h_t0=operator_from_json_dict(data["h_t0"]),
            h_t1=operator_from_json_dict(data["h_t1"]),
            beta=float(data["beta"]),
            mu=float(data["mu"]),
        )


@dataclass(frozen=True)
class PeriodicThermoConfig:
    """Driven system with nondegenerate quasi-energies coupled to a bath.

    Quasi-energies are supplied directly (they are only defined modulo the
    driving frequency, so their canonical weight carries an effective
    inverse temperature ``theta`` whose sign is unconstrained).  The bath
    is an ordinary canonical system at inverse temperature ``beta``.
    Both measurement families coincide: the spectra are time-independent.
    """

    quasi_energies: np.ndarray
    bath_hamiltonian: np.ndarray
    theta: float
    beta: float

    def __post_init__(self):
        eps = np.asarray(self.quasi_energies, dtype=float)
        if eps.ndim != 1 or eps.size < 2:
            raise ValidationError("quasi_energies must be a vector with at least two entries")
        gaps = np.diff(np.sort(eps))
        if np.any(gaps <= 1e-9):
            raise ValidationError("quasi-energies must be pairwise distinct (rank-one projections)")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValidationError(f"beta = {self.beta} must be positive")
        if not np.isfinite(self.theta):
            raise ValidationError("theta must be finite")

    def to_json_dict(self) -> dict:
        return {
            "kind": "periodic_thermo",
            "quasi_energies": [float(x) for x in np.asarray(self.quasi_energies, dtype=float)],
            "bath_hamiltonian": operator_to_json_dict(np.asarray(self.bath_hamiltonian, dtype=complex)),
            "theta": float(self.theta),
            "beta": float(self.beta),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PeriodicThermoConfig":
        return cls(
            quasi_energies=np.asarray(data["quasi_energies"], dtype=float),
            bath_hamiltonian=operator_from_json_dict(data["bath_hamiltonian"]),
            theta=float(data["theta"]),
            beta=float(data["beta"]),
        )


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class SecondLawReport:
    """Both second-law-like statements attached to one model.

    ``jensen_lhs`` is the averaged exponent  < -ln(d q / (D p-hat-free)) >
    of the expectation identity (nonnegative by Jensen); ``entropy_gap``
    is the cell-weighted entropy production (nonnegative for modified
    doubly stochastic conditionals).  The two are logically independent
    statements and are reported separately.
    """

    jarzynski_lhs: float
    jensen_lhs: float
    entropy_gap: float


def second_law_report(model: JointModel, q) -> SecondLawReport:
    """Evaluate the expectation identity, its Jensen bound, and the entropy gap."""
    q = np.asarray(q, dtype=float)
    p, _ = marginals(model)
    mask = model.p_table > 0.0
    y = (model.d[:, None] / p[:, None]) * (q[None, :] / model.D[None, :])
    with np.errstate(divide="ignore"):
        logs = np.where(mask, np.log(np.where(y > 0, y, 1.0)), 0.0)
        if np.any(mask & (y <= 0)):
            jensen = math.inf
        else:
            jensen = float(-np.sum(model.p_table * logs))
    return SecondLawReport(
        jarzynski_lhs=j_equation_lhs(model, q),
        jensen_lhs=jensen,
        entropy_gap=entropy_gap(model),
    )


@dataclass(frozen=True)
class EnsembleReport:
    """Statistics of one generated ensemble model.

    ``exponent_histogram`` groups the physical exponent X(i, j) (the
    dimensionless argument of the fluctuation identity, e.g. the scaled
    work minus free-energy change); ``histogram_identity`` recomputes
    < exp(-X) > from the grouped levels and must agree with
    ``jarzynski_lhs``.  ``quantities`` carries the family-specific
    labeled numbers (mean works, free-energy-like differences, ...).
    """

    family_kind: str
    model: JointModel
    q: np.ndarray
    jarzynski_lhs: float
    jensen_lhs: float
    entropy_gap: float
    exponent_histogram: WorkDistribution
    work_histogram: WorkDistribution
    histogram_identity: float
    quantities: dict
    # measurement data (not serialized): needed by downstream POVM /
    # conditional checks without rebuilding the model
    first_family: SpectralFamily | None = None
    second_family: SpectralFamily | None = None
    u: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "family_kind": self.family_kind,
            "jarzynski_lhs": float(self.jarzynski_lhs),
            "jensen_lhs": float(self.jensen_lhs),
            "entropy_gap": float(self.entropy_gap),
            "histogram_identity": float(self.histogram_identity),
            "work_histogram": [
                {"w": float(w), "prob": float(p)}
                for w, p in zip(self.work_histogram.values, self.work_histogram.probs)
            ],
            "exponent_histogram": [
                {"x": float(x), "prob": float(p)}
                for x, p in zip(self.exponent_histogram.values, self.exponent_histogram.probs)
            ],
            "quantities": {k: float(v) for k, v in self.quantities.items()},
            "model": self.model.to_json_dict(),
            "q": [float(x) for x in self.q],
        }


def _assemble_report(
    kind: str,
    first: SpectralFamily,
    second: SpectralFamily,
    log_weight0: Callable[[np.ndarray], float],
    log_weight1: Callable[[np.ndarray], float],
    u: np.ndarray,
    work_value: Callable[[np.ndarray, np.ndarray], float],
    exponent_offset: float,
    quantities: dict,
    grouping_tol: float = 1e-9,
) -> EnsembleReport:
    """Shared glue: state, q, table, exponent bookkeeping, consistency checks.

    ``log_weight0``/``log_weight1`` map an eigenvalue tuple to the raw log
    weight at the two times; the exponent of the fluctuation identity is
    X(i, j) = log_weight0(E_i) - log_weight1(F_j) + exponent_offset with
    offset = log_norm(t1) - log_norm(t0), the free-energy-like change of
    the log normalization constants.  ``work_value`` maps tuple pairs to
    the scalar recorded in the plain work histogram.
    """
    lw0 = np.array([log_weight0(t) for t in first.eigen_tuples])
    lw1 = np.array([log_weight1(t) for t in second.eigen_tuples])
    m0, m1 = float(lw0.max()), float(lw1.max())
    state = ensemble_state(first, _shifted_exp(log_weight0, m0))
    model, _ = build_joint_model(state.rho, u, first, second,
                                 probabilities=state.probabilities)
    qstate = ensemble_state(second, _shifted_exp(log_weight1, m1))
    q = qstate.probabilities
    # log normalization constants with the shifts restored
    log_norm0 = m0 + math.log(state.norm_constant)
    log_norm1 = m1 + math.log(qstate.norm_constant)
    if abs(exponent_offset - (log_norm1 - log_norm0)) > 1e-9:
        raise ValidationError(
            f"normalization bookkeeping mismatch: offset {exponent_offset} vs {log_norm1 - log_norm0}"
        )

    p, _ = marginals(model)
    nI, nJ = model.shape
    x = (lw0[:, None] - lw1[None, :]) + (log_norm1 - log_norm0)
    w = np.empty((nI, nJ))
    for i in range(nI):
        for j in range(nJ):
            w[i, j] = work_value(first.eigen_tuples[i], second.eigen_tuples[j])
    # cross-check: exp(-X) must equal the table ratio d q / (D p);
    # the ratio spans many orders of magnitude, so compare relatively
    y = (model.d[:, None] / p[:, None]) * (q[None, :] / model.D[None, :])
    dev = float((np.abs(np.exp(-x) - y) / np.maximum(y, 1.0)).max())
    if dev > EXPONENT_CONSISTENCY_TOL:
        raise ValidationError(f"physical exponent inconsistent with table ratio (deviation {dev:.3e})")

    flat_p = model.p_table.ravel()
    exp_hist = group_levels(x.ravel(), flat_p, grouping_tol)
    work_hist = group_levels(w.ravel(), flat_p, grouping_tol)
    hist_identity = float(np.sum(exp_hist.probs * np.exp(-exp_hist.values)))
    law = second_law_report(model, q)
    quantities = dict(quantities)
    quantities.setdefault("mean_exponent", float(np.sum(model.p_table * x)))
    return EnsembleReport(
        family_kind=kind,
        model=model,
        q=q,
        jarzynski_lhs=law.jarzynski_lhs,
        jensen_lhs=law.jensen_lhs,
        entropy_gap=law.entropy_gap,
        exponent_histogram=exp_hist,
        work_histogram=work_hist,
        histogram_identity=hist_identity,
        quantities=quantities,
        first_family=first,
        second_family=second,
        u=u,
    )


def _shifted_exp(log_weight: Callable[[np.ndarray], float], shift: float):
    def weight(*tuple_components):
        return math.exp(log_weight(np.asarray(tuple_components, dtype=float)) - shift)
    return weight


def _log_partition(h: np.ndarray, beta: float) -> float:
    """ln Tr exp(-beta H) for a Hermitian matrix (log-domain, shift-safe)."""
    w = np.linalg.eigvalsh(require_hermitian(h))
    return float(logsumexp(-beta * w))


def local_canonical_model(cfg: LocalCanonicalConfig, u: np.ndarray) -> EnsembleReport:
    """Work relation for a product of canonical subsystems.

    Builds the tensor lifts of the subsystem Hamiltonians at both times,
    the product canonical state, and the reference q from the later
    spectra.  Reports per-subsystem mean work <w_mu>, free-energy changes
    dF_mu = F_mu(t1) - F_mu(t0), and the Jensen combination
    sum_mu beta_mu (<w_mu> - dF_mu) >= 0.
    """
    betas = np.asarray(cfg.betas, dtype=float)
    lift0 = tensor_lift([np.asarray(h, dtype=complex) for h in cfg.h_t0])
    lift1 = tensor_lift([np.asarray(h, dtype=complex) for h in cfg.h_t1])
    first = joint_diagonalize(lift0)
    second = joint_diagonalize(lift1)
    log_z0 = [_log_partition(np.asarray(h, dtype=complex), b) for h, b in zip(cfg.h_t0, betas)]
    log_z1 = [_log_partition(np.asarray(h, dtype=complex), b) for h, b in zip(cfg.h_t1, betas)]

    def lw(tup, _betas=betas):
        return float(-np.dot(_betas, tup))

    # -sum_mu beta_mu dF_mu = ln Z(t1) - ln Z(t0)
    offset = float(sum(log_z1) - sum(log_z0))
    report = _assemble_report(
        kind="local_canonical",
        first=first,
        second=second,
        log_weight0=lw,
        log_weight1=lw,
        u=u,
        work_value=lambda ei, fj: float(np.sum(fj - ei)),
        exponent_offset=offset,
        quantities={},
    )
    # labeled physics: mean work and free-energy change per subsystem
    p_table = report.model.p_table
    quantities = dict(report.quantities)
    jensen_sum = 0.0
    for mu in range(betas.size):
        wmu = (second.eigen_tuples[None, :, mu] - first.eigen_tuples[:, None, mu])
        mean_w = float(np.sum(p_table * wmu))
        d_f = float((-log_z1[mu] / betas[mu]) - (-log_z0[mu] / betas[mu]))
        quantities[f"mean_work_{mu}"] = mean_w
        quantities[f"delta_free_energy_{mu}"] = d_f
        quantities[f"beta_{mu}"] = float(betas[mu])
        jensen_sum += betas[mu] * (mean_w - d_f)
    quantities["jensen_combination"] = jensen_sum
    if abs(jensen_sum - report.jensen_lhs) > 1e-9:
        raise ValidationError(
            f"labeled Jensen combination {jensen_sum} disagrees with generic value {report.jensen_lhs}"
        )
    return EnsembleReport(**{**report.__dict__, "quantities": quantities})


def microcanonical_model(cfg: MicrocanonicalConfig, u: np.ndarray) -> EnsembleReport:
    """Fluctuation identity for Gaussian energy-window (microcanonical-like) states.

    The window weight is exp(-((energy - E)/width)^2); its log total
    -f(t) = ln sum_i exp(...) d(i) plays the free-energy role and the
    identity reads  < exp(-X) > = 1  with
    X = ((energy - E_j(t1))/width)^2 - ((energy - E_i(t0))/width)^2 - df.
    """
    first = joint_diagonalize([np.asarray(cfg.h_t0, dtype=complex)])
    second = joint_diagonalize([np.asarray(cfg.h_t1, dtype=complex)])

    def lw(tup, e=cfg.energy, w=cfg.width):
        return float(-(((e - tup[0]) / w) ** 2))

    log_w0 = float(logsumexp([lw(t) for t in first.eigen_tuples], b=first.degeneracies))
    log_w1 = float(logsumexp([lw(t) for t in second.eigen_tuples], b=second.degeneracies))
    report = _assemble_report(
        kind="microcanonical",
        first=first,
        second=second,
        log_weight0=lw,
        log_weight1=lw,
        u=u,
        work_value=lambda ei, fj: float(fj[0] - ei[0]),
        exponent_offset=log_w1 - log_w0,
        quantities={
            "energy": float(cfg.energy),
            "width": float(cfg.width),
            "log_window_norm_t0": log_w0,
            "log_window_norm_t1": log_w1,
            # f(t) = -ln norm(t); df enters the exponent with a minus sign
            "delta_f": float(-log_w1 + log_w0),
        },
    )
    return report


def grand_canonical_model(cfg: GrandCanonicalConfig, u: np.ndarray) -> EnsembleReport:
    """Fermionic grand canonical identity  < exp(-beta (dE - mu dN - dOmega)) > = 1.

    Both families measure (H(t), N) on the 2^M Fock space; the grand
    potential Omega(t) = -ln Tr exp(beta (mu N - H(t))) / beta is reported
    at both times along with <dE>, <dN> and the Jensen combination.
    """
    h0 = lift_one_particle(np.asarray(cfg.h_t0, dtype=complex))
    h1 = lift_one_particle(np.asarray(cfg.h_t1, dtype=complex))
    n_op = number_operator(cfg.n_modes)
    first = joint_diagonalize([h0, n_op])
    second = joint_diagonalize([h1, n_op])

    def lw(tup, b=cfg.beta, mu=cfg.mu):
        return float(b * (mu * tup[1] - tup[0]))

    log_xi0 = float(logsumexp([lw(t) for t in first.eigen_tuples], b=first.degeneracies))
    log_xi1 = float(logsumexp([lw(t) for t in second.eigen_tuples], b=second.degeneracies))
    omega0, omega1 = -log_xi0 / cfg.beta, -log_xi1 / cfg.beta
    report = _assemble_report(
        kind="grand_canonical",
        first=first,
        second=second,
        log_weight0=lw,
        log_weight1=lw,
        u=u,
        work_value=lambda ei, fj: float(fj[0] - ei[0]),
        exponent_offset=log_xi1 - log_xi0,
        quantities={
            "beta": float(cfg.beta),
            "mu": float(cfg.mu),
            "omega_t0": omega0,
            "omega_t1": omega1,
            "delta_omega": omega1 - omega0,
        },
    )
    p_table = report.model.p_table
    de = (second.eigen_tuples[None, :, 0] - first.eigen_tuples[:, None, 0])
    dn = (second.eigen_tuples[None, :, 1] - first.eigen_tuples[:, None, 1])
    quantities = dict(report.quantities)
    quantities["mean_delta_energy"] = float(np.sum(p_table * de))
    quantities["mean_delta_number"] = float(np.sum(p_table * dn))
    quantities["jensen_combination"] = float(
        cfg.beta * (quantities["mean_delta_energy"] - cfg.mu * quantities["mean_delta_number"]
                    - quantities["delta_omega"])
    )
    if abs(quantities["jensen_combination"] - report.jensen_lhs) > 1e-9:
        raise ValidationError("labeled grand-canonical Jensen combination disagrees with generic value")
    return EnsembleReport(**{**report.__dict__, "quantities": quantities})


def periodic_thermo_model(cfg: PeriodicThermoConfig, u: np.ndarray) -> EnsembleReport:
    """Quasi-energy/bath-heat identity  < exp(-theta e - beta q) > = 1.

    The system part has rank-one quasi-energy projections (validated by
    the config); the bath is canonical at beta.  Both families measure
    the same pair (quasi-energy, bath energy), so the normalization
    offset vanishes and the exponent is exactly theta*e + beta*q.
    """
    eps = np.asarray(cfg.quasi_energies, dtype=float)
    h_sys = np.diag(eps).astype(complex)
    h_bath = np.asarray(cfg.bath_hamiltonian, dtype=complex)
    lifted = tensor_lift([h_sys, h_bath])
    first = joint_diagonalize(lifted)
    second = first

    def lw(tup, th=cfg.theta, b=cfg.beta):
        return float(-th * tup[0] - b * tup[1])

    report = _assemble_report(
        kind="periodic_thermo",
        first=first,
        second=second,
        log_weight0=lw,
        log_weight1=lw,
        u=u,
        work_value=lambda ei, fj: float(fj[0] - ei[0]),
        exponent_offset=0.0,
        quantities={"theta": float(cfg.theta), "beta": float(cfg.beta)},
    )
    p_table = report.model.p_table
    e_change = (first.eigen_tuples[None, :, 0] - first.eigen_tuples[:, None, 0])
    q_change = (first.eigen_tuples[None, :, 1] - first.eigen_tuples[:, None, 1])
    quantities = dict(report.quantities)
    quantities["mean_quasi_energy_change"] = float(np.sum(p_table * e_change))
    quantities["mean_bath_heat"] = float(np.sum(p_table * q_change))
    quantities["jensen_combination"] = float(
        cfg.theta * quantities["mean_quasi_energy_change"] + cfg.beta * quantities["mean_bath_heat"]
    )
    if abs(quantities["jensen_combination"] - report.jensen_lhs) > 1e-9:
        raise ValidationError("labeled periodic-thermo Jensen combination disagrees with generic value")
    return EnsembleReport(**{**report.__dict__, "quantities": quantities})


CONFIG_KINDS = {
    "local_canonical": LocalCanonicalConfig,
    "microcanonical": MicrocanonicalConfig,
    "grand_canonical": GrandCanonicalConfig,
    "periodic_thermo": PeriodicThermoConfig,
}

GENERATORS = {
    "local_canonical": local_canonical_model,
    "microcanonical": microcanonical_model,
    "grand_canonical": grand_canonical_model,
    "periodic_thermo": periodic_thermo_model,
}


def config_from_json_dict(data: dict):
    kind = data.get("kind")
    if kind not in CONFIG_KINDS:
        raise ValidationError(f"unknown ensemble kind {kind!r}; expected one of {sorted(CONFIG_KINDS)}")
    return CONFIG_KINDS[kind].from_json_dict(data)


def generate(config, u: np.ndarray) -> EnsembleReport:
    """Dispatch a config object to its generator."""
    for kind, cls in CONFIG_KINDS.items():
        if isinstance(config, cls):
            return GENERATORS[kind](config, u)
    raise ValidationError(f"unsupported config type {type(config).__name__}")
