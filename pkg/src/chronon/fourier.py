"""Periodic internal motion of the infinite-order Caldirola model.

The free equation of motion with ``k_n = (-1)^n M tau0^(2n) / (2n+1)!`` is
solved by

    v(tau) = p/M + sum_m E_m cos(m w0 tau) + H_m sin(m w0 tau),   w0 = pi/tau0,

because every mode picks up the factor ``sum_n kbar_n m^(2n) = sin(pi m)/(pi m) = 0``.

Two families of closed forms are provided for spin and Hamiltonian:

* :func:`spin_closed` and :func:`hamiltonian_closed` follow the commonly
  quoted compact expressions literally;
* :func:`spin_mode_sum` and :func:`hamiltonian_mode_sum` are the sums that
  the truncated oracles actually converge to. They differ from the compact
  forms by mode-dependent prefactors; see the README.

The oracles evaluate the finite-N machinery of :mod:`chronon.nnm` on the
analytically differentiated series. To keep ``(m w0)^j`` representable for
``j`` up to ``2N+1`` the jet is rescaled by ``s = m_max w0``: with
``v'^(j) = v^(j)/s^j`` and coefficients ``k'_n = k_n s^(2n)`` (a Caldirola
model with chronon ``tau0 s``), the rescaled spin is ``s`` times the true one,
the Hamiltonian is unchanged and the rescaled equation-of-motion residual is
the true one divided by ``s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chronon import nnm, series
from chronon.kinematics import minkowski_dot

DEFAULT_ORACLE_ORDER = 200


@dataclass(frozen=True)
class FourierMotion:
    """Drift momentum plus spatial mode amplitudes ``E_m``, ``H_m`` for ``m = 1..M_max``."""

    p: np.ndarray
    mass: float
    tau0: float
    E: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(4)
        E = np.asarray(self.E, dtype=float).reshape(-1, 4)
        H = np.asarray(self.H, dtype=float).reshape(-1, 4)
        if E.shape != H.shape:
            raise ValueError(f"E and H mode lists differ in shape: {E.shape} vs {H.shape}")
        if np.any(E[:, 0] != 0) or np.any(H[:, 0] != 0):
            raise ValueError("mode amplitudes must be purely spatial (zero time component)")
        if not self.mass > 0 or not self.tau0 > 0:
            raise ValueError("mass and tau0 must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "H", H)

    @property
    def omega0(self) -> float:
        return math.pi / self.tau0

    @property
    def n_modes(self) -> int:
        return self.E.shape[0]

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.n_modes + 1)

    @classmethod
    def from_spatial(cls, mass, tau0, E, H, p=None) -> FourierMotion:
        """Build from 3-vector amplitudes; ``p`` defaults to the rest frame ``(M, 0, 0, 0)``."""
        E = np.asarray(E, dtype=float).reshape(-1, 3)
        H = np.asarray(H, dtype=float).reshape(-1, 3)
        pad = lambda A: np.column_stack((np.zeros(len(A)), A))  # noqa: E731
        p = np.array([mass, 0.0, 0.0, 0.0]) if p is None else p
        return cls(p, mass, tau0, pad(E), pad(H))

    def phase_shifted(self, delta: float) -> FourierMotion:
        """The same motion with its time origin moved by ``delta``."""
        ph = self.modes * self.omega0 * delta
        c, s = np.cos(ph)[:, None], np.sin(ph)[:, None]
        return FourierMotion(self.p, self.mass, self.tau0, c * self.E + s * self.H, c * self.H - s * self.E)


def fourier_derivative(motion: FourierMotion, tau: float, order: int, scale: float = 1.0) -> np.ndarray:
    """``d^order v / dtau^order`` at ``tau``, divided by ``scale**order``."""
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    out = motion.p / motion.mass if order == 0 else np.zeros(4)
    if motion.n_modes == 0:
        return out.copy()
    w = motion.modes * motion.omega0
    ph = w * tau + order * (math.pi / 2)
    amp = (w / scale) ** order
    return out + (amp * np.cos(ph)) @ motion.E + (amp * np.sin(ph)) @ motion.H


def fourier_velocity(motion: FourierMotion, tau: float) -> np.ndarray:
    return fourier_derivative(motion, tau, 0)


def fourier_jet(motion: FourierMotion, tau: float, length: int, scale: float = 1.0) -> np.ndarray:
    """Rows ``v^(0) .. v^(length-1)`` at ``tau`` (row ``j`` divided by ``scale**j``)."""
    return np.array([fourier_derivative(motion, tau, j, scale) for j in range(length)])


def _scale(motion: FourierMotion) -> float:
    return max(motion.n_modes, 1) * motion.omega0


def _scaled_model(motion: FourierMotion, order: int) -> nnm.NnmModel:
    return nnm.NnmModel.caldirola(motion.mass, motion.tau0 * _scale(motion), order)


def _check_modes(motion: FourierMotion) -> None:
    if motion.n_modes > series.CERTIFIED_MAX:
        import warnings

        warnings.warn(
            f"mode numbers up to {motion.n_modes} exceed the certified range m <= {series.CERTIFIED_MAX}",
            series.PrecisionWarning,
            stacklevel=3,
        )


def el_residual_fourier(motion: FourierMotion, tau: float, n_trunc: int = DEFAULT_ORACLE_ORDER) -> np.ndarray:
    """Partial sum ``sum_n M tau0^(2n)/(2n+1)! a^(2n)`` on the Fourier solution.

    Each mode's derivatives are proportional to its own acceleration, so the
    sum factors into ``M sum_m S_m a_m(tau)`` with ``S_m`` the compensated
    partial sum of ``sum_n kbar_n m^(2n)``.
    """
    out = np.zeros(4)
    for m in motion.modes:
        S = series.sinc_series(float(m), n_trunc).value
        w = m * motion.omega0
        a_m = w * (-math.sin(w * tau) * motion.E[m - 1] + math.cos(w * tau) * motion.H[m - 1])
        out += motion.mass * S * a_m
    return out


def eom_residual_oracle(motion: FourierMotion, tau: float, order: int = DEFAULT_ORACLE_ORDER) -> np.ndarray:
    """Truncated Caldirola equation of motion evaluated on the analytic jet."""
    _check_modes(motion)
    s = _scale(motion)
    jet = fourier_jet(motion, tau, 2 * order + 2, s)
    return s * nnm.eom_residual(_scaled_model(motion, order), jet)


def _require_rest_frame(motion: FourierMotion) -> None:
    if np.any(motion.p[1:] != 0):
        raise ValueError("spin formulas need the center-of-mass frame (zero spatial momentum)")


def spin_closed(motion: FourierMotion) -> np.ndarray:
    """``(1/4) sum_m (-1)^m E_m x H_m`` (compact form, taken literally)."""
    _require_rest_frame(motion)
    if motion.n_modes == 0:
        return np.zeros(3)
    sign = (-1.0) ** motion.modes
    return 0.25 * (sign[:, None] * np.cross(motion.E[:, 1:], motion.H[:, 1:])).sum(axis=0)


def spin_mode_sum(motion: FourierMotion) -> np.ndarray:
    """``sum_m (-1)^m M / (2 m w0) E_m x H_m``, the limit of the truncated spin."""
    _require_rest_frame(motion)
    if motion.n_modes == 0:
        return np.zeros(3)
    m = motion.modes
    w = (-1.0) ** m * motion.mass / (2.0 * m * motion.omega0)
    return (w[:, None] * np.cross(motion.E[:, 1:], motion.H[:, 1:])).sum(axis=0)


def spin_truncated_oracle(motion: FourierMotion, n_trunc: int = DEFAULT_ORACLE_ORDER, tau: float = 0.0) -> np.ndarray:
    """Finite-order spin vector of the Caldirola model on the analytic Fourier jet."""
    _require_rest_frame(motion)
    _check_modes(motion)
    if motion.n_modes == 0:
        return np.zeros(3)
    s = _scale(motion)
    jet = fourier_jet(motion, tau, 2 * n_trunc, s)
    return nnm.spin_vector(_scaled_model(motion, n_trunc), jet) / s


def hamiltonian_closed(motion: FourierMotion) -> float:
    """``p^2/2M + M^3 sum_m [1 + (-1)^m](E_m^2 + H_m^2)`` (compact form, taken literally)."""
    M = motion.mass
    drift = minkowski_dot(motion.p, motion.p) / (2.0 * M)
    if motion.n_modes == 0:
        return float(drift)
    weight = 1.0 + (-1.0) ** motion.modes
    sq = minkowski_dot(motion.E, motion.E) + minkowski_dot(motion.H, motion.H)
    return float(drift + M**3 * np.sum(weight * sq))


def hamiltonian_mode_sum(motion: FourierMotion) -> float:
    """``p^2/2M + (M/4) sum_m (-1)^m (E_m^2 + H_m^2)``, the limit of the truncated Hamiltonian."""
    M = motion.mass
    drift = minkowski_dot(motion.p, motion.p) / (2.0 * M)
    if motion.n_modes == 0:
        return float(drift)
    sign = (-1.0) ** motion.modes
    sq = minkowski_dot(motion.E, motion.E) + minkowski_dot(motion.H, motion.H)
    return float(drift + 0.25 * M * np.sum(sign * sq))


def hamiltonian_truncated_oracle(motion: FourierMotion, n_trunc: int = DEFAULT_ORACLE_ORDER, tau: float = 0.0) -> float:
    """Finite-order Hamiltonian of the Caldirola model on the analytic Fourier jet."""
    _check_modes(motion)
    s = _scale(motion)
    jet = fourier_jet(motion, tau, 2 * n_trunc + 1, s)
    return nnm.hamiltonian_value(_scaled_model(motion, n_trunc), jet)


def random_motion(rng: np.random.Generator, max_mode: int = 4, mass: float = 1.0, tau0: float = 1.0,
                  amplitude: float = 1.0) -> FourierMotion:
    """Rest-frame motion with independent uniform amplitudes in ``[-amplitude, amplitude]``."""
    E = rng.uniform(-amplitude, amplitude, size=(max_mode, 3))
    H = rng.uniform(-amplitude, amplitude, size=(max_mode, 3))
    return FourierMotion.from_spatial(mass, tau0, E, H)


# -- identity report --------------------------------------------------------

REPORT_SCHEMA = "chronon.identities/1"


def _tolerance(m: int) -> float:
    return 1e-8 if m <= 5 else 1e-6


def _row(name, m, value, expected, tol, lost=0.0, relative=False):
    err = abs(value - expected)
    scale = max(abs(expected), 1e-300) if relative else 1.0
    return {
        "check": name,
        "m": m,
        "value": value,
        "expected": expected,
        "abs_error": err,
        "tolerance": tol,
        "relative": relative,
        "lost_digits": lost,
        "passed": bool(err <= tol * scale),
    }


def canned_motions(count: int = 5, seed: int = 2024, max_mode: int = 4) -> list:
    rng = np.random.default_rng(seed)
    return [random_motion(rng, max_mode=max_mode) for _ in range(count)]


def identity_report(max_m: int = 8, n_trunc: int = series.DEFAULT_NTRUNC, oracle_order: int = DEFAULT_ORACLE_ORDER,
                    seed: int = 2024) -> dict:
    """Series identities and oracle-vs-closed-form comparisons as a JSON-ready dict."""
    import warnings

    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", series.PrecisionWarning)
        for m in range(1, max_m + 1):
            tol = _tolerance(m)
            sign = (-1.0) ** m
            S = series.sinc_series(float(m), n_trunc)
            A = series.a_coefficient(m, n_trunc)
            B = series.b_coefficient(m, n_trunc)
            rows.append(_row("sinc_zero", m, S.value, 0.0, tol, S.lost_digits))
            rows.append(_row("weighted_sum", m, 2.0 * A.value, sign / 2.0, tol, A.lost_digits))
            rows.append(_row("A_m", m, A.value, sign / 4.0, tol, A.lost_digits))
            rows.append(_row("B_m", m, B.value, 1.0 + sign, tol, B.lost_digits))
            rows.append(_row("B_decomposition", m, B.value, 1.0 + 4.0 * A.value + S.value, 1e-10, B.lost_digits))

    motions = canned_motions(seed=seed, max_mode=min(4, max_m))
    for i, mo in enumerate(motions):
        spin = spin_truncated_oracle(mo, oracle_order)
        h = hamiltonian_truncated_oracle(mo, oracle_order)
        ref_spin = spin_closed(mo)
        mode_spin = spin_mode_sum(mo)
        # spin rows report the relative vector difference against zero
        rel = float(np.linalg.norm(spin - ref_spin) / np.linalg.norm(ref_spin))
        rows.append(_row("spin_oracle_vs_closed", i, rel, 0.0, 1e-6))
        rel = float(np.linalg.norm(spin - mode_spin) / np.linalg.norm(mode_spin))
        rows.append(_row("spin_oracle_vs_mode_sum", i, rel, 0.0, 1e-6))
        rows.append(_row("hamiltonian_oracle_vs_closed", i, h, hamiltonian_closed(mo), 1e-6, relative=True))
        rows.append(_row("hamiltonian_oracle_vs_mode_sum", i, h, hamiltonian_mode_sum(mo), 1e-6, relative=True))
    return {
        "schema_version": REPORT_SCHEMA,
        "max_m": max_m,
        "n_trunc": n_trunc,
        "oracle_order": oracle_order,
        "rows": rows,
        "passed": all(r["passed"] for r in rows),
        "failed": [r for r in rows if not r["passed"]],
    }
