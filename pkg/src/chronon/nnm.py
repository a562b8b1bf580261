"""Order-N non-Newtonian mechanics of a free particle.

The Lagrangian is ``L = sum_{n=0..N} k_n (v^(n) . v^(n)) / 2`` with ``k_0 = M``,
where ``v^(n)`` is the n-th proper-time derivative of the 4-velocity.

A *jet* is an array of shape ``(K+1, 4)`` holding ``v^(0) .. v^(K)`` at one
instant. Every function states the jet length it needs and raises
:class:`JetLengthError` on shorter input; jets are never zero-padded.

Canonical coordinates follow the Ostrogradsky construction:
``x_[0] = x`` and ``x_[l] = v^(l-1)`` for ``l = 1..N``, with momenta
``p_[l] = sum_{n=l..N} (-1)^(n-l) k_n v^(2n-l)``. A phase point therefore
holds ``N+1`` coordinate/momentum pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from chronon.kinematics import METRIC, minkowski_dot

_EPS_CBRT = np.finfo(float).eps ** (1.0 / 3.0)


class JetLengthError(ValueError):
    """The derivative jet is too short for the requested quantity."""


class BracketEvaluationError(ArithmeticError):
    """A phase-space function returned a non-finite value while differencing."""


@dataclass(frozen=True)
class NnmModel:
    """Mass ``M`` and the higher-derivative couplings ``k_1 .. k_N``."""

    mass: float
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(k) for k in self.coefficients))
        ks = self.k
        for n in range(1, len(ks)):
            if ks[n] != 0 and ks[n - 1] != 0 and np.sign(ks[n]) == np.sign(ks[n - 1]):
                warnings.warn(
                    f"coefficients k_{n - 1} and k_{n} do not alternate in sign; "
                    "oscillatory solutions are not guaranteed",
                    stacklevel=3,
                )
                break

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def k(self) -> np.ndarray:
        """All couplings ``k_0 .. k_N`` with ``k_0 = M``."""
        return np.array((self.mass, *self.coefficients))

    @classmethod
    def caldirola(cls, mass: float, tau0: float, order: int) -> NnmModel:
        """Truncation at ``order`` of ``k_n = (-1)^n M tau0^(2n) / (2n+1)!``.

        Built by the ratio recurrence, so high orders underflow gracefully
        instead of overflowing a factorial.
        """
        ks = []
        term = float(mass)
        for n in range(order):
            term *= -(tau0 * tau0) / ((2 * n + 2) * (2 * n + 3))
            ks.append(term)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return cls(float(mass), tuple(ks))


@dataclass(frozen=True)
class PhasePoint:
    """Canonical pairs ``(x_[l], p_[l])`` for ``l = 0..N``, each a 4-vector."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        p = np.array(self.p, dtype=float)
        if x.ndim != 2 or x.shape[1] != 4 or x.shape != p.shape:
            raise ValueError(f"phase point needs matching (N+1, 4) arrays, got {x.shape} and {p.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def order(self) -> int:
        return self.x.shape[0] - 1

    def flat(self) -> np.ndarray:
        return np.concatenate((self.x.ravel(), self.p.ravel()))

    @classmethod
    def from_flat(cls, y, order: int) -> PhasePoint:
        y = np.asarray(y, dtype=float)
        n = 4 * (order + 1)
        return cls(y[:n].reshape(order + 1, 4), y[n:].reshape(order + 1, 4))


def as_jet(jet, need: int | None = None, what: str = "this quantity") -> np.ndarray:
    jet = np.asarray(jet, dtype=float)
    if jet.ndim != 2 or jet.shape[1] != 4:
        raise ValueError(f"jet must have shape (K+1, 4), got {jet.shape}")
    if need is not None and jet.shape[0] < need:
        raise JetLengthError(f"{what} needs {need} jet entries (v^(0)..v^({need - 1})), got {jet.shape[0]}")
    return jet


def lagrangian_value(model: NnmModel, jet) -> float:
    N = model.order
    jet = as_jet(jet, N + 1, "the Lagrangian")
    return float(0.5 * np.sum(model.k * minkowski_dot(jet[: N + 1], jet[: N + 1])))


def eom_residual(model: NnmModel, jet) -> np.ndarray:
    """``M a + sum_n (-1)^n k_n a^(2n)``; vanishes on solutions. Needs ``2N+2`` entries."""
    N = model.order
    jet = as_jet(jet, 2 * N + 2, "the equation of motion")
    signs = (-1.0) ** np.arange(N + 1)
    return (signs * model.k) @ jet[1 : 2 * N + 2 : 2]


def canonical_momentum(model: NnmModel, jet, l: int) -> np.ndarray:
    N = model.order
    if not 0 <= l <= N:
        raise ValueError(f"momentum order l must lie in 0..{N}, got {l}")
    jet = as_jet(jet, 2 * N - l + 1, f"p_[{l}]")
    n = np.arange(l, N + 1)
    return ((-1.0) ** (n - l) * model.k[l:]) @ jet[2 * n - l]


def momenta(model: NnmModel, jet) -> np.ndarray:
    """All momenta ``p_[0] .. p_[N]`` as an ``(N+1, 4)`` array."""
    N = model.order
    jet = as_jet(jet, 2 * N + 1, "the canonical momenta")
    return np.array([canonical_momentum(model, jet, l) for l in range(N + 1)])


@lru_cache(maxsize=64)
def _pair_weights(ks: tuple[float, ...], odd: bool) -> np.ndarray:
    # W[i, j] collects the coefficient of the pair (v^(i), v^(j)), i < j, in
    #   odd:  sum_n k_n sum_{l<n} (-1)^(n-l-1) v^(l) x v^(2n-l-1)   (spin)
    #   even: sum_n k_n sum_{l<n} (-1)^(n-l)   v^(l) . v^(2n-l)     (Hamiltonian)
    N = len(ks) - 1
    size = 2 * N + 1
    W = np.zeros((size, size))
    k = np.array(ks)
    for n in range(1, N + 1):
        l = np.arange(n)
        if odd:
            W[l, 2 * n - l - 1] = k[n] * (-1.0) ** (n - l - 1)
        else:
            W[l, 2 * n - l] = k[n] * (-1.0) ** (n - l)
    W.setflags(write=False)
    return W


def spin_tensor(model: NnmModel, jet) -> np.ndarray:
    """Antisymmetric ``S_{mu nu}`` (lower indices). Needs ``2N`` entries."""
    N = model.order
    if N == 0:
        return np.zeros((4, 4))
    jet = as_jet(jet, 2 * N, "the spin tensor")[: 2 * N]
    W = _pair_weights(tuple(model.k), True)[: 2 * N, : 2 * N]
    low = jet @ METRIC
    A = low.T @ W @ low
    return A - A.T


def spin_vector(model: NnmModel, jet) -> np.ndarray:
    """Spatial spin ``sum_n k_n sum_{l<n} (-1)^(n-l-1) v^(l) x v^(2n-l-1)``."""
    N = model.order
    if N == 0:
        return np.zeros(3)
    jet = as_jet(jet, 2 * N, "the spin vector")[: 2 * N, 1:]
    W = _pair_weights(tuple(model.k), True)[: 2 * N, : 2 * N]
    return np.cross(jet, W @ jet).sum(axis=0)


def build_phase_point(model: NnmModel, jet, x=None) -> PhasePoint:
    """Canonical pairs from a jet; ``x`` supplies ``x_[0]`` (origin if omitted)."""
    N = model.order
    jet = as_jet(jet, 2 * N + 1, "the phase point")
    X = np.zeros((N + 1, 4))
    if x is not None:
        X[0] = x
    X[1:] = jet[:N]
    return PhasePoint(X, momenta(model, jet))


def spin_canonical(point: PhasePoint) -> np.ndarray:
    if point.order < 1:
        raise ValueError("canonical spin needs at least one higher-order pair (N >= 1)")
    return np.cross(point.x[1:, 1:], point.p[1:, 1:]).sum(axis=0)


def hamiltonian_value(model: NnmModel, jet) -> float:
    """Conserved Hamiltonian from a jet. Needs ``2N+1`` entries."""
    N = model.order
    jet = as_jet(jet, 2 * N + 1, "the Hamiltonian")[: 2 * N + 1]
    squares = 0.5 * np.sum(model.k * minkowski_dot(jet[: N + 1], jet[: N + 1]))
    if N == 0:
        return float(squares)
    W = _pair_weights(tuple(model.k), False)
    cross = np.sum(minkowski_dot(jet, W @ jet))
    return float(squares + cross)


def hamiltonian_phase(model: NnmModel, point: PhasePoint) -> float:
    """The same Hamiltonian written on phase space (Ostrogradsky form).

    ``H = sum_{l<N} p_[l].x_[l+1] + p_[N]^2/(2 k_N) - sum_{n<N} k_n x_[n+1]^2 / 2``.
    """
    N = model.order
    if point.order != N:
        raise ValueError(f"phase point of order {point.order} does not match model order {N}")
    k = model.k
    if k[N] == 0:
        raise ZeroDivisionError("highest coupling k_N vanishes; the Legendre map is singular")
    X, P = point.x, point.p
    h = minkowski_dot(P[N], P[N]) / (2.0 * k[N])
    if N:
        h += np.sum(minkowski_dot(P[:N], X[1:]))
        h -= 0.5 * np.sum(k[:N] * minkowski_dot(X[1:], X[1:]))
    return float(h)


def phase_gradient(f, point: PhasePoint, step: float | None = None):
    """Central-difference gradient of ``f`` with respect to contravariant ``x_[l]``, ``p_[l]``.

    The step defaults to ``eps**(1/3) * max(1, |coordinate|)``.
    """
    y0 = point.flat()
    grad = np.empty_like(y0)
    for i, yi in enumerate(y0):
        h = step if step is not None else _EPS_CBRT * max(1.0, abs(yi))
        yp = y0.copy()
        ym = y0.copy()
        yp[i] = yi + h
        ym[i] = yi - h
        fp = f(PhasePoint.from_flat(yp, point.order))
        fm = f(PhasePoint.from_flat(ym, point.order))
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise BracketEvaluationError(f"non-finite value while differencing coordinate {i}")
        grad[i] = (fp - fm) / ((yp[i] - yi) + (yi - ym[i]))
    n = 4 * (point.order + 1)
    return grad[:n].reshape(-1, 4), grad[n:].reshape(-1, 4)


def poisson_bracket(f, g, point: PhasePoint, step: float | None = None) -> float:
    """``{f, g} = sum_l (df/dx_[l]^mu dg/dp_[l]mu - df/dp_[l]^mu dg/dx_[l]mu)``.

    Covariant derivatives are obtained by raising with the metric, so for
    spatial components ``{x^1, p^1} = +1`` while ``{x^0, p^0} = -1``.
    """
    fx, fp = phase_gradient(f, point, step)
    gx, gp = phase_gradient(g, point, step)
    return float(np.sum(minkowski_dot(fx, gp)) - np.sum(minkowski_dot(fp, gx)))


def evolve_via_bracket(G, point: PhasePoint, model: NnmModel, dGdt=None, printed_order: bool = False) -> float:
    """Proper-time rate of change of ``G`` along the Hamiltonian flow.

    Returns ``dG/dt + {G, H}``, which reproduces Hamilton's equations
    (``x_[0]`` evolves with ``v``). ``printed_order=True`` evaluates
    ``dG/dt + {H, G}`` instead; with the bracket defined above this is the
    time-reversed flow.
    """
    H = lambda q: hamiltonian_phase(model, q)  # noqa: E731
    explicit = 0.0 if dGdt is None else float(dGdt(point))
    if printed_order:
        return explicit + poisson_bracket(H, G, point)
    return explicit + poisson_bracket(G, H, point)


def hamilton_equations_residual(model: NnmModel, positions, jets, h: float) -> float:
    """Largest violation of ``dx_[l]/dtau = dH/dp_[l]`` and ``dp_[l]/dtau = -dH/dx_[l]``.

    ``positions`` and ``jets`` are samples at proper times spaced by ``h``;
    time derivatives use central differences across neighbouring samples,
    phase-space derivatives use :func:`phase_gradient`.
    """
    positions = np.asarray(positions, dtype=float)
    jets = np.asarray(jets, dtype=float)
    if len(positions) < 3 or len(jets) != len(positions):
        raise ValueError("need at least three matching position/jet samples for differencing")
    points = [build_phase_point(model, j, x) for j, x in zip(jets, positions)]
    H = lambda q: hamiltonian_phase(model, q)  # noqa: E731
    worst = 0.0
    for i in range(1, len(points) - 1):
        xdot = (points[i + 1].x - points[i - 1].x) / (2 * h)
        pdot = (points[i + 1].p - points[i - 1].p) / (2 * h)
        dHdx, dHdp = phase_gradient(H, points[i])
        # raise the derivative index: dH/dp_mu = eta^{mu nu} dH/dp^nu
        worst = max(
            worst,
            float(np.max(np.abs(xdot - dHdp @ METRIC))),
            float(np.max(np.abs(pdot + dHdx @ METRIC))),
        )
    return worst


def spin_rate_check(model: NnmModel, jets, h: float) -> float:
    """``|ds/dtau - p_[0] x v|`` at the middle of three jets spaced by ``h``."""
    jets = np.asarray(jets, dtype=float)
    if len(jets) != 3:
        raise ValueError(f"need exactly three successive jets, got {len(jets)}")
    sdot = (spin_vector(model, jets[2]) - spin_vector(model, jets[0])) / (2 * h)
    p0 = canonical_momentum(model, jets[1], 0)
    return float(np.linalg.norm(sdot - np.cross(p0[1:], jets[1][0, 1:])))


def integrate_eom(model: NnmModel, jet0, taus, x0=None, rtol: float = 1e-12, atol: float = 1e-14):
    """Integrate the free equation of motion from an initial jet.

    ``jet0`` holds ``v^(0) .. v^(2N)`` at ``taus[0]``. Returns positions of
    shape ``(S, 4)`` and full jets ``(S, 2N+2, 4)`` whose last entry is
    ``v^(2N+1)`` from the equation of motion.
    """
    from scipy.integrate import solve_ivp

    N = model.order
    if N == 0:
        raise ValueError("the newtonian model has no higher-order dynamics to integrate")
    k = model.k
    jet0 = as_jet(jet0, 2 * N + 1, "the initial data")[: 2 * N + 1]
    taus = np.asarray(taus, dtype=float)
    signs = (-1.0) ** np.arange(N)
    lead = (-1.0) ** N * k[N]

    def top(V):
        # solve the equation of motion for v^(2N+1); V rows are v^(0)..v^(2N)
        return -((signs * k[:N]) @ V[1 : 2 * N : 2]) / lead

    def rhs(_, y):
        V = y[4:].reshape(2 * N + 1, 4)
        dV = np.empty_like(V)
        dV[:-1] = V[1:]
        dV[-1] = top(V)
        return np.concatenate((V[0], dV.ravel()))

    y0 = np.concatenate((np.zeros(4) if x0 is None else np.asarray(x0, float), jet0.ravel()))
    sol = solve_ivp(rhs, (taus[0], taus[-1]), y0, method="DOP853", t_eval=taus, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"equation-of-motion integration failed: {sol.message}")
    positions = sol.y[:4].T
    V = sol.y[4:].T.reshape(len(taus), 2 * N + 1, 4)
    jets = np.concatenate((V, np.array([top(v) for v in V])[:, None, :]), axis=1)
    return positions, jets
