"""Reference performance simulator for the parametric footbridge.

Continuous-beam static analysis (Euler-Bernoulli finite elements on the
developed arc), first eigenfrequency via inverse power iteration, ULS/SLS
utilizations, and material cost.  Internal computations run in base SI
units (N, m, kg); the load model is specified in the usual engineering
units and converted at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .geometry import BridgeGeometry, DesignFeatures, SiteConfig, build_geometry, check_compliance

GRAVITY = 9.81  # m/s^2

METRIC_NAMES = ("uls_util", "sls_util", "f1", "cost", "clearance_ok", "trees_ok")
CONTINUOUS_METRICS = (0, 1, 2, 3)
FLAG_METRICS = (4, 5)


class SimulatorFailure(RuntimeError):
    """Analysis failed for this sample (singular system, non-convergence)."""


@dataclass(frozen=True)
class LoadModel:
    """Load magnitudes, partial factors, limits, material and cost constants."""

    concrete_unit_weight: float = 25.0      # kN/m^3
    live_load_area: float = 4.0             # kPa
    uls_factors: tuple[float, float] = (1.35, 1.5)
    sls_factors: tuple[float, float] = (1.0, 1.0)
    deflection_limit_ratio: float = 350.0   # span / delta_limit
    sigma_allow: float = 20.0               # MPa
    E_modulus: float = 33.0                 # GPa
    unit_cost: float = 800.0                # CHF/m^3

    def __post_init__(self):
        values = (
            self.concrete_unit_weight,
            self.live_load_area,
            *self.uls_factors,
            *self.sls_factors,
            self.deflection_limit_ratio,
            self.sigma_allow,
            self.E_modulus,
            self.unit_cost,
        )
        if any(v <= 0 for v in values):
            raise ValueError("all load-model values must be > 0")

    def to_dict(self) -> dict:
        return {
            "concrete_unit_weight": self.concrete_unit_weight,
            "live_load_area": self.live_load_area,
            "uls_factors": list(self.uls_factors),
            "sls_factors": list(self.sls_factors),
            "deflection_limit_ratio": self.deflection_limit_ratio,
            "sigma_allow": self.sigma_allow,
            "E_modulus": self.E_modulus,
            "unit_cost": self.unit_cost,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LoadModel":
        kwargs = dict(d)
        for key in ("uls_factors", "sls_factors"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class PerformanceMetrics:
    """The six-component performance vector of one design."""

    uls_util: float
    sls_util: float
    f1: float          # Hz
    cost: float        # CHF
    clearance_ok: bool
    trees_ok: bool

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.uls_util,
                self.sls_util,
                self.f1,
                self.cost,
                float(self.clearance_ok),
                float(self.trees_ok),
            ]
        )

    @classmethod
    def from_array(cls, y) -> "PerformanceMetrics":
        y = np.asarray(y, dtype=float)
        return cls(
            uls_util=float(y[0]),
            sls_util=float(y[1]),
            f1=float(y[2]),
            cost=float(y[3]),
            clearance_ok=bool(round(y[4])),
            trees_ok=bool(round(y[5])),
        )


@dataclass
class BeamModel:
    """Assembled straight continuous beam on the developed arc length.

    Two DOF per node (deflection w, rotation theta = dw/dx); deflection and
    loads positive downward.
    """

    node_x: np.ndarray          # m, arc-length node coordinates
    EI: float                   # N*m^2
    mass_per_length: float      # kg/m, dead-load mass
    dead_load: float            # N/m
    live_load: float            # N/m
    support_nodes: np.ndarray   # node indices with pinned deflection
    element_span: np.ndarray    # span index per element
    span_lengths: np.ndarray    # m, per span

    @property
    def n_nodes(self) -> int:
        return len(self.node_x)

    @property
    def n_elements(self) -> int:
        return len(self.node_x) - 1

    @property
    def constrained_dofs(self) -> np.ndarray:
        return 2 * self.support_nodes


@dataclass(frozen=True)
class StaticResult:
    max_abs_moment: float             # kNm
    max_abs_deflection: float         # m
    span_max_deflection: np.ndarray   # m, per span
    reactions: np.ndarray             # N, at constrained DOFs
    line_load: float                  # N/m


def _element_stiffness(EI: float, L: float) -> np.ndarray:
    c = EI / L**3
    return c * np.array(
        [
            [12.0, 6.0 * L, -12.0, 6.0 * L],
            [6.0 * L, 4.0 * L**2, -6.0 * L, 2.0 * L**2],
            [-12.0, -6.0 * L, 12.0, -6.0 * L],
            [6.0 * L, 2.0 * L**2, -6.0 * L, 4.0 * L**2],
        ]
    )


def _element_mass(m_lin: float, L: float) -> np.ndarray:
    c = m_lin * L / 420.0
    return c * np.array(
        [
            [156.0, 22.0 * L, 54.0, -13.0 * L],
            [22.0 * L, 4.0 * L**2, 13.0 * L, -3.0 * L**2],
            [54.0, 13.0 * L, 156.0, -22.0 * L],
            [-13.0 * L, -3.0 * L**2, -22.0 * L, 4.0 * L**2],
        ]
    )


def _element_load(p: float, L: float) -> np.ndarray:
    # consistent nodal loads for uniform line load p
    return p * L / 12.0 * np.array([6.0, L, 6.0, -L])


def assemble_beam(
    geom: BridgeGeometry, loads: LoadModel, elems_per_span: int = 8
) -> BeamModel:
    """Mesh the continuous beam: pins at abutments and pier stations."""
    if elems_per_span < 2:
        raise ValueError("elems_per_span must be >= 2")
    stations = [0.0, *geom.pier_stations, geom.arc_length]
    node_x = [0.0]
    element_span = []
    for k in range(len(stations) - 1):
        seg = np.linspace(stations[k], stations[k + 1], elems_per_span + 1)[1:]
        node_x.extend(seg.tolist())
        element_span.extend([k] * elems_per_span)
    node_x = np.array(node_x)
    support_nodes = np.array(
        [k * elems_per_span for k in range(len(stations))], dtype=int
    )

    E = loads.E_modulus * 1e9                      # GPa -> Pa
    g_line = loads.concrete_unit_weight * geom.section.A    # kN/m
    q_line = loads.live_load_area * geom.section.b          # kN/m
    return BeamModel(
        node_x=node_x,
        EI=E * geom.section.I,
        mass_per_length=g_line * 1e3 / GRAVITY,    # kN/m -> kg/m
        dead_load=g_line * 1e3,                    # kN/m -> N/m
        live_load=q_line * 1e3,
        support_nodes=support_nodes,
        element_span=np.array(element_span, dtype=int),
        span_lengths=np.diff(np.array(stations)),
    )


def _assemble_global(model: BeamModel, matrix: str) -> np.ndarray:
    n_dof = 2 * model.n_nodes
    A = np.zeros((n_dof, n_dof))
    for e in range(model.n_elements):
        L = model.node_x[e + 1] - model.node_x[e]
        if matrix == "K":
            Ae = _element_stiffness(model.EI, L)
        else:
            Ae = _element_mass(model.mass_per_length, L)
        dofs = np.array([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3])
        A[np.ix_(dofs, dofs)] += Ae
    return A


def _load_vector(model: BeamModel, p: float) -> np.ndarray:
    F = np.zeros(2 * model.n_nodes)
    for e in range(model.n_elements):
        L = model.node_x[e + 1] - model.node_x[e]
        F[2 * e : 2 * e + 4] += _element_load(p, L)
    return F


def solve_static(model: BeamModel, combo: tuple[float, float]) -> StaticResult:
    """Direct stiffness solution for the line load combo = (g_factor, q_factor).

    Moments are recovered from element end forces and the in-element statics
    of the uniform load; maxima are taken over nodes and interior extrema.
    """
    p = combo[0] * model.dead_load + combo[1] * model.live_load
    K = _assemble_global(model, "K")
    F = _load_vector(model, p)

    fixed = model.constrained_dofs
    free = np.setdiff1d(np.arange(2 * model.n_nodes), fixed)
    Kff = K[np.ix_(free, free)]
    try:
        u_free = np.linalg.solve(Kff, F[free])
    except np.linalg.LinAlgError as exc:
        raise SimulatorFailure(f"singular static system: {exc}") from exc

    u = np.zeros(2 * model.n_nodes)
    u[free] = u_free
    reactions = (K @ u - F)[fixed]

    n_spans = len(model.span_lengths)
    span_max_defl = np.zeros(n_spans)
    max_moment = 0.0
    max_defl = 0.0
    xi = np.linspace(0.0, 1.0, 5)   # element-interior deflection samples
    for e in range(model.n_elements):
        L = model.node_x[e + 1] - model.node_x[e]
        ue = u[2 * e : 2 * e + 4]
        f_end = _element_stiffness(model.EI, L) @ ue - _element_load(p, L)
        # end forces are [-V_i, M_i, V_j, -M_j]; in-element moment by statics
        m0 = f_end[1]
        v0 = -f_end[0]
        candidates = [0.0, L]
        if p != 0.0:
            x_star = v0 / p
            if 0.0 < x_star < L:
                candidates.append(x_star)
        for x in candidates:
            max_moment = max(max_moment, abs(m0 + v0 * x - 0.5 * p * x**2))

        # Hermite interpolation of deflections
        n1 = 1.0 - 3.0 * xi**2 + 2.0 * xi**3
        n2 = L * (xi - 2.0 * xi**2 + xi**3)
        n3 = 3.0 * xi**2 - 2.0 * xi**3
        n4 = L * (xi**3 - xi**2)
        w = n1 * ue[0] + n2 * ue[1] + n3 * ue[2] + n4 * ue[3]
        w_max = float(np.max(np.abs(w)))
        max_defl = max(max_defl, w_max)
        s = model.element_span[e]
        span_max_defl[s] = max(span_max_defl[s], w_max)

    return StaticResult(
        max_abs_moment=max_moment / 1e3,   # N*m -> kNm
        max_abs_deflection=max_defl,
        span_max_deflection=span_max_defl,
        reactions=reactions,
        line_load=p,
    )


def _inverse_power_smallest(
    K: np.ndarray,
    M: np.ndarray,
    n_modes: int = 1,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> np.ndarray:
    """Smallest generalized eigenvalues of (K, M) by inverse power iteration.

    Converged modes are deflated by M-orthogonalization so clustered or
    repeated roots do not stall later modes.
    """
    try:
        factor = cho_factor(K)
    except np.linalg.LinAlgError as exc:
        raise SimulatorFailure(f"stiffness not positive definite: {exc}") from exc

    rng = np.random.default_rng(0xF1)
    eigvals = []
    modes: list[np.ndarray] = []
    n = K.shape[0]
    for _ in range(n_modes):
        x = rng.standard_normal(n)
        lam_prev = np.inf
        for it in range(max_iter):
            for phi in modes:
                x -= (phi @ (M @ x)) * phi
            y = cho_solve(factor, M @ x)
            for phi in modes:
                y -= (phi @ (M @ y)) * phi
            norm = math.sqrt(y @ (M @ y))
            if norm == 0.0:
                raise SimulatorFailure("eigen iteration collapsed to zero vector")
            y /= norm
            lam = y @ (K @ y)
            if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
                x = y
                break
            lam_prev = lam
            x = y
        else:
            raise SimulatorFailure("inverse power iteration did not converge")
        eigvals.append(lam)
        modes.append(x)
    return np.array(eigvals)


def first_frequency(model: BeamModel) -> float:
    """First eigenfrequency (Hz) under dead-load mass."""
    K = _assemble_global(model, "K")
    M = _assemble_global(model, "M")
    fixed = model.constrained_dofs
    free = np.setdiff1d(np.arange(2 * model.n_nodes), fixed)
    Kff = K[np.ix_(free, free)]
    Mff = M[np.ix_(free, free)]
    lam = _inverse_power_smallest(Kff, Mff, n_modes=1)[0]
    if lam <= 0:
        raise SimulatorFailure(f"non-positive fundamental eigenvalue {lam}")
    return math.sqrt(lam) / (2.0 * math.pi)


def evaluate(
    x: DesignFeatures,
    site: SiteConfig,
    loads: LoadModel,
    elems_per_span: int = 8,
) -> PerformanceMetrics:
    """Full performance vector for one design on one site."""
    geom = build_geometry(x, site)
    model = assemble_beam(geom, loads, elems_per_span)

    uls = solve_static(model, loads.uls_factors)
    sigma_allow = loads.sigma_allow * 1e3          # MPa -> kPa
    uls_util = uls.max_abs_moment / (sigma_allow * geom.section.W_el)

    sls = solve_static(model, loads.sls_factors)
    limits = model.span_lengths / loads.deflection_limit_ratio
    sls_util = float(np.max(sls.span_max_deflection / limits))

    f1 = first_frequency(model)
    cost = loads.unit_cost * (geom.girder_volume + geom.pier_volume)
    clearance_ok, trees_ok = check_compliance(geom, x, site)

    return PerformanceMetrics(
        uls_util=uls_util,
        sls_util=sls_util,
        f1=f1,
        cost=cost,
        clearance_ok=clearance_ok,
        trees_ok=trees_ok,
    )
