"""
Verification suite - configuration, check registry and runner

Checks are plain callables returning an Outcome; run_suite executes them
concurrently in worker threads and collects one CheckRecord per check.
"""

import asyncio
import configparser
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, field_validator
from scipy.integrate import cumulative_trapezoid

from . import progress
from .calculus import (
    DerivativeStencil,
    GridField,
    decomposition_defect,
    default_grid,
    dirac_apply,
    halving_study,
    nonlinear_residual,
    stencil,
)
from .clifford import MAX_DIMENSION, build_rep, compatibility_defect, relation_defect, skew_hermitian_defect
from .errors import ConfigError
from .fields import (
    BubbleParams,
    ambient_dirac,
    bubble_eval,
    bubble_length,
    conformal_volume,
    constant_field,
    critical_exponent,
    family_dimension,
    killing_defect,
    nodal_margin,
    sphere_trace_length,
    standard_bubble,
    twistor_field,
)
from .functionals import (
    FunctionalReport,
    action,
    action_report,
    length_coupling_check,
    liouville_curvature_report,
    liouville_grid,
    liouville_residual,
    lower_bound_check,
    sobolev_report,
    yamabe_grid,
    yamabe_invariant_check,
    yamabe_residual,
)
from .geometry import (
    Grid,
    conformal_factor,
    metric_pullback_ratio,
    sphere_quadrature,
    sphere_volume,
    stereo_to_plane,
    stereo_to_sphere,
)
from .greenkernel import (
    GegenbauerEvaluator,
    harmonic_projection,
    kernel_G,
    pole_field,
    representation_reconstruct,
    series_expand_kernel,
)
from .report import CheckRecord, Report

logger = logging.getLogger(__name__)

SEED_ENV = "DIRAC_BUBBLES_SEED"
MODULES = ("clifford", "geometry", "fields", "calculus", "functionals", "greenkernel")
FIELD_DIMENSIONS = (2, 3, 4)
RESIDUAL_DIMENSIONS = (2, 3)
CONVERGENCE_POINTS = {2: {2: 81, 4: 81}, 3: {2: 41, 4: 81}}
YAMABE_CONVERGENCE_POINTS = {3: 41, 4: 21}


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    return value


class GridSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    half_width_scale: PositiveFloat = 4.0
    points: Optional[PositiveInt] = None
    order: int = 2

    @field_validator('order')
    @classmethod
    def _known_order(cls, value):
        if value not in (2, 4):
            raise ValueError(f"stencil order must be 2 or 4, got {value}")
        return value


class QuadratureSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    surface_order: PositiveInt = 40
    radial_nodes: PositiveInt = 40
    sphere_samples: PositiveInt = 10_000


class ToleranceSettings(BaseModel):
    """Pass thresholds; every field can be overridden from the [tolerances] section"""
    model_config = ConfigDict(extra="forbid")

    clifford: PositiveFloat = 1e-14
    compatibility: PositiveFloat = 1e-13
    geometry: PositiveFloat = 1e-12
    metric_pullback: PositiveFloat = 1e-8
    sphere_length: PositiveFloat = 1e-12
    sphere_length_offcenter: PositiveFloat = 1e-3
    conformal_volume: PositiveFloat = 1e-8
    killing: PositiveFloat = 1e-13
    nodal: PositiveFloat = 1e-12
    residual: PositiveFloat = 5e-3
    convergence_low: PositiveFloat = 3.2
    convergence_high: PositiveFloat = 4.8
    decomposition: PositiveFloat = 1e-12
    action: PositiveFloat = 1e-8
    sobolev: PositiveFloat = 1e-8
    length_coupling: PositiveFloat = 1e-12
    yamabe_invariant: PositiveFloat = 1e-6
    liouville_curvature: PositiveFloat = 1e-8
    gegenbauer: PositiveFloat = 1e-12
    series: PositiveFloat = 1e-10
    reconstruct_center: PositiveFloat = 1e-12
    reconstruct_interior: PositiveFloat = 1e-8
    harmonic: PositiveFloat = 1e-9


class BubbleSetting(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    lam: PositiveFloat = Field(default=1.0, alias="lambda")
    center: Optional[List[float]] = None
    amplitude_scale: PositiveFloat = 1.0

    @field_validator('center', mode='before')
    @classmethod
    def _parse_center(cls, value):
        return _split_list(value)

    def params(self, n: int) -> BubbleParams:
        center = None
        if self.center is not None:
            if len(self.center) < n:
                raise ConfigError(f"bubble center {self.center} has fewer than {n} components")
            center = self.center[:n]
        return standard_bubble(n, lam=self.lam, center=center, amplitude_scale=self.amplitude_scale)


class OutputSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    report: Optional[Path] = None
    profile_dir: Optional[Path] = None
    progress_log: Optional[Path] = None


class SuiteConfig(BaseModel):
    """Everything a suite run depends on"""
    model_config = ConfigDict(extra="forbid")

    dimensions: List[int] = Field(default_factory=lambda: [2, 3])
    clifford_dimensions: List[int] = Field(default_factory=lambda: list(range(2, MAX_DIMENSION + 1)))
    seed: int = 0
    checks: List[str] = Field(default_factory=lambda: list(MODULES))
    concurrency: PositiveInt = 4
    grid: GridSettings = Field(default_factory=GridSettings)
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    bubbles: Dict[str, BubbleSetting] = Field(default_factory=lambda: {"unit": BubbleSetting()})
    output: OutputSettings = Field(default_factory=OutputSettings)

    @field_validator('dimensions', 'clifford_dimensions', 'checks', mode='before')
    @classmethod
    def _parse_lists(cls, value):
        return _split_list(value)

    @field_validator('dimensions')
    @classmethod
    def _field_dimensions(cls, value):
        bad = [n for n in value if n not in FIELD_DIMENSIONS]
        if bad:
            raise ValueError(f"dimensions must be within {FIELD_DIMENSIONS[0]}..{FIELD_DIMENSIONS[-1]}, got {bad}")
        return sorted(set(value))

    @field_validator('clifford_dimensions')
    @classmethod
    def _clifford_dimensions(cls, value):
        bad = [n for n in value if not 1 <= n <= MAX_DIMENSION]
        if bad:
            raise ValueError(f"clifford dimensions must be within 1..{MAX_DIMENSION}, got {bad}")
        return sorted(set(value))

    @field_validator('checks')
    @classmethod
    def _known_checks(cls, value):
        unknown = [c for c in value if c not in MODULES]
        if unknown:
            raise ValueError(f"unknown check groups {unknown}; expected a subset of {MODULES}")
        return value


def load_config(path: Optional[Path] = None) -> SuiteConfig:
    """Read an INI suite config; no path gives the defaults

    The seed from DIRAC_BUBBLES_SEED (environment or .env) wins over the file.
    """
    data: dict = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding='utf-8') as f:
                parser.read_file(f)
        except (OSError, configparser.Error) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        for section in parser.sections():
            values = dict(parser.items(section))
            if section == "suite":
                data.update(values)
            elif section in ("grid", "quadrature", "tolerances", "output"):
                data[section] = values
            elif section.startswith("bubble."):
                data.setdefault("bubbles", {})[section[len("bubble."):]] = values
            else:
                raise ConfigError(f"unknown config section [{section}]")
    try:
        config = SuiteConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e
    return config.model_copy(update={"seed": resolve_seed(config.seed)})


def resolve_seed(default: int) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw.strip(), 10)
    except ValueError as e:
        raise ConfigError(f"{SEED_ENV} must be a decimal integer, got {raw!r}") from e


@dataclass(frozen=True)
class Outcome:
    measured: float
    reference: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class Check:
    check_id: str
    module: str
    identity: str
    run: Callable[[], Outcome]
    dimension: Optional[int] = None


def at_most(measured: float, tolerance: float) -> Outcome:
    return Outcome(float(measured), 0.0, tolerance, bool(measured <= tolerance))


def at_least(measured: float, tolerance: float) -> Outcome:
    return Outcome(float(measured), tolerance, tolerance, bool(measured > tolerance))


def relative(measured: float, reference: float, tolerance: float) -> Outcome:
    gap = abs(measured - reference) / max(abs(reference), 1e-300)
    return Outcome(float(measured), float(reference), tolerance, bool(gap <= tolerance))


def within(measured: float, low: float, high: float) -> Outcome:
    return Outcome(float(measured), 0.5 * (low + high), 0.5 * (high - low), bool(low <= measured <= high))


def _against(report: FunctionalReport, tolerance: float) -> Outcome:
    return Outcome(report.measured, report.reference, tolerance, bool(report.relative_error <= tolerance))


def _random_points(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    """Uniform directions with radii uniform in [0, radius]"""
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return v * (radius * rng.random((count, 1)))


def _clifford_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    checks = []
    for n in config.clifford_dimensions:
        checks.append(Check(f"clifford.relation.n{n}", "clifford", "gamma_j gamma_k + gamma_k gamma_j = -2 delta_jk",
                            lambda n=n: at_most(relation_defect(build_rep(n)), tol.clifford), n))
        checks.append(Check(f"clifford.skew_hermitian.n{n}", "clifford", "gamma_j^* = -gamma_j",
                            lambda n=n: at_most(skew_hermitian_defect(build_rep(n)), tol.clifford), n))
    for n in config.dimensions:
        checks.append(Check(f"clifford.compatibility.n{n}", "clifford", "|gamma(v) s| = |v| |s|",
                            lambda n=n: at_most(compatibility_defect(build_rep(n), seed=config.seed), tol.compatibility), n))
    return checks


def _geometry_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    checks = []
    for n in config.dimensions:
        def roundtrip(n=n):
            x = _random_points(np.random.default_rng(config.seed), 1000, n, 10.0)
            return at_most(float(np.max(np.abs(stereo_to_plane(stereo_to_sphere(x)) - x))) / 10.0, tol.geometry)

        def pullback(n=n):
            rng = np.random.default_rng(config.seed)
            worst = 0.0
            for x, v in zip(_random_points(rng, 20, n, 3.0), rng.standard_normal((20, n))):
                worst = max(worst, abs(metric_pullback_ratio(x, v) / conformal_factor(x) ** 2 - 1.0))
            return at_most(worst, tol.metric_pullback)

        checks.append(Check(f"geometry.stereo_roundtrip.n{n}", "geometry",
                            "p(pi(x)) = x for p(y) = y/(1 - y_(n+1)); the form 2y/(1 - y_(n+1)) returns 2x",
                            roundtrip, n))
        checks.append(Check(f"geometry.metric_pullback.n{n}", "geometry", "pi^* g_round = (2/(1+|x|^2))^2 g_flat",
                            pullback, n))
        if n - 1 in (1, 2, 3):
            def surface(n=n):
                quad = sphere_quadrature(n - 1, config.quadrature.surface_order)
                return relative(float(quad.integrate(np.ones(quad.weights.shape))), sphere_volume(n - 1),
                                tol.geometry)

            checks.append(Check(f"geometry.sphere_volume.n{n}", "geometry", "sum of weights = Vol(S^(n-1))",
                                surface, n))
    return checks


def _fields_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    checks = []
    for n in config.dimensions:
        def constant_length(n=n):
            y = np.random.default_rng(config.seed).standard_normal((config.quadrature.sphere_samples, n + 1))
            y /= np.linalg.norm(y, axis=-1, keepdims=True)
            y = y[y[:, -1] < 0.99]
            trace = sphere_trace_length(standard_bubble(n), y)
            return at_most(float(np.max(np.abs(trace - (n / 2.0) ** ((n - 1) / 2.0)))), tol.sphere_length)

        def offcenter_length(n=n):
            y = np.random.default_rng(config.seed).standard_normal((config.quadrature.sphere_samples, n + 1))
            y /= np.linalg.norm(y, axis=-1, keepdims=True)
            y = y[y[:, -1] < 0.99]
            trace = sphere_trace_length(standard_bubble(n, lam=2.0), y)
            return at_least(float(np.max(np.abs(trace - (n / 2.0) ** ((n - 1) / 2.0)))), tol.sphere_length_offcenter)

        def killing(n=n):
            rep = build_rep(n + 1)
            phi = np.zeros(rep.N, dtype=np.complex128)
            phi[0] = 1.0
            samples = np.random.default_rng(config.seed).standard_normal((200, n + 1))
            dirac_gap = np.max(np.abs(ambient_dirac(twistor_field(phi, rep), rep, samples) + (n + 1) * phi))
            return at_most(max(killing_defect(phi, rep, samples), float(dirac_gap)), tol.killing)

        def parameter_count(n=n):
            rep = build_rep(n)
            return relative(family_dimension(n), (2 * rep.N - 1) + n + 1, 0.0)

        checks += [
            Check(f"fields.sphere_length.n{n}", "fields", "|phi| = (n/2)^((n-1)/2) on S^n", constant_length, n),
            Check(f"fields.sphere_length_offcenter.n{n}", "fields", "|phi| not constant for lam = 2",
                  offcenter_length, n),
            Check(f"fields.killing.n{n}", "fields", "P(gamma(x) Phi) = 0, D(gamma(x) Phi) = -(n+1) Phi", killing, n),
            Check(f"fields.family_dimension.n{n}", "fields", "2^(n//2 + 1) + n free parameters", parameter_count, n),
        ]
        if n in (2, 3):
            checks.append(Check(
                f"fields.conformal_volume.n{n}", "fields", "(2/n)^n int |phi|^(2n/(n-1)) = Vol(S^n)",
                lambda n=n: relative(conformal_volume(standard_bubble(n), config.quadrature.surface_order),
                                     sphere_volume(n), tol.conformal_volume), n))
        for name, setting in config.bubbles.items():
            def nodal(n=n, setting=setting):
                p = setting.params(n)
                grid = Grid(n=n, L=config.grid.half_width_scale * p.lam, m=9 if n < 4 else 7, center=tuple(p.center))
                return at_least(nodal_margin(p, grid.points()), 1.0 - tol.nodal)

            checks.append(Check(f"fields.nodal.{name}.n{n}", "fields", "min |psi| >= closed-form floor > 0", nodal, n))
    return checks


def _small_grid_points(n: int, st: DerivativeStencil) -> int:
    """Smallest grid the stencil accepts, two nodes larger below n = 4"""
    return 2 * st.radius + (7 if n < 4 else 5)


def _residual_grid(config: SuiteConfig, p: BubbleParams, m: Optional[int] = None) -> Grid:
    return default_grid(p, m=m or config.grid.points, half_width_scale=config.grid.half_width_scale)


def _calculus_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    st = stencil(config.grid.order)
    checks = []
    for n in config.dimensions:
        for name, setting in (config.bubbles.items() if n in RESIDUAL_DIMENSIONS else ()):
            def residual(n=n, setting=setting):
                p = setting.params(n)
                return at_most(nonlinear_residual(p, _residual_grid(config, p), st).sup_rel, tol.residual)

            checks.append(Check(f"calculus.residual.{name}.n{n}", "calculus", "D psi = |psi|^(2/(n-1)) psi",
                                residual, n))
        if n in CONVERGENCE_POINTS:
            def convergence(n=n):
                p = standard_bubble(n)
                grid = _residual_grid(config, p, CONVERGENCE_POINTS[n][st.order])
                study = halving_study(lambda g: nonlinear_residual(p, g, st).sup_rel, grid)
                expected = 2.0 ** st.order / 4.0
                return within(study.ratio, tol.convergence_low * expected, tol.convergence_high * expected)

            checks.append(Check(f"calculus.residual_convergence.n{n}", "calculus", "residual ratio ~ 2^order on h/2",
                                convergence, n))

        def decomposition(n=n):
            rep = build_rep(n)
            rng = np.random.default_rng(config.seed)
            grid = Grid(n=n, L=1.0, m=_small_grid_points(n, st))
            fields = [GridField(grid, rng.standard_normal(grid.shape + (rep.N,))
                                + 1j * rng.standard_normal(grid.shape + (rep.N,))) for _ in range(5)]
            p = standard_bubble(n)
            fields.append(GridField.sample(Grid(n=n, L=2.0, m=grid.m), lambda x: bubble_eval(p, x)))
            return at_most(max(decomposition_defect(f, rep, st) for f in fields), tol.decomposition)

        checks.append(Check(f"calculus.decomposition.n{n}", "calculus", "|d psi|^2 = |P psi|^2 + (1/n)|D psi|^2",
                            decomposition, n))
    return checks


def _functionals_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    st = stencil(config.grid.order)
    checks = []
    for n in config.dimensions:
        for name, setting in config.bubbles.items():
            def measured_action(n=n, setting=setting):
                return _against(action_report(setting.params(n)), tol.action)

            def bound(n=n, setting=setting):
                verdict = lower_bound_check(action(setting.params(n)), n, tol.action)
                return Outcome(verdict.value, verdict.bound, verdict.tolerance, verdict.passes and verdict.ground_state)

            def quotient(n=n, setting=setting):
                return _against(sobolev_report(setting.params(n)), tol.sobolev)

            checks += [
                Check(f"functionals.action.{name}.n{n}", "functionals", "L(psi) = (1/2n)(n/2)^n Vol(S^n)",
                      measured_action, n),
                Check(f"functionals.lower_bound.{name}.n{n}", "functionals", "ground state attains the action bound",
                      bound, n),
                Check(f"functionals.sobolev.{name}.n{n}", "functionals", "(int |psi|^(2n/(n-1)))^(1/n) = (n/2) Vol^(1/n)",
                      quotient, n),
            ]
        if n >= 3:
            def invariant(n=n):
                return _against(yamabe_invariant_check(n), tol.yamabe_invariant)

            def coupling(n=n):
                return at_most(length_coupling_check(standard_bubble(n, lam=3.0 if n > 3 else 1.0), 1000,
                                                     seed=config.seed), tol.length_coupling)

            checks += [
                Check(f"functionals.yamabe_invariant.n{n}", "functionals", "Y(S^n) = n(n-1) Vol(S^n)^(2/n)",
                      invariant, n),
                Check(f"functionals.length_coupling.n{n}", "functionals", "(2/n)^((n-2)/2) |psi|^((n-2)/(n-1)) = u",
                      coupling, n),
            ]
            if n in YAMABE_CONVERGENCE_POINTS:
                def yamabe(n=n):
                    grid = yamabe_grid(n, 1.0, m=YAMABE_CONVERGENCE_POINTS[n])
                    study = halving_study(lambda g: yamabe_residual(1.0, np.zeros(n), n, g, st).sup_rel, grid)
                    expected = 2.0 ** st.order / 4.0
                    return within(study.ratio, tol.convergence_low * expected, tol.convergence_high * expected)

                checks.append(Check(f"functionals.yamabe_convergence.n{n}", "functionals",
                                    "-c_n Delta u = n(n-1) u^((n+2)/(n-2)), ratio ~ 2^order", yamabe, n))
        if n == 2:
            def curvature():
                return _against(liouville_curvature_report(1.0), tol.liouville_curvature)

            def liouville():
                grid = liouville_grid(1.0, m=101)
                study = halving_study(lambda g: liouville_residual(1.0, (0.0, 0.0), g, st).sup_rel, grid)
                expected = 2.0 ** st.order / 4.0
                return within(study.ratio, tol.convergence_low * expected, tol.convergence_high * expected)

            checks += [
                Check("functionals.liouville_curvature.n2", "functionals", "int e^(2v) = 4 pi", curvature, 2),
                Check("functionals.liouville_convergence.n2", "functionals", "-Delta v = e^(2v), ratio ~ 2^order",
                      liouville, 2),
            ]
    return checks


def _greenkernel_checks(config: SuiteConfig) -> List[Check]:
    tol = config.tolerances
    order = config.quadrature.surface_order

    def generating():
        s, t, tau = 0.4, 0.7, 0.5
        values = GegenbauerEvaluator(tau, 60).values(t)
        partial = float(np.sum(s ** np.arange(61) * values))
        return relative(partial, (1.0 - 2.0 * s * t + s * s) ** (-tau), tol.gegenbauer)

    checks = [Check("greenkernel.gegenbauer_generating", "greenkernel",
                    "sum_k s^k C_k^tau(t) = (1 - 2st + s^2)^-tau", generating)]
    for n in config.dimensions:
        def series(n=n):
            rep = build_rep(n)
            rng = np.random.default_rng(config.seed)
            worst = 0.0
            for _ in range(10):
                x = rng.standard_normal(n)
                y = rng.standard_normal(n)
                x *= 0.3 / np.linalg.norm(x)
                y /= np.linalg.norm(y)
                exact = kernel_G(x - y, rep)
                worst = max(worst, float(np.linalg.norm(series_expand_kernel(x, y, 60, rep) - exact)
                                         / np.linalg.norm(exact)))
            return at_most(worst, tol.series)

        def constant_center(n=n):
            rep = build_rep(n)
            c = np.arange(1, rep.N + 1) + 0.5j
            f = constant_field(c, n)
            value = representation_reconstruct(f, np.zeros(n), rep, sphere_quadrature(n - 1, order))
            return at_most(float(np.max(np.abs(value - c))), tol.reconstruct_center)

        def constant_interior(n=n):
            rep = build_rep(n)
            c = np.arange(1, rep.N + 1) + 0.5j
            f = constant_field(c, n)
            surface = sphere_quadrature(n - 1, order)
            worst = 0.0
            for x in _random_points(np.random.default_rng(config.seed), 5, n, 0.5):
                value = representation_reconstruct(f, x, rep, surface, radial_nodes=config.quadrature.radial_nodes)
                worst = max(worst, float(np.max(np.abs(value - c))))
            return at_most(worst, tol.reconstruct_interior)

        def harmonic(n=n):
            rep = build_rep(n)
            phi = np.zeros(rep.N, dtype=np.complex128)
            phi[0] = 1.0
            y0 = np.zeros(n)
            y0[0] = 2.0
            # Q_k is D-harmonic for any node set
            surface = sphere_quadrature(n - 1, order if n < 4 else min(order, 8))
            grid = Grid(n=n, L=0.4, m=_small_grid_points(n, stencil(4)))
            worst = 0.0
            for k in (1, 2, 3, 4):
                q = harmonic_projection(pole_field(y0, phi, rep), k, rep, surface)
                samples = GridField.sample(grid, q)
                scale = max(float(np.max(np.abs(samples.values))), 1e-300)
                worst = max(worst, float(np.max(np.abs(dirac_apply(samples, rep, stencil(4)).values))) / scale)
            return at_most(worst, tol.harmonic)

        checks += [
            Check(f"greenkernel.series.n{n}", "greenkernel", "Gegenbauer series of G(x - y), |x|/|y| = 0.3, K = 60",
                  series, n),
            Check(f"greenkernel.reconstruct_center.n{n}", "greenkernel", "representation formula, constant at 0",
                  constant_center, n),
            Check(f"greenkernel.reconstruct_interior.n{n}", "greenkernel", "representation formula, constant inside",
                  constant_interior, n),
            Check(f"greenkernel.harmonic_dirac.n{n}", "greenkernel", "D Q_k = 0", harmonic, n),
        ]
    return checks


_BUILDERS = {
    "clifford": _clifford_checks,
    "geometry": _geometry_checks,
    "fields": _fields_checks,
    "calculus": _calculus_checks,
    "functionals": _functionals_checks,
    "greenkernel": _greenkernel_checks,
}


def build_checks(config: SuiteConfig) -> List[Check]:
    checks = []
    for module in MODULES:
        if module in config.checks:
            checks += _BUILDERS[module](config)
    return checks


def execute_check(check: Check) -> CheckRecord:
    """Run one check; exceptions become failing records"""
    progress.log_check(check.check_id, "started", {"dimension": check.dimension})
    start = time.perf_counter()
    try:
        outcome = check.run()
    except Exception as e:
        runtime = time.perf_counter() - start
        logger.warning(f"Check {check.check_id} raised {type(e).__name__}: {e}")
        progress.log_error(check.check_id, e, {"dimension": check.dimension})
        return CheckRecord(check_id=check.check_id, module=check.module, identity=check.identity,
                           tolerance=0.0, passed=False, dimension=check.dimension,
                           error=f"{type(e).__name__}: {e}", runtime=runtime)
    runtime = time.perf_counter() - start
    record = CheckRecord(
        check_id=check.check_id, module=check.module, identity=check.identity,
        measured=outcome.measured, reference=outcome.reference, tolerance=outcome.tolerance,
        passed=outcome.passed, dimension=check.dimension, runtime=runtime,
    )
    progress.log_check(check.check_id, "passed" if record.passed else "FAILED", record.model_dump())
    logger.debug(f"Check {check.check_id} finished in {runtime:.3f}s")
    return record


async def run_suite_async(config: SuiteConfig) -> Report:
    if not config.dimensions:
        raise ConfigError("nothing to verify: the dimension list is empty")
    checks = build_checks(config)
    if not checks:
        raise ConfigError("nothing to verify: no checks enabled")
    logger.info(f"Running {len(checks)} checks for n={config.dimensions} (seed {config.seed})")
    semaphore = asyncio.Semaphore(config.concurrency)

    async def guarded(check: Check) -> CheckRecord:
        async with semaphore:
            return await asyncio.to_thread(execute_check, check)

    records = await asyncio.gather(*(guarded(c) for c in checks))
    report = Report(seed=config.seed, records=list(records))
    summary = report.summary()
    logger.info(f"Suite finished: {summary['total'] - summary['failed']}/{summary['total']} checks passed")
    return report


def run_suite(config: SuiteConfig) -> Report:
    """Run every enabled check and collect the report"""
    return asyncio.run(run_suite_async(config))


def emit_profile(p: BubbleParams, r_max: float, samples: int) -> pd.DataFrame:
    """Radial profile table: r, |psi|, |psi|^(2n/(n-1)) and its cumulative integral over B_r"""
    if samples < 2:
        raise ConfigError(f"a profile needs at least 2 samples, got {samples}")
    if not r_max > 0:
        raise ConfigError(f"r_max must be positive, got {r_max}")
    if samples == 2:
        r = np.array([0.0, r_max])
    else:
        inner = min(1e-3 * p.lam, 0.5 * r_max)
        r = np.concatenate([[0.0], np.geomspace(inner, r_max, samples - 1)])
    length = bubble_length(p, r)
    density = length ** critical_exponent(p.n)
    shell = sphere_volume(p.n - 1) * r ** (p.n - 1) * density
    cumulative = cumulative_trapezoid(shell, r, initial=0.0)
    return pd.DataFrame({"r": r, "length": length, "density": density, "cumulative": cumulative})


def write_profile(profile: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    profile.to_csv(path, index=False, columns=["r", "length", "density", "cumulative"])
    logger.info(f"Profile written to {path} ({len(profile)} rows)")
    return path


def write_profiles(config: SuiteConfig, samples: int = 2001) -> List[Path]:
    """One profile CSV per configured bubble and dimension under output.profile_dir"""
    target = config.output.profile_dir
    if target is None:
        return []
    paths = []
    for n in config.dimensions:
        for name, setting in config.bubbles.items():
            p = setting.params(n)
            paths.append(write_profile(emit_profile(p, 1e3 * p.lam, samples), Path(target) / f"profile_{name}_n{n}.csv"))
    return paths
