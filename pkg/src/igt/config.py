"""Experiment configurations: JSON objects mapped onto dataclasses.

Unknown keys are rejected with the dotted path of the offending key, and
values are range-checked before any computation starts.
"""
from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass
from dataclasses import field as _field
from pathlib import Path

import numpy as np

from . import euclid, funk, hyperbolic
from . import numkit as nk
from .errors import InvalidArgumentError


class ConfigError(InvalidArgumentError):
    """Malformed or out-of-range configuration."""


def _fail(path, msg):
    raise ConfigError(f"{path or '<root>'}: {msg}")


def _coerce(value, tp, path):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], path)
    if dataclasses.is_dataclass(tp):
        if not isinstance(value, dict):
            _fail(path, "expected an object")
        return build(tp, value, path)
    if tp is bool:
        if not isinstance(value, bool):
            _fail(path, "expected true or false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            _fail(path, "expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            _fail(path, "expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            _fail(path, "expected a string")
        return value
    if origin is list:
        if not isinstance(value, list):
            _fail(path, "expected a list")
        return [_coerce(v, args[0], f"{path}[{i}]") if args else v for i, v in enumerate(value)]
    if tp is dict or origin is dict:
        if not isinstance(value, dict):
            _fail(path, "expected an object")
        return value
    return value


def build(cls, data: dict, path: str = ""):
    """Instantiate dataclass ``cls`` from ``data``, rejecting unknown keys."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            _fail(f"{path}.{key}" if path else key, "unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            sub = f"{path}.{f.name}" if path else f.name
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], sub)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (InvalidArgumentError, ValueError, TypeError) as exc:
        _fail(path, str(exc))


def load(cls, path):
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object")
    return build(cls, data)


def _check_nk(n, k, ns=(2, 3, 4)):
    if n not in ns or not 1 <= k <= n - 1:
        raise ConfigError(f"(n, k) = ({n}, {k}) is outside the supported range")


# ---------------------------------------------------------------------------
# field specifications


@dataclass
class EuclidFieldSpec:
    family: str = "gaussian"  # gaussian | counterexample-f0 | zero
    center: typing.Optional[list[float]] = None
    width: float = 1.0
    p: float = 2.0
    delta: float = 0.25

    def __post_init__(self):
        if self.family not in ("gaussian", "counterexample-f0", "zero"):
            raise ConfigError(f"family: unknown field family {self.family!r}")

    def make(self, n, k) -> euclid.FieldRn:
        if self.family == "counterexample-f0":
            return euclid.CounterexampleF0(n, k, self.p, self.delta)
        g = euclid.GaussianField(n, k, None if self.center is None else np.array(self.center),
                                 self.width)
        return 0.0 * g if self.family == "zero" else g


@dataclass
class SinogramGridSpec:
    theta_points: int = 64
    s_points: int = 128
    s_max: float = 8.0
    xpp_points: int = 17
    xpp_max: float = 4.0
    theta_order: typing.Optional[int] = None

    def __post_init__(self):
        if self.theta_points < 4 or self.s_points < 8 or self.xpp_points < 2:
            raise ConfigError("grid: too few points")
        if self.s_max <= 0 or self.xpp_max <= 0:
            raise ConfigError("grid: extents must be positive")

    def make(self, n, k) -> euclid.SinogramGrid:
        return euclid.make_sinogram_grid(n, k, self.theta_points, self.s_points, self.s_max,
                                         self.xpp_points, self.xpp_max, self.theta_order)

    def describe(self, n, k) -> dict:
        return {"n": n, "k": k, **dataclasses.asdict(self)}


@dataclass
class FunkFieldSpec:
    family: str = "constant"  # constant | zonal-legendre | zonal-profile | ftilde
    c: float = 1.0
    degree: int = 2
    axis: typing.Optional[list[float]] = None
    a: float = 1.0

    def __post_init__(self):
        if self.family not in ("constant", "zonal-legendre", "zonal-profile", "ftilde"):
            raise ConfigError(f"family: unknown field family {self.family!r}")
        if self.degree < 0:
            raise ConfigError("degree: must be >= 0")

    def make(self, n, k) -> funk.SphereField:
        axis = None
        if self.axis is not None:
            axis = np.asarray(self.axis, float)
            if axis.shape != (n + 1,) or np.linalg.norm(axis) == 0:
                raise ConfigError("axis: needs n+1 entries, not all zero")
            axis = axis / np.linalg.norm(axis)
        if self.family == "constant":
            return funk.ConstantSphereField(n, self.c)
        if self.family == "zonal-legendre":
            return funk.ZonalLegendreField(n, self.degree, axis)
        if self.family == "zonal-profile":
            return funk.ZonalProfileField(n, axis, self.a)
        return funk.FTildeField(n, k)


@dataclass
class HFieldSpec:
    family: str = "exp-decay"  # exp-decay | power-decay
    a: float = 1.0

    def __post_init__(self):
        if self.family not in ("exp-decay", "power-decay"):
            raise ConfigError(f"family: unknown field family {self.family!r}")
        if self.a <= 0:
            raise ConfigError("a: must be positive")

    def make(self, n) -> hyperbolic.HField:
        if self.family == "exp-decay":
            return hyperbolic.ExpDecayField(n, self.a)
        return hyperbolic.PowerDecayField(n, self.a)


@dataclass
class HOrdersSpec:
    directions: int = 16
    radial: int = 16
    r_max: float = 12.0

    def __post_init__(self):
        if self.directions < 2 or self.radial < 2 or self.r_max <= 0:
            raise ConfigError("orders: values out of range")

    def orders(self) -> hyperbolic.HOrders:
        return hyperbolic.HOrders(self.directions, self.radial)


# ---------------------------------------------------------------------------
# command configurations


@dataclass
class ForwardEuclideanConfig:
    n: int = 3
    k: int = 1
    field: EuclidFieldSpec = _field(default_factory=EuclidFieldSpec)
    grid: SinogramGridSpec = _field(default_factory=SinogramGridSpec)
    plane_order: int = 64

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.plane_order < 2:
            raise ConfigError("plane_order: must be >= 2")


@dataclass
class InvertEuclideanConfig:
    n: int = 3
    k: int = 1
    field: typing.Optional[EuclidFieldSpec] = _field(default_factory=EuclidFieldSpec)
    sinogram: typing.Optional[str] = None  # RGRD file on ``grid``; else computed from ``field``
    grid: SinogramGridSpec = _field(default_factory=SinogramGridSpec)
    plane_order: int = 64
    method: str = "fourier-slice"  # fourier-slice | dual-formula | both
    target_points: int = 65
    target_max: typing.Optional[float] = None
    eta_points: int = 64
    probes: list[list[float]] = _field(default_factory=lambda: [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    epsilon: float = 1e-2
    tol: float = 1e-4

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.method not in ("fourier-slice", "dual-formula", "both"):
            raise ConfigError(f"method: unknown method {self.method!r}")
        if self.method != "fourier-slice" and self.k != 1:
            raise ConfigError("method: the dual formula needs k = 1")
        if self.field is None and self.sinogram is None:
            raise ConfigError("field: give a field or a sinogram file")
        for i, p in enumerate(self.probes):
            if len(p) != self.n:
                raise ConfigError(f"probes[{i}]: needs n coordinates")
        if self.epsilon <= 0 or self.tol <= 0:
            raise ConfigError("epsilon and tol must be positive")


@dataclass
class ForwardFunkConfig:
    n: int = 3
    k: int = 1
    field: FunkFieldSpec = _field(default_factory=FunkFieldSpec)
    v_order: int = 15
    zeta_order: int = 24
    order: int = 32

    def __post_init__(self):
        _check_nk(self.n, self.k, (3, 4))
        if self.n - self.k - 1 > 3 or self.k + 1 > 3:
            raise ConfigError("sphere dimensions above 3 are not supported")


@dataclass
class InvertFunkConfig(ForwardFunkConfig):
    sinogram: typing.Optional[str] = None
    max_degree: int = 10

    def __post_init__(self):
        super().__post_init__()
        if self.k != 1:
            raise ConfigError("k: slice inversion needs k = 1")
        if self.zeta_order < 2 * self.max_degree:
            raise ConfigError("zeta_order: must be at least 2 * max_degree")


@dataclass
class ForwardHyperbolicConfig:
    n: int = 3
    k: int = 1
    field: HFieldSpec = _field(default_factory=HFieldSpec)
    v_order: int = 7
    sigma_order: int = 7
    rho_max: float = 3.0
    rho_points: int = 13
    orders: HOrdersSpec = _field(default_factory=HOrdersSpec)

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.rho_points < 1 or self.rho_max < 0:
            raise ConfigError("rho grid out of range")


@dataclass
class RangeTolSpec:
    evenness: float = 1e-8
    moment: float = 1e-6
    roundtrip: float = 1e-3


@dataclass
class CheckRangeConfig:
    n: int = 3
    k: int = 1
    field: EuclidFieldSpec = _field(default_factory=EuclidFieldSpec)
    grid: SinogramGridSpec = _field(default_factory=SinogramGridSpec)
    plane_order: int = 64
    m_max: int = 4
    tolerances: RangeTolSpec = _field(default_factory=RangeTolSpec)
    inject_odd: float = 0.0  # amplitude of an added s e^{-s^2} term
    target_points: int = 65

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.m_max < 0:
            raise ConfigError("m_max: must be >= 0")


IDENTITIES = ("funk-duality", "hyperbolic-duality", "hyperbolic-slice", "hyperbolic-measure",
              "projection-slice")


@dataclass
class CheckIdentityConfig:
    identity: str = "funk-duality"
    n: int = 3
    k: int = 1
    field: dict = _field(default_factory=dict)
    tolerance: float = 1e-3
    sigmas: list[list[float]] = _field(default_factory=list)
    rho_max: float = 10.0
    orders: HOrdersSpec = _field(default_factory=HOrdersSpec)
    grid: SinogramGridSpec = _field(default_factory=SinogramGridSpec)

    def __post_init__(self):
        if self.identity not in IDENTITIES:
            raise ConfigError(f"identity: unknown identity {self.identity!r}")
        if self.tolerance <= 0:
            raise ConfigError("tolerance: must be positive")
        _check_nk(self.n, self.k)

    def field_spec(self):
        if self.identity == "funk-duality":
            return build(FunkFieldSpec, self.field, "field")
        if self.identity == "projection-slice":
            return build(EuclidFieldSpec, self.field, "field")
        return build(HFieldSpec, self.field, "field")


@dataclass
class ScanDivergenceConfig:
    scan: str = "f0"  # f0 | ftilde
    n: int = 3
    k: int = 1
    p: typing.Optional[float] = None  # f0: 2; ftilde: n - k
    delta: float = 0.25
    j_min: int = 1
    j_max: int = 12
    eps_j_min: int = 4
    eps_j_max: int = 20
    h: float = 0.5

    def __post_init__(self):
        if self.scan not in ("f0", "ftilde"):
            raise ConfigError(f"scan: unknown scan {self.scan!r}")
        if self.j_max <= self.j_min or self.eps_j_max <= self.eps_j_min:
            raise ConfigError("scan schedule must have at least two entries")
        if not 0 < self.h <= 1:
            raise ConfigError("h: must lie in (0, 1]")
        if self.p is None:
            self.p = 2.0 if self.scan == "f0" else float(self.n - self.k)
        if self.p <= 1:
            raise ConfigError("p: must exceed 1")


COMMANDS = {
    "forward-euclidean": ForwardEuclideanConfig,
    "invert-euclidean": InvertEuclideanConfig,
    "forward-funk": ForwardFunkConfig,
    "invert-funk": InvertFunkConfig,
    "forward-hyperbolic": ForwardHyperbolicConfig,
    "check-range": CheckRangeConfig,
    "check-identity": CheckIdentityConfig,
    "scan-divergence": ScanDivergenceConfig,
}


def sphere_points(d: int, order: int) -> np.ndarray:
    return nk.make_sphere_quadrature(d, order).points
