"""VM catalog, USL performance scaling, and stochastic task execution times."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.special import erfinv

from .dag import Task, Workflow


class UnknownFamily(KeyError):
    pass


class UnknownVmType(KeyError):
    pass


class BadQuantileOrder(ValueError):
    pass


#: (alpha, beta) contention/coherency coefficients for the three scaling scenarios.
#: A: mild contention; B: linear scaling; C: retrograde beyond a peak.
SCENARIOS: dict[str, tuple[float, float]] = {
    "A": (0.01, 0.0),
    "B": (0.0, 0.0),
    "C": (0.0001, 0.001),
}

DISTRIBUTIONS = ("deterministic", "gamma", "halfnormal", "uniform")

#: Fitted per-family capacity multipliers; families not listed default to 1.0.
DEFAULT_FAMILY_MU: dict[str, float] = {"c5": 1.0, "c4": 0.8, "m5": 0.8}


@dataclass(frozen=True)
class VmType:
    name: str
    family: str
    vcpus: int
    bandwidth_mbps: float
    price_per_hour: float

    def __post_init__(self):
        if self.vcpus < 1:
            raise ValueError(f"{self.name}: vcpus must be >= 1")
        if self.bandwidth_mbps <= 0:
            raise ValueError(f"{self.name}: bandwidth must be > 0")
        if self.price_per_hour <= 0:
            raise ValueError(f"{self.name}: price must be > 0")


@dataclass(frozen=True)
class VmCatalog:
    """The set of VM types offered, with scaling coefficients and user quotas.

    ``quota_total`` caps simultaneously allocated resources in units of
    ``quota_unit`` ("vcpus" or "vms"); ``quota_per_type`` caps concurrent
    instances per type name.  ``None`` means unlimited.
    """

    types: tuple[VmType, ...]
    family_mu: Mapping[str, float] = field(default_factory=dict)
    usl_alpha: float = 0.01
    usl_beta: float = 0.0
    quota_total: float | None = None
    quota_unit: str = "vcpus"
    quota_per_type: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.usl_alpha < 0 or self.usl_beta < 0:
            raise ValueError("USL coefficients must be >= 0")
        if self.quota_unit not in ("vcpus", "vms"):
            raise ValueError(f"unknown quota unit {self.quota_unit!r}")
        if self.quota_total is not None and self.quota_total <= 0:
            raise ValueError("quota_total must be positive or None")
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise ValueError("duplicate VM type names in catalog")

    def __iter__(self):
        return iter(self.types)

    def __len__(self) -> int:
        return len(self.types)

    def type_named(self, name: str) -> VmType:
        for t in self.types:
            if t.name == name:
                return t
        raise UnknownVmType(name)

    def mu(self, family: str) -> float:
        if family in self.family_mu:
            return float(self.family_mu[family])
        if family in DEFAULT_FAMILY_MU:
            return DEFAULT_FAMILY_MU[family]
        if any(t.family == family for t in self.types):
            return 1.0
        raise UnknownFamily(family)

    def usl_capacity(self, vcpus: int, family: str) -> float:
        """Relative compute capacity of ``vcpus`` cores in ``family``.

        mu_f * N / (1 + alpha*(N-1) + beta*N*(N-1))
        """
        if vcpus < 1:
            raise ValueError("vcpus must be >= 1")
        n = float(vcpus)
        denom = 1.0 + self.usl_alpha * (n - 1.0) + self.usl_beta * n * (n - 1.0)
        return self.mu(family) * n / denom

    def mean_time(self, task: Task, vmtype: VmType) -> float:
        """Mean execution time of ``task`` on ``vmtype``, scaled from the 1-vCPU baseline."""
        return task.runtime / self.usl_capacity(vmtype.vcpus, vmtype.family)

    def mean_bandwidth(self) -> float:
        return sum(t.bandwidth_mbps for t in self.types) / len(self.types)

    def subset(self, names: list[str]) -> "VmCatalog":
        by_name = {t.name: t for t in self.types}
        try:
            selected = tuple(by_name[n] for n in names)
        except KeyError as exc:
            raise UnknownVmType(str(exc)) from exc
        return replace(self, types=selected)

    def with_scenario(self, scenario: str) -> "VmCatalog":
        try:
            a, b = SCENARIOS[scenario.upper()]
        except KeyError:
            raise ValueError(f"unknown scalability scenario {scenario!r}") from None
        return replace(self, usl_alpha=a, usl_beta=b)

    def with_quotas(
        self,
        total: float | None = None,
        unit: str = "vcpus",
        per_type: Mapping[str, int] | None = None,
    ) -> "VmCatalog":
        return replace(
            self,
            quota_total=total,
            quota_unit=unit,
            quota_per_type=dict(per_type or {}),
        )

    @classmethod
    def from_rows(cls, rows: list[dict], **kwargs) -> "VmCatalog":
        types = tuple(
            VmType(
                name=str(r["name"]),
                family=str(r["family"]),
                vcpus=int(r["vcpus"]),
                bandwidth_mbps=float(r["bandwidth_mbps"]),
                price_per_hour=float(r["price_per_hour"]),
            )
            for r in rows
        )
        return cls(types=types, **kwargs)

    @classmethod
    def from_csv(cls, path: str | Path, **kwargs) -> "VmCatalog":
        with open(path, newline="") as fh:
            return cls.from_rows(list(csv.DictReader(fh)), **kwargs)

    @classmethod
    def from_json(cls, data: dict) -> "VmCatalog":
        return cls.from_rows(
            data["types"],
            family_mu=dict(data.get("family_mu", {})),
            usl_alpha=float(data.get("usl_alpha", 0.01)),
            usl_beta=float(data.get("usl_beta", 0.0)),
            quota_total=data.get("quota_total"),
            quota_unit=data.get("quota_unit", "vcpus"),
            quota_per_type=dict(data.get("quota_per_type", {})),
        )

    @classmethod
    def load(cls, path: str | Path) -> "VmCatalog":
        path = Path(path)
        if path.suffix.lower() == ".csv":
            return cls.from_csv(path)
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def default(cls) -> "VmCatalog":
        """The bundled 21-type EC2 reference catalog."""
        ref = resources.files("eposs.data").joinpath("ec2_catalog.csv")
        with ref.open(newline="") as fh:
            return cls.from_rows(list(csv.DictReader(fh)))


#: Named slices of the default catalog used throughout the experiments.
CATALOG_SUBSETS: dict[str, list[str]] = {
    "theta2": ["c4.large", "c4.xlarge"],
    "theta4": ["c4.large", "c4.xlarge", "c4.2xlarge", "c4.4xlarge"],
    "theta5": ["c4.large", "c4.xlarge", "c4.2xlarge", "c4.4xlarge", "c4.8xlarge"],
    "theta8": [
        "c5.large", "c5.xlarge", "c5.2xlarge", "c5.4xlarge",
        "c5.9xlarge", "c5.12xlarge", "c5.18xlarge", "c5.24xlarge",
    ],
    "theta13": [
        "c4.large", "c4.xlarge", "c4.2xlarge", "c4.4xlarge", "c4.8xlarge",
        "m5.large", "m5.xlarge", "m5.2xlarge", "m5.4xlarge", "m5.8xlarge",
        "m5.12xlarge", "m5.16xlarge", "m5.24xlarge",
    ],
    "theta21": [],  # empty marks "all types"
}


def catalog_subset(catalog: VmCatalog, name: str) -> VmCatalog:
    key = name.lower()
    if key not in CATALOG_SUBSETS:
        raise UnknownVmType(name)
    names = CATALOG_SUBSETS[key]
    return catalog if not names else catalog.subset(names)


def transfer_time(
    output_mb: float,
    src: VmType,
    dst: VmType,
    co_located: bool = False,
) -> float:
    """Seconds to move ``output_mb`` between two VMs.

    Data moves through shared storage at the lower of the two machines'
    bandwidths; co-located tasks use local storage and pay nothing.
    """
    if co_located or output_mb <= 0:
        return 0.0
    megabits = output_mb * 8.0
    return megabits / min(src.bandwidth_mbps, dst.bandwidth_mbps)


_HALFNORM_SIGMA = math.sqrt(math.pi / 2.0)  # sigma such that E|N(0, sigma)| = 1


@dataclass(frozen=True)
class ExecTimeModel:
    """Random execution time of each (task, VM type) pair.

    All four distribution kinds are parameterized so that the distribution
    mean equals the USL-scaled mean time:

    - deterministic: point mass at t
    - gamma: shape 1, scale t (exponential)
    - halfnormal: |N(0, sigma)| with sigma = t * sqrt(pi/2)
    - uniform: U[0, 2t]
    """

    catalog: VmCatalog
    distribution: str = "gamma"

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")

    def mean(self, task: Task, vmtype: VmType) -> float:
        return self.catalog.mean_time(task, vmtype)

    def quantile(self, task: Task, vmtype: VmType, alpha: float) -> float:
        """The alpha-quantile of the execution time of ``task`` on ``vmtype``."""
        if not 0.0 < alpha < 1.0:
            raise BadQuantileOrder(f"quantile order must lie in (0, 1), got {alpha}")
        return quantile_of_mean(self.distribution, self.mean(task, vmtype), alpha)

    def sample(self, task: Task, vmtype: VmType, rng: np.random.Generator, size=None):
        """Draw execution times; nonnegative, mean equal to ``mean(task, vmtype)``."""
        return sample_of_mean(self.distribution, self.mean(task, vmtype), rng, size)

    def time_table(self, workflow: Workflow, alpha: float | None = None) -> dict[tuple[str, str], float]:
        """Deterministic time table over all (task, type) pairs.

        With ``alpha`` given, entries are alpha-quantiles; otherwise means.
        """
        table: dict[tuple[str, str], float] = {}
        for task in workflow.tasks.values():
            for vt in self.catalog.types:
                t = self.mean(task, vt)
                if alpha is not None:
                    t = quantile_of_mean(self.distribution, t, alpha)
                table[(task.id, vt.name)] = t
        return table


def quantile_of_mean(distribution: str, mean: float, alpha: float) -> float:
    """Closed-form alpha-quantile of a distribution with the given mean."""
    if not 0.0 < alpha < 1.0:
        raise BadQuantileOrder(f"quantile order must lie in (0, 1), got {alpha}")
    if distribution == "deterministic":
        return mean
    if distribution == "gamma":
        return -mean * math.log1p(-alpha)
    if distribution == "uniform":
        return 2.0 * mean * alpha
    if distribution == "halfnormal":
        sigma = mean * _HALFNORM_SIGMA
        return sigma * math.sqrt(2.0) * float(erfinv(alpha))
    raise ValueError(f"unknown distribution {distribution!r}")


def sample_of_mean(distribution: str, mean, rng: np.random.Generator, size=None):
    """Draw from a distribution parameterized by its mean; vectorized over ``mean``."""
    mean = np.asarray(mean, dtype=float)
    shape = mean.shape if size is None else size
    if distribution == "deterministic":
        out = np.broadcast_to(mean, shape).copy()
    elif distribution == "gamma":
        out = rng.standard_exponential(shape) * mean
    elif distribution == "uniform":
        out = rng.random(shape) * 2.0 * mean
    elif distribution == "halfnormal":
        out = np.abs(rng.standard_normal(shape)) * (mean * _HALFNORM_SIGMA)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    if out.ndim == 0:
        return float(out)
    return out
