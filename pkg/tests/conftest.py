import pytest

from eposs import Task, VmCatalog, VmType, Workflow


def linear_catalog(*specs, **kwargs) -> VmCatalog:
    """Catalog with exact linear scaling (alpha=beta=0, mu=1) for hand math.

    Each spec is (name, vcpus, bandwidth_mbps, price_per_hour); all types
    share family "lab".
    """
    types = tuple(
        VmType(name=n, family="lab", vcpus=v, bandwidth_mbps=b, price_per_hour=p)
        for n, v, b, p in specs
    )
    kwargs.setdefault("family_mu", {"lab": 1.0})
    kwargs.setdefault("usl_alpha", 0.0)
    kwargs.setdefault("usl_beta", 0.0)
    return VmCatalog(types=types, **kwargs)


@pytest.fixture
def unit_catalog() -> VmCatalog:
    """One 1-vCPU type: execution times equal base runtimes."""
    return linear_catalog(("unit", 1, 1000.0, 0.36))


@pytest.fixture
def two_type_catalog() -> VmCatalog:
    """A slow cheap type and a 4x faster, costlier one."""
    return linear_catalog(
        ("small", 1, 1000.0, 0.10),
        ("big", 4, 1000.0, 0.60),
    )


def chain_workflow(*runtimes, output_mb=0.0) -> Workflow:
    tasks = [Task(id=f"t{i}", runtime=r, output_mb=output_mb) for i, r in enumerate(runtimes)]
    edges = [(f"t{i}", f"t{i+1}") for i in range(len(runtimes) - 1)]
    return Workflow(tasks, edges)
