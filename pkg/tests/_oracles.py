"""Independent brute-force oracles used by property and acceptance tests."""

from itertools import product

from eposs import Schedule, VmInstance, compute_timeline, expected_cost, rank_order


def enumerate_schedules(workflow, catalog, times, max_instances):
    """Every complete schedule over at most ``max_instances`` VMs.

    Tasks are assigned in B-Rank order, so per-VM queues follow that order;
    each used instance independently takes any catalog type.
    """
    order = rank_order(workflow, catalog, times)
    results = []
    for assignment in product(range(max_instances), repeat=len(order)):
        used = sorted(set(assignment))
        for type_combo in product(catalog.types, repeat=len(used)):
            slot_type = dict(zip(used, type_combo))
            queues = {slot: [] for slot in used}
            for tid, slot in zip(order, assignment):
                queues[slot].append(tid)
            schedule = Schedule(instances=tuple(
                VmInstance(index=i, vmtype=slot_type[slot], task_list=tuple(queues[slot]))
                for i, slot in enumerate(used)
            ))
            timeline = compute_timeline(schedule, workflow, times)
            results.append((schedule, timeline.makespan, expected_cost(schedule, timeline)))
    return results


def quota_ok_by_overlap(spans, quota_total, quota_unit, quota_per_type):
    """Direct interval-overlap quota check over half-open spans [start, stop).

    At every span start, counts the resources of all spans covering that
    instant; a span ending exactly there does not overlap it.
    """
    for probe, _, _ in spans:
        used = 0.0
        by_type: dict[str, int] = {}
        for start, stop, vmtype in spans:
            if start <= probe < stop:
                used += vmtype.vcpus if quota_unit == "vcpus" else 1
                by_type[vmtype.name] = by_type.get(vmtype.name, 0) + 1
        if quota_total is not None and used > quota_total:
            return False
        for name, count in by_type.items():
            cap = quota_per_type.get(name)
            if cap is not None and count > cap:
                return False
    return True


def dominance_filter(points):
    """O(n^2) non-dominated filter in minimization sense, duplicates collapsed."""
    kept = []
    for i, p in enumerate(points):
        dominated = False
        for j, q in enumerate(points):
            if i == j:
                continue
            if q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1]):
                dominated = True
                break
            if q[0] == p[0] and q[1] == p[1] and j < i:
                dominated = True
                break
        if not dominated:
            kept.append(p)
    return kept
