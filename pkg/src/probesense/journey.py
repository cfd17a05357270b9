"""Flow inference over archived records.

Devices are tracked by burned-in MAC when available; randomized devices are
tracked by their IE fingerprint instead, which stays stable across MAC
changes within one power cycle. A fingerprint shared by devices that are
provably in two places at once is ambiguous and excluded from flow counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_GAP_THRESHOLD_S = 300.0


@dataclass
class Visit:
    scanner_id: str
    first_seen: int
    last_seen: int


@dataclass
class Trajectory:
    device_key: tuple[str, str]  # ("mac", canonical) or ("fp", 32-hex)
    visits: list[Visit]
    ambiguous: bool = False


@dataclass
class FlowMatrix:
    window: tuple[int, int]
    flows: dict[tuple[str, str], int] = field(default_factory=dict)
    ambiguous_devices: int = 0


def _overlaps_at_distinct_scanners(records: list[dict]) -> bool:
    # O(n^2) interval check; groups are per-device-sized, so this is fine
    for i, a in enumerate(records):
        for b in records[i + 1:]:
            if a["scanner_id"] == b["scanner_id"]:
                continue
            if a["first_seen"] <= b["last_seen"] and b["first_seen"] <= a["last_seen"]:
                return True
    return False


def build_trajectories(records: list[dict],
                       gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S) -> list[Trajectory]:
    """Group archived records into per-device trajectories.

    Consecutive records at the same scanner extend the current visit.
    (Detections at one scanner separated by more than gap_threshold_s would
    nominally open a new visit, but consecutive visits must be at distinct
    scanners, so same-scanner records coalesce regardless of the gap; the
    threshold only matters once another scanner has been seen in between.)
    """
    groups: dict[tuple[str, str], list[dict]] = {}
    for rec in records:
        if rec.get("randomized"):
            key = ("fp", rec["ie_fingerprint"])
        else:
            key = ("mac", rec["mac"])
        groups.setdefault(key, []).append(rec)

    trajectories = []
    for key in sorted(groups):
        recs = sorted(groups[key], key=lambda r: (r["first_seen"], r["last_seen"]))
        ambiguous = key[0] == "fp" and _overlaps_at_distinct_scanners(recs)
        visits: list[Visit] = []
        for rec in recs:
            if visits and visits[-1].scanner_id == rec["scanner_id"]:
                visits[-1].last_seen = max(visits[-1].last_seen, rec["last_seen"])
            else:
                visits.append(Visit(rec["scanner_id"], rec["first_seen"], rec["last_seen"]))
        trajectories.append(Trajectory(device_key=key, visits=visits, ambiguous=ambiguous))
    return trajectories


def flows(trajectories: list[Trajectory], window: tuple[int, int]) -> FlowMatrix:
    """Aggregate consecutive-visit movements into directed scanner-pair counts.

    A movement falls inside the window when the destination visit starts in
    [from, to). Ambiguous groups contribute only to the ambiguous counter."""
    from_ms, to_ms = window
    matrix = FlowMatrix(window=window)
    for traj in trajectories:
        if traj.ambiguous:
            matrix.ambiguous_devices += 1
            continue
        for a, b in zip(traj.visits, traj.visits[1:]):
            if from_ms <= b.first_seen < to_ms:
                key = (a.scanner_id, b.scanner_id)
                matrix.flows[key] = matrix.flows.get(key, 0) + 1
    return matrix


def sankey_export(matrix: FlowMatrix) -> dict:
    nodes = sorted({s for pair in matrix.flows for s in pair})
    links = [
        {"source": src, "target": dst, "value": value}
        for (src, dst), value in sorted(matrix.flows.items())
    ]
    return {"nodes": [{"id": n} for n in nodes], "links": links}
