"""Domain primitives for probe-request analytics.

MAC address handling, OUI vendor resolution, and information-element
fingerprinting. Everything here is a pure function over immutable data;
the OuiDatabase is read-only after load.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

UNKNOWN_VENDOR = "unknown"

_MAC_RE = re.compile(r"^[0-9A-Fa-f]{2}(:[0-9A-Fa-f]{2}){5}$")


class MacKind(Enum):
    RANDOMIZED = "randomized"
    BURNED_IN = "burned_in"


@dataclass(frozen=True)
class MacAddress:
    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise ValueError(f"MAC address needs 6 octets, got {len(self.octets)}")

    @classmethod
    def from_str(cls, text: str) -> "MacAddress":
        if not _MAC_RE.match(text):
            raise ValueError(f"not a MAC address: {text!r}")
        return cls(bytes(int(p, 16) for p in text.split(":")))

    def __str__(self) -> str:
        return ":".join(f"{b:02X}" for b in self.octets)

    @property
    def canonical(self) -> str:
        return str(self)

    def is_randomized(self) -> bool:
        # locally-administered unicast: bit 1 set, group bit clear
        first = self.octets[0]
        return bool(first & 0x02) and not (first & 0x01)

    def oui_prefix(self) -> bytes:
        return self.octets[:3]


def classify_mac(mac: MacAddress) -> MacKind:
    return MacKind.RANDOMIZED if mac.is_randomized() else MacKind.BURNED_IN


def fingerprint(ie_bytes: bytes, vendor_ie_bytes: bytes) -> str:
    """md5 over IE bytes followed by vendor-specific bytes, lowercase hex."""
    return hashlib.md5(bytes(ie_bytes) + bytes(vendor_ie_bytes)).hexdigest()


@dataclass
class OuiDatabase:
    entries: dict[bytes, str] = field(default_factory=dict)
    mobile_vendors: set[str] = field(default_factory=set)

    @classmethod
    def load(cls, oui_csv: str | Path, allowlist: str | Path | None = None) -> "OuiDatabase":
        """Load `XX:YY:ZZ,VendorName` lines plus an optional one-vendor-per-line
        mobile allowlist. `#` comments and blank lines are skipped."""
        entries: dict[bytes, str] = {}
        for line in Path(oui_csv).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            prefix_text, _, vendor = line.partition(",")
            prefix = bytes(int(p, 16) for p in prefix_text.strip().split(":"))
            if len(prefix) != 3:
                raise ValueError(f"bad OUI prefix: {prefix_text!r}")
            entries[prefix] = vendor.strip()
        mobile: set[str] = set()
        if allowlist is not None:
            for line in Path(allowlist).read_text().splitlines():
                line = line.strip()
                if line and not line.startswith("#"):
                    mobile.add(line)
        return cls(entries=entries, mobile_vendors=mobile)

    def vendor_lookup(self, mac: MacAddress) -> str:
        """Vendor behind the MAC's OUI prefix. Randomized addresses carry no
        meaningful OUI, so they resolve to the unknown sentinel directly."""
        if mac.is_randomized():
            return UNKNOWN_VENDOR
        return self.entries.get(mac.oui_prefix(), UNKNOWN_VENDOR)

    def is_mobile_vendor(self, mac: MacAddress) -> bool:
        """Whether the MAC should be treated as a phone. Randomized MACs are
        always retained: their vendor is unknowable but they are phones in
        practice, and dropping them would wreck randomized-device counting."""
        if mac.is_randomized():
            return True
        return self.vendor_lookup(mac) in self.mobile_vendors


@dataclass(frozen=True)
class ProbeObservation:
    """One captured probe-request packet."""

    mac: MacAddress
    rssi_dbm: int
    ssids: tuple[str, ...]
    ie_bytes: bytes
    vendor_ie_bytes: bytes
    captured_at_ms: int
    scanner_id: str

    def __post_init__(self):
        if self.captured_at_ms <= 0:
            raise ValueError("captured_at_ms must be a positive epoch time")
        # dedupe ssids preserving order
        seen: list[str] = []
        for s in self.ssids:
            if s not in seen:
                seen.append(s)
        if len(seen) != len(self.ssids):
            object.__setattr__(self, "ssids", tuple(seen))

    def ie_fingerprint(self) -> str:
        return fingerprint(self.ie_bytes, self.vendor_ie_bytes)
