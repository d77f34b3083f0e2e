"""Certificate and report containers shared by the certification pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field

from .identity import ZeroCertificate

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass(frozen=True)
class Certificate:
    """Outcome of one named identity check."""

    name: str
    status: str
    witness: str | None = None
    mode: str = "exact"

    @property
    def passed(self) -> bool:
        return self.status == PASS


def from_zero(name: str, cert: ZeroCertificate, witness_prefix: str = "") -> Certificate:
    if cert.zero:
        return Certificate(name, PASS, mode=cert.mode)
    witness = (witness_prefix + ": " if witness_prefix else "") + (cert.witness or "")
    return Certificate(name, FAIL, witness=witness, mode=cert.mode)


def skipped(name: str, reason: str) -> Certificate:
    return Certificate(name, SKIPPED, witness=reason)


@dataclass
class Report:
    """A bundle of certificates produced by one operation."""

    certificates: list[Certificate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.certificates)

    def add(self, cert: Certificate) -> None:
        self.certificates.append(cert)

    def failures(self) -> list[Certificate]:
        return [c for c in self.certificates if c.status == FAIL]

    def find(self, name: str) -> Certificate:
        for c in self.certificates:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        lines = []
        for c in self.certificates:
            line = f"[{c.status.upper():>7}] {c.name}"
            if c.witness:
                line += f"  -- {c.witness}"
            lines.append(line)
        return "\n".join(lines)
