"""Check results and reports shared by the verifiers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckResult:
    check: str
    passed: bool
    residual: float
    witness: dict | None = None

    def to_dict(self) -> dict:
        out = {"check_name": self.check, "pass": self.passed,
               "max_residual": self.residual}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    scenario: str
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, check: str, passed: bool, residual: float,
            witness: dict | None = None) -> CheckResult:
        result = CheckResult(check, bool(passed), float(residual), witness)
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.check == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario,
                "checks": [c.to_dict() for c in self.checks],
                "pass": self.passed}
