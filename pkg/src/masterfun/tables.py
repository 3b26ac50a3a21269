"""Indexed stores of expansion coefficients with disk persistence.

A table holds exact rational-function entries indexed by (k, j) for the
one-variable families and (k, j, l) for the two-variable family, together
with provenance metadata.  Serialization is deterministic: entries are
sorted, values carry exact integer term lists, and the content hash of a
file is reproducible across runs.
"""

from __future__ import annotations

import hashlib
import json

from .ring import ZERO, RingElem

KINDS = ("a", "c", "cp", "cbarp", "c2")
REGIMES = ("generic", "kp=k+a", "kp=k")


class CoeffTable:
    def __init__(self, kind: str, order: int, regime: str = "generic",
                 entries=None, meta=None):
        if kind not in KINDS:
            raise ValueError(f"unknown table kind {kind!r}")
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {regime!r}")
        self.kind = kind
        self.order = order
        self.regime = regime
        self.entries = dict(entries or {})
        self.meta = dict(meta or {})

    # -- access --------------------------------------------------------------

    def get(self, *idx) -> RingElem:
        return self.entries.get(tuple(idx), ZERO)

    def set(self, idx, value: RingElem):
        self.entries[tuple(idx)] = value

    def indices(self):
        return sorted(self.entries)

    def __len__(self):
        return len(self.entries)

    def map_values(self, fn) -> "CoeffTable":
        return CoeffTable(
            self.kind,
            self.order,
            self.regime,
            {k: fn(v) for k, v in self.entries.items()},
            self.meta,
        )

    def in_regime(self, regime: str) -> "CoeffTable":
        """Substitute the twist parameters for a special regime."""
        if regime == self.regime:
            return self
        if self.regime != "generic":
            raise ValueError("regime substitution starts from the generic table")
        if regime == "kp=k+a":
            out = self.map_values(lambda v: v.subs_kappap_eq_kappa_plus_alpha())
        elif regime == "kp=k":
            out = self.map_values(lambda v: v.subs_kappap_eq_kappa())
        else:
            raise ValueError(f"unknown regime {regime!r}")
        out.regime = regime
        return out

    def triangularity_violations(self):
        """Indices whose entries must vanish by the grading and do not."""
        bad = []
        for idx, val in self.entries.items():
            if self.kind == "c2":
                k, j, l = idx
                degenerate = j + l >= k
            else:
                k, j = idx
                degenerate = j >= k
            if degenerate and not val.is_zero():
                bad.append(idx)
        return bad

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        entries = [
            {"indices": list(idx), "value": self.entries[idx].json_terms(),
             "text": self.entries[idx].text()}
            for idx in self.indices()
        ]
        return {
            "kind": self.kind,
            "order": self.order,
            "params": {"regime": self.regime},
            "entries": entries,
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoeffTable":
        entries = {
            tuple(e["indices"]): RingElem.from_json_terms(e["value"])
            for e in data["entries"]
        }
        return cls(
            data["kind"],
            data["order"],
            data["params"]["regime"],
            entries,
            data.get("meta", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    # -- emitters ---------------------------------------------------------------

    def to_csv(self) -> str:
        head = "k,j,l,value" if self.kind == "c2" else "k,j,value"
        lines = [head]
        for idx in self.indices():
            lines.append(
                ",".join(str(i) for i in idx) + ',"' + self.entries[idx].text() + '"'
            )
        return "\n".join(lines) + "\n"

    def to_latex(self, relation_renderer=None) -> str:
        """LaTeX tabular; ``relation_renderer(idx) -> str or None`` may
        supply a symbolic form (used for the two-variable table, whose
        entries are displayed through the one-variable coefficients)."""
        name = {
            "a": "a", "c": "c", "cp": "c'", "cbarp": r"\bar{c}'", "c2": "c",
        }[self.kind]
        lines = [r"\begin{tabular}{ll}"]
        for idx in self.indices():
            if self.kind == "c2":
                label = "%s_{%d|%d,%d}" % (name, idx[0], idx[1], idx[2])
            else:
                label = "%s_{%d|%d}" % (name, idx[0], idx[1])
            body = None
            if relation_renderer is not None:
                body = relation_renderer(idx)
            if body is None:
                body = self.entries[idx].latex()
            lines.append(f"${label}$ & ${body}$ \\\\")
        lines.append(r"\end{tabular}")
        return "\n".join(lines) + "\n"
