"""Compile a propagation refutation into an exact algebraic certificate that
the instance admits no satisfying operator assignment, and re-check such
certificates from scratch.

A certificate is an ordered list of sections, one per removed
(variable, value) pair, each carrying its derivation chain together with
Bezout witnesses (q_i, c_i) for the membership-polynomial differences that
arise when adjacent chain identities are joined, followed by a collapse
script that shrinks the per-value exclusion products down to the empty
product, i.e. the contradiction I = 0.

The checker trusts nothing from the builder: it replays every chain image
against the instance, re-verifies every Bezout identity modulo x^d - 1 with
exact cyclotomic arithmetic, and re-expands every collapse subtraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from .consistency import SlacResult
from .csp_core import Instance, instance_digest
from .cyclotomic import CycNum, UniPoly, embed
from .fourier import complement, dom_difference_inverse, dom_polynomial, root_product

FORMAT = "gap-certificate/1"


@dataclass(frozen=True)
class CertStep:
    constraint: int
    src_pos: int
    tgt_pos: int
    var: str
    values: tuple
    inverse: tuple | None  # (q: UniPoly, c: CycNum) for non-terminal steps

    def to_obj(self) -> dict:
        obj = {
            "constraint": self.constraint,
            "src_pos": self.src_pos,
            "tgt_pos": self.tgt_pos,
            "var": self.var,
            "values": list(self.values),
        }
        if self.inverse is not None:
            q, c = self.inverse
            obj["q"] = q.to_obj()
            obj["c"] = c.to_obj()
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "CertStep":
        inverse = None
        if "q" in obj:
            inverse = (UniPoly.from_obj(obj["q"]), CycNum.from_obj(obj["c"]))
        return cls(
            int(obj["constraint"]),
            int(obj["src_pos"]),
            int(obj["tgt_pos"]),
            str(obj["var"]),
            tuple(int(a) for a in obj["values"]),
            inverse,
        )


@dataclass(frozen=True)
class CertSection:
    var: str
    value: int
    steps: tuple

    def to_obj(self) -> dict:
        return {"var": self.var, "value": self.value, "steps": [s.to_obj() for s in self.steps]}

    @classmethod
    def from_obj(cls, obj: dict) -> "CertSection":
        return cls(
            str(obj["var"]),
            int(obj["value"]),
            tuple(CertStep.from_obj(s) for s in obj["steps"]),
        )


@dataclass(frozen=True)
class GapCertificate:
    digest: str
    d: int
    variable: str  # the variable whose whole domain is excluded
    sections: tuple
    collapse: tuple  # of (base tuple, r1, r2)

    def to_obj(self) -> dict:
        return {
            "format": FORMAT,
            "digest": self.digest,
            "d": self.d,
            "variable": self.variable,
            "sections": [s.to_obj() for s in self.sections],
            "collapse": [
                {"base": list(base), "r1": r1, "r2": r2} for base, r1, r2 in self.collapse
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=1)

    @classmethod
    def from_obj(cls, obj: dict) -> "GapCertificate":
        if obj.get("format") != FORMAT:
            raise ValueError(f"unsupported certificate format {obj.get('format')!r}")
        return cls(
            str(obj["digest"]),
            int(obj["d"]),
            str(obj["variable"]),
            tuple(CertSection.from_obj(s) for s in obj["sections"]),
            tuple(
                (tuple(int(a) for a in e["base"]), int(e["r1"]), int(e["r2"]))
                for e in obj["collapse"]
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "GapCertificate":
        return cls.from_obj(json.loads(text))


@lru_cache(maxsize=None)
def _inverse_witness(d: int, values: tuple) -> tuple:
    return dom_difference_inverse(frozenset(values), d)


def collapse_script(d: int) -> tuple:
    """Deterministic shrink schedule from the d per-value exclusion sets down
    to the empty set.  Each entry (S, r1, r2) consumes the established sets
    S + {r1} and S + {r2} and establishes S."""
    steps: list[tuple] = []
    established = {frozenset(range(d)) - {k} for k in range(d)}

    def need(S: frozenset):
        if S in established:
            return
        missing = sorted(set(range(d)) - S)
        r1, r2 = missing[0], missing[1]
        need(S | {r1})
        need(S | {r2})
        steps.append((tuple(sorted(S)), r1, r2))
        established.add(S)

    need(frozenset())
    return tuple(steps)


def build_certificate(inst: Instance, result: SlacResult) -> GapCertificate:
    """Compile the chains of a refuted propagation run into a certificate.

    Sections follow removal order and stop at the first fully emptied
    variable; each non-terminal chain entry gets its Bezout witness.
    """
    if result.consistent:
        raise ValueError("nothing to certify: propagation left the instance consistent")
    domains = {v: set(range(inst.d)) for v in inst.variables}
    sections = []
    emptied = None
    for (v, a), chain in result.chains.items():
        steps = []
        if not chain.is_contradiction():
            raise ValueError(f"chain for ({v}, {a}) does not end in a contradiction")
        for i, st in enumerate(chain.steps):
            inverse = None
            if i < len(chain.steps) - 1:
                inverse = _inverse_witness(inst.d, tuple(sorted(st.values)))
            steps.append(
                CertStep(st.constraint, st.src_pos, st.tgt_pos, st.var, st.values, inverse)
            )
        sections.append(CertSection(v, a, tuple(steps)))
        domains[v].discard(a)
        if not domains[v]:
            emptied = v
            break
    if emptied is None:
        raise ValueError("refutation chains never empty a variable domain")
    return GapCertificate(
        digest=instance_digest(inst),
        d=inst.d,
        variable=emptied,
        sections=tuple(sections),
        collapse=collapse_script(inst.d),
    )


@dataclass(frozen=True)
class CheckResult:
    accepted: bool
    location: tuple = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted

    def describe(self) -> str:
        if self.accepted:
            return "ACCEPT"
        where = ":".join(str(x) for x in self.location)
        return f"REJECT at {where}: {self.reason}"


def _reject(location: tuple, reason: str) -> CheckResult:
    return CheckResult(False, location, reason)


def check_certificate(inst: Instance, cert: GapCertificate) -> CheckResult:
    """Re-verify a certificate with no trust in its builder.

    Checks, in order: the instance digest; that every chain step is licensed
    by a constraint of the instance, its recorded set being exactly the image
    of the previous set through the relation filtered by the replayed
    domains; that every Bezout witness satisfies p*q = c modulo x^d - 1 with
    c nonzero; that every section terminates in the empty set; and that the
    collapse script reaches the empty product from the per-value exclusions
    of the named variable.
    """
    if cert.digest != instance_digest(inst):
        return _reject(("digest",), "certificate was issued for a different instance")
    d = inst.d
    if cert.d != d:
        return _reject(("domain",), f"certificate domain size {cert.d} != instance {d}")
    if cert.variable not in inst.variables:
        return _reject(("variable",), f"unknown variable {cert.variable!r}")
    circle = UniPoly.x_pow_minus_one(d)
    remaining = {v: set(range(d)) for v in inst.variables}

    for k, sec in enumerate(cert.sections):
        loc = ("section", k)
        if sec.var not in remaining:
            return _reject(loc, f"unknown variable {sec.var!r}")
        if sec.value not in remaining[sec.var]:
            return _reject(loc, f"value {sec.value} already excluded for {sec.var!r}")
        if not sec.steps:
            return _reject(loc, "empty derivation chain")
        eff = {v: frozenset(vals) for v, vals in remaining.items()}
        eff[sec.var] = frozenset({sec.value})
        cur_var, cur_set = sec.var, frozenset({sec.value})
        for i, st in enumerate(sec.steps):
            sloc = loc + ("step", i)
            if not 0 <= st.constraint < len(inst.constraints):
                return _reject(sloc, f"no constraint with index {st.constraint}")
            c = inst.constraints[st.constraint]
            rel = inst.relation_of(c)
            if not (0 <= st.src_pos < rel.arity and 0 <= st.tgt_pos < rel.arity):
                return _reject(sloc, "position outside the constraint scope")
            if c.scope[st.src_pos] != cur_var:
                return _reject(sloc, "source position does not carry the current variable")
            if c.scope[st.tgt_pos] != st.var:
                return _reject(sloc, "target position does not carry the step variable")
            survivors = [
                t
                for t in rel.tuples
                if t[st.src_pos] in cur_set
                and all(t[j] in eff[c.scope[j]] for j in range(rel.arity))
            ]
            image = frozenset(t[st.tgt_pos] for t in survivors)
            if image != frozenset(st.values):
                return _reject(sloc, "recorded set is not the licensed image")
            terminal = i == len(sec.steps) - 1
            if terminal:
                if image:
                    return _reject(sloc, "chain does not terminate in the empty set")
                if st.inverse is not None:
                    return _reject(sloc, "terminal step must not carry a witness")
            else:
                if not image:
                    return _reject(sloc, "non-terminal step derived the empty set")
                if st.inverse is None:
                    return _reject(sloc, "missing Bezout witness")
                q, cc = st.inverse
                if cc.is_zero():
                    return _reject(sloc, "witness constant is zero")
                p = dom_polynomial(image, d) - dom_polynomial(complement(image, d), d)
                if not ((p * q - UniPoly.constant(cc)) % circle).is_zero():
                    return _reject(sloc, "Bezout identity fails modulo x^d - 1")
            cur_var, cur_set = st.var, image
        remaining[sec.var].discard(sec.value)

    if remaining[cert.variable]:
        return _reject(
            ("variable",),
            f"domain of {cert.variable!r} retains {sorted(remaining[cert.variable])}",
        )

    established = {frozenset(range(d)) - {k} for k in range(d)}
    for j, (base, r1, r2) in enumerate(cert.collapse):
        loc = ("collapse", j)
        S = frozenset(base)
        if len(base) != len(S):
            return _reject(loc, "duplicate entries in the base set")
        if r1 == r2 or r1 in S or r2 in S or not (0 <= r1 < d and 0 <= r2 < d):
            return _reject(loc, "degenerate shrink pair")
        if S | {r1} not in established or S | {r2} not in established:
            return _reject(loc, "references an equation that is not established")
        lhs = root_product(S | {r1}, d) - root_product(S | {r2}, d)
        rhs = root_product(S, d) * (embed(r2, d) - embed(r1, d))
        if lhs != rhs:
            return _reject(loc, "shrink subtraction is not coefficient-exact")
        established.add(S)
    if frozenset() not in established:
        return _reject(("collapse",), "script never reaches the empty product")
    return CheckResult(True)


def certify(inst: Instance, result: SlacResult | None = None):
    """Convenience: run propagation if needed, build, and self-check.

    Returns (certificate, check result) or raises ValueError when the
    instance is consistent under propagation.
    """
    from .consistency import slac

    if result is None:
        result = slac(inst)
    cert = build_certificate(inst, result)
    return cert, check_certificate(inst, cert)
