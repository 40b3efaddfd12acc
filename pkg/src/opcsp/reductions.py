"""Reductions between constraint languages that preserve both classical and
operator satisfiability: existential gadget expansion and equality collapse,
commutativity padding, endomorphism cores, constant anchoring, subdomain
restriction, and congruence factoring, together with the polynomial
transports that carry operator assignments across the last two.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from .csp_core import (
    EQUALITY,
    Instance,
    Language,
    Relation,
    equality_relation,
    full_relation,
    make_instance,
)
from .cyclotomic import CycNum, UniPoly, embed
from .operators import OperatorAssignment, apply_unipoly_matrix

PP_GUARD = 10 ** 8
ENDO_GUARD = 8


# ---------------------------------------------------------------------------
# pp-formulas and gadgets


@dataclass(frozen=True)
class PPAtom:
    rel: str  # language relation name or EQUALITY
    vars: tuple  # indices: 0..r-1 outputs, r..r+s-1 existentials


@dataclass(frozen=True)
class PPFormula:
    """Existentially quantified conjunction of language atoms and equalities."""

    arity: int
    exist: int
    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a pp-formula needs at least one atom")
        if self.arity < 1 or self.exist < 0:
            raise ValueError("formula arity must be positive and exist count nonnegative")
        total = self.arity + self.exist
        for atom in self.atoms:
            for idx in atom.vars:
                if not 0 <= idx < total:
                    raise ValueError(f"variable index {idx} out of range 0..{total - 1}")

    def to_obj(self) -> dict:
        return {
            "arity": self.arity,
            "exists": self.exist,
            "atoms": [{"rel": a.rel, "vars": list(a.vars)} for a in self.atoms],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "PPFormula":
        return cls(
            int(obj["arity"]),
            int(obj["exists"]),
            tuple(PPAtom(str(a["rel"]), tuple(int(i) for i in a["vars"])) for a in obj["atoms"]),
        )


def pp_evaluate(formula: PPFormula, language: Language) -> Relation:
    """Models of the formula over the language's domain, by brute force."""
    d = language.d
    r, s = formula.arity, formula.exist
    if d ** (r + s) > PP_GUARD:
        raise ValueError("pp evaluation space exceeds the guard")
    for atom in formula.atoms:
        if atom.rel != EQUALITY:
            if atom.rel not in language:
                raise ValueError(f"atom references unknown relation {atom.rel!r}")
            if language[atom.rel].arity != len(atom.vars):
                raise ValueError(f"atom arity mismatch on {atom.rel!r}")
        elif len(atom.vars) != 2:
            raise ValueError("equality atoms are binary")

    def holds(values) -> bool:
        for atom in formula.atoms:
            point = tuple(values[i] for i in atom.vars)
            if atom.rel == EQUALITY:
                if point[0] != point[1]:
                    return False
            elif point not in language[atom.rel]:
                return False
        return True

    tuples = set()
    for outer in product(range(d), repeat=r):
        for inner in product(range(d), repeat=s):
            if holds(outer + inner):
                tuples.add(outer)
                break
    return Relation(r, d, frozenset(tuples))


def _gadget_blocks(inst: Instance, formula: PPFormula, target: str) -> dict:
    """Fresh existential variable names per replaced constraint, deterministic."""
    existing = set(inst.variables)
    blocks: dict[int, list] = {}
    for ci, c in enumerate(inst.constraints):
        if c.rel != target:
            continue
        names = []
        for k in range(formula.exist):
            name = f"{c.scope[0]}-g{ci}-t{k}"
            while name in existing:
                name += "'"
            existing.add(name)
            names.append(name)
        blocks[ci] = names
    return blocks


def gadgetize(inst: Instance, formula: PPFormula, target: str) -> Instance:
    """Replace every constraint on the target relation by the formula's atoms
    over its scope plus a fresh block of existential variables."""
    if target not in inst.language:
        raise ValueError(f"instance language has no relation {target!r}")
    base_lang = inst.language.without(target)
    defined = pp_evaluate(formula, base_lang)
    if defined != inst.language[target]:
        raise ValueError("formula does not define the target relation")
    rels = dict(base_lang.relations)
    rels.setdefault(EQUALITY, equality_relation(inst.d))
    blocks = _gadget_blocks(inst, formula, target)
    variables = list(inst.variables)
    constraints: list[tuple] = []
    for ci, c in enumerate(inst.constraints):
        if c.rel != target:
            constraints.append((c.scope, c.rel))
            continue
        block = blocks[ci]
        variables.extend(block)
        lookup = list(c.scope) + block
        for atom in formula.atoms:
            constraints.append((tuple(lookup[i] for i in atom.vars), atom.rel))
    return make_instance(inst.d, variables, constraints, rels)


def collapse_equalities(inst: Instance) -> Instance:
    """Union equality-constrained variables, representative being the member
    earliest in declaration order; rewrite scopes and drop the equalities."""
    index = {v: i for i, v in enumerate(inst.variables)}
    parent = list(range(len(inst.variables)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int):
        ri, rj = find(i), find(j)
        if ri == rj:
            return
        lo, hi = min(ri, rj), max(ri, rj)
        parent[hi] = lo

    has_equality = EQUALITY in inst.language
    for c in inst.constraints:
        if c.rel == EQUALITY:
            union(index[c.scope[0]], index[c.scope[1]])
    rep = {v: inst.variables[find(index[v])] for v in inst.variables}
    variables = [v for v in inst.variables if rep[v] == v]
    constraints = [
        (tuple(rep[v] for v in c.scope), c.rel)
        for c in inst.constraints
        if c.rel != EQUALITY
    ]
    rels = dict(inst.language.relations)
    if has_equality:
        rels.pop(EQUALITY, None)
    return make_instance(inst.d, variables, constraints, rels)


def add_commutativity_gadget(inst: Instance) -> Instance:
    """Pad every constraint scope with full binary constraints on all its
    position pairs, so that restriction of operator assignments stays within
    commuting families."""
    full_name = None
    full = full_relation(2, inst.d)
    for name in sorted(inst.language.relations):
        if inst.language[name] == full:
            full_name = name
            break
    if full_name is None:
        raise ValueError("language does not contain the full binary relation")
    constraints = [(c.scope, c.rel) for c in inst.constraints]
    for c in inst.constraints:
        for i, j in combinations(range(len(c.scope)), 2):
            constraints.append(((c.scope[i], c.scope[j]), full_name))
    return make_instance(inst.d, inst.variables, constraints, dict(inst.language.relations))


# ---------------------------------------------------------------------------
# Unary maps, interpolation


@dataclass(frozen=True)
class UnaryMap:
    d_from: int
    d_to: int
    table: tuple

    def __post_init__(self):
        if len(self.table) != self.d_from:
            raise ValueError("table must be total on the source domain")
        for v in self.table:
            if not 0 <= v < self.d_to:
                raise ValueError(f"table value {v} outside 0..{self.d_to - 1}")

    def __call__(self, k: int) -> int:
        return self.table[k]

    def image(self) -> tuple:
        return tuple(sorted(set(self.table)))

    def is_injective(self) -> bool:
        return len(set(self.table)) == self.d_from

    def compose(self, inner: "UnaryMap") -> "UnaryMap":
        if inner.d_to != self.d_from:
            raise ValueError("maps do not compose")
        return UnaryMap(inner.d_from, self.d_to, tuple(self.table[v] for v in inner.table))

    def apply_tuple(self, t) -> tuple:
        return tuple(self.table[a] for a in t)

    def apply_relation(self, rel: Relation) -> Relation:
        return Relation(rel.arity, self.d_to, frozenset(self.apply_tuple(t) for t in rel.tuples))

    @classmethod
    def identity(cls, d: int) -> "UnaryMap":
        return cls(d, d, tuple(range(d)))


def lagrange_unipoly(nodes, values) -> UniPoly:
    """Unique interpolant of degree < len(nodes) through (nodes[i], values[i]),
    with exact cyclotomic coefficients."""
    if len(nodes) != len(values):
        raise ValueError("need one value per node")
    total = UniPoly()
    x = UniPoly.x()
    for k, (node, value) in enumerate(zip(nodes, values)):
        basis = UniPoly.constant(1)
        denom = CycNum.one()
        for j, other in enumerate(nodes):
            if j == k:
                continue
            basis = basis * (x - UniPoly.constant(other))
            denom = denom * (node - other)
        total = total + basis * (CycNum._coerce(value) / denom)
    return total


def interpolate_map(pi: UnaryMap) -> UniPoly:
    """Degree < e polynomial sending each e-th root of unity to the image
    root of unity prescribed by an injective map into a d-element domain."""
    if not pi.is_injective():
        raise ValueError("operator transport requires an injective map")
    e, d = pi.d_from, pi.d_to
    nodes = [embed(k, e) for k in range(e)]
    values = [embed(pi(k), d) for k in range(e)]
    p = lagrange_unipoly(nodes, values)
    for node, value in zip(nodes, values):
        if p.eval(node) != value:
            raise AssertionError("interpolation failed to reproduce a node")
    return p


def indicator_interpolant(members, d: int) -> UniPoly:
    """Interpolant over all of U_d taking 1 on the members and 0 elsewhere."""
    nodes = [embed(k, d) for k in range(d)]
    values = [CycNum.one() if k in set(members) else CycNum.zero() for k in range(d)]
    return lagrange_unipoly(nodes, values)


def transport_assignment(p: UniPoly, assignment: OperatorAssignment) -> OperatorAssignment:
    return assignment.map(lambda M: apply_unipoly_matrix(p, M))


# ---------------------------------------------------------------------------
# Endomorphisms, cores, constants


def endomorphisms(language: Language) -> list[UnaryMap]:
    """All unary maps preserving every relation, in lexicographic order."""
    d = language.d
    if d > ENDO_GUARD:
        raise ValueError(f"endomorphism enumeration is guarded at d <= {ENDO_GUARD}")
    rels = [language[name] for name in sorted(language.relations)]
    out = []
    for table in product(range(d), repeat=d):
        ok = True
        for rel in rels:
            for t in rel.tuples:
                if tuple(table[a] for a in t) not in rel.tuples:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(UnaryMap(d, d, table))
    return out


def core(language: Language) -> tuple[UnaryMap, Language, UnaryMap]:
    """Idempotent minimum-image endomorphism, the relabeled core language,
    and the relabeling map.

    The returned relabeling is total on the source domain (it factors through
    the idempotent endomorphism) and restricts to an order-preserving
    bijection from the endomorphism's image onto 0..e-1.
    """
    endos = endomorphisms(language)
    rho = min(endos, key=lambda m: (len(set(m.table)), m.table))
    power = rho
    while power.compose(power) != power:
        power = power.compose(rho)
    rho = power
    image = sorted(set(rho.table))
    e = len(image)
    rank = {v: i for i, v in enumerate(image)}
    relabel = UnaryMap(language.d, e, tuple(rank[v] for v in rho.table))
    core_rels = {name: relabel.apply_relation(language[name]) for name in language.relations}
    return rho, Language(e, core_rels), relabel


def section_of_core(language: Language, rho: UnaryMap) -> UnaryMap:
    """Injective map 0..e-1 -> image of rho inverting the core relabeling."""
    image = sorted(set(rho.table))
    return UnaryMap(len(image), language.d, tuple(image))


def core_instance(inst: Instance):
    """Relabel an instance onto the core of its language.

    Returns the relabeled instance and an operator transport.  The transport
    applies the interpolant of the total relabeling map (endomorphism followed
    by the rank bijection); it carries satisfying assignments to satisfying
    assignments because relations are closed under their endomorphisms.
    """
    lang = Language(inst.d, dict(inst.language.relations))
    rho, core_lang, relabel = core(lang)
    mapped = make_instance(
        core_lang.d,
        inst.variables,
        [(c.scope, c.rel) for c in inst.constraints],
        dict(core_lang.relations),
    )
    nodes = [embed(k, inst.d) for k in range(inst.d)]
    values = [embed(relabel(k), core_lang.d) for k in range(inst.d)]
    poly = lagrange_unipoly(nodes, values)

    def transport(assignment: OperatorAssignment) -> OperatorAssignment:
        return transport_assignment(poly, assignment)

    return mapped, transport


def endomorphism_relation(language: Language) -> Relation:
    """Arity-d relation listing every endomorphism's value table.

    For a core language every listed tuple is a permutation of the whole
    domain; a non-core input is rejected.
    """
    endos = endomorphisms(language)
    d = language.d
    tuples = set()
    for m in endos:
        if len(set(m.table)) != d:
            raise ValueError("language is not a core: found a non-permutation endomorphism")
        tuples.add(m.table)
    return Relation(d, d, frozenset(tuples))


ANCHOR_PREFIX = "anchor"


def constants_reduction(inst: Instance) -> Instance:
    """Eliminate constant (singleton unary) constraints: anchor variables
    v_0..v_{d-1}, one endomorphism-table constraint tying them together, and
    an equality per former constant constraint."""
    d = inst.d
    constant_names = {
        name
        for name, rel in inst.language.relations.items()
        if rel.arity == 1 and len(rel.tuples) == 1
    }
    gamma = {n: r for n, r in inst.language.relations.items() if n not in constant_names}
    rel_gamma = endomorphism_relation(Language(d, gamma))
    anchors = []
    for a in range(d):
        name = f"{ANCHOR_PREFIX}{a}"
        while name in inst.variables:
            name += "'"
        anchors.append(name)
    variables = list(inst.variables) + anchors
    constraints: list[tuple] = []
    for c in inst.constraints:
        if c.rel in constant_names:
            (value,) = next(iter(inst.language[c.rel].tuples))
            constraints.append(((c.scope[0], anchors[value]), EQUALITY))
        else:
            constraints.append((c.scope, c.rel))
    constraints.append((tuple(anchors), "endotable"))
    rels = dict(gamma)
    rels["endotable"] = rel_gamma
    rels.setdefault(EQUALITY, equality_relation(d))
    return make_instance(d, variables, constraints, rels)


def extend_with_anchor_scalars(assignment: OperatorAssignment, reduced: Instance) -> OperatorAssignment:
    """Operator transport for the constants reduction: anchor variables take
    the scalar operators lambda_a I."""
    import numpy as np

    anchor_scope = next(c.scope for c in reduced.constraints if c.rel == "endotable")
    out = dict(assignment.assign)
    for a, name in enumerate(anchor_scope):
        out[name] = complex(np.exp(2j * np.pi * a / reduced.d)) * np.eye(assignment.dim)
    return OperatorAssignment(assignment.dim, out)


# ---------------------------------------------------------------------------
# Subdomain restriction and congruence factoring


def restrict_transport(inst: Instance, pi: UnaryMap):
    """Relabel an instance over a small domain through an injective map into
    a larger one; returns the relabeled instance and the operator transport
    that applies the interpolating polynomial to every operator."""
    if inst.d != pi.d_from:
        raise ValueError(f"instance domain {inst.d} does not match the map source {pi.d_from}")
    if not pi.is_injective():
        raise ValueError("restriction transport requires an injective map")
    rels = {name: pi.apply_relation(inst.language[name]) for name in inst.language.relations}
    mapped = make_instance(
        pi.d_to, inst.variables, [(c.scope, c.rel) for c in inst.constraints], rels
    )
    poly = interpolate_map(pi)

    def transport(assignment: OperatorAssignment) -> OperatorAssignment:
        return transport_assignment(poly, assignment)

    return mapped, transport


@dataclass(frozen=True)
class Congruence:
    """Partition of 0..d-1 into congruence classes."""

    d: int
    classes: tuple  # of frozensets

    def __post_init__(self):
        seen: set = set()
        object.__setattr__(self, "classes", tuple(frozenset(c) for c in self.classes))
        for cls_ in self.classes:
            if not cls_:
                raise ValueError("congruence classes must be nonempty")
            if cls_ & seen:
                raise ValueError("congruence classes must be disjoint")
            seen |= cls_
        if seen != set(range(self.d)):
            raise ValueError("congruence classes must cover the domain")

    def sorted_classes(self) -> list:
        return sorted(self.classes, key=min)

    def projection(self) -> UnaryMap:
        """Class map d -> e, classes ranked by their smallest member."""
        table = [0] * self.d
        for rank, cls_ in enumerate(self.sorted_classes()):
            for a in cls_:
                table[a] = rank
        return UnaryMap(self.d, len(self.classes), tuple(table))

    def section(self) -> UnaryMap:
        """Smallest representative of each class, e -> d."""
        return UnaryMap(
            len(self.classes), self.d, tuple(min(cls_) for cls_ in self.sorted_classes())
        )


def factor_transport(inst: Instance, theta: Congruence):
    """Pull an instance over the factor domain back through the congruence:
    constraints become full preimage relations, and operator assignments are
    carried by the interpolant of the smallest-representative section."""
    pi = theta.projection()
    e = pi.d_to
    if inst.d != e:
        raise ValueError(
            f"instance domain {inst.d} does not match the {e} congruence classes"
        )
    rels = {}
    for name in inst.language.relations:
        rel = inst.language[name]
        preimage = frozenset(
            t
            for t in product(range(theta.d), repeat=rel.arity)
            if pi.apply_tuple(t) in rel.tuples
        )
        rels[name] = Relation(rel.arity, theta.d, preimage)
    mapped = make_instance(
        theta.d, inst.variables, [(c.scope, c.rel) for c in inst.constraints], rels
    )
    poly = interpolate_map(theta.section())

    def transport(assignment: OperatorAssignment) -> OperatorAssignment:
        return transport_assignment(poly, assignment)

    return mapped, transport


# ---------------------------------------------------------------------------
# Operator extension along gadget expansion


def lift_assignment(
    inst: Instance,
    formula: PPFormula,
    target: str,
    gadget: Instance,
    assignment: OperatorAssignment,
    tol: float = 1e-8,
    seed: int = 0,
) -> OperatorAssignment:
    """Extend a satisfying operator assignment of an instance to the gadget
    expansion of its target-relation constraints.

    Jointly diagonalizes each replaced constraint's scope operators, picks the
    lexicographically smallest witness tuple slot by slot, and conjugates the
    diagonal witnesses back.  Purely finite-dimensional.
    """
    import numpy as np

    from .operators import simultaneous_diagonalize

    base_lang = inst.language.without(target)
    rel = inst.language[target]
    d = inst.d
    witnesses_cache: dict[tuple, tuple] = {}

    def witness_for(point: tuple) -> tuple:
        if point in witnesses_cache:
            return witnesses_cache[point]
        for cand in product(range(d), repeat=formula.exist):
            values = point + cand
            ok = True
            for atom in formula.atoms:
                sub = tuple(values[i] for i in atom.vars)
                if atom.rel == EQUALITY:
                    ok = sub[0] == sub[1]
                else:
                    ok = sub in base_lang[atom.rel]
                if not ok:
                    break
            if ok:
                witnesses_cache[point] = cand
                return cand
        raise ValueError(f"tuple {point} admits no witness; formula does not define the target")

    blocks = _gadget_blocks(inst, formula, target)
    out = dict(assignment.assign)
    for ci, c in enumerate(inst.constraints):
        if c.rel != target:
            continue
        mats = [assignment[v] for v in c.scope]
        U, diags = simultaneous_diagonalize(mats, tol=tol, seed=seed + ci)
        basis = U.conj().T
        slots = []
        for j in range(assignment.dim):
            entries = []
            for D in diags:
                val = D[j, j]
                k = int(round((np.angle(val) * d / (2 * np.pi))) % d)
                if abs(val - np.exp(2j * np.pi * k / d)) > 1e-6:
                    raise ValueError("operator spectrum strays from the roots of unity")
                entries.append(k)
            point = tuple(entries)
            if point not in rel.tuples:
                raise ValueError(
                    "assignment does not satisfy the replaced constraint on a joint eigenspace"
                )
            slots.append(witness_for(point))
        for k, name in enumerate(blocks[ci]):
            diag = np.diag([np.exp(2j * np.pi * slots[j][k] / d) for j in range(assignment.dim)])
            out[name] = basis @ diag @ U
    return OperatorAssignment(assignment.dim, out)


def restrict_to(assignment: OperatorAssignment, variables) -> OperatorAssignment:
    """Restriction onto a variable subset (e.g. the representatives left by
    an equality collapse, or the original variables of a padded instance)."""
    return OperatorAssignment(
        assignment.dim, {v: assignment[v] for v in variables}
    )
