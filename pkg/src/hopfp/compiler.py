"""Space-bounded machines compiled into fixpoint formulas.

A deterministic machine that runs in bounded space can be replayed by a
formula over any large enough totally ordered system: tape positions
become values of an iterated powerset type over the states, whole
configurations become sets of tagged tuples, and one partial fixpoint
walks the run step by step.  The builders here produce those formulas;
crossval checks them against the direct simulator on concrete inputs,
down to the individual fixpoint stages.

A system with n states yields tower(n^c, k) tape cells at height k and
width c, so the machine may use that much space.  The coding needs
n >= max(state count, tape alphabet size, c), since states and symbols
are coded by single individuals, and it reads the reserved order as the
declaration order of the states.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .domains import (
    DEFAULT_ENUM_BUDGET,
    Domain,
    SetV,
    State,
    Value,
    canonical_index,
    domain_size,
    index_to_value,
    make_set,
)
from .evaluator import EvalStats, compile_formula, evaluate, pfp_iterate
from .lts import Lts, order_ranks, ordered_lts
from .logic import (
    GROUND,
    Apply,
    Compound,
    Exists,
    Formula,
    Not,
    Or,
    Pfp,
    SetOf,
    Type,
    and_,
    conj,
    exists_all,
    implies,
)
from .machine import LEFT, RIGHT, Configuration, TmSpec, encode_lts, iter_run, run
from .orders import (
    NameSupply,
    TowerSpec,
    build_eq,
    build_index,
    build_lt,
    build_succ,
    build_total_order_axiom,
    quantify_exists,
)

# fixed variable names of the generated formulas: the stage set, the
# candidate member (state code, head cell, own cell, symbol code) and
# the witness member drawn from the stage at the old head cell
SET_VAR = "cfg"
TUPLE_VARS = ("yq", "hd", "cell", "ys")
WITNESS_VARS = ("xq", "xh", "xc", "xs")
OLD_VAR = "xo"


class PreconditionError(ValueError):
    """The system or input is outside what the coding can represent."""


class NotAnEncoding(ValueError):
    """A set value violates one of the four configuration coding conditions."""

    def __init__(self, condition: int, message: str) -> None:
        super().__init__("condition %d: %s" % (condition, message))
        self.condition = condition


@dataclass(frozen=True)
class ReductionParams:
    """Geometry of the coding: powerset height k and ground width c."""

    k: int
    c: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("height must be positive")
        if self.c < 1:
            raise ValueError("width must be positive")


def type_tower(params: ReductionParams, n: int) -> tuple[Type, Type, int]:
    """Position type, configuration member type and cell count for size n."""
    pos = TowerSpec(params.c, params.k + 1).value_type
    member = Compound((GROUND, pos, pos, GROUND))
    return pos, member, domain_size(Domain(pos, n))


@dataclass(frozen=True)
class CodingContext:
    """One machine/system pair with everything the builders derive from it.

    Machine state number i and tape symbol number j are coded by the
    individuals at positions i and j of the order, so the reserved order
    must list the states in declaration order.
    """

    lts: Lts
    machine: TmSpec
    params: ReductionParams

    def __post_init__(self) -> None:
        n = self.lts.n
        m = self.machine
        need = max(len(m.states), len(m.tape_alphabet), self.params.c)
        if n < need:
            raise PreconditionError(
                "system has %d states but the coding needs at least %d, the "
                "largest of state count %d, tape alphabet size %d and width %d"
                % (n, need, len(m.states), len(m.tape_alphabet), self.params.c)
            )
        try:
            ranks = order_ranks(self.lts)
        except ValueError as err:
            raise PreconditionError(str(err)) from None
        if ranks != list(range(n)):
            raise PreconditionError(
                "the order on the system must list its states in declaration order"
            )

    @property
    def n(self) -> int:
        return self.lts.n

    @property
    def pos_spec(self) -> TowerSpec:
        return TowerSpec(self.params.c, self.params.k + 1)

    @property
    def code_spec(self) -> TowerSpec:
        return TowerSpec(1, 1)

    @property
    def pos_type(self) -> Type:
        return self.pos_spec.value_type

    @property
    def member_type(self) -> Compound:
        return Compound((GROUND, self.pos_type, self.pos_type, GROUND))

    @property
    def set_type(self) -> SetOf:
        return SetOf(self.member_type)

    @property
    def cells(self) -> int:
        return domain_size(Domain(self.pos_type, self.n))

    @property
    def tuple_space(self) -> int:
        return self.n * self.cells * self.cells * self.n

    def declarations(self) -> dict:
        """Typing context for the stage formula's free variables."""
        yq, hd, cell, ys = TUPLE_VARS
        return {
            SET_VAR: self.set_type,
            yq: GROUND,
            hd: self.pos_type,
            cell: self.pos_type,
            ys: GROUND,
        }


# -- configuration coding ---------------------------------------------------


def encode_stage(ctx: CodingContext, cfg: Configuration) -> frozenset:
    """Member indices of the configuration's encoding.

    This is the shape fixpoint stages take: member (q, h, j, g) says the
    machine is in state q with its head on cell h, and cell j holds
    symbol g.  All cells are present, blanks included.
    """
    n, cells = ctx.n, ctx.cells
    m = ctx.machine
    if cfg.head >= cells:
        raise PreconditionError(
            "head position %d outside the %d available cells" % (cfg.head, cells)
        )
    if len(cfg.tape) > cells:
        raise PreconditionError(
            "tape uses %d cells but only %d exist" % (len(cfg.tape), cells)
        )
    q = m.state_index(cfg.state)
    base = (q * cells + cfg.head) * cells
    return frozenset(
        (base + j) * n + m.symbol_index(cfg.symbol_at(j, m.blank))
        for j in range(cells)
    )


def decode_stage(ctx: CodingContext, members: Iterable[int]) -> Configuration:
    """Rebuild the configuration coded by a set of member indices.

    The four coding conditions are checked in order and the first
    violation is reported: (1) one shared state code naming a machine
    state, (2) one shared head cell, (3) exactly one member per cell,
    (4) symbol codes naming tape symbols.
    """
    n, cells = ctx.n, ctx.cells
    m = ctx.machine
    quads = []
    for idx in members:
        rest, g = divmod(idx, n)
        rest, j = divmod(rest, cells)
        q, h = divmod(rest, cells)
        quads.append((q, h, j, g))
    states = {q for q, _, _, _ in quads}
    if len(states) > 1:
        raise NotAnEncoding(1, "members disagree on the state code")
    if states and min(states) >= len(m.states):
        raise NotAnEncoding(1, "state code %d names no machine state" % min(states))
    heads = {h for _, h, _, _ in quads}
    if len(heads) > 1:
        raise NotAnEncoding(2, "members disagree on the head cell")
    content: dict = {}
    for _, _, j, g in quads:
        if j in content:
            raise NotAnEncoding(3, "more than one member for cell %d" % j)
        content[j] = g
    for j in range(cells):
        if j not in content:
            raise NotAnEncoding(3, "no member for cell %d" % j)
    for j in range(cells):
        if content[j] >= len(m.tape_alphabet):
            raise NotAnEncoding(
                4, "symbol code %d at cell %d names no tape symbol" % (content[j], j)
            )
    tape = tuple(m.tape_alphabet[content[j]] for j in range(cells))
    end = cells
    while end > 0 and tape[end - 1] == m.blank:
        end -= 1
    return Configuration(m.states[min(states)], min(heads), tape[:end])


def encode_configuration(ctx: CodingContext, cfg: Configuration) -> SetV:
    """The set value standing for one machine configuration."""
    member = Domain(ctx.member_type, ctx.n)
    return make_set(index_to_value(member, i) for i in encode_stage(ctx, cfg))


def decode_configuration(ctx: CodingContext, v: Value) -> Configuration:
    """Inverse of encode_configuration.

    Raises NotAnEncoding carrying the number of the violated coding
    condition when the set encodes no configuration, and ConformanceError
    when the value is not even of the configuration set type.
    """
    mask = canonical_index(Domain(ctx.set_type, ctx.n), v)
    members = []
    while mask:
        low = mask & -mask
        members.append(low.bit_length() - 1)
        mask ^= low
    return decode_stage(ctx, members)


# -- formula builders -------------------------------------------------------


def _taken() -> tuple:
    return (SET_VAR,) + TUPLE_VARS + WITNESS_VARS + (OLD_VAR,)


def _code_eq(ctx: CodingContext, var: str, code: int, supply: NameSupply) -> Formula:
    """The ground variable holds the individual at the given order position."""
    return build_index(ctx.code_spec, code, (var,), supply)


def _index_caps(spec, supply):
    """Position formulas idx_0, idx_1, ... over one shared chain.

    Returns cap(i, slot), the formula placing slot at order position i.
    All caps hang off a single spine of successor steps, and the spine
    alternates between just two bound names so every step reuses the
    same two successor subtrees.  Sharing matters: each fresh successor
    instance would cost the evaluator a memo table keyed by a pair of
    positions, and a word's worth of those overflows the cache.
    """
    pair = (supply.slot(spec, "u"), supply.slot(spec, "u"))
    hops: dict = {}

    def hop(src, dst):
        got = hops.get((src, dst))
        if got is None:
            got = hops[(src, dst)] = build_succ(spec, src, dst, supply)
        return got

    spine: list = []

    def at(i):
        # spine[i] puts its working name, pair[i % 2], at order position i
        while len(spine) <= i:
            k = len(spine)
            if k == 0:
                spine.append(build_index(spec, 0, pair[0], supply))
            else:
                prev, cur = pair[(k - 1) % 2], pair[k % 2]
                spine.append(quantify_exists(spec, prev, and_(spine[k - 1], hop(prev, cur))))
        return spine[i]

    def cap(i, slot):
        if i == 0:
            return build_index(spec, 0, slot, supply)
        src = pair[(i - 1) % 2]
        return quantify_exists(spec, src, and_(at(i - 1), hop(src, slot)))

    return cap


def build_init(ctx: CodingContext, word: str) -> Formula:
    """Constraint satisfied by exactly the members encoding the start.

    Free variables: the candidate member.  The head sits on cell zero in
    the starting state, cells under the input carry its letters, and a
    witness for the input's last cell forces blanks past it.
    """
    m, cells = ctx.machine, ctx.cells
    if len(word) > cells:
        raise PreconditionError(
            "input of length %d does not fit into %d cells" % (len(word), cells)
        )
    for ch in word:
        if ch not in m.input_alphabet:
            raise ValueError("input symbol %r not allowed" % ch)
    supply = NameSupply(taken=_taken())
    yq, hd, cell, ys = TUPLE_VARS
    cap = _index_caps(ctx.pos_spec, supply)
    parts = [
        cap(0, (hd,)),
        _code_eq(ctx, yq, m.state_index(m.init), supply),
    ]
    for i, ch in enumerate(word):
        parts.append(
            implies(cap(i, (cell,)), _code_eq(ctx, ys, m.symbol_index(ch), supply))
        )
    blank = _code_eq(ctx, ys, m.symbol_index(m.blank), supply)
    if not word:
        parts.append(blank)
    else:
        last = supply.slot(ctx.pos_spec, "zb")
        parts.append(
            quantify_exists(
                ctx.pos_spec,
                last,
                and_(
                    cap(len(word) - 1, last),
                    implies(build_lt(ctx.pos_spec, last, (cell,), supply), blank),
                ),
            )
        )
    return conj(parts)


def build_trans(ctx: CodingContext) -> Formula:
    """One-step relation between configuration encodings.

    Free variables: the stage set and the candidate member.  A witness
    member at the old head cell fixes the scanned symbol, a second
    witness at the candidate's own cell carries the old content there,
    and one conjunct per transition rule forces the new state, the moved
    head and the written symbol.  Cells away from the old head keep
    their content.
    """
    m = ctx.machine
    supply = NameSupply(taken=_taken())
    yq, hd, cell, ys = TUPLE_VARS
    xq, xh, xc, xs = WITNESS_VARS
    pspec = ctx.pos_spec
    # shared nodes so equal tests share one memo table during evaluation
    at_head = build_eq(pspec, (xh,), (cell,), supply)
    stay = build_eq(pspec, (hd,), (xh,), supply)
    step_right = build_succ(pspec, (xh,), (hd,), supply)
    step_left = Or(
        build_succ(pspec, (hd,), (xh,), supply),
        and_(
            build_index(pspec, 0, (xh,), supply),
            build_index(pspec, 0, (hd,), supply),
        ),
    )
    old_content = Exists(
        OLD_VAR,
        GROUND,
        and_(
            Apply(SET_VAR, (xq, xh, cell, OLD_VAR)),
            implies(Not(at_head), build_eq(ctx.code_spec, (ys,), (OLD_VAR,), supply)),
        ),
    )
    blocks = []
    order = lambda kv: (m.state_index(kv[0][0]), m.symbol_index(kv[0][1]))
    for (q, sym), (q2, sym2, move) in sorted(m.delta.items(), key=order):
        matches = and_(
            _code_eq(ctx, xq, m.state_index(q), supply),
            _code_eq(ctx, xs, m.symbol_index(sym), supply),
        )
        moved = step_left if move == LEFT else step_right if move == RIGHT else stay
        forced = conj(
            [
                _code_eq(ctx, yq, m.state_index(q2), supply),
                moved,
                implies(at_head, _code_eq(ctx, ys, m.symbol_index(sym2), supply)),
            ]
        )
        blocks.append(implies(matches, forced))
    body = conj(
        [
            Apply(SET_VAR, WITNESS_VARS),
            build_eq(pspec, (xc,), (xh,), supply),
            old_content,
        ]
        + blocks
    )
    types = (GROUND, ctx.pos_type, ctx.pos_type, GROUND)
    return exists_all(list(zip(WITNESS_VARS, types)), body)


def build_stage_formula(ctx: CodingContext, word: str) -> Formula:
    """The stage function: step the coded run, or start it from nothing.

    On an empty stage set only the start branch can hold, so the first
    stage is the initial configuration's encoding; afterwards the step
    branch reproduces the successor and halting configurations repeat
    through their self loop rules, freezing the iteration.
    """
    supply = NameSupply(taken=_taken())
    types = (GROUND, ctx.pos_type, ctx.pos_type, GROUND)
    probe = [supply.fresh("w") for _ in range(4)]
    # built as a negated existential so evaluation probes one member
    empty = Not(exists_all(list(zip(probe, types)), Apply(SET_VAR, tuple(probe))))
    return Or(build_trans(ctx), and_(empty, build_init(ctx, word)))


def build_stage_fixpoint(ctx: CodingContext, word: str) -> Pfp:
    """The applied fixpoint binder over the stage function."""
    return Pfp(SET_VAR, ctx.set_type, build_stage_formula(ctx, word), TUPLE_VARS)


def build_machine_formula(ctx: CodingContext, word: str) -> Formula:
    """Closed formula true on the system iff the machine accepts the word."""
    supply = NameSupply(taken=_taken())
    yq = TUPLE_VARS[0]
    accept = _code_eq(ctx, yq, ctx.machine.state_index(ctx.machine.accept), supply)
    types = (GROUND, ctx.pos_type, ctx.pos_type, GROUND)
    return and_(
        build_total_order_axiom(),
        exists_all(
            list(zip(TUPLE_VARS, types)),
            and_(accept, build_stage_fixpoint(ctx, word)),
        ),
    )


def stage_image(
    ctx: CodingContext,
    word: str,
    members: frozenset,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> frozenset:
    """One application of the stage function to an arbitrary member set.

    Exists so tests can probe the stage function off the iteration path,
    in particular on sets that encode no configuration at all.
    """
    compiled = compile_formula(
        ctx.lts, build_stage_formula(ctx, word), ctx.declarations(), budget
    )
    member = Domain(ctx.member_type, ctx.n)
    pos = Domain(ctx.pos_type, ctx.n)
    current = make_set(index_to_value(member, i) for i in members)
    pos_vals = [index_to_value(pos, i) for i in range(ctx.cells)]
    yq, hd, cell, ys = TUPLE_VARS
    out = []
    i = 0
    for q in range(ctx.n):
        for h in range(ctx.cells):
            for j in range(ctx.cells):
                for g in range(ctx.n):
                    env = {
                        SET_VAR: current,
                        yq: State(q),
                        hd: pos_vals[h],
                        cell: pos_vals[j],
                        ys: State(g),
                    }
                    if compiled(env):
                        out.append(i)
                    i += 1
    return frozenset(out)


# -- cross validation -------------------------------------------------------


@dataclass(frozen=True)
class CrossvalReport:
    """Verdicts of formula and simulator on one machine/input case."""

    mode: str
    word: str
    n: int
    k: int
    c: int
    cells: int
    tuple_space: int
    machine_accepted: bool
    machine_steps: int
    machine_space: int
    machine_looped: bool
    formula_accepted: bool
    agree: bool
    stage_count: Optional[int] = None
    pfp_outcome: Optional[str] = None
    stabilized_at: Optional[int] = None
    stages_match: Optional[bool] = None
    first_mismatch: Optional[int] = None

    def to_record(self) -> dict:
        return asdict(self)


def minimal_system_size(machine: TmSpec, params: ReductionParams) -> int:
    """Fewest states a host system needs for this machine and shape."""
    return max(len(machine.states), len(machine.tape_alphabet), params.c)


def crossval(
    machine: TmSpec,
    params: ReductionParams,
    lts: Optional[Lts] = None,
    word: Optional[str] = None,
    n: Optional[int] = None,
    check_stages: bool = False,
    budget: int = DEFAULT_ENUM_BUDGET,
    max_steps: Optional[int] = None,
    stats: Optional[EvalStats] = None,
) -> CrossvalReport:
    """Run formula and simulator on one case and compare.

    Encoded mode (no word given) runs the machine on the text encoding
    of the given system.  Synthetic mode takes the word as given and,
    when no system is supplied, builds a plain ordered one of the
    requested or minimal suitable size.  With check_stages the fixpoint
    is iterated a second time and every stage is compared against the
    corresponding simulator configuration.
    """
    if word is None:
        if lts is None:
            raise ValueError("encoded mode needs a system to encode")
        mode, word = "encoded", encode_lts(lts)
    else:
        mode = "synthetic"
    if lts is None:
        size = n if n is not None else minimal_system_size(machine, params)
        lts = ordered_lts(size, (), ())
    ctx = CodingContext(lts, machine, params)
    result = run(machine, word, max_steps)
    if result.space > ctx.cells:
        raise PreconditionError(
            "the run uses %d cells but the coding provides %d" % (result.space, ctx.cells)
        )
    formula_accepted = evaluate(
        lts, build_machine_formula(ctx, word), budget=budget, stats=stats
    )
    fields = dict(
        mode=mode,
        word=word,
        n=ctx.n,
        k=params.k,
        c=params.c,
        cells=ctx.cells,
        tuple_space=ctx.tuple_space,
        machine_accepted=result.accepted,
        machine_steps=result.steps,
        machine_space=result.space,
        machine_looped=result.looped,
        formula_accepted=formula_accepted,
        agree=formula_accepted == result.accepted,
    )
    if check_stages:
        trace = pfp_iterate(lts, build_stage_fixpoint(ctx, word), budget=budget, stats=stats)
        matches = True
        first_mismatch = None
        configs = list(iter_run(machine, word, max_steps))
        for i, cfg in enumerate(configs):
            ok = i + 1 < len(trace.stages) and trace.stages[i + 1] == encode_stage(ctx, cfg)
            if not ok:
                matches, first_mismatch = False, i + 1
                break
        if result.looped:
            # a loop that repeats one configuration freezes the stage
            # sequence there; longer loops make the stages cycle
            entered = configs.index(configs[-1])
            if result.steps - entered == 1:
                matches = matches and trace.outcome == "stabilized"
                matches = matches and trace.stabilized_at == entered + 1
            else:
                matches = matches and trace.outcome == "no-fixpoint"
        else:
            matches = matches and trace.outcome == "stabilized"
            matches = matches and trace.stabilized_at == result.steps + 1
        fields.update(
            stage_count=len(trace.stages),
            pfp_outcome=trace.outcome,
            stabilized_at=trace.stabilized_at,
            stages_match=matches,
            first_mismatch=first_mismatch,
        )
    return CrossvalReport(**fields)
