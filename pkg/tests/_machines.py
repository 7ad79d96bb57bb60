"""A small zoo of machines shared by the test modules."""

from hopfp.machine import TmSpec

BINARY = ("0", "1")
TAPE = ("0", "1", "_")


def _tm(states, init, delta, input_alphabet=BINARY, tape_alphabet=TAPE):
    return TmSpec(
        states=states,
        input_alphabet=input_alphabet,
        tape_alphabet=tape_alphabet,
        blank="_",
        init=init,
        accept="qa",
        reject="qr",
        delta=delta,
    )


# halts immediately, in the accepting respectively rejecting state
M_ACC = _tm(("qa", "qr"), "qa", {})
M_REJ = _tm(("qa", "qr"), "qr", {})

# accepts words starting with 1, never moves
M_FIRST1 = _tm(
    ("q0", "qa", "qr"),
    "q0",
    {
        ("q0", "1"): ("qa", "1", "N"),
        ("q0", "0"): ("qr", "0", "N"),
        ("q0", "_"): ("qr", "_", "N"),
    },
)

# sweeps right, accepts words consisting of ones only
M_SWEEP = _tm(
    ("q0", "qa", "qr"),
    "q0",
    {
        ("q0", "1"): ("q0", "1", "R"),
        ("q0", "0"): ("qr", "0", "N"),
        ("q0", "_"): ("qa", "_", "N"),
    },
)

# accepts words with an even number of ones
M_PARITY = _tm(
    ("qe", "qo", "qa", "qr"),
    "qe",
    {
        ("qe", "1"): ("qo", "1", "R"),
        ("qe", "0"): ("qe", "0", "R"),
        ("qe", "_"): ("qa", "_", "N"),
        ("qo", "1"): ("qe", "1", "R"),
        ("qo", "0"): ("qo", "0", "R"),
        ("qo", "_"): ("qr", "_", "N"),
    },
)

# accepts immediately; two states over a two-symbol tape, so it fits
# even the smallest geometries
M_ACC2 = _tm(("qa", "qr"), "qa", {}, input_alphabet=("1",), tape_alphabet=("1", "_"))

# accepts immediately but speaks the four-symbol encoding alphabet, so its
# size requirement comes from the tape rather than the states
M_ACC4 = _tm(
    ("qa", "qr"),
    "qa",
    {},
    input_alphabet=("0", "1", "#"),
    tape_alphabet=("0", "1", "#", "_"),
)

# spins in place forever
M_LOOP = _tm(
    ("q0", "qa", "qr"),
    "q0",
    {("q0", s): ("q0", s, "N") for s in TAPE},
)

# walks in a two-cell circle forever
M_PACE = _tm(
    ("q0", "q1", "qa", "qr"),
    "q0",
    {
        **{("q0", s): ("q1", s, "R") for s in TAPE},
        **{("q1", s): ("q0", s, "L") for s in TAPE},
    },
)

# reads a system encoding and accepts iff the last state carries the prop:
# scan right to the blank, step back over the closing separator, check the
# final bit of the proposition section
M_LASTPROP = _tm(
    ("q0", "q1", "q2", "qa", "qr"),
    "q0",
    {
        ("q0", "0"): ("q0", "0", "R"),
        ("q0", "1"): ("q0", "1", "R"),
        ("q0", "#"): ("q0", "#", "R"),
        ("q0", "_"): ("q1", "_", "L"),
        ("q1", "#"): ("q2", "#", "L"),
        ("q1", "0"): ("qr", "0", "N"),
        ("q1", "1"): ("qr", "1", "N"),
        ("q1", "_"): ("qr", "_", "N"),
        ("q2", "1"): ("qa", "1", "N"),
        ("q2", "0"): ("qr", "0", "N"),
        ("q2", "#"): ("qr", "#", "N"),
        ("q2", "_"): ("qr", "_", "N"),
    },
    input_alphabet=("0", "1", "#"),
    tape_alphabet=("0", "1", "#", "_"),
)
