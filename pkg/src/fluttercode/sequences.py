"""Binary exposure sequences and one-of-N interleaved code words.

An exposure sequence is the on/off chopping pattern of a fluttered
shutter: W time slices ("chips"), each either integrating light (1)
or blocked (0). An interleaved code packs N mutually exclusive
sequences into a single word of one-hot digits, so that exactly one
of the N sequences is open at every chip and together they use the
whole exposure window.

Code words are serialized as strings of the digits 1/2/4/8 (one hex
character per chip). Arity 5 needs the digit 16, which does not fit
a single character; those words use a comma-separated integer form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_LENGTH = 52
ONE_HOT_DIGITS = (1, 2, 4, 8, 16)
MIN_ARITY = 2
MAX_ARITY = 5


class InvalidDigitError(ValueError):
    """A code-word digit is not a valid one-hot value for its arity."""


class LengthMismatchError(ValueError):
    """Sequences or words that must share a length do not."""


class NotAPartitionError(ValueError):
    """Sequences do not have exactly one 'on' chip at every position."""


@dataclass(frozen=True)
class DutyCycle:
    """Fraction of chips that are open, kept exact as ones/length."""

    ones: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if not 0 <= self.ones <= self.length:
            raise ValueError("ones count out of range")

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.ones, self.length)

    def __float__(self) -> float:
        return self.ones / self.length


@dataclass(frozen=True)
class ExposureSequence:
    """Fixed-length binary shutter pattern (1 = open, 0 = blocked)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 1:
            raise ValueError("sequence must have at least one chip")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("sequence chips must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_text(cls, text: str) -> "ExposureSequence":
        """Parse a line of '0'/'1' characters."""
        line = text.strip()
        if not line or any(c not in "01" for c in line):
            raise ValueError(f"not a binary sequence: {line!r}")
        return cls(tuple(int(c) for c in line))

    @classmethod
    def flat(cls, length: int) -> "ExposureSequence":
        """All-open sequence of the given length (a plain rect exposure)."""
        return cls((1,) * length)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    @property
    def length(self) -> int:
        return len(self.bits)

    def ones(self) -> int:
        return sum(self.bits)

    def complement(self) -> "ExposureSequence":
        """Invert every chip. An involution: s.complement().complement() == s."""
        return ExposureSequence(tuple(1 - b for b in self.bits))

    def duty_cycle(self) -> DutyCycle:
        return DutyCycle(self.ones(), len(self.bits))

    def to_text(self) -> str:
        return "".join(str(b) for b in self.bits)

    def to_pgm(self, binary: bool = True) -> bytes:
        """Render as a 1-by-W kernel image (255 for open chips, 0 for blocked)."""
        from .raster import encode_pgm
        import numpy as np

        row = np.array([self.bits], dtype=np.uint8) * 255
        return encode_pgm(row, binary=binary)

    @classmethod
    def from_pgm(cls, data: bytes) -> "ExposureSequence":
        """Read a 1-by-W kernel image back into a sequence."""
        from .raster import decode_pgm

        arr = decode_pgm(data)
        if arr.shape[0] != 1:
            raise ValueError(f"kernel image must be a single row, got {arr.shape}")
        return cls(tuple(int(v > 0.5) for v in arr[0]))


def complement(seq: ExposureSequence) -> ExposureSequence:
    return seq.complement()


def duty_cycle(seq: ExposureSequence) -> DutyCycle:
    return seq.duty_cycle()


@dataclass(frozen=True)
class InterleavedCode:
    """One-of-N code word: a sequence of one-hot digits over N bit planes.

    Digit j carries bit s set iff sequence s is open at chip j. Decoding
    yields N sequences that partition the window, so their duty cycles
    sum to exactly 1.
    """

    digits: tuple[int, ...]
    arity: int

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if len(digits) < 1:
            raise LengthMismatchError("code word must have at least one digit")
        if not MIN_ARITY <= self.arity <= MAX_ARITY:
            raise ValueError(f"arity must be in [{MIN_ARITY}, {MAX_ARITY}]")
        for d in digits:
            if d not in ONE_HOT_DIGITS:
                raise InvalidDigitError(f"digit {d} is not one-hot")
            if d.bit_length() - 1 >= self.arity:
                raise InvalidDigitError(
                    f"digit {d} selects sequence {d.bit_length() - 1}, "
                    f"but arity is {self.arity}"
                )
        object.__setattr__(self, "digits", digits)

    @property
    def length(self) -> int:
        return len(self.digits)

    def __len__(self) -> int:
        return len(self.digits)

    def decode(self) -> tuple[ExposureSequence, ...]:
        """Extract the N sequences, ordered by ascending bit index."""
        return tuple(
            ExposureSequence(tuple((d >> s) & 1 for d in self.digits))
            for s in range(self.arity)
        )

    @classmethod
    def from_sequences(cls, seqs) -> "InterleavedCode":
        """Pack sequences into a word; they must partition the window."""
        seqs = list(seqs)
        if not MIN_ARITY <= len(seqs) <= MAX_ARITY:
            raise ValueError(f"arity must be in [{MIN_ARITY}, {MAX_ARITY}]")
        length = len(seqs[0])
        if any(len(s) != length for s in seqs):
            raise LengthMismatchError("sequences must share one length")
        digits = []
        for j, column in enumerate(zip(*(seq.bits for seq in seqs))):
            if sum(column) != 1:
                raise NotAPartitionError(
                    f"chip {j} is open in {sum(column)} sequences, expected exactly 1"
                )
            digits.append(1 << column.index(1))
        return cls(tuple(digits), len(seqs))

    def to_word(self) -> str:
        """Serialize; single hex characters up to arity 4, comma form above."""
        if all(d <= 8 for d in self.digits):
            return "".join(format(d, "x") for d in self.digits)
        return ",".join(str(d) for d in self.digits)

    @classmethod
    def from_word(cls, word: str, arity: int | None = None) -> "InterleavedCode":
        """Parse either serialized form; infer arity from the digits if absent."""
        word = word.strip()
        if "," in word:
            try:
                digits = tuple(int(tok) for tok in word.split(","))
            except ValueError as exc:
                raise InvalidDigitError(f"bad comma-form word: {word!r}") from exc
        else:
            try:
                digits = tuple(int(c, 16) for c in word)
            except ValueError as exc:
                raise InvalidDigitError(f"bad word character in {word!r}") from exc
        if arity is None:
            if not digits:
                raise LengthMismatchError("empty code word")
            arity = max(max(digits).bit_length(), MIN_ARITY)
        return cls(digits, arity)

    def duty_cycles(self) -> tuple[DutyCycle, ...]:
        return tuple(s.duty_cycle() for s in self.decode())


def decode_word(word: str, arity: int) -> tuple[ExposureSequence, ...]:
    """Decode a serialized word into its N sequences (ascending bit order)."""
    return InterleavedCode.from_word(word, arity).decode()


def encode_word(seqs) -> str:
    """Inverse of decode_word; raises NotAPartitionError on overlap or gaps."""
    return InterleavedCode.from_sequences(seqs).to_word()


def parse_code_text(text: str) -> InterleavedCode:
    """Parse the word file format: optional "N=<arity>" header, then the word."""
    arity = None
    word = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.upper().startswith("N="):
            arity = int(line[2:])
        elif word is None:
            word = line
        else:
            raise ValueError("word file must contain a single code word")
    if word is None:
        raise ValueError("no code word found")
    return InterleavedCode.from_word(word, arity)


def format_code_text(code: InterleavedCode) -> str:
    return f"N={code.arity}\n{code.to_word()}\n"
