from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fluttercode.sequences import (
    DutyCycle,
    ExposureSequence,
    InterleavedCode,
    InvalidDigitError,
    LengthMismatchError,
    NotAPartitionError,
    decode_word,
    encode_word,
    format_code_text,
    parse_code_text,
)
from fluttercode import reference_codes

# Printed companion sequences for two published words, highest bit plane
# first (the customary print order for one-of-3 codes).
AVG_MIN_PRINTED = (
    "0000011000010001100100000000010111000001110000110010",
    "1101000000100110001000100110100000001010000101001101",
    "0010100111001000010011011001001000110100001010000000",
)
MAX_MIN_PRINTED_FIRST = "0000110101000100110001000010011011010000110000111011"

bit_lists = st.lists(st.integers(0, 1), min_size=1, max_size=64)


class TestExposureSequence:
    def test_complement_all_ones(self):
        assert ExposureSequence.flat(4).complement() == ExposureSequence((0, 0, 0, 0))

    def test_complement_alternating(self):
        assert ExposureSequence.from_text("1010").complement().to_text() == "0101"

    @given(bit_lists)
    def test_complement_is_involution(self, bits):
        seq = ExposureSequence(tuple(bits))
        assert seq.complement().complement() == seq

    @given(bit_lists)
    def test_complement_ones_count(self, bits):
        seq = ExposureSequence(tuple(bits))
        assert seq.ones() + seq.complement().ones() == len(seq)

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            ExposureSequence((0, 2, 1))
        with pytest.raises(ValueError):
            ExposureSequence(())

    def test_from_text_rejects_garbage(self):
        with pytest.raises(ValueError):
            ExposureSequence.from_text("10a1")

    def test_text_round_trip(self):
        text = "1011001"
        assert ExposureSequence.from_text(text).to_text() == text

    def test_duty_cycle_flat(self):
        assert float(ExposureSequence.flat(52).duty_cycle()) == 1.0

    @given(bit_lists)
    def test_duty_cycle_complement(self, bits):
        seq = ExposureSequence(tuple(bits))
        d = seq.duty_cycle().ratio
        assert seq.complement().duty_cycle().ratio == 1 - d

    def test_duty_cycle_exact_fraction(self):
        seq = ExposureSequence.from_text("110100")
        assert seq.duty_cycle().ratio == Fraction(1, 2)

    def test_pgm_round_trip_binary(self):
        seq = ExposureSequence.from_text("10110001")
        assert ExposureSequence.from_pgm(seq.to_pgm(binary=True)) == seq

    def test_pgm_round_trip_ascii(self):
        seq = ExposureSequence.from_text("0101")
        assert ExposureSequence.from_pgm(seq.to_pgm(binary=False)) == seq


class TestDutyCycle:
    def test_bounds(self):
        with pytest.raises(ValueError):
            DutyCycle(5, 4)
        with pytest.raises(ValueError):
            DutyCycle(0, 0)

    def test_float(self):
        assert float(DutyCycle(16, 52)) == pytest.approx(0.3077, abs=5e-5)


class TestInterleavedCode:
    def test_decode_minimal_word(self):
        s0, s1, s2 = decode_word("21", arity=3)
        assert s0.to_text() == "01"
        assert s1.to_text() == "10"
        assert s2.to_text() == "00"

    def test_encode_minimal_word(self):
        seqs = [ExposureSequence.from_text(t) for t in ("01", "10", "00")]
        assert encode_word(seqs) == "21"

    def test_two_sequence_word(self):
        seqs = [ExposureSequence.from_text("11"), ExposureSequence.from_text("00")]
        assert encode_word(seqs) == "11"

    def test_published_word_decodes_to_printed_sequences(self):
        planes = decode_word(reference_codes.TRIPLET_AVG_MIN, arity=3)
        # printed listings run from the highest bit plane down
        assert tuple(p.to_text() for p in reversed(planes)) == AVG_MIN_PRINTED

    def test_published_max_min_first_sequence(self):
        planes = decode_word(reference_codes.TRIPLET_MAX_MIN, arity=3)
        assert planes[2].to_text() == MAX_MIN_PRINTED_FIRST

    def test_published_word_duty_cycles(self):
        code = InterleavedCode.from_word(reference_codes.TRIPLET_AVG_MIN)
        ratios = sorted(d.ratio for d in code.duty_cycles())
        assert ratios == [Fraction(16, 52), Fraction(18, 52), Fraction(18, 52)]

    def test_round_trip_published_words(self):
        for word in reference_codes.REPORTED_SCORES:
            assert encode_word(decode_word(word, arity=3)) == word

    def test_duty_cycles_sum_to_one(self):
        code = InterleavedCode.from_word(reference_codes.TRIPLET_MAX_MIN)
        assert sum(d.ratio for d in code.duty_cycles()) == 1

    def test_rejects_non_one_hot_digit(self):
        with pytest.raises(InvalidDigitError):
            InterleavedCode.from_word("213", arity=3)

    def test_rejects_non_hex_character(self):
        with pytest.raises(InvalidDigitError):
            InterleavedCode.from_word("2g1", arity=3)

    def test_rejects_digit_beyond_arity(self):
        with pytest.raises(InvalidDigitError):
            InterleavedCode.from_word("41", arity=2)

    def test_rejects_overlap(self):
        seqs = [ExposureSequence.from_text("11"), ExposureSequence.from_text("10")]
        with pytest.raises(NotAPartitionError):
            encode_word(seqs)

    def test_rejects_gap(self):
        seqs = [ExposureSequence.from_text("10"), ExposureSequence.from_text("00")]
        with pytest.raises(NotAPartitionError):
            encode_word(seqs)

    def test_rejects_length_mismatch(self):
        seqs = [ExposureSequence.from_text("10"), ExposureSequence.from_text("011")]
        with pytest.raises(LengthMismatchError):
            encode_word(seqs)

    def test_arity_inference(self):
        assert InterleavedCode.from_word("11").arity == 2
        assert InterleavedCode.from_word("142").arity == 3
        assert InterleavedCode.from_word("8211").arity == 4

    def test_comma_form_for_arity_five(self):
        code = InterleavedCode((16, 1, 2, 4, 8), arity=5)
        word = code.to_word()
        assert word == "16,1,2,4,8"
        assert InterleavedCode.from_word(word) == code

    def test_compact_form_up_to_arity_four(self):
        code = InterleavedCode((8, 4, 2, 1), arity=4)
        assert code.to_word() == "8421"

    @given(st.integers(2, 4), st.lists(st.integers(0, 3), min_size=1, max_size=60),
           )
    def test_random_partitions_round_trip(self, arity, picks):
        digits = tuple(1 << (p % arity) for p in picks)
        code = InterleavedCode(digits, arity)
        seqs = code.decode()
        for column in zip(*(s.bits for s in seqs)):
            assert sum(column) == 1
        assert InterleavedCode.from_sequences(seqs) == code


class TestCodeTextFormat:
    def test_header_round_trip(self):
        code = InterleavedCode.from_word("1212", arity=3)
        parsed = parse_code_text(format_code_text(code))
        assert parsed == code

    def test_header_sets_arity(self):
        parsed = parse_code_text("N=4\n1212\n")
        assert parsed.arity == 4

    def test_without_header_infers(self):
        assert parse_code_text("1414\n").arity == 3

    def test_rejects_multiple_words(self):
        with pytest.raises(ValueError):
            parse_code_text("12\n21\n")

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            parse_code_text("# nothing here\n")
