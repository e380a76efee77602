"""Reference exposure codes embedded as defaults and regression fixtures.

Everything here is external input, reproduced verbatim from published
coded-exposure work, not a product of this library. The comment on each
word records the score its publication reported for it; the regression
suite recomputes those scores with this library's scoring pipeline.
"""

# Classic 52-chip broadband chop pattern with 26 open chips (50% duty),
# the standard single-sequence comparison point. Its complement is the
# other half of a complement-pair capture.
BROADBAND_PAIR_SEQUENCE = "1010000111000001010000110011110111010111001001100111"

# One-of-3 interleaved words (digits 1/2/4, 52 chips). Reported scores
# use a 64-point padded spectrum over bins 0..32 normalized by 32.
TRIPLET_MAX_MIN = "2212441414112412441224111241244244242212442211444144"          # -21.4382
TRIPLET_MAX_MIN_ALT1 = "1212222141422244221122444224241121424422424241241242"     # -21.5469
TRIPLET_MAX_MIN_ALT2 = "2211424222421411121144411124121212214214141122112142"     # -21.7312
TRIPLET_AVG_MIN = "2212144111241224412411211221241444112124441212442242"          # -25.6353
TRIPLET_AVG_PAIRS = "2221421124421222111122142141211244121242241114221211"        # -21.6372

REPORTED_SCORES = {
    TRIPLET_MAX_MIN: -21.4382,
    TRIPLET_MAX_MIN_ALT1: -21.5469,
    TRIPLET_MAX_MIN_ALT2: -21.7312,
    TRIPLET_AVG_MIN: -25.6353,
    TRIPLET_AVG_PAIRS: -21.6372,
}
