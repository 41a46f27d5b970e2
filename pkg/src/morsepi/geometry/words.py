"""Words in a free group.

A word is a tuple of nonzero integers: letter ``k`` is the k-th
generator and ``-k`` its inverse.
"""

from __future__ import annotations

from typing import Iterable, Sequence

Word = tuple[int, ...]


def reduce_word(letters: Iterable[int]) -> Word:
    """Free reduction: cancel adjacent inverse pairs until none remain."""
    stack: list[int] = []
    for letter in letters:
        if letter == 0:
            raise ValueError("0 is not a letter")
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def concat_words(*words: Sequence[int]) -> Word:
    """Reduced product of words."""
    return reduce_word(letter for word in words for letter in word)


def cyclic_reduce(word: Sequence[int]) -> Word:
    """Strip inverse letters from both ends of a reduced word."""
    reduced = list(reduce_word(word))
    while len(reduced) > 1 and reduced[0] == -reduced[-1]:
        reduced = reduced[1:-1]
    return tuple(reduced)


def cyclic_normal_form(word: Sequence[int]) -> Word:
    """Least rotation of the word or its inverse, after cyclic reduction.

    Two relators generate the same normal closure when their normal
    forms agree.
    """
    core = cyclic_reduce(word)
    if not core:
        return ()
    candidates = []
    for variant in (core, invert_word(core)):
        for shift in range(len(variant)):
            candidates.append(variant[shift:] + variant[:shift])
    return min(candidates, key=lambda w: (len(w), tuple((abs(x), x < 0) for x in w)))


def exponent_vector(word: Sequence[int], rank: int) -> list[int]:
    """Exponent sums per generator, the image of the word in Z^rank."""
    vector = [0] * rank
    for letter in word:
        index = abs(letter) - 1
        if index >= rank:
            raise ValueError(f"letter {letter} exceeds rank {rank}")
        vector[index] += 1 if letter > 0 else -1
    return vector


def format_word(word: Sequence[int], labels: Sequence[str] | None = None) -> str:
    """Human readable form, e.g. ``g1 g2^-1``; the empty word prints as ``1``."""
    if not word:
        return "1"
    parts = []
    for letter in word:
        name = labels[abs(letter) - 1] if labels else f"g{abs(letter)}"
        parts.append(name if letter > 0 else f"{name}^-1")
    return " ".join(parts)
