"""Hypothesis strategies shared across test modules."""

from hypothesis import strategies as st

from hypgrp.words import Alphabet, Word

AB = Alphabet("ab")
ABC = Alphabet("abc")


def raw_letters(n_gens: int, max_size: int = 20):
    letters = [x for g in range(1, n_gens + 1) for x in (g, -g)]
    return st.lists(st.sampled_from(letters), max_size=max_size)


def words(alphabet: Alphabet, max_size: int = 20):
    return raw_letters(len(alphabet), max_size).map(lambda s: Word(alphabet, s))


def positive_words(alphabet: Alphabet, min_size: int = 1, max_size: int = 4):
    return st.lists(st.integers(1, len(alphabet)), min_size=min_size, max_size=max_size).map(
        lambda s: Word(alphabet, s))
