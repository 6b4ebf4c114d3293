"""Pluggable token counting.

The default "heuristic4" tokenizer is ceil(characters / 4): deterministic,
offline, and additive under concatenation up to a slack of 1 token per
join (ceil(a/4) + ceil(b/4) - ceil((a+b)/4) is 0 or 1). A real model
tokenizer can be registered under its own name and referenced by config.
"""

from __future__ import annotations

from typing import Callable

from careloop.errors import UnknownTokenizerError

Tokenizer = Callable[[str], int]

HEURISTIC = "heuristic4"


def heuristic_tokenizer(text: str) -> int:
    return (len(text) + 3) // 4


class TokenizerRegistry:
    def __init__(self):
        self._tokenizers: dict[str, Tokenizer] = {}
        self.register(HEURISTIC, heuristic_tokenizer)

    def register(self, name: str, fn: Tokenizer) -> None:
        self._tokenizers[name] = fn

    def get(self, name: str) -> Tokenizer:
        try:
            return self._tokenizers[name]
        except KeyError:
            raise UnknownTokenizerError(f"no tokenizer registered as {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(self._tokenizers)


_default = TokenizerRegistry()


def default_registry() -> TokenizerRegistry:
    return _default


def count_tokens(text: str, tokenizer: str = HEURISTIC, registry: TokenizerRegistry | None = None) -> int:
    reg = registry or _default
    count = reg.get(tokenizer)(text)
    if count < 0:
        raise ValueError(f"tokenizer {tokenizer!r} returned a negative count")
    return count
