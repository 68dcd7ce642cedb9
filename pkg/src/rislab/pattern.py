"""1-bit RIS pattern grid, canonical builders and the hex control-string codec.

A pattern is a 16x16 grid of phase bits.  Bit 1 means the element adds a
180 degree phase shift on reflection, bit 0 means it reflects unchanged.

The wire encoding is ``"!0X"`` followed by 64 hex digits.  The plate is split
into 64 groups of four horizontally adjacent elements, numbered row-major from
the top-left corner (four groups per row).  Digit ``g`` encodes group ``g`` with
the most significant bit on the leftmost element, so ``8`` switches only the
first element of a group and ``3`` switches the last two.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

ROWS = 16
COLS = 16
N_ELEMENTS = ROWS * COLS
GROUP_SIZE = 4
GROUPS_PER_ROW = COLS // GROUP_SIZE
N_GROUPS = N_ELEMENTS // GROUP_SIZE

PREFIX = "!0X"
CONTROL_STRING_LENGTH = len(PREFIX) + N_GROUPS
_HEX = "0123456789ABCDEF"

# Group traversal order lives here so it can be swapped in one place.
GROUP_ORDER = "row-major"

_MASK64 = (1 << 64) - 1


class MalformedControlString(ValueError):
    """Raised by :func:`decode` for a string that is not a valid control string."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class RisPattern:
    """Immutable 16x16 grid of phase bits, indexed ``(row, col)`` from the top-left."""

    __slots__ = ("_bits",)

    def __init__(self, bits):
        arr = np.asarray(bits)
        if arr.shape == (N_ELEMENTS,):
            arr = arr.reshape(ROWS, COLS)
        if arr.shape != (ROWS, COLS):
            raise ValueError(f"pattern must be {ROWS}x{COLS}, got shape {arr.shape}")
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("pattern bits must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self._bits = arr

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``(16, 16)`` uint8 array."""
        return self._bits

    @property
    def shape(self) -> tuple[int, int]:
        return (ROWS, COLS)

    def __getitem__(self, rc: tuple[int, int]) -> int:
        return int(self._bits[rc])

    def count_ones(self) -> int:
        return int(self._bits.sum())

    def signs(self) -> np.ndarray:
        """Per-element reflection sign, +1 for bit 0 and -1 for bit 1 (row-major, flat)."""
        return 1.0 - 2.0 * self._bits.ravel().astype(np.float64)

    def __eq__(self, other):
        if not isinstance(other, RisPattern):
            return NotImplemented
        return bool(np.array_equal(self._bits, other._bits))

    def __hash__(self):
        return hash(self._bits.tobytes())

    def __repr__(self):
        return f"RisPattern({encode(self)!r})"

    def to_text(self) -> str:
        return "\n".join("".join(str(b) for b in row) for row in self._bits) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RisPattern:
        """Parse 16 lines of 16 ``0``/``1`` characters; blank lines are ignored."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) != ROWS:
            raise ValueError(f"grid must have {ROWS} lines, got {len(lines)}")
        rows = []
        for i, ln in enumerate(lines):
            if len(ln) != COLS or set(ln) - {"0", "1"}:
                raise ValueError(f"grid line {i + 1} must be {COLS} characters of 0/1: {ln!r}")
            rows.append([int(ch) for ch in ln])
        return cls(rows)

    @classmethod
    def from_file(cls, path) -> RisPattern:
        return cls.from_text(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def group_cells(group: int) -> list[tuple[int, int]]:
    """Cells ``(row, col)`` of a group, left to right."""
    if not 0 <= group < N_GROUPS:
        raise ValueError(f"group index must be in 0..{N_GROUPS - 1}, got {group}")
    r, k = divmod(group, GROUPS_PER_ROW)
    c0 = GROUP_SIZE * k
    return [(r, c) for c in range(c0, c0 + GROUP_SIZE)]


def uniform(state: int) -> RisPattern:
    return RisPattern(np.full((ROWS, COLS), _check_bit(state), dtype=np.uint8))


def stripes(orientation: str, band_width: int, phase_of_first_band: int = 1) -> RisPattern:
    """Alternating bands of equal width.

    ``vertical`` bands run top to bottom, so the bit depends on the column;
    ``horizontal`` bands depend on the row.  The first band (left or top)
    takes ``phase_of_first_band``.
    """
    _check_extent("band_width", band_width)
    first = _check_bit(phase_of_first_band)
    if orientation not in ("horizontal", "vertical"):
        raise ValueError(f"orientation must be 'horizontal' or 'vertical', got {orientation!r}")
    idx = np.arange(ROWS if orientation == "horizontal" else COLS)
    band = ((idx // band_width) % 2) ^ first
    band = band.astype(np.uint8)
    if orientation == "vertical":
        grid = np.broadcast_to(band[None, :], (ROWS, COLS))
    else:
        grid = np.broadcast_to(band[:, None], (ROWS, COLS))
    return RisPattern(grid)


def checkerboard(block: int) -> RisPattern:
    _check_extent("block", block)
    r, c = np.indices((ROWS, COLS))
    return RisPattern(((r // block + c // block) % 2).astype(np.uint8))


def single_element(row: int, col: int) -> RisPattern:
    bits = np.zeros((ROWS, COLS), dtype=np.uint8)
    bits[row, col] = 1
    return RisPattern(bits)


def splitmix64(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def random_pattern(seed: int) -> RisPattern:
    """Pseudo-random pattern drawn from SplitMix64 seeded with ``seed``.

    Four consecutive 64-bit outputs fill the grid row-major; within each word
    the most significant bit comes first.  Negative or oversized seeds are
    reduced modulo 2**64.
    """
    state = seed & _MASK64
    bits = []
    for _ in range(N_ELEMENTS // 64):
        state, word = splitmix64(state)
        bits.extend((word >> (63 - i)) & 1 for i in range(64))
    return RisPattern(np.array(bits, dtype=np.uint8))


def complement(p: RisPattern) -> RisPattern:
    return RisPattern(1 - p.bits)


def encode(p: RisPattern) -> str:
    groups = p.bits.reshape(N_GROUPS, GROUP_SIZE)
    values = groups @ np.array([8, 4, 2, 1])
    return PREFIX + "".join(_HEX[v] for v in values)


def decode(s: str) -> RisPattern:
    if not isinstance(s, str):
        raise MalformedControlString(f"control string must be text, got {type(s).__name__}", 0)
    for i, ch in enumerate(PREFIX):
        if i >= len(s) or s[i].upper() != ch:
            raise MalformedControlString(f"expected prefix {PREFIX!r}", i)
    if len(s) != CONTROL_STRING_LENGTH:
        raise MalformedControlString(
            f"control string must be {CONTROL_STRING_LENGTH} characters, got {len(s)}",
            min(len(s), CONTROL_STRING_LENGTH),
        )
    bits = np.empty(N_ELEMENTS, dtype=np.uint8)
    for g, ch in enumerate(s[len(PREFIX):]):
        v = _HEX.find(ch.upper())
        if v < 0:
            raise MalformedControlString(f"non-hex character {ch!r}", len(PREFIX) + g)
        for j in range(GROUP_SIZE):
            bits[GROUP_SIZE * g + j] = (v >> (GROUP_SIZE - 1 - j)) & 1
    return RisPattern(bits)


def pattern_space_size(states_per_element: int, elements: int) -> int:
    """Number of distinct patterns of ``elements`` cells with ``states_per_element`` states each."""
    if states_per_element < 2 or elements < 1:
        raise ValueError("need states_per_element >= 2 and elements >= 1")
    return states_per_element**elements


def _check_bit(state) -> int:
    if state not in (0, 1):
        raise ValueError(f"phase bit must be 0 or 1, got {state!r}")
    return int(state)


def _check_extent(name: str, value: int) -> None:
    if not isinstance(value, (int, np.integer)) or not 1 <= value <= min(ROWS, COLS):
        raise ValueError(f"{name} must be an integer in 1..{min(ROWS, COLS)}, got {value!r}")
