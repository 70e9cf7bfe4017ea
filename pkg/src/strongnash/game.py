"""Finite strategic-form games, strategy profiles and expected utility.

Payoffs live in a single float64 array of shape ``(n, m_1, ..., m_n)`` so
``game.payoffs[i]`` is player ``i``'s utility tensor, indexed by one action
per player. The on-disk format flattens each tensor row-major (last player's
action varies fastest).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EPS_PROB = 1e-9
EPS_SUPPORT = 1e-12

# Alias for the utility-space point of one player set: a 1-d float array.
PayoffPoint = np.ndarray


class GameError(ValueError):
    """Invalid game or profile, or a game/profile shape mismatch."""


class DegenerateProfileError(GameError):
    pass


class GameFormatError(GameError):
    """Malformed game or profile file."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Game:
    payoffs: np.ndarray
    name: str | None = None

    def __post_init__(self):
        p = np.array(self.payoffs, dtype=float)
        if p.ndim < 3:
            raise GameError(f"payoff array needs shape (n, m_1, ..., m_n), got {p.shape}")
        n = p.shape[0]
        if n < 2:
            raise GameError(f"need at least 2 players, got {n}")
        if p.ndim != n + 1:
            raise GameError(f"{n} players but payoff tensors have {p.ndim - 1} action axes")
        if min(p.shape[1:]) < 1:
            raise GameError(f"every player needs at least one action, got {p.shape[1:]}")
        if not np.all(np.isfinite(p)):
            raise GameError("payoffs must be finite")
        object.__setattr__(self, "payoffs", _frozen(p))

    @classmethod
    def from_cells(cls, cells, name: str | None = None) -> Game:
        """Build from a nested array of payoff vectors, shape ``(m_1, ..., m_n, n)``."""
        c = np.asarray(cells, dtype=float)
        return cls(np.moveaxis(c, -1, 0), name=name)

    @classmethod
    def from_bimatrix(cls, a, b, name: str | None = None) -> Game:
        return cls(np.stack([np.asarray(a, float), np.asarray(b, float)]), name=name)

    @property
    def n(self) -> int:
        return self.payoffs.shape[0]

    @property
    def actions(self) -> tuple[int, ...]:
        return tuple(self.payoffs.shape[1:])

    @cached_property
    def cells(self) -> np.ndarray:
        """All payoff vectors as a ``(prod(m), n)`` array, row-major cell order."""
        return self.payoffs.reshape(self.n, -1).T

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return (
            self.name == other.name
            and self.payoffs.shape == other.payoffs.shape
            and bool(np.array_equal(self.payoffs, other.payoffs))
        )

    def __hash__(self):
        return hash((self.name, self.payoffs.shape, self.payoffs.tobytes()))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Game{label} n={self.n} actions={self.actions}>"


@dataclass(frozen=True, eq=False)
class MixedProfile:
    probs: tuple[np.ndarray, ...]

    def __post_init__(self):
        probs = tuple(_frozen(np.ravel(x)) for x in self.probs)
        for i, x in enumerate(probs):
            if x.size == 0:
                raise GameError(f"player {i}: empty probability vector")
            if not np.all(np.isfinite(x)):
                raise GameError(f"player {i}: non-finite probability")
            if x.min() < -EPS_PROB:
                raise GameError(f"player {i}: negative probability {x.min():g}")
            if abs(x.sum() - 1.0) > EPS_PROB:
                raise GameError(f"player {i}: probabilities sum to {x.sum():.12g}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def pure(cls, actions: Sequence[int], profile: Sequence[int]) -> MixedProfile:
        probs = []
        for m, a in zip(actions, profile):
            x = np.zeros(m)
            x[a] = 1.0
            probs.append(x)
        return cls(tuple(probs))

    @classmethod
    def uniform(cls, actions: Sequence[int], supports: Sequence[Iterable[int]] | None = None) -> MixedProfile:
        """Uniform over ``supports[i]`` (all actions when omitted)."""
        if supports is None:
            supports = [range(m) for m in actions]
        probs = []
        for m, s in zip(actions, supports):
            s = list(s)
            x = np.zeros(m)
            x[s] = 1.0 / len(s)
            probs.append(x)
        return cls(tuple(probs))

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(x.size for x in self.probs)

    def is_pure(self, eps: float = EPS_SUPPORT) -> bool:
        return all(int(np.sum(x > eps)) == 1 for x in self.probs)

    def to_json(self) -> dict:
        return {"probs": [x.tolist() for x in self.probs]}

    def allclose(self, other: MixedProfile, atol: float = 1e-9) -> bool:
        return self.shape == other.shape and all(
            np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(self.probs, other.probs)
        )

    def __eq__(self, other):
        if not isinstance(other, MixedProfile):
            return NotImplemented
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.probs, other.probs)
        )

    def __repr__(self):
        inner = ", ".join(np.array2string(x, precision=4) for x in self.probs)
        return f"MixedProfile({inner})"


@dataclass(frozen=True)
class SupportProfile:
    supports: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sup = tuple(tuple(int(a) for a in s) for s in self.supports)
        for i, s in enumerate(sup):
            if not s:
                raise GameError(f"player {i}: empty support")
            if list(s) != sorted(set(s)):
                raise GameError(f"player {i}: support {s} must be sorted and duplicate-free")
            if s[0] < 0:
                raise GameError(f"player {i}: negative action index in {s}")
        object.__setattr__(self, "supports", sup)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.supports)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.supports[i]

    def __len__(self):
        return len(self.supports)

    def check(self, game: Game) -> None:
        if len(self.supports) != game.n:
            raise GameError(f"support has {len(self.supports)} players, game has {game.n}")
        for i, (s, m) in enumerate(zip(self.supports, game.actions)):
            if s[-1] >= m:
                raise GameError(f"player {i}: action {s[-1]} out of range (m={m})")


def check_profile(game: Game, profile: MixedProfile) -> None:
    if profile.shape != game.actions:
        raise GameError(f"profile shape {profile.shape} does not match game actions {game.actions}")


def contract(tensor: np.ndarray, probs: Sequence[np.ndarray], keep: Iterable[int] = ()) -> np.ndarray:
    """Contract the player axes of ``tensor`` with ``probs``, except players in ``keep``.

    ``tensor`` may carry leading non-player axes; player axes are the trailing
    ``len(probs)`` ones. Kept axes stay in player order.
    """
    keep = set(keep)
    n = len(probs)
    lead = tensor.ndim - n
    out = tensor
    for j in reversed(range(n)):
        if j not in keep:
            out = np.tensordot(out, probs[j], axes=([lead + j], [0]))
    return out


def expected_utility(game: Game, profile: MixedProfile) -> np.ndarray:
    """Vector of expected utilities, one per player."""
    check_profile(game, profile)
    return contract(game.payoffs, profile.probs)


def action_values(game: Game, player: int, profile: MixedProfile) -> np.ndarray:
    """Expected utility to ``player`` of each of its pure actions against the others' mixtures."""
    check_profile(game, profile)
    if not 0 <= player < game.n:
        raise GameError(f"player {player} out of range")
    return contract(game.payoffs[player], profile.probs, keep=[player])


def action_value(game: Game, player: int, action: int, profile: MixedProfile) -> float:
    if not 0 <= action < game.actions[player]:
        raise GameError(f"player {player}: action {action} out of range (m={game.actions[player]})")
    return float(action_values(game, player, profile)[action])


def support_of(profile: MixedProfile, eps: float = EPS_SUPPORT) -> SupportProfile:
    sup = []
    for i, x in enumerate(profile.probs):
        s = tuple(int(a) for a in np.flatnonzero(x > eps))
        if not s:
            raise DegenerateProfileError(f"player {i}: no action above threshold {eps:g}")
        sup.append(s)
    return SupportProfile(tuple(sup))


def restrict(game: Game, support: SupportProfile) -> Game:
    support.check(game)
    idx = np.ix_(range(game.n), *[list(s) for s in support.supports])
    return Game(game.payoffs[idx], name=game.name)


# -- file I/O ---------------------------------------------------------------

def game_to_json(game: Game) -> dict:
    doc = {}
    if game.name is not None:
        doc["name"] = game.name
    doc["players"] = game.n
    doc["actions"] = list(game.actions)
    doc["payoffs"] = [game.payoffs[i].ravel().tolist() for i in range(game.n)]
    return doc


def game_from_json(doc, source: str = "<game>") -> Game:
    if not isinstance(doc, dict):
        raise GameFormatError(f"{source}: top level must be an object")
    unknown = set(doc) - {"name", "players", "actions", "payoffs"}
    if unknown:
        raise GameFormatError(f"{source}: unknown field(s) {sorted(unknown)}")
    for key in ("players", "actions", "payoffs"):
        if key not in doc:
            raise GameFormatError(f"{source}: missing field '{key}'")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise GameFormatError(f"{source}: field 'name' must be a string")
    n = doc["players"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise GameFormatError(f"{source}: field 'players' must be an integer >= 2, got {n!r}")
    actions = doc["actions"]
    if not isinstance(actions, list) or len(actions) != n:
        raise GameFormatError(f"{source}: field 'actions' must list {n} action counts")
    for i, m in enumerate(actions):
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise GameFormatError(f"{source}: actions[{i}] must be an integer >= 1, got {m!r}")
    payoffs = doc["payoffs"]
    if not isinstance(payoffs, list) or len(payoffs) != n:
        raise GameFormatError(f"{source}: field 'payoffs' must hold {n} flat arrays")
    size = int(np.prod(actions))
    tensors = []
    for i, flat in enumerate(payoffs):
        if not isinstance(flat, list) or len(flat) != size:
            got = len(flat) if isinstance(flat, list) else type(flat).__name__
            raise GameFormatError(f"{source}: payoffs[{i}] must have {size} entries, got {got}")
        for k, v in enumerate(flat):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
                raise GameFormatError(f"{source}: payoffs[{i}][{k}] is not a finite number: {v!r}")
        tensors.append(np.asarray(flat, dtype=float).reshape(actions))
    return Game(np.stack(tensors), name=name)


def _parse_json(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def load_game(path) -> Game:
    path = Path(path)
    return game_from_json(_parse_json(path.read_text(), str(path)), str(path))


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_game(game: Game, path) -> None:
    atomic_write_text(path, json.dumps(game_to_json(game)) + "\n")


def profile_from_json(doc, source: str = "<profile>") -> MixedProfile:
    if not isinstance(doc, dict) or not isinstance(doc.get("probs"), list):
        raise GameFormatError(f"{source}: expected an object with a 'probs' list")
    for i, x in enumerate(doc["probs"]):
        if not isinstance(x, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
        ):
            raise GameFormatError(f"{source}: probs[{i}] must be a list of numbers")
    try:
        return MixedProfile(tuple(np.asarray(x, float) for x in doc["probs"]))
    except GameError as exc:
        raise GameFormatError(f"{source}: {exc}") from None


def load_profile(path) -> MixedProfile:
    path = Path(path)
    return profile_from_json(_parse_json(path.read_text(), str(path)), str(path))


def save_profile(profile: MixedProfile, path) -> None:
    atomic_write_text(path, json.dumps(profile.to_json()) + "\n")
