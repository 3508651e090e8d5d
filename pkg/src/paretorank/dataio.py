"""Ratings ingestion: file parsing, sparse matrix construction, train/test splitting.

Two input formats are supported: the `::`-separated MovieLens ``.dat`` layout
(no header) and generic delimited text with a header row, where a column map
names the user/item/rating columns. All text is treated as UTF-8; both LF and
CRLF line endings are accepted.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, LineParseError


@dataclass
class RatingRecord:
    """One (user, item, rating) observation; ids are opaque strings."""

    user_id: str
    item_id: str
    rating: float
    timestamp: Optional[int] = None


@dataclass
class ParseResult:
    """Parsed records plus the number of rows dropped under the skip policy."""

    records: list[RatingRecord]
    skipped: int = 0


class RatingMatrix:
    """Sparse user x item rating store with dense 0-based index remapping.

    Raw string ids are remapped to dense indices in first-appearance order.
    Per-user ratings are held as ``{item_index: rating}`` dicts so a user's
    items are retrievable in O(items-of-user). Instances are treated as
    immutable after construction and are safe for concurrent reads.
    """

    def __init__(self, user_ids, item_ids, by_user, r_min, r_max):
        self.user_ids = user_ids
        self.item_ids = item_ids
        self.user_to_index = {u: idx for idx, u in enumerate(user_ids)}
        self.item_to_index = {i: idx for idx, i in enumerate(item_ids)}
        self._by_user = by_user
        self.r_min = float(r_min)
        self.r_max = float(r_max)
        self._n_entries = sum(len(d) for d in by_user)

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @property
    def n_entries(self) -> int:
        return self._n_entries

    def rating(self, user: int, item: int) -> float:
        return self._by_user[user][item]

    def has(self, user: int, item: int) -> bool:
        return item in self._by_user[user]

    def items_of(self, user: int) -> dict[int, float]:
        """The user's ``{item_index: rating}`` map. Treat as read-only."""
        return self._by_user[user]

    def iter_entries(self) -> Iterator[tuple[int, int, float]]:
        """Yield (user, item, rating) user-major, insertion order within user."""
        for u, items in enumerate(self._by_user):
            for i, r in items.items():
                yield u, i, r

    def same_space(self, by_user) -> "RatingMatrix":
        """A matrix over the same ids/scale but a different entry subset."""
        return RatingMatrix(self.user_ids, self.item_ids, by_user, self.r_min, self.r_max)


@dataclass
class SplitPair:
    """Disjoint train/test matrices covering a source matrix's entries."""

    train: RatingMatrix
    test: RatingMatrix
    seed: int
    test_ratio: float


def _decoded_lines(source) -> Iterator[str]:
    """Iterate text lines from a byte/text stream or an iterable of lines."""
    if hasattr(source, "read"):
        source = iter(source)
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8-sig")
        yield raw.rstrip("\r\n")


def parse_movielens(source, errors: str = "raise") -> ParseResult:
    """Parse ``UserID::MovieID::Rating::Timestamp`` lines into rating records.

    Args:
        source: byte or text stream (or iterable of lines), no header.
        errors: "raise" fails on the first malformed line; "skip" drops
            malformed lines and counts them in the result.

    Returns:
        ParseResult with one record per well-formed line, in file order.
    """
    if errors not in ("raise", "skip"):
        raise ConfigError(f"unknown error policy {errors!r}; use 'raise' or 'skip'")
    records = []
    skipped = 0
    for line_no, line in enumerate(_decoded_lines(source), start=1):
        try:
            records.append(_parse_movielens_line(line_no, line))
        except LineParseError:
            if errors == "raise":
                raise
            skipped += 1
    return ParseResult(records, skipped)


def _parse_movielens_line(line_no: int, line: str) -> RatingRecord:
    parts = line.split("::")
    if len(parts) != 4:
        raise LineParseError(line_no, line, f"expected 4 '::'-separated fields, got {len(parts)}")
    user_id, item_id, rating_s, ts_s = parts
    if not user_id or not item_id:
        raise LineParseError(line_no, line, "empty user or item id")
    try:
        rating = float(rating_s)
        timestamp = int(ts_s)
    except ValueError as exc:
        raise LineParseError(line_no, line, str(exc)) from None
    if not math.isfinite(rating):
        raise LineParseError(line_no, line, f"non-finite rating {rating_s!r}")
    return RatingRecord(user_id, item_id, rating, timestamp)


def parse_csv(
    source,
    columns: tuple[str, str, str] = ("userID", "itemID", "rating"),
    delimiter: str = ",",
    errors: str = "raise",
) -> ParseResult:
    """Parse delimited text with a header row into rating records.

    Only the three mapped columns (user, item, rating) are consumed; any
    extra columns are ignored. A column map naming an absent header is a
    configuration error; a bad row is a data error subject to the same
    raise/skip policy as :func:`parse_movielens`.
    """
    if errors not in ("raise", "skip"):
        raise ConfigError(f"unknown error policy {errors!r}; use 'raise' or 'skip'")
    lines = _decoded_lines(source)
    try:
        header_line = next(lines)
    except StopIteration:
        raise DataError("empty input: no header row") from None
    header = header_line.split(delimiter)
    try:
        u_col, i_col, r_col = (header.index(name) for name in columns)
    except ValueError:
        missing = [name for name in columns if name not in header]
        raise ConfigError(f"column(s) {missing} not found in header {header}") from None

    records = []
    skipped = 0
    width = max(u_col, i_col, r_col)
    for line_no, line in enumerate(lines, start=2):
        if not line:
            continue
        cells = line.split(delimiter)
        try:
            if len(cells) <= width:
                raise LineParseError(line_no, line, f"expected at least {width + 1} fields, got {len(cells)}")
            user_id, item_id, rating_s = cells[u_col], cells[i_col], cells[r_col]
            if not user_id or not item_id:
                raise LineParseError(line_no, line, "empty user or item id")
            try:
                rating = float(rating_s)
            except ValueError:
                raise LineParseError(line_no, line, f"non-numeric rating {rating_s!r}") from None
            if not math.isfinite(rating):
                raise LineParseError(line_no, line, f"non-finite rating {rating_s!r}")
        except LineParseError:
            if errors == "raise":
                raise
            skipped += 1
            continue
        records.append(RatingRecord(user_id, item_id, rating))
    return ParseResult(records, skipped)


def build_matrix(
    records: Sequence[RatingRecord],
    scale: Optional[tuple[float, float]] = None,
) -> RatingMatrix:
    """Build a RatingMatrix from records.

    Indices are assigned in first-appearance order; duplicate (user, item)
    pairs keep the last record's rating. With no declared scale the observed
    (min, max) is used; with a declared scale any rating outside it is an
    error.
    """
    if not records:
        raise DataError("cannot build a rating matrix from zero records")
    user_ids: list[str] = []
    item_ids: list[str] = []
    u_index: dict[str, int] = {}
    i_index: dict[str, int] = {}
    by_user: list[dict[int, float]] = []
    lo = math.inf
    hi = -math.inf
    for rec in records:
        if not math.isfinite(rec.rating):
            raise DataError(f"non-finite rating for user {rec.user_id!r}, item {rec.item_id!r}")
        if scale is not None and not (scale[0] <= rec.rating <= scale[1]):
            raise DataError(
                f"rating {rec.rating} outside declared scale [{scale[0]}, {scale[1]}] "
                f"(user {rec.user_id!r}, item {rec.item_id!r})"
            )
        u = u_index.setdefault(rec.user_id, len(user_ids))
        if u == len(user_ids):
            user_ids.append(rec.user_id)
            by_user.append({})
        i = i_index.setdefault(rec.item_id, len(item_ids))
        if i == len(item_ids):
            item_ids.append(rec.item_id)
        by_user[u][i] = rec.rating
        lo = min(lo, rec.rating)
        hi = max(hi, rec.rating)
    r_min, r_max = scale if scale is not None else (lo, hi)
    return RatingMatrix(user_ids, item_ids, by_user, r_min, r_max)


def split(matrix: RatingMatrix, test_ratio: float, seed: int) -> SplitPair:
    """Split entries uniformly at random into train/test, driven only by seed.

    Each entry lands in test with probability ``test_ratio``. Train and test
    share the source matrix's full index space, so users or items whose every
    entry went to test keep their (empty) rows in train.
    """
    if not 0.0 <= test_ratio <= 1.0:
        raise ValueError(f"test_ratio must be in [0, 1], got {test_ratio}")
    rng = np.random.default_rng(seed)
    draws = rng.random(matrix.n_entries)
    train_by_user: list[dict[int, float]] = [{} for _ in range(matrix.n_users)]
    test_by_user: list[dict[int, float]] = [{} for _ in range(matrix.n_users)]
    for pos, (u, i, r) in enumerate(matrix.iter_entries()):
        if draws[pos] < test_ratio:
            test_by_user[u][i] = r
        else:
            train_by_user[u][i] = r
    return SplitPair(
        train=matrix.same_space(train_by_user),
        test=matrix.same_space(test_by_user),
        seed=seed,
        test_ratio=test_ratio,
    )
