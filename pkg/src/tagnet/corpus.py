"""Loading, merging and cleaning of hashtag post exports.

Two export layouts are understood:

* JSONL, one object per line with ``id``, ``platform`` and ``hashtags``
  (an array of strings) plus optional ``timestamp`` (RFC 3339) and ``text``.
* CSV with the header ``id,platform,timestamp,text,hashtags`` where the
  hashtags cell is space separated.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, EmptyTokenError, InputError, MalformedRecordError
from .normalize import canonical_form

logger = logging.getLogger(__name__)

PLATFORMS = ("instagram", "twitter", "other")
CSV_HEADER = ("id", "platform", "timestamp", "text", "hashtags")

_TAG_SPLIT = re.compile(r"[\s,#]+")


@dataclass(frozen=True)
class Post:
    id: str
    platform: str
    hashtags: tuple[str, ...] = ()
    timestamp: datetime | None = None
    text: str | None = None

    def __post_init__(self):
        if not self.id:
            raise InputError("post id must be non-empty")
        if self.platform not in PLATFORMS:
            raise InputError(f"unknown platform {self.platform!r}")
        for tag in self.hashtags:
            if not tag or _TAG_SPLIT.search(tag):
                raise InputError(f"invalid raw hashtag {tag!r} in post {self.id}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.platform, self.id)


@dataclass(frozen=True)
class PostCollection:
    posts: tuple[Post, ...] = ()
    query: tuple[str, ...] = ()
    source_files: tuple[str, ...] = field(default=(), compare=False)
    duplicates: int = field(default=0, compare=False)
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        seen = set()
        for post in self.posts:
            if post.key in seen:
                raise InputError(f"duplicate post {post.key} in collection")
            seen.add(post.key)

    def __len__(self):
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)


@dataclass(frozen=True)
class FilterConfig:
    blocklist: frozenset[str] = frozenset()
    max_hashtags_per_post: int | None = 30
    min_hashtags_per_post: int = 1
    drop_duplicate_hashtag_sets: bool = True

    def __post_init__(self):
        lo, hi = self.min_hashtags_per_post, self.max_hashtags_per_post
        if lo < 0 or (hi is not None and hi < lo):
            raise ConfigError(
                f"need max_hashtags_per_post >= min_hashtags_per_post >= 0, got {hi}/{lo}"
            )
        object.__setattr__(
            self, "blocklist", frozenset(_fold_all(self.blocklist))
        )


@dataclass(frozen=True)
class FilterReport:
    input_count: int
    blocklisted: int = 0
    too_few_hashtags: int = 0
    too_many_hashtags: int = 0
    duplicate_hashtag_set: int = 0

    @property
    def removed(self) -> int:
        return (
            self.blocklisted
            + self.too_few_hashtags
            + self.too_many_hashtags
            + self.duplicate_hashtag_set
        )

    @property
    def retained(self) -> int:
        return self.input_count - self.removed

    def as_dict(self) -> dict:
        return {
            "input": self.input_count,
            "removed": {
                "blocklisted": self.blocklisted,
                "too_few_hashtags": self.too_few_hashtags,
                "too_many_hashtags": self.too_many_hashtags,
                "duplicate_hashtag_set": self.duplicate_hashtag_set,
            },
            "retained": self.retained,
        }


def _fold_all(tags: Iterable[str]) -> set[str]:
    out = set()
    for tag in tags:
        try:
            out.add(canonical_form(tag))
        except EmptyTokenError:
            continue
    return out


def split_hashtags(value) -> tuple[str, ...]:
    """Split a hashtag cell or list into raw tags; '#', commas and spaces separate."""
    if value is None:
        return ()
    if isinstance(value, str):
        value = [value]
    tags = []
    for item in value:
        if not isinstance(item, str):
            raise TypeError(f"hashtag entries must be strings, got {type(item).__name__}")
        tags.extend(t for t in _TAG_SPLIT.split(item) if t)
    return tuple(tags)


def parse_platform(value: str) -> str:
    value = (value or "").strip().lower()
    return value if value in PLATFORMS else "other"


def parse_timestamp(value: str | None) -> datetime | None:
    if value is None or value == "":
        return None
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime | None) -> str | None:
    if ts is None:
        return None
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _post_from_record(rec: dict) -> Post:
    if not isinstance(rec, dict):
        raise ValueError("record is not an object")
    for key in ("id", "platform", "hashtags"):
        if key not in rec:
            raise ValueError(f"missing required key {key!r}")
    post_id = rec["id"]
    if not isinstance(post_id, str) or not post_id:
        raise ValueError("id must be a non-empty string")
    text = rec.get("text")
    if text is not None and not isinstance(text, str):
        raise ValueError("text must be a string")
    return Post(
        id=post_id,
        platform=parse_platform(rec["platform"]),
        hashtags=split_hashtags(rec["hashtags"]),
        timestamp=parse_timestamp(rec.get("timestamp")),
        text=text or None,
    )


def _jsonl_records(fh):
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, None, f"invalid JSON ({exc.msg})"
            continue
        yield line_no, rec, None


def _csv_records(fh):
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        return
    header = [h.strip().lower() for h in header]
    missing = {"id", "platform", "hashtags"} - set(header)
    if missing:
        yield 1, None, f"CSV header lacks columns {sorted(missing)}"
        return
    for row in reader:
        line_no = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            yield line_no, None, f"expected {len(header)} fields, got {len(row)}"
            continue
        yield line_no, dict(zip(header, row)), None


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise InputError(f"cannot infer format of {path}; pass jsonl or csv explicitly")


def parse_posts(
    path,
    format: str | None = None,
    *,
    strict: bool = True,
    query: Sequence[str] = (),
) -> PostCollection:
    """Parse an export file into a PostCollection.

    Duplicate ``(platform, id)`` rows keep their first occurrence. In
    strict mode a malformed record raises MalformedRecordError; otherwise
    it is skipped and counted in ``PostCollection.skipped``.
    """
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt not in ("jsonl", "csv"):
        raise InputError(f"unsupported format {fmt!r}")
    # OSError propagates for unreadable paths
    with open(path, encoding="utf-8", newline="") as fh:
        records = list(_jsonl_records(fh) if fmt == "jsonl" else _csv_records(fh))

    posts: list[Post] = []
    seen: set[tuple[str, str]] = set()
    duplicates = skipped = 0
    for line_no, rec, problem in records:
        post = None
        if problem is None:
            try:
                post = _post_from_record(rec)
            except (ValueError, TypeError) as exc:
                problem = str(exc)
        if problem is not None:
            if strict:
                raise MalformedRecordError(path, line_no, problem)
            logger.warning("skipping %s:%d: %s", path, line_no, problem)
            skipped += 1
            continue
        if post.key in seen:
            duplicates += 1
            continue
        seen.add(post.key)
        posts.append(post)

    return PostCollection(
        posts=tuple(posts),
        query=tuple(sorted(_fold_all(query))),
        source_files=(str(path),),
        duplicates=duplicates,
        skipped=skipped,
    )


def merge_collections(collections: Sequence[PostCollection]) -> PostCollection:
    """Union of several downloads, deduplicated by ``(platform, id)``.

    Posts keep the order in which they are first met; queries are unioned.
    """
    if not collections:
        raise InputError("merge_collections needs at least one collection")
    posts: list[Post] = []
    seen: set[tuple[str, str]] = set()
    queries: set[str] = set()
    sources: list[str] = []
    duplicates = 0
    for coll in collections:
        queries.update(coll.query)
        sources.extend(s for s in coll.source_files if s not in sources)
        for post in coll.posts:
            if post.key in seen:
                duplicates += 1
                continue
            seen.add(post.key)
            posts.append(post)
    if len(collections) == 1:
        return collections[0]
    return PostCollection(
        posts=tuple(posts),
        query=tuple(sorted(queries)),
        source_files=tuple(sources),
        duplicates=sum(c.duplicates for c in collections) + duplicates,
        skipped=sum(c.skipped for c in collections),
    )


def filter_by_query(posts: PostCollection, query: Iterable[str]) -> PostCollection:
    """Keep posts carrying at least one of the query tags (case-insensitive)."""
    wanted = _fold_all(query)
    if not wanted:
        return posts
    kept = tuple(p for p in posts.posts if wanted & _fold_all(p.hashtags))
    return replace(posts, posts=kept, query=tuple(sorted(set(posts.query) | wanted)))


def filter_posts(
    posts: PostCollection, cfg: FilterConfig = FilterConfig()
) -> tuple[PostCollection, FilterReport]:
    """Drop advertisement and bot-like posts.

    Rules run in order and each removed post is charged to the first rule
    that catches it: blocklisted tag, too few tags, too many tags, then a
    hashtag multiset that already appeared in an earlier retained post.
    """
    counts = Counter()
    kept: list[Post] = []
    seen_sets: set[tuple[str, ...]] = set()
    for post in posts.posts:
        folded = _fold_all(post.hashtags)
        n_tags = len(post.hashtags)
        if cfg.blocklist and folded & cfg.blocklist:
            counts["blocklisted"] += 1
            continue
        if n_tags < cfg.min_hashtags_per_post:
            counts["too_few_hashtags"] += 1
            continue
        if cfg.max_hashtags_per_post is not None and n_tags > cfg.max_hashtags_per_post:
            counts["too_many_hashtags"] += 1
            continue
        if cfg.drop_duplicate_hashtag_sets:
            signature = tuple(sorted(post.hashtags))
            if signature in seen_sets:
                counts["duplicate_hashtag_set"] += 1
                continue
            seen_sets.add(signature)
        kept.append(post)
    report = FilterReport(input_count=len(posts.posts), **counts)
    return replace(posts, posts=tuple(kept)), report


def load_blocklist(path) -> frozenset[str]:
    """Read a blocklist: one tag per line, optional '#', '//' comments."""
    tags = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            tags.append(line)
    return frozenset(_fold_all(tags))


def _post_record(post: Post) -> dict:
    rec = {"id": post.id, "platform": post.platform, "hashtags": list(post.hashtags)}
    if post.timestamp is not None:
        rec["timestamp"] = format_timestamp(post.timestamp)
    if post.text is not None:
        rec["text"] = post.text
    return rec


def dumps_jsonl(posts: PostCollection) -> str:
    return "".join(
        json.dumps(_post_record(p), ensure_ascii=False, sort_keys=True) + "\n"
        for p in posts.posts
    )


def dumps_csv(posts: PostCollection) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in posts.posts:
        writer.writerow(
            [p.id, p.platform, format_timestamp(p.timestamp) or "", p.text or "", " ".join(p.hashtags)]
        )
    return buf.getvalue()


def write_posts(posts: PostCollection, path, format: str | None = None) -> None:
    fmt = format or infer_format(path)
    text = dumps_jsonl(posts) if fmt == "jsonl" else dumps_csv(posts)
    Path(path).write_text(text, encoding="utf-8", newline="")
