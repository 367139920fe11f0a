"""Hashtag canonicalization: case and Unicode folding, translation,
plural folding and edit-distance variant folding.
"""

from __future__ import annotations

import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping

from .errors import ConfigError, EmptyTokenError


class Provenance(str, Enum):
    CASE_FOLD = "case_fold"
    TRANSLATION = "translation"
    PLURAL = "plural"
    EDIT_DISTANCE = "edit_distance"


def canonical_form(raw: str) -> str:
    """NFC, lowercase, no leading '#', no punctuation or whitespace."""
    text = unicodedata.normalize("NFC", raw).lower().lstrip("#")
    text = "".join(
        ch for ch in text
        if not unicodedata.category(ch).startswith("P") and not ch.isspace()
    )
    text = unicodedata.normalize("NFC", text)
    if not text:
        raise EmptyTokenError(f"hashtag {raw!r} is empty after canonicalization")
    return text


@dataclass(frozen=True)
class NormalizationRules:
    translation_map: Mapping[str, str] = field(default_factory=dict)
    variant_merge_enabled: bool = True
    edit_distance_threshold: int = 1
    plural_folding_enabled: bool = True
    min_frequency_for_canonical: int = 2

    def __post_init__(self):
        if self.edit_distance_threshold not in (0, 1, 2):
            raise ConfigError("edit_distance_threshold must be 0, 1 or 2")
        if self.min_frequency_for_canonical < 1:
            raise ConfigError("min_frequency_for_canonical must be >= 1")
        for value in self.translation_map.values():
            if canonical_form(value) != value:
                raise ConfigError(f"translation target {value!r} is not canonical")


@dataclass(frozen=True)
class VariantMap:
    mapping: dict[str, str]
    provenance: dict[str, Provenance]

    def __getitem__(self, token: str) -> str:
        return self.mapping[token]

    def get(self, token: str, default=None):
        return self.mapping.get(token, default)

    def __contains__(self, token):
        return token in self.mapping

    def changed(self) -> dict[str, str]:
        return {k: v for k, v in sorted(self.mapping.items()) if k != v}


@dataclass
class NormalizationReport:
    vocabulary_before: int
    vocabulary_after: int
    affected: dict[str, int]
    dropped_empty: int = 0
    passes: int = 1
    folds: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "vocabulary_before": self.vocabulary_before,
            "vocabulary_after": self.vocabulary_after,
            "affected": dict(self.affected),
            "dropped_empty": self.dropped_empty,
            "passes": self.passes,
            "folds": dict(self.folds),
        }


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _deletions(token: str, k: int) -> set[str]:
    out = {token}
    frontier = {token}
    for _ in range(k):
        frontier = {w[:i] + w[i + 1:] for w in frontier for i in range(len(w))}
        out |= frontier
    return out


def _neighbours_within(tokens, k: int) -> dict[str, set[str]]:
    """Pairs at Levenshtein distance <= k, found through a shared-deletion index."""
    index = defaultdict(set)
    for tok in tokens:
        for variant in _deletions(tok, k):
            index[variant].add(tok)
    near = defaultdict(set)
    for bucket in index.values():
        if len(bucket) < 2:
            continue
        for a in bucket:
            for b in bucket:
                if a < b and b not in near[a] and levenshtein(a, b) <= k:
                    near[a].add(b)
                    near[b].add(a)
    return near


def _resolve_translations(tmap: Mapping[str, str]) -> dict[str, str]:
    table = {}
    for raw, target in tmap.items():
        key = canonical_form(raw)
        if key != target:
            table[key] = target
    resolved = {}
    for key in table:
        seen = [key]
        cur = table[key]
        while cur in table:
            if cur in seen:
                raise ConfigError(f"translation cycle through {cur!r}")
            seen.append(cur)
            cur = table[cur]
        resolved[key] = cur
    return resolved


def _rank(freq):
    return lambda t: (-freq[t], t)


def _aggregate(freq: Mapping[str, int], step: Mapping[str, str]) -> Counter:
    out = Counter()
    for tok, f in freq.items():
        out[step.get(tok, tok)] += f
    return out


def _plural_step(freq: Mapping[str, int]) -> dict[str, str]:
    parent = {t: t for t in freq}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for tok in sorted(freq):
        if not tok.endswith("s"):
            continue
        stems = [tok[:-1]]
        if tok.endswith("es"):
            stems.append(tok[:-2])
        for stem in stems:
            if len(stem) >= 4 and stem in freq:
                ra, rb = find(tok), find(stem)
                if ra != rb:
                    parent[ra] = rb
                break

    groups = defaultdict(list)
    for tok in freq:
        groups[find(tok)].append(tok)
    step = {}
    rank = _rank(freq)
    for members in groups.values():
        head = min(members, key=rank)
        for tok in members:
            if tok != head:
                step[tok] = head
    return step


def _edit_step(freq: Mapping[str, int], k: int, min_freq: int) -> dict[str, str]:
    if k == 0:
        return {}
    near = _neighbours_within(freq.keys(), k)
    rank = _rank(freq)
    pointer = {}
    for tok, others in near.items():
        cands = [c for c in others if freq[c] > freq[tok] and freq[c] >= min_freq]
        if cands:
            pointer[tok] = min(cands, key=rank)
    step = {}
    for tok in pointer:
        cur = tok
        while cur in pointer:  # frequency strictly rises, so this terminates
            cur = pointer[cur]
        step[tok] = cur
    return step


def build_variant_map(
    vocabulary: Mapping[str, int], rules: NormalizationRules = NormalizationRules()
) -> VariantMap:
    """Fold a token->frequency vocabulary into canonical tokens.

    Stages run in order: canonical_form, translation, plural folding, then
    edit-distance folding. Each stage sees the frequencies aggregated by
    the previous ones. The returned mapping is flat: every image maps to
    itself, and intermediate tokens are keys too.
    """
    if not vocabulary:
        raise ValueError("vocabulary must be non-empty")
    mapping: dict[str, str] = {}
    provenance: dict[str, Provenance] = {}

    freq = Counter()
    first = {}
    for raw, f in vocabulary.items():
        if f < 1:
            raise ValueError(f"frequency of {raw!r} must be >= 1")
        canon = canonical_form(raw)
        first[raw] = canon
        freq[canon] += f

    steps = [(Provenance.CASE_FOLD, first)]
    translations = _resolve_translations(rules.translation_map)
    step = {t: translations[t] for t in freq if t in translations}
    steps.append((Provenance.TRANSLATION, step))
    freq = _aggregate(freq, step)
    if rules.plural_folding_enabled:
        step = _plural_step(freq)
        steps.append((Provenance.PLURAL, step))
        freq = _aggregate(freq, step)
    if rules.variant_merge_enabled:
        step = _edit_step(freq, rules.edit_distance_threshold, rules.min_frequency_for_canonical)
        steps.append((Provenance.EDIT_DISTANCE, step))

    keys = set(vocabulary)
    for _, st in steps:
        keys.update(st)
        keys.update(st.values())
    for tok in keys:
        cur, last = tok, None
        for stage, st in steps:
            nxt = st.get(cur, cur)
            if nxt != cur:
                cur, last = nxt, stage
        mapping[tok] = cur
        if last is not None:
            provenance[tok] = last
    for img in set(mapping.values()):
        mapping[img] = img
        provenance.pop(img, None)
    return VariantMap(mapping=mapping, provenance=provenance)


def canonical_vocabulary(vocabulary: Mapping[str, int], vmap: VariantMap) -> Counter:
    """Aggregate raw frequencies onto their canonical images."""
    return _aggregate(vocabulary, vmap.mapping)


def _token_counts(posts) -> Counter:
    return Counter(tag for post in posts.posts for tag in post.hashtags)


def _apply(posts, mapping: Mapping[str, str]):
    out = []
    for post in posts.posts:
        tags = []
        for tag in post.hashtags:
            canon = mapping.get(tag)
            if canon is not None and canon not in tags:
                tags.append(canon)
        out.append(replace(post, hashtags=tuple(tags)))
    query = set()
    for q in posts.query:
        try:
            q = canonical_form(q)
        except EmptyTokenError:
            continue
        query.add(mapping.get(q, q))
    return replace(posts, posts=tuple(out), query=tuple(sorted(query)))


def normalize_corpus(posts, rules: NormalizationRules = NormalizationRules()):
    """Canonicalize every post's hashtags; returns ``(posts, report)``.

    Each post keeps a canonical tag at most once. Folding is repeated on
    the re-counted corpus until a pass changes nothing, which makes the
    operation idempotent.
    """
    counts = _token_counts(posts)
    before = len(counts)
    dropped = 0
    valid = Counter()
    for tok, f in counts.items():
        try:
            canonical_form(tok)
        except EmptyTokenError:
            dropped += 1
            continue
        valid[tok] = f

    total = {tok: tok for tok in valid}
    prov: dict[str, Provenance] = {}
    current = posts
    passes = 0
    applied = False
    vocab = valid
    while vocab:
        passes += 1
        vmap = build_variant_map(vocab, rules)
        if all(vmap.mapping.get(t, t) == t for t in vocab):
            break
        for raw, cur in total.items():
            nxt = vmap.mapping.get(cur, cur)
            if nxt != cur:
                total[raw] = nxt
                prov[raw] = vmap.provenance[cur]
        current = _apply(current, vmap.mapping)
        applied = True
        vocab = _token_counts(current)
    if not applied:
        current = _apply(current, total)

    affected = Counter(p.value for p in prov.values())
    report = NormalizationReport(
        vocabulary_before=before,
        vocabulary_after=len(set(total.values())),
        affected={p.value: affected.get(p.value, 0) for p in Provenance},
        dropped_empty=dropped,
        passes=passes,
        folds={k: v for k, v in sorted(total.items()) if k != v},
    )
    return current, report


def load_translation_map(path) -> dict[str, str]:
    """Read a raw<TAB>canonical TSV; '//' starts a comment line."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("//"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ConfigError(f"{path}:{line_no}: expected raw<TAB>canonical")
            table[parts[0].strip()] = canonical_form(parts[1].strip())
    return table
